"""Command line interface.

Subcommands: solve, fit, compare, bound, predict.  A key=value config file
can seed any solve flag (--config); explicit flags win.  The default output
directory comes from $TABUSHOP_OUT when set.

compare exit codes (for scripting): 0 when A dominates at the final
checkpoint, 10 when B dominates, 11 on a tie.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .harness import (
    ExperimentConfig,
    compare_logs,
    fit_bounds_files,
    fit_rows_to_csv,
    fit_table_rows,
    load_config_file,
    solve_experiment,
)
from .instances import load_instance
from .learning import LogisticModel, TrainingTable, backbone_upper_bound, predict


_SOLVE_FIELDS = {
    # name -> (cast, hard default)
    "algo": (str, "tabu"),
    "instance": (str, None),
    "format": (str, "std"),
    "runs": (int, 1),
    "seed": (int, 1),
    "nepochs": (int, 1),
    "niters": (int, 1000),
    "tmin": (int, 5),
    "tmax": (int, 11),
    "theta_min": (float, 0.001),
    "theta_max": (float, 1.0),
    "d": (int, 100),
    "epsilon": (float, 1e-4),
    "time_limit": (float, None),
    "emit_bounds": (bool, False),
    "out": (str, None),
    "workers": (int, 1),
}


def _add_solve_parser(sub):
    # Defaults stay None here so a config file can fill anything the user
    # did not pass explicitly; hard defaults are applied in _solve.
    p = sub.add_parser("solve", help="run tabu or guided tabu on an instance")
    p.add_argument("--config", help="key=value file with defaults for any flag below")
    p.add_argument("--algo", choices=["tabu", "gta"])
    p.add_argument("--instance")
    p.add_argument("--format", dest="format", choices=["std", "taillard"])
    p.add_argument("--runs", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--nepochs", type=int)
    p.add_argument("--niters", type=int)
    p.add_argument("--tmin", type=int)
    p.add_argument("--tmax", type=int)
    p.add_argument("--theta-min", type=float)
    p.add_argument("--theta-max", type=float)
    p.add_argument("--d", type=int)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--time-limit", type=float, help="seconds per run")
    p.add_argument("--emit-bounds", action="store_const", const=True, default=None)
    p.add_argument("--out")
    p.add_argument("--workers", type=int)
    return p


def _cast_config_value(cast, raw: str):
    if cast is bool:
        return raw.lower() in ("1", "true", "yes", "on")
    return cast(raw)


def _solve(args) -> int:
    file_values = load_config_file(args.config) if args.config else {}
    unknown = set(file_values) - set(_SOLVE_FIELDS)
    if unknown:
        print(f"error: unknown config keys: {sorted(unknown)}", file=sys.stderr)
        return 2

    resolved = {}
    for name, (cast, default) in _SOLVE_FIELDS.items():
        cli_value = getattr(args, name)
        if cli_value is not None:
            resolved[name] = cli_value
        elif name in file_values:
            resolved[name] = _cast_config_value(cast, file_values[name])
        elif default is not None or name == "instance":
            resolved[name] = default
    if resolved.get("instance") is None:
        print("error: --instance is required (flag or config file)", file=sys.stderr)
        return 2

    resolved["fmt"] = resolved.pop("format")
    if resolved.get("out") is None:
        resolved.pop("out", None)  # keep the $TABUSHOP_OUT-aware default
    cfg = ExperimentConfig(**resolved)
    summaries = solve_experiment(cfg)
    for s in summaries:
        flag = " [degenerate]" if s["degenerate"] else ""
        print(f"seed={s['seed']} best={s['best']} log={s['log']}{flag}")
    return 0


def _fit(args) -> int:
    if args.table:
        table = TrainingTable.from_csv(Path(args.table).read_text())
        row = fit_table_rows(table)
        print(f"theta={row['theta']:.10g} accuracy={row['accuracy']:.6f} "
              f"rows={row['rows']} separated={int(row['separated'])}")
        return 0
    if not (args.instance and args.reference and args.bounds):
        print("error: need --table, or --instance + --reference + --bounds", file=sys.stderr)
        return 2
    inst = load_instance(args.instance, args.fmt)
    rows = fit_bounds_files(inst, args.reference, args.bounds)
    csv = fit_rows_to_csv(rows)
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(csv)
        print(f"wrote {args.out} ({len(rows)} rows)")
    else:
        print(csv, end="")
    return 0


def _compare(args) -> int:
    curve = compare_logs(
        args.a, args.b,
        checkpoint_mode=args.checkpoint_mode,
        bucket_ms=args.bucket_ms,
        n_boot=args.bootstrap,
        level=args.level,
        seed=args.seed,
    )
    csv = curve.to_csv()
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(csv)
        print(f"wrote {args.out} ({len(curve.points)} checkpoints)")
    else:
        print(csv, end="")
    last = curve.points[-1]
    if last.p_a_lt_b > last.p_b_lt_a:
        return 0
    if last.p_b_lt_a > last.p_a_lt_b:
        return 10
    return 11


def _bound(args) -> int:
    rho = backbone_upper_bound(args.accuracy, args.p_best, args.p_other)
    print(f"{rho:g}")
    return 0


def _predict(args) -> int:
    p = predict(LogisticModel(args.theta), args.d1, args.d0)
    print(f"{p:.10g}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="tabushop",
        description="Job shop tabu search with logistic guidance and dominance analysis",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    _add_solve_parser(sub)

    p_fit = sub.add_parser("fit", help="fit the logistic model from bounds snapshots or a CSV table")
    p_fit.add_argument("--table", help="CSV with header d1,d0,opt")
    p_fit.add_argument("--instance")
    p_fit.add_argument("--format", dest="fmt", choices=["std", "taillard"], default="std")
    p_fit.add_argument("--reference", help="reference solution file (labels)")
    p_fit.add_argument("--bounds", nargs="*", help="bounds snapshot .npz files")
    p_fit.add_argument("--out", help="CSV output path")

    p_cmp = sub.add_parser("compare", help="probability-dominance curve between two log sets")
    p_cmp.add_argument("--a", nargs="+", required=True, help="JSONL logs of algorithm A")
    p_cmp.add_argument("--b", nargs="+", required=True, help="JSONL logs of algorithm B")
    p_cmp.add_argument("--checkpoint-mode", choices=["epoch", "time"], default="epoch")
    p_cmp.add_argument("--bucket-ms", type=int, default=None)
    p_cmp.add_argument("--bootstrap", type=int, default=1000)
    p_cmp.add_argument("--level", type=float, default=0.95)
    p_cmp.add_argument("--seed", type=int, default=0)
    p_cmp.add_argument("--out")

    p_bound = sub.add_parser("bound", help="backbone upper bound from accuracy")
    p_bound.add_argument("--accuracy", type=float, required=True)
    p_bound.add_argument("--p-best", type=float, required=True)
    p_bound.add_argument("--p-other", type=float, required=True)

    p_pred = sub.add_parser("predict", help="one-shot prediction from theta, d1, d0")
    p_pred.add_argument("--theta", type=float, required=True)
    p_pred.add_argument("--d1", type=float, required=True)
    p_pred.add_argument("--d0", type=float, required=True)

    args = parser.parse_args(argv)
    handlers = {
        "solve": _solve,
        "fit": _fit,
        "compare": _compare,
        "bound": _bound,
        "predict": _predict,
    }
    return handlers[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
