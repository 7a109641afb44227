"""Probability-dominance comparison of two algorithms over an instance set.

For a checkpoint c, the chance that algorithm A beats B on a uniformly
chosen instance is estimated by averaging, over instances, the fraction of
run pairs (one run of each) where A's value is strictly smaller.  Ties
count for neither side, so P(A<B) + P(B<A) + tie mass = 1 exactly.

Confidence intervals come from a two-level percentile bootstrap: resample
instances with replacement, then within each sampled instance resample
each algorithm's runs with replacement.  Instance-level resampling carries
most of the variance and matches "each instance equally likely".
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np


@dataclass(frozen=True)
class PerformanceSample:
    algorithm: str
    instance: str
    run: int
    checkpoint: int | float
    value: float


@dataclass(frozen=True)
class CurvePoint:
    checkpoint: int | float
    p_a_lt_b: float
    p_a_lo: float
    p_a_hi: float
    p_b_lt_a: float
    p_b_lo: float
    p_b_hi: float
    degenerate_ci: bool = False


@dataclass(frozen=True)
class DominanceCurve:
    points: tuple[CurvePoint, ...]

    def to_csv(self) -> str:
        lines = ["checkpoint,p_a_lt_b,p_a_lo,p_a_hi,p_b_lt_a,p_b_lo,p_b_hi"]
        for pt in self.points:
            lines.append(
                f"{pt.checkpoint:g},{pt.p_a_lt_b:.6f},{pt.p_a_lo:.6f},{pt.p_a_hi:.6f},"
                f"{pt.p_b_lt_a:.6f},{pt.p_b_lo:.6f},{pt.p_b_hi:.6f}"
            )
        return "\n".join(lines) + "\n"


def win_prob(xs: Sequence[float], ys: Sequence[float]) -> float:
    """P(x < y) over all pairs; strict inequality, ties contribute nothing."""
    if len(xs) == 0 or len(ys) == 0:
        raise ValueError("empty performance vector")
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    return float((x[:, None] < y[None, :]).mean())


def tie_prob(xs: Sequence[float], ys: Sequence[float]) -> float:
    if len(xs) == 0 or len(ys) == 0:
        raise ValueError("empty performance vector")
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    return float((x[:, None] == y[None, :]).mean())


def aggregate(per_instance: Sequence[float]) -> float:
    """Unweighted mean over instances (each equally likely to be drawn).

    Uses an exactly-rounded sum so the result is genuinely invariant under
    instance reordering.
    """
    if len(per_instance) == 0:
        raise ValueError("no per-instance probabilities to aggregate")
    return math.fsum(per_instance) / len(per_instance)


@dataclass(frozen=True)
class BootstrapCI:
    lo: float
    hi: float
    degenerate: bool = False


def bootstrap_ci(
    groups: Mapping[str, tuple[Sequence[float], Sequence[float]]],
    n_boot: int,
    level: float,
    rng: np.random.Generator,
) -> tuple[BootstrapCI, BootstrapCI]:
    """Percentile CIs for (P(A<B), P(B<A)) from per-instance run vectors.

    ``groups`` maps instance id -> (values of A, values of B) at one
    checkpoint.  Both directions are estimated on the same resamples so the
    pair of intervals is internally consistent.
    """
    if n_boot < 1:
        raise ValueError("n_boot must be >= 1")
    if not 0.0 < level < 1.0:
        raise ValueError("level must be in (0, 1)")
    if not groups:
        raise ValueError("no instances")
    keys = sorted(groups)
    xs = {k: np.asarray(groups[k][0], dtype=np.float64) for k in keys}
    ys = {k: np.asarray(groups[k][1], dtype=np.float64) for k in keys}

    point_ab = aggregate([win_prob(xs[k], ys[k]) for k in keys])
    point_ba = aggregate([win_prob(ys[k], xs[k]) for k in keys])
    if len(keys) == 1 and len(xs[keys[0]]) == 1 and len(ys[keys[0]]) == 1:
        return (
            BootstrapCI(point_ab, point_ab, degenerate=True),
            BootstrapCI(point_ba, point_ba, degenerate=True),
        )

    reps_ab = np.empty(n_boot)
    reps_ba = np.empty(n_boot)
    k = len(keys)
    for b in range(n_boot):
        chosen = rng.integers(0, k, size=k)
        acc_ab = 0.0
        acc_ba = 0.0
        for ci in chosen:
            key = keys[ci]
            x = xs[key]
            y = ys[key]
            rx = x[rng.integers(0, len(x), size=len(x))]
            ry = y[rng.integers(0, len(y), size=len(y))]
            acc_ab += (rx[:, None] < ry[None, :]).mean()
            acc_ba += (ry[:, None] < rx[None, :]).mean()
        reps_ab[b] = acc_ab / k
        reps_ba[b] = acc_ba / k
    alpha = (1.0 - level) / 2.0
    ci_ab = BootstrapCI(
        float(np.quantile(reps_ab, alpha)), float(np.quantile(reps_ab, 1.0 - alpha))
    )
    ci_ba = BootstrapCI(
        float(np.quantile(reps_ba, alpha)), float(np.quantile(reps_ba, 1.0 - alpha))
    )
    return ci_ab, ci_ba


def _group_by_instance(
    samples: Sequence[PerformanceSample], checkpoint
) -> dict[str, list[float]]:
    grouped: dict[str, list[float]] = {}
    for s in samples:
        if s.checkpoint == checkpoint:
            grouped.setdefault(s.instance, []).append(s.value)
    return grouped


def dominance_curve(
    samples_a: Sequence[PerformanceSample],
    samples_b: Sequence[PerformanceSample],
    checkpoints: Sequence[int | float],
    n_boot: int = 1000,
    level: float = 0.95,
    rng: np.random.Generator | None = None,
) -> DominanceCurve:
    """Both win probabilities plus CIs at every requested checkpoint.

    Raises when any (algorithm, instance) lacks data at some checkpoint;
    callers are expected to pass checkpoints both logs actually cover.
    """
    if rng is None:
        rng = np.random.default_rng(0)
    instances = sorted({s.instance for s in samples_a} | {s.instance for s in samples_b})
    points = []
    for c in checkpoints:
        ga = _group_by_instance(samples_a, c)
        gb = _group_by_instance(samples_b, c)
        groups = {}
        for inst_id in instances:
            if inst_id not in ga or inst_id not in gb:
                raise ValueError(f"missing checkpoint {c} data for instance {inst_id}")
            groups[inst_id] = (ga[inst_id], gb[inst_id])
        p_ab = aggregate([win_prob(x, y) for x, y in groups.values()])
        p_ba = aggregate([win_prob(y, x) for x, y in groups.values()])
        ci_ab, ci_ba = bootstrap_ci(groups, n_boot, level, rng)
        points.append(
            CurvePoint(
                checkpoint=c,
                p_a_lt_b=p_ab, p_a_lo=ci_ab.lo, p_a_hi=ci_ab.hi,
                p_b_lt_a=p_ba, p_b_lo=ci_ba.lo, p_b_hi=ci_ba.hi,
                degenerate_ci=ci_ab.degenerate or ci_ba.degenerate,
            )
        )
    return DominanceCurve(points=tuple(points))


def samples_from_records(records, algorithm_label: str | None = None) -> list[PerformanceSample]:
    """Per-epoch best values from run log records (best-so-far is monotone)."""
    out = []
    for rec in records:
        out.append(
            PerformanceSample(
                algorithm=algorithm_label or rec.algorithm,
                instance=rec.instance,
                run=rec.seed,
                checkpoint=rec.epoch,
                value=float(rec.best),
            )
        )
    return out


def samples_at_time_buckets(records_by_run, buckets, algorithm_label: str) -> list[PerformanceSample]:
    """Best-so-far at each elapsed-time bucket for wall-clock comparisons.

    ``records_by_run`` maps (instance, run) -> time-ordered records.  A run
    must have at least one record at or before each bucket.
    """
    out = []
    for (inst_id, run), recs in records_by_run.items():
        recs = sorted(recs, key=lambda r: r.elapsed_ms)
        for t in buckets:
            best = None
            for r in recs:
                if r.elapsed_ms <= t:
                    best = r.best
                else:
                    break
            if best is None:
                raise ValueError(
                    f"run ({inst_id}, {run}) has no record at or before bucket {t} ms"
                )
            out.append(
                PerformanceSample(
                    algorithm=algorithm_label, instance=inst_id, run=run,
                    checkpoint=t, value=float(best),
                )
            )
    return out
