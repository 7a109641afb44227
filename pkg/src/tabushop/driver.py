"""Shared run loop for the plain and guided searches.

Two execution paths produce bit-identical trajectories for a given seed:

* ``engine="python"`` -- the readable step implementation below, built on
  the public operations (neighborhood scan, selection, expirations).
* ``engine="fast"`` -- a compiled kernel (:mod:`tabushop.engine`) that fuses
  the same steps.  It consumes the same SplitMix64 stream in the same
  order (one tenure draw, then one tie-break draw per iteration), which is
  what keeps the two paths interchangeable and testable against each other.

Within an iteration the order of events is fixed: draw tenure, scan the
neighborhood, select, apply the move, fold the new incumbent into the
objective bounds when due (every ``d`` iterations or on a new global best),
refresh predictions, then assign expirations to the flipped components.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .encoding import PairIndexSet, build_index_set, changed_components, encode
from .gta import ThetaSchedule, tenure_for, theta_at
from .instances import Instance
from .learning import NOT_SEEN, ObjectiveBounds, observe
from .rng import SplitMix64
from .runlog import RunLogRecord
from .schedule import (
    INFEASIBLE,
    Solution,
    apply_move,
    critical_blocks,
    evaluate,
    n4_moves,
    random_solution,
)
from .tabu import NeighborEval, StepOutcome, TabuState, TenureRange, neighbor_expiration, select_next


@dataclass
class RunResult:
    records: list[RunLogRecord]
    best_solution: Solution
    best_makespan: int
    bounds: ObjectiveBounds | None = None
    #: per-epoch (epoch, d1 copy, d0 copy) when emit_bounds is on
    bounds_snapshots: list | None = None
    degenerate: bool = False


def python_search_step(
    inst: Instance,
    idx: PairIndexSet,
    state: TabuState,
    sol: Solution,
    bits: np.ndarray | None,
    tenure_range: TenureRange,
    rng: SplitMix64,
    *,
    probs: np.ndarray | None = None,
    bounds: ObjectiveBounds | None = None,
    d: int = 100,
    theta: float = 0.0,
    epsilon: float = 1e-4,
) -> tuple[StepOutcome, Solution]:
    """One search iteration (plain when ``probs`` is None, guided otherwise)."""
    tenure = tenure_range.t_min + rng.below(tenure_range.t_max - tenure_range.t_min + 1)

    times = evaluate(inst, sol)
    if times is None:
        raise ValueError("current solution is infeasible")
    blocks = critical_blocks(inst, times, sol)
    moves = n4_moves(inst, sol, blocks)

    candidates: list[NeighborEval] = []
    for mv in moves:
        changed = tuple(changed_components(mv, sol, idx))
        expir = neighbor_expiration(state, changed)
        neighbor = apply_move(sol, mv)
        nt = evaluate(inst, neighbor)
        if nt is None:
            continue  # cyclic ordering: never a candidate
        candidates.append(NeighborEval(move=mv, makespan=nt.makespan, expiration=expir, changed=changed))

    if not candidates:
        out = StepOutcome(
            solution=sol, makespan=times.makespan, changed=(), tenure=tenure,
            improved=False, fallback=False, degenerate=True,
        )
        return out, sol

    chosen = select_next(candidates, state.iter, rng)
    fallback = all(c.expiration > state.iter for c in candidates)

    new_sol = apply_move(sol, chosen.move).with_makespan(chosen.makespan)
    if bits is not None:
        for j in chosen.changed:
            bits[j] ^= 1

    improved = chosen.makespan < state.best_makespan
    due = (state.iter % d == 0) or improved
    if bounds is not None and due:
        if bits is None:
            raise ValueError("bounds tracking requires bit tracking")
        observe(bounds, bits, int(chosen.makespan))
        if probs is not None:
            _refresh_probs(probs, bounds, theta)

    now = state.iter
    for j in chosen.changed:
        if probs is not None:
            nb = int(bits[j])
            state.tabu_exp[j] = tenure_for(float(probs[j]), nb, tenure, now, epsilon)
        else:
            state.tabu_exp[j] = now + tenure

    if improved:
        state.best_solution = new_sol
        state.best_makespan = chosen.makespan
    state.iter += 1

    out = StepOutcome(
        solution=new_sol, makespan=chosen.makespan, changed=chosen.changed,
        tenure=tenure, improved=improved, fallback=fallback,
    )
    return out, new_sol


def _refresh_probs(probs: np.ndarray, bounds: ObjectiveBounds, theta: float) -> None:
    """Recompute every fully-seen component's prediction; others stay at 0.5."""
    both = (bounds.d1 < NOT_SEEN) & (bounds.d0 < NOT_SEEN)
    probs.fill(0.5)
    if theta == 0.0 or not both.any():
        return
    z = theta * (bounds.d1[both] - bounds.d0[both]).astype(np.float64)
    z = np.clip(z, -709.0, 709.0)
    probs[both] = 1.0 / (1.0 + np.exp(z))


def _active_theta(epoch: int, schedule: ThetaSchedule) -> float:
    """Theta in force during ``epoch``: 0 in epoch 1, then the ladder value."""
    if epoch == 1:
        return 0.0
    return theta_at(schedule, epoch - 1)


def run_search(
    inst: Instance,
    *,
    algorithm: str,
    nepochs: int,
    niters: int,
    seed: int,
    tenure_range: TenureRange,
    guided: bool,
    theta_min: float,
    theta_max: float,
    d: int,
    epsilon: float,
    emit_bounds: bool,
    engine: str = "fast",
    time_limit: float | None = None,
    on_step=None,
) -> RunResult:
    if engine not in ("fast", "python"):
        raise ValueError(f"unknown engine {engine!r}")
    if on_step is not None and engine != "python":
        raise ValueError("per-step hooks require engine='python'")

    idx = build_index_set(inst)
    rng = SplitMix64(seed)
    initial = random_solution(inst, rng)

    schedule = None
    if guided:
        mode = "by-time" if time_limit is not None else "by-epoch"
        horizon = float(time_limit) if time_limit is not None else float(nepochs)
        schedule = ThetaSchedule(mode=mode, theta_min=theta_min, theta_max=theta_max, horizon=horizon)

    track_bounds = guided or emit_bounds

    if engine == "fast":
        from .engine import run_fast

        return run_fast(
            inst, idx, initial, rng,
            algorithm=algorithm, nepochs=nepochs, niters=niters, seed=seed,
            tenure_range=tenure_range, guided=guided, schedule=schedule,
            d=d, epsilon=epsilon, track_bounds=track_bounds, emit_bounds=emit_bounds,
            time_limit=time_limit,
        )

    return _run_python(
        inst, idx, initial, rng,
        algorithm=algorithm, nepochs=nepochs, niters=niters, seed=seed,
        tenure_range=tenure_range, guided=guided, schedule=schedule,
        d=d, epsilon=epsilon, track_bounds=track_bounds, emit_bounds=emit_bounds,
        time_limit=time_limit, on_step=on_step,
    )


def _run_python(
    inst, idx, initial, rng, *, algorithm, nepochs, niters, seed, tenure_range,
    guided, schedule, d, epsilon, track_bounds, emit_bounds, time_limit, on_step,
) -> RunResult:
    t0 = time.monotonic()
    state = TabuState.fresh(len(idx))
    sol = initial
    times = evaluate(inst, sol)
    state.best_solution = sol.with_makespan(times.makespan)
    state.best_makespan = times.makespan

    bits = encode(sol, idx) if track_bounds else None
    bounds = ObjectiveBounds.empty(len(idx)) if track_bounds else None
    probs = np.full(len(idx), 0.5) if guided else None

    records: list[RunLogRecord] = []
    snapshots = [] if emit_bounds else None
    degenerate = False

    def emit_record(epoch: int, theta: float | None):
        records.append(
            RunLogRecord(
                algorithm=algorithm, instance=inst.name, seed=seed, epoch=epoch,
                iters=state.iter - 1, best=int(state.best_makespan),
                theta=theta, elapsed_ms=int((time.monotonic() - t0) * 1000),
            )
        )
        if emit_bounds:
            snapshots.append((epoch, bounds.d1.copy(), bounds.d0.copy()))

    if time_limit is None:
        for epoch in range(1, nepochs + 1):
            state.epoch = epoch
            theta = _active_theta(epoch, schedule) if guided else None
            if not degenerate:
                for _ in range(niters):
                    out, sol = python_search_step(
                        inst, idx, state, sol, bits, tenure_range, rng,
                        probs=probs, bounds=bounds, d=d,
                        theta=(theta or 0.0), epsilon=epsilon,
                    )
                    if on_step is not None:
                        on_step(out, state)
                    if out.degenerate:
                        degenerate = True
                        break
            emit_record(epoch, theta)
    else:
        epoch = 0
        iters_at_record = 0
        while True:
            elapsed = time.monotonic() - t0
            if elapsed >= time_limit:
                break
            theta = None
            if guided:
                theta = 0.0 if state.iter <= d else theta_at(schedule, elapsed)
            ran_any = False
            for _ in range(d):
                out, sol = python_search_step(
                    inst, idx, state, sol, bits, tenure_range, rng,
                    probs=probs, bounds=bounds, d=d,
                    theta=(theta or 0.0), epsilon=epsilon,
                )
                ran_any = True
                if on_step is not None:
                    on_step(out, state)
                if out.degenerate:
                    degenerate = True
                    break
            if state.iter - 1 - iters_at_record >= niters or degenerate:
                epoch += 1
                emit_record(epoch, theta)
                iters_at_record = state.iter - 1
            if degenerate or not ran_any:
                break
        if not records or records[-1].iters != state.iter - 1:
            epoch += 1
            emit_record(epoch, _active_last_theta(guided, schedule, time_limit, t0))

    return RunResult(
        records=records,
        best_solution=state.best_solution,
        best_makespan=int(state.best_makespan),
        bounds=bounds,
        bounds_snapshots=snapshots,
        degenerate=degenerate,
    )


def _active_last_theta(guided, schedule, time_limit, t0):
    if not guided:
        return None
    elapsed = min(time.monotonic() - t0, time_limit)
    return theta_at(schedule, elapsed)
