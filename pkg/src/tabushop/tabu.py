"""Tabu search over the critical-block neighborhood.

Tabu status lives per pair component: ``tabu_exp[j]`` is the iteration at
which component j stops being tabu (a component is tabu while
``tabu_exp[j] > iter``).  A neighbor inherits the latest expiration among
the components it would flip.  There is no aspiration rule: a tabu neighbor
is rejected even when it would improve the global best.

The iteration counter runs continuously across epochs.  Epochs only
segment logging (and, for the guided variant, the parameter schedule);
resetting the counter each epoch would silently re-prohibit components
whose expirations were set in earlier epochs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .instances import Instance
from .rng import SplitMix64
from .schedule import INFEASIBLE, Move, Solution


@dataclass(frozen=True)
class TenureRange:
    """Tenure is drawn uniformly from [t_min, t_max] each iteration."""

    t_min: int = 5
    t_max: int = 11

    def __post_init__(self):
        if self.t_min < 0 or self.t_max < self.t_min:
            raise ValueError(f"need 0 <= t_min <= t_max, got [{self.t_min}, {self.t_max}]")


@dataclass(frozen=True)
class RunParams:
    nepochs: int
    niters: int
    seed: int

    def __post_init__(self):
        if self.nepochs < 1 or self.niters < 0:
            raise ValueError("nepochs must be >= 1 and niters >= 0")


@dataclass
class TabuState:
    """Mutable per-run search state."""

    tabu_exp: np.ndarray  # int64, one slot per pair component
    iter: int = 1
    epoch: int = 1
    best_solution: Solution | None = None
    best_makespan: int | float = INFEASIBLE

    @classmethod
    def fresh(cls, n_components: int) -> "TabuState":
        return cls(tabu_exp=np.zeros(n_components, dtype=np.int64))


@dataclass(frozen=True)
class NeighborEval:
    """A scanned neighbor: the move, its makespan and its tabu expiration."""

    move: Move
    makespan: int | float
    expiration: int
    changed: tuple[int, ...] = field(default=(), compare=False)


def neighbor_expiration(state: TabuState, changed: Sequence[int]) -> int:
    """Latest tabu expiration among the components a move would flip.

    The neighbor is tabu iff the returned iteration exceeds the current one.
    """
    e = state.iter
    for j in changed:
        v = int(state.tabu_exp[j])
        if v > e:
            e = v
    return e


def select_next(candidates: Sequence[NeighborEval], now: int, rng: SplitMix64) -> NeighborEval:
    """Best non-tabu neighbor, else the earliest-expiring one; ties uniform.

    Exactly one RNG draw is consumed per call (even for singleton ties) so
    that trajectories are reproducible independent of tie multiplicity.
    """
    if not candidates:
        raise ValueError("empty neighborhood")
    non_tabu = [c for c in candidates if c.expiration <= now]
    if non_tabu:
        best = min(c.makespan for c in non_tabu)
        ties = [c for c in non_tabu if c.makespan == best]
    else:
        earliest = min(c.expiration for c in candidates)
        ties = [c for c in candidates if c.expiration == earliest]
    return ties[rng.below(len(ties))]


@dataclass(frozen=True)
class StepOutcome:
    """What one search iteration did (consumed by hooks and tests)."""

    solution: Solution
    makespan: int | float
    changed: tuple[int, ...]
    tenure: int
    improved: bool
    fallback: bool  # all-tabu fallback fired
    degenerate: bool = False


def tabu_step(
    inst: Instance,
    state: TabuState,
    sol: Solution,
    tenure_range: TenureRange,
    rng: SplitMix64,
    idx=None,
) -> tuple[Solution, TabuState]:
    """One plain tabu iteration; returns the new incumbent and the state.

    ``idx`` (a PairIndexSet) is computed on the fly when omitted; callers
    looping over steps should pass it in.
    """
    from .driver import python_search_step
    from .encoding import build_index_set

    if idx is None:
        idx = build_index_set(inst)
    out, new_sol = python_search_step(
        inst, idx, state, sol, None, tenure_range, rng, probs=None, bounds=None
    )
    return new_sol, state


Hook = Callable[[StepOutcome, TabuState], None]


def run_tabu(
    inst: Instance,
    params: RunParams,
    tenure_range: TenureRange = TenureRange(),
    *,
    d: int = 100,
    emit_bounds: bool = False,
    engine: str = "fast",
    time_limit: float | None = None,
    on_step: Hook | None = None,
):
    """Full tabu run; returns a :class:`tabushop.driver.RunResult`.

    ``emit_bounds`` tracks per-component best objectives at the same cadence
    the guided algorithm uses (every ``d`` iterations or on improvement) and
    snapshots them per epoch, which is what the fit workflow consumes.
    """
    from .driver import run_search

    return run_search(
        inst,
        algorithm="tabu",
        nepochs=params.nepochs,
        niters=params.niters,
        seed=params.seed,
        tenure_range=tenure_range,
        guided=False,
        theta_min=0.0,
        theta_max=0.0,
        d=d,
        epsilon=1e-4,
        emit_bounds=emit_bounds,
        engine=engine,
        time_limit=time_limit,
        on_step=on_step,
    )
