"""Guided tabu search: prediction-stretched tenures under a rising theta.

The only difference from the plain search is how expirations are assigned
to flipped components.  When the model prediction agrees with a component's
new value, its tenure is stretched by max(p, 1-p) / max(eps, min(p, 1-p)),
so confidently-predicted values change back more slowly; disagreements and
p = 0.5 keep the flat tenure.  Theta follows a log-uniform ladder from
theta_min to theta_max over the run, and is 0 during the first epoch, which
makes the early search behave exactly like the plain algorithm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .instances import Instance
from .tabu import TenureRange


@dataclass(frozen=True)
class ThetaSchedule:
    """Log-uniform theta ladder, indexed by epoch or by elapsed time.

    ``theta_min == theta_max`` pins the schedule to a constant (the value 0
    is allowed there; it reduces the guided search to the plain one).
    Otherwise both ends must be positive with theta_min < theta_max, and
    by-epoch mode needs horizon >= 3 because the exponent denominator is
    ``nepochs - 2``.
    """

    mode: str  # "by-epoch" | "by-time"
    theta_min: float
    theta_max: float
    horizon: float  # nepochs, or the time limit in seconds

    def __post_init__(self):
        if self.mode not in ("by-epoch", "by-time"):
            raise ValueError(f"unknown schedule mode {self.mode!r}")
        if self.theta_min == self.theta_max:
            if self.theta_min < 0:
                raise ValueError("constant theta must be >= 0")
            return
        if not (0 < self.theta_min < self.theta_max):
            raise ValueError("need 0 < theta_min < theta_max (or equal for a constant schedule)")


def theta_at(schedule: ThetaSchedule, at: float) -> float:
    """Theta after epoch ``at`` (by-epoch) or at elapsed seconds ``at`` (by-time).

    The growth factor uses ln(theta_max / theta_min) so the ladder is
    genuinely log-uniform between the two ends; epoch 1 yields theta_min
    exactly, and the value crosses theta_max one step before the horizon.
    """
    if schedule.theta_min == schedule.theta_max:
        return schedule.theta_min
    span = math.log(schedule.theta_max / schedule.theta_min)
    if schedule.mode == "by-epoch":
        if schedule.horizon < 3:
            raise ValueError("by-epoch schedule needs nepochs >= 3 (exponent denominator)")
        if at < 1:
            raise ValueError("epoch must be >= 1")
        frac = (at - 1) / (schedule.horizon - 2)
    else:
        if at < 0:
            raise ValueError("elapsed time must be >= 0")
        frac = at / schedule.horizon
    return schedule.theta_min * math.exp(span * frac)


def tenure_for(p: float, new_bit: int, base_tenure: int, now: int, epsilon: float) -> int:
    """Expiration iteration for a component that just flipped to ``new_bit``.

    Agreement between the prediction and the new value stretches the base
    tenure by the odds ratio (capped through epsilon); disagreement and the
    p = 0.5 boundary leave it flat, so the rule is continuous at 0.5.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability out of range: {p}")
    if base_tenure < 0:
        raise ValueError("base tenure must be >= 0")
    if (new_bit == 1 and p >= 0.5) or (new_bit == 0 and p <= 0.5):
        hi = p if p >= 0.5 else 1.0 - p
        lo = 1.0 - p if p >= 0.5 else p
        ratio = hi / max(epsilon, lo)
        return now + int(math.floor(base_tenure * ratio + 0.5))
    return now + base_tenure


@dataclass(frozen=True)
class GtaParams:
    """Guided-run parameters; defaults follow the reported experiment setup."""

    nepochs: int
    niters: int
    seed: int
    tenure_range: TenureRange = TenureRange(5, 11)
    theta_min: float = 0.001
    theta_max: float = 1.0
    d: int = 100
    epsilon: float = 1e-4

    def __post_init__(self):
        if self.nepochs < 1 or self.niters < 0:
            raise ValueError("nepochs must be >= 1 and niters >= 0")
        if self.d < 1:
            raise ValueError("update period d must be >= 1")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        # Schedule consistency is validated by ThetaSchedule at run time.


def run_gta(
    inst: Instance,
    params: GtaParams,
    *,
    emit_bounds: bool = False,
    engine: str = "fast",
    time_limit: float | None = None,
    on_step=None,
):
    """Full guided run; returns a :class:`tabushop.driver.RunResult`."""
    from .driver import run_search

    return run_search(
        inst,
        algorithm="gta",
        nepochs=params.nepochs,
        niters=params.niters,
        seed=params.seed,
        tenure_range=params.tenure_range,
        guided=True,
        theta_min=params.theta_min,
        theta_max=params.theta_max,
        d=params.d,
        epsilon=params.epsilon,
        emit_bounds=emit_bounds,
        engine=engine,
        time_limit=time_limit,
        on_step=on_step,
    )
