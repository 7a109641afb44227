"""Learning layer over visited solutions.

For every binary pair component we track the best makespan seen with the
component at 1 (``d1``) and at 0 (``d0``).  A one-parameter logistic model
p = 1 / (1 + exp(theta * (d1 - d0))) then estimates the probability that
the component equals 1 in an optimal solution.  The single shared parameter
makes the model invariant under relabeling any component (swapping its
0/1 encoding swaps d1/d0 and flips the label, leaving the fit unchanged).
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .encoding import PairIndexSet, encode
from .instances import Instance, ReferenceSolution
from .schedule import Solution

#: Sentinel for "side not seen yet" in the int64 bound arrays.
NOT_SEEN = np.int64(2**62)

THETA_BRACKET = 10.0
GRAD_TOL = 1e-10


@dataclass
class ObjectiveBounds:
    """Per-component best makespans, one slot per pair component.

    Unseen sides hold :data:`NOT_SEEN`; the ``seen1`` / ``seen0`` views are
    derived from that.  Values are monotonically non-increasing over a run.
    """

    d1: np.ndarray
    d0: np.ndarray

    @classmethod
    def empty(cls, n_components: int) -> "ObjectiveBounds":
        return cls(
            d1=np.full(n_components, NOT_SEEN, dtype=np.int64),
            d0=np.full(n_components, NOT_SEEN, dtype=np.int64),
        )

    @property
    def seen1(self) -> np.ndarray:
        return self.d1 < NOT_SEEN

    @property
    def seen0(self) -> np.ndarray:
        return self.d0 < NOT_SEEN

    def copy(self) -> "ObjectiveBounds":
        return ObjectiveBounds(self.d1.copy(), self.d0.copy())


def observe(bounds: ObjectiveBounds, bits: np.ndarray, makespan: int) -> ObjectiveBounds:
    """Fold one visited solution into the bounds (in place; also returned)."""
    ones = bits.astype(bool)
    np.minimum(bounds.d1, makespan, out=bounds.d1, where=ones)
    np.minimum(bounds.d0, makespan, out=bounds.d0, where=~ones)
    return bounds


@dataclass(frozen=True)
class LogisticModel:
    theta: float


@dataclass(frozen=True)
class TrainingTable:
    """Rows (d1, d0, opt) for components whose both sides were seen."""

    d1: np.ndarray  # float64
    d0: np.ndarray  # float64
    opt: np.ndarray  # uint8

    def __len__(self) -> int:
        return len(self.opt)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("d1,d0,opt\n")
        for a, b, y in zip(self.d1, self.d0, self.opt):
            buf.write(f"{a:g},{b:g},{int(y)}\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "TrainingTable":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines or lines[0].replace(" ", "") != "d1,d0,opt":
            raise ValueError("expected CSV header 'd1,d0,opt'")
        rows = [ln.split(",") for ln in lines[1:]]
        d1 = np.array([float(r[0]) for r in rows])
        d0 = np.array([float(r[1]) for r in rows])
        opt = np.array([int(r[2]) for r in rows], dtype=np.uint8)
        if not np.isin(opt, (0, 1)).all():
            raise ValueError("opt column must be 0/1")
        return cls(d1=d1, d0=d0, opt=opt)


def predict(model: LogisticModel, d1: float, d0: float) -> float:
    """P(component = 1) from the best objectives on each side."""
    z = model.theta * (float(d1) - float(d0))
    if z > 709.0:
        return 0.0
    if z < -709.0:
        return 1.0
    return float(1.0 / (1.0 + np.exp(z)))


def _log_likelihood(theta: float, delta: np.ndarray, opt: np.ndarray) -> float:
    z = theta * delta
    # log p = -log(1+e^z), log(1-p) = z - log(1+e^z)
    return float(np.sum((1.0 - opt) * z - np.logaddexp(0.0, z)))


def _gradient(theta: float, delta: np.ndarray, opt: np.ndarray) -> float:
    z = np.clip(theta * delta, -709.0, 709.0)
    p = 1.0 / (1.0 + np.exp(z))
    return float(np.sum((p - opt) * delta))


@dataclass(frozen=True)
class FitResult:
    model: LogisticModel
    log_likelihood: float
    separated: bool


def fit_theta(table: TrainingTable, bracket: float = THETA_BRACKET) -> FitResult:
    """Maximum-likelihood theta on [-bracket, bracket].

    The log-likelihood is concave in the single parameter, so the fit is a
    bisection on its (decreasing) gradient.  Perfectly separated tables have
    no interior optimum; they return the bracket endpoint with ``separated``
    set, which callers treat as a saturated-but-usable model.
    """
    if len(table) == 0:
        raise ValueError("empty training table")
    delta = table.d1.astype(np.float64) - table.d0.astype(np.float64)
    opt = table.opt.astype(np.float64)
    if not delta.any():
        # Constant likelihood: no information either way; tie rule.
        return FitResult(LogisticModel(0.0), _log_likelihood(0.0, delta, opt), False)

    lo, hi = -bracket, bracket
    g_lo, g_hi = _gradient(lo, delta, opt), _gradient(hi, delta, opt)
    if g_lo <= 0.0:  # decreasing from the left edge: maximum at -bracket
        return FitResult(LogisticModel(lo), _log_likelihood(lo, delta, opt), True)
    if g_hi >= 0.0:  # still increasing at the right edge: maximum at +bracket
        return FitResult(LogisticModel(hi), _log_likelihood(hi, delta, opt), True)
    theta = 0.0
    for _ in range(200):
        theta = 0.5 * (lo + hi)
        g = _gradient(theta, delta, opt)
        if abs(g) < GRAD_TOL or (hi - lo) < 1e-15:
            break
        if g > 0.0:
            lo = theta
        else:
            hi = theta
    return FitResult(LogisticModel(theta), _log_likelihood(theta, delta, opt), False)


def accuracy(model: LogisticModel, table: TrainingTable) -> float:
    """Fraction of rows whose prediction side matches the label.

    Predictions exactly at 0.5 (theta = 0 or d1 = d0) count half right.
    """
    if len(table) == 0:
        raise ValueError("empty training table")
    z = model.theta * (table.d1.astype(np.float64) - table.d0.astype(np.float64))
    pred_one = z < 0.0  # p > 0.5
    undecided = z == 0.0
    correct = (pred_one == (table.opt == 1)) & ~undecided
    return float((correct.sum() + 0.5 * undecided.sum()) / len(table))


def backbone_upper_bound(acc: float, p_b: float, p_o: float) -> float:
    """Bound on the normalized backbone size from accuracy A = p_b*rho + p_o*(1-rho)."""
    for name, v in (("accuracy", acc), ("p_b", p_b), ("p_o", p_o)):
        if not 0.0 <= v <= 1.0:
            raise ValueError(f"{name} must be in [0, 1], got {v}")
    if p_b <= p_o:
        raise ValueError("bound undefined unless p_b > p_o")
    rho = (acc - p_o) / (p_b - p_o)
    return min(1.0, max(0.0, rho))


def build_training_table(
    bounds: ObjectiveBounds, reference: ReferenceSolution, idx: PairIndexSet
) -> TrainingTable:
    """One row per fully-seen component, labeled by the reference solution."""
    labels = encode(Solution(reference.sequences), idx)
    keep = bounds.seen1 & bounds.seen0
    return TrainingTable(
        d1=bounds.d1[keep].astype(np.float64),
        d0=bounds.d0[keep].astype(np.float64),
        opt=labels[keep].astype(np.uint8),
    )
