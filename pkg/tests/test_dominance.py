import numpy as np
import pytest

from tabushop.dominance import (
    PerformanceSample,
    aggregate,
    bootstrap_ci,
    dominance_curve,
    samples_at_time_buckets,
    samples_from_records,
    tie_prob,
    win_prob,
)
from tabushop.runlog import RunLogRecord


# ------------------------------------------------------------- win_prob


def test_win_prob_basic():
    assert win_prob([1], [2]) == 1.0
    assert win_prob([1], [1]) == 0.0  # tie counts for neither
    assert win_prob([2], [1]) == 0.0
    assert win_prob([1, 3], [2, 4]) == 0.75  # wins: 1<2, 1<4, 3<4


def test_win_prob_empty_rejected():
    with pytest.raises(ValueError):
        win_prob([], [1])


def test_win_tie_masses_partition():
    rng = np.random.default_rng(5)
    for _ in range(1000):
        xs = rng.integers(0, 6, size=rng.integers(1, 8)).tolist()
        ys = rng.integers(0, 6, size=rng.integers(1, 8)).tolist()
        total = win_prob(xs, ys) + win_prob(ys, xs) + tie_prob(xs, ys)
        assert total == pytest.approx(1.0, abs=1e-12)


def test_win_prob_order_invariance():
    rng = np.random.default_rng(6)
    xs = rng.integers(900, 1100, size=12).tolist()
    ys = rng.integers(900, 1100, size=9).tolist()
    transformed = win_prob([2 * v + 7 for v in xs], [2 * v + 7 for v in ys])
    assert win_prob(xs, ys) == transformed


# ------------------------------------------------------------ aggregate


def test_aggregate_cases():
    assert aggregate([0.7]) == 0.7
    assert aggregate([0.0, 1.0]) == 0.5
    assert aggregate([0.25, 0.5, 1.0]) == pytest.approx(0.5833333333, abs=1e-9)
    with pytest.raises(ValueError):
        aggregate([])


def test_aggregate_permutation_invariant():
    probs = [0.1, 0.4, 0.9, 0.3]
    assert aggregate(probs) == aggregate(list(reversed(probs)))


# --------------------------------------------------------- bootstrap_ci


def test_bootstrap_identical_replicates_collapse():
    groups = {"i1": ([5.0, 5.0], [5.0, 5.0])}
    ci_ab, ci_ba = bootstrap_ci(groups, n_boot=200, level=0.95, rng=np.random.default_rng(1))
    assert ci_ab.lo == ci_ab.hi == 0.0
    assert ci_ba.lo == ci_ba.hi == 0.0


def test_bootstrap_degenerate_single_run_flagged():
    groups = {"i1": ([3.0], [4.0])}
    ci_ab, ci_ba = bootstrap_ci(groups, n_boot=100, level=0.95, rng=np.random.default_rng(2))
    assert ci_ab.degenerate and ci_ba.degenerate
    assert ci_ab.lo == ci_ab.hi == 1.0
    assert ci_ba.lo == ci_ba.hi == 0.0


def test_bootstrap_contains_point_estimate():
    rng = np.random.default_rng(3)
    for trial in range(20):
        groups = {}
        for i in range(3):
            xs = rng.normal(100, 5, size=8)
            ys = rng.normal(102, 5, size=8)
            groups[f"i{i}"] = (xs.tolist(), ys.tolist())
        from tabushop.dominance import win_prob as wp

        point = aggregate([wp(x, y) for x, y in groups.values()])
        ci_ab, _ = bootstrap_ci(groups, n_boot=1000, level=0.95, rng=rng)
        assert ci_ab.lo - 1e-12 <= point <= ci_ab.hi + 1e-12


def test_bootstrap_coverage_under_null():
    """Identical continuous distributions: the CI should cover 0.5 most of the time."""
    rng = np.random.default_rng(4)
    covered = 0
    trials = 100
    for _ in range(trials):
        groups = {}
        for i in range(3):
            xs = rng.normal(0, 1, size=10)
            ys = rng.normal(0, 1, size=10)
            groups[f"i{i}"] = (xs.tolist(), ys.tolist())
        ci_ab, _ = bootstrap_ci(groups, n_boot=300, level=0.95, rng=rng)
        if ci_ab.lo <= 0.5 <= ci_ab.hi:
            covered += 1
    assert covered >= 90


def test_bootstrap_validation():
    with pytest.raises(ValueError):
        bootstrap_ci({}, n_boot=10, level=0.95, rng=np.random.default_rng(0))
    with pytest.raises(ValueError):
        bootstrap_ci({"a": ([1.0], [1.0])}, n_boot=0, level=0.95, rng=np.random.default_rng(0))
    with pytest.raises(ValueError):
        bootstrap_ci({"a": ([1.0], [1.0])}, n_boot=10, level=1.5, rng=np.random.default_rng(0))


# ------------------------------------------------------ dominance_curve


def _sample(alg, inst, run, cp, value):
    return PerformanceSample(algorithm=alg, instance=inst, run=run, checkpoint=cp, value=value)


def test_curve_strict_winner():
    a = [_sample("A", "i1", r, 1, 10.0) for r in range(3)]
    b = [_sample("B", "i1", r, 1, 20.0) for r in range(3)]
    curve = dominance_curve(a, b, [1], n_boot=50)
    pt = curve.points[0]
    assert pt.p_a_lt_b == 1.0 and pt.p_b_lt_a == 0.0


def test_curve_identical_logs_all_ties():
    a = [_sample("A", "i1", r, 1, 15.0) for r in range(4)]
    b = [_sample("B", "i1", r, 1, 15.0) for r in range(4)]
    pt = dominance_curve(a, b, [1], n_boot=50).points[0]
    assert pt.p_a_lt_b == 0.0 and pt.p_b_lt_a == 0.0


def test_curve_matches_nested_loop_oracle():
    # 2 instances x 2 runs fixture, hand-enumerable
    a = [
        _sample("A", "i1", 0, 1, 10), _sample("A", "i1", 1, 1, 30),
        _sample("A", "i2", 0, 1, 5), _sample("A", "i2", 1, 1, 5),
    ]
    b = [
        _sample("B", "i1", 0, 1, 20), _sample("B", "i1", 1, 1, 20),
        _sample("B", "i2", 0, 1, 5), _sample("B", "i2", 1, 1, 6),
    ]
    # i1: A wins pairs (10<20, 10<20) of 4 -> 0.5; B wins (20<30 twice) -> 0.5
    # i2: A wins (5<6 twice) of 4 -> 0.5; B wins none -> 0
    pt = dominance_curve(a, b, [1], n_boot=50).points[0]
    assert pt.p_a_lt_b == pytest.approx(0.5)
    assert pt.p_b_lt_a == pytest.approx(0.25)


def test_curve_missing_checkpoint_rejected():
    a = [_sample("A", "i1", 0, 1, 10)]
    b = [_sample("B", "i1", 0, 2, 20)]
    with pytest.raises(ValueError):
        dominance_curve(a, b, [1], n_boot=10)


def test_curve_csv_shape():
    a = [_sample("A", "i1", r, c, 10 + r) for r in range(3) for c in (1, 2)]
    b = [_sample("B", "i1", r, c, 11 + r) for r in range(3) for c in (1, 2)]
    curve = dominance_curve(a, b, [1, 2], n_boot=20)
    lines = curve.to_csv().strip().splitlines()
    assert lines[0] == "checkpoint,p_a_lt_b,p_a_lo,p_a_hi,p_b_lt_a,p_b_lo,p_b_hi"
    assert len(lines) == 3


# --------------------------------------------------- record conversion


def test_samples_from_records():
    recs = [
        RunLogRecord("tabu", "i1", 5, 1, 100, 900),
        RunLogRecord("tabu", "i1", 5, 2, 200, 880),
    ]
    samples = samples_from_records(recs, "A")
    assert [(s.checkpoint, s.value) for s in samples] == [(1, 900.0), (2, 880.0)]
    assert all(s.run == 5 for s in samples)


def test_samples_at_time_buckets_best_so_far():
    recs = [
        RunLogRecord("tabu", "i1", 1, 1, 100, 900, elapsed_ms=50),
        RunLogRecord("tabu", "i1", 1, 2, 200, 850, elapsed_ms=150),
    ]
    samples = samples_at_time_buckets({("i1", 1): recs}, [100, 200], "A")
    assert [(s.checkpoint, s.value) for s in samples] == [(100, 900.0), (200, 850.0)]
    with pytest.raises(ValueError):
        samples_at_time_buckets({("i1", 1): recs}, [10], "A")
