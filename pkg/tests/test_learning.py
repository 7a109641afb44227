import numpy as np
import pytest

from tabushop import (
    LogisticModel,
    ObjectiveBounds,
    Solution,
    TrainingTable,
    accuracy,
    backbone_upper_bound,
    build_index_set,
    build_training_table,
    fit_theta,
    observe,
    parse_reference,
    parse_standard,
    predict,
)
from tabushop.learning import NOT_SEEN, _log_likelihood

from .conftest import exhaustive_optimum, random_instance

# The six-row example table used throughout: best objectives per side and
# the component's value in the reference optimum.
TABLE6 = TrainingTable(
    d1=np.array([1395.0, 1368.0, 1366.0, 1373.0, 1379.0, 1365.0]),
    d0=np.array([1366.0, 1400.0, 1438.0, 1366.0, 1365.0, 1389.0]),
    opt=np.array([0, 1, 1, 0, 0, 1], dtype=np.uint8),
)


def grid_search_theta(table: TrainingTable, step: float = 1e-4, lo: float = -10.0, hi: float = 10.0):
    """Independent oracle: brute-force argmax of the log-likelihood."""
    delta = table.d1 - table.d0
    opt = table.opt.astype(np.float64)
    thetas = np.arange(lo, hi + step / 2, step)
    z = np.outer(thetas, delta)
    ll = ((1.0 - opt) * z - np.logaddexp(0.0, z)).sum(axis=1)
    return float(thetas[np.argmax(ll)])


# ---------------------------------------------------------------- observe


def test_observe_first_and_min_only():
    bounds = ObjectiveBounds.empty(2)
    observe(bounds, np.array([1, 0], dtype=np.uint8), 50)
    assert bounds.d1[0] == 50 and not bounds.seen0[0]
    assert bounds.d0[1] == 50 and not bounds.seen1[1]
    observe(bounds, np.array([1, 0], dtype=np.uint8), 70)  # worse: no change
    assert bounds.d1[0] == 50 and bounds.d0[1] == 50
    observe(bounds, np.array([0, 1], dtype=np.uint8), 40)
    assert bounds.d0[0] == 40 and bounds.d1[1] == 40


def test_observe_matches_bruteforce_minima():
    rng = np.random.default_rng(7)
    n = 12
    bounds = ObjectiveBounds.empty(n)
    stream = [(rng.integers(0, 2, size=n).astype(np.uint8), int(rng.integers(10, 500))) for _ in range(100)]
    for bits, value in stream:
        observe(bounds, bits, value)
    for j in range(n):
        ones = [v for b, v in stream if b[j] == 1]
        zeros = [v for b, v in stream if b[j] == 0]
        assert bounds.d1[j] == (min(ones) if ones else NOT_SEEN)
        assert bounds.d0[j] == (min(zeros) if zeros else NOT_SEEN)


# ---------------------------------------------------------------- predict


def test_predict_symmetry_cases():
    assert predict(LogisticModel(2.3), 100, 100) == 0.5
    assert predict(LogisticModel(0.0), 123, 456) == 0.5


def test_predict_table_row():
    p = predict(LogisticModel(0.1), 1368, 1400)
    assert p == pytest.approx(0.9608, abs=1e-4)
    assert p > 0.5  # consistent with the row's label opt=1


def test_predict_saturates():
    assert predict(LogisticModel(10.0), 0, 100000) == 1.0
    assert predict(LogisticModel(10.0), 100000, 0) == 0.0


def test_predict_complement_identity():
    rng = np.random.default_rng(3)
    for _ in range(50):
        a, b = rng.integers(900, 1500, size=2)
        th = float(rng.uniform(-2, 2))
        assert predict(LogisticModel(th), a, b) + predict(LogisticModel(th), b, a) == pytest.approx(1.0)


def test_predict_decreasing_in_gap():
    th = LogisticModel(0.7)
    ps = [predict(th, 1000 + g, 1000) for g in range(-5, 6)]
    assert all(x > y for x, y in zip(ps, ps[1:]))


# ---------------------------------------------------------------- fit_theta


def test_fit_all_ties_returns_zero():
    t = TrainingTable(d1=np.array([5.0, 9.0]), d0=np.array([5.0, 9.0]), opt=np.array([1, 0], dtype=np.uint8))
    fit = fit_theta(t)
    assert fit.model.theta == 0.0
    assert not fit.separated


def test_fit_swap_mirrored_table_is_zero():
    # each row plus its d1/d0-swapped copy with the same label: the
    # likelihood is symmetric in theta, so the maximizer is 0
    rng = np.random.default_rng(11)
    d1 = rng.integers(900, 1100, size=20).astype(np.float64)
    d0 = rng.integers(900, 1100, size=20).astype(np.float64)
    opt = rng.integers(0, 2, size=20).astype(np.uint8)
    t = TrainingTable(
        d1=np.concatenate([d1, d0]), d0=np.concatenate([d0, d1]), opt=np.concatenate([opt, opt])
    )
    fit = fit_theta(t)
    assert abs(fit.model.theta) < 1e-6


def test_fit_table6_matches_grid_oracle():
    fit = fit_theta(TABLE6)
    oracle = grid_search_theta(TABLE6)
    assert abs(fit.model.theta - oracle) < 1e-3
    # every d-difference sign matches its label, so the table is separable
    assert fit.separated


def test_fit_unseparated_matches_grid_oracle():
    t = TrainingTable(
        d1=np.array([1395.0, 1368.0, 1366.0, 1373.0, 1379.0, 1365.0, 1366.0, 1370.0]),
        d0=np.array([1366.0, 1400.0, 1438.0, 1366.0, 1365.0, 1389.0, 1380.0, 1365.0]),
        opt=np.array([0, 1, 1, 0, 0, 1, 0, 1], dtype=np.uint8),  # last two disagree
    )
    fit = fit_theta(t)
    assert not fit.separated
    assert abs(fit.model.theta - grid_search_theta(t)) < 1e-3


def test_fit_local_optimality():
    t = TrainingTable(
        d1=np.array([10.0, 12.0, 9.0, 15.0]),
        d0=np.array([12.0, 10.0, 15.0, 9.0]),
        opt=np.array([1, 0, 1, 1], dtype=np.uint8),
    )
    fit = fit_theta(t)
    delta, opt = t.d1 - t.d0, t.opt.astype(np.float64)
    ll = _log_likelihood(fit.model.theta, delta, opt)
    assert ll >= _log_likelihood(fit.model.theta + 0.01, delta, opt)
    assert ll >= _log_likelihood(fit.model.theta - 0.01, delta, opt)


def test_fit_empty_table_rejected():
    empty = TrainingTable(d1=np.array([]), d0=np.array([]), opt=np.array([], dtype=np.uint8))
    with pytest.raises(ValueError):
        fit_theta(empty)


def _random_table(rng, rows=30):
    d1 = rng.integers(900, 1100, size=rows).astype(np.float64)
    d0 = rng.integers(900, 1100, size=rows).astype(np.float64)
    opt = rng.integers(0, 2, size=rows).astype(np.uint8)
    return TrainingTable(d1=d1, d0=d0, opt=opt)


def test_complement_invariance_1000_random_tables():
    rng = np.random.default_rng(42)
    for _ in range(1000):
        t = _random_table(rng, rows=int(rng.integers(2, 40)))
        fit = fit_theta(t)
        relabeled = TrainingTable(d1=t.d0.copy(), d0=t.d1.copy(), opt=(1 - t.opt).astype(np.uint8))
        fit2 = fit_theta(relabeled)
        assert fit2.model.theta == pytest.approx(fit.model.theta, abs=1e-9)
        assert accuracy(fit2.model, relabeled) == pytest.approx(accuracy(fit.model, t), abs=1e-12)


def test_theta_zero_symmetry_1000_random_tables():
    rng = np.random.default_rng(43)
    for _ in range(1000):
        t = _random_table(rng, rows=int(rng.integers(1, 25)))
        sym = TrainingTable(
            d1=np.concatenate([t.d1, t.d0]),
            d0=np.concatenate([t.d0, t.d1]),
            opt=np.concatenate([t.opt, t.opt]),
        )
        fit = fit_theta(sym)
        assert abs(fit.model.theta) < 1e-6


# ---------------------------------------------------------------- accuracy


def test_accuracy_theta_zero_is_half():
    assert accuracy(LogisticModel(0.0), TABLE6) == 0.5


def test_accuracy_separated_table_is_one():
    fit = fit_theta(TABLE6)
    assert accuracy(fit.model, TABLE6) == 1.0


def test_accuracy_large_theta_equals_sign_rule():
    rng = np.random.default_rng(17)
    t = _random_table(rng, rows=200)
    delta = t.d1 - t.d0
    sign_correct = ((delta < 0) == (t.opt == 1)) & (delta != 0)
    expected = (sign_correct.sum() + 0.5 * (delta == 0).sum()) / len(t)
    assert accuracy(LogisticModel(9.5), t) == pytest.approx(expected)


def test_accuracy_ties_count_half():
    t = TrainingTable(
        d1=np.array([10.0, 10.0]), d0=np.array([10.0, 12.0]), opt=np.array([0, 1], dtype=np.uint8)
    )
    assert accuracy(LogisticModel(1.0), t) == 0.75


# ---------------------------------------------------------------- backbone


def test_backbone_bound_examples():
    assert backbone_upper_bound(0.98, 1.0, 0.5) == 0.96
    assert backbone_upper_bound(0.5, 1.0, 0.5) == 0.0  # A == p_o
    assert backbone_upper_bound(0.61, 1.0, 0.5) == pytest.approx(0.22, abs=1e-12)


def test_backbone_bound_clamps_and_validates():
    assert backbone_upper_bound(1.0, 0.9, 0.5) == 1.0  # clamped
    with pytest.raises(ValueError):
        backbone_upper_bound(0.9, 0.5, 0.5)
    with pytest.raises(ValueError):
        backbone_upper_bound(1.2, 1.0, 0.5)


# ------------------------------------------------------- training tables


def test_training_table_empty_when_nothing_fully_seen(tiny_2x2):
    idx = build_index_set(tiny_2x2)
    bounds = ObjectiveBounds.empty(len(idx))
    ref = parse_reference("0 1\n1 0\n", tiny_2x2)
    table = build_training_table(bounds, ref, idx)
    assert len(table) == 0


def test_training_table_single_component():
    inst = parse_standard("2 1\n0 4\n0 2", name="two")
    idx = build_index_set(inst)
    bounds = ObjectiveBounds.empty(1)
    observe(bounds, np.array([1], dtype=np.uint8), 6)
    observe(bounds, np.array([0], dtype=np.uint8), 7)
    ref = parse_reference("0 1\n", inst)
    table = build_training_table(bounds, ref, idx)
    assert len(table) == 1
    assert table.d1[0] == 6 and table.d0[0] == 7 and table.opt[0] == 1


def test_training_table_labels_match_optimum_encoding():
    from tabushop import encode, run_tabu, RunParams, TenureRange

    inst = random_instance(55, 3, 3)
    idx = build_index_set(inst)
    opt_value = exhaustive_optimum(inst)
    result = run_tabu(
        inst, RunParams(nepochs=1, niters=4000, seed=9), TenureRange(5, 11), emit_bounds=True
    )
    assert result.best_makespan == opt_value
    ref_sol = Solution(result.best_solution.sequences)
    ref_text_bits = encode(ref_sol, idx)
    from tabushop.instances import ReferenceSolution

    ref = ReferenceSolution(sequences=result.best_solution.sequences, makespan=result.best_makespan)
    table = build_training_table(result.bounds, ref, idx)
    keep = result.bounds.seen1 & result.bounds.seen0
    assert (table.opt == ref_text_bits[keep]).all()


def test_table_csv_round_trip():
    text = TABLE6.to_csv()
    assert text.splitlines()[0] == "d1,d0,opt"
    again = TrainingTable.from_csv(text)
    assert (again.d1 == TABLE6.d1).all()
    assert (again.d0 == TABLE6.d0).all()
    assert (again.opt == TABLE6.opt).all()
