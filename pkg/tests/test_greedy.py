from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import B, C, F, instances, random_instance
from incentive_mckp.errors import (
    BudgetDecreasedError,
    IterationOutOfRangeError,
    NegativeBudgetError,
    SpendOutOfRangeError,
)
from incentive_mckp.exact import Enumerator
from incentive_mckp.greedy import (
    Criterion,
    curve_query,
    optimality_gap_bound,
    overall_efficiencies,
    policy_at_iteration,
    read_curve_csv,
    resume,
    solve,
    solve_until_inverse_efficiency,
    welfare_upper_bound_at,
    write_curve_csv,
    write_log_csv,
)
from incentive_mckp.model import Instance, evaluate


def test_budget_zero(t1):
    r = solve(t1, 0)
    assert r.assignment == {} and r.welfare_gain == 0 and r.budget_used == 0
    assert r.iteration_log == ()


def test_t1_budget_7(t1):
    r = solve(t1, 7)
    assert r.assignment == {0: B}
    assert r.budget_used == 2 and r.welfare_gain == 4
    assert r.split_item == (1, F)
    assert r.split_incr_efficiency == pytest.approx(4 / 3)


def test_t1_budget_8(t1):
    r = solve(t1, 8)
    assert [(e.individual_id, e.alt_id) for e in r.iteration_log] == [(0, B), (1, F)]
    assert r.budget_used == 8 and r.welfare_gain == 12
    assert r.split_item == (0, C)
    assert r.characteristic_incr_efficiency == pytest.approx(2 / 3)
    assert r.max_step_size == 6


def test_negative_budget(t1):
    with pytest.raises(NegativeBudgetError):
        solve(t1, -0.5)


def test_no_split_when_everything_fits(t1):
    r = solve(t1, 100)
    assert r.split_item is None
    assert r.welfare_gain == 14 and r.budget_used == 11
    assert optimality_gap_bound(r) == 0


def test_resume_matches_fresh_run(t1):
    assert resume(solve(t1, 7), t1, 8) == solve(t1, 8)
    assert resume(solve(t1, 0), t1, 8) == solve(t1, 8)
    r = solve(t1, 8)
    assert resume(r, t1, 8) == r


def test_resume_rejects_smaller_budget(t1):
    with pytest.raises(BudgetDecreasedError):
        resume(solve(t1, 8), t1, 7)


def test_gap_bound_t1(t1):
    r = solve(t1, 7)
    bound = optimality_gap_bound(r, 7)
    assert bound == pytest.approx(20 / 3)
    assert Enumerator(t1).welfare(7) - r.welfare_gain == 4 <= bound
    assert optimality_gap_bound(solve(t1, 8)) == 0


def test_target_inverse_incremental(t1):
    r = solve_until_inverse_efficiency(t1, 1.0, Criterion.INCREMENTAL)
    assert [(e.individual_id, e.alt_id) for e in r.iteration_log] == [(0, B), (1, F)]
    assert r.budget == r.budget_used == 8
    r10 = solve_until_inverse_efficiency(t1, 10, "incremental")
    assert len(r10.iteration_log) == 3


def test_target_inverse_below_first(t1):
    assert solve_until_inverse_efficiency(t1, 0.1).iteration_log == ()


def test_target_inverse_overall(t1):
    # overall efficiencies 2, 12/8, 14/11
    r = solve_until_inverse_efficiency(t1, 0.6, Criterion.OVERALL)
    assert len(r.iteration_log) == 1
    r = solve_until_inverse_efficiency(t1, 0.7, Criterion.OVERALL)
    assert len(r.iteration_log) == 2


def test_upper_bound_at(t1):
    r = solve(t1, 8)
    assert welfare_upper_bound_at(r, 1, 8) == pytest.approx(12)
    assert welfare_upper_bound_at(r, 1, 20) == pytest.approx(28)
    assert welfare_upper_bound_at(r, 2, r.budget_used) == r.welfare_gain
    with pytest.raises(IterationOutOfRangeError):
        welfare_upper_bound_at(r, 3, 8)


def test_curve_query(t1):
    r = solve(t1, 8)
    assert curve_query(r, 0) == 0
    assert curve_query(r, 5) == 4
    assert curve_query(r, 8) == 12
    with pytest.raises(SpendOutOfRangeError):
        curve_query(r, 8.5)
    with pytest.raises(SpendOutOfRangeError):
        curve_query(r, -1)


def test_curve_csv_round_trip(t1, tmp_path):
    r = solve(t1, 8)
    p = tmp_path / "curve.csv"
    write_curve_csv(r, p)
    assert p.read_bytes() == b"spend,welfare_gain\n0.0,0.0\n2.0,4.0\n8.0,12.0\n"
    assert read_curve_csv(p) == r.curve
    p2 = tmp_path / "curve2.csv"
    write_curve_csv(r, p2)
    assert p.read_bytes() == p2.read_bytes()


def test_log_csv(t1, tmp_path):
    p = tmp_path / "log.csv"
    write_log_csv(solve(t1, 8), p)
    lines = p.read_text().splitlines()
    assert lines[0] == "k,individual,alternative,incr_weight,incr_social,incr_efficiency," \
                       "tot_incentive,welfare_gain"
    assert lines[2] == "2,1,2,6.0,8.0,1.3333333333333333,8.0,12.0"


def test_policy_at_iteration(t1):
    r = solve(t1, 100)
    pol = policy_at_iteration(r, 3)
    assert pol.transfers == {(0, C): 5.0, (1, F): 6.0}
    assert policy_at_iteration(r, 0).transfers == {}
    with pytest.raises(IterationOutOfRangeError):
        policy_at_iteration(r, 4)


def test_empty_instance():
    r = solve(Instance(()), 10)
    assert r.welfare_gain == 0 and r.split_item is None


def test_touch_points_and_bound(rng):
    for _ in range(60):
        inst = random_instance(rng)
        enum = Enumerator(inst)
        full = solve(inst, float(enum.cost.max()))
        for e in full.iteration_log:
            assert enum.welfare(e.tot_incentive) == e.welfare_gain
        for b in rng.uniform(0, 60, size=5):
            r = solve(inst, b)
            assert r.budget_used <= b
            assert enum.welfare(b) - r.welfare_gain <= optimality_gap_bound(r) + 1e-9


def test_anytime_prefix_is_feasible(rng):
    for _ in range(50):
        inst = random_instance(rng, integer=False)
        r = solve(inst, 1e9)
        for k, e in enumerate(r.iteration_log, start=1):
            ev = evaluate(inst, policy_at_iteration(r, k))
            assert ev.expenses == pytest.approx(e.tot_incentive, abs=1e-9)
            assert ev.welfare_gain == pytest.approx(e.welfare_gain, abs=1e-9)


def test_upper_bound_dominates_final(rng):
    for _ in range(50):
        inst = random_instance(rng)
        b = float(rng.uniform(0, 50))
        r = solve(inst, b)
        for k in range(len(r.iteration_log) + 1):
            assert welfare_upper_bound_at(r, k, b) >= r.welfare_gain - 1e-9


@settings(max_examples=80)
@given(instances(), st.integers(0, 40))
def test_monotone_efficiencies(inst, budget):
    r = solve(inst, budget)
    log = r.iteration_log
    incs = [Fraction(e.incr_social) / Fraction(e.incr_weight) for e in log]
    overall = [Fraction(e.welfare_gain) / Fraction(e.tot_incentive) for e in log]
    assert all(a >= b for a, b in zip(incs, incs[1:]))
    assert all(a >= b for a, b in zip(overall, overall[1:]))
    assert all(a.tot_incentive < b.tot_incentive for a, b in zip(log, log[1:]))
    assert len(overall_efficiencies(r)) == len(log)


def test_deterministic(rng):
    inst = random_instance(rng, integer=False)
    assert solve(inst, 10) == solve(inst, 10)
