import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from omkd import PriceState, residual_rewards, run, run_lb, solve_batch_assignment, step_batch
from omkd.assignment import assignment_value, dual_value
from omkd.basic import new_trace
from omkd.errors import VariantMismatchError

from conftest import brute_force_bmatching, distinct_arrival_instance, make_basic, random_instance


def _check_solution(r, q, sol):
    n_req, n_res = len(r), len(q)
    for n in range(n_req):
        assert sum(sol.x[n]) <= 1
        for k in range(n_res):
            if sol.x[n][k]:
                assert r[n][k] is not None and r[n][k] > 0
            if r[n][k] is not None and r[n][k] > 0:
                assert sol.u[n] + sol.h[k] >= r[n][k] - 1e-9 * max(1.0, r[n][k])
    for k in range(n_res):
        assert sum(sol.x[n][k] for n in range(n_req)) <= q[k]
    assert all(u >= 0 for u in sol.u) and all(h >= 0 for h in sol.h)


class TestSolver:
    def test_two_by_two(self):
        r, q = [[3, 1], [2, 2]], (1, 1)
        sol = solve_batch_assignment(r, q)
        assert sol.x == [[1, 0], [0, 1]]
        assert assignment_value(r, sol.x) == 5
        assert dual_value(sol.u, sol.h, q) == pytest.approx(5)
        assert brute_force_bmatching(r, q)[0] == 5

    def test_all_nonpositive(self):
        sol = solve_batch_assignment([[0, -1], [-2, None]], (2, 2))
        assert sol.x == [[0, 0], [0, 0]]
        assert dual_value(sol.u, sol.h, (2, 2)) == 0

    def test_single_edge(self):
        sol = solve_batch_assignment([[7]], (3,))
        assert sol.assigned() == {0: 0}
        assert dual_value(sol.u, sol.h, (3,)) == pytest.approx(7)

    def test_capacity_binds(self):
        r = [[4.0]] * 4
        sol = solve_batch_assignment(r, (3,))
        assert sum(row[0] for row in sol.x) == 3
        assert dual_value(sol.u, sol.h, (3,)) == pytest.approx(12)

    def test_empty(self):
        sol = solve_batch_assignment([], (1, 2))
        assert sol.x == [] and list(sol.h) == [0.0, 0.0]

    @settings(max_examples=150, deadline=None)
    @given(st.data())
    def test_matches_enumeration(self, data):
        n_req = data.draw(st.integers(1, 5))
        n_res = data.draw(st.integers(1, 3))
        entry = st.one_of(st.none(), st.floats(-5, 20, allow_nan=False))
        r = [[data.draw(entry) for _ in range(n_res)] for _ in range(n_req)]
        q = [data.draw(st.integers(1, 3)) for _ in range(n_res)]
        sol = solve_batch_assignment(r, q)
        best, _ = brute_force_bmatching(r, q)
        value = assignment_value(r, sol.x)
        assert value == pytest.approx(best, rel=1e-9, abs=1e-9)
        assert dual_value(sol.u, sol.h, q) == pytest.approx(value, rel=1e-6, abs=1e-9)
        _check_solution(r, q, sol)

    def test_stable_on_ties(self):
        r = [[2, 2], [2, 2]]
        assert solve_batch_assignment(r, (1, 1)).x == solve_batch_assignment(r, (1, 1)).x


class TestResidualRewards:
    def test_fresh_equals_reward(self):
        inst = make_basic(3, [5.0, 5.0], [(0, {0: (4.0, 1.0, 0, 2)})])
        state = PriceState.for_instance(inst)
        assert residual_rewards(inst.requests, state) == [[4.0, None]]

    def test_negative(self):
        inst = make_basic(3, [5.0], [(0, {0: (4.0, 1.0, 0, 2)})])
        state = PriceState.for_instance(inst)
        state.prices[0][0][0] = 2.0
        state.prices[0][0][1] = 3.0
        assert residual_rewards(inst.requests, state) == [[-1.0]]


class TestStepBatch:
    def test_empty_batch(self):
        inst = make_basic(2, [1.0], [], variant="lb", q=[1])
        trace = new_trace(inst)
        res = step_batch(trace, 0, [])
        assert res.dP == 0 and res.dD == 0

    def test_q_plus_one_identical_requests(self):
        q = 2
        reqs = [(0, {0: (1.0, 0.01, 0, 1)}) for _ in range(q + 1)]
        inst = make_basic(1, [10.0], reqs, variant="lb", q=[q])
        trace = run_lb(inst)
        assert len(trace.assignment) == q
        assert trace.assignment == {0: 0, 1: 0}

    def test_empty_instance(self):
        trace = run_lb(make_basic(2, [1.0], [], variant="lb", q=[1]))
        assert trace.P == 0 and trace.D == 0

    def test_variant_checked(self):
        with pytest.raises(VariantMismatchError):
            run_lb(random_instance(0, "basic"))

    @pytest.mark.parametrize("seed", range(40))
    def test_batch_duality_and_feasibility(self, seed):
        inst = random_instance(seed, "lb")
        results = []
        trace = run_lb(inst, callback=lambda tr, b: results.append(b))
        for b in results:
            assert b.lp_value == pytest.approx(b.dual_value, rel=1e-6, abs=1e-9)
        assert trace.capacity_violations() == []
        assert trace.D == pytest.approx(trace.dual_objective(), rel=1e-9)
        assert trace.D >= trace.P

    @pytest.mark.parametrize("seed", range(30))
    def test_singleton_batches_match_basic(self, seed):
        rng = np.random.default_rng(seed)
        basic = distinct_arrival_instance(seed)
        q = [int(rng.integers(1, 4)) for _ in basic.resources]
        lb = distinct_arrival_instance(seed, variant="lb", q=q)
        a, b = run(basic), run_lb(lb)
        assert [(d.outcome, d.resource) for d in a.decisions] == [(d.outcome, d.resource) for d in b.decisions]
        assert math.isclose(a.P, b.P, rel_tol=1e-12)
