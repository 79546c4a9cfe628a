import math

import pytest

from omkd import empirical_cr, exact_optimum, fluctuation_stats, run, theoretical_cr_bound, verify_dual_certificate
from omkd.basic import new_trace
from omkd.errors import OracleSizeError
from omkd.instance import FluctuationStats, ResourceStats
from omkd.oracle import greedy_assignment

from conftest import brute_force_optimum, make_basic, random_instance


def _stats(bar, d, xi=1.0, variant="basic"):
    return FluctuationStats(variant, {0: ResourceStats(1.0, bar, 1.0, d, xi)})


class TestExactOptimum:
    def test_overlap_example(self):
        inst = make_basic(2, [1.0], [(0, {0: (1.0, 1.0, 0, 2)}), (0, {0: (10.0, 1.0, 0, 1)})])
        sol = exact_optimum(inst)
        assert sol.value == 10 and sol.assignment == {1: 0}

    def test_empty(self):
        assert exact_optimum(make_basic(2, [1.0], [])).value == 0

    def test_ample_capacity(self):
        reqs = [(t, {0: (float(t + 1), 1.0, t, 1), 1: (2.0, 1.0, t, 1)}) for t in range(4)]
        inst = make_basic(4, [5.0, 5.0], reqs)
        assert exact_optimum(inst).value == sum(max(t + 1.0, 2.0) for t in range(4))

    def test_size_cap(self):
        with pytest.raises(OracleSizeError):
            exact_optimum(random_instance(0, "basic", n_requests=25), max_requests=20)

    @pytest.mark.parametrize("seed", range(40))
    def test_matches_pure_enumeration(self, seed):
        variant = ["basic", "lb", "md"][seed % 3]
        inst = random_instance(seed, variant, n_requests=6 + seed % 3, n_resources=1 + seed % 3,
                               weight_mode="violating" if seed % 2 else "compliant")
        bb = exact_optimum(inst)
        ex = exact_optimum(inst, method="exhaustive")
        assert bb.value == pytest.approx(ex.value, rel=1e-12)
        assert bb.value == pytest.approx(brute_force_optimum(inst), rel=1e-12)


class TestCertificate:
    def test_hand_built_infeasible(self):
        inst = make_basic(1, [1.0], [(0, {0: (5.0, 1.0, 0, 1)})])
        trace = new_trace(inst)  # u = 0, p = 0
        rep = verify_dual_certificate(inst, trace)
        assert not rep.ok and rep.max_violation == pytest.approx(5.0)

    def test_empty(self):
        inst = make_basic(1, [1.0], [])
        assert verify_dual_certificate(inst, run(inst)).ok

    @pytest.mark.parametrize("seed", range(20))
    def test_random_runs_pass(self, seed):
        inst = random_instance(seed, "basic", n_requests=10)
        trace = run(inst)
        rep = verify_dual_certificate(inst, trace, exact_optimum(inst))
        assert rep.ok, rep.violations
        assert rep.primal_objective <= rep.offline_value * (1 + 1e-12) <= rep.dual_objective * (1 + 1e-6)


class TestRatios:
    def test_cr_examples(self):
        assert empirical_cr(5, 10) == 2.0
        assert empirical_cr(7, 7) == 1.0
        assert empirical_cr(0, 0) == 1.0
        assert empirical_cr(0, 3) == math.inf

    def test_bound_examples(self):
        assert theoretical_cr_bound(_stats(1, 1)) == pytest.approx(10.3399, abs=1e-4)
        assert theoretical_cr_bound(_stats(2, 2, 3, "md")) == pytest.approx(22.5754, abs=1e-4)

    def test_bound_monotone(self):
        vals = [theoretical_cr_bound(_stats(b, 1)) for b in (1, 2, 4, 8)]
        assert vals == sorted(vals) and len(set(vals)) == 4
        assert theoretical_cr_bound(_stats(2, 2, 2, "md")) < theoretical_cr_bound(_stats(2, 2, 3, "md"))

    def test_bound_uses_realized_stats(self):
        inst = random_instance(1, "basic")
        assert theoretical_cr_bound(fluctuation_stats(inst)) >= 2 * 2 * math.log(6) / math.log(2)


def test_greedy_baseline_feasible():
    inst = random_instance(3, "lb", n_requests=10)
    sol = greedy_assignment(inst)
    assert sol.value <= exact_optimum(inst).value + 1e-9
