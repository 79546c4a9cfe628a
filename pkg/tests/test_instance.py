import json
import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from omkd import (
    DeclaredBounds,
    Instance,
    Offer,
    Request,
    Resource,
    fluctuation_stats,
    load_instance,
    total_demand_fluctuation,
    validate_instance,
    value_density,
)
from omkd.errors import DegenerateOfferError, InstanceError, UndefinedStatsError

from conftest import make_basic, random_instance


class TestValueDensity:
    def test_single_dimension(self):
        assert value_density(Offer(6, (2,), (0,), (3,))) == 1.0

    def test_zero_reward(self):
        assert value_density(Offer(0, (1,), (0,), (1,))) == 0.0

    def test_multi_dimension(self):
        assert value_density(Offer(12, (2, 1), (0, 0), (2, 2)), "md") == 2.0

    def test_degenerate_raises(self):
        with pytest.raises(DegenerateOfferError):
            value_density(Offer(5, (0,), (0,), (1,)))


class TestTotalDemandFluctuation:
    @pytest.mark.parametrize("w, xi", [((2, 1, 0), 3.0), ((5,), 1.0), ((1, 1, 1, 1), 4.0)])
    def test_examples(self, w, xi):
        offer = Offer(1, w, (0,) * len(w), (1,) * len(w))
        assert total_demand_fluctuation(offer) == xi

    def test_all_zero_raises(self):
        with pytest.raises(DegenerateOfferError):
            total_demand_fluctuation(Offer(0, (0, 0), (0, 0), (1, 1)))

    @given(st.lists(st.floats(0, 100, allow_nan=False), min_size=1, max_size=6))
    def test_at_least_one_and_one_iff_single_positive(self, w):
        if not any(x > 0 for x in w):
            return
        xi = total_demand_fluctuation(Offer(1, tuple(w), (0,) * len(w), (1,) * len(w)))
        assert xi >= 1.0
        n_pos = sum(1 for x in w if x > 0)
        assert (xi == 1.0) == (n_pos == 1)


def _density_instance(densities):
    reqs = [(0, {0: (dens * 1.0 * 1, 1.0, 0, 1)}) for dens in densities]
    return make_basic(2, [10.0], reqs)


class TestFluctuationStats:
    def test_ratio(self):
        assert fluctuation_stats(_density_instance([1, 2, 4]))[0].density_bar == 4

    def test_equal_durations(self):
        assert fluctuation_stats(_density_instance([1, 2]))[0].d_bar == 1

    def test_min_over_positive(self):
        st_ = fluctuation_stats(_density_instance([0, 3]))[0]
        assert st_.density_min == 3 and st_.density_bar == 1

    def test_undefined_resource_listed(self):
        inst = make_basic(2, [10.0, 10.0], [(0, {0: (1.0, 1.0, 0, 1)})])
        stats = fluctuation_stats(inst)
        assert stats.undefined == (1,)
        with pytest.raises(UndefinedStatsError):
            fluctuation_stats(inst, strict=True)

    @pytest.mark.parametrize("seed", range(20))
    def test_permutation_invariant(self, seed):
        inst = random_instance(seed, ["basic", "lb", "md"][seed % 3])
        reqs = list(inst.requests)
        random.Random(seed).shuffle(reqs)
        shuffled = Instance(inst.horizon, inst.resources, tuple(reqs), inst.variant, inst.declared)
        assert fluctuation_stats(shuffled) == fluctuation_stats(inst)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 10_000), st.floats(0.01, 100))
    def test_reward_scaling_keeps_ratios(self, seed, c):
        inst = random_instance(seed, "basic")
        data = inst.to_dict()
        for r in data["requests"]:
            for o in r["offers"].values():
                o["v"] *= c
        scaled = fluctuation_stats(Instance.from_dict(data))
        base = fluctuation_stats(inst)
        for k, s in base.per_resource.items():
            assert math.isclose(scaled[k].density_bar, s.density_bar, rel_tol=1e-9)
            assert math.isclose(scaled[k].density_min, c * s.density_min, rel_tol=1e-9)


class TestStructure:
    def test_start_before_arrival_rejected(self):
        with pytest.raises(InstanceError):
            make_basic(4, [1.0], [(2, {0: (1.0, 1.0, 1, 1)})])

    def test_interval_outside_horizon_rejected(self):
        with pytest.raises(InstanceError):
            make_basic(2, [1.0], [(0, {0: (1.0, 1.0, 1, 2)})])

    def test_nonpositive_capacity_rejected(self):
        with pytest.raises(InstanceError):
            Resource(0, (0.0,))

    def test_request_needs_an_offer(self):
        with pytest.raises(InstanceError):
            Request(0, 0, {})

    def test_requests_sorted_by_arrival_then_id(self):
        inst = make_basic(5, [1.0], [(3, {0: (1, 1, 3, 1)}), (1, {0: (1, 1, 1, 1)}), (1, {0: (1, 1, 2, 1)})])
        assert [(r.arrival, r.id) for r in inst.requests] == [(1, 1), (1, 2), (3, 0)]

    @pytest.mark.parametrize("variant", ["basic", "lb", "md"])
    def test_json_round_trip(self, variant, tmp_path):
        inst = random_instance(3, variant)
        path = tmp_path / "x.json"
        path.write_text(inst.dumps())
        back = load_instance(path)
        assert back == inst
        assert json.loads(back.dumps()) == json.loads(inst.dumps())


class TestValidate:
    def _one(self, w, C=1.0, v=None, theta=(1.0, 10.0)):
        v = 2.0 * w if v is None else v
        return make_basic(1, [C], [(0, {0: (v, w, 0, 1)})], theta=theta, d=(1.0, 1.0))

    def test_compliant(self):
        gamma = 2 * math.log(2 + 4 * 10.0 * 1.0)
        rep = validate_instance(self._one(math.log(2) / gamma * 0.99))
        assert rep.feasible_for_guarantee and rep.violations == []

    def test_weight_equal_to_capacity_cites_precondition(self):
        rep = validate_instance(self._one(1.0))
        assert not rep.feasible_for_guarantee
        assert "THM1" in rep.codes()
        assert rep.violations[0].resource == 0

    def test_density_out_of_bounds_cites_a1(self):
        rep = validate_instance(self._one(0.01, v=1.0))
        assert "A1" in rep.codes()
        assert rep.violations[0].request == 0

    def test_theorem_check_can_be_skipped(self):
        assert validate_instance(self._one(1.0), theorem=False).feasible_for_guarantee

    def test_flag_matches_empty_list(self):
        for seed in range(30):
            rep = validate_instance(random_instance(seed, "md", weight_mode="violating"))
            assert rep.feasible_for_guarantee == (not rep.violations)

    def test_lb_precondition_uses_q(self):
        gamma = 2 * math.log(2 + 4 * 10.0 * 1.0)
        w = 0.9 * math.log(2) / gamma  # under C ln2/gamma but over C ln2/(2 gamma)
        inst = make_basic(1, [1.0], [(0, {0: (2 * w, w, 0, 1)})], theta=(1.0, 10.0), d=(1.0, 1.0),
                          variant="lb", q=[2])
        assert "THM2" in validate_instance(inst).codes()

    def test_degenerate_offer_reported(self):
        inst = Instance(1, (Resource(0, (1.0,)),), (Request(0, 0, {0: Offer(3, (0,), (0,), (1,))}),),
                        "basic", {0: DeclaredBounds(theta=(1.0, 2.0), d=(1.0, 1.0))})
        assert "DEGENERATE" in validate_instance(inst).codes()
