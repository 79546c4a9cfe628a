"""Exponential slot pricing shared by all three online algorithms.

Every (resource, dimension) pair owns a sparse map slot -> price and a map
slot -> utilization.  Untouched slots have price and utilization zero.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import DomainError, HorizonError
from .instance import FluctuationStats, Instance, Offer, pricing_stats

LN2 = math.log(2.0)

# closed-form comparisons
RTOL = 1e-9
# a residual this close to zero (relative to the reward) is rounding noise
# from a tie, and is treated as zero rather than as a positive residual
ADMIT_RTOL = 1e-12
ATOL = 1e-12


def gamma_basic(theta_bar: float, d_bar: float) -> float:
    """``2 ln(2 + 4 theta_bar d_bar)``; at least ``2 ln 6``."""
    if theta_bar < 1 or d_bar < 1:
        raise DomainError(f"fluctuation ratios must be >= 1, got {theta_bar}, {d_bar}")
    return 2.0 * math.log(2.0 + 4.0 * theta_bar * d_bar)


def gamma_md(rho_bar: float, d_bar: float, xi_max: float) -> float:
    if rho_bar < 1 or d_bar < 1 or xi_max < 1:
        raise DomainError(f"fluctuation ratios must be >= 1, got {rho_bar}, {d_bar}, {xi_max}")
    return 2.0 * math.log(4.0 * rho_bar * d_bar * xi_max + 2.0)


def gammas_for(stats: FluctuationStats) -> dict[int, float]:
    if stats.variant == "md":
        return {k: gamma_md(s.density_bar, s.d_bar, s.xi_max) for k, s in stats.per_resource.items()}
    return {k: gamma_basic(s.density_bar, s.d_bar) for k, s in stats.per_resource.items()}


def weight_cap(capacity: float, gamma: float, q: int | None = None) -> float:
    """Largest weight allowed by the guarantee's precondition, ``C ln2 / (q gamma)``."""
    if q is None:
        return capacity * LN2 / gamma
    return capacity * LN2 / (q * gamma)


@dataclass(frozen=True)
class UpdateFactors:
    mu: float
    beta: float


def update_factors(w: float, C: float, gamma: float, density_min: float) -> UpdateFactors:
    if w == 0:
        return UpdateFactors(1.0, 0.0)
    x = w * gamma / C
    return UpdateFactors(math.exp(x), density_min * math.expm1(x))


def closed_form_price(density_min: float, gamma: float, z: float, C: float) -> float:
    return density_min * math.expm1(gamma * z / C)


class PriceState:
    """Dual prices ``p[k][m][t]`` and utilizations ``z[k][m][t]``.

    Single writer; the run loop owns it.
    """

    def __init__(
        self,
        horizon: int,
        capacities: Sequence[Sequence[float]],
        gammas: Sequence[float],
        density_mins: Sequence[float],
    ):
        self.horizon = horizon
        self.capacities = [tuple(c) for c in capacities]
        self.gammas = list(gammas)
        self.density_mins = list(density_mins)
        self.prices = [[{} for _ in caps] for caps in self.capacities]
        self.util = [[{} for _ in caps] for caps in self.capacities]

    @classmethod
    def for_instance(cls, instance: Instance, stats: FluctuationStats | None = None) -> "PriceState":
        stats = stats or pricing_stats(instance)
        gammas = gammas_for(stats)
        ks = range(instance.n_resources)
        return cls(
            instance.horizon,
            [r.capacities for r in instance.resources],
            [gammas[k] for k in ks],
            [stats[k].density_min for k in ks],
        )

    def price(self, k: int, m: int, t: int) -> float:
        return self.prices[k][m].get(t, 0.0)

    def utilization(self, k: int, m: int, t: int) -> float:
        return self.util[k][m].get(t, 0.0)

    def factors(self, k: int, m: int, w: float) -> UpdateFactors:
        return update_factors(w, self.capacities[k][m], self.gammas[k], self.density_mins[k])

    def fits(self, k: int, offer: Offer) -> bool:
        """Would admitting ``offer`` on ``k`` keep every slot within capacity?"""
        for m in range(offer.ndim):
            w = offer.w[m]
            if w == 0:
                continue
            cap = self.capacities[k][m] * (1 + RTOL)
            zs = self.util[k][m]
            if any(zs.get(t, 0.0) + w > cap for t in offer.slots(m)):
                return False
        return True

    def price_mass(self) -> float:
        """``sum C_km p_kmt`` over everything, the price part of the dual objective."""
        return math.fsum(
            self.capacities[k][m] * p
            for k, dims in enumerate(self.prices)
            for m, slots in enumerate(dims)
            for p in slots.values()
        )

    def closed_form_mismatches(self, rtol: float = RTOL, atol: float = ATOL):
        """Yield ``(k, m, t, stored, expected)`` wherever the stored price leaves the closed form."""
        for k, dims in enumerate(self.util):
            for m, zs in enumerate(dims):
                C = self.capacities[k][m]
                for t in set(zs) | set(self.prices[k][m]):
                    stored = self.prices[k][m].get(t, 0.0)
                    expected = closed_form_price(self.density_mins[k], self.gammas[k], zs.get(t, 0.0), C)
                    if abs(stored - expected) > max(atol, rtol * abs(expected)):
                        yield k, m, t, stored, expected

    def copy(self) -> "PriceState":
        new = PriceState(self.horizon, self.capacities, self.gammas, self.density_mins)
        new.prices = [[dict(s) for s in dims] for dims in self.prices]
        new.util = [[dict(s) for s in dims] for dims in self.util]
        return new


def apply_update(
    state: PriceState, k: int, m: int, slots: Iterable[int], factors: UpdateFactors, w: float
) -> float:
    """``p <- mu p + beta`` and ``z <- z + w`` on each slot.  Returns the summed price increase."""
    slots = list(slots)
    for t in slots:
        if not 0 <= t < state.horizon:
            raise HorizonError(f"slot {t} outside horizon 0..{state.horizon - 1}")
    if w == 0:
        return 0.0
    prices, util = state.prices[k][m], state.util[k][m]
    increase = 0.0
    for t in slots:
        old = prices.get(t, 0.0)
        new = factors.mu * old + factors.beta
        prices[t] = new
        util[t] = util.get(t, 0.0) + w
        increase += new - old
    return increase


def admissible(residual: float, v: float) -> bool:
    """Strictly positive residual, up to rounding noise."""
    return residual > ADMIT_RTOL * abs(v)


def posted_cost(state: PriceState, offer: Offer, k: int) -> float:
    """``sum_m w_m * sum_{t in T_m} p[k][m][t]``."""
    total = 0.0
    for m in range(offer.ndim):
        w = offer.w[m]
        if w == 0:
            continue
        prices = state.prices[k][m]
        total += w * sum(prices.get(t, 0.0) for t in offer.slots(m))
    return total
