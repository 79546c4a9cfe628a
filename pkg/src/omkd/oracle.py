"""Exact offline optimum, dual-certificate checks and competitive ratios."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

from .basic import Trace
from .errors import OracleSizeError
from .instance import FluctuationStats, Instance
from .pricing import LN2, gamma_basic, gammas_for

DEFAULT_MAX_REQUESTS = 20
CAPACITY_RTOL = 1e-9


@dataclass
class OfflineSolution:
    value: float
    assignment: dict[int, int]
    nodes: int
    method: str

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "assignment": {str(n): k for n, k in sorted(self.assignment.items())},
            "nodes": self.nodes,
            "method": self.method,
        }


class _Packing:
    """Incremental capacity bookkeeping for one candidate assignment."""

    def __init__(self, instance: Instance):
        self.instance = instance
        self.load: dict[tuple[int, int, int], float] = {}
        self.batch_count: dict[tuple[int, int], int] = {}

    def _footprint(self, offer, k):
        for m in range(offer.ndim):
            if offer.w[m] > 0:
                for t in offer.slots(m):
                    yield (k, m, t), offer.w[m]

    def fits(self, req, k) -> bool:
        res = self.instance.resources[k]
        if self.instance.variant == "lb" and self.batch_count.get((k, req.arrival), 0) >= res.q:
            return False
        for key, w in self._footprint(req.offers[k], k):
            if self.load.get(key, 0.0) + w > res.capacities[key[1]] * (1 + CAPACITY_RTOL):
                return False
        return True

    def add(self, req, k, sign=1):
        for key, w in self._footprint(req.offers[k], k):
            self.load[key] = self.load.get(key, 0.0) + sign * w
        bkey = (k, req.arrival)
        self.batch_count[bkey] = self.batch_count.get(bkey, 0) + sign


def exact_optimum(
    instance: Instance, max_requests: int = DEFAULT_MAX_REQUESTS, method: str = "branch-and-bound"
) -> OfflineSolution:
    """Optimal offline assignment under the instance variant's constraints.

    Depth-first search over each request's choices (reject or any offered
    resource), pruning when the value so far plus the best reward of every
    remaining request cannot beat the incumbent.  ``method="exhaustive"``
    enumerates every combination without pruning (only sensible for tiny
    instances).
    """
    reqs = list(instance.requests)
    if len(reqs) > max_requests:
        raise OracleSizeError(f"{len(reqs)} requests exceed the oracle cap of {max_requests}")
    if method == "exhaustive":
        return _exhaustive(instance)
    if method != "branch-and-bound":
        raise ValueError(f"unknown method {method!r}")

    suffix = [0.0] * (len(reqs) + 1)
    for i in range(len(reqs) - 1, -1, -1):
        suffix[i] = suffix[i + 1] + max((o.v for o in reqs[i].offers.values()), default=0.0)
    choices = [
        sorted((k for k, o in req.offers.items() if o.v > 0), key=lambda k, req=req: (-req.offers[k].v, k))
        for req in reqs
    ]
    packing = _Packing(instance)
    best = {"value": 0.0, "assignment": {}}
    current: dict[int, int] = {}
    nodes = 0

    def dfs(i: int, value: float):
        nonlocal nodes
        nodes += 1
        if value > best["value"]:
            best["value"] = value
            best["assignment"] = dict(current)
        if i == len(reqs) or value + suffix[i] <= best["value"]:
            return
        req = reqs[i]
        for k in choices[i]:
            if packing.fits(req, k):
                packing.add(req, k)
                current[req.id] = k
                dfs(i + 1, value + req.offers[k].v)
                del current[req.id]
                packing.add(req, k, -1)
        dfs(i + 1, value)

    dfs(0, 0.0)
    return OfflineSolution(best["value"], best["assignment"], nodes, "branch-and-bound")


def _exhaustive(instance: Instance) -> OfflineSolution:
    reqs = list(instance.requests)
    options = [[None, *req.offers] for req in reqs]
    best_value, best_assign, nodes = 0.0, {}, 0
    for combo in itertools.product(*options):
        nodes += 1
        packing = _Packing(instance)
        value, ok = 0.0, True
        for req, k in zip(reqs, combo):
            if k is None:
                continue
            if not packing.fits(req, k):
                ok = False
                break
            packing.add(req, k)
            value += req.offers[k].v
        if ok and value > best_value:
            best_value = value
            best_assign = {req.id: k for req, k in zip(reqs, combo) if k is not None}
    return OfflineSolution(best_value, best_assign, nodes, "exhaustive")


@dataclass
class CertificateReport:
    violations: list[str] = field(default_factory=list)
    max_violation: float = 0.0
    dual_objective: float = 0.0
    primal_objective: float = 0.0
    offline_value: float | None = None

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "violations": list(self.violations),
            "max_violation": self.max_violation,
            "dual_objective": self.dual_objective,
            "primal_objective": self.primal_objective,
            "offline_value": self.offline_value,
        }


def verify_dual_certificate(
    instance: Instance,
    trace: Trace,
    offline: OfflineSolution | None = None,
    rtol: float = 1e-6,
) -> CertificateReport:
    """Re-check every dual constraint with the final ``u``, ``p`` and ``h``.

    For each request ``n`` and offered resource ``k`` the final values must
    satisfy ``u_n + sum_m w_m sum_t p + h_{k, a_n} >= v``.  Also checks
    nonnegativity, ``D >= P`` and, when ``offline`` is given, ``D >= OPT``.
    """
    state = trace.state
    rep = CertificateReport()
    rep.dual_objective = trace.dual_objective()
    rep.primal_objective = trace.primal_objective()

    def flag(msg, amount):
        rep.violations.append(msg)
        rep.max_violation = max(rep.max_violation, amount)

    for n, u in trace.utilities.items():
        if u < 0:
            flag(f"u[{n}] = {u} < 0", -u)
    for key, hk in trace.h.items():
        if hk < 0:
            flag(f"h{key} = {hk} < 0", -hk)
    for k, dims in enumerate(state.prices):
        for m, slots in enumerate(dims):
            for t, p in slots.items():
                if p < 0:
                    flag(f"p[{k}][{m}][{t}] = {p} < 0", -p)

    for req in instance.requests:
        u = trace.utilities.get(req.id, 0.0)
        for k, offer in req.offers.items():
            cost = math.fsum(
                offer.w[m] * state.price(k, m, t) for m in range(offer.ndim) for t in offer.slots(m)
            )
            h = trace.h.get((k, req.arrival), 0.0)
            lhs = u + cost + h
            gap = offer.v - lhs
            if gap > rtol * max(1.0, offer.v):
                flag(f"request {req.id} resource {k}: u + w.p + h = {lhs:.9g} < v = {offer.v:.9g}", gap)

    D, P = rep.dual_objective, rep.primal_objective
    if P > D * (1 + rtol) + rtol:
        flag(f"weak duality: P = {P:.9g} > D = {D:.9g}", P - D)
    if offline is not None:
        rep.offline_value = offline.value
        if offline.value > D * (1 + rtol) + rtol:
            flag(f"weak duality: OPT = {offline.value:.9g} > D = {D:.9g}", offline.value - D)
    return rep


def empirical_cr(online_value: float, offline_value: float) -> float:
    """``offline / online`` with ``0/0 = 1`` and ``x/0 = inf``."""
    if isinstance(online_value, Trace):
        online_value = online_value.P
    if isinstance(offline_value, OfflineSolution):
        offline_value = offline_value.value
    if online_value <= 0:
        return 1.0 if offline_value <= 0 else math.inf
    return offline_value / online_value


def theoretical_cr_bound(stats: FluctuationStats, variant: str | None = None) -> float:
    """``2 gamma_max / ln 2`` for the gammas the algorithm runs with."""
    if variant is not None and (variant == "md") != (stats.variant == "md"):
        stats = FluctuationStats(variant, stats.per_resource, stats.undefined, stats.notes)
    gammas = gammas_for(stats)
    return 2.0 * max(gammas.values(), default=gamma_basic(1.0, 1.0)) / LN2


def greedy_assignment(instance: Instance) -> OfflineSolution:
    """Baseline: each request takes its highest-reward resource that still fits."""
    packing = _Packing(instance)
    assignment, value = {}, 0.0
    for req in instance.requests:
        for k in sorted(req.offers, key=lambda k: (-req.offers[k].v, k)):
            if req.offers[k].v > 0 and packing.fits(req, k):
                packing.add(req, k)
                assignment[req.id] = k
                value += req.offers[k].v
                break
    return OfflineSolution(value, assignment, len(instance.requests), "greedy")
