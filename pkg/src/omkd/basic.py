"""Online primal-dual admission for multiple knapsacks with departures.

Each arriving request goes to the resource with the largest residual reward
``v - posted_cost``, provided that residual is strictly positive; the slots it
occupies are then repriced multiplicatively.  The same loop serves the
multi-dimensional variant (see :mod:`omkd.multidim`), since a
single-dimension resource is just a resource with one dimension.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Callable

from .errors import VariantMismatchError
from .instance import FluctuationStats, Instance, Request
from .pricing import PriceState, admissible, apply_update, posted_cost

MODES = ("strict", "guarded")

TRACE_COLUMNS = (
    "step", "request_id", "outcome", "k_star", "residual", "dP", "dD", "running_P", "running_D",
)


@dataclass
class Decision:
    step: int
    request_id: int
    outcome: str  # "admitted" | "rejected" | "blocked"
    k_star: int | None
    residual: float
    utility: float
    dP: float
    dD: float
    running_P: float = 0.0
    running_D: float = 0.0
    batch: int | None = None

    @property
    def admitted(self) -> bool:
        return self.outcome == "admitted"

    @property
    def resource(self) -> int | None:
        return self.k_star if self.admitted else None

    @property
    def ratio(self) -> float:
        return self.dD / self.dP if self.dP > 0 else math.nan


@dataclass
class BatchResult:
    """Outcome of one batch of the load-balanced algorithm."""

    time: int
    request_ids: list[int]
    residuals: dict[tuple[int, int], float]
    assignment: dict[int, int]
    u: dict[int, float]
    h: dict[int, float]
    dP: float = 0.0
    dD: float = 0.0
    lp_value: float = 0.0
    dual_value: float = 0.0

    @property
    def ratio(self) -> float:
        return self.dD / self.dP if self.dP > 0 else math.nan


class Trace:
    """Everything a run produced: decisions, final prices, primal and dual solutions."""

    def __init__(self, instance: Instance, state: PriceState, mode: str = "strict"):
        if mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
        self.instance = instance
        self.state = state
        self.mode = mode
        self.decisions: list[Decision] = []
        self.batches: list[BatchResult] = []
        self.assignment: dict[int, int] = {}
        self.utilities: dict[int, float] = {}
        self.h: dict[tuple[int, int], float] = {}
        self.P = 0.0
        self.D = 0.0

    @property
    def gammas(self) -> list[float]:
        return self.state.gammas

    @property
    def blocked(self) -> list[int]:
        return [d.request_id for d in self.decisions if d.outcome == "blocked"]

    def primal_objective(self) -> float:
        by_id = {r.id: r for r in self.instance.requests}
        return math.fsum(by_id[n].reward(k) for n, k in self.assignment.items())

    def dual_objective(self) -> float:
        """Dual objective recomputed from the final ``u``, ``p`` and ``h``."""
        q_h = math.fsum(
            self.instance.resources[k].q * hk for (k, _), hk in self.h.items() if hk
        )
        return math.fsum(self.utilities.values()) + self.state.price_mass() + q_h

    def loads(self) -> dict[tuple[int, int, int], float]:
        """Utilization ``(k, m, t) -> sum of admitted weights``, rebuilt from the assignment."""
        out: dict[tuple[int, int, int], float] = {}
        by_id = {r.id: r for r in self.instance.requests}
        for n, k in self.assignment.items():
            offer = by_id[n].offers[k]
            for m in range(offer.ndim):
                if offer.w[m] == 0:
                    continue
                for t in offer.slots(m):
                    out[(k, m, t)] = out.get((k, m, t), 0.0) + offer.w[m]
        return out

    def capacity_violations(self, rtol: float = 1e-9) -> list[tuple[int, int, int, float, float]]:
        """Slots whose load exceeds capacity: ``(k, m, t, load, capacity)``."""
        out = []
        for (k, m, t), load in sorted(self.loads().items()):
            cap = self.instance.resources[k].capacities[m]
            if load > cap * (1 + rtol):
                out.append((k, m, t, load, cap))
        if self.instance.variant == "lb":
            counts: dict[tuple[int, int], int] = {}
            by_id = {r.id: r for r in self.instance.requests}
            for n, k in self.assignment.items():
                key = (k, by_id[n].arrival)
                counts[key] = counts.get(key, 0) + 1
            for (k, i), c in sorted(counts.items()):
                if c > self.instance.resources[k].q:
                    out.append((k, -1, i, float(c), float(self.instance.resources[k].q)))
        return out

    def step_ratios(self) -> list[float]:
        """Per-iteration dD/dP: per admitted request, or per nonempty batch for ``lb``."""
        if self.batches:
            return [b.ratio for b in self.batches if b.dP > 0]
        return [d.ratio for d in self.decisions if d.admitted and d.dP > 0]

    def labels(self) -> list[int]:
        """Assigned resource per request in arrival order, ``-1`` if rejected."""
        return [self.assignment.get(r.id, -1) for r in self.instance.requests]

    def to_csv(self, fp=None) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(TRACE_COLUMNS)
        for d in self.decisions:
            writer.writerow([
                d.step, d.request_id, d.outcome,
                "" if d.k_star is None else d.k_star,
                repr(d.residual), repr(d.dP), repr(d.dD), repr(d.running_P), repr(d.running_D),
            ])
        text = buf.getvalue()
        if fp is not None:
            fp.write(text)
        return text


def new_trace(instance: Instance, mode: str = "strict", stats: FluctuationStats | None = None) -> Trace:
    return Trace(instance, PriceState.for_instance(instance, stats), mode)


def select_resource(request: Request, state: PriceState) -> tuple[int, float]:
    """Resource with the largest residual reward; lowest id wins ties."""
    best_k, best_r = None, -math.inf
    for k, offer in request.offers.items():
        r = offer.v - posted_cost(state, offer, k)
        if r > best_r:
            best_k, best_r = k, r
    return best_k, best_r


def _record(trace: Trace, decision: Decision) -> Decision:
    trace.P += decision.dP
    trace.D += decision.dD
    decision.running_P = trace.P
    decision.running_D = trace.D
    trace.decisions.append(decision)
    return decision


def admit(trace: Trace, request: Request, k: int) -> float:
    """Assign ``request`` to ``k`` and reprice its slots; returns ``sum C * dp``."""
    state = trace.state
    offer = request.offers[k]
    trace.assignment[request.id] = k
    mass = 0.0
    for m in range(offer.ndim):
        w = offer.w[m]
        inc = apply_update(state, k, m, offer.slots(m), state.factors(k, m, w), w)
        mass += state.capacities[k][m] * inc
    return mass


def step(trace: Trace, request: Request) -> Decision:
    """Process one arriving request; the multi-dimensional loop reuses this."""
    state = trace.state
    k, residual = select_resource(request, state)
    idx = len(trace.decisions)
    if k is None or not admissible(residual, request.offers[k].v):
        return _record(trace, Decision(idx, request.id, "rejected", k, residual, 0.0, 0.0, 0.0))
    offer = request.offers[k]
    if trace.mode == "guarded" and not state.fits(k, offer):
        # keep u = residual so the dual stays feasible for this request
        trace.utilities[request.id] = residual
        return _record(trace, Decision(idx, request.id, "blocked", k, residual, residual, 0.0, residual))
    trace.utilities[request.id] = residual
    mass = admit(trace, request, k)
    return _record(trace, Decision(idx, request.id, "admitted", k, residual, residual, offer.v, residual + mass))


def run_online(
    instance: Instance,
    mode: str = "strict",
    stats: FluctuationStats | None = None,
    callback: Callable[[Trace, Decision], None] | None = None,
) -> Trace:
    trace = new_trace(instance, mode, stats)
    for req in instance.requests:
        decision = step(trace, req)
        if callback is not None:
            callback(trace, decision)
    return trace


def run(
    instance: Instance,
    mode: str = "strict",
    stats: FluctuationStats | None = None,
    callback: Callable[[Trace, Decision], None] | None = None,
) -> Trace:
    """Run the basic algorithm over the whole request sequence.

    ``callback(trace, decision)`` fires after every request and may inspect
    (not modify) ``trace.state``.  ``stats`` overrides the pricing statistics
    derived from the instance.
    """
    if instance.variant != "basic":
        raise VariantMismatchError(f"run() needs a basic instance, got {instance.variant!r}")
    return run_online(instance, mode, stats, callback)
