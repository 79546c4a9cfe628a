"""Load-balanced batch variant.

Requests arriving in the same slot form a batch.  Each batch is assigned by
solving the per-batch b-matching LP on residual rewards (at most ``q_k``
admissions per resource, at most one resource per request); the optimal dual
of that LP becomes the request utilities ``u_n`` and the per-batch resource
duals ``h_ki``.  Prices are then updated exactly as in the basic algorithm.
"""
from __future__ import annotations

import math
from typing import Callable, Sequence

from .assignment import assignment_value, dual_value, solve_batch_assignment
from .basic import BatchResult, Decision, Trace, _record, admit, new_trace
from .errors import VariantMismatchError
from .instance import FluctuationStats, Instance, Request
from .pricing import PriceState, admissible, posted_cost


def residual_rewards(batch: Sequence[Request], state: PriceState) -> list[list[float | None]]:
    """``r[n][k] = v - posted_cost``; ``None`` where request ``n`` has no offer on ``k``."""
    n_res = len(state.capacities)
    out = []
    for req in batch:
        row: list[float | None] = [None] * n_res
        for k, offer in req.offers.items():
            row[k] = offer.v - posted_cost(state, offer, k)
        out.append(row)
    return out


def step_batch(trace: Trace, time: int, batch: Sequence[Request]) -> BatchResult:
    state = trace.state
    inst = trace.instance
    batch = sorted(batch, key=lambda r: r.id)
    q = [res.q for res in inst.resources]
    r = residual_rewards(batch, state)
    lp_r = [
        [x if x is not None and admissible(x, req.offers[k].v) else None for k, x in enumerate(row)]
        for req, row in zip(batch, r)
    ]
    if trace.mode == "guarded":
        for i, req in enumerate(batch):
            for k, offer in req.offers.items():
                if not state.fits(k, offer):
                    lp_r[i][k] = None
    sol = solve_batch_assignment(lp_r, q)
    chosen = sol.assigned()

    result = BatchResult(
        time=time,
        request_ids=[req.id for req in batch],
        residuals={(req.id, k): v for i, req in enumerate(batch) for k, v in enumerate(r[i]) if v is not None},
        assignment={},
        u={req.id: sol.u[i] for i, req in enumerate(batch)},
        h=dict(enumerate(sol.h)),
        lp_value=assignment_value(lp_r, sol.x),
        dual_value=dual_value(sol.u, sol.h, q),
    )
    for k, hk in enumerate(sol.h):
        trace.h[(k, time)] = hk

    for i, req in enumerate(batch):
        trace.utilities[req.id] = sol.u[i]
        idx = len(trace.decisions)
        k = chosen.get(i)
        if k is None:
            offered = [v for v in r[i] if v is not None]
            best = max(offered) if offered else -math.inf
            decision = Decision(idx, req.id, "rejected", None, best, sol.u[i], 0.0, 0.0, batch=time)
        elif trace.mode == "guarded" and not state.fits(k, req.offers[k]):
            decision = Decision(idx, req.id, "blocked", k, r[i][k], sol.u[i], 0.0, r[i][k], batch=time)
        else:
            mass = admit(trace, req, k)
            result.assignment[req.id] = k
            v = req.offers[k].v
            # per-request share of the batch dual change: r_nk + C * dp; by strong
            # duality these shares sum to sum(u) + sum(q h) + price increase
            decision = Decision(idx, req.id, "admitted", k, r[i][k], sol.u[i], v, r[i][k] + mass, batch=time)
        _record(trace, decision)
        result.dP += decision.dP
        result.dD += decision.dD
    trace.batches.append(result)
    return result


def run_lb(
    instance: Instance,
    mode: str = "strict",
    stats: FluctuationStats | None = None,
    callback: Callable[[Trace, BatchResult], None] | None = None,
) -> Trace:
    """Run the load-balanced algorithm batch by batch in time order."""
    if instance.variant != "lb":
        raise VariantMismatchError(f"run_lb() needs an lb instance, got {instance.variant!r}")
    trace = new_trace(instance, mode, stats)
    for time, batch in sorted(instance.batches().items()):
        result = step_batch(trace, time, batch)
        if callback is not None:
            callback(trace, result)
    return trace
