"""Multi-dimensional variant.

Admission compares the reward with the posted cost summed over all
dimensions; on admission each dimension is repriced with its own factors
(``mu = exp(w_m gamma_k / C_km)``) while ``gamma_k`` is shared by the
dimensions of a resource.  Storage already treats every resource as
multi-dimensional, so the loop is the one from :mod:`omkd.basic`.
"""
from __future__ import annotations

from typing import Callable

from .basic import Decision, Trace, run_online, select_resource, step
from .errors import VariantMismatchError
from .instance import FluctuationStats, Instance, Request
from .pricing import PriceState


def select_resource_md(request: Request, state: PriceState) -> tuple[int, float]:
    return select_resource(request, state)


def step_md(trace: Trace, request: Request) -> Decision:
    return step(trace, request)


def run_md(
    instance: Instance,
    mode: str = "strict",
    stats: FluctuationStats | None = None,
    callback: Callable[[Trace, Decision], None] | None = None,
) -> Trace:
    if instance.variant != "md":
        raise VariantMismatchError(f"run_md() needs an md instance, got {instance.variant!r}")
    return run_online(instance, mode, stats, callback)
