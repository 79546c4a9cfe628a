"""Post-run invariant audit and run summaries."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

from .basic import Trace
from .instance import Instance, pricing_stats
from .oracle import (
    CertificateReport,
    OfflineSolution,
    empirical_cr,
    theoretical_cr_bound,
    verify_dual_certificate,
)
from .pricing import LN2

D_RTOL = 1e-6


def step_ratio_bounds(trace: Trace) -> list[tuple[float, float]]:
    """``(dD/dP, bound)`` per iteration with ``dP > 0``.

    The bound is ``2 gamma_{k*} / ln 2`` per admitted request, and
    ``2 gamma_max / ln 2`` per batch for the load-balanced variant.
    """
    gammas = trace.state.gammas
    if trace.instance.variant == "lb":
        bound = 2.0 * max(gammas) / LN2
        return [(b.dD / b.dP, bound) for b in trace.batches if b.dP > 0]
    return [(d.dD / d.dP, 2.0 * gammas[d.k_star] / LN2) for d in trace.decisions if d.admitted and d.dP > 0]


@dataclass
class InvariantAudit:
    closed_form_mismatches: int = 0
    capacity_violations: int = 0
    ratio_exceedances: int = 0
    dual_drift: float = 0.0
    certificate: CertificateReport = field(default_factory=CertificateReport)

    @property
    def count(self) -> int:
        return (
            self.closed_form_mismatches
            + self.capacity_violations
            + self.ratio_exceedances
            + len(self.certificate.violations)
            + (self.dual_drift > D_RTOL)
        )


def audit_trace(instance: Instance, trace: Trace, offline: OfflineSolution | None = None) -> InvariantAudit:
    closed = trace.dual_objective()
    return InvariantAudit(
        closed_form_mismatches=sum(1 for _ in trace.state.closed_form_mismatches()),
        capacity_violations=len(trace.capacity_violations()),
        ratio_exceedances=sum(1 for r, b in step_ratio_bounds(trace) if r > b),
        dual_drift=abs(trace.D - closed) / max(1.0, abs(closed)),
        certificate=verify_dual_certificate(instance, trace, offline),
    )


@dataclass
class RunSummary:
    instance: str
    variant: str
    mode: str
    online_P: float
    dual_D: float
    offline_opt: float | None
    empirical_cr: float | None
    bound: float
    max_step_ratio: float
    invariant_violations: int
    wall_time: float

    def to_dict(self) -> dict:
        out = asdict(self)
        for key in ("empirical_cr", "max_step_ratio"):
            if isinstance(out[key], float) and not math.isfinite(out[key]):
                out[key] = str(out[key])
        return out


def summarize(
    name: str,
    instance: Instance,
    trace: Trace,
    offline: OfflineSolution | None,
    wall_time: float,
) -> RunSummary:
    audit = audit_trace(instance, trace, offline)
    ratios = [r for r, _ in step_ratio_bounds(trace)]
    return RunSummary(
        instance=name,
        variant=instance.variant,
        mode=trace.mode,
        online_P=trace.P,
        dual_D=trace.dual_objective(),
        offline_opt=None if offline is None else offline.value,
        empirical_cr=None if offline is None else empirical_cr(trace.P, offline.value),
        bound=theoretical_cr_bound(pricing_stats(instance)),
        max_step_ratio=max(ratios, default=0.0),
        invariant_violations=audit.count,
        wall_time=wall_time,
    )
