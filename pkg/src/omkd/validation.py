"""Assumption and guarantee-precondition checks for an instance."""
from __future__ import annotations

from dataclasses import dataclass, field

from .instance import Instance, pricing_stats, total_demand_fluctuation, value_density
from .pricing import gammas_for, weight_cap

# realized-vs-declared comparisons tolerate float round-off from v = theta * w * d
BOUND_RTOL = 1e-9

THEOREM_FOR_VARIANT = {"basic": "THM1", "lb": "THM2", "md": "THM4"}


@dataclass(frozen=True)
class Violation:
    code: str  # A1 | A2 | A3 | THM1 | THM2 | THM4 | DEGENERATE
    message: str
    request: int | None = None
    resource: int | None = None

    def __str__(self):
        return f"[{self.code}] {self.message}"


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    @property
    def feasible_for_guarantee(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.feasible_for_guarantee

    def codes(self) -> set[str]:
        return {v.code for v in self.violations}

    def to_dict(self) -> dict:
        return {
            "feasible_for_guarantee": self.feasible_for_guarantee,
            "violations": [
                {"code": v.code, "message": v.message, "request": v.request, "resource": v.resource}
                for v in self.violations
            ],
            "notes": list(self.notes),
        }


def _outside(x, lo, hi) -> bool:
    return x < lo * (1 - BOUND_RTOL) or x > hi * (1 + BOUND_RTOL)


def validate_instance(instance: Instance, theorem: bool = True) -> ValidationReport:
    """Check A1 (densities), A2 (durations), A3 (weights below capacity) and,
    with ``theorem=True``, the weight precondition of the guarantee for the
    instance's variant.  Violations are returned, never raised.
    """
    report = ValidationReport()
    stats = pricing_stats(instance)
    report.notes.extend(stats.notes)
    gammas = gammas_for(stats)
    variant = instance.variant
    thm = THEOREM_FOR_VARIANT[variant]

    for res in instance.resources:
        k = res.id
        st = stats[k]
        max_w = [0.0] * res.ndim
        for req, offer in instance.offers_on(k):
            if offer.degenerate:
                report.violations.append(Violation(
                    "DEGENERATE", f"request {req.id} on resource {k}: reward {offer.v} with zero weight-time",
                    req.id, k))
                continue
            dens = value_density(offer, variant)
            if dens > 0 and st.source != "placeholder" and _outside(dens, st.density_min, st.density_max):
                report.violations.append(Violation(
                    "A1", f"request {req.id} on resource {k}: density {dens:.6g} outside "
                    f"[{st.density_min:.6g}, {st.density_max:.6g}]", req.id, k))
            if variant == "md" and any(w > 0 for w in offer.w):
                xi = total_demand_fluctuation(offer)
                if xi > st.xi_max * (1 + BOUND_RTOL):
                    report.violations.append(Violation(
                        "A1", f"request {req.id} on resource {k}: demand fluctuation {xi:.6g} "
                        f"exceeds declared {st.xi_max:.6g}", req.id, k))
            for m in range(offer.ndim):
                if st.source != "placeholder" and _outside(offer.d[m], st.d_min, st.d_max):
                    report.violations.append(Violation(
                        "A2", f"request {req.id} on resource {k}: duration {offer.d[m]} outside "
                        f"[{st.d_min:g}, {st.d_max:g}]", req.id, k))
                if offer.w[m] > res.capacities[m]:
                    report.violations.append(Violation(
                        "A3", f"request {req.id} on resource {k}: weight {offer.w[m]:.6g} exceeds "
                        f"capacity {res.capacities[m]:.6g}", req.id, k))
                max_w[m] = max(max_w[m], offer.w[m])

        if theorem:
            q = res.q if variant == "lb" else None
            for m, eps in enumerate(max_w):
                cap = weight_cap(res.capacities[m], gammas[k], q)
                if eps > cap:
                    report.violations.append(Violation(
                        thm, f"resource {k} dim {m}: max weight {eps:.6g} exceeds "
                        f"C ln2/{'(q gamma)' if q else 'gamma'} = {cap:.6g}", None, k))
    return report
