"""Instance model: resources, requests and their per-resource offers.

Time is discretised into 0-based slots ``0 .. horizon-1``.  An offer occupies
the inclusive slot set ``{s, ..., s + d - 1}`` in every dimension.  The
single-dimension variants (``basic`` and ``lb``) are stored exactly like the
multi-dimensional one, with one dimension per resource.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

from .errors import DegenerateOfferError, InstanceError, UndefinedStatsError

VARIANTS = ("basic", "lb", "md")


@dataclass(frozen=True)
class Resource:
    id: int
    capacities: tuple[float, ...]
    q: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "capacities", tuple(float(c) for c in self.capacities))
        if not self.capacities:
            raise InstanceError(f"resource {self.id}: no capacity given")
        for c in self.capacities:
            if not (c > 0 and math.isfinite(c)):
                raise InstanceError(f"resource {self.id}: capacity must be positive, got {c}")
        if self.q is not None and (int(self.q) != self.q or self.q < 1):
            raise InstanceError(f"resource {self.id}: batch cap q must be a positive integer")

    @property
    def ndim(self) -> int:
        return len(self.capacities)


@dataclass(frozen=True)
class Offer:
    """Reward ``v`` for occupying ``w[m]`` units of dimension ``m`` over ``d[m]`` slots from ``s[m]``."""

    v: float
    w: tuple[float, ...]
    s: tuple[int, ...]
    d: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "v", float(self.v))
        object.__setattr__(self, "w", tuple(float(x) for x in self.w))
        object.__setattr__(self, "s", tuple(int(x) for x in self.s))
        object.__setattr__(self, "d", tuple(int(x) for x in self.d))
        if not (len(self.w) == len(self.s) == len(self.d)) or not self.w:
            raise InstanceError("offer: w, s, d must be non-empty and of equal length")
        if not (self.v >= 0 and math.isfinite(self.v)):
            raise InstanceError(f"offer: reward must be a nonnegative real, got {self.v}")
        if any(not (x >= 0 and math.isfinite(x)) for x in self.w):
            raise InstanceError(f"offer: weights must be nonnegative reals, got {self.w}")
        if any(x < 1 for x in self.d):
            raise InstanceError(f"offer: durations must be positive, got {self.d}")

    @property
    def ndim(self) -> int:
        return len(self.w)

    def slots(self, m: int = 0) -> range:
        return range(self.s[m], self.s[m] + self.d[m])

    @property
    def weight_time(self) -> float:
        return math.fsum(w * d for w, d in zip(self.w, self.d))

    @property
    def degenerate(self) -> bool:
        return self.v > 0 and self.weight_time == 0


@dataclass(frozen=True)
class Request:
    id: int
    arrival: int
    offers: Mapping[int, Offer]

    def __post_init__(self):
        offers = {int(k): o for k, o in sorted(self.offers.items(), key=lambda kv: int(kv[0]))}
        object.__setattr__(self, "offers", offers)
        if not offers:
            raise InstanceError(f"request {self.id}: at least one offer is required")

    def reward(self, k: int) -> float:
        offer = self.offers.get(k)
        return 0.0 if offer is None else offer.v


@dataclass(frozen=True)
class DeclaredBounds:
    """Setup information known to the online algorithm before any arrival."""

    theta: tuple[float, float] | None = None
    d: tuple[float, float] | None = None
    rho: tuple[float, float] | None = None
    xi: float | None = None

    def __post_init__(self):
        for name in ("theta", "d", "rho"):
            pair = getattr(self, name)
            if pair is None:
                continue
            lo, hi = (float(x) for x in pair)
            if not (0 < lo <= hi and math.isfinite(hi)):
                raise InstanceError(f"declared bound {name}={pair} must satisfy 0 < min <= max")
            object.__setattr__(self, name, (lo, hi))
        if self.xi is not None:
            object.__setattr__(self, "xi", float(self.xi))
            if not self.xi >= 1:
                raise InstanceError(f"declared xi must be >= 1, got {self.xi}")

    def density(self, variant: str) -> tuple[float, float] | None:
        return self.rho if variant == "md" else self.theta


@dataclass(frozen=True)
class Instance:
    horizon: int
    resources: tuple[Resource, ...]
    requests: tuple[Request, ...]
    variant: str = "basic"
    declared: Mapping[int, DeclaredBounds] = field(default_factory=dict)

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise InstanceError(f"unknown variant {self.variant!r}; expected one of {VARIANTS}")
        if int(self.horizon) != self.horizon or self.horizon < 1:
            raise InstanceError(f"horizon must be a positive integer, got {self.horizon}")
        resources = tuple(self.resources)
        for pos, res in enumerate(resources):
            if res.id != pos:
                raise InstanceError(f"resource ids must be 0..K-1 in order; got {res.id} at {pos}")
            if self.variant != "md" and res.ndim != 1:
                raise InstanceError(f"resource {res.id}: variant {self.variant} is single-dimensional")
            if self.variant == "lb" and res.q is None:
                raise InstanceError(f"resource {res.id}: load-balancing variant needs q")
        requests = tuple(sorted(self.requests, key=lambda r: (r.arrival, r.id)))
        seen = set()
        for req in requests:
            if req.id in seen or req.id < 0:
                raise InstanceError(f"request ids must be unique and nonnegative (id {req.id})")
            seen.add(req.id)
            if not 0 <= req.arrival < self.horizon:
                raise InstanceError(f"request {req.id}: arrival {req.arrival} outside horizon")
            for k, offer in req.offers.items():
                if not 0 <= k < len(resources):
                    raise InstanceError(f"request {req.id}: offer for unknown resource {k}")
                if offer.ndim != resources[k].ndim:
                    raise InstanceError(
                        f"request {req.id}: offer on resource {k} has {offer.ndim} dimensions, "
                        f"resource has {resources[k].ndim}"
                    )
                for m in range(offer.ndim):
                    if offer.s[m] < req.arrival:
                        raise InstanceError(f"request {req.id}: service on {k} starts before arrival")
                    if offer.s[m] + offer.d[m] > self.horizon:
                        raise InstanceError(f"request {req.id}: interval on {k} leaves the horizon")
        declared = {int(k): b for k, b in dict(self.declared).items()}
        for k in declared:
            if not 0 <= k < len(resources):
                raise InstanceError(f"declared bounds for unknown resource {k}")
        object.__setattr__(self, "resources", resources)
        object.__setattr__(self, "requests", requests)
        object.__setattr__(self, "declared", declared)

    @property
    def n_resources(self) -> int:
        return len(self.resources)

    @property
    def n_requests(self) -> int:
        return len(self.requests)

    def batches(self) -> dict[int, list[Request]]:
        """Requests grouped by arrival slot, in arrival order."""
        out: dict[int, list[Request]] = {}
        for req in self.requests:
            out.setdefault(req.arrival, []).append(req)
        return out

    def offers_on(self, k: int) -> Iterable[tuple[Request, Offer]]:
        for req in self.requests:
            offer = req.offers.get(k)
            if offer is not None:
                yield req, offer

    # -- JSON ------------------------------------------------------------

    @classmethod
    def from_dict(cls, data: Mapping) -> "Instance":
        try:
            variant = data.get("variant", "basic")
            resources = [
                Resource(id=int(r["id"]), capacities=tuple(r["capacities"]), q=r.get("q"))
                for r in sorted(data["resources"], key=lambda r: int(r["id"]))
            ]
            requests = []
            for r in data["requests"]:
                offers = {
                    int(k): Offer(v=o["v"], w=_seq(o["w"]), s=_seq(o["s"]), d=_seq(o["d"]))
                    for k, o in r["offers"].items()
                }
                requests.append(Request(id=int(r["id"]), arrival=int(r["arrival"]), offers=offers))
            declared_raw = data.get("declared_bounds") or {}
            if isinstance(declared_raw, list):
                declared_raw = {i: b for i, b in enumerate(declared_raw) if b}
            declared = {
                int(k): DeclaredBounds(
                    theta=b.get("theta"), d=b.get("d"), rho=b.get("rho"), xi=b.get("xi")
                )
                for k, b in declared_raw.items()
            }
            return cls(
                horizon=data["horizon"],
                resources=tuple(resources),
                requests=tuple(requests),
                variant=variant,
                declared=declared,
            )
        except KeyError as exc:
            raise InstanceError(f"missing key {exc.args[0]!r}") from exc
        except (TypeError, AttributeError) as exc:
            raise InstanceError(f"malformed instance: {exc}") from exc

    def to_dict(self) -> dict:
        out = {
            "horizon": self.horizon,
            "variant": self.variant,
            "resources": [
                {"id": r.id, "capacities": list(r.capacities), **({"q": r.q} if r.q is not None else {})}
                for r in self.resources
            ],
            "requests": [
                {
                    "id": req.id,
                    "arrival": req.arrival,
                    "offers": {
                        str(k): {"v": o.v, "w": list(o.w), "s": list(o.s), "d": list(o.d)}
                        for k, o in req.offers.items()
                    },
                }
                for req in self.requests
            ],
        }
        if self.declared:
            out["declared_bounds"] = {
                str(k): {
                    name: (list(val) if isinstance(val, tuple) else val)
                    for name in ("theta", "d", "rho", "xi")
                    if (val := getattr(b, name)) is not None
                }
                for k, b in sorted(self.declared.items())
            }
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def _seq(x):
    return tuple(x) if isinstance(x, (list, tuple)) else (x,)


def load_instance(path) -> Instance:
    """Read an instance JSON file.  Raises ``json.JSONDecodeError`` or ``InstanceError``."""
    return Instance.from_dict(json.loads(Path(path).read_text()))


def dump_instance(instance: Instance, path) -> None:
    Path(path).write_text(instance.dumps())


# -- per-offer quantities ---------------------------------------------------


def value_density(offer: Offer, variant: str = "basic") -> float:
    """Reward per unit of weight-time.

    Single-dimension variants give ``v / (w d)``; the multi-dimensional one
    divides by the sum over dimensions.  Both coincide on one dimension, so
    ``variant`` only matters for the error message.
    """
    denom = offer.weight_time
    if denom == 0:
        if offer.v == 0:
            return 0.0
        raise DegenerateOfferError(
            f"{variant} offer with reward {offer.v} has zero weight-time; density undefined"
        )
    return offer.v / denom


def total_demand_fluctuation(offer: Offer) -> float:
    positive = [w for w in offer.w if w > 0]
    if not positive:
        raise DegenerateOfferError("total demand fluctuation undefined: all weights are zero")
    return math.fsum(offer.w) / min(positive)


# -- fluctuation statistics -------------------------------------------------


@dataclass(frozen=True)
class ResourceStats:
    density_min: float
    density_max: float
    d_min: float
    d_max: float
    xi_max: float = 1.0
    source: str = "realized"

    @property
    def density_bar(self) -> float:
        return self.density_max / self.density_min

    @property
    def d_bar(self) -> float:
        return self.d_max / self.d_min

    # theta-named aliases for the single-dimension variants
    theta_min = property(lambda self: self.density_min)
    theta_max = property(lambda self: self.density_max)
    theta_bar = property(lambda self: self.density_bar)


@dataclass(frozen=True)
class FluctuationStats:
    variant: str
    per_resource: Mapping[int, ResourceStats]
    undefined: tuple[int, ...] = ()
    notes: tuple[str, ...] = ()

    def __getitem__(self, k: int) -> ResourceStats:
        return self.per_resource[k]

    @property
    def density_bar_max(self) -> float:
        return max((s.density_bar for s in self.per_resource.values()), default=1.0)

    @property
    def d_bar_max(self) -> float:
        return max((s.d_bar for s in self.per_resource.values()), default=1.0)

    @property
    def xi_max(self) -> float:
        return max((s.xi_max for s in self.per_resource.values()), default=1.0)

    theta_bar_max = density_bar_max
    rho_bar_max = density_bar_max


def _realized(instance: Instance, k: int):
    densities, durations, xis = [], [], []
    for _, offer in instance.offers_on(k):
        if offer.degenerate:
            continue
        densities.append(value_density(offer, instance.variant))
        durations.extend(offer.d)
        if any(w > 0 for w in offer.w):
            xis.append(total_demand_fluctuation(offer))
    return densities, durations, xis


def fluctuation_stats(instance: Instance, strict: bool = False) -> FluctuationStats:
    """Realized fluctuation statistics per resource.

    Minima are taken over strictly positive values.  Resources without any
    positive-density offer are left out and listed in ``undefined``; with
    ``strict=True`` that raises :class:`UndefinedStatsError` instead.
    """
    per, undefined = {}, []
    for res in instance.resources:
        densities, durations, xis = _realized(instance, res.id)
        positive = [x for x in densities if x > 0]
        if not positive:
            undefined.append(res.id)
            continue
        per[res.id] = ResourceStats(
            density_min=min(positive),
            density_max=max(densities),
            d_min=min(durations),
            d_max=max(durations),
            xi_max=max(xis, default=1.0) if instance.variant == "md" else 1.0,
        )
    if strict and undefined:
        raise UndefinedStatsError(undefined)
    return FluctuationStats(instance.variant, per, tuple(undefined))


def pricing_stats(instance: Instance) -> FluctuationStats:
    """Statistics the online algorithm is configured with.

    Declared bounds are used where present.  Missing ones are filled in from
    the realized offers (clairvoyant bounds) and noted.  A resource with
    neither gets a neutral placeholder; it can never admit anything anyway
    because all its offers have zero reward.
    """
    realized = fluctuation_stats(instance)
    per, notes = {}, []
    for res in instance.resources:
        k = res.id
        decl = instance.declared.get(k, DeclaredBounds())
        real = realized.per_resource.get(k)
        dens = decl.density(instance.variant)
        if dens is None and real is not None:
            dens = (real.density_min, real.density_max)
            notes.append(f"resource {k}: density bounds computed from realized offers")
        dur = decl.d
        if dur is None and real is not None:
            dur = (real.d_min, real.d_max)
            notes.append(f"resource {k}: duration bounds computed from realized offers")
        xi = 1.0
        if instance.variant == "md":
            xi = decl.xi
            if xi is None:
                xi = real.xi_max if real is not None else 1.0
                notes.append(f"resource {k}: xi_max computed from realized offers")
        if dens is None or dur is None:
            per[k] = ResourceStats(1.0, 1.0, 1.0, 1.0, 1.0, source="placeholder")
            notes.append(f"resource {k}: no positive-density offer; placeholder statistics")
            continue
        source = "declared" if k in instance.declared else "realized"
        per[k] = ResourceStats(dens[0], dens[1], dur[0], dur[1], xi, source=source)
    return FluctuationStats(instance.variant, per, realized.undefined, tuple(notes))
