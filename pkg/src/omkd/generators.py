"""Random and adversarial instance families.

Every instance carries declared density/duration bounds (and ``xi`` for the
multi-dimensional variant) equal to the generator targets, so the pricing
parameters are fixed before the first arrival.  Densities are drawn
log-uniformly inside the declared interval and rewards are back-solved as
``v = density * sum(w * d)``, which keeps every offer inside the bounds by
construction.  In ``"compliant"`` weight mode every weight respects the
precondition of the matching guarantee; ``"violating"`` draws weights between
that cap and the full capacity.

The adversarial family is a design of this package, not a published
construction.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .errors import ConfigError
from .instance import VARIANTS, DeclaredBounds, Instance, Offer, Request, Resource, ResourceStats
from .pricing import gamma_basic, gamma_md, weight_cap

WEIGHT_MODES = ("compliant", "violating")

# one independent stream per kind of draw; new kinds go at the end
_STREAMS = ("resources", "arrivals", "offers", "durations", "densities", "weights")


@dataclass(frozen=True)
class GeneratorConfig:
    seed: int = 0
    variant: str = "basic"
    n_resources: int = 2
    n_requests: int = 10
    horizon: int = 12
    capacity: tuple[float, float] = (10.0, 10.0)
    density_min: float = 1.0
    density_bar: float = 4.0
    d_min: int = 1
    d_bar: float = 3.0
    xi: float = 1.0
    weight_mode: str = "compliant"
    weight_low: float = 0.25
    offer_prob: float = 0.7
    start_slack: int = 2
    batch_size: float = 3.0
    q: tuple[int, int] = (1, 2)
    dims: tuple[int, int] = (1, 3)
    zero_weight_prob: float = 0.2

    @classmethod
    def from_dict(cls, data: Mapping) -> "GeneratorConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known - {"theta_bar", "rho_bar"}
        if unknown:
            raise ConfigError(f"unknown generator fields: {sorted(unknown)}")
        kwargs = {k: v for k, v in data.items() if k in known}
        for alias in ("theta_bar", "rho_bar"):
            if alias in data:
                kwargs["density_bar"] = data[alias]
        for pair in ("capacity", "q", "dims"):
            if pair in kwargs:
                val = kwargs[pair]
                kwargs[pair] = tuple(val) if isinstance(val, (list, tuple)) else (val, val)
        return cls(**kwargs)

    def replace(self, **changes) -> "GeneratorConfig":
        return dataclasses.replace(self, **changes)

    @property
    def d_max(self) -> int:
        return int(math.floor(self.d_min * self.d_bar + 1e-9))

    def check(self) -> None:
        if self.variant not in VARIANTS:
            raise ConfigError(f"unknown variant {self.variant!r}")
        if self.weight_mode not in WEIGHT_MODES:
            raise ConfigError(f"weight_mode must be one of {WEIGHT_MODES}")
        if self.density_bar < 1 or self.d_bar < 1 or self.xi < 1:
            raise ConfigError("target fluctuation ratios must be >= 1")
        if self.density_min <= 0 or self.d_min < 1:
            raise ConfigError("density_min must be positive and d_min >= 1")
        if self.n_resources < 1 or self.n_requests < 0:
            raise ConfigError("need at least one resource and a nonnegative request count")
        if self.horizon < self.d_max:
            raise ConfigError(f"horizon {self.horizon} shorter than d_max {self.d_max}")
        lo, hi = self.capacity
        if not 0 < lo <= hi:
            raise ConfigError(f"capacity range {self.capacity} invalid")
        if not 0 < self.weight_low <= 1:
            raise ConfigError("weight_low must lie in (0, 1]")
        if self.variant == "lb" and not 1 <= self.q[0] <= self.q[1]:
            raise ConfigError(f"q range {self.q} invalid")
        if self.variant == "md" and not 1 <= self.dims[0] <= self.dims[1]:
            raise ConfigError(f"dims range {self.dims} invalid")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be >= 1")


def _streams(seed: int) -> dict[str, np.random.Generator]:
    children = np.random.SeedSequence(int(seed)).spawn(len(_STREAMS))
    return {name: np.random.default_rng(ss) for name, ss in zip(_STREAMS, children)}


def _log_uniform(rng: np.random.Generator, lo: float, hi: float) -> float:
    if lo >= hi:
        return float(hi)
    x = float(math.exp(rng.uniform(math.log(lo), math.log(hi))))
    return min(max(x, lo), hi)


def _declared(cfg: GeneratorConfig) -> DeclaredBounds:
    dens = (cfg.density_min, cfg.density_min * cfg.density_bar)
    dur = (float(cfg.d_min), float(cfg.d_max))
    if cfg.variant == "md":
        return DeclaredBounds(rho=dens, d=dur, xi=cfg.xi)
    return DeclaredBounds(theta=dens, d=dur)


def _gamma(cfg: GeneratorConfig, decl: DeclaredBounds) -> float:
    # same arithmetic path as pricing_stats/gammas_for, so caps agree bit for bit
    lo, hi = decl.density(cfg.variant)
    st = ResourceStats(lo, hi, decl.d[0], decl.d[1], decl.xi or 1.0)
    if cfg.variant == "md":
        return gamma_md(st.density_bar, st.d_bar, st.xi_max)
    return gamma_basic(st.density_bar, st.d_bar)


def _draw_weight(rng, cfg: GeneratorConfig, cap: float, capacity: float) -> float:
    if cfg.weight_mode == "compliant":
        return min(_log_uniform(rng, cap * cfg.weight_low, cap), cap)
    return _log_uniform(rng, cap, capacity)


def generate(config: GeneratorConfig) -> Instance:
    """Random instance for ``config.variant``; deterministic in ``config.seed``."""
    cfg = config
    cfg.check()
    rng = _streams(cfg.seed)
    decl = _declared(cfg)
    gamma = _gamma(cfg, decl)

    resources = []
    for k in range(cfg.n_resources):
        ndim = int(rng["resources"].integers(cfg.dims[0], cfg.dims[1] + 1)) if cfg.variant == "md" else 1
        caps = tuple(float(rng["resources"].uniform(*cfg.capacity)) for _ in range(ndim))
        q = int(rng["resources"].integers(cfg.q[0], cfg.q[1] + 1)) if cfg.variant == "lb" else None
        resources.append(Resource(k, caps, q))

    last_start = cfg.horizon - cfg.d_max
    if cfg.variant == "lb":
        n_batches = max(1, min(last_start + 1, round(cfg.n_requests / cfg.batch_size)))
        times = np.sort(rng["arrivals"].choice(last_start + 1, size=n_batches, replace=False))
        arrivals = sorted(int(times[i]) for i in rng["arrivals"].integers(0, n_batches, size=cfg.n_requests))
    else:
        arrivals = sorted(int(a) for a in rng["arrivals"].integers(0, last_start + 1, size=cfg.n_requests))

    requests = []
    for n, a in enumerate(arrivals):
        ks = [k for k in range(cfg.n_resources) if rng["offers"].random() < cfg.offer_prob]
        if not ks:
            ks = [int(rng["offers"].integers(cfg.n_resources))]
        offers = {}
        for k in ks:
            res = resources[k]
            d = [int(rng["durations"].integers(cfg.d_min, cfg.d_max + 1)) for _ in range(res.ndim)]
            s = [min(a + int(rng["durations"].integers(0, cfg.start_slack + 1)), cfg.horizon - dm) for dm in d]
            density = _log_uniform(rng["densities"], *decl.density(cfg.variant))
            if cfg.variant == "md":
                w = _md_weights(rng["weights"], cfg, res, gamma)
            else:
                cap = weight_cap(res.capacities[0], gamma, res.q if cfg.variant == "lb" else None)
                w = [_draw_weight(rng["weights"], cfg, cap, res.capacities[0])]
            v = density * math.fsum(wm * dm for wm, dm in zip(w, d))
            offers[k] = Offer(v, tuple(w), tuple(s), tuple(d))
        requests.append(Request(n, a, offers))

    return Instance(
        horizon=cfg.horizon,
        resources=tuple(resources),
        requests=tuple(requests),
        variant=cfg.variant,
        declared={k: decl for k in range(cfg.n_resources)},
    )


def _md_weights(rng: np.random.Generator, cfg: GeneratorConfig, res: Resource, gamma: float) -> list[float]:
    """Per-dimension weights whose total fluctuation stays within ``cfg.xi``.

    At most ``floor(xi)`` dimensions are positive; relative sizes lie in
    ``[1, F]`` with ``1 + (n_pos - 1) F = xi``, then the vector is scaled
    under the per-dimension cap.
    """
    ndim = res.ndim
    n_pos_max = max(1, min(ndim, int(math.floor(cfg.xi + 1e-9))))
    positive = [m for m in range(ndim) if rng.random() >= cfg.zero_weight_prob]
    if not positive:
        positive = [int(rng.integers(ndim))]
    if len(positive) > n_pos_max:
        positive = sorted(rng.choice(positive, size=n_pos_max, replace=False).tolist())
    spread = (cfg.xi - 1.0) / (len(positive) - 1) if len(positive) > 1 else 1.0
    rel = {m: 1.0 for m in positive}
    # the first positive dimension keeps relative size 1 so the minimum is exactly 1
    for m in positive[1:]:
        rel[m] = float(rng.uniform(1.0, max(1.0, spread)))
    caps = [weight_cap(c, gamma) for c in res.capacities]
    if cfg.weight_mode == "compliant":
        b_max = min(caps[m] / rel[m] for m in positive)
        base = min(_log_uniform(rng, b_max * cfg.weight_low, b_max), b_max)
    else:
        b_lo = max(caps[m] / rel[m] for m in positive)
        b_hi = min(res.capacities[m] / rel[m] for m in positive)
        base = _log_uniform(rng, min(b_lo, b_hi), b_hi)
    w = [0.0] * ndim
    for m in positive:
        w[m] = base * rel[m]
        if cfg.weight_mode == "compliant":
            w[m] = min(w[m], caps[m])
    return w


def adversarial_density_ramp(config: GeneratorConfig) -> Instance:
    """Long low-density requests first, then short high-density ones.

    All requests overlap the slot ``t0 = d_max - 1``.  The first half (rounded
    up) have density ``density_min`` and duration ``d_max``; the rest have
    density ``density_min * density_bar`` and duration ``d_min``.  Weights sit
    exactly at the precondition cap (or at capacity in violating mode), so
    the realized fluctuations equal the targets whenever both halves exist.
    """
    cfg = config.replace(variant="basic")
    cfg.check()
    decl = _declared(cfg)
    gamma = _gamma(cfg, decl)
    C = float(cfg.capacity[1])
    w = weight_cap(C, gamma) if cfg.weight_mode == "compliant" else C
    lo, hi = decl.theta
    d_max, d_min = cfg.d_max, cfg.d_min
    t0 = d_max - 1
    horizon = max(cfg.horizon, d_max)
    n_low = (cfg.n_requests + 1) // 2
    requests = []
    for n in range(cfg.n_requests):
        if n < n_low:
            density, s, d = lo, 0, d_max
        else:
            density, s, d = hi, t0 - d_min + 1, d_min
        offer = Offer(density * w * d, (w,), (s,), (d,))
        requests.append(Request(n, s, {0: offer}))
    return Instance(
        horizon=horizon,
        resources=(Resource(0, (C,)),),
        requests=tuple(requests),
        variant="basic",
        declared={0: decl},
    )
