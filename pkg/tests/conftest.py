import itertools
import math

import numpy as np
import pytest

from omkd import DeclaredBounds, GeneratorConfig, Instance, Offer, Request, Resource, generate

_ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance_log():
    return _ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def single(v, w, s, d):
    return Offer(v, (w,), (s,), (d,))


def make_basic(horizon, capacities, requests, theta=None, d=None, variant="basic", q=None):
    """requests: list of (arrival, {k: (v, w, s, d)})."""
    resources = tuple(
        Resource(k, (c,), None if q is None else q[k]) for k, c in enumerate(capacities)
    )
    reqs = tuple(
        Request(n, a, {k: single(*o) for k, o in offers.items()})
        for n, (a, offers) in enumerate(requests)
    )
    declared = {}
    if theta is not None or d is not None:
        declared = {k: DeclaredBounds(theta=theta, d=d) for k in range(len(capacities))}
    return Instance(horizon, resources, reqs, variant, declared)


def brute_force_bmatching(r, q):
    """Best value over every 0/1 assignment respecting the row/column caps (no LP)."""
    n_req, n_res = len(r), len(q)
    best, best_x = 0.0, [[0] * n_res for _ in range(n_req)]
    for combo in itertools.product(range(-1, n_res), repeat=n_req):
        counts = [0] * n_res
        value = 0.0
        ok = True
        for n, k in enumerate(combo):
            if k < 0:
                continue
            if r[n][k] is None or r[n][k] <= 0:
                ok = False
                break
            counts[k] += 1
            value += r[n][k]
        if ok and all(c <= qk for c, qk in zip(counts, q)) and value > best + 1e-12:
            best = value
            best_x = [[int(combo[n] == k) for k in range(n_res)] for n in range(n_req)]
    return best, best_x


def brute_force_optimum(instance):
    """Enumerate all choices per request and check the IP constraints directly."""
    reqs = list(instance.requests)
    best = 0.0
    for combo in itertools.product(*[[None, *r.offers] for r in reqs]):
        load = {}
        per_batch = {}
        value = 0.0
        for req, k in zip(reqs, combo):
            if k is None:
                continue
            o = req.offers[k]
            value += o.v
            per_batch[(k, req.arrival)] = per_batch.get((k, req.arrival), 0) + 1
            for m in range(o.ndim):
                for t in o.slots(m):
                    load[(k, m, t)] = load.get((k, m, t), 0.0) + o.w[m]
        feasible = all(
            load[key] <= instance.resources[key[0]].capacities[key[1]] * (1 + 1e-9) for key in load
        )
        if instance.variant == "lb":
            feasible = feasible and all(
                c <= instance.resources[k].q for (k, _), c in per_batch.items()
            )
        if feasible:
            best = max(best, value)
    return best


def random_config(seed: int, variant: str, **overrides) -> GeneratorConfig:
    """A generator config whose shape parameters also vary with the seed."""
    rng = np.random.default_rng([seed, 7919])
    d_min = int(rng.integers(1, 3))
    d_bar = float(rng.choice([1.0, 1.5, 2.0, 3.0]))
    d_max = int(math.floor(d_min * d_bar + 1e-9))
    cfg = dict(
        seed=seed,
        variant=variant,
        n_resources=int(rng.integers(1, 4)),
        n_requests=int(rng.integers(5, 30)),
        horizon=d_max + int(rng.integers(0, 6)),
        capacity=(float(rng.uniform(1, 5)), float(rng.uniform(5, 20))),
        density_min=float(rng.uniform(0.5, 2.0)),
        density_bar=float(rng.choice([1.0, 2.0, 4.0, 16.0])),
        d_min=d_min,
        d_bar=d_bar,
        xi=float(rng.choice([1.0, 2.0, 3.5])),
        weight_low=float(rng.choice([0.1, 0.5, 1.0])),
        offer_prob=float(rng.uniform(0.4, 1.0)),
        start_slack=int(rng.integers(0, 3)),
        batch_size=float(rng.choice([1.0, 3.0, 6.0])),
        q=(1, int(rng.integers(1, 4))),
        dims=(1, int(rng.integers(1, 4))),
    )
    cfg.update(overrides)
    return GeneratorConfig(**cfg)


def random_instance(seed, variant, **overrides):
    return generate(random_config(seed, variant, **overrides))


def distinct_arrival_instance(seed, variant="basic", q=None):
    """Basic-shaped instance where every request arrives in its own slot."""
    rng = np.random.default_rng([seed, 104729])
    n_res = int(rng.integers(1, 4))
    n_req = int(rng.integers(1, 25))
    horizon = n_req + 4
    caps = [float(rng.uniform(2, 10)) for _ in range(n_res)]
    theta = (1.0, 8.0)
    gamma = 2 * math.log(2 + 4 * 8.0 * 3.0)
    requests = []
    for n in range(n_req):
        offers = {}
        for k in range(n_res):
            if rng.random() < 0.7 or (k == n_res - 1 and not offers):
                d = int(rng.integers(1, 4))
                s = min(n + int(rng.integers(0, 2)), horizon - d)
                w = float(rng.uniform(0.2, 1.0)) * caps[k] * math.log(2) / gamma
                dens = float(np.exp(rng.uniform(0, math.log(8.0))))
                offers[k] = (dens * w * d, w, s, d)
        requests.append((n, offers))
    return make_basic(horizon, caps, requests, theta=theta, d=(1.0, 3.0), variant=variant, q=q)
