"""Estimator-style wrappers so the allocators compose with scikit-learn tooling.

``fit`` streams the instance's requests through the online algorithm;
the fitted attributes end with an underscore as usual.
"""
from __future__ import annotations

from collections.abc import Mapping
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .basic import MODES, run
from .batch import run_lb
from .errors import VariantMismatchError
from .instance import Instance, load_instance
from .multidim import run_md
from .oracle import greedy_assignment


def check_instance(X, variant: str | None = None) -> Instance:
    """Coerce ``X`` (Instance, JSON-like mapping or path) to an :class:`Instance`."""
    if isinstance(X, Instance):
        instance = X
    elif isinstance(X, Mapping):
        instance = Instance.from_dict(X)
    elif isinstance(X, (str, Path)):
        instance = load_instance(X)
    else:
        raise TypeError(f"expected an Instance, a mapping or a path, got {type(X).__name__}")
    if variant is not None and instance.variant != variant:
        raise VariantMismatchError(f"expected a {variant!r} instance, got {instance.variant!r}")
    return instance


def check_mode(mode: str) -> str:
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    return mode


class _OnlineAllocator(BaseEstimator):
    _variant: str = ""

    def __init__(self, mode: str = "strict"):
        self.mode = mode

    def _run(self, instance, mode):
        raise NotImplementedError

    def fit(self, X, y=None):
        instance = check_instance(X, self._variant)
        trace = self._run(instance, check_mode(self.mode))
        self.trace_ = trace
        self.labels_ = np.asarray(trace.labels(), dtype=int)
        self.utilities_ = dict(trace.utilities)
        self.gammas_ = np.asarray(trace.gammas)
        self.primal_objective_ = trace.P
        self.dual_objective_ = trace.dual_objective()
        return self

    def fit_predict(self, X, y=None):
        """Assigned resource per request (arrival order), ``-1`` for rejections."""
        return self.fit(X).labels_

    def score(self, X, y=None) -> float:
        """Total reward collected on ``X``."""
        return self._run(check_instance(X, self._variant), check_mode(self.mode)).P

    def certificate_ratio(self) -> float:
        """``D / P`` of the fitted run, an upper bound on its competitive ratio."""
        check_is_fitted(self, "trace_")
        if self.primal_objective_ <= 0:
            return 1.0
        return self.dual_objective_ / self.primal_objective_


class PrimalDualAllocator(_OnlineAllocator):
    _variant = "basic"

    def _run(self, instance, mode):
        return run(instance, mode)


class LoadBalancedAllocator(_OnlineAllocator):
    _variant = "lb"

    def _run(self, instance, mode):
        return run_lb(instance, mode)


class MultiDimAllocator(_OnlineAllocator):
    _variant = "md"

    def _run(self, instance, mode):
        return run_md(instance, mode)


class GreedyAllocator(BaseEstimator):
    """Highest reward that still fits; no pricing.  Any variant."""

    def fit(self, X, y=None):
        instance = check_instance(X)
        sol = greedy_assignment(instance)
        self.labels_ = np.asarray([sol.assignment.get(r.id, -1) for r in instance.requests], dtype=int)
        self.primal_objective_ = sol.value
        return self

    def fit_predict(self, X, y=None):
        return self.fit(X).labels_

    def score(self, X, y=None) -> float:
        return greedy_assignment(check_instance(X)).value
