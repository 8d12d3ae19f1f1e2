"""Parametric prediction maps m(x; beta) and the intercept-shift map."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Protocol, runtime_checkable

import numpy as np

from .errors import DimensionMismatch, Unsupported


@runtime_checkable
class Predictor(Protocol):
    """Anything that maps a parameter vector and a covariate matrix to predictions.

    User families only need ``n_params``, ``param_names``, ``bounds`` and
    ``predict``; the optimisation and Pareto code never look further.
    """

    n_params: int

    def predict(self, beta, x): ...


@dataclass(frozen=True)
class ModelFamily:
    """Built-in families: ``constant`` and ``linear`` with or without intercept.

    ``bounds`` holds one ``(lo, hi)`` pair per parameter; ``None`` means
    unbounded. Bounds are open, as in Theta = R x (0, inf).
    """

    kind: str
    dim: int = 1
    intercept: bool = True
    bounds: tuple | None = None
    shift_radius: float = math.inf
    names: tuple = field(init=False, repr=False)

    def __post_init__(self):
        if self.kind not in ("constant", "linear"):
            raise ValueError(f"unknown model family {self.kind!r}")
        if self.kind == "constant":
            object.__setattr__(self, "dim", 0)
            object.__setattr__(self, "intercept", True)
        elif self.dim < 1:
            raise ValueError("linear families need dim >= 1")
        names = (("beta0",) if self.intercept else ()) + tuple(f"beta{j}" for j in range(1, self.dim + 1))
        object.__setattr__(self, "names", names)
        if self.bounds is not None:
            b = tuple(
                (None if lo is None else float(lo), None if hi is None else float(hi)) for lo, hi in self.bounds
            )
            if len(b) != len(names):
                raise DimensionMismatch(f"expected {len(names)} bound pairs, got {len(b)}")
            for lo, hi in b:
                if lo is not None and hi is not None and not lo < hi:
                    raise ValueError("bounds must describe a non-empty open box")
            object.__setattr__(self, "bounds", b)

    @classmethod
    def constant(cls, **kw):
        return cls("constant", **kw)

    @classmethod
    def linear(cls, dim=1, intercept=True, **kw):
        return cls("linear", dim=dim, intercept=intercept, **kw)

    @classmethod
    def from_json(cls, obj):
        family = obj.get("family", "linear")
        if family == "constant":
            return cls.constant(bounds=obj.get("bounds"))
        return cls.linear(dim=int(obj.get("dim", 1)), intercept=bool(obj.get("intercept", True)), bounds=obj.get("bounds"))

    def to_json(self):
        out = {"family": self.kind}
        if self.kind == "linear":
            out.update(intercept=self.intercept, dim=self.dim)
        out["bounds"] = None if self.bounds is None else [list(b) for b in self.bounds]
        return out

    @property
    def n_params(self):
        return len(self.names)

    @property
    def param_names(self):
        return self.names

    def check_params(self, beta):
        beta = np.asarray(beta, dtype=float).ravel()
        if beta.size != self.n_params:
            raise DimensionMismatch(f"{self.kind} family takes {self.n_params} parameters, got {beta.size}")
        if not np.all(np.isfinite(beta)):
            raise ValueError("parameters must be finite")
        return beta

    def inside(self, beta):
        if self.bounds is None:
            return True
        for v, (lo, hi) in zip(np.asarray(beta, dtype=float).ravel(), self.bounds):
            if (lo is not None and v <= lo) or (hi is not None and v >= hi):
                return False
        return True

    def predict(self, beta, x):
        """Predictions for one covariate vector (scalar out) or an ``n x d`` matrix."""
        beta = self.check_params(beta)
        if self.kind == "constant":
            x = np.asarray(x, dtype=float)
            if x.ndim == 2:
                return np.full(x.shape[0], beta[0])
            return float(beta[0])
        x = np.asarray(x, dtype=float)
        single = x.ndim <= 1
        xm = x.reshape(1, -1) if single else x
        if xm.shape[1] != self.dim:
            raise DimensionMismatch(f"model expects {self.dim} covariates, got {xm.shape[1]}")
        slopes = beta[1:] if self.intercept else beta
        out = xm @ slopes
        if self.intercept:
            out = out + beta[0]
        return float(out[0]) if single else out


def supports_shift(family):
    return getattr(family, "intercept", False) and getattr(family, "kind", None) in ("constant", "linear")


def shift(family, beta, a):
    """Parameter beta' with m(., beta') = m(., beta) + a.

    Raises Unsupported when the family has no intercept, |a| exceeds the
    declared shift radius, or the shifted intercept leaves the bounds.
    """
    beta = family.check_params(beta)
    if not supports_shift(family):
        raise Unsupported(f"{family.kind} family without intercept cannot absorb a shift")
    if abs(a) >= family.shift_radius:
        raise Unsupported(f"shift {a} exceeds radius {family.shift_radius}")
    out = beta.copy()
    out[0] = out[0] + a
    if not family.inside(out):
        raise Unsupported("shifted parameter leaves the parameter space")
    return out
