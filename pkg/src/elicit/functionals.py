"""Identification functions, induced functionals and elementary scores.

All functions accept scalars or numpy arrays and broadcast. Scalar inputs give
Python floats back.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateInterval

KINDS = ("mean", "quantile", "expectile", "moment2")

_BISECT_TOL = 1e-10


def _out(value):
    value = np.asarray(value, dtype=float)
    return float(value) if value.ndim == 0 else value


@dataclass(frozen=True)
class FunctionalSpec:
    """Which functional is modelled.

    ``level`` is the quantile level alpha or the expectile level tau and is
    ``None`` for the mean and the second moment.
    """

    kind: str
    level: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown functional kind {self.kind!r}; expected one of {KINDS}")
        if self.kind in ("quantile", "expectile"):
            if self.level is None or not 0.0 < float(self.level) < 1.0:
                raise ValueError(f"{self.kind} level must lie strictly inside (0, 1), got {self.level!r}")
            object.__setattr__(self, "level", float(self.level))
        elif self.level is not None:
            raise ValueError(f"{self.kind} takes no level")

    @classmethod
    def mean(cls):
        return cls("mean")

    @classmethod
    def second_moment(cls):
        return cls("moment2")

    @classmethod
    def quantile(cls, alpha):
        return cls("quantile", alpha)

    @classmethod
    def expectile(cls, tau):
        return cls("expectile", tau)

    @classmethod
    def parse(cls, text):
        """Parse ``mean``, ``moment2``, ``quantile:0.9`` or ``expectile:0.25``."""
        name, _, level = text.strip().lower().partition(":")
        aliases = {"second_moment": "moment2", "secondmoment": "moment2"}
        name = aliases.get(name, name)
        if name in ("quantile", "expectile"):
            if not level:
                raise ValueError(f"{name} needs a level, e.g. {name}:0.5")
            return cls(name, float(level))
        if level:
            raise ValueError(f"{name} takes no level")
        return cls(name)

    def __str__(self):
        return self.kind if self.level is None else f"{self.kind}:{self.level:g}"


@dataclass(frozen=True)
class DiscreteDistribution:
    """Finitely supported distribution; duplicate atoms are merged."""

    values: np.ndarray
    probs: np.ndarray

    def __init__(self, values, probs):
        values = np.asarray(values, dtype=float).ravel()
        probs = np.asarray(probs, dtype=float).ravel()
        if values.shape != probs.shape or values.size == 0:
            raise ValueError("values and probs must be non-empty and of equal length")
        if not np.all(np.isfinite(values)):
            raise ValueError("atom values must be finite")
        if np.any(probs < 0) or abs(probs.sum() - 1.0) > 1e-12:
            raise ValueError("probabilities must be non-negative and sum to one")
        uniq, inverse = np.unique(values, return_inverse=True)
        merged = np.zeros(uniq.size)
        np.add.at(merged, inverse, probs)
        uniq.setflags(write=False)
        merged.setflags(write=False)
        object.__setattr__(self, "values", uniq)
        object.__setattr__(self, "probs", merged)

    @classmethod
    def from_dict(cls, atoms):
        return cls(list(atoms.keys()), list(atoms.values()))


@dataclass(frozen=True)
class FunctionalInterval:
    lower: float
    upper: float

    def __post_init__(self):
        if self.lower > self.upper:
            raise ValueError("lower endpoint exceeds upper endpoint")

    def __contains__(self, t):
        return self.lower <= t <= self.upper


def identification_value(spec, z, y):
    """V(z, y), non-decreasing and left-continuous in z."""
    z = np.asarray(z, dtype=float)
    y = np.asarray(y, dtype=float)
    if spec.kind == "mean":
        v = z - y
    elif spec.kind == "moment2":
        v = z - y * y
    elif spec.kind == "quantile":
        v = (y < z).astype(float) - spec.level
    else:
        # weight (1 - tau) below z, tau above: the tau-expectile grows with tau
        v = 2.0 * np.abs((y < z).astype(float) - spec.level) * (z - y)
    return _out(v)


def identification_value_right(spec, z, y):
    """Right limit V(z+, y); differs from V(z, y) only for quantiles at y = z."""
    if spec.kind == "quantile":
        z = np.asarray(z, dtype=float)
        y = np.asarray(y, dtype=float)
        return _out((y <= z).astype(float) - spec.level)
    return identification_value(spec, z, y)


def mean_identification_bar(spec, z, dist):
    """Expected identification value sum_i p_i V(z, y_i)."""
    z = np.asarray(z, dtype=float)
    v = identification_value(spec, z[..., None], dist.values)
    return _out(np.asarray(v) @ dist.probs)


def _bisect_boundary(pred, lo, hi):
    # pred is monotone: True on (-inf, t), False on (t, inf); returns t
    while hi - lo > _BISECT_TOL * max(1.0, abs(lo), abs(hi)):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if pred(mid):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _bracket(pred, lo, hi, max_doublings=200):
    width = hi - lo
    for _ in range(max_doublings):
        if pred(lo) and not pred(hi):
            return lo, hi
        if not pred(lo):
            lo -= width
        if pred(hi):
            hi += width
        width *= 2.0
    raise DegenerateInterval("identification sign condition not met on any finite bracket")


def _snap(t, dist, spec):
    if spec.kind == "quantile":
        # piecewise constant mean identification: endpoints sit on atoms
        return float(dist.values[np.argmin(np.abs(dist.values - t))])
    if spec.kind == "expectile":
        # piecewise linear between atoms: finish with an exact linear solve
        pts = dist.values
        k = np.searchsorted(pts, t)
        left = pts[k - 1] if k > 0 else pts[0] - 1.0
        right = pts[k] if k < pts.size else pts[-1] + 1.0
        if left < t <= right and right > left:
            vl = mean_identification_bar(spec, left, dist)
            vr = mean_identification_bar(spec, right, dist)
            if vr != vl and vl <= 0.0 <= vr:
                return float(left - vl * (right - left) / (vr - vl))
    return float(t)


def functional_interval(spec, dist):
    """The induced functional [T_P^-, T_P^+] of a discrete distribution.

    Mean and second moment have closed forms; quantiles and expectiles are
    bracketed and bisected, then snapped to the exact breakpoint structure.
    """
    if spec.kind == "mean":
        m = float(dist.values @ dist.probs)
        return FunctionalInterval(m, m)
    if spec.kind == "moment2":
        m = float((dist.values**2) @ dist.probs)
        return FunctionalInterval(m, m)

    lo0, hi0 = float(dist.values[0]) - 1.0, float(dist.values[-1]) + 1.0

    def negative(z):
        return mean_identification_bar(spec, z, dist) < 0.0

    def not_positive(z):
        return mean_identification_bar(spec, z, dist) <= 0.0

    lower = _snap(_bisect_boundary(negative, *_bracket(negative, lo0, hi0)), dist, spec)
    upper = _snap(_bisect_boundary(not_positive, *_bracket(not_positive, lo0, hi0)), dist, spec)
    if math.isclose(lower, upper, rel_tol=0.0, abs_tol=_BISECT_TOL) and spec.kind == "expectile":
        upper = lower
    return FunctionalInterval(lower, upper)


def elementary_score(spec, eta, z, y):
    """S_eta(z, y) = (1{eta <= z} - 1{eta <= y}) V(eta, y)."""
    eta = np.asarray(eta, dtype=float)
    z = np.asarray(z, dtype=float)
    y = np.asarray(y, dtype=float)
    ind = (eta <= z).astype(float) - (eta <= y).astype(float)
    return _out(ind * np.asarray(identification_value(spec, eta, y)))


@dataclass(frozen=True)
class ActivePieces:
    """Per-pair affine form of the elementary score.

    For every pair, S_eta(z, y) = intercept + slope * eta when
    lo < eta <= hi and 0 otherwise.
    """

    lo: np.ndarray
    hi: np.ndarray
    intercept: np.ndarray
    slope: np.ndarray = field(repr=False)


def active_pieces(spec, z, y):
    z = np.asarray(z, dtype=float)
    y = np.asarray(y, dtype=float)
    if z.shape != y.shape:
        z, y = np.broadcast_arrays(z, y)
    over = z > y
    sign = over.astype(float) - (z < y)
    lo = np.minimum(z, y)
    hi = np.maximum(z, y)
    if spec.kind == "quantile":
        # V is constant on the active interval: 1 - alpha above y, -alpha below
        const = over - spec.level
        return ActivePieces(lo, hi, sign * const, np.zeros_like(lo))
    if spec.kind == "expectile":
        slope = sign * np.where(over, 2.0 * (1.0 - spec.level), 2.0 * spec.level)
    else:
        slope = sign
    centre = y * y if spec.kind == "moment2" else y
    return ActivePieces(lo, hi, -slope * centre, slope)
