"""Mixture (Choquet) losses and Bregman losses."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonConvex, OutOfRange
from .functionals import _out, active_pieces, elementary_score

_CONVEXITY_TOL = 1e-10


@dataclass(frozen=True)
class MixtureMeasure:
    """Positive measure made of point masses and piecewise-constant densities.

    ``atoms`` is a ``(k, 2)`` array of ``(eta, weight)`` rows and ``segments``
    a ``(m, 3)`` array of ``(lo, hi, density)`` rows with disjoint interiors.
    """

    atoms: np.ndarray
    segments: np.ndarray

    def __init__(self, atoms=(), segments=()):
        atoms = np.asarray(atoms, dtype=float).reshape(-1, 2)
        segments = np.asarray(segments, dtype=float).reshape(-1, 3)
        if not (np.all(np.isfinite(atoms)) and np.all(np.isfinite(segments))):
            raise ValueError("mixture measure entries must be finite")
        if np.any(atoms[:, 1] < 0) or np.any(segments[:, 2] < 0):
            raise ValueError("mixture weights and densities must be non-negative")
        if np.any(segments[:, 0] >= segments[:, 1]):
            raise ValueError("segments need lo < hi")
        order = np.argsort(segments[:, 0], kind="stable")
        segments = segments[order]
        if np.any(segments[1:, 0] < segments[:-1, 1]):
            raise ValueError("segments must have pairwise disjoint interiors")
        atoms.setflags(write=False)
        segments.setflags(write=False)
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "segments", segments)

    @classmethod
    def lebesgue(cls, lo, hi, density=1.0):
        return cls(segments=[(lo, hi, density)])

    @classmethod
    def point(cls, eta, weight=1.0):
        return cls(atoms=[(eta, weight)])

    @classmethod
    def window(cls, eta, half_width):
        """Uniform probability density on [eta - w, eta + w]."""
        return cls(segments=[(eta - half_width, eta + half_width, 0.5 / half_width)])

    @classmethod
    def from_json(cls, obj):
        return cls(obj.get("atoms", ()), obj.get("segments", ()))

    def to_json(self):
        return {"atoms": self.atoms.tolist(), "segments": self.segments.tolist()}

    def scaled(self, c):
        a = self.atoms.copy()
        s = self.segments.copy()
        a[:, 1] *= c
        s[:, 2] *= c
        return MixtureMeasure(a, s)

    def __add__(self, other):
        # overlapping segments are split on the union of breakpoints
        edges = np.unique(np.concatenate([self.segments[:, :2].ravel(), other.segments[:, :2].ravel()]))
        segs = []
        for lo, hi in zip(edges[:-1], edges[1:]):
            mid = 0.5 * (lo + hi)
            d = self.density(mid) + other.density(mid)
            if d > 0:
                segs.append((lo, hi, d))
        return MixtureMeasure(np.vstack([self.atoms, other.atoms]), segs)

    def density(self, eta):
        eta = np.asarray(eta, dtype=float)
        seg = self.segments
        if not len(seg):
            return _out(np.zeros_like(eta))
        k = np.searchsorted(seg[:, 0], eta, side="right") - 1
        kc = np.clip(k, 0, len(seg) - 1)
        inside = (k >= 0) & (eta < seg[kc, 1])
        return _out(np.where(inside, seg[kc, 2], 0.0))

    @property
    def support(self):
        """Smallest closed interval holding every atom and segment."""
        pts = np.concatenate([self.atoms[:, 0], self.segments[:, 0], self.segments[:, 1]])
        if pts.size == 0:
            raise ValueError("the zero measure has no support")
        return float(pts.min()), float(pts.max())

    @property
    def total_mass(self):
        s = self.segments
        return float(self.atoms[:, 1].sum() + ((s[:, 1] - s[:, 0]) * s[:, 2]).sum())


def mixture_loss(spec, H, z, y):
    """L_H(z, y) = integral of S_eta(z, y) dH(eta).

    The elementary score is affine in eta on (min(z, y), max(z, y)] for every
    built-in functional and zero elsewhere, so each segment integral is exact.
    """
    z = np.asarray(z, dtype=float)
    y = np.asarray(y, dtype=float)
    if z.shape != y.shape:
        z, y = np.broadcast_arrays(z, y)
    total = np.zeros(z.shape)
    for eta, w in H.atoms:
        if w:
            total = total + w * np.asarray(elementary_score(spec, eta, z, y))
    if len(H.segments):
        zf = z.ravel()
        yf = y.ravel()
        # only pairs whose active interval meets the support contribute
        idx = np.flatnonzero((np.minimum(zf, yf) < H.segments[-1, 1]) & (np.maximum(zf, yf) > H.segments[0, 0]))
        if idx.size:
            p = active_pieces(spec, zf[idx], yf[idx])
            acc = np.zeros(idx.size)
            for lo, hi, d in H.segments:
                a = np.maximum(p.lo, lo)
                b = np.minimum(p.hi, hi)
                width = np.maximum(b - a, 0.0)
                acc += d * width * (p.intercept + p.slope * 0.5 * (a + b))
            total = total.ravel()
            total[idx] += acc
            total = total.reshape(z.shape)
    return _out(total)


def mixture_risk(spec, H, z, y):
    """Mean of ``mixture_loss`` over paired arrays, without the per-pair vector."""
    z = np.asarray(z, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if z.size != y.size:
        raise ValueError("z and y must have the same length")
    if not len(H.segments):
        return float(np.mean(mixture_loss(spec, H, z, y)))
    total = 0.0
    for eta, w in H.atoms:
        if w:
            total += w * float(np.sum(elementary_score(spec, eta, z, y)))
    sel = (np.minimum(z, y) < H.segments[-1, 1]) & (np.maximum(z, y) > H.segments[0, 0])
    p = active_pieces(spec, z[sel], y[sel])
    for lo, hi, d in H.segments:
        a = np.maximum(p.lo, lo)
        b = np.minimum(p.hi, hi)
        width = np.maximum(b - a, 0.0)
        total += d * float(np.dot(width, p.intercept + p.slope * 0.5 * (a + b)))
    return total / z.size


@dataclass(frozen=True)
class BregmanGenerator:
    """Convex generator phi: ``square``, ``quartic`` or ``tabulated``."""

    kind: str
    grid: np.ndarray | None = None
    values: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in ("square", "quartic", "tabulated"):
            raise ValueError(f"unknown generator {self.kind!r}")
        if self.kind == "tabulated":
            t = np.asarray(self.grid, dtype=float)
            v = np.asarray(self.values, dtype=float)
            if t.ndim != 1 or t.shape != v.shape or t.size < 3 or np.any(np.diff(t) <= 0):
                raise ValueError("tabulated generator needs >= 3 strictly increasing nodes")
            slopes = np.diff(v) / np.diff(t)
            if np.any(np.diff(slopes) < -_CONVEXITY_TOL):
                raise NonConvex("tabulated values are not convex")
            object.__setattr__(self, "grid", t)
            object.__setattr__(self, "values", v)

    @classmethod
    def square(cls):
        return cls("square")

    @classmethod
    def quartic(cls):
        return cls("quartic")

    @classmethod
    def tabulated(cls, grid, values):
        return cls("tabulated", grid, values)

    def _check(self, t):
        if self.kind == "tabulated":
            t = np.asarray(t, dtype=float)
            if np.any(t < self.grid[0]) or np.any(t > self.grid[-1]):
                raise OutOfRange(f"argument outside tabulation range [{self.grid[0]}, {self.grid[-1]}]")

    def phi(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "square":
            return t * t
        if self.kind == "quartic":
            return t**4
        self._check(t)
        return np.interp(t, self.grid, self.values)

    def dphi(self, t):
        """Subgradient; the left slope for tabulated generators."""
        t = np.asarray(t, dtype=float)
        if self.kind == "square":
            return 2.0 * t
        if self.kind == "quartic":
            return 4.0 * t**3
        self._check(t)
        slopes = np.diff(self.values) / np.diff(self.grid)
        k = np.clip(np.searchsorted(self.grid, t, side="left") - 1, 0, slopes.size - 1)
        return slopes[k]


def bregman_loss(phi, z, y):
    """phi(y) - phi(z) - phi'(z)(y - z), with (prediction, observation) order."""
    z = np.asarray(z, dtype=float)
    y = np.asarray(y, dtype=float)
    return _out(phi.phi(y) - phi.phi(z) - phi.dphi(z) * (y - z))


def mixture_from_generator(phi, window, resolution):
    """Piecewise-constant density approximating dH = phi'' d(eta) on a window.

    Cells are centred on the nodes ``lo + k h``; each carries the central
    second difference of phi at its node.
    """
    lo, hi = map(float, window)
    if not lo < hi or resolution < 2:
        raise ValueError("need lo < hi and resolution >= 2")
    h = (hi - lo) / resolution
    nodes = lo + h * np.arange(resolution + 1)
    if phi.kind == "tabulated":
        if lo < phi.grid[0] or hi > phi.grid[-1]:
            raise OutOfRange("window exceeds tabulation range")
        vals = phi.phi(nodes)
        # one-sided at the edges: reuse the neighbouring interior difference
        second = np.empty(resolution + 1)
        second[1:-1] = (vals[2:] - 2 * vals[1:-1] + vals[:-2]) / h**2
        second[0], second[-1] = second[1], second[-2]
    elif phi.kind == "square":
        second = np.full(resolution + 1, 2.0)
    else:
        ext = lo + h * np.arange(-1, resolution + 2)
        vals = phi.phi(ext)
        second = (vals[2:] - 2 * vals[1:-1] + vals[:-2]) / h**2
    if np.any(second < -_CONVEXITY_TOL):
        raise NonConvex("generator has negative second differences on the window")
    second = np.clip(second, 0.0, None)
    edges = np.concatenate([[lo], nodes[:-1] + 0.5 * h, [hi]])
    return MixtureMeasure(segments=np.column_stack([edges[:-1], edges[1:], second]))
