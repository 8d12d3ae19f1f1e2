"""Dominance between parameters via Murphy curves, Pareto filtering and eta scans."""

from __future__ import annotations

import enum
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .empirics import FitResult, fit_elementary, murphy_curve
from .errors import FingerprintMismatch


class Relation(str, enum.Enum):
    STRICTLY_DOMINATES = "StrictlyDominates"
    DOMINATES = "Dominates"
    INCOMPARABLE = "Incomparable"
    DOMINATED_BY = "DominatedBy"
    STRICTLY_DOMINATED_BY = "StrictlyDominatedBy"
    EQUAL = "Equal"


@dataclass(frozen=True)
class DominanceVerdict:
    relation: Relation
    witness_eta: float | None
    margin: float

    @property
    def weakly_dominates(self):
        return self.relation in (Relation.STRICTLY_DOMINATES, Relation.DOMINATES, Relation.EQUAL)


def _check_fingerprints(curves):
    prints = {c.fingerprint for c in curves}
    if len(prints) > 1:
        raise FingerprintMismatch(f"curves come from different data or functionals: {sorted(prints)}")


def comparison_points(curves):
    return np.unique(np.concatenate([c.knots for c in curves]))


def _profile(curve, points):
    left, right = curve.evaluate(points)
    return np.concatenate([left, right])


def _verdict(diff, points, tol):
    """Classify A against B from diff = A - B (lower loss is better)."""
    m = points.size
    hi = int(np.argmax(diff))
    lo = int(np.argmin(diff))
    worse = diff[hi] > tol
    better = diff[lo] < -tol
    if not worse and not better:
        return DominanceVerdict(Relation.EQUAL, None, float(np.max(np.abs(diff))))
    if better and not worse:
        return DominanceVerdict(Relation.STRICTLY_DOMINATES, float(points[lo % m]), float(-diff[lo]))
    if worse and not better:
        return DominanceVerdict(Relation.STRICTLY_DOMINATED_BY, float(points[hi % m]), float(diff[hi]))
    return DominanceVerdict(Relation.INCOMPARABLE, float(points[hi % m]), float(min(diff[hi], -diff[lo])))


def dominates(curve_a, curve_b, tol=0.0):
    """Compare two Murphy curves on the union of their knots.

    Both the values and the right limits are compared; the curves are affine
    between knots, so this decides the relation for every eta. A symmetric
    tolerance leaves no room for the weak, non-strict, non-equal relations;
    ``Dominates`` and ``DominatedBy`` are kept for callers that build
    verdicts themselves.
    """
    _check_fingerprints([curve_a, curve_b])
    pts = comparison_points([curve_a, curve_b])
    diff = _profile(curve_a, pts) - _profile(curve_b, pts)
    return _verdict(diff, pts, tol)


@dataclass(frozen=True)
class ParetoEntry:
    beta: np.ndarray
    curve: object
    optimal: bool
    dominator: int | None = None

    @property
    def status(self):
        return "Optimal" if self.optimal else f"Dominated({self.dominator})"


@dataclass(frozen=True)
class ParetoSet:
    entries: tuple
    tolerance: float

    @property
    def optimal(self):
        return [e for e in self.entries if e.optimal]

    def rows(self):
        for e in self.entries:
            yield [float(b) for b in e.beta], "Optimal" if e.optimal else "Dominated", e.dominator


def half_split_tolerance(curves, points=None):
    """Twice a Monte Carlo standard error from an even/odd split of the sample.

    For each curve the two half-sample curves are compared on the comparison
    points; half their RMS gap estimates the standard error of the full curve.
    The largest estimate over all curves is doubled.
    """
    pts = comparison_points(curves) if points is None else points
    worst = 0.0
    for c in curves:
        halves = [
            murphy_curve(c.spec, c.predictions[k::2], c.observations[k::2], refinement=0) for k in (0, 1)
        ]
        if halves[1].n == 0:
            continue
        gap = _profile(halves[0], pts) - _profile(halves[1], pts)
        worst = max(worst, 0.5 * float(np.sqrt(np.mean(gap**2))))
    return 2.0 * worst


def pareto_filter(candidates, tol=None):
    """Mark every candidate strictly tol-dominated by another as Dominated.

    ``candidates`` is a sequence of ``(beta, curve)`` pairs sharing one
    fingerprint. The dominator recorded is the first strict dominator in
    input order.
    """
    candidates = list(candidates)
    if not candidates:
        raise ValueError("pareto_filter needs at least one candidate")
    curves = [c for _, c in candidates]
    _check_fingerprints(curves)
    pts = comparison_points(curves)
    if tol is None:
        tol = half_split_tolerance(curves, pts)
    prof = np.array([_profile(c, pts) for c in curves])
    entries = []
    for i, (beta, curve) in enumerate(candidates):
        # j strictly dominates i: never worse by more than tol, better somewhere by more than tol
        d = prof - prof[i]
        strict = (d.max(axis=1) <= tol) & (d.min(axis=1) < -tol)
        strict[i] = False
        hits = np.flatnonzero(strict)
        dom = int(hits[0]) if hits.size else None
        entries.append(ParetoEntry(np.asarray(beta, dtype=float), curve, dom is None, dom))
    return ParetoSet(tuple(entries), float(tol))


def _threads():
    try:
        return max(1, int(os.environ.get("ELICIT_THREADS", "1")))
    except ValueError:
        return 1


def _failed(eta, family, exc):
    return FitResult(
        beta=np.full(family.n_params, np.nan),
        objective=float("nan"),
        evaluations=0,
        converged=False,
        info={"eta": float(eta), "error": f"{type(exc).__name__}: {exc}"},
    )


def eta_scan(spec, family, data, eta_grid, opt=None, box=None):
    """Per-level fits, in grid order. Failed levels carry NaN parameters and an ``error``."""
    grid = [float(e) for e in eta_grid]
    if not grid:
        raise ValueError("eta grid is empty")

    def one(eta):
        try:
            return eta, fit_elementary(spec, eta, family, data, opt, box)
        except Exception as exc:  # noqa: BLE001 - the scan reports and continues
            return eta, _failed(eta, family, exc)

    workers = min(_threads(), len(grid))
    if workers == 1:
        return [one(e) for e in grid]
    with ThreadPoolExecutor(workers) as pool:
        return list(pool.map(one, grid))
