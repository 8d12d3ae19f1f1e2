"""Binned T-calibration diagnostic and the scan-versus-calibration harness."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .empirics import OptimizerConfig, fit_elementary
from .errors import OutOfRange, WidthError
from .functionals import identification_value, identification_value_right
from .models import supports_shift
from .pareto import eta_scan


@dataclass(frozen=True)
class CalibrationBin:
    lo: float
    hi: float
    count: int
    mean_v: float
    mean_v_right: float
    se: float
    se_right: float
    closed: bool = False

    @property
    def t_left(self):
        return _t(self.mean_v, self.se)

    @property
    def t_right(self):
        return _t(self.mean_v_right, self.se_right)

    @property
    def standardized(self):
        """Worst one-sided violation: positive when a side points the wrong way."""
        if self.count == 0:
            return 0.0
        return max(self.t_left, -self.t_right)

    @property
    def center(self):
        return 0.5 * (self.lo + self.hi)

    def to_json(self):
        return {
            "range": [self.lo, self.hi],
            "closed": self.closed,
            "count": self.count,
            "mean_V": self.mean_v,
            "mean_V_right": self.mean_v_right,
            "se": self.se,
            "se_right": self.se_right,
            "standardized": self.standardized,
        }


def _t(mean, se):
    if math.isnan(mean):
        return 0.0
    if se > 0:
        return mean / se
    return 0.0 if mean == 0 else math.copysign(math.inf, mean)


@dataclass(frozen=True)
class CalibrationReport:
    bins: tuple
    overall: float
    passed: bool
    z_threshold: float
    degenerate: bool = False
    applicable: bool | None = None

    @property
    def n(self):
        return sum(b.count for b in self.bins)

    def to_json(self):
        return {
            "pass": self.passed,
            "overall": self.overall,
            "z_threshold": self.z_threshold,
            "degenerate": self.degenerate,
            "applicable": self.applicable,
            "bins": [b.to_json() for b in self.bins],
        }

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["bin_center", "standardized_mean"])
        for b in self.bins:
            w.writerow([repr(b.center), repr(b.standardized)])
        return buf.getvalue()


def _mean_se(v):
    if v.size == 0:
        return float("nan"), float("nan")
    se = float(np.std(v, ddof=1) / math.sqrt(v.size)) if v.size > 1 else 0.0
    return float(np.mean(v)), se


def _edges(z, bins, equal_width):
    if np.ndim(bins) == 0:
        k = int(bins)
        if k < 1:
            raise ValueError("bins must be positive")
        if z.size < 5 * k:
            raise WidthError(f"{z.size} predictions are too few for {k} bins; use at most {z.size // 5}")
        if equal_width:
            edges = np.linspace(z.min(), z.max(), k + 1)
        else:
            edges = np.quantile(z, np.linspace(0.0, 1.0, k + 1), method="inverted_cdf")
            edges[0], edges[-1] = z.min(), z.max()
        return np.unique(edges)
    edges = np.asarray(bins, dtype=float)
    if edges.ndim != 1 or edges.size < 2 or np.any(np.diff(edges) <= 0):
        raise ValueError("explicit bin edges must be strictly increasing, at least two")
    if z.size < 5 * (edges.size - 1):
        raise WidthError(f"{z.size} predictions are too few for {edges.size - 1} bins")
    if z.min() < edges[0] or z.max() > edges[-1]:
        raise OutOfRange("predictions fall outside the explicit bin edges")
    return edges


def calibration_diagnostic(spec, predictions, y, bins=10, z_threshold=3.0, equal_width=False):
    """Check the one-sided conditional moment inequalities bin by bin.

    For a bin [lo, hi) of predictions, calibration implies that the members'
    mean of V(lo, y) is at most 0 and their mean of V(hi, y) at least 0. Each
    side is standardised by its standard error and the bin fails when either
    side exceeds ``z_threshold`` in the wrong direction. The last bin is
    closed and uses the right limit of V at its upper edge.
    """
    z = np.asarray(predictions, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if z.size != y.size:
        raise ValueError("predictions and observations differ in length")
    if z.size == 0:
        raise WidthError("no observations")
    if not (np.all(np.isfinite(z)) and np.all(np.isfinite(y))):
        raise ValueError("non-finite predictions or observations")

    degenerate = bool(z.min() == z.max())
    if degenerate:
        c = float(z[0])
        m, se = _mean_se(np.asarray(identification_value(spec, c, y)))
        mr, ser = _mean_se(np.asarray(identification_value_right(spec, c, y)))
        out = (CalibrationBin(c, c, z.size, m, mr, se, ser, closed=True),)
    else:
        edges = _edges(z, bins, equal_width)
        idx = np.clip(np.searchsorted(edges, z, side="right") - 1, 0, edges.size - 2)
        out = []
        last = edges.size - 2
        for k in range(edges.size - 1):
            ys = y[idx == k]
            lo, hi = float(edges[k]), float(edges[k + 1])
            m, se = _mean_se(np.asarray(identification_value(spec, lo, ys)))
            right = identification_value_right if k == last else identification_value
            mr, ser = _mean_se(np.asarray(right(spec, hi, ys)))
            out.append(CalibrationBin(lo, hi, int(ys.size), m, mr, se, ser, closed=k == last))
        out = tuple(out)
    overall = max(b.standardized for b in out)
    return CalibrationReport(out, float(overall), bool(overall <= z_threshold), float(z_threshold), degenerate)


@dataclass
class HarnessReport:
    spread: float
    per_eta: list
    consensus: np.ndarray
    calibration: CalibrationReport
    applicable: bool
    consensus_method: str = "median"
    info: dict = field(default_factory=dict)

    def to_json(self):
        return {
            "spread": self.spread,
            "consensus": [float(b) for b in self.consensus],
            "consensus_method": self.consensus_method,
            "applicable": self.applicable,
            "calibration": self.calibration.to_json(),
            "per_eta": [{"eta": e, **r.to_json()} for e, r in self.per_eta],
        }


def scan_spread(reps):
    """Largest l-infinity distance between any two representatives."""
    reps = np.asarray(reps, dtype=float)
    reps = reps[np.all(np.isfinite(reps), axis=1)]
    if len(reps) < 2:
        return 0.0
    return float(max(np.max(np.abs(reps - r)) for r in reps))


def _crossing(spec, family, data, opt, per_eta):
    """Level at which the flat 1-D optima swap sides, refined by bisection.

    Below the crossing the optimum set lies at or above eta, beyond it the set
    lies below eta; the common point of all sets is the calibrated parameter.
    """
    ivs = [r.minimizer_interval for _, r in per_eta]
    if any(iv is None for iv in ivs):
        return None
    lo = max(iv[0] for iv in ivs)
    hi = min(iv[1] for iv in ivs)
    if lo > hi:
        return None
    for _ in range(200):
        if hi - lo <= 4 * opt.xtol * max(1.0, abs(lo), abs(hi)):
            break
        mid = 0.5 * (lo + hi)
        iv = fit_elementary(spec, mid, family, data, opt).minimizer_interval
        if iv is None:
            break
        new_lo, new_hi = max(lo, iv[0]), min(hi, iv[1])
        if new_lo > new_hi or (new_lo, new_hi) == (lo, hi):
            break
        lo, hi = new_lo, new_hi
    return np.array([0.5 * (lo + hi)])


def theorem1_harness(spec, family, data, eta_grid, opt=None, bins=10, z_threshold=3.0):
    """Scan the levels, measure how much the per-level fits disagree, calibrate a consensus.

    A calibrated correctly specified model yields (nearly) the same parameter
    at every level. The consensus is the coordinatewise median of the per-level
    representatives; for one-parameter families whose flat optima all overlap,
    the overlap is narrowed by bisection on the level instead.
    """
    opt = opt or OptimizerConfig()
    per_eta = eta_scan(spec, family, data, eta_grid, opt)
    reps = np.array([r.representative for _, r in per_eta], dtype=float)
    ok = np.all(np.isfinite(reps), axis=1)
    if not ok.any():
        raise ValueError("every level of the scan failed")
    spread = scan_spread(reps)
    consensus = None
    method = "median"
    if family.n_params == 1:
        consensus = _crossing(spec, family, data, opt, per_eta)
        if consensus is not None:
            method = "crossing"
    if consensus is None:
        consensus = np.median(reps[ok], axis=0)
    preds = family.predict(consensus, data.x)
    cal = calibration_diagnostic(spec, preds, data.y, bins=min(bins, max(data.n // 5, 1)), z_threshold=z_threshold)
    applicable = supports_shift(family)
    cal = CalibrationReport(cal.bins, cal.overall, cal.passed, cal.z_threshold, cal.degenerate, applicable)
    return HarnessReport(spread, per_eta, consensus, cal, applicable, method)
