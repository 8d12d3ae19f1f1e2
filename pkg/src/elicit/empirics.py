"""Datasets, empirical Murphy curves, empirical risk and M-estimation."""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import logging
import math
import re
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize
from scipy.stats import qmc

from .errors import EmptyInput, NoFeasibleStart, NonFiniteValue, ParseError
from .functionals import active_pieces, identification_value
from .mixtures import MixtureMeasure, mixture_loss, mixture_risk

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Dataset:
    x: np.ndarray
    y: np.ndarray
    columns: tuple = ()

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float).ravel()
        if x.ndim == 1:
            x = x.reshape(-1, 1)
        if y.size == 0:
            raise EmptyInput("dataset has no rows")
        if x.shape[0] != y.size:
            raise ValueError(f"x has {x.shape[0]} rows but y has {y.size}")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise NonFiniteValue("dataset contains non-finite values")
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        if not self.columns:
            object.__setattr__(self, "columns", tuple(f"x{j + 1}" for j in range(x.shape[1])) + ("y",))

    @property
    def n(self):
        return self.y.size

    @property
    def d(self):
        return self.x.shape[1]


def _sorted_x_columns(header):
    found = [(int(m.group(1)), name) for name in header if (m := re.fullmatch(r"x(\d+)", name))]
    return [name for _, name in sorted(found)]


def load_dataset(path, x_columns=None, y_column="y"):
    """Read a CSV with a header row; lines starting with ``#`` are skipped.

    Covariates default to every ``x<k>`` column in index order.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [row for row in csv.reader(line for line in fh if not line.lstrip().startswith("#"))]
    rows = [r for r in rows if r]
    if not rows:
        raise ParseError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    if y_column not in header:
        raise ParseError(f"{path}: missing column {y_column!r} (found {header})")
    xcols = list(x_columns) if x_columns else _sorted_x_columns(header)
    for name in xcols:
        if name not in header:
            raise ParseError(f"{path}: missing column {name!r}")
    idx = [header.index(c) for c in xcols] + [header.index(y_column)]
    data = np.empty((len(rows) - 1, len(idx)))
    for i, row in enumerate(rows[1:], start=1):
        if len(row) != len(header):
            raise ParseError(f"{path}: row {i} has {len(row)} fields, expected {len(header)}")
        for j, k in enumerate(idx):
            try:
                data[i - 1, j] = float(row[k])
            except ValueError:
                raise ParseError(f"{path}: row {i}, column {header[k]!r}: cannot parse {row[k]!r}") from None
            if not math.isfinite(data[i - 1, j]):
                raise NonFiniteValue(f"{path}: row {i}, column {header[k]!r}: non-finite value {row[k]!r}")
    if data.shape[0] == 0:
        raise EmptyInput(f"{path}: no data rows")
    log.info("loaded %s: %d rows, columns %s", path, data.shape[0], xcols + [y_column])
    return Dataset(data[:, :-1], data[:, -1], tuple(xcols) + (y_column,))


class _PiecewiseAffineSum:
    """Evaluates sum_i 1{lo_i < eta <= hi_i} (a_i + b_i eta) in O(log n) per eta."""

    def __init__(self, lo, hi, a, b):
        keep = hi > lo
        lo, hi, a, b = lo[keep], hi[keep], a[keep], b[keep]
        o = np.argsort(lo, kind="stable")
        self.lo = lo[o]
        self.a_lo = np.concatenate([[0.0], np.cumsum(a[o])])
        self.b_lo = np.concatenate([[0.0], np.cumsum(b[o])])
        o = np.argsort(hi, kind="stable")
        self.hi = hi[o]
        self.a_hi = np.concatenate([[0.0], np.cumsum(a[o])])
        self.b_hi = np.concatenate([[0.0], np.cumsum(b[o])])
        self.top = self.hi[-1] if self.hi.size else -np.inf

    def _sum(self, eta, side):
        i = np.searchsorted(self.lo, eta, side=side)
        j = np.searchsorted(self.hi, eta, side=side)
        return (self.a_lo[i] - self.a_hi[j]) + eta * (self.b_lo[i] - self.b_hi[j])

    def left(self, eta):
        out = self._sum(eta, "left")
        # past every interval the prefix sums cancel only up to rounding
        return np.where(eta > self.top, 0.0, out)

    def right(self, eta):
        out = self._sum(eta, "right")
        return np.where(eta >= self.top, 0.0, out)


def fingerprint(spec, y):
    h = hashlib.sha1(str(spec).encode())
    h.update(np.ascontiguousarray(np.asarray(y, dtype=float)).tobytes())
    return h.hexdigest()[:16]


@dataclass(frozen=True)
class MurphyCurve:
    """Empirical mean elementary score on a knot set.

    ``value_at`` is the (left-continuous) curve at each knot, ``value_right``
    its right limit. Between knots the curve is affine, so the pair fully
    determines it. The curve can be re-evaluated anywhere via :meth:`evaluate`.
    """

    spec: object
    knots: np.ndarray
    value_at: np.ndarray
    value_right: np.ndarray
    range: tuple
    fingerprint: str
    n: int
    predictions: np.ndarray = field(repr=False)
    observations: np.ndarray = field(repr=False)
    _sum: _PiecewiseAffineSum = field(repr=False, compare=False)

    def evaluate(self, eta):
        eta = np.asarray(eta, dtype=float)
        return self._sum.left(eta) / self.n, self._sum.right(eta) / self.n

    def __call__(self, eta):
        return self.evaluate(eta)[0]


def _knot_set(pooled, refinement):
    u = np.unique(pooled)
    if refinement <= 0 or u.size < 2:
        return u
    frac = np.arange(1, refinement + 1) / (refinement + 1)
    inner = (u[:-1, None] + frac[None, :] * np.diff(u)[:, None]).ravel()
    return np.unique(np.concatenate([u, inner]))


def murphy_curve(spec, predictions, y, refinement=1, fingerprint_=None):
    z = np.asarray(predictions, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if z.size == 0:
        raise EmptyInput("murphy_curve needs at least one prediction")
    if z.size != y.size:
        raise ValueError("predictions and observations differ in length")
    p = active_pieces(spec, z, y)
    s = _PiecewiseAffineSum(p.lo, p.hi, p.intercept, p.slope)
    pooled = np.concatenate([z, y])
    knots = _knot_set(pooled, refinement)
    knots.setflags(write=False)
    z.setflags(write=False)
    y.setflags(write=False)
    return MurphyCurve(
        spec=spec,
        knots=knots,
        value_at=s.left(knots) / z.size,
        value_right=s.right(knots) / z.size,
        range=(float(pooled.min()), float(pooled.max())),
        fingerprint=fingerprint_ or fingerprint(spec, y),
        n=z.size,
        predictions=z,
        observations=y,
        _sum=s,
    )


def empirical_risk(spec, H, family, beta, data):
    return mixture_risk(spec, H, family.predict(beta, data.x), data.y)


def elementary_risk(spec, eta, family, beta, data):
    return float(np.mean(mixture_loss(spec, MixtureMeasure.point(eta), family.predict(beta, data.x), data.y)))


@dataclass(frozen=True)
class OptimizerConfig:
    """Multistart simplex search settings.

    ``eta_window`` is the half-width of the uniform eta-window used to select
    among the flat per-eta optima of multi-parameter families; ``0`` disables
    it. With ``None`` the window is chosen per level from ``window_masses``
    (fractions of the observations nearest to eta), widest first, keeping the
    widest one whose fit agrees with every narrower fit to within
    ``window_kappa`` standard errors. Standard errors come from refits on
    ``subsamples`` disjoint interleaved subsamples.
    """

    starts: int = 8
    xtol: float = 1e-6
    ftol_flag: float = 1e-4
    grid: int = 801
    eta_window: float | None = None
    window_masses: tuple = (0.25, 0.2, 0.17, 0.14, 0.12, 0.1, 0.085, 0.07, 0.06, 0.05, 0.035, 0.025)
    window_kappa: float = 3.0
    window_precision: float = 0.03
    subsamples: int = 4
    max_iter: int = 4000

    def __post_init__(self):
        masses = tuple(sorted((float(m) for m in self.window_masses), reverse=True))
        if not masses or not all(0.0 < m <= 1.0 for m in masses):
            raise ValueError("window_masses must be fractions in (0, 1]")
        object.__setattr__(self, "window_masses", masses)
        if self.subsamples < 2:
            raise ValueError("subsamples must be at least 2")

    @classmethod
    def from_json(cls, obj):
        return cls(**{k: v for k, v in (obj or {}).items() if k in cls.__dataclass_fields__})

    def to_json(self):
        out = {k: getattr(self, k) for k in self.__dataclass_fields__}
        out["window_masses"] = list(self.window_masses)
        return out


@dataclass
class FitResult:
    beta: np.ndarray
    objective: float
    evaluations: int
    converged: bool
    minimizer_interval: tuple | None = None
    info: dict = field(default_factory=dict)

    @property
    def representative(self):
        """Interval midpoint for flat 1-D optima, otherwise beta."""
        if self.minimizer_interval is not None:
            return np.array([0.5 * (self.minimizer_interval[0] + self.minimizer_interval[1])])
        return self.beta

    def to_json(self):
        return {
            "beta": [float(b) for b in self.beta],
            "objective": self.objective,
            "evaluations": self.evaluations,
            "converged": self.converged,
            "minimizer_interval": None if self.minimizer_interval is None else list(self.minimizer_interval),
            **self.info,
        }


def default_box(family, data):
    """Finite search box from the data scale, intersected with declared bounds."""
    sd_y = float(np.std(data.y)) or 1.0
    centre = float(np.mean(data.y))
    box = []
    names = family.param_names
    for k, name in enumerate(names):
        if name == "beta0":
            lo, hi = centre - 3 * sd_y - 1.0, centre + 3 * sd_y + 1.0
        else:
            j = int(name[4:]) - 1
            sd_x = float(np.std(data.x[:, j])) or 1.0
            r = 3 * sd_y / sd_x + 1.0
            lo, hi = -r, r
        if family.bounds is not None:
            blo, bhi = family.bounds[k]
            # open bounds: stay a hair inside
            if blo is not None:
                lo = max(lo, blo + 1e-9 * (1 + abs(blo)))
            if bhi is not None:
                hi = min(hi, bhi - 1e-9 * (1 + abs(bhi)))
        if not lo < hi:
            raise NoFeasibleStart(f"empty search box for {name}: [{lo}, {hi}]")
        box.append((lo, hi))
    return np.array(box)


class _Counted:
    def __init__(self, fun):
        self.fun = fun
        self.calls = 0

    def __call__(self, beta):
        self.calls += 1
        return self.fun(np.asarray(beta, dtype=float))


def _simplex(fun, x0, step, box, opt):
    x0 = np.clip(np.asarray(x0, dtype=float), box[:, 0], box[:, 1])
    simplex = [x0]
    for k in range(x0.size):
        v = x0.copy()
        v[k] = v[k] + step[k] if v[k] + step[k] <= box[k, 1] else v[k] - step[k]
        simplex.append(v)
    res = optimize.minimize(
        fun,
        x0,
        method="Nelder-Mead",
        bounds=optimize.Bounds(box[:, 0], box[:, 1]),
        options={
            "initial_simplex": np.array(simplex),
            "xatol": opt.xtol,
            "fatol": 1e-13,
            "maxiter": opt.max_iter,
            "maxfev": 2 * opt.max_iter,
        },
    )
    return np.clip(res.x, box[:, 0], box[:, 1]), float(res.fun)


def _flag(values, opt):
    if len(values) < 2:
        return True
    f1, f2 = sorted(values)[:2]
    return (f2 - f1) <= opt.ftol_flag * max(abs(f1), abs(f2), 1e-12)


def _flat_edge(fun, inside, outside, target, xtol):
    fi = inside
    fo = outside
    while abs(fo - fi) > xtol:
        mid = 0.5 * (fi + fo)
        if fun(np.array([mid])) <= target:
            fi = mid
        else:
            fo = mid
    return fi


def _search_1d(fun, box, opt):
    lo, hi = box[0]
    grid = np.linspace(lo, hi, max(int(opt.grid), 3))
    vals = np.array([fun(np.array([g])) for g in grid])
    left = np.concatenate([[np.inf], vals[:-1]])
    right = np.concatenate([vals[1:], [np.inf]])
    is_min = (vals <= left) & (vals <= right)
    # one candidate per run of tied local-minimum grid points
    runs = []
    for k in np.flatnonzero(is_min):
        if runs and runs[-1][-1] == k - 1 and vals[k] == vals[k - 1]:
            runs[-1].append(k)
        else:
            runs.append([k])
    picks = sorted((vals[r[0]], r[len(r) // 2]) for r in runs)[: max(opt.starts, 1)]
    h = grid[1] - grid[0]
    found = []
    for fv, k in picks:
        x, f = _simplex(fun, [grid[k]], [h], box, opt)
        if f > fv:
            x, f = np.array([grid[k]]), fv
        found.append((f, float(x[0])))
    found.sort()
    fbest, xbest = found[0]
    tol = 1e-12 * max(1.0, abs(fbest))
    target = fbest + tol
    # grow the flat set outwards on the grid, then bisect its edges
    k0 = int(np.clip(np.searchsorted(grid, xbest), 0, grid.size - 1))
    a = xbest
    k = k0 if grid[k0] < xbest else k0 - 1
    while k >= 0 and vals[k] <= target:
        a = grid[k]
        k -= 1
    lo_edge = a if k < 0 else _flat_edge(fun, a, grid[k], target, opt.xtol)
    b = xbest
    k = k0 if grid[k0] > xbest else k0 + 1
    while k < grid.size and vals[k] <= target:
        b = grid[k]
        k += 1
    hi_edge = b if k >= grid.size else _flat_edge(fun, b, grid[k], target, opt.xtol)
    interval = (float(lo_edge), float(hi_edge)) if hi_edge - lo_edge > 2 * opt.xtol else None
    # the grid is exhaustive; an optimum pinned to the box edge may lie outside it
    converged = lo < lo_edge and hi_edge < hi if interval else lo < xbest < hi
    return np.array([xbest]), fbest, bool(converged), interval


def _starts(family, data, box, opt):
    d = box.shape[0]
    pts = [0.5 * (box[:, 0] + box[:, 1])]
    if getattr(family, "kind", None) == "linear":
        # least-squares start: cheap and usually in the right basin
        X = data.x if not family.intercept else np.column_stack([np.ones(data.n), data.x])
        beta, *_ = np.linalg.lstsq(X, data.y, rcond=None)
        pts.append(beta)
    if opt.starts > len(pts):
        u = qmc.Halton(d, scramble=False).random(opt.starts - len(pts) + 1)[1:]
        pts.extend(box[:, 0] + u * (box[:, 1] - box[:, 0]))
    return [np.clip(p, box[:, 0], box[:, 1]) for p in pts[: max(opt.starts, 1)]]


def _search(fun, family, data, box, opt, starts=None):
    if box.shape[0] == 1:
        return _search_1d(fun, box, opt)
    if starts is None:
        starts = _starts(family, data, box, opt)
        step = 0.1 * (box[:, 1] - box[:, 0])
    else:
        # warm starts sit near the optimum already
        starts = [np.clip(np.asarray(s, dtype=float), box[:, 0], box[:, 1]) for s in starts]
        step = 0.01 * (box[:, 1] - box[:, 0])
    found = []
    for x0 in starts:
        f0 = fun(x0)
        x, f = _simplex(fun, x0, step, box, opt)
        if f > f0:
            x, f = x0, f0
        found.append((f, tuple(x)))
    found.sort()
    return np.array(found[0][1]), found[0][0], _flag([f for f, _ in found], opt), None


def _minimize(objective, family, data, opt, box=None, starts=None):
    box = default_box(family, data) if box is None else np.asarray(box, dtype=float)
    fun = _Counted(objective)
    beta, f, converged, interval = _search(fun, family, data, box, opt, starts)
    return FitResult(
        beta=beta,
        objective=float(objective(beta)),
        evaluations=fun.calls,
        converged=bool(converged),
        minimizer_interval=interval,
    )


def default_mixture(data, family=None):
    """Lebesgue measure on the observation range padded by its span on both sides."""
    lo, hi = float(data.y.min()), float(data.y.max())
    span = max(hi - lo, 1.0)
    return MixtureMeasure.lebesgue(lo - span, hi + span)


def fit(spec, H, family, data, opt=None, box=None):
    """Minimise the empirical mixture risk by multistart simplex descent."""
    opt = opt or OptimizerConfig()
    if family.n_params > 8:
        raise ValueError("fit supports at most 8 parameters")
    return _minimize(lambda b: empirical_risk(spec, H, family, b, data), family, data, opt, box)


def window_half_width(data, eta, mass):
    """Distance from eta to the ceil(mass * n)-th nearest observation."""
    k = min(max(int(math.ceil(mass * data.n)), 2), data.n)
    dist = np.partition(np.abs(data.y - eta), k - 1)[k - 1]
    return max(float(dist), 1e-9 * (1.0 + abs(eta)))


def _subset(data, idx):
    return Dataset(data.x[idx], data.y[idx], data.columns)


def _window_fit(spec, eta, w, family, data, opt, box, start):
    H = MixtureMeasure.window(eta, w)

    def objective(d):
        return lambda b: empirical_risk(spec, H, family, b, d)

    box = default_box(family, data) if box is None else np.asarray(box, dtype=float)
    k = opt.subsamples
    converged = True
    evaluations = 0
    if start is None:
        # global search on one subsample, then polish on the full data
        part = _subset(data, np.arange(0, data.n, k))
        pre = _minimize(objective(part), family, part, opt, box)
        start, converged, evaluations = pre.beta, pre.converged, pre.evaluations
    res = _minimize(objective(data), family, data, opt, box, starts=[start])
    res.converged = converged
    res.evaluations += evaluations
    # the spread of subsample fits only needs a few digits
    rough = dataclasses.replace(opt, xtol=max(opt.xtol, 1e-4))
    subs = []
    for j in range(k):
        part = _subset(data, np.arange(j, data.n, k))
        r = _minimize(objective(part), family, part, rough, box, starts=[res.beta])
        res.evaluations += r.evaluations
        subs.append(r.beta)
    # each subsample estimate has about k times the full-sample variance
    se = np.std(np.array(subs), axis=0, ddof=1) / math.sqrt(k)
    return res, se


def _select_window(fits, kappa):
    for i, (_, _, res, _) in enumerate(fits):
        if all(np.all(np.abs(res.beta - r.beta) <= kappa * se) for _, _, r, se in fits[i + 1 :]):
            return i
    return len(fits) - 1


def _is_line(family):
    return getattr(family, "kind", None) == "linear" and family.intercept and family.dim == 1


def _best_split(spec, eta, x, y, sign):
    """Exact minimiser of the elementary risk over lines crossing eta at some x.

    With slope sign ``sign`` the prediction clears eta exactly on one side of
    the crossing point, so the empirical risk only depends on where the
    sorted covariates are split. Returns (risk, crossing point, split index).
    """
    order = np.argsort(x, kind="stable")
    xs, ys = x[order], y[order]
    v = np.asarray(identification_value(spec, eta, ys), dtype=float)
    up = ys >= eta
    above = np.where(up, 0.0, v)  # contribution when the prediction clears eta
    below = np.where(up, -v, 0.0)
    n = xs.size
    if sign < 0:
        above, below = below, above
    # risk(k): the first k sorted points sit below the crossing
    head = np.concatenate([[0.0], np.cumsum(below)])
    tail = np.concatenate([np.cumsum(above[::-1])[::-1], [0.0]])
    risk = (head + tail) / n
    valid = np.ones(n + 1, dtype=bool)
    valid[1:n] = xs[1:] > xs[:-1]
    risk = np.where(valid, risk, np.inf)
    k = int(np.argmin(risk))
    if k == 0 or k == n:
        return float(risk[k]), None, k
    return float(risk[k]), 0.5 * (xs[k - 1] + xs[k]), k


def _line_window_risk(spec, H, eta, t, data, sign):
    """Fast b -> window risk of the line eta + b (x - t), for slopes of one sign.

    A row's loss only moves while its prediction is inside the window; beyond
    either edge it is constant. Rows are sorted by |x - t| so the constant
    tails are read off suffix sums and each call touches the inside rows only.
    """
    lo, hi = H.support
    u = data.x[:, 0] - t
    order = np.argsort(np.abs(u), kind="stable")
    au, uo, yo = np.abs(u)[order], u[order], data.y[order]
    span = hi - lo
    up, down = mixture_loss(spec, H, hi + span, yo), mixture_loss(spec, H, lo - span, yo)
    tail = np.concatenate([np.cumsum(np.where(sign * uo > 0, up, down)[::-1])[::-1], [0.0]])
    reach = max(hi - eta, eta - lo)
    n = data.n

    def risk(b):
        m = int(np.searchsorted(au, reach / abs(b), side="right"))
        inside = mixture_loss(spec, H, eta + b * uo[:m], yo[:m]).sum() if m else 0.0
        return (inside + tail[m]) / n

    return risk


def _slope_fit(spec, eta, t, w, data, slopes, opt):
    """Slope minimising the window risk among lines through (t, eta); with its standard error."""
    H = MixtureMeasure.window(eta, w)
    u = data.x[:, 0] - t
    risk = _line_window_risk(spec, H, eta, t, data, 1.0 if slopes[0] > 0 else -1.0)

    lo, hi = slopes
    grid = np.linspace(lo, hi, max(int(opt.grid) // 4, 9))
    vals = np.array([risk(b) for b in grid])
    k = int(np.argmin(vals))
    a, c = grid[max(k - 1, 0)], grid[min(k + 1, grid.size - 1)]
    res = optimize.minimize_scalar(risk, bounds=(a, c), method="bounded", options={"xatol": opt.xtol})
    b = float(res.x) if res.fun <= vals[k] else float(grid[k])
    edge = k == 0 or k == grid.size - 1

    # sandwich standard error of the estimating equation mean h(z) V(z, y) u
    def score(bb):
        z = eta + bb * u
        return H.density(z) * identification_value(spec, z, data.y) * u

    step = 0.1 * max(abs(b), grid[1] - grid[0])
    slope = (np.mean(score(b + step)) - np.mean(score(b - step))) / (2 * step)
    psi = score(b)
    se = math.sqrt(np.mean(psi**2) / data.n) / abs(slope) if slope != 0 else math.inf
    return b, se, edge, grid.size + res.nfev


def _select_slope(fits, kappa, precision):
    """Widest window whose slope agrees with every narrower one.

    Edge fits are ignored, and so are windows whose standard error exceeds
    ``precision`` times the slope: on noisy data such narrow windows tend to
    lock onto spurious local minima with overconfident errors.
    """
    usable = [f for f in fits if not f["edge"]] or fits
    usable = [f for f in usable if f["se"] <= precision * abs(f["beta1"])] or usable[:1]
    for i, f in enumerate(usable):
        if all(abs(f["beta1"] - g["beta1"]) <= kappa * g["se"] for g in usable[i + 1 :]):
            return f
    return usable[-1]


def _fit_line(spec, eta, family, data, opt, box):
    """Crossing-then-slope fit for intercept-plus-one-covariate families, or None to fall back."""
    box = default_box(family, data) if box is None else np.asarray(box, dtype=float)
    x = data.x[:, 0]
    blo, bhi = box[1]
    ranges = {}
    # keep slopes away from zero so the line still crosses eta at t
    gap = 1e-3 * (bhi - blo)
    if bhi > gap:
        ranges[1] = (max(blo, gap), bhi)
    if blo < -gap:
        ranges[-1] = (blo, min(bhi, -gap))
    best = None
    for sign, slopes in ranges.items():
        r, t, _ = _best_split(spec, eta, x, data.y, sign)
        if t is not None and (best is None or r < best[0]):
            best = (r, t, slopes)
    if best is None:
        return None
    _, t, slopes = best
    fits = []
    evaluations = 0
    for mass in opt.window_masses:
        w = window_half_width(data, eta, mass)
        b, se, edge, nfev = _slope_fit(spec, eta, t, w, data, slopes, opt)
        evaluations += nfev
        fits.append({"mass": mass, "half_width": w, "beta1": b, "se": se, "edge": edge})
    pick = _select_slope(fits, opt.window_kappa, opt.window_precision)
    b1 = pick["beta1"]
    beta = np.array([eta - b1 * t, b1])
    if not family.inside(beta):
        return None
    H = MixtureMeasure.window(eta, pick["half_width"])
    res = FitResult(
        beta=beta,
        objective=float(empirical_risk(spec, H, family, beta, data)),
        evaluations=evaluations,
        converged=not pick["edge"],
    )
    res.info.update(
        eta=eta,
        method="crossing",
        crossing=float(t),
        eta_window=pick["half_width"],
        window_mass=pick["mass"],
        slope_standard_error=pick["se"],
        window_trials=fits,
    )
    return res


def _fit_window(spec, eta, family, data, opt, box):
    if opt.eta_window is not None:
        res = fit(spec, MixtureMeasure.window(eta, float(opt.eta_window)), family, data, opt, box)
        res.info.update(eta=eta, method="window", eta_window=float(opt.eta_window))
        return res
    fits = []
    start = None
    for mass in opt.window_masses:
        w = window_half_width(data, eta, mass)
        res, se = _window_fit(spec, eta, w, family, data, opt, box, start)
        fits.append((mass, w, res, se))
        start = res.beta
    pick = _select_window(fits, opt.window_kappa)
    mass, w, res, se = fits[pick]
    res.evaluations = sum(f[2].evaluations for f in fits)
    res.info.update(
        eta=eta,
        method="window",
        eta_window=w,
        window_mass=mass,
        standard_error=[float(v) for v in se],
        window_trials=[
            {"mass": m, "half_width": hw, "beta": [float(b) for b in r.beta], "se": [float(v) for v in s]}
            for m, hw, r, s in fits
        ],
    )
    return res


def fit_elementary(spec, eta, family, data, opt=None, box=None):
    """Minimise the empirical mean of S_eta over the parameter space.

    With one parameter the elementary objective is scanned on a grid and its
    flat optimum reported as ``minimizer_interval``.

    With several parameters the objective depends on beta only through the
    set {x : m(x; beta) >= eta}, so its minimisers form a continuum and a
    tie-break is needed. For a line with intercept the crossing point t of
    the level is found exactly by enumerating splits of the sorted
    covariate; among lines through (t, eta), all of which attain the
    minimum, the slope minimising the mixture risk of a narrow uniform
    window around eta is kept. That member stays optimal for neighbouring
    levels. Other families minimise the window risk over all parameters,
    which only approximately minimises the elementary risk.

    Window widths come from ``OptimizerConfig``: a fixed ``eta_window``, or
    a per-level choice from ``window_masses`` (widest window agreeing with
    all narrower ones within ``window_kappa`` standard errors).
    """
    opt = opt or OptimizerConfig()
    eta = float(eta)
    if family.n_params == 1 or opt.eta_window == 0:
        res = fit(spec, MixtureMeasure.point(eta), family, data, opt, box)
        res.info.update(eta=eta, eta_window=0.0)
        return res
    if family.n_params > 8:
        raise ValueError("fit supports at most 8 parameters")
    res = None
    if _is_line(family) and opt.eta_window is None:
        res = _fit_line(spec, eta, family, data, opt, box)
    if res is None:
        res = _fit_window(spec, eta, family, data, opt, box)
    res.info["elementary_objective"] = elementary_risk(spec, eta, family, res.beta, data)
    return res
