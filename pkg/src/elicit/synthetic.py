"""Seeded data generators and analytic oracles for the worked examples."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize
from scipy.special import expit
from scipy.stats import norm

from .empirics import Dataset
from .errors import OutOfRange, WindowTooCoarse, ZeroSlope

GENERATORS = ("quadratic", "logistic", "cubic")
_STREAM_IDS = {"quadratic": 1, "logistic": 2, "cubic": 3}


@dataclass(frozen=True)
class GeneratorSpec:
    """Y = X^2 + eps (noise sd fixed at 1), Y = g1(X) + noise or Y = X^3 + noise."""

    kind: str
    n: int
    seed: int = 0
    noise_sd: float | None = None

    def __post_init__(self):
        if self.kind not in GENERATORS:
            raise ValueError(f"unknown generator {self.kind!r}; expected one of {GENERATORS}")
        if self.n < 1:
            raise ValueError("n must be positive")
        sd = self.noise_sd
        if self.kind == "quadratic":
            if sd not in (None, 1.0):
                raise ValueError("the quadratic example has unit noise")
            sd = 1.0
        elif sd is None:
            sd = 0.5
        if sd < 0:
            raise ValueError("noise_sd must be non-negative")
        object.__setattr__(self, "noise_sd", float(sd))


def g_logistic(x):
    return expit(x)


def g_cubic(x):
    return np.asarray(x, dtype=float) ** 3


REGRESSION = {"logistic": g_logistic, "cubic": g_cubic}


def generate(spec):
    # one named stream per (kind, seed); X drawn first so noise_sd=0 keeps X
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([spec.seed, _STREAM_IDS[spec.kind]])))
    x = rng.standard_normal(spec.n)
    eps = rng.standard_normal(spec.n)
    if spec.kind == "quadratic":
        y = x * x + eps
    else:
        y = REGRESSION[spec.kind](x) + spec.noise_sd * eps
    return Dataset(x.reshape(-1, 1), y)


def oracle_b_eta_quadratic(eta):
    """Per-level minimisers of E S_eta(bX, Y) for Y = X^2 + eps."""
    if eta > 0:
        r = math.sqrt(eta)
        return (-r, r)
    return (0.0,)


def quadratic_objective(b, eta):
    """E 1{eta <= bX}(eta - X^2) in closed form via the normal tail."""
    if b == 0:
        return (eta - 1.0) if eta <= 0 else 0.0
    t = eta / b
    if b > 0:
        tail, dens = norm.sf(t), norm.pdf(t)
        return eta * tail - (t * dens + tail)
    head, dens = norm.cdf(t), norm.pdf(t)
    return eta * head - (head - t * dens)


def quadratic_objective_derivative(b, eta):
    if b == 0:
        raise ZeroSlope("derivative formula needs b != 0")
    scale = eta * eta / b**4 * norm.pdf(eta / b)
    return (b * b - eta) * scale if b > 0 else (eta - b * b) * scale


def oracle_frontier_logistic(eta):
    """Tangent line to the logistic curve at the point where it equals eta."""
    if not 0.0 < eta < 1.0:
        raise OutOfRange("logistic frontier is defined for eta in (0, 1)")
    beta1 = eta * (1.0 - eta)
    beta0 = eta * (1.0 - (1.0 - eta) * math.log(eta / (1.0 - eta)))
    return beta0, beta1


def oracle_frontier_cubic(eta):
    """Tangent line to x^3 at x = eta^(1/3); eta = 0 gives the degenerate (0, 0)."""
    return -2.0 * eta, 3.0 * (eta * eta) ** (1.0 / 3.0)


def zero_count(g, beta0, beta1, window, resolution=20001, window_in_x=False, tol=1e-8):
    """Number of roots of h(eta) = eta - g((eta - beta0) / beta1) in a window.

    Crossings are found from sign changes and refined by bisection; touching
    roots are found by minimising |h| around grid-local minima and counted
    when the minimum falls below ``tol``. ``window_in_x`` reads the window in
    covariate units and maps it through the line.
    """
    if isinstance(g, str):
        g = REGRESSION[g]
    if not beta1 > 0:
        raise ValueError("zero_count needs a positive slope")
    lo, hi = map(float, window)
    if window_in_x:
        lo, hi = beta0 + beta1 * lo, beta0 + beta1 * hi
    if not lo < hi:
        raise ValueError("empty window")
    if resolution < 3:
        raise WindowTooCoarse("need at least 3 grid points")

    def h(e):
        return e - g((e - beta0) / beta1)

    grid = np.linspace(lo, hi, int(resolution))
    hv = h(grid)
    if not np.all(np.isfinite(hv)):
        raise WindowTooCoarse("non-finite values on the grid")
    sgn = np.sign(hv)
    count = int(np.count_nonzero(hv == 0.0))
    crossing = sgn[:-1] * sgn[1:] < 0
    count += int(np.count_nonzero(crossing))

    a = np.abs(hv)
    step = grid[1] - grid[0]
    for k in range(1, grid.size - 1):
        if not (a[k] <= a[k - 1] and a[k] <= a[k + 1]) or a[k] == 0.0:
            continue
        if crossing[k - 1] or crossing[k] or hv[k - 1] == 0.0 or hv[k + 1] == 0.0:
            continue
        # plateau of ties: only examine its first point
        if a[k] == a[k - 1]:
            continue
        res = optimize.minimize_scalar(
            lambda e: abs(h(e)), bounds=(grid[k - 1], grid[k + 1]), method="bounded", options={"xatol": 1e-12}
        )
        if res.fun < tol:
            if abs(res.x - grid[k]) > 10 * step:
                raise WindowTooCoarse("touching root refined far from its grid candidate")
            count += 1
    return count
