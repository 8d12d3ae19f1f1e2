import math

import numpy as np
import pytest
from scipy import integrate
from scipy.stats import norm

from elicit.errors import OutOfRange, WindowTooCoarse, ZeroSlope
from elicit.functionals import FunctionalSpec
from elicit.empirics import fit_elementary
from elicit.models import ModelFamily
from elicit.synthetic import (
    GeneratorSpec,
    g_logistic,
    generate,
    oracle_b_eta_quadratic,
    oracle_frontier_cubic,
    oracle_frontier_logistic,
    quadratic_objective,
    quadratic_objective_derivative,
    zero_count,
)


def quad_objective(b, eta):
    """E 1{eta <= bX}(eta - X^2) by adaptive quadrature over the half-line."""
    f = lambda x: (eta - x * x) * norm.pdf(x)
    t = eta / b
    if b > 0:
        return integrate.quad(f, t, np.inf, epsabs=1e-14, epsrel=1e-13)[0]
    return integrate.quad(f, -np.inf, t, epsabs=1e-14, epsrel=1e-13)[0]


# ---------------------------------------------------------- generators


def test_generate_is_deterministic(tmp_path):
    a = generate(GeneratorSpec("quadratic", 3, seed=7))
    b = generate(GeneratorSpec("quadratic", 3, seed=7))
    assert a.x.tobytes() == b.x.tobytes() and a.y.tobytes() == b.y.tobytes()
    assert generate(GeneratorSpec("quadratic", 3, seed=8)).y.tobytes() != a.y.tobytes()


def test_noise_free_cubic_is_exact():
    d = generate(GeneratorSpec("cubic", 1000, seed=3, noise_sd=0.0))
    np.testing.assert_array_equal(d.y, d.x[:, 0] ** 3)


def test_noise_level_only_scales_noise():
    a = generate(GeneratorSpec("logistic", 500, seed=2, noise_sd=0.0))
    b = generate(GeneratorSpec("logistic", 500, seed=2, noise_sd=0.5))
    np.testing.assert_array_equal(a.x, b.x)
    assert 0.4 < np.std(b.y - a.y) < 0.6


def test_quadratic_sample_mean():
    d = generate(GeneratorSpec("quadratic", 10**6, seed=1))
    assert abs(d.y.mean() - 1.0) <= 3 * math.sqrt(3 / 10**6) + 0.01


def test_generator_validation():
    with pytest.raises(ValueError):
        GeneratorSpec("quadratic", 10, noise_sd=0.5)
    with pytest.raises(ValueError):
        GeneratorSpec("sine", 10)
    with pytest.raises(ValueError):
        GeneratorSpec("cubic", 0)
    with pytest.raises(ValueError):
        GeneratorSpec("cubic", 10, noise_sd=-1.0)
    assert GeneratorSpec("cubic", 10).noise_sd == 0.5


# ------------------------------------------------------------- oracles


@pytest.mark.parametrize("eta, expected", [(4.0, (-2.0, 2.0)), (0.0, (0.0,)), (0.25, (-0.5, 0.5)), (-3.0, (0.0,))])
def test_quadratic_oracle(eta, expected):
    assert oracle_b_eta_quadratic(eta) == expected


@pytest.mark.parametrize("b, eta", [(0.7, 0.3), (-1.2, 2.0), (2.0, -0.5), (-0.4, -1.0)])
def test_quadratic_objective_matches_quadrature(b, eta):
    assert quadratic_objective(b, eta) == pytest.approx(quad_objective(b, eta), abs=1e-12)


def test_quadratic_objective_minimisers():
    for eta in (0.25, 1.0, 4.0):
        bs = np.linspace(-4, 4, 8001)
        vals = np.array([quadratic_objective(b, eta) for b in bs])
        assert abs(abs(bs[np.argmin(vals)]) - math.sqrt(eta)) < 2e-3


def test_derivative_matches_quadrature_differences():
    rng = np.random.default_rng(11)
    for _ in range(50):
        b = rng.choice([-1, 1]) * rng.uniform(0.3, 3)
        eta = rng.uniform(-2, 4)
        h = 1e-4 * abs(b)
        fd = (quad_objective(b + h, eta) - quad_objective(b - h, eta)) / (2 * h)
        got = quadratic_objective_derivative(b, eta)
        assert abs(got - fd) <= 1e-6 * max(abs(fd), 1e-3), (b, eta, got, fd)


def test_derivative_rejects_zero_slope():
    with pytest.raises(ZeroSlope):
        quadratic_objective_derivative(0.0, 1.0)


def test_logistic_frontier():
    assert oracle_frontier_logistic(0.5) == (0.5, 0.25)
    b0, b1 = oracle_frontier_logistic(0.8)
    assert b1 == pytest.approx(0.16) and b0 == pytest.approx(0.8 * (1 - 0.2 * math.log(4)))
    for eta in (0.1, 0.5, 0.93):
        b0, b1 = oracle_frontier_logistic(eta)
        xs = math.log(eta / (1 - eta))
        assert abs(b0 + b1 * xs - eta) < 1e-12
        assert abs(b1 - g_logistic(xs) * (1 - g_logistic(xs))) < 1e-12
    for bad in (0.0, 1.0, 1.5):
        with pytest.raises(OutOfRange):
            oracle_frontier_logistic(bad)


def test_cubic_frontier():
    assert oracle_frontier_cubic(1.0) == (-2.0, 3.0)
    assert oracle_frontier_cubic(-1.0) == (2.0, 3.0)
    assert oracle_frontier_cubic(0.0) == (0.0, 0.0)
    for eta in (-8.0, 0.3, 27.0):
        b0, b1 = oracle_frontier_cubic(eta)
        xs = math.copysign(abs(eta) ** (1 / 3), eta)
        assert b0 + b1 * xs == pytest.approx(eta) and b1 == pytest.approx(3 * xs * xs)


# ---------------------------------------------------------- zero_count


@pytest.mark.parametrize(
    "g, beta, window, kw, expected",
    [
        ("cubic", (-2.0, 3.0), (-20, 20), {}, 2),  # (x-1)^2 (x+2)
        ("cubic", (0.0, 1.0), (-5, 5), {}, 3),
        ("logistic", (10.0, 0.1), (0, 1), {"window_in_x": True}, 0),
        ("logistic", oracle_frontier_logistic(0.3), (0, 1), {}, 2),  # tangency plus a crossing
        ("logistic", oracle_frontier_logistic(0.5), (0, 1), {}, 1),  # inflection: one triple root
    ],
)
def test_zero_count_examples(g, beta, window, kw, expected):
    assert zero_count(g, *beta, window, **kw) == expected


def test_zero_count_validation():
    with pytest.raises(ValueError):
        zero_count("cubic", 0.0, 0.0, (-1, 1))
    with pytest.raises(ValueError):
        zero_count("cubic", 0.0, 1.0, (1, -1))
    with pytest.raises(WindowTooCoarse):
        zero_count("cubic", 0.0, 1.0, (-1, 1), resolution=2)


# --------------------------------------------------- frontier by fitting


@pytest.mark.parametrize(
    "kind, eta",
    [("cubic", e) for e in (-2.0, -1.5, -1.0, -0.7, -0.4, 0.4, 0.7, 1.0, 1.5, 2.0)]
    + [("logistic", e) for e in (0.15, 0.25, 0.35, 0.45, 0.5, 0.55, 0.65, 0.75, 0.8, 0.85)],
)
def test_noise_free_fits_reach_the_tangent_line(kind, eta, noise_free):
    oracle = oracle_frontier_cubic if kind == "cubic" else oracle_frontier_logistic
    res = fit_elementary(FunctionalSpec.mean(), eta, POSITIVE_SLOPE, noise_free[kind])
    assert np.max(np.abs(res.beta - oracle(eta))) <= 0.05


POSITIVE_SLOPE = ModelFamily.linear(1, bounds=[[None, None], [0, None]])


@pytest.fixture(scope="module")
def noise_free():
    return {k: generate(GeneratorSpec(k, 10**5, seed=4, noise_sd=0.0)) for k in ("cubic", "logistic")}
