import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from elicit.errors import NonConvex, OutOfRange
from elicit.functionals import DiscreteDistribution, FunctionalSpec, elementary_score, functional_interval
from elicit.mixtures import (
    BregmanGenerator,
    MixtureMeasure,
    bregman_loss,
    mixture_from_generator,
    mixture_loss,
    mixture_risk,
)

MEAN = FunctionalSpec.mean()
SPECS = [MEAN, FunctionalSpec.second_moment(), FunctionalSpec.quantile(0.25), FunctionalSpec.expectile(0.8)]
LEB = MixtureMeasure.lebesgue(-100, 100)

coord = st.floats(-10, 10, allow_nan=False)


def quad_oracle(spec, H, z, y):
    """Adaptive quadrature of S_eta against each segment plus the atoms."""
    total = sum(w * elementary_score(spec, eta, z, y) for eta, w in H.atoms)
    a, b = min(z, y), max(z, y)
    for lo, hi, d in H.segments:
        lo, hi = max(lo, a), min(hi, b)
        if hi > lo:
            val, _ = integrate.quad(lambda e: elementary_score(spec, e, z, y), lo, hi, epsabs=1e-13, epsrel=1e-12)
            total += d * val
    return total


# ------------------------------------------------------------ measures


def test_measure_validation():
    with pytest.raises(ValueError):
        MixtureMeasure(atoms=[(0.0, -1.0)])
    with pytest.raises(ValueError):
        MixtureMeasure(segments=[(1.0, 0.0, 1.0)])
    with pytest.raises(ValueError):
        MixtureMeasure(segments=[(0.0, 2.0, 1.0), (1.0, 3.0, 1.0)])
    with pytest.raises(ValueError):
        MixtureMeasure(segments=[(0.0, np.inf, 1.0)])


def test_json_round_trip():
    H = MixtureMeasure(atoms=[(0.5, 2.0)], segments=[(1.0, 2.0, 0.5), (-1.0, 0.0, 3.0)])
    assert MixtureMeasure.from_json(H.to_json()).to_json() == H.to_json()
    assert H.to_json()["segments"][0] == [-1.0, 0.0, 3.0]


def test_density_and_mass():
    H = MixtureMeasure(atoms=[(0.0, 1.5)], segments=[(0.0, 1.0, 2.0), (3.0, 4.0, 1.0)])
    assert H.density(np.array([-1.0, 0.0, 0.999, 1.0, 2.0, 3.5, 4.0])).tolist() == [0, 2, 2, 0, 0, 1, 0]
    assert H.total_mass == pytest.approx(4.5)
    assert MixtureMeasure.window(2.0, 0.25).total_mass == pytest.approx(1.0)


# ------------------------------------------------------------ examples


@pytest.mark.parametrize(
    "spec, H, z, y, expected",
    [
        (MEAN, LEB, 2.0, 0.0, 2.0),
        (MEAN, MixtureMeasure.point(1.0), 2.0, 0.0, 1.0),
        (FunctionalSpec.quantile(0.25), LEB, 0.0, 4.0, 1.0),
    ],
)
def test_mixture_examples(spec, H, z, y, expected):
    assert mixture_loss(spec, H, z, y) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize(
    "phi, z, y, expected",
    [
        (BregmanGenerator.square(), 2.0, 0.0, 4.0),
        (BregmanGenerator.square(), 5.0, 5.0, 0.0),
        (BregmanGenerator.quartic(), 1.0, 0.0, 3.0),
    ],
)
def test_bregman_examples(phi, z, y, expected):
    assert bregman_loss(phi, z, y) == pytest.approx(expected)


def test_square_generator_gives_uniform_density_two():
    H = mixture_from_generator(BregmanGenerator.square(), (-10, 10), 100)
    assert np.all(H.segments[:, 2] == 2.0)
    assert H.segments[0, 0] == -10 and H.segments[-1, 1] == 10
    assert H.total_mass == pytest.approx(40.0)


def test_quartic_density_matches_second_derivative():
    H = mixture_from_generator(BregmanGenerator.quartic(), (-10, 10), 10**5)
    assert H.density(2.0) == pytest.approx(48.0, abs=1e-3)


def test_square_mixture_equals_bregman():
    rng = np.random.default_rng(0)
    H = mixture_from_generator(BregmanGenerator.square(), (-100, 100), 1000)
    z, y = rng.uniform(-10, 10, (2, 200))
    np.testing.assert_allclose(mixture_loss(MEAN, H, z, y), bregman_loss(BregmanGenerator.square(), z, y), atol=1e-8)


def test_quartic_mixture_approximates_bregman():
    rng = np.random.default_rng(1)
    H = mixture_from_generator(BregmanGenerator.quartic(), (-3, 3), 6000)
    z, y = rng.uniform(-2, 2, (2, 200))
    got = mixture_loss(MEAN, H, z, y)
    want = bregman_loss(BregmanGenerator.quartic(), z, y)
    np.testing.assert_allclose(got, want, rtol=1e-5, atol=1e-6)


def test_tabulated_generator():
    t = np.linspace(-2, 2, 41)
    phi = BregmanGenerator.tabulated(t, t**2)
    assert bregman_loss(phi, 1.0, 0.0) == pytest.approx(1.0 - 0.1, abs=1e-12)  # left slope at 1 is 1.9
    with pytest.raises(OutOfRange):
        bregman_loss(phi, 3.0, 0.0)
    with pytest.raises(NonConvex):
        BregmanGenerator.tabulated(t, -(t**2))
    H = mixture_from_generator(phi, (-1, 1), 20)
    np.testing.assert_allclose(H.segments[:, 2], 2.0, atol=1e-9)
    with pytest.raises(OutOfRange):
        mixture_from_generator(phi, (-3, 1), 20)


def test_generator_window_validation():
    with pytest.raises(ValueError):
        mixture_from_generator(BregmanGenerator.square(), (1, 0), 10)
    with pytest.raises(ValueError):
        mixture_from_generator(BregmanGenerator.square(), (0, 1), 1)


# ---------------------------------------------------------- properties


@settings(max_examples=300, deadline=None)
@given(z=coord, y=coord, c=st.floats(0.1, 5))
def test_lebesgue_mean_is_half_squared_error(z, y, c):
    H = MixtureMeasure.lebesgue(-20, 20, c)
    assert mixture_loss(MEAN, H, z, y) == pytest.approx(c * (z - y) ** 2 / 2, abs=1e-9)


@pytest.mark.parametrize("alpha", [0.1, 0.5, 0.9])
@settings(max_examples=200, deadline=None)
@given(z=coord, y=coord)
def test_lebesgue_quantile_is_pinball(alpha, z, y):
    pinball = (1 - alpha) * max(z - y, 0) + alpha * max(y - z, 0)
    assert mixture_loss(FunctionalSpec.quantile(alpha), LEB, z, y) == pytest.approx(pinball, abs=1e-9)


@pytest.mark.parametrize("tau", [0.2, 0.5, 0.8])
@settings(max_examples=100, deadline=None)
@given(z=coord, y=coord)
def test_lebesgue_expectile_is_asymmetric_square(tau, z, y):
    w = (1 - tau) if z > y else tau
    assert mixture_loss(FunctionalSpec.expectile(tau), LEB, z, y) == pytest.approx(w * (z - y) ** 2, abs=1e-9)


@pytest.mark.parametrize("spec", SPECS)
def test_closed_form_matches_quadrature(spec):
    rng = np.random.default_rng(4)
    H = MixtureMeasure(atoms=[(0.3, 0.7)], segments=[(-4.0, -1.0, 0.5), (-1.0, 2.0, 1.5), (3.0, 6.0, 0.2)])
    for z, y in rng.uniform(-6, 7, (60, 2)):
        assert mixture_loss(spec, H, z, y) == pytest.approx(quad_oracle(spec, H, z, y), rel=1e-10, abs=1e-10)


@pytest.mark.parametrize("spec", SPECS)
def test_linear_in_the_measure(spec):
    rng = np.random.default_rng(6)
    H1 = MixtureMeasure(atoms=[(1.0, 0.5)], segments=[(-2.0, 1.5, 1.0)])
    H2 = MixtureMeasure(atoms=[(-0.5, 2.0)], segments=[(0.0, 3.0, 0.25), (4.0, 5.0, 1.0)])
    z, y = rng.uniform(-4, 6, (2, 500))
    np.testing.assert_allclose(
        mixture_loss(spec, H1 + H2, z, y), mixture_loss(spec, H1, z, y) + mixture_loss(spec, H2, z, y), atol=1e-10
    )
    np.testing.assert_allclose(mixture_loss(spec, H1.scaled(3.0), z, y), 3 * mixture_loss(spec, H1, z, y), atol=1e-10)


@pytest.mark.parametrize("spec", SPECS)
def test_risk_is_mean_loss(spec):
    rng = np.random.default_rng(8)
    H = MixtureMeasure(atoms=[(0.0, 1.0)], segments=[(-1.0, 2.0, 0.7)])
    z, y = rng.normal(size=(2, 1000))
    assert mixture_risk(spec, H, z, y) == pytest.approx(np.mean(mixture_loss(spec, H, z, y)), rel=1e-12)


@pytest.mark.parametrize("spec", SPECS)
def test_mixture_losses_are_consistent(spec):
    rng = np.random.default_rng(12)
    for _ in range(30):
        k = int(rng.integers(1, 6))
        dist = DiscreteDistribution(rng.uniform(-3, 3, k), rng.dirichlet(np.ones(k)))
        H = MixtureMeasure(atoms=np.column_stack([rng.uniform(-4, 10, 3), rng.uniform(0, 2, 3)]))
        iv = functional_interval(spec, dist)
        zs = np.linspace(-4, 10, 57)
        risk = np.array([mixture_loss(spec, H, z, dist.values) @ dist.probs for z in zs])
        for t in (iv.lower, iv.upper):
            assert mixture_loss(spec, H, t, dist.values) @ dist.probs <= risk.min() + 1e-12
