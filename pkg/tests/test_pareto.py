import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from elicit.empirics import Dataset, murphy_curve
from elicit.errors import FingerprintMismatch
from elicit.functionals import FunctionalSpec
from elicit.mixtures import MixtureMeasure, mixture_risk
from elicit.models import ModelFamily
from elicit.pareto import Relation, dominates, eta_scan, half_split_tolerance, pareto_filter

MEAN = FunctionalSpec.mean()
LIN = ModelFamily.linear(1)


def random_candidates(seed, k=6, n=40):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=n)
    y = 1 + x + rng.normal(size=n)
    betas = rng.normal([1, 1], 0.7, size=(k, 2))
    return [(b, murphy_curve(MEAN, LIN.predict(b, x[:, None]), y)) for b in betas], x, y


def constant_curve(c, y):
    return murphy_curve(MEAN, np.full(len(y), c), y)


# ------------------------------------------------------------ examples


def test_identical_curves_are_equal():
    y = np.array([0.0, 1.0, 2.0, 3.0])
    c = constant_curve(1.0, y)
    assert dominates(c, c, tol=1e-9).relation is Relation.EQUAL


def test_mean_beats_shifted_constant():
    y = np.array([0.0, 1.0, 2.0, 3.0])
    v = dominates(constant_curve(1.5, y), constant_curve(2.5, y))
    assert v.relation is Relation.STRICTLY_DOMINATES
    assert 1.5 < v.witness_eta <= 2.5
    assert dominates(constant_curve(2.5, y), constant_curve(1.5, y)).relation is Relation.STRICTLY_DOMINATED_BY


def test_straddling_predictions_are_incomparable():
    y = np.array([0.0])
    a = murphy_curve(MEAN, [1.0], y)
    b = murphy_curve(MEAN, [-1.0], y)
    assert dominates(a, b).relation is Relation.INCOMPARABLE


def test_fingerprint_mismatch():
    with pytest.raises(FingerprintMismatch):
        dominates(constant_curve(0.0, np.array([0.0, 1.0])), constant_curve(0.0, np.array([0.0, 2.0])))
    q = murphy_curve(FunctionalSpec.quantile(0.5), [0.0, 0.0], [0.0, 1.0])
    with pytest.raises(FingerprintMismatch):
        dominates(q, constant_curve(0.0, np.array([0.0, 1.0])))


def test_filter_examples():
    y = np.array([0.0, 1.0, 2.0, 3.0])
    one = pareto_filter([([1.5], constant_curve(1.5, y))], tol=0.0)
    assert [e.status for e in one.entries] == ["Optimal"]
    two = pareto_filter([([1.5], constant_curve(1.5, y)), ([2.5], constant_curve(2.5, y))], tol=0.0)
    assert [e.status for e in two.entries] == ["Optimal", "Dominated(0)"]
    dup = pareto_filter([([1.5], constant_curve(1.5, y))] * 2, tol=0.0)
    assert all(e.optimal for e in dup.entries)
    with pytest.raises(ValueError):
        pareto_filter([])


def test_half_split_tolerance_scales_like_noise():
    rng = np.random.default_rng(3)
    y = rng.normal(size=4000)
    curves = [constant_curve(c, y) for c in (0.0, 0.3)]
    tol = half_split_tolerance(curves)
    assert 0 < tol < 0.05
    assert pareto_filter([([0.0], curves[0]), ([0.3], curves[1])]).tolerance == pytest.approx(tol)


# ---------------------------------------------------------- properties


@pytest.mark.parametrize("seed", range(100))
def test_weak_dominance_reflexive_and_transitive(seed):
    cands, _, _ = random_candidates(seed, k=5)
    curves = [c for _, c in cands]
    weak = {(i, j): dominates(a, b, tol=0.0).weakly_dominates for (i, a), (j, b) in itertools.permutations(enumerate(curves), 2)}
    for c in curves:
        assert dominates(c, c, tol=0.0).weakly_dominates
    for i, j, k in itertools.permutations(range(len(curves)), 3):
        if weak[i, j] and weak[j, k]:
            assert weak[i, k]


def test_dominance_on_exact_curves_is_nested():
    # a family of nested constants: closer to the mean is better at every level
    y = np.linspace(-1, 1, 21)
    curves = [constant_curve(c, y) for c in (0.0, 0.5, 1.0, 2.0)]
    for i, j in itertools.combinations(range(4), 2):
        assert dominates(curves[i], curves[j], tol=1e-12).weakly_dominates


@pytest.mark.parametrize("seed", range(30))
def test_strict_pointwise_minimisers_survive(seed):
    cands, _, _ = random_candidates(seed, k=8)
    pts = np.unique(np.concatenate([c.knots for _, c in cands]))
    prof = np.array([np.concatenate(c.evaluate(pts)) for _, c in cands])
    res = pareto_filter(cands, tol=0.0)
    for i in range(len(cands)):
        others = np.delete(prof, i, axis=0)
        if np.any(prof[i] < others.min(axis=0)):
            assert res.entries[i].optimal


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10**6), perm_seed=st.integers(0, 10**6))
def test_filter_is_permutation_invariant(seed, perm_seed):
    cands, _, _ = random_candidates(seed, k=6, n=25)
    cands.append(cands[0])  # a duplicate must not change anything either
    perm = np.random.default_rng(perm_seed).permutation(len(cands))
    base = [e.optimal for e in pareto_filter(cands, tol=0.0).entries]
    shuffled = pareto_filter([cands[p] for p in perm], tol=0.0).entries
    assert [shuffled[k].optimal for k in range(len(cands))] == [base[p] for p in perm]


@pytest.mark.parametrize("seed", range(20))
def test_curve_dominance_implies_mixture_dominance(seed):
    cands, x, y = random_candidates(seed, k=4)
    rng = np.random.default_rng(1000 + seed)
    lo, hi = min(y.min(), x.min()) - 1, max(y.max(), x.max()) + 3
    for (ba, ca), (bb, cb) in itertools.permutations(cands, 2):
        if not dominates(ca, cb, tol=0.0).weakly_dominates:
            continue
        for _ in range(50):
            H = MixtureMeasure(atoms=np.column_stack([rng.uniform(lo, hi, 3), rng.uniform(0, 2, 3)]))
            ra = mixture_risk(MEAN, H, LIN.predict(ba, x[:, None]), y)
            rb = mixture_risk(MEAN, H, LIN.predict(bb, x[:, None]), y)
            assert ra <= rb + 1e-12


# ------------------------------------------------------------ eta_scan


def test_scan_keeps_order_and_reports_failures():
    data = Dataset(np.array([[0.0], [1.0], [2.0]]), np.array([0.0, 1.0, 2.0]))
    fam = ModelFamily.constant(bounds=[[10, 11]])
    out = eta_scan(MEAN, ModelFamily.constant(), data, [2.0, -1.0, 0.5])
    assert [e for e, _ in out] == [2.0, -1.0, 0.5]
    with pytest.raises(ValueError):
        eta_scan(MEAN, fam, data, [])


def test_scan_threads_match_serial(monkeypatch):
    data = Dataset(np.arange(10.0)[:, None], np.arange(10.0) ** 0.5)
    grid = [0.5, 1.0, 2.0]
    serial = eta_scan(MEAN, ModelFamily.constant(), data, grid)
    monkeypatch.setenv("ELICIT_THREADS", "3")
    threaded = eta_scan(MEAN, ModelFamily.constant(), data, grid)
    for (e1, r1), (e2, r2) in zip(serial, threaded):
        assert e1 == e2 and r1.minimizer_interval == r2.minimizer_interval
