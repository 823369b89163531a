import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import entropy as scipy_entropy

from entropic_bell import catalog, entropy as en, symmetry as sy
from entropic_bell.distributions import CHSH, S2233, Distribution, Scenario, mix
from entropic_bell.errors import NonPositiveOrder, NotADistribution, OrderNotAboveOne, SignallingInput, WrongInputCount

from conftest import random_local_mixture

probs = st.lists(st.floats(0, 1), min_size=1, max_size=12).filter(lambda v: sum(v) > 0.1).map(
    lambda v: [x / sum(v) for x in v])


def test_shannon_examples():
    assert en.shannon([1, 0, 0]) == 0
    assert abs(en.shannon([0.5, 0.5]) - math.log(2)) < 1e-15
    assert abs(en.shannon([Fraction(1, 9)] * 9) - math.log(9)) < 1e-14
    with pytest.raises(NotADistribution):
        en.shannon([0.5, 0.6])


@given(p=probs)
def test_shannon_matches_scipy(p):
    assert abs(en.shannon(p) - scipy_entropy(p)) < 1e-12


@given(p=probs, q=st.floats(0.05, 20).filter(lambda q: abs(q - 1) > 1e-3))
def test_tsallis_matches_direct_formula(p, q):
    x = np.array(p)
    assert abs(en.tsallis(p, q) - (1 - np.sum(x[x > 0] ** q)) / (q - 1)) < 1e-10


def test_tsallis_examples():
    assert en.tsallis([0.5, 0.5], 2) == 0.5
    assert en.tsallis([1, 0], 3.7) == 0
    with pytest.raises(NonPositiveOrder):
        en.tsallis([1], 0)
    # first-order deviation at q = 1 + h is -(h/2) sum p ln^2 p, i.e. (h/2) ln^2 3 here
    h = 1e-4
    dev = math.log(3) - en.tsallis([1 / 3] * 3, 1 + h)
    assert abs(dev - h / 2 * math.log(3) ** 2) < 1e-8
    assert abs(dev) < 1e-4


@given(p=probs, h=st.floats(1e-9, 1e-5))
def test_tsallis_continuity_at_one(p, h):
    s = en.shannon(p)
    assert abs(en.tsallis(p, 1 + h) - s) < 10 * h * (1 + s * s) + 1e-12


def test_entropy_vector_equalities():
    a, b = en.entropy_vector(catalog.p_pr()), en.entropy_vector(catalog.p_c())
    assert np.abs(a.as_array() - b.as_array()).max() < 1e-12
    a, b = en.entropy_vector(catalog.p_nl()), en.entropy_vector(catalog.p_c2233())
    assert np.abs(a.as_array() - b.as_array()).max() < 1e-12
    v = en.entropy_vector(catalog.p_noise(S2233))
    assert np.allclose(v.as_array(), [math.log(3)] * 4 + [math.log(9)] * 4, atol=1e-14)
    assert v["X0Y1"] == v[5]


def test_entropy_vector_errors():
    with pytest.raises(WrongInputCount):
        en.entropy_vector(Distribution.from_function(Scenario(3, 2, 2, 2), lambda *_: Fraction(1, 4)))
    sig = Distribution.from_function(CHSH, lambda a, b, x, y: Fraction(int(x == y == a * b)))
    with pytest.raises(SignallingInput):
        en.entropy_vector(sig)


def test_bc_maxima():
    assert abs(en.bc(mix([("1/2", catalog.p_pr()), ("1/2", catalog.p_c())])) - math.log(2)) < 1e-9
    d = mix([("1/3", catalog.p_nl()), ("1/3", catalog.p_nl_star()), ("1/3", catalog.p_c2233())])
    assert abs(en.bc(d) - math.log(3)) < 1e-9
    assert abs(en.bc(catalog.pe()) - 0.0199733) < 1e-6


def test_bc_forms_hand_evaluation():
    # BC4 = H(X0Y0) vs sums of conditionals, written out directly
    v = en.entropy_vector(catalog.pe()).as_dict()
    bc4 = v["X0"] + v["Y0"] - v["X0Y0"] - v["X0Y1"] - v["X1Y0"] + v["X1Y1"]
    assert abs(en.bc(catalog.pe()) - bc4) < 1e-15
    r = en.bc_values(en.entropy_vector(catalog.pe()))
    assert r[4] == r.values[3] and r.violated == (False, False, False, True)


@settings(max_examples=40)
@given(seed=st.integers(0, 2**32 - 1), q=st.sampled_from([1.0, 2.0, 8.0]))
def test_bc_holds_on_local_mixtures(seed, q, locals2233):
    rng = np.random.default_rng(seed)
    for _ in range(25):
        d = random_local_mixture(rng, locals2233)
        assert max(en.bc_values(en.entropy_vector(d, q)).values) <= en.TOL


@settings(max_examples=30)
@given(seed=st.integers(0, 2**32 - 1), q=st.sampled_from([1.0, 2.0, 8.0]))
def test_entropy_vector_relabelling_covariance(seed, q):
    rng = np.random.default_rng(seed)
    d = catalog.pe()
    op = sy.symmetry_group(S2233)[int(rng.integers(10368))]
    a = np.sort(en.entropy_vector(d, q).as_array()[:4])
    b = np.sort(en.entropy_vector(sy.apply_relabelling(op, d), q).as_array()[:4])
    # permuting inputs/parties permutes singletons and pairs separately; output relabels change nothing
    assert np.allclose(a, b, atol=1e-14)
    a2 = np.sort(en.entropy_vector(d, q).as_array()[4:])
    b2 = np.sort(en.entropy_vector(sy.apply_relabelling(op, d), q).as_array()[4:])
    assert np.allclose(a2, b2, atol=1e-14)


def test_shannon_closed_form_constant():
    # one-point confirmation of the scale, then agreement everywhere
    ratio = en.bc(catalog.iso_mix("3/5", "1/10")) / en.f_closed_form(0.6, 0.1)
    assert abs(ratio - 1 / 3) < 1e-12
    for e in np.linspace(0, 1, 11):
        assert en.f_closed_form(e, 0) == 0
        for v in np.linspace(0, 1, 11):
            d = catalog.iso_mix(Fraction(repr(float(e))), Fraction(repr(float(v))))
            assert abs(en.bc(d) - en.f_closed_form(e, v) * en.SHANNON_F_SCALE) < 1e-9


@pytest.mark.parametrize("q", [1.5, 2.0, 8.0])
def test_tsallis_closed_form(q):
    for e in np.linspace(0, 1, 11):
        for v in np.linspace(0, 1, 11):
            d = catalog.iso_mix(Fraction(repr(float(e))), Fraction(repr(float(v))))
            assert abs(en.bc(d, q) - en.g_closed_form(q, e, v) / (q - 1)) < 1e-9
    with pytest.raises(OrderNotAboveOne):
        en.g_closed_form(1.0, 0.5, 0.5)


@pytest.mark.parametrize("q", [1.5, 2.0, 8.0])
def test_g_slope_at_zero(q):
    # g(v)/v at v = e^-40 against the stated limit; a finite difference at moderate v as a second route
    for e in (0.3, 4 / 7, 0.8):
        limit = q / 3 ** q * (7 * e - 4)
        assert abs(en.g_over_v(q, e, -40.0) - limit) < 1e-8
        h = 1e-6
        assert abs(en.g_closed_form(q, e, h) / h - limit) < 50 * max(h ** (q - 1), h)


def test_scale_free_forms_agree_with_direct_values():
    for e in (0.2, 0.6, 0.9):
        for v in (1e-3, 0.1, 0.7):
            assert abs(en.f_over_v(e, math.log(v)) - en.f_closed_form(e, v) / v) < 1e-8
            for q in (2.0, 8.0):
                assert abs(en.g_over_v(q, e, math.log(v)) - en.g_closed_form(q, e, v) / v) < 1e-8
            d = catalog.iso_mix(Fraction(repr(float(e))), Fraction(repr(float(v))))
            for q in (1.0, 2.0):
                direct = en.bc(d, q) / v
                assert abs(en.bc_over_v(catalog.p_c2233(), catalog.p_iso(Fraction(repr(float(e)))), q, math.log(v)) - direct) < 1e-8


def test_scale_free_sign_far_below_underflow():
    # Shannon: f/v ~ (4 - 7 eps) ln v as v -> 0, so the sign flips at 4/7
    assert en.f_over_v(0.58, -1e6) > 0 > en.f_over_v(0.56, -1e6)
    # Tsallis: g/v tends to q 3^-q (7 eps - 4)
    assert en.g_over_v(2.0, 0.58, -1e6) > 0 > en.g_over_v(2.0, 0.56, -1e6)


@pytest.mark.parametrize("q", [1.0, 2.0, 8.0])
def test_degeneracy_on_mixing_family(q):
    for e, v in [("3/5", "1/10"), ("1/3", "4/5"), ("1", "1/2")]:
        h = en.entropy_vector(catalog.iso_mix(e, v), q)
        assert max(h[:4]) - min(h[:4]) < 1e-15
        assert abs(h["X0Y0"] - h["X0Y1"]) < 1e-15 and abs(h["X0Y0"] - h["X1Y0"]) < 1e-15
        r = en.bc_values(h)
        assert abs(r[1] - r[2]) < 1e-14 and abs(r[1] - r[3]) < 1e-14 and r[1] <= en.TOL


@given(seed=st.integers(0, 2**32 - 1))
def test_within_block_permutation_invariance(seed):
    # permuting the 9 entries of one (a, b) block arbitrarily leaves that joint entropy unchanged
    rng = np.random.default_rng(seed)
    blocks = [list(b.flat) for b in (catalog.pe().probs[a, b] for a in range(2) for b in range(2))]
    for blk in blocks:
        perm = rng.permutation(9)
        for q in (1.0, 2.0, 8.0):
            assert abs(en.tsallis(blk, q) - en.tsallis([blk[i] for i in perm], q)) < 1e-14


@given(p=probs)
def test_tsallis_near_one_both_sides(p):
    s = en.shannon(p)
    assert abs(en.tsallis(p, 1 + 1e-6) - s) < 1e-4
    assert abs(en.tsallis(p, 1 - 1e-6) - s) < 1e-4


def test_f_sign_statements():
    logv = -np.logspace(7, -3, 400)
    assert max(en.f_over_v(4 / 7, lv) for lv in logv) <= 0
    assert max(en.f_closed_form(4 / 7, v) for v in np.linspace(0, 1, 1001)) <= 0
    assert any(en.f_closed_form(0.6, v) > 0 for v in np.logspace(-12, -1, 200))
