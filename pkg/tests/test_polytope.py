from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import linprog

from entropic_bell import bell, catalog, polytope, symmetry as sy
from entropic_bell.distributions import S2233, Distribution, mix
from entropic_bell.errors import EmptyGenerators, SignallingInput
from entropic_bell.lp import Status

from conftest import random_local_mixture

POINTS = ["0", "1/4", "1/2", "4/7", "2/3", "1"]


def float_local_weight(d: Distribution) -> float:
    """Independent float LP: max sum w over w >= 0 with D w <= p."""
    D = sy.deterministic_matrix(d.scenario).astype(float)
    p = d.numeric.ravel()
    r = linprog(-np.ones(D.shape[1]), A_ub=D, b_ub=p, bounds=[(0, None)] * D.shape[1], method="highs")
    return -r.fun


def float_joint(i, j):
    """Max eps with I2233^i, I2233^j >= 2 + eps over the CHSH polytope, in floats on all 36 entries."""
    orb_i, chsh = bell.i2233_orbit(), bell.chsh_orbit()
    rows, rhs = [], []
    for f in chsh:
        rows.append(list(f.coeffs.astype(float).ravel()) + [0]); rhs.append(3)
    for k in (i, j):
        rows.append(list(-orb_i[k - 1].coeffs.astype(float).ravel()) + [1]); rhs.append(-2)
    eq = []
    # normalization of every (a, b) block and no-signalling
    for a in range(2):
        for b in range(2):
            z = np.zeros((2, 2, 3, 3)); z[a, b] = 1
            eq.append((list(z.ravel()) + [0], 1))
    for a in range(2):
        for x in range(3):
            z = np.zeros((2, 2, 3, 3)); z[a, 0, x] = 1; z[a, 1, x] = -1
            eq.append((list(z.ravel()) + [0], 0))
    for b in range(2):
        for y in range(3):
            z = np.zeros((2, 2, 3, 3)); z[0, b, :, y] = 1; z[1, b, :, y] = -1
            eq.append((list(z.ravel()) + [0], 0))
    r = linprog(np.r_[np.zeros(36), -1], A_ub=rows, b_ub=rhs, A_eq=[e[0] for e in eq], b_eq=[e[1] for e in eq],
                bounds=[(0, None)] * 37, method="highs")
    return r.status, (-r.fun if r.status == 0 else None)


@pytest.mark.parametrize("eps", POINTS)
def test_local_weight_iso(eps):
    e = Fraction(eps)
    cert = polytope.local_weight(catalog.p_iso(e))
    assert cert.objective == (1 if e <= Fraction(1, 2) else 2 * (1 - e))
    assert cert.verify()
    assert abs(float(cert.objective) - float_local_weight(catalog.p_iso(e))) < 1e-9


@pytest.mark.parametrize("eps", POINTS)
def test_local_weight_cg(eps):
    e = Fraction(eps)
    cert = polytope.local_weight(catalog.p_cg(e))
    assert cert.objective == (1 if e <= Fraction(4, 7) else (17 - 14 * e) / 9)
    assert cert.verify()


def test_decomposition_and_separation():
    ok, cert = polytope.is_local(catalog.p_c2233())
    assert ok and mix(polytope.local_decomposition(cert)) == catalog.p_c2233()
    ok, cert = polytope.is_local(catalog.p_nl())
    assert not ok and cert.objective == 0
    sep = cert.dual
    assert bell.evaluate(sep, catalog.p_nl()) > sep.bound
    assert all(bell.evaluate(sep, d) <= sep.bound for d in sy.deterministic_points(S2233))
    sig = Distribution.from_function(S2233, lambda a, b, x, y: Fraction(int(x == y == 0)) if a == b == 0
                                     else Fraction(int(x == y == 1)))
    with pytest.raises(SignallingInput):
        polytope.local_weight(sig)


def test_certificate_tamper_detected():
    cert = polytope.local_weight(catalog.p_iso("2/3"))
    cert.weights[0] += 1
    assert not cert.verify()


@settings(max_examples=25)
@given(seed=st.integers(0, 2**32 - 1))
def test_local_weight_is_relabelling_invariant(seed):
    rng = np.random.default_rng(seed)
    e = Fraction(int(rng.integers(0, 8)), 7)
    pts = sy.deterministic_points(S2233)
    d = mix([("1/2", catalog.p_iso(e)), ("1/2", random_local_mixture(rng, pts))])
    op = sy.symmetry_group(S2233)[int(rng.integers(10368))]
    assert polytope.local_weight(d).objective == polytope.local_weight(sy.apply_relabelling(op, d)).objective


@pytest.mark.parametrize("j", [2, 17, 253, 325, 432])
def test_joint_violation_against_float_lp(j):
    cert = polytope.joint_violation_lp(1, j)
    assert cert.verify()
    status, obj = float_joint(1, j)
    if cert.status is Status.INFEASIBLE:
        assert status == 2
    else:
        assert cert.objective == 0 and abs(obj) < 1e-9


def test_single_facet_lp_values():
    assert polytope.joint_violation_lp(1, None).objective == Fraction(2, 3)
    assert polytope.joint_violation_lp(1, 253, include_chsh=False).objective == Fraction(3, 2)


def test_vertex_verification():
    model = polytope.pi_chsh_model(with_i2233_floor=True)
    r = polytope.verify_vertex(catalog.p_iso("4/7"), model)
    assert r.feasible and not r.extremal
    pr = Distribution.from_function(S2233, lambda a, b, x, y: catalog.p_pr().probs[a, b, x, y]
                                    if x < 2 and y < 2 else 0)
    assert not polytope.verify_vertex(pr, polytope.pi_chsh_model()).feasible
    v8 = polytope.verify_vertex(catalog.table1_vertex(8), model)
    assert v8.feasible and v8.extremal and v8.rank == 24


def test_orbit_counts():
    locs = [catalog.table1_vertex(k) for k in catalog.TABLE1_LOCAL]
    assert polytope.orbit_vertex_count(locs) == 81
    assert polytope.orbit_vertex_count([catalog.p_nl()], exchange=False) == 432


def test_in_hull():
    pts = list(sy.deterministic_points(S2233))
    assert polytope.in_hull(catalog.p_iso("1/2"), pts)[0]
    assert not polytope.in_hull(catalog.p_iso("3/5"), pts)[0]
    with pytest.raises(EmptyGenerators):
        polytope.in_hull(catalog.pe(), [])


def test_union_of_identical_polytopes_is_convex():
    pts = list(sy.deterministic_points(S2233))[:10]
    P = polytope.PolytopeModel(S2233, pts)
    assert polytope.union_is_convex([P, polytope.PolytopeModel(S2233, list(pts))]).convex is True


def _relabelled_polytopes(eps):
    pts = list(sy.deterministic_points(S2233))
    orb = [m.distribution for m in sy.orbit(catalog.p_iso(eps))]
    return [polytope.PolytopeModel(S2233, [p] + pts) for p in orb]


@pytest.mark.slow
def test_union_of_relabelled_polytopes():
    # the group acts transitively on the orbit and fixes the local set, so pairs (1, j) cover all pairs
    polys = _relabelled_polytopes(Fraction(4, 7))
    assert polytope.union_is_convex(polys, pairs=[(0, j) for j in range(1, 432)]).convex is True
    rep = polytope.union_is_convex(_relabelled_polytopes(Fraction(3, 5)), pairs=[(0, 1)])
    assert rep.convex is False and rep.witness is not None
