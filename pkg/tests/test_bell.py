import math
from fractions import Fraction

import numpy as np
import pytest

from entropic_bell import bell, catalog, symmetry as sy
from entropic_bell.distributions import CHSH, S2233, Scenario, mix
from entropic_bell.errors import MismatchedScenario, UnsupportedScenario

from conftest import all_local_relabellings, brute_relabel


def _float_value(M, d):
    """Entrywise contraction of the block matrices in floats."""
    P = np.array([[float(v) for v in row] for row in d.matrix()])
    return float((np.array(M, dtype=float) * P).sum())


def _slack_key(coeffs: np.ndarray, bound: int, dets: np.ndarray) -> tuple:
    """Slacks on the deterministic points, scaled to coprime integers."""
    slack = bound - dets @ coeffs
    g = math.gcd(*map(int, slack))
    return tuple(int(s) // g for s in slack)


@pytest.fixture(scope="module")
def det_rows():
    return np.array([[int(v) for v in d.probs.flat] for d in sy.deterministic_points(S2233)])


@pytest.fixture(scope="module")
def oracle_i2233_orbit(det_rows):
    """The I2233 orbit rebuilt with plain loops, deduplicated by slack vectors on the 81 locals."""
    base = bell.i2233().coeffs.astype(int)
    keys = {}
    for g in all_local_relabellings(S2233.shape):
        # pulled-back coefficients: m'[a,b,x,y] = m[image of (a,b,x,y)]
        img = brute_relabel(np.arange(36).reshape(S2233.shape), *g)
        inv = np.empty(36, dtype=int)
        inv[img.ravel()] = np.arange(36)
        m = base.ravel()[np.argsort(inv)]
        keys.setdefault(_slack_key(m, 2, det_rows), m)
    return list(keys.values())


def test_values_by_contraction(pe):
    cases = [(bell.chsh(), bell.M_CHSH, catalog.p_pr(), 4), (bell.chsh(), bell.M_CHSH, catalog.p_c(), 3),
             (bell.i2233(), bell.M_I2233, catalog.p_nl(), 4), (bell.i2233(), bell.M_I2233, pe, Fraction(103, 50))]
    for f, M, d, expect in cases:
        assert bell.evaluate(f, d) == expect
        assert abs(_float_value(M, d) - float(expect)) < 1e-12
    with pytest.raises(MismatchedScenario):
        bell.evaluate(bell.chsh(), catalog.p_nl())


def test_chsh_orbits():
    assert len(bell.chsh_orbit(CHSH)) == 8
    orb = bell.chsh_orbit(S2233)
    assert len(orb) == 648
    assert orb[0] == bell.chsh_2233()
    c = catalog.p_c2233()
    assert max(bell.evaluate(f, c) for f in orb) <= 3
    with pytest.raises(UnsupportedScenario):
        bell.chsh_orbit(Scenario(2, 2, 2, 3))
    # the PR box violates exactly one of the eight
    assert sum(bell.violates(f, catalog.p_pr()) for f in bell.chsh_orbit(CHSH)) == 1


def test_chsh_lift_is_valid_on_locals(det_rows):
    # every lifted functional is a valid inequality: max over the 81 locals equals the bound
    orb = bell.chsh_orbit(S2233)
    C = np.array([[int(v) for v in f.coeffs.flat] for f in orb])
    assert (det_rows @ C.T).max(axis=0).tolist() == [3] * 648


def test_i2233_orbit_matches_loop_oracle(det_rows, oracle_i2233_orbit):
    orb = bell.i2233_orbit()
    assert len(orb) == len(oracle_i2233_orbit) == 432
    ours = {_slack_key(np.array([int(v) for v in f.coeffs.flat]), 2, det_rows) for f in orb}
    theirs = {_slack_key(m, 2, det_rows) for m in oracle_i2233_orbit}
    assert ours == theirs
    assert orb[0] == bell.i2233()


def test_pnl_violations_match_oracle(oracle_i2233_orbit):
    nl = np.array([float(v) for v in catalog.p_nl().probs.flat])
    oracle_vals = sorted((float(m @ nl) for m in oracle_i2233_orbit if m @ nl > 2 + 1e-12), reverse=True)
    rep = bell.violated_set(catalog.p_nl())
    assert [float(v.value) for v in sorted(rep.i2233_violations, key=lambda v: -v.value)] == oracle_vals
    assert len(rep.i2233_violations) == 5
    assert max(bell.evaluate_family(bell.I2233_TAG, catalog.p_nl())) == bell.evaluate(bell.i2233(), catalog.p_nl())


def test_violated_sets(pe, locals2233):
    rep = bell.violated_set(pe)
    assert rep.chsh_violations == [] and [v.index for v in rep.i2233_violations] == [1]
    iso = bell.violated_set(catalog.p_iso("4/7"))
    assert iso.chsh_violations == [] and iso.i2233_violations[0].value == Fraction(16, 7)
    assert all(bell.violated_set(d).total == 0 for d in locals2233)


def test_facet_census():
    assert bell.facet_census() == {"Positivity": 36, "CHSH": 648, "I2233": 432, "total": 1116}


def test_functional_json_and_geq():
    f = bell.i2233()
    assert bell.BellFunctional.from_json(f.to_json()) == f
    g = bell.BellFunctional.from_geq(S2233, f.coeffs, 2)
    d = catalog.pe()
    assert bell.evaluate(g, d) == -bell.evaluate(f, d) and g.bound == -2


def test_pushforward_inverts_pullback():
    op = sy.symmetry_group(S2233)[777]
    f = bell.i2233()
    d = catalog.pe()
    assert bell.evaluate(bell.pushforward(op, f), sy.apply_relabelling(op, d)) == bell.evaluate(f, d)


def test_evaluate_is_linear(locals2233):
    rng = np.random.default_rng(5)
    for f in (bell.i2233(), bell.chsh_orbit()[100]):
        d1, d2 = catalog.pe(), locals2233[int(rng.integers(81))]
        for w in (Fraction(0), Fraction(2, 7), Fraction(1)):
            m = mix([(w, d1), (1 - w, d2)])
            assert bell.evaluate(f, m) == w * bell.evaluate(f, d1) + (1 - w) * bell.evaluate(f, d2)


def test_orbit_closure(det_rows):
    orb = bell.i2233_orbit()
    keys = {_slack_key(np.array([int(v) for v in f.coeffs.flat]), 2, det_rows) for f in orb}
    rng = np.random.default_rng(11)
    group = sy.symmetry_group(S2233, exchange=False)
    for _ in range(30):
        f = orb[int(rng.integers(432))]
        g = bell.pullback(group[int(rng.integers(len(group)))], f)
        assert _slack_key(np.array([int(v) for v in g.coeffs.flat]), 2, det_rows) in keys


def test_pr_variants_pair_with_chsh_functionals():
    variants = [m.distribution for m in sy.orbit(catalog.p_pr(), exchange=True)]
    table = [[bell.violates(f, d) for f in bell.chsh_orbit(CHSH)] for d in variants]
    assert all(sum(row) == 1 for row in table)
    assert all(sum(col) == 1 for col in zip(*table))
