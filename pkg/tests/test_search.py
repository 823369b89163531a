from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from entropic_bell import catalog, entropy as en, search
from entropic_bell.distributions import mix
from entropic_bell.errors import EmptyGenerators, EpsOutOfRange, MismatchedScenario


@settings(max_examples=30)
@given(seed=st.integers(0, 2**32 - 1), q=st.sampled_from([1.0, 1.5, 2.0, 8.0]), which=st.integers(1, 4))
def test_batched_bc_matches_scalar(seed, q, which):
    rng = np.random.default_rng(seed)
    gens = search.search_generators(Fraction(int(rng.integers(0, 11)), 10))
    w = rng.dirichlet(np.ones(len(gens)))
    flat = w @ np.array([g.numeric.ravel() for g in gens])
    exact = mix([(Fraction(float(x)).limit_denominator(10**12), g) for x, g in zip(w[:-1], gens[:-1])]
                + [(1 - sum(Fraction(float(x)).limit_denominator(10**12) for x in w[:-1]), gens[-1])])
    assert abs(float(search.bc_batch(flat, q, which)) - en.bc(exact, q, which)) < 1e-9


def test_restricted_generator_set():
    gens = search.restrict_to_nonclassical_generators(Fraction(5, 9))
    assert len(gens) == 31
    # the table1 locals are exactly the deterministic points saturating I2233^1
    assert set(gens[1:]) == set(search.saturating_locals())
    with pytest.raises(EpsOutOfRange):
        search.restrict_to_nonclassical_generators(Fraction(3, 5))


def test_errors():
    with pytest.raises(EmptyGenerators):
        search.maximize_bc(search.SearchProblem([]))
    with pytest.raises(MismatchedScenario):
        search.maximize_bc(search.SearchProblem([catalog.pe(), catalog.p_pr()]))


def test_search_recovers_pe_value():
    gens = [catalog.table1_vertex(k) for k in (8, 18, 26, 47)]
    res = search.maximize_bc(search.SearchProblem(gens, restarts=20))
    assert res.best_value >= 0.0199733 - 1e-9
    assert res.label == search.VIOLATION


def test_search_is_deterministic():
    prob = search.SearchProblem(search.search_generators(Fraction(3, 5)), restarts=10, seed=7)
    a, b = search.maximize_bc(prob), search.maximize_bc(prob)
    assert a.best_value == b.best_value and np.array_equal(a.best_weights, b.best_weights)


def test_search_below_threshold():
    res = search.maximize_bc(search.SearchProblem(search.search_generators(Fraction(5, 9)), restarts=30))
    assert res.best_value <= 1e-9 and res.label == search.NO_VIOLATION


def test_region_scan_and_boundary():
    scan = search.region_scan([1.0, 2.0], grid=41)
    assert not scan.mask[:, scan.eps <= 4 / 7].any()
    assert scan.mask[1].any()
    lo, hi = search.violation_boundary(2.0, tol=1e-3)
    assert lo <= 4 / 7 <= hi
    with pytest.raises(ValueError):
        search.region_scan([1.0], family="nope")


def test_region_scan_values_match_exact_bc():
    scan = search.region_scan([2.0], eps=[0.6], v=[0.3])
    assert abs(scan.values[0, 0, 0] - en.bc(catalog.iso_mix("3/5", "3/10"), 2.0)) < 1e-12


def test_q_sweep_on_pe():
    sw = search.q_sweep(catalog.pe(), (1, 3), 101)
    assert sw.argmax_q == 1.0
    lo, hi = sw.violation_interval
    assert lo == 1.0 and 1.4 < hi < 1.5
    assert abs(en.bc(catalog.pe(), hi)) < 1e-10


def test_footnote_chain():
    r = search.footnote_chain_check()
    assert r.ok and r.identity_holds
    assert abs(r.tsallis2_pe - en.bc(catalog.iso_mix("7/10", "2/5"), 2.0)) < 1e-15
