from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from entropic_bell import catalog
from entropic_bell.distributions import (CHSH, S2233, Distribution, Scenario, as_fraction, is_no_signalling,
                                         marginal, mix)
from entropic_bell.errors import (IndexOutOfRange, MismatchedScenario, NotADistribution, ParseError,
                                  WeightsNotNormalized)

from conftest import random_local_mixture


def test_as_fraction_paths():
    assert as_fraction("3/7") == Fraction(3, 7)
    assert as_fraction(0.1) == Fraction(1, 10)
    assert as_fraction(2) == 2
    with pytest.raises(ParseError):
        as_fraction("three")


def test_scenario_rejects_nonpositive():
    with pytest.raises(ValueError):
        Scenario(2, 0, 3, 3)
    assert Scenario.of((2, 2, 3, 3)) == S2233
    assert S2233.dim == 36 and S2233.is_symmetric


def test_validation_rejects_bad_blocks():
    good = catalog.p_pr().flat()
    bad = list(good)
    bad[0], bad[1] = bad[0] + Fraction(1, 10), bad[1]
    with pytest.raises(NotADistribution):
        Distribution.from_flat(CHSH, bad)
    neg = list(good)
    neg[0], neg[1] = -Fraction(1, 2), neg[1] + 1
    with pytest.raises(NotADistribution):
        Distribution.from_flat(CHSH, neg)
    with pytest.raises(NotADistribution):
        Distribution(CHSH, np.zeros((2, 2, 3, 3)))


def test_block_matrix_layout():
    # rows (a, x), columns (b, y): row 0 of p_PR is x=0 for a=0
    m = catalog.p_pr().matrix()
    half = Fraction(1, 2)
    assert m.tolist() == [[half, 0, half, 0], [0, half, 0, half], [half, 0, 0, half], [0, half, half, 0]]


def test_serialization_roundtrip(pe):
    assert Distribution.from_json(pe.to_json()) == pe
    assert Distribution.from_csv(pe.to_csv()) == pe
    with pytest.raises(ParseError):
        Distribution.from_json("{\"probs\": []}")
    with pytest.raises(ParseError):
        Distribution.from_csv("a,b,p00\n0,0,x\n")


def test_no_signalling_examples(pe):
    assert is_no_signalling(catalog.p_pr())
    assert is_no_signalling(pe)
    # Alice's marginal for a=0 depends on b
    sig = Distribution.from_function(CHSH, lambda a, b, x, y: Fraction(int(x == 0 and y == 0))
                                     if (a, b) == (0, 0) else Fraction(int(x == 1 and y == 0)))
    assert not is_no_signalling(sig)


def test_marginal_examples(pe):
    assert marginal(catalog.p_pr(), "A", 0) == (Fraction(1, 2), Fraction(1, 2))
    for eps in ("0", "1/3", "4/7", "1"):
        assert marginal(catalog.p_iso(eps), "A", 1) == (Fraction(1, 3),) * 3
    # column-block sums of p_e under b = 1, computed by hand from the 1/50 matrix
    assert marginal(pe, "B", 1) == (Fraction(22, 50), Fraction(2, 50), Fraction(26, 50))
    with pytest.raises(IndexOutOfRange):
        marginal(pe, "A", 2)


def test_mix_examples(pe):
    nl = catalog.p_nl()
    assert mix([(1, nl)]) == nl
    rows = [catalog.table1_vertex(k) for k in (8, 18, 26, 47)]
    assert mix(zip(("1/10", "3/10", "1/5", "2/5"), rows)) == pe
    with pytest.raises(WeightsNotNormalized):
        mix([("1/2", nl)])
    with pytest.raises(WeightsNotNormalized):
        mix([("3/2", nl), ("-1/2", nl)])
    with pytest.raises(MismatchedScenario):
        mix([("1/2", nl), ("1/2", catalog.p_pr())])


@given(seed=st.integers(0, 2**32 - 1))
def test_mix_preserves_no_signalling_and_is_linear(seed, locals2233):
    rng = np.random.default_rng(seed)
    p = random_local_mixture(rng, locals2233)
    q = random_local_mixture(rng, locals2233)
    t = Fraction(int(rng.integers(0, 11)), 10)
    m = mix([(t, p), (1 - t, q)])
    assert is_no_signalling(m)
    assert np.array_equal(m.probs, t * p.probs + (1 - t) * q.probs)
    for party in "AB":
        for x in range(2):
            lhs = marginal(m, party, x)
            rhs = tuple(t * u + (1 - t) * w for u, w in zip(marginal(p, party, x), marginal(q, party, x)))
            assert lhs == rhs
