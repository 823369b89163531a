import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from entropic_bell import catalog
from entropic_bell.distributions import S2233, Distribution

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def brute_relabel(p: np.ndarray, pa, pb, sa, sb) -> np.ndarray:
    """new[pa[a], pb[b], sa[a][x], sb[b][y]] = old[a, b, x, y], written as plain loops."""
    out = np.empty_like(p)
    for a, b, x, y in itertools.product(*map(range, p.shape)):
        out[pa[a], pb[b], sa[a][x], sb[b][y]] = p[a, b, x, y]
    return out


def all_local_relabellings(shape):
    ia, ib, oa, ob = shape
    for pa in itertools.permutations(range(ia)):
        for pb in itertools.permutations(range(ib)):
            for sa in itertools.product(itertools.permutations(range(oa)), repeat=ia):
                for sb in itertools.product(itertools.permutations(range(ob)), repeat=ib):
                    yield pa, pb, sa, sb


@pytest.fixture(scope="session")
def locals2233():
    from entropic_bell.symmetry import deterministic_points
    return deterministic_points(S2233)


def random_local_mixture(rng, points, k=None) -> Distribution:
    k = k or int(rng.integers(1, 6))
    idx = rng.choice(len(points), size=k, replace=False)
    raw = rng.integers(1, 20, size=k)
    total = int(raw.sum())
    return_mix = [(Fraction(int(r), total), points[i]) for r, i in zip(raw, idx)]
    from entropic_bell.distributions import mix
    return mix(return_mix)


@pytest.fixture
def pe():
    return catalog.pe()


# acceptance criteria report ---------------------------------------------------

ACCEPTANCE: list[tuple[str, bool, str]] = []


def record(criterion: str, ok: bool, detail: str = "") -> None:
    line = f"{'PASS' if ok else 'FAIL'}  {criterion}" + (f"  ({detail})" if detail else "")
    print(line)
    ACCEPTANCE.append((criterion, bool(ok), detail))
    assert ok, line


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for criterion, ok, detail in ACCEPTANCE:
            terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {criterion}" + (f"  ({detail})" if detail else ""))
