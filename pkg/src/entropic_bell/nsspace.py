"""Affine coordinates for the no-signalling subspace.

A no-signalling distribution is fixed by the marginals p_A(x|a), p_B(y|b) and
joint terms p(xy|ab) with x, y ranging over all but the last outcome. We write
``p = offset + basis @ t`` over the C-ordered flattening of ``probs``;
``project`` recovers ``t`` from any no-signalling ``p``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import gcd, lcm

import numpy as np

from .distributions import Distribution, Scenario


@dataclass(frozen=True)
class NSCoordinates:
    scenario: Scenario
    offset: np.ndarray      # (dim,) int
    basis: np.ndarray       # (dim, n) int
    projection: np.ndarray  # (n, dim) int, projection @ basis = identity
    labels: tuple[str, ...]

    @property
    def n(self) -> int:
        return self.basis.shape[1]

    def coordinates(self, d: Distribution) -> list[Fraction]:
        flat = list(d.probs.flat)
        return [sum((Fraction(int(c)) * flat[j] for j, c in enumerate(row) if c), Fraction(0))
                for row in self.projection]


@lru_cache(maxsize=None)
def ns_coordinates(scenario) -> NSCoordinates:
    scenario = Scenario.of(scenario)
    ia, ib, oa, ob = scenario.shape
    labels: list[str] = []
    idx_a, idx_b, idx_ab = {}, {}, {}
    for a in range(ia):
        for x in range(oa - 1):
            idx_a[a, x] = len(labels)
            labels.append(f"pA({x}|{a})")
    for b in range(ib):
        for y in range(ob - 1):
            idx_b[b, y] = len(labels)
            labels.append(f"pB({y}|{b})")
    for a in range(ia):
        for b in range(ib):
            for x in range(oa - 1):
                for y in range(ob - 1):
                    idx_ab[a, b, x, y] = len(labels)
                    labels.append(f"p({x}{y}|{a}{b})")
    n = len(labels)
    offset = np.zeros(scenario.dim, dtype=np.int64)
    basis = np.zeros((scenario.dim, n), dtype=np.int64)
    proj = np.zeros((n, scenario.dim), dtype=np.int64)
    lx, ly = oa - 1, ob - 1
    for pos, (a, b, x, y) in enumerate(np.ndindex(*scenario.shape)):
        row = basis[pos]
        if x < lx and y < ly:
            row[idx_ab[a, b, x, y]] = 1
        elif x < lx:
            row[idx_a[a, x]] = 1
            for yy in range(ly):
                row[idx_ab[a, b, x, yy]] -= 1
        elif y < ly:
            row[idx_b[b, y]] = 1
            for xx in range(lx):
                row[idx_ab[a, b, xx, y]] -= 1
        else:
            offset[pos] = 1
            for xx in range(lx):
                row[idx_a[a, xx]] -= 1
            for yy in range(ly):
                row[idx_b[b, yy]] -= 1
            for xx in range(lx):
                for yy in range(ly):
                    row[idx_ab[a, b, xx, yy]] += 1
        # projection: marginals read off with the other party's input fixed at 0
        if x < lx and y < ly:
            proj[idx_ab[a, b, x, y], pos] = 1
        if b == 0 and x < lx:
            proj[idx_a[a, x], pos] = 1
        if a == 0 and y < ly:
            proj[idx_b[b, y], pos] = 1
    return NSCoordinates(scenario, offset, basis, proj, tuple(labels))


def _normalize(ints: list[int]) -> tuple[int, ...]:
    g = 0
    for v in ints:
        g = gcd(g, v)
    return tuple(v // g for v in ints) if g else tuple(ints)


def functional_key(coeffs_flat, bound, scenario) -> tuple[int, ...]:
    """Canonical key of ``m . p <= c`` as a constraint on no-signalling points.

    Two functionals get the same key exactly when they agree on the whole
    no-signalling subspace up to a positive scale.
    """
    ns = ns_coordinates(scenario)
    m = [Fraction(v) for v in coeffs_flat] + [Fraction(bound)]
    den = 1
    for v in m:
        den = lcm(den, v.denominator)
    ints = [int(v * den) for v in m]
    mi = np.array(ints[:-1], dtype=object)
    reduced = [int(v) for v in mi @ ns.basis.astype(object)]
    rhs = ints[-1] - int(mi @ ns.offset.astype(object))
    return _normalize(reduced + [rhs])


def functional_keys_int(coeffs: np.ndarray, bounds: np.ndarray, scenario) -> np.ndarray:
    """Batched :func:`functional_key` for integer functionals, one per row."""
    ns = ns_coordinates(scenario)
    coeffs = np.asarray(coeffs, dtype=np.int64)
    reduced = coeffs @ ns.basis
    rhs = np.asarray(bounds, dtype=np.int64) - coeffs @ ns.offset
    keys = np.concatenate([reduced, rhs[:, None]], axis=1)
    g = np.gcd.reduce(keys, axis=1)
    g[g == 0] = 1
    return keys // g[:, None]
