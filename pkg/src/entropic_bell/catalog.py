"""Named distributions for the (2,2,2,2) and (2,2,3,3) scenarios.

Every constructor returns an exact ``Distribution``. ``resolve`` maps CLI-style
names (``pe``, ``p_nl``, ``p_iso:4/7`` ...) onto these constructors.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import isqrt

from ._table1 import TABLE1
from .distributions import CHSH, S2233, Distribution, Scenario, as_fraction, mix
from .errors import EpsOutOfRange, IndexOutOfRange, ParseError

half = Fraction(1, 2)
third = Fraction(1, 3)


def _unit(value, name):
    value = as_fraction(value)
    if not 0 <= value <= 1:
        raise EpsOutOfRange(f"{name} must lie in [0, 1], got {value}")
    return value


# (2,2,2,2) -----------------------------------------------------------------

@lru_cache(maxsize=None)
def p_pr() -> Distribution:
    """PR box: X xor Y = A.B with uniform marginals."""
    return Distribution.from_function(CHSH, lambda a, b, x, y: half if (x ^ y) == (a & b) else 0)


@lru_cache(maxsize=None)
def p_c() -> Distribution:
    """Perfectly correlated local box with the same entropy vector as the PR box."""
    return Distribution.from_function(CHSH, lambda a, b, x, y: half if x == y else 0)


@lru_cache(maxsize=None)
def p_noise(scenario=S2233) -> Distribution:
    scenario = Scenario.of(scenario)
    u = Fraction(1, scenario.outputs_a * scenario.outputs_b)
    return Distribution.from_function(scenario, lambda *_: u)


# (2,2,3,3) -----------------------------------------------------------------

def _shifted_identity(shift_11: int):
    def fn(a, b, x, y):
        shift = shift_11 if (a, b) == (1, 1) else 0
        return third if y == (x + shift) % 3 else 0
    return fn


@lru_cache(maxsize=None)
def p_nl() -> Distribution:
    """I2233 vertex of maximal violation: Y = X except Y = X+1 (mod 3) when a=b=1."""
    return Distribution.from_function(S2233, _shifted_identity(1))


@lru_cache(maxsize=None)
def p_nl_star() -> Distribution:
    return Distribution.from_function(S2233, _shifted_identity(2))


@lru_cache(maxsize=None)
def p_c2233() -> Distribution:
    return Distribution.from_function(S2233, _shifted_identity(0))


@lru_cache(maxsize=None)
def p_nl_tilde() -> Distribution:
    return mix([(half, p_nl()), (half, p_nl_star())])


@lru_cache(maxsize=None)
def pe() -> Distribution:
    """Mixture of table1 vertex 8 with locals 18, 26, 47 (weights 1/10, 3/10, 1/5, 2/5)."""
    rows = [
        [21, 0, 0, 21, 0, 0],
        [0, 2, 0, 1, 1, 0],
        [11, 0, 16, 0, 1, 26],
        [31, 0, 0, 20, 1, 10],
        [1, 1, 0, 1, 0, 1],
        [0, 1, 16, 1, 1, 15],
    ]
    return Distribution.from_matrix(S2233, rows, scale=Fraction(1, 50))


@lru_cache(maxsize=None)
def p_iso(eps) -> Distribution:
    eps = _unit(eps, "eps")
    return mix([(eps, p_nl()), (1 - eps, p_noise(S2233))])


@lru_cache(maxsize=None)
def p_iso_tilde(eps) -> Distribution:
    """Isotropic mixture built on (p_nl + p_nl*)/2 instead of p_nl."""
    eps = _unit(eps, "eps")
    return mix([(eps, p_nl_tilde()), (1 - eps, p_noise(S2233))])


def iso_mix(eps, v) -> Distribution:
    """v * p_iso(eps) + (1 - v) * p_c2233."""
    v = _unit(v, "v")
    return mix([(v, p_iso(eps)), (1 - v, p_c2233())])


def iso_mix_tilde(eps, v) -> Distribution:
    v = _unit(v, "v")
    return mix([(v, p_iso_tilde(eps)), (1 - v, p_c2233())])


def iso_weights(eps) -> tuple[Fraction, Fraction]:
    """Entry values (A, B) of p_iso: A on the p_nl support, B elsewhere."""
    eps = as_fraction(eps)
    return (2 * eps + 1) / 9, (1 - eps) / 9


@lru_cache(maxsize=None)
def p_cg(eps) -> Distribution:
    """p_iso(eps) with outcome 1 merged into 0 for both inputs of both parties.

    Written out from the entry values so it can be checked against the generic
    coarse-graining map.
    """
    eps = _unit(eps, "eps")
    A, B = iso_weights(eps)
    plain = [[2 * (A + B), 0, 2 * B], [0, 0, 0], [2 * B, 0, A]]
    twisted = [[3 * B + A, 0, A + B], [0, 0, 0], [A + B, 0, B]]
    rows = []
    for a in range(2):
        for x in range(3):
            rows.append(plain[x] + (twisted[x] if a == 1 else plain[x]))
    return Distribution.from_matrix(S2233, rows)


# quantum-achievable reference ----------------------------------------------

SQRT3_DIGITS = 40


@lru_cache(maxsize=None)
def sqrt3_rational() -> Fraction:
    """Rational approximation r of sqrt(3) with |r - sqrt(3)| < 1e-20."""
    scale = 10 ** SQRT3_DIGITS
    approx = Fraction(isqrt(3 * scale * scale), scale)
    return approx.limit_denominator(10 ** 12)


@lru_cache(maxsize=None)
def p_qm() -> Distribution:
    """Maximally entangled two-qutrit distribution optimal for I2233, Bob's inputs swapped.

    Entries are 1/(54 sin^2(pi (k - l + phase)/3)); with sqrt(3) replaced by a
    rational approximation they take the values 2(2 + r)/27, 2(2 - r)/27 and
    1/27. Each block holds three of each, so normalization and no-signalling
    hold exactly whatever r is.
    """
    r = sqrt3_rational()
    big, small, mid = 2 * (2 + r) / 27, 2 * (2 - r) / 27, Fraction(1, 27)
    # (y - x) mod 3 -> value, per block after Bob's input swap
    pattern = {
        (0, 0): {0: big, 1: small, 2: mid},
        (0, 1): {0: big, 1: mid, 2: small},
        (1, 0): {0: big, 1: mid, 2: small},
        (1, 1): {0: mid, 1: big, 2: small},
    }
    return Distribution.from_function(S2233, lambda a, b, x, y: pattern[a, b][(y - x) % 3])


# the 47 vertices of the CHSH-satisfying polytope with I2233^1 >= 2 ---------------

@lru_cache(maxsize=None)
def table1() -> tuple[Distribution, ...]:
    return tuple(Distribution.from_flat(S2233, nums, scale=Fraction(1, den))
                 for den, nums in TABLE1)


def table1_vertex(number: int) -> Distribution:
    """table1 vertex by its 1-based row number."""
    if not 1 <= number <= len(TABLE1):
        raise IndexOutOfRange(f"table1 has rows 1..{len(TABLE1)}, got {number}")
    return table1()[number - 1]


TABLE1_NONLOCAL = tuple(range(1, 18))
TABLE1_LOCAL = tuple(range(18, 48))


# name registry -------------------------------------------------------------

BUILTINS = {
    "pr": p_pr,
    "p_pr": p_pr,
    "p_c": p_c,
    "p_noise_2222": lambda: p_noise(CHSH),
    "p_nl": p_nl,
    "p_nl_star": p_nl_star,
    "p_nl_tilde": p_nl_tilde,
    "p_c_2233": p_c2233,
    "p_noise_2233": lambda: p_noise(S2233),
    "p_noise": lambda: p_noise(S2233),
    "pe": pe,
    "p_e": pe,
    "p_qm": p_qm,
    "p_iso": p_iso,
    "p_iso_tilde": p_iso_tilde,
    "p_cg": p_cg,
    "p_emix": iso_mix,
    "p_emix_tilde": iso_mix_tilde,
    "table1": table1_vertex,
}


def resolve(name: str) -> Distribution:
    """Resolve ``name[:arg[:arg]]``, e.g. ``pe``, ``p_iso:4/7``, ``table1:8``."""
    head, *args = name.strip().split(":")
    key = head.lower()
    if key not in BUILTINS:
        raise ParseError(f"unknown builtin distribution {head!r}; known: {sorted(BUILTINS)}")
    fn = BUILTINS[key]
    try:
        if key == "table1":
            return fn(*(int(a) for a in args))
        return fn(*(as_fraction(a) for a in args))
    except TypeError as exc:
        raise ParseError(f"wrong arguments for {head!r}: {args}") from exc
