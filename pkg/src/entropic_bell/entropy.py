"""Shannon and Tsallis entropies, entropy vectors and the four BC inequalities.

Natural logarithms throughout. The entropy vector of a two-input
distribution lists, in order, the entropies of X0, X1, Y0, Y1, X0Y0, X0Y1,
X1Y0, X1Y1, where X_a is Alice's outcome on input a.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .distributions import Distribution, is_no_signalling, marginal
from .errors import NonPositiveOrder, NotADistribution, OrderNotAboveOne, SignallingInput, WrongInputCount

SHANNON_SWITCH = 1e-8
TOL = 1e-9

COMPONENTS = ("X0", "X1", "Y0", "Y1", "X0Y0", "X0Y1", "X1Y0", "X1Y1")

# coefficient vectors over COMPONENTS; value <= 0 for every classical entropy vector
BC_FORMS = np.array([
    [0, 1, 0, 1, 1, -1, -1, -1],
    [0, 1, 1, 0, -1, 1, -1, -1],
    [1, 0, 0, 1, -1, -1, 1, -1],
    [1, 0, 1, 0, -1, -1, -1, 1],
], dtype=float)


def _probs(p) -> np.ndarray:
    arr = np.array([float(v) for v in p], dtype=float)
    if arr.size == 0 or np.any(arr < -1e-12) or abs(arr.sum() - 1) > 1e-9:
        raise NotADistribution(f"not a probability vector (sum {arr.sum()!r})")
    return arr[arr > 0]


def shannon(p) -> float:
    """-sum p ln p, skipping zero entries."""
    x = _probs(p)
    return float(-np.sum(x * np.log(x)))


def tsallis(p, q: float) -> float:
    """(1 - sum p^q) / (q - 1); the Shannon entropy when q is within 1e-8 of 1."""
    if q <= 0:
        raise NonPositiveOrder(f"Tsallis order must be positive, got {q}")
    if abs(q - 1) < SHANNON_SWITCH:
        return shannon(p)
    x = _probs(p)
    # sum p (1 - p^(q-1)) / (q-1), written to stay accurate for q near 1
    return float(np.sum(x * -np.expm1((q - 1) * np.log(x))) / (q - 1))


def entropy(p, q: float = 1.0) -> float:
    return tsallis(p, q)


# entropy vectors ------------------------------------------------------------

@dataclass(frozen=True)
class EntropyVector:
    components: tuple[float, ...]
    q: float = 1.0
    source: str | None = None

    def __getitem__(self, name):
        if isinstance(name, str):
            return self.components[COMPONENTS.index(name)]
        return self.components[name]

    def as_array(self) -> np.ndarray:
        return np.array(self.components)

    def as_dict(self) -> dict[str, float]:
        return dict(zip(COMPONENTS, self.components))


def coexisting_distributions(d: Distribution) -> list[tuple[Fraction, ...]]:
    """The 8 exact probability vectors behind the entropy vector, in component order."""
    ia, ib, _, _ = d.scenario.shape
    if ia != 2 or ib != 2:
        raise WrongInputCount(f"entropy vectors need two inputs per party, got {d.scenario}")
    if not is_no_signalling(d):
        raise SignallingInput("singleton entropies are ambiguous for a signalling distribution")
    out = [marginal(d, "A", 0), marginal(d, "A", 1), marginal(d, "B", 0), marginal(d, "B", 1)]
    for a in range(2):
        for b in range(2):
            out.append(tuple(d.probs[a, b].flat))
    return out


def entropy_vector(d: Distribution, q: float = 1.0, source: str | None = None) -> EntropyVector:
    return EntropyVector(tuple(tsallis(p, q) for p in coexisting_distributions(d)), q, source)


@dataclass(frozen=True)
class BCResult:
    values: tuple[float, ...]
    q: float
    tol: float = TOL

    @property
    def violated(self) -> tuple[bool, ...]:
        return tuple(v > self.tol for v in self.values)

    @property
    def marginal(self) -> tuple[bool, ...]:
        """Values inside the [-tol, tol] band, reported apart from clear passes."""
        return tuple(abs(v) <= self.tol for v in self.values)

    def __getitem__(self, i: int) -> float:
        """1-based access: result[4] is the fourth BC expression."""
        return self.values[i - 1]


def bc_values(v: EntropyVector, tol: float = TOL) -> BCResult:
    return BCResult(tuple(float(x) for x in BC_FORMS @ v.as_array()), v.q, tol)


def bc(d: Distribution, q: float = 1.0, which: int = 4) -> float:
    return bc_values(entropy_vector(d, q))[which]


# closed forms for v * p_iso(eps) + (1 - v) * p_C ------------------------------

def _xlogx(x: float) -> float:
    return x * math.log(x) if x > 0 else 0.0


def f_closed_form(eps: float, v: float) -> float:
    c, d = 1 - eps, 1 + 2 * eps
    u, w = 3 - 2 * c * v, 3 - (2 + eps) * v
    return 3 * _xlogx(u) + 5 * _xlogx(c * v) - _xlogx(d * v) - _xlogx(w) - 3 * math.log(9)


SHANNON_F_SCALE = 1 / 3
"""Shannon BC^4 on the mixing family equals SHANNON_F_SCALE * f (checked in the tests)."""


def g_closed_form(q: float, eps: float, v: float) -> float:
    if q <= 1:
        raise OrderNotAboveOne(f"g is defined for q > 1, got {q}")
    c, d = 1 - eps, 1 + 2 * eps
    u, w = 3 - 2 * c * v, 3 - (2 + eps) * v
    return (9 * (u / 9) ** q + 15 * (c * v / 9) ** q - 6 / 3 ** q
            - 3 * (w / 9) ** q - 3 * (d * v / 9) ** q)


def _log1p_ratio(x: float) -> float:
    """log1p(x) / x with its limit 1 at x = 0."""
    return math.log1p(x) / x if x != 0 else 1.0


def _pow_ratio(x: float, q: float) -> float:
    """((1 + x)^q - 1) / x with its limit q at x = 0."""
    return math.expm1(q * math.log1p(x)) / x if x != 0 else q


def f_over_v(eps: float, log_v: float) -> float:
    """f(eps, v) / v evaluated from log v, valid far below float underflow of v."""
    c, d = 1 - eps, 1 + 2 * eps
    v = math.exp(log_v)
    u, w = 3 - 2 * c * v, 3 - (2 + eps) * v
    out = (7 * eps - 4) * math.log(3)
    out += 3 * u * (-2 * c / 3) * _log1p_ratio(-2 * c * v / 3)
    out -= w * (-(2 + eps) / 3) * _log1p_ratio(-(2 + eps) * v / 3)
    if c > 0:
        out += 5 * c * (math.log(c) + log_v)
    out -= d * (math.log(d) + log_v)
    return out


def g_over_v(q: float, eps: float, log_v: float) -> float:
    if q <= 1:
        raise OrderNotAboveOne(f"g is defined for q > 1, got {q}")
    c, d = 1 - eps, 1 + 2 * eps
    v = math.exp(log_v)
    lead = 9 * (-2 * c / 3) * _pow_ratio(-2 * c * v / 3, q) - 3 * (-(2 + eps) / 3) * _pow_ratio(-(2 + eps) * v / 3, q)
    tail = (15 * c ** q - 3 * d ** q) / 9 ** q * math.exp((q - 1) * log_v)
    return lead / 3 ** q + tail


# generic scale-free evaluation along a mixing segment --------------------------

def _entropy_gain_over_v(r0: np.ndarray, r1: np.ndarray, q: float, log_v: float) -> float:
    """[S(r0 + v (r1 - r0)) - S(r0)] / v from log v alone."""
    v = math.exp(log_v)
    delta = r1 - r0
    total = 0.0
    shannon_branch = abs(q - 1) < SHANNON_SWITCH
    for a0, dl, b1 in zip(r0, delta, r1):
        if a0 > 0:
            x = v * dl / a0
            if shannon_branch:
                total -= dl * (math.log(a0) + math.log1p(x)) + dl * _log1p_ratio(x)
            else:
                total -= a0 ** q * _pow_ratio(x, q) * dl / a0 / (q - 1)
        elif b1 > 0:
            if shannon_branch:
                total -= b1 * (math.log(b1) + log_v)
            else:
                total -= b1 ** q * math.exp((q - 1) * log_v) / (q - 1)
    return total


def bc_over_v(base: Distribution, target: Distribution, q: float, log_v: float, which: int = 4) -> float:
    """BC value of v*target + (1-v)*base divided by v, assuming the base saturates it.

    Only the sign matters to callers near v -> 0, where v is below float range;
    the base point's own BC value is taken to be 0 (true for the perfectly
    correlated local points this is used with) and checked to be below 1e-12.
    """
    base_val = bc(base, q, which)
    if abs(base_val) > 1e-12:
        raise ValueError(f"base point has BC value {base_val}, expected 0")
    r0 = [np.array([float(x) for x in p]) for p in coexisting_distributions(base)]
    r1 = [np.array([float(x) for x in p]) for p in coexisting_distributions(target)]
    gains = [_entropy_gain_over_v(a, b, q, log_v) for a, b in zip(r0, r1)]
    return float(BC_FORMS[which - 1] @ np.array(gains))
