"""Linear Bell functionals ``tr(M^T P) <= c`` and the complete facet orbits.

Functionals are stored in <=-form only. Coefficients live in an exact object
array indexed ``[a, b, x, y]`` like distributions do, so evaluation is a plain
entrywise contraction.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import product
from math import lcm
from typing import Sequence

import numpy as np

from .distributions import CHSH, S2233, Distribution, Scenario, as_fraction, flat_order
from .errors import MismatchedScenario, UnsupportedScenario
from .nsspace import functional_keys_int
from .symmetry import index_map, symmetry_group, unique_rows

CHSH_TAG, I2233_TAG, POSITIVITY_TAG, CUSTOM_TAG = "CHSH", "I2233", "Positivity", "Custom"


@dataclass(frozen=True, eq=False)
class BellFunctional:
    scenario: Scenario
    coeffs: np.ndarray
    bound: Fraction
    family_tag: str = CUSTOM_TAG
    generating_symmetry: dict | None = field(default=None)

    def __post_init__(self):
        arr = np.empty(self.scenario.shape, dtype=object)
        src = np.asarray(self.coeffs, dtype=object)
        if src.shape != self.scenario.shape:
            raise MismatchedScenario(f"coefficient shape {src.shape} does not match {self.scenario}")
        for idx in np.ndindex(*self.scenario.shape):
            arr[idx] = as_fraction(src[idx])
        arr.flags.writeable = False
        object.__setattr__(self, "coeffs", arr)
        object.__setattr__(self, "bound", as_fraction(self.bound))

    @classmethod
    def from_matrix(cls, scenario, rows, bound, family_tag=CUSTOM_TAG, **kw) -> "BellFunctional":
        """Build from the block matrix with rows (a, x) and columns (b, y)."""
        scenario = Scenario.of(scenario)
        flat = [v for row in rows for v in row]
        arr = np.empty(scenario.shape, dtype=object)
        for idx, v in zip(flat_order(scenario), flat):
            arr[idx] = v
        return cls(scenario, arr, bound, family_tag, **kw)

    @classmethod
    def from_geq(cls, scenario, coeffs, bound, family_tag=CUSTOM_TAG) -> "BellFunctional":
        """Ingest ``m . p >= c`` as ``-m . p <= -c``."""
        return cls(Scenario.of(scenario), -np.asarray(coeffs, dtype=object), -as_fraction(bound), family_tag)

    def flat(self) -> tuple[Fraction, ...]:
        return tuple(self.coeffs[idx] for idx in flat_order(self.scenario))

    def matrix(self) -> np.ndarray:
        ia, ib, oa, ob = self.scenario.shape
        return np.array(self.flat(), dtype=object).reshape(ia * oa, ib * ob)

    @property
    def key(self) -> tuple:
        return (self.scenario.shape, tuple(self.coeffs.flat), self.bound)

    def __eq__(self, other):
        if not isinstance(other, BellFunctional):
            return NotImplemented
        return self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def to_json(self) -> str:
        return json.dumps({
            "scenario": list(self.scenario.shape),
            "coeffs": [str(v) for v in self.flat()],
            "bound": str(self.bound),
            "family_tag": self.family_tag,
            "generating_symmetry": self.generating_symmetry,
        })

    @classmethod
    def from_json(cls, text: str) -> "BellFunctional":
        obj = json.loads(text)
        scenario = Scenario.of(obj["scenario"])
        arr = np.empty(scenario.shape, dtype=object)
        for idx, v in zip(flat_order(scenario), obj["coeffs"]):
            arr[idx] = Fraction(v)
        return cls(scenario, arr, Fraction(obj["bound"]), obj.get("family_tag", CUSTOM_TAG),
                   obj.get("generating_symmetry"))


def evaluate(f: BellFunctional, d: Distribution) -> Fraction:
    """Exact value of ``tr(M^T P)``."""
    if f.scenario != d.scenario:
        raise MismatchedScenario(f"functional on {f.scenario} evaluated on {d.scenario}")
    return sum((m * p for m, p in zip(f.coeffs.flat, d.probs.flat) if m), Fraction(0))


def violates(f: BellFunctional, d: Distribution) -> bool:
    return evaluate(f, d) > f.bound


def pullback(op, f: BellFunctional) -> BellFunctional:
    """Functional ``g`` with ``evaluate(g, d) == evaluate(f, op(d))`` for every ``d``."""
    img = index_map(op, f.scenario)
    coeffs = np.asarray(f.coeffs.ravel()[img], dtype=object).reshape(f.scenario.shape)
    return BellFunctional(f.scenario, coeffs, f.bound, f.family_tag, f.generating_symmetry)


def pushforward(op, f: BellFunctional) -> BellFunctional:
    """Functional ``g`` with ``evaluate(g, op(d)) == evaluate(f, d)``."""
    return pullback(op.inverse(), f)


# representatives -------------------------------------------------------------

M_CHSH = [
    [1, 0, 1, 0],
    [0, 1, 0, 1],
    [1, 0, 0, 1],
    [0, 1, 1, 0],
]

M_CHSH_2233 = [
    [1, 0, 0, 1, 0, 0],
    [0, 1, 1, 0, 1, 1],
    [0, 1, 1, 0, 1, 1],
    [1, 0, 0, 0, 1, 1],
    [0, 1, 1, 1, 0, 0],
    [0, 1, 1, 1, 0, 0],
]

M_I2233 = [
    [1, 0, -1, 1, -1, 0],
    [-1, 1, 0, 0, 1, -1],
    [0, -1, 1, -1, 0, 1],
    [1, -1, 0, -1, 1, 0],
    [0, 1, -1, 0, -1, 1],
    [-1, 0, 1, 1, 0, -1],
]


def chsh() -> BellFunctional:
    return BellFunctional.from_matrix(CHSH, M_CHSH, 3, CHSH_TAG)


def chsh_2233() -> BellFunctional:
    return BellFunctional.from_matrix(S2233, M_CHSH_2233, 3, CHSH_TAG)


def i2233() -> BellFunctional:
    return BellFunctional.from_matrix(S2233, M_I2233, 2, I2233_TAG)


def positivity_functionals(scenario=S2233) -> list[BellFunctional]:
    scenario = Scenario.of(scenario)
    out = []
    for idx in np.ndindex(*scenario.shape):
        arr = np.full(scenario.shape, 0, dtype=object)
        arr[idx] = -1
        out.append(BellFunctional(scenario, arr, 0, POSITIVITY_TAG,
                                  {"entry": [int(v) for v in idx]}))
    return out


# orbits ----------------------------------------------------------------------

def _int_coeffs(f: BellFunctional) -> np.ndarray:
    return np.array([int(v) for v in f.coeffs.flat], dtype=np.int64)


def _dedupe(coeff_rows: np.ndarray, bounds: np.ndarray, scenario) -> np.ndarray:
    """First occurrence of every functional distinct on the no-signalling set."""
    return unique_rows(functional_keys_int(coeff_rows, bounds, scenario))


def _relabelling_orbit(rep: BellFunctional, exchange: bool = False) -> list[BellFunctional]:
    group = symmetry_group(rep.scenario, exchange)
    base = _int_coeffs(rep)
    rows = np.stack([base[index_map(op, rep.scenario)] for op in group])
    bound = int(rep.bound)
    keep = _dedupe(rows, np.full(len(rows), bound), rep.scenario)
    return [BellFunctional(rep.scenario, rows[i].astype(object).reshape(rep.scenario.shape), bound,
                           rep.family_tag, {"relabelling": group[i].to_json()})
            for i in keep]


# 2-to-1 output maps {0,1,2} -> {0,1}; the first one merges 1 and 2
_SURJECTIONS = [(0, 1, 1), (0, 0, 1), (0, 1, 0), (1, 0, 0), (1, 1, 0), (1, 0, 1)]


def _lift(binary: np.ndarray, maps: Sequence[tuple[int, ...]]) -> np.ndarray:
    """Coefficients of ``binary`` applied after merging outcomes by ``maps``."""
    ma0, ma1, mb0, mb1 = maps
    out = np.empty(S2233.shape, dtype=np.int64)
    for a, b, x, y in np.ndindex(*S2233.shape):
        out[a, b, x, y] = binary[a, b, (ma0, ma1)[a][x], (mb0, mb1)[b][y]]
    return out.ravel()


@lru_cache(maxsize=None)
def _chsh_orbit_cached(shape) -> tuple[BellFunctional, ...]:
    scenario = Scenario.of(shape)
    if scenario == CHSH:
        return tuple(_relabelling_orbit(chsh()))
    if scenario != S2233:
        raise UnsupportedScenario(f"CHSH orbit implemented for (2,2,2,2) and (2,2,3,3), not {scenario}")
    binaries = _relabelling_orbit(chsh())
    rows, meta = [], []
    for k, fb in enumerate(binaries):
        arr = np.array([int(v) for v in fb.coeffs.flat], dtype=np.int64).reshape(CHSH.shape)
        for maps in product(_SURJECTIONS, repeat=4):
            rows.append(_lift(arr, maps))
            meta.append({"binary_chsh": k, "binary_op": fb.generating_symmetry["relabelling"],
                         "merge_a": [list(maps[0]), list(maps[1])],
                         "merge_b": [list(maps[2]), list(maps[3])]})
    rows = np.stack(rows)
    keep = _dedupe(rows, np.full(len(rows), 3), S2233)
    return tuple(BellFunctional(S2233, rows[i].astype(object).reshape(S2233.shape), 3, CHSH_TAG, meta[i])
                 for i in keep)


def chsh_orbit(scenario=S2233) -> list[BellFunctional]:
    """All CHSH-type facets: 8 for (2,2,2,2), 648 for (2,2,3,3). Representative first."""
    return list(_chsh_orbit_cached(Scenario.of(scenario).shape))


def functional_orbit(f: BellFunctional, *, exchange: bool = False) -> list[BellFunctional]:
    """Distinct relabellings of ``f``, identified up to no-signalling equivalence."""
    return _relabelling_orbit(f, exchange)


@lru_cache(maxsize=None)
def _i2233_orbit_cached() -> tuple[BellFunctional, ...]:
    return tuple(_relabelling_orbit(i2233()))


def i2233_orbit() -> list[BellFunctional]:
    """The 432 I2233-type facets; position 0 (label 1) is the representative."""
    return list(_i2233_orbit_cached())


def facet_census() -> dict[str, int]:
    counts = {POSITIVITY_TAG: len(positivity_functionals(S2233)),
              CHSH_TAG: len(chsh_orbit(S2233)),
              I2233_TAG: len(i2233_orbit())}
    counts["total"] = sum(counts.values())
    return counts


# batch evaluation ------------------------------------------------------------

@lru_cache(maxsize=None)
def _family_matrix(family: str) -> tuple[np.ndarray, np.ndarray]:
    fs = chsh_orbit(S2233) if family == CHSH_TAG else i2233_orbit()
    coeffs = np.stack([_int_coeffs(f) for f in fs]).astype(object)
    bounds = np.array([int(f.bound) for f in fs], dtype=object)
    return coeffs, bounds


def evaluate_family(family: str, d: Distribution) -> list[Fraction]:
    """Exact values of every member of a (2,2,3,3) orbit, in orbit order."""
    if d.scenario != S2233:
        raise MismatchedScenario(f"orbit functionals live on (2,2,3,3), got {d.scenario}")
    coeffs, _ = _family_matrix(family)
    den = 1
    for v in d.probs.flat:
        den = lcm(den, v.denominator)
    num = np.array([int(v * den) for v in d.probs.flat], dtype=object)
    return [Fraction(int(v), den) for v in coeffs @ num]


@dataclass(frozen=True)
class Violation:
    index: int   # 1-based position in the orbit
    value: Fraction
    bound: Fraction

    @property
    def excess(self) -> Fraction:
        return self.value - self.bound


@dataclass(frozen=True)
class ViolationReport:
    chsh_violations: list[Violation]
    i2233_violations: list[Violation]

    @property
    def total(self) -> int:
        return len(self.chsh_violations) + len(self.i2233_violations)

    def to_json(self) -> dict:
        fmt = lambda vs: [{"index": v.index, "value": str(v.value), "bound": str(v.bound)} for v in vs]
        return {"chsh_violations": fmt(self.chsh_violations), "i2233_violations": fmt(self.i2233_violations)}


def violated_set(d: Distribution) -> ViolationReport:
    out = {}
    for family in (CHSH_TAG, I2233_TAG):
        _, bounds = _family_matrix(family)
        vals = evaluate_family(family, d)
        out[family] = [Violation(i + 1, v, Fraction(int(b))) for i, (v, b) in enumerate(zip(vals, bounds))
                       if v > b]
    return ViolationReport(out[CHSH_TAG], out[I2233_TAG])
