"""Exact conditional distributions p(xy|ab) for two-party Bell scenarios.

Probabilities are held as ``fractions.Fraction`` in a read-only object array
indexed ``[a, b, x, y]``. The interchange layout is the block matrix whose rows
are indexed by ``(a, x)`` and columns by ``(b, y)``; ``flat()`` writes it one
row after another.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from itertools import product
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    IndexOutOfRange,
    MismatchedScenario,
    NotADistribution,
    ParseError,
    WeightsNotNormalized,
)


def as_fraction(value) -> Fraction:
    """Coerce ints, strings like ``"3/7"`` and floats (by decimal repr) to Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        return Fraction(repr(value))
    try:
        return Fraction(value)
    except (ValueError, TypeError) as exc:
        raise ParseError(f"not a rational number: {value!r}") from exc


@dataclass(frozen=True)
class Scenario:
    inputs_a: int
    inputs_b: int
    outputs_a: int
    outputs_b: int

    def __post_init__(self):
        for name in ("inputs_a", "inputs_b", "outputs_a", "outputs_b"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or v < 1:
                raise ValueError(f"{name} must be a positive integer, got {v!r}")

    @classmethod
    def of(cls, spec) -> "Scenario":
        if isinstance(spec, Scenario):
            return spec
        return cls(*(int(v) for v in spec))

    @property
    def shape(self) -> tuple[int, int, int, int]:
        return (self.inputs_a, self.inputs_b, self.outputs_a, self.outputs_b)

    @property
    def dim(self) -> int:
        return self.inputs_a * self.inputs_b * self.outputs_a * self.outputs_b

    @property
    def is_symmetric(self) -> bool:
        return self.inputs_a == self.inputs_b and self.outputs_a == self.outputs_b

    def as_tuple(self) -> tuple[int, int, int, int]:
        return self.shape

    def __str__(self):
        return "(%d,%d,%d,%d)" % self.shape


CHSH = Scenario(2, 2, 2, 2)
S2233 = Scenario(2, 2, 3, 3)


def flat_order(scenario: Scenario) -> list[tuple[int, int, int, int]]:
    """(a, b, x, y) index tuples in block-matrix row-major order."""
    ia, ib, oa, ob = scenario.shape
    return [(a, b, x, y) for a, x in product(range(ia), range(oa))
            for b, y in product(range(ib), range(ob))]


def flat_permutation(scenario: Scenario) -> np.ndarray:
    """Positions into ``probs.ravel()`` (C order over a,b,x,y) listed in flat order."""
    return np.array([np.ravel_multi_index(idx, scenario.shape)
                     for idx in flat_order(scenario)])


class Distribution:
    """Immutable exact conditional distribution p(xy|ab)."""

    def __init__(self, scenario, probs, *, validate: bool = True):
        scenario = Scenario.of(scenario)
        arr = np.empty(scenario.shape, dtype=object)
        src = np.asarray(probs, dtype=object)
        if src.shape != scenario.shape:
            raise NotADistribution(f"probability array shape {src.shape} does not match {scenario}")
        for idx in np.ndindex(*scenario.shape):
            arr[idx] = as_fraction(src[idx])
        arr.flags.writeable = False
        self.scenario = scenario
        self.probs = arr
        if validate:
            self._validate()

    def _validate(self):
        ia, ib, _, _ = self.scenario.shape
        for a in range(ia):
            for b in range(ib):
                block = self.probs[a, b]
                if any(v < 0 for v in block.flat):
                    raise NotADistribution(f"negative probability in block (a={a}, b={b})")
                total = sum(block.flat, Fraction(0))
                if total != 1:
                    raise NotADistribution(f"block (a={a}, b={b}) sums to {total}, not 1")

    # construction --------------------------------------------------------
    @classmethod
    def from_flat(cls, scenario, values: Sequence, *, scale=1, validate: bool = True):
        """Build from a flat block-matrix listing, each value multiplied by ``scale``."""
        scenario = Scenario.of(scenario)
        values = list(values)
        if len(values) != scenario.dim:
            raise NotADistribution(f"expected {scenario.dim} entries, got {len(values)}")
        scale = as_fraction(scale)
        arr = np.empty(scenario.shape, dtype=object)
        for idx, v in zip(flat_order(scenario), values):
            arr[idx] = as_fraction(v) * scale
        return cls(scenario, arr, validate=validate)

    @classmethod
    def from_matrix(cls, scenario, rows: Sequence[Sequence], *, scale=1, validate: bool = True):
        return cls.from_flat(scenario, [v for row in rows for v in row], scale=scale,
                             validate=validate)

    @classmethod
    def from_function(cls, scenario, fn, *, validate: bool = True):
        scenario = Scenario.of(scenario)
        arr = np.empty(scenario.shape, dtype=object)
        for idx in np.ndindex(*scenario.shape):
            arr[idx] = fn(*idx)
        return cls(scenario, arr, validate=validate)

    # views ---------------------------------------------------------------
    def __getitem__(self, idx) -> Fraction:
        return self.probs[idx]

    def block(self, a: int, b: int) -> np.ndarray:
        return self.probs[a, b]

    def flat(self) -> tuple[Fraction, ...]:
        return tuple(self.probs[idx] for idx in flat_order(self.scenario))

    def matrix(self) -> np.ndarray:
        ia, ib, oa, ob = self.scenario.shape
        return np.array(self.flat(), dtype=object).reshape(ia * oa, ib * ob)

    @cached_property
    def numeric(self) -> np.ndarray:
        """Float64 copy of the probabilities, shape (ia, ib, oa, ob)."""
        out = np.array([float(v) for v in self.probs.flat]).reshape(self.scenario.shape)
        out.flags.writeable = False
        return out

    @cached_property
    def key(self) -> tuple:
        return (self.scenario.shape, tuple(self.probs.flat))

    def __eq__(self, other):
        if not isinstance(other, Distribution):
            return NotImplemented
        return self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def __repr__(self):
        return f"Distribution({self.scenario}, {self.matrix().tolist()})"

    def pretty(self) -> str:
        m = self.matrix()
        cells = [[str(v) for v in row] for row in m]
        width = max(len(c) for row in cells for c in row)
        ob = self.scenario.outputs_b
        lines = []
        for r, row in enumerate(cells):
            if r and r % self.scenario.outputs_a == 0:
                lines.append("-" * ((width + 1) * len(row) + 2 * (self.scenario.inputs_b - 1)))
            parts = []
            for c, cell in enumerate(row):
                if c and c % ob == 0:
                    parts.append("|")
                parts.append(cell.rjust(width))
            lines.append(" ".join(parts))
        return "\n".join(lines)

    # serialization -------------------------------------------------------
    def to_json(self) -> str:
        return json.dumps({"scenario": list(self.scenario.shape),
                           "probs": [str(v) for v in self.flat()]})

    @classmethod
    def from_json(cls, text: str) -> "Distribution":
        try:
            obj = json.loads(text)
            scenario = Scenario.of(obj["scenario"])
            probs = obj["probs"]
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"malformed distribution JSON: {exc}") from exc
        return cls.from_flat(scenario, probs)

    def to_csv(self) -> str:
        """One row per (a, b) block: a, b, then p(xy|ab) with y fastest."""
        buf = io.StringIO()
        ia, ib, oa, ob = self.scenario.shape
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["a", "b"] + [f"p{x}{y}" for x in range(oa) for y in range(ob)])
        for a in range(ia):
            for b in range(ib):
                w.writerow([a, b] + [str(v) for v in self.probs[a, b].flat])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, scenario=None) -> "Distribution":
        rows = list(csv.reader(io.StringIO(text)))
        if not rows:
            raise ParseError("empty CSV")
        header, body = rows[0], [r for r in rows[1:] if r]
        try:
            cells = [(int(r[0]), int(r[1]), [as_fraction(v) for v in r[2:]]) for r in body]
        except (ValueError, IndexError) as exc:
            raise ParseError(f"malformed distribution CSV: {exc}") from exc
        if scenario is None:
            labels = header[2:]
            oa = 1 + max(int(s[1]) for s in labels)
            ob = 1 + max(int(s[2]) for s in labels)
            scenario = Scenario(1 + max(c[0] for c in cells), 1 + max(c[1] for c in cells), oa, ob)
        scenario = Scenario.of(scenario)
        arr = np.empty(scenario.shape, dtype=object)
        seen = set()
        for a, b, vals in cells:
            if len(vals) != scenario.outputs_a * scenario.outputs_b:
                raise ParseError(f"block ({a},{b}) has {len(vals)} entries")
            arr[a, b] = np.array(vals, dtype=object).reshape(scenario.outputs_a, scenario.outputs_b)
            seen.add((a, b))
        if len(seen) != scenario.inputs_a * scenario.inputs_b:
            raise ParseError("CSV does not cover every (a, b) block")
        return cls(scenario, arr)


# operations ----------------------------------------------------------------

def marginal(d: Distribution, party: str, input: int, other_input: int = 0) -> tuple[Fraction, ...]:
    """Outcome distribution of one party for a given input.

    The other party's input is fixed at ``other_input``; for a non-signalling
    ``d`` the result does not depend on it.
    """
    ia, ib, _, _ = d.scenario.shape
    party = party.upper()
    if party == "A":
        if not 0 <= input < ia or not 0 <= other_input < ib:
            raise IndexOutOfRange(f"input {input} out of range for party A")
        block = d.probs[input, other_input]
        return tuple(sum(row, Fraction(0)) for row in block)
    if party == "B":
        if not 0 <= input < ib or not 0 <= other_input < ia:
            raise IndexOutOfRange(f"input {input} out of range for party B")
        block = d.probs[other_input, input]
        return tuple(sum(col, Fraction(0)) for col in block.T)
    raise ValueError(f"party must be 'A' or 'B', got {party!r}")


def is_no_signalling(d: Distribution) -> bool:
    ia, ib, _, _ = d.scenario.shape
    for a in range(ia):
        ref = marginal(d, "A", a, 0)
        if any(marginal(d, "A", a, b) != ref for b in range(1, ib)):
            return False
    for b in range(ib):
        ref = marginal(d, "B", b, 0)
        if any(marginal(d, "B", b, a) != ref for a in range(1, ia)):
            return False
    return True


def mix(components: Iterable[tuple[object, Distribution]]) -> Distribution:
    """Exact convex combination of distributions sharing one scenario."""
    components = [(as_fraction(w), d) for w, d in components]
    if not components:
        raise WeightsNotNormalized("empty mixture")
    scenario = components[0][1].scenario
    if any(d.scenario != scenario for _, d in components):
        raise MismatchedScenario("all mixture components must share a scenario")
    if any(w < 0 for w, _ in components):
        raise WeightsNotNormalized("mixture weights must be nonnegative")
    total = sum((w for w, _ in components), Fraction(0))
    if total != 1:
        raise WeightsNotNormalized(f"mixture weights sum to {total}, not 1")
    arr = np.full(scenario.shape, Fraction(0), dtype=object)
    for w, d in components:
        if w:
            arr = arr + w * d.probs
    return Distribution(scenario, arr, validate=False)
