"""Local relabellings, party exchange and the LOSR generators.

A relabelling acts on a distribution by
``new[pi_A(a), pi_B(b), sigma_a(x), tau_b(y)] = old[a, b, x, y]`` where the
output permutation ``sigma_a`` is chosen by Alice's *original* input. Every
operation can be turned into an index map over the C-ordered flattening of
``probs`` so that whole orbits are computed with integer numpy gathers.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import permutations, product
from math import lcm
from typing import Iterable, Sequence

import numpy as np

from .distributions import Distribution, Scenario
from .errors import AsymmetricScenario, IncompatibleScenario

Perm = tuple[int, ...]


def _compose(p: Perm, q: Perm) -> Perm:
    """p after q."""
    return tuple(p[i] for i in q)


def _invert(p: Perm) -> Perm:
    inv = [0] * len(p)
    for i, v in enumerate(p):
        inv[v] = i
    return tuple(inv)


@dataclass(frozen=True)
class LocalRelabelling:
    input_a: Perm
    input_b: Perm
    outputs_a: tuple[Perm, ...]
    outputs_b: tuple[Perm, ...]

    @classmethod
    def identity(cls, scenario) -> "LocalRelabelling":
        ia, ib, oa, ob = Scenario.of(scenario).shape
        return cls(tuple(range(ia)), tuple(range(ib)),
                   (tuple(range(oa)),) * ia, (tuple(range(ob)),) * ib)

    @property
    def scenario(self) -> Scenario:
        return Scenario(len(self.input_a), len(self.input_b),
                        len(self.outputs_a[0]), len(self.outputs_b[0]))

    def compatible(self, scenario: Scenario) -> bool:
        return self.scenario == scenario

    def then(self, other: "LocalRelabelling") -> "LocalRelabelling":
        """The relabelling that applies ``self`` first and ``other`` second."""
        return LocalRelabelling(
            _compose(other.input_a, self.input_a),
            _compose(other.input_b, self.input_b),
            tuple(_compose(other.outputs_a[self.input_a[a]], s) for a, s in enumerate(self.outputs_a)),
            tuple(_compose(other.outputs_b[self.input_b[b]], s) for b, s in enumerate(self.outputs_b)),
        )

    def inverse(self) -> "LocalRelabelling":
        ia_inv, ib_inv = _invert(self.input_a), _invert(self.input_b)
        return LocalRelabelling(
            ia_inv, ib_inv,
            tuple(_invert(self.outputs_a[ia_inv[a]]) for a in range(len(ia_inv))),
            tuple(_invert(self.outputs_b[ib_inv[b]]) for b in range(len(ib_inv))),
        )

    def swapped(self) -> "LocalRelabelling":
        """The same relabelling with the roles of the parties exchanged."""
        return LocalRelabelling(self.input_b, self.input_a, self.outputs_b, self.outputs_a)

    def image(self, a, b, x, y):
        return (self.input_a[a], self.input_b[b], self.outputs_a[a][x], self.outputs_b[b][y])

    def to_json(self) -> dict:
        return {"input_a": list(self.input_a), "input_b": list(self.input_b),
                "outputs_a": [list(p) for p in self.outputs_a],
                "outputs_b": [list(p) for p in self.outputs_b]}

    @classmethod
    def from_json(cls, obj: dict) -> "LocalRelabelling":
        return cls(tuple(obj["input_a"]), tuple(obj["input_b"]),
                   tuple(tuple(p) for p in obj["outputs_a"]),
                   tuple(tuple(p) for p in obj["outputs_b"]))


@dataclass(frozen=True)
class SymmetryOp:
    """A local relabelling optionally followed by exchange of the parties."""

    relabelling: LocalRelabelling
    exchange: bool = False

    @classmethod
    def identity(cls, scenario) -> "SymmetryOp":
        return cls(LocalRelabelling.identity(scenario))

    def then(self, other: "SymmetryOp") -> "SymmetryOp":
        second = other.relabelling.swapped() if self.exchange else other.relabelling
        return SymmetryOp(self.relabelling.then(second), self.exchange != other.exchange)

    def inverse(self) -> "SymmetryOp":
        r = self.relabelling.swapped() if self.exchange else self.relabelling
        return SymmetryOp(r.inverse(), self.exchange)

    def image(self, a, b, x, y):
        a, b, x, y = self.relabelling.image(a, b, x, y)
        return (b, a, y, x) if self.exchange else (a, b, x, y)

    def to_json(self) -> dict:
        return {"relabelling": self.relabelling.to_json(), "exchange": self.exchange}

    @classmethod
    def from_json(cls, obj: dict) -> "SymmetryOp":
        return cls(LocalRelabelling.from_json(obj["relabelling"]), bool(obj.get("exchange", False)))


def _target_scenario(op, scenario: Scenario) -> Scenario:
    if isinstance(op, SymmetryOp) and op.exchange:
        ia, ib, oa, ob = scenario.shape
        return Scenario(ib, ia, ob, oa)
    return scenario


def index_map(op, scenario) -> np.ndarray:
    """``img[i]`` is the C-order position that entry ``i`` moves to under ``op``."""
    scenario = Scenario.of(scenario)
    target = _target_scenario(op, scenario)
    a, b, x, y = (g.ravel() for g in np.indices(scenario.shape))
    rel = op.relabelling if isinstance(op, SymmetryOp) else op
    a2 = np.asarray(rel.input_a)[a]
    b2 = np.asarray(rel.input_b)[b]
    x2 = np.asarray(rel.outputs_a)[a, x]
    y2 = np.asarray(rel.outputs_b)[b, y]
    if isinstance(op, SymmetryOp) and op.exchange:
        a2, b2, x2, y2 = b2, a2, y2, x2
    return np.ravel_multi_index((a2, b2, x2, y2), target.shape)


def gather_map(op, scenario) -> np.ndarray:
    """Inverse of :func:`index_map`: ``new_flat = old_flat[gather]``."""
    img = index_map(op, scenario)
    inv = np.empty_like(img)
    inv[img] = np.arange(img.size)
    return inv


# group enumeration -----------------------------------------------------------

def relabellings(scenario) -> list[LocalRelabelling]:
    """All local relabellings in a fixed canonical order ((i_A! o_A!^i_A)(i_B! o_B!^i_B) of them)."""
    ia, ib, oa, ob = Scenario.of(scenario).shape
    out_a = list(permutations(range(oa)))
    out_b = list(permutations(range(ob)))
    return [LocalRelabelling(pa, pb, sa, sb)
            for pa in permutations(range(ia))
            for sa in product(out_a, repeat=ia)
            for pb in permutations(range(ib))
            for sb in product(out_b, repeat=ib)]


@lru_cache(maxsize=None)
def symmetry_group(scenario, exchange: bool = True) -> tuple[SymmetryOp, ...]:
    """Local relabellings, then (for symmetric scenarios) the same ops followed by exchange."""
    scenario = Scenario.of(scenario)
    local = [SymmetryOp(r) for r in relabellings(scenario)]
    if exchange and scenario.is_symmetric:
        local += [SymmetryOp(op.relabelling, True) for op in local]
    return tuple(local)


@lru_cache(maxsize=None)
def gather_maps(scenario, exchange: bool = True) -> np.ndarray:
    scenario = Scenario.of(scenario)
    return np.stack([gather_map(op, scenario) for op in symmetry_group(scenario, exchange)])


# actions on distributions ----------------------------------------------------

def _apply_gather(d: Distribution, gather: np.ndarray, target: Scenario) -> Distribution:
    flat = d.probs.ravel()[gather].reshape(target.shape)
    return Distribution(target, flat, validate=False)


def apply_relabelling(r, d: Distribution) -> Distribution:
    """Apply a LocalRelabelling or SymmetryOp to ``d``."""
    rel = r.relabelling if isinstance(r, SymmetryOp) else r
    if not rel.compatible(d.scenario):
        raise IncompatibleScenario(f"relabelling for {rel.scenario} applied to {d.scenario}")
    if isinstance(r, SymmetryOp) and r.exchange and not d.scenario.is_symmetric:
        raise AsymmetricScenario("party exchange needs a symmetric scenario")
    return _apply_gather(d, gather_map(r, d.scenario), _target_scenario(r, d.scenario))


def exchange_parties(d: Distribution) -> Distribution:
    if not d.scenario.is_symmetric:
        raise AsymmetricScenario(f"cannot exchange parties in {d.scenario}")
    return apply_relabelling(SymmetryOp(LocalRelabelling.identity(d.scenario), True), d)


# integer batches for orbit work ---------------------------------------------

def integer_rows(dists: Sequence[Distribution]) -> tuple[np.ndarray, int]:
    """Scale a batch to integer rows over a common denominator (C-order entries)."""
    den = 1
    for d in dists:
        for v in d.probs.flat:
            den = lcm(den, v.denominator)
    rows = np.array([[int(v * den) for v in d.probs.flat] for d in dists], dtype=np.int64)
    return rows, den


def rows_to_distributions(rows: np.ndarray, den: int, scenario: Scenario) -> list[Distribution]:
    return [Distribution(scenario, np.array([Fraction(int(v), den) for v in row],
                                            dtype=object).reshape(scenario.shape), validate=False)
            for row in rows]


def unique_rows(rows: np.ndarray) -> np.ndarray:
    """Indices of first occurrences of distinct rows, in order of appearance."""
    _, first = np.unique(rows, axis=0, return_index=True)
    return np.sort(first)


@dataclass(frozen=True)
class OrbitMember:
    distribution: Distribution
    op: SymmetryOp


def orbit(d: Distribution, *, exchange: bool = False) -> list[OrbitMember]:
    """Distinct images of ``d`` with the first group element producing each."""
    group = symmetry_group(d.scenario, exchange)
    gathers = gather_maps(d.scenario, exchange)
    rows, den = integer_rows([d])
    images = rows[0][gathers]
    keep = unique_rows(images)
    dists = rows_to_distributions(images[keep], den, d.scenario)
    return [OrbitMember(dist, group[i]) for dist, i in zip(dists, keep)]


def orbit_union(seeds: Sequence[Distribution], *, exchange: bool = True) -> list[Distribution]:
    """Deduplicated union of the orbits of ``seeds``."""
    scenario = seeds[0].scenario
    gathers = gather_maps(scenario, exchange)
    rows, den = integer_rows(seeds)
    images = rows[:, gathers].reshape(-1, rows.shape[1])
    keep = unique_rows(images)
    return rows_to_distributions(images[keep], den, scenario)


def orbit_size(seeds: Sequence[Distribution], *, exchange: bool = True) -> int:
    scenario = seeds[0].scenario
    gathers = gather_maps(scenario, exchange)
    rows, _ = integer_rows(seeds)
    images = rows[:, gathers].reshape(-1, rows.shape[1])
    return int(np.unique(images, axis=0).shape[0])


def find_relabelling(source: Distribution, target: Distribution, *, exchange: bool = False):
    """First group element mapping ``source`` onto ``target``, or None."""
    group = symmetry_group(source.scenario, exchange)
    gathers = gather_maps(source.scenario, exchange)
    rows, den = integer_rows([source, target])
    hits = np.nonzero((rows[0][gathers] == rows[1]).all(axis=1))[0]
    return group[hits[0]] if hits.size else None


# deterministic strategies ----------------------------------------------------

@dataclass(frozen=True)
class DeterministicStrategy:
    alice: tuple[int, ...]
    bob: tuple[int, ...]

    def distribution(self, scenario) -> Distribution:
        scenario = Scenario.of(scenario)
        return Distribution.from_function(
            scenario, lambda a, b, x, y: 1 if (x == self.alice[a] and y == self.bob[b]) else 0,
            validate=False)


def deterministic_strategies(scenario) -> list[DeterministicStrategy]:
    ia, ib, oa, ob = Scenario.of(scenario).shape
    return [DeterministicStrategy(fa, fb)
            for fa in product(range(oa), repeat=ia) for fb in product(range(ob), repeat=ib)]


@lru_cache(maxsize=None)
def deterministic_points(scenario) -> tuple[Distribution, ...]:
    scenario = Scenario.of(scenario)
    return tuple(s.distribution(scenario) for s in deterministic_strategies(scenario))


def deterministic_matrix(scenario) -> np.ndarray:
    """0/1 matrix with one C-ordered deterministic point per column."""
    rows, _ = integer_rows(deterministic_points(Scenario.of(scenario)))
    return rows.T


# coarse-graining and general local processing --------------------------------

@dataclass(frozen=True)
class CoarseGraining:
    """Per-(party, input) outcome maps; merged outcomes keep the smallest label."""

    maps_a: tuple[tuple[int, ...], ...]
    maps_b: tuple[tuple[int, ...], ...]

    @property
    def scenario(self) -> Scenario:
        return Scenario(len(self.maps_a), len(self.maps_b), len(self.maps_a[0]), len(self.maps_b[0]))

    @property
    def merged_inputs(self) -> int:
        """Number of (party, input) slots whose map is not the identity."""
        return sum(m != tuple(range(len(m))) for m in self.maps_a + self.maps_b)

    def to_json(self) -> dict:
        return {"maps_a": [list(m) for m in self.maps_a], "maps_b": [list(m) for m in self.maps_b]}


def merge_map(n: int, pair: tuple[int, int] | None) -> tuple[int, ...]:
    if pair is None:
        return tuple(range(n))
    lo, hi = sorted(pair)
    return tuple(lo if x == hi else x for x in range(n))


def apply_coarse_graining(g: CoarseGraining, d: Distribution) -> Distribution:
    """Sum probabilities over merged outcomes, staying in the original frame."""
    if g.scenario != d.scenario:
        raise IncompatibleScenario(f"coarse-graining for {g.scenario} applied to {d.scenario}")
    arr = np.full(d.scenario.shape, Fraction(0), dtype=object)
    for a, b, x, y in np.ndindex(*d.scenario.shape):
        arr[a, b, g.maps_a[a][x], g.maps_b[b][y]] += d.probs[a, b, x, y]
    return Distribution(d.scenario, arr, validate=False)


def two_to_one_coarse_grainings(scenario) -> list[CoarseGraining]:
    """Every choice of identity or a single pair merge per (party, input), minus the identity."""
    ia, ib, oa, ob = Scenario.of(scenario).shape
    choices_a = [None] + [p for p in product(range(oa), repeat=2) if p[0] < p[1]]
    choices_b = [None] + [p for p in product(range(ob), repeat=2) if p[0] < p[1]]
    out = []
    for ca in product(choices_a, repeat=ia):
        for cb in product(choices_b, repeat=ib):
            if all(c is None for c in ca + cb):
                continue
            out.append(CoarseGraining(tuple(merge_map(oa, c) for c in ca),
                                      tuple(merge_map(ob, c) for c in cb)))
    return out


def coarse_graining_census(scenario) -> dict[int, int]:
    counts: dict[int, int] = {}
    for g in two_to_one_coarse_grainings(scenario):
        counts[g.merged_inputs] = counts.get(g.merged_inputs, 0) + 1
    return dict(sorted(counts.items(), reverse=True))


@dataclass(frozen=True)
class LocalProcessing:
    """Deterministic local pre/post-processing.

    Party A feeds ``in_a[a']`` to its device and outputs ``out_a[a'][x]`` given
    the device outcome ``x``; likewise for B. Output alphabets stay the same size.
    """

    in_a: tuple[int, ...]
    out_a: tuple[tuple[int, ...], ...]
    in_b: tuple[int, ...]
    out_b: tuple[tuple[int, ...], ...]

    def apply(self, d: Distribution) -> Distribution:
        arr = np.full(d.scenario.shape, Fraction(0), dtype=object)
        ia, ib, oa, ob = d.scenario.shape
        for a2, b2, x, y in np.ndindex(ia, ib, oa, ob):
            arr[a2, b2, self.out_a[a2][x], self.out_b[b2][y]] += d.probs[self.in_a[a2], self.in_b[b2], x, y]
        return Distribution(d.scenario, arr, validate=False)


def losr_generators(d: Distribution) -> dict[str, list[Distribution]]:
    """Generating points of the LOSR+E hull of ``d``: relabellings, 2-to-1 coarse-grainings, locals."""
    return {
        "relabelled": [m.distribution for m in orbit(d)],
        "coarse_grained": [apply_coarse_graining(g, d) for g in two_to_one_coarse_grainings(d.scenario)],
        "locals": list(deterministic_points(d.scenario)),
    }


def random_relabelling(scenario, rng: np.random.Generator) -> LocalRelabelling:
    ia, ib, oa, ob = Scenario.of(scenario).shape
    perm = lambda n: tuple(int(v) for v in rng.permutation(n))
    return LocalRelabelling(perm(ia), perm(ib), tuple(perm(oa) for _ in range(ia)),
                            tuple(perm(ob) for _ in range(ib)))


def relabelling_by_output_swap(scenario, party: str, input: int, pair: tuple[int, int]) -> LocalRelabelling:
    """Swap two outcomes of one party only when that party's input is ``input``."""
    r = LocalRelabelling.identity(scenario)
    n = len(r.outputs_a[0]) if party.upper() == "A" else len(r.outputs_b[0])
    swap = list(range(n))
    swap[pair[0]], swap[pair[1]] = pair[1], pair[0]
    if party.upper() == "A":
        outs = list(r.outputs_a)
        outs[input] = tuple(swap)
        return LocalRelabelling(r.input_a, r.input_b, tuple(outs), r.outputs_b)
    outs = list(r.outputs_b)
    outs[input] = tuple(swap)
    return LocalRelabelling(r.input_a, r.input_b, r.outputs_a, tuple(outs))


def iter_gathers(ops: Iterable, scenario) -> Iterable[np.ndarray]:
    for op in ops:
        yield gather_map(op, scenario)
