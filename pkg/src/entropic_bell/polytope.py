"""Exact LP questions about correlation polytopes.

Everything here returns certificates that can be re-checked by substitution
in rational arithmetic (``LPCertificate.verify``).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from . import bell
from .bell import BellFunctional, evaluate
from .distributions import S2233, Distribution, Scenario, is_no_signalling, mix
from .errors import EmptyGenerators, MismatchedScenario, SignallingInput
from .lp import Status, check_inequality, solve_inequality, solve_standard
from .nsspace import ns_coordinates
from .symmetry import deterministic_matrix, deterministic_points, orbit_size


@dataclass
class LPCertificate:
    """Result of an exact LP with everything needed to re-verify it.

    ``weights`` is the primal witness (weights over generating points, or
    no-signalling coordinates for the joint-violation LP). ``dual`` is either a
    separating ``BellFunctional`` or a Farkas vector.
    """

    status: Status
    objective: Fraction | None
    weights: list[Fraction] | None = None
    dual: object = None
    meta: dict = field(default_factory=dict)
    _check: object = field(default=None, repr=False)

    def verify(self) -> bool:
        return bool(self._check()) if self._check else False

    def to_json(self) -> str:
        dual = self.dual
        if isinstance(dual, BellFunctional):
            dual = json.loads(dual.to_json())
        elif dual is not None:
            dual = [str(v) for v in dual]
        return json.dumps({
            "status": self.status.value,
            "objective": None if self.objective is None else str(self.objective),
            "weights": None if self.weights is None else [str(v) for v in self.weights],
            "dual": dual,
            "meta": self.meta,
        })


def _dot(u, v) -> Fraction:
    return sum((a * b for a, b in zip(u, v) if a and b), Fraction(0))


# local weight --------------------------------------------------------------------

def local_weight(d: Distribution, *, warm: bool = True) -> LPCertificate:
    """Largest alpha with d = alpha * local + (1 - alpha) * no-signalling."""
    if not is_no_signalling(d):
        raise SignallingInput("local weight is defined for no-signalling distributions")
    L = deterministic_matrix(d.scenario)            # (dim, k) 0/1
    dim, k = L.shape
    target = list(d.probs.flat)
    A = np.concatenate([L, np.eye(dim, dtype=np.int64)], axis=1)
    c = [-1] * k + [0] * dim
    res = solve_standard(c, A, target, warm=warm)
    assert res.status is Status.OPTIMAL  # w = 0, s = d is always feasible and alpha <= 1
    alpha = -res.objective
    weights = res.x[:k]
    z = [-v for v in res.y]
    functional = None
    if alpha < 1:
        coeffs = np.array([-v for v in z], dtype=object).reshape(d.scenario.shape)
        functional = BellFunctional(d.scenario, coeffs, -1, bell.CUSTOM_TAG,
                                    {"source": "local-weight dual"})

    def check():
        cols = [[int(L[i, j]) for i in range(dim)] for j in range(k)]
        local_part = [sum((w * cols[j][i] for j, w in enumerate(weights) if w), Fraction(0))
                      for i in range(dim)]
        primal = (all(w >= 0 for w in weights) and sum(weights, Fraction(0)) == alpha
                  and all(t - lp >= 0 for t, lp in zip(target, local_part)))
        dual = (all(v >= 0 for v in z) and all(_dot(z, col) >= 1 for col in cols)
                and _dot(z, target) == alpha)
        return primal and dual

    return LPCertificate(Status.OPTIMAL, alpha, weights, functional,
                         {"pivots": res.pivots, "warm_started": res.warm_started}, check)


def local_decomposition(cert: LPCertificate, scenario=S2233) -> list[tuple[Fraction, Distribution]]:
    pts = deterministic_points(Scenario.of(scenario))
    return [(w, pts[j]) for j, w in enumerate(cert.weights) if w]


def is_local(d: Distribution) -> tuple[bool, LPCertificate]:
    cert = local_weight(d)
    return cert.objective == 1, cert


# H-representation models ----------------------------------------------------------

@dataclass
class PolytopeModel:
    """A polytope given by generators, by constraints, or both."""

    scenario: Scenario
    generators: list[Distribution] | None = None
    constraints: list[BellFunctional] | None = None
    symmetry_classes: dict | None = None

    def consistent(self) -> bool:
        if not self.generators or not self.constraints:
            return True
        return all(evaluate(f, g) <= f.bound for f in self.constraints for g in self.generators)


def pi_chsh_model(*, with_i2233_floor: bool = False) -> PolytopeModel:
    """No-signalling points satisfying every CHSH-type facet (optionally I2233^1 >= 2)."""
    cons = bell.positivity_functionals(S2233) + bell.chsh_orbit(S2233)
    if with_i2233_floor:
        rep = bell.i2233()
        cons = cons + [BellFunctional.from_geq(S2233, rep.coeffs, rep.bound, bell.I2233_TAG)]
    return PolytopeModel(S2233, constraints=cons)


def exact_rank(rows: Sequence[Sequence[int]]) -> int:
    """Rank of an integer matrix by fraction-free elimination."""
    mat = [list(map(int, r)) for r in rows]
    if not mat:
        return 0
    ncols = len(mat[0])
    rank, prev = 0, 1
    for col in range(ncols):
        piv = next((r for r in range(rank, len(mat)) if mat[r][col] != 0), None)
        if piv is None:
            continue
        mat[rank], mat[piv] = mat[piv], mat[rank]
        p = mat[rank]
        for r in range(rank + 1, len(mat)):
            row = mat[r]
            f = row[col]
            mat[r] = [(p[col] * row[c] - f * p[c]) // prev for c in range(ncols)]
        prev = p[col]
        rank += 1
    return rank


def _reduced_int(f: BellFunctional) -> list[int]:
    """Coefficients of f in no-signalling coordinates, scaled to integers."""
    ns = ns_coordinates(f.scenario)
    m = list(f.coeffs.flat)
    den = 1
    for v in m:
        den = den * v.denominator // np.gcd(den, v.denominator)
    mi = np.array([int(v * den) for v in m], dtype=object)
    return [int(v) for v in mi @ ns.basis.astype(object)]


@dataclass
class VertexReport:
    feasible: bool
    extremal: bool
    tight_constraints: list[int]
    rank: int


def verify_vertex(d: Distribution, model: PolytopeModel) -> VertexReport:
    """Feasibility and extremality of ``d`` within the no-signalling subspace."""
    if not model.constraints:
        raise ValueError("verify_vertex needs an H-representation")
    if d.scenario != model.scenario:
        raise MismatchedScenario(f"{d.scenario} vs model on {model.scenario}")
    values = [evaluate(f, d) for f in model.constraints]
    feasible = is_no_signalling(d) and all(v <= f.bound for v, f in zip(values, model.constraints))
    tight = [i for i, (v, f) in enumerate(zip(values, model.constraints)) if v == f.bound]
    rank = exact_rank([_reduced_int(model.constraints[i]) for i in tight])
    n = ns_coordinates(d.scenario).n
    return VertexReport(feasible, feasible and rank == n, tight, rank)


# joint violation (two I2233 functionals inside the CHSH polytope) ---------------

@lru_cache(maxsize=None)
def _chsh_rows() -> tuple[np.ndarray, np.ndarray]:
    """(G, h) rows over NS coordinates for positivity and the 648 CHSH facets."""
    ns = ns_coordinates(S2233)
    fs = bell.positivity_functionals(S2233) + bell.chsh_orbit(S2233)
    C = np.array([[int(v) for v in f.coeffs.flat] for f in fs], dtype=np.int64)
    b = np.array([int(f.bound) for f in fs], dtype=np.int64)
    return C @ ns.basis, b - C @ ns.offset


def joint_violation_lp(i: int, j: int | None, *, include_chsh: bool = True,
                       warm: bool = True) -> LPCertificate:
    """Max eps >= 0 with I2233^i and I2233^j both >= 2 + eps on a no-signalling point.

    Indices are 1-based orbit labels; ``j=None`` keeps only functional ``i``.
    With ``include_chsh`` all 648 CHSH-type facets must hold as well.
    """
    ns = ns_coordinates(S2233)
    orbit = bell.i2233_orbit()
    G_base, h_base = _chsh_rows()
    if not include_chsh:
        G_base, h_base = G_base[:36], h_base[:36]
    n = ns.n
    rows = [list(map(int, r)) + [0] for r in G_base]
    rhs = [int(v) for v in h_base]
    for idx in (i, j):
        if idx is None:
            continue
        m = np.array([int(v) for v in orbit[idx - 1].coeffs.flat], dtype=np.int64)
        red = m @ ns.basis
        rows.append([int(-v) for v in red] + [1])
        rhs.append(int(m @ ns.offset) - 2)
    rows.append([0] * n + [-1])
    rhs.append(0)
    c = [0] * n + [1]
    res = solve_inequality(c, rows, rhs, warm=warm)

    def check():
        return check_inequality(res, c, rows, rhs)

    meta = {"i": i, "j": j, "include_chsh": include_chsh, "pivots": res.pivots,
            "warm_started": res.warm_started}
    if res.status is Status.OPTIMAL:
        return LPCertificate(Status.OPTIMAL, res.objective, res.x, res.y, meta, check)
    if res.status is Status.INFEASIBLE:
        return LPCertificate(Status.INFEASIBLE, None, None, res.farkas, meta, check)
    return LPCertificate(Status.UNBOUNDED, None, None, res.ray, meta, check)


def point_from_coordinates(t: Sequence[Fraction], scenario=S2233) -> Distribution:
    ns = ns_coordinates(scenario)
    flat = [Fraction(int(ns.offset[k])) + sum((Fraction(int(ns.basis[k, j])) * t[j]
                                              for j in range(ns.n) if ns.basis[k, j]), Fraction(0))
            for k in range(len(ns.offset))]
    return Distribution(scenario, np.array(flat, dtype=object).reshape(Scenario.of(scenario).shape))


# V-representation membership and union convexity --------------------------------

def in_hull(p: Distribution, generators: Sequence[Distribution]) -> tuple[bool, list[Fraction] | None]:
    """Exact membership of ``p`` in Conv(generators); returns the weights when inside."""
    if not generators:
        raise EmptyGenerators("empty generator list")
    dim = p.scenario.dim
    A = [[g.probs.flat[i] for g in generators] for i in range(dim)] + [[1] * len(generators)]
    b = list(p.probs.flat) + [1]
    res = solve_standard([0] * len(generators), np.array(A, dtype=object), b)
    if res.status is not Status.OPTIMAL:
        return False, None
    return True, res.x


def _is_local_generators(gens: Sequence[Distribution]) -> bool:
    dets = set(deterministic_points(gens[0].scenario))
    return all(g in dets for g in gens)


@dataclass
class UnionReport:
    convex: bool | None        # None when the midpoint rule could not decide
    checked_segments: int
    witness: tuple | None = None


def _segment_in_union(v, w, P: PolytopeModel, Q: PolytopeModel, subdivisions: int):
    """True if the segment is proven inside P u Q, False if a point is outside both, else None."""
    ts = [Fraction(k, 2 * subdivisions) for k in range(1, 2 * subdivisions)]
    undecided = False
    for t in ts:
        pt = mix([(1 - t, v), (t, w)])
        in_p = in_hull(pt, P.generators)[0]
        in_q = in_hull(pt, Q.generators)[0]
        if in_p and in_q:
            return True, None      # [v, pt] in P and [pt, w] in Q by convexity
        if not in_p and not in_q:
            return False, pt
        undecided = True
    return (None if undecided else True), None


def union_is_convex(polys: Sequence[PolytopeModel], *, pairs=None, subdivisions: int = 1) -> UnionReport:
    """Pairwise vertex-segment test for convexity of a union of V-polytopes.

    A segment between a vertex of one polytope and a vertex of another is in the
    union when some interior point lies in both (each half then lies in one
    polytope). Segments with an endpoint shared by both vertex sets are trivially
    contained. ``pairs`` restricts the polytope pairs examined.
    """
    if any(not P.generators for P in polys):
        raise EmptyGenerators("union_is_convex needs V-representations")
    if len({P.scenario for P in polys}) > 1:
        raise MismatchedScenario("all polytopes must share a scenario")
    if pairs is None:
        pairs = [(a, b) for a in range(len(polys)) for b in range(a + 1, len(polys))]
    checked = 0
    verdict: bool | None = True
    for a, b in pairs:
        P, Q = polys[a], polys[b]
        vq, vp = set(Q.generators), set(P.generators)
        for v in P.generators:
            if v in vq:
                continue
            for w in Q.generators:
                if w in vp:
                    continue
                checked += 1
                ok, witness = _segment_in_union(v, w, P, Q, subdivisions)
                if ok is False:
                    return UnionReport(False, checked, (a, b, v, w, witness))
                if ok is None:
                    verdict = None
    return UnionReport(verdict, checked)


def orbit_vertex_count(seeds: Sequence[Distribution], *, exchange: bool = True) -> int:
    return orbit_size(list(seeds), exchange=exchange)
