"""Numerical searches for BC violations.

* ``maximize_bc``: multistart L-BFGS-B over mixtures of generator points,
  weights parameterized by a softmax so they stay on the simplex.
* ``region_scan`` / ``violation_boundary``: the (eps, v) plane for the mixing
  families v * p_iso(eps) + (1 - v) * p_C and its tilde variant.
* ``q_sweep``: BC^4 of a fixed distribution as a function of the Tsallis order.

A search that finds nothing reports "no violation found (evidence)"; it never
claims a point is entropically classical.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Sequence

import numpy as np
from scipy.optimize import brentq, minimize

from . import catalog
from .bell import evaluate, i2233
from .distributions import S2233, Distribution, mix
from .entropy import BC_FORMS, SHANNON_SWITCH, TOL, bc, bc_over_v
from .errors import EmptyGenerators, EpsOutOfRange, MismatchedScenario

NO_VIOLATION = "no violation found (evidence)"
VIOLATION = "violation found"


# vectorized entropies over batches of flat distributions ------------------------

class ComponentMap:
    """Linear map from C-ordered probabilities to the 8 coexisting distributions."""

    def __init__(self, scenario=S2233):
        ia, ib, oa, ob = scenario.shape
        rows, seg = [], []
        idx = lambda a, b, x, y: ((a * ib + b) * oa + x) * ob + y
        for a in range(2):
            for x in range(oa):
                rows.append([1 if (aa == a and bb == 0 and xx == x) else 0
                             for aa in range(ia) for bb in range(ib) for xx in range(oa) for yy in range(ob)])
                seg.append(a)
        for b in range(2):
            for y in range(ob):
                rows.append([1 if (bb == b and aa == 0 and yy == y) else 0
                             for aa in range(ia) for bb in range(ib) for xx in range(oa) for yy in range(ob)])
                seg.append(2 + b)
        for a in range(2):
            for b in range(2):
                for x in range(oa):
                    for y in range(ob):
                        r = [0] * scenario.dim
                        r[idx(a, b, x, y)] = 1
                        rows.append(r)
                        seg.append(4 + 2 * a + b)
        self.matrix = np.array(rows, dtype=float)
        self.segment = np.array(seg)

    def segment_sum(self, vals: np.ndarray) -> np.ndarray:
        """Sum the last axis within each of the 8 segments."""
        out = np.zeros(vals.shape[:-1] + (8,))
        for s in range(8):
            out[..., s] = vals[..., self.segment == s].sum(axis=-1)
        return out


_CMAP: dict = {}


def _cmap(scenario=S2233) -> ComponentMap:
    if scenario not in _CMAP:
        _CMAP[scenario] = ComponentMap(scenario)
    return _CMAP[scenario]


def _elementwise_entropy(r: np.ndarray, q: float) -> np.ndarray:
    pos = r > 0
    safe = np.where(pos, r, 1.0)
    if abs(q - 1) < SHANNON_SWITCH:
        return np.where(pos, -safe * np.log(safe), 0.0)
    return np.where(pos, safe * -np.expm1((q - 1) * np.log(safe)) / (q - 1), 0.0)


def bc_batch(flat: np.ndarray, q: float, which: int = 4, scenario=S2233) -> np.ndarray:
    """BC values for a batch of C-ordered probability rows (..., dim)."""
    cm = _cmap(scenario)
    r = flat @ cm.matrix.T
    ents = cm.segment_sum(_elementwise_entropy(r, q))
    return ents @ BC_FORMS[which - 1]


# the multistart optimizer ----------------------------------------------------------

@dataclass
class SearchProblem:
    generators: Sequence[Distribution]
    q: float = 1.0
    which: int = 4
    restarts: int = 200
    tol: float = TOL
    seed: int = 0
    vertex_starts: bool = True
    edge_starts: bool = True
    maxiter: int = 3000


@dataclass
class RestartRecord:
    index: int
    kind: str
    value: float
    iterations: int


@dataclass
class SearchResult:
    best_value: float
    best_weights: np.ndarray
    trace: list[RestartRecord]
    label: str
    q: float
    which: int

    def best_distribution(self, generators: Sequence[Distribution]) -> np.ndarray:
        flat = np.array([g.numeric.ravel() for g in generators])
        return self.best_weights @ flat

    def to_json(self) -> dict:
        return {"best_value": self.best_value, "best_weights": [float(w) for w in self.best_weights],
                "label": self.label, "q": self.q, "which": self.which,
                "restarts": [{"index": r.index, "kind": r.kind, "value": r.value, "iterations": r.iterations}
                             for r in self.trace]}


class _Objective:
    def __init__(self, generators: Sequence[Distribution], q: float, which: int):
        cm = _cmap(generators[0].scenario)
        flat = np.array([g.numeric.ravel() for g in generators])   # (n, dim)
        self.K = cm.matrix @ flat.T                                  # (48, n)
        self.coef = BC_FORMS[which - 1][cm.segment]                  # (48,)
        self.q = q
        self.shannon = abs(q - 1) < SHANNON_SWITCH

    def value_grad_w(self, w: np.ndarray) -> tuple[float, np.ndarray]:
        r = self.K @ w
        pos = r > 0
        safe = np.where(pos, r, 1.0)
        if self.shannon:
            ent = np.where(pos, -safe * np.log(safe), 0.0)
            dent = np.where(pos, -(np.log(safe) + 1), 0.0)
        else:
            q = self.q
            ent = np.where(pos, safe * -np.expm1((q - 1) * np.log(safe)) / (q - 1), 0.0)
            dent = np.where(pos, (1 - q * safe ** (q - 1)) / (q - 1), 0.0)
        value = float(self.coef @ ent)
        grad = (self.coef * dent) @ self.K
        return value, grad

    def __call__(self, theta: np.ndarray) -> tuple[float, np.ndarray]:
        """Negated BC value and gradient in softmax coordinates."""
        z = theta - theta.max()
        w = np.exp(z)
        w /= w.sum()
        val, gw = self.value_grad_w(w)
        gtheta = w * (gw - w @ gw)
        return -val, -gtheta


def _softmax(theta: np.ndarray) -> np.ndarray:
    z = np.exp(theta - theta.max())
    return z / z.sum()


def _starts(problem: SearchProblem, n: int, rng: np.random.Generator) -> list[tuple[str, np.ndarray]]:
    starts = []
    floor = 1e-12
    for k in range(problem.restarts):
        starts.append((f"dirichlet:{k}", np.log(rng.dirichlet(np.ones(n)) + floor)))
    if problem.vertex_starts:
        for k in range(n):
            w = np.full(n, 1e-6)
            w[k] = 1.0
            starts.append((f"vertex:{k}", np.log(w)))
    if problem.edge_starts:
        for i, j in combinations(range(n), 2):
            w = np.full(n, 1e-6)
            w[i] = w[j] = 0.5
            starts.append((f"edge:{i}-{j}", np.log(w)))
    return starts


def maximize_bc(problem: SearchProblem) -> SearchResult:
    """Multistart maximization of a BC expression over Conv(generators)."""
    gens = list(problem.generators)
    if not gens:
        raise EmptyGenerators("maximize_bc needs at least one generator")
    if len({g.scenario for g in gens}) > 1:
        raise MismatchedScenario("generators must share a scenario")
    obj = _Objective(gens, problem.q, problem.which)
    rng = np.random.default_rng(problem.seed)
    n = len(gens)
    best_val, best_w, trace = -math.inf, None, []
    for index, (kind, theta0) in enumerate(_starts(problem, n, rng)):
        res = minimize(obj, theta0, jac=True, method="L-BFGS-B",
                       options={"maxiter": problem.maxiter, "ftol": 0.0, "gtol": 1e-16, "maxcor": 30})
        w = _softmax(res.x)
        val = obj.value_grad_w(w)[0]
        trace.append(RestartRecord(index, kind, val, int(res.nit)))
        if val > best_val:
            best_val, best_w = val, w
    label = VIOLATION if best_val > problem.tol else NO_VIOLATION
    return SearchResult(best_val, best_w, trace, label, problem.q, problem.which)


def search_generators(eps) -> list[Distribution]:
    """p_iso(eps) together with the 30 deterministic locals of the table1 list."""
    return [catalog.p_iso(eps)] + [catalog.table1_vertex(k) for k in catalog.TABLE1_LOCAL]


def restrict_to_nonclassical_generators(eps) -> list[Distribution]:
    """Generators of the nonclassical part of Conv({p_iso(eps)} u locals) for 1/2 < eps <= 4/7.

    In that range p_iso violates only I2233^1, so only the locals saturating it
    (I2233^1 = 2) can share a nonclassical face with it.
    """
    eps = Fraction(eps) if not isinstance(eps, float) else Fraction(repr(eps))
    if not Fraction(1, 2) < eps <= Fraction(4, 7):
        raise EpsOutOfRange(f"restriction holds for 1/2 < eps <= 4/7, got {eps}")
    return search_generators(eps)


def saturating_locals() -> list[Distribution]:
    """Deterministic points with I2233^1 = 2, found by direct evaluation."""
    from .symmetry import deterministic_points
    f = i2233()
    return [d for d in deterministic_points(S2233) if evaluate(f, d) == 2]


# region scans ----------------------------------------------------------------------

FAMILIES = ("p_E", "p_tilde_E")


def _family_rows(family: str, eps: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Flat float rows of v * p_iso(eps) + (1 - v) * p_C over a broadcast grid."""
    nl = (catalog.p_nl() if family == "p_E" else catalog.p_nl_tilde()).numeric.ravel()
    noise = catalog.p_noise(S2233).numeric.ravel()
    pc = catalog.p_c2233().numeric.ravel()
    e = eps[..., None]
    vv = v[..., None]
    return vv * (e * nl + (1 - e) * noise) + (1 - vv) * pc


def family_distribution(family: str, eps, v) -> Distribution:
    if family == "p_E":
        return catalog.iso_mix(eps, v)
    if family == "p_tilde_E":
        return catalog.iso_mix_tilde(eps, v)
    raise ValueError(f"unknown family {family!r}; choose from {FAMILIES}")


def family_target(family: str, eps) -> Distribution:
    return catalog.p_iso(eps) if family == "p_E" else catalog.p_iso_tilde(eps)


@dataclass
class RegionScan:
    family: str
    eps: np.ndarray
    v: np.ndarray
    q_list: list[float]
    values: np.ndarray          # (len(q_list), len(eps), len(v))
    tol: float

    @property
    def mask(self) -> np.ndarray:
        return self.values > self.tol

    def boundary_estimate(self, qi: int) -> float | None:
        """Smallest eps on the grid with a violating cell."""
        rows = np.nonzero(self.mask[qi].any(axis=1))[0]
        return float(self.eps[rows[0]]) if rows.size else None

    def rows(self):
        for qi, q in enumerate(self.q_list):
            for i, e in enumerate(self.eps):
                for j, vv in enumerate(self.v):
                    yield (float(e), float(vv), q, float(self.values[qi, i, j]), bool(self.mask[qi, i, j]))


def region_scan(q_list: Sequence[float], grid: int = 201, *, family: str = "p_E",
                tol: float = TOL, eps=None, v=None) -> RegionScan:
    if family not in FAMILIES:
        raise ValueError(f"unknown family {family!r}; choose from {FAMILIES}")
    eps = np.linspace(0, 1, grid) if eps is None else np.asarray(eps, dtype=float)
    v = np.linspace(0, 1, grid) if v is None else np.asarray(v, dtype=float)
    E, V = np.meshgrid(eps, v, indexing="ij")
    rows = _family_rows(family, E, V)
    values = np.stack([bc_batch(rows, q) for q in q_list])
    return RegionScan(family, eps, v, list(q_list), values, tol)


def _violation_exists(family: str, q: float, eps: float, log_v_grid: np.ndarray) -> bool:
    """Sign test on BC/v along the mixing line, scale-free in v."""
    target = family_target(family, Fraction(repr(eps)))
    base = catalog.p_c2233()
    return any(bc_over_v(base, target, q, lv) > 0 for lv in log_v_grid)


DEFAULT_LOG_V = np.concatenate([-np.logspace(7, 0, 57), np.linspace(-1, 0, 9)[1:]])


def violation_boundary(q: float, *, family: str = "p_E", lo: float = 0.5, hi: float = 0.7,
                       tol: float = 1e-4, log_v_grid=DEFAULT_LOG_V) -> tuple[float, float]:
    """Bracket [a, b] of the smallest eps admitting a violation for some v in (0, 1]."""
    exists = lambda e: _violation_exists(family, q, e, log_v_grid)
    if exists(lo) or not exists(hi):
        raise ValueError("boundary not bracketed by the initial interval")
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if exists(mid):
            hi = mid
        else:
            lo = mid
    return lo, hi


# q sweep -------------------------------------------------------------------------------

@dataclass
class QSweep:
    qs: np.ndarray
    values: np.ndarray
    argmax_q: float
    max_value: float
    violation_interval: tuple[float, float] | None   # [start, end] of the first violating run


def q_sweep(d: Distribution, q_range=(1.0, 3.0), steps: int = 201, which: int = 4) -> QSweep:
    lo, hi = q_range
    if lo <= 0:
        raise ValueError("Tsallis order must be positive")
    qs = np.linspace(lo, hi, steps)
    fn = lambda q: bc(d, float(q), which)
    vals = np.array([fn(q) for q in qs])
    k = int(np.argmax(vals))
    interval = None
    pos = np.nonzero(vals > 0)[0]
    if pos.size:
        start = pos[0]
        end = start
        while end + 1 < steps and vals[end + 1] > 0:
            end += 1
        left = qs[start] if start == 0 else brentq(fn, qs[start - 1], qs[start], xtol=1e-12)
        right = qs[end] if end == steps - 1 else brentq(fn, qs[end], qs[end + 1], xtol=1e-12)
        interval = (float(left), float(right))
    return QSweep(qs, vals, float(qs[k]), float(vals[k]), interval)


# a chain of mixtures where the Shannon and Tsallis verdicts differ -------------------------------

@dataclass
class FootnoteReport:
    identity_holds: bool
    tsallis2_pe: float
    shannon_pe: float
    shannon_mixed: float

    @property
    def ok(self) -> bool:
        return (self.identity_holds and self.tsallis2_pe > TOL and self.shannon_pe <= TOL
                and self.shannon_mixed > TOL)


def footnote_chain_check() -> FootnoteReport:
    """0.05 p_E(0.7, 0.4) + 0.95 p_C equals 0.02 p_iso(0.7) + 0.98 p_C, and the BC signs flip."""
    eps, v = Fraction(7, 10), Fraction(2, 5)
    pe = catalog.iso_mix(eps, v)
    lhs = mix([(Fraction(1, 20), pe), (Fraction(19, 20), catalog.p_c2233())])
    rhs = mix([(Fraction(1, 50), catalog.p_iso(eps)), (Fraction(49, 50), catalog.p_c2233())])
    return FootnoteReport(lhs == rhs, bc(pe, 2.0), bc(pe, 1.0), bc(lhs, 1.0))
