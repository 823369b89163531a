"""Exact rational linear programming.

The certified path is a revised simplex over ``gmpy2.mpq`` with Bland's
anti-cycling rule. A floating-point HiGHS solve is used only to propose a
starting basis; whatever it proposes is re-checked exactly and discarded if it
is not primal feasible.

Standard form is ``min c.x  s.t.  A x = b, x >= 0``. Inequality form
``max c.x  s.t.  G x <= h`` with free ``x`` is solved through its dual.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Sequence

import numpy as np
from gmpy2 import mpq
from scipy.optimize import linprog

log = logging.getLogger(__name__)

ZERO = mpq(0)
ONE = mpq(1)


class Status(str, Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"


def _q(v) -> mpq:
    if isinstance(v, Fraction):
        return mpq(int(v.numerator), int(v.denominator))
    if isinstance(v, (np.integer,)):
        return mpq(int(v))
    return mpq(v)


def exact_matrix(M) -> np.ndarray:
    """Object array of Python ints / Fractions (numpy scalars would degrade to floats)."""
    M = np.asarray(M, dtype=object)
    out = np.empty(M.shape, dtype=object)
    for idx, v in np.ndenumerate(M):
        out[idx] = int(v) if isinstance(v, (int, np.integer)) else Fraction(v)
    return out


def _frac(v: mpq) -> Fraction:
    return Fraction(int(v.numerator), int(v.denominator))


@dataclass
class StandardResult:
    status: Status
    objective: Fraction | None = None
    x: list[Fraction] | None = None
    y: list[Fraction] | None = None
    basis: list[int] | None = None
    farkas: list[Fraction] | None = None   # A^T y <= 0, b.y > 0 when infeasible
    ray: list[Fraction] | None = None      # d >= 0, A d = 0, c.d < 0 when unbounded
    pivots: int = 0
    warm_started: bool = False


class _Simplex:
    """Revised simplex state with an explicit exact basis inverse."""

    def __init__(self, cols: list[list[tuple[int, mpq]]], b: list[mpq], m: int):
        self.cols = cols
        self.n = len(cols)
        self.m = m
        self.b = b
        self.pivots = 0

    def column(self, j: int):
        return self.cols[j] if j < self.n else [(j - self.n, ONE)]

    def start_artificial(self):
        self.basis = [self.n + i for i in range(self.m)]
        self.binv = [[ONE if i == k else ZERO for k in range(self.m)] for i in range(self.m)]
        self.xb = list(self.b)

    def start_from(self, basis: Sequence[int]) -> bool:
        """Factor the given basis exactly; False if singular or infeasible."""
        m = self.m
        aug = [[ZERO] * (2 * m) for _ in range(m)]
        for k, j in enumerate(basis):
            for i, v in self.column(j):
                aug[i][k] = v
        for i in range(m):
            aug[i][m + i] = ONE
        for c in range(m):
            piv = next((r for r in range(c, m) if aug[r][c] != 0), None)
            if piv is None:
                return False
            aug[c], aug[piv] = aug[piv], aug[c]
            inv = ONE / aug[c][c]
            aug[c] = [v * inv for v in aug[c]]
            for r in range(m):
                if r != c and aug[r][c] != 0:
                    f = aug[r][c]
                    ar, ac = aug[r], aug[c]
                    aug[r] = [ar[k] - f * ac[k] for k in range(2 * m)]
        binv = [row[m:] for row in aug]
        xb = [sum((binv[i][k] * self.b[k] for k in range(m) if self.b[k] != 0), ZERO) for i in range(m)]
        if any(v < 0 for v in xb):
            return False
        self.basis, self.binv, self.xb = list(basis), binv, xb
        return True

    def ftran(self, j: int) -> list[mpq]:
        col = self.column(j)
        return [sum((row[i] * v for i, v in col), ZERO) for row in self.binv]

    def duals(self, cost) -> list[mpq]:
        y = [ZERO] * self.m
        for i, j in enumerate(self.basis):
            cj = cost(j)
            if cj != 0:
                row = self.binv[i]
                for k in range(self.m):
                    if row[k] != 0:
                        y[k] += cj * row[k]
        return y

    def pivot(self, r: int, j: int, u: list[mpq]):
        inv = ONE / u[r]
        br = [v * inv for v in self.binv[r]]
        xr = self.xb[r] * inv
        for i in range(self.m):
            if i != r and u[i] != 0:
                f = u[i]
                bi = self.binv[i]
                self.binv[i] = [bi[k] - f * br[k] for k in range(self.m)]
                self.xb[i] -= f * xr
        self.binv[r] = br
        self.xb[r] = xr
        self.basis[r] = j
        self.pivots += 1

    def reduced_cost(self, j: int, y, cost) -> mpq:
        return cost(j) - sum((y[i] * v for i, v in self.column(j)), ZERO)

    def run(self, cost, allowed: int):
        """Minimize; columns >= ``allowed`` never enter. Returns (status, entering, u)."""
        while True:
            y = self.duals(cost)
            basic = set(self.basis)
            enter = None
            for j in range(allowed):
                if j not in basic and self.reduced_cost(j, y, cost) < 0:
                    enter = j
                    break
            if enter is None:
                return Status.OPTIMAL, None, None
            u = self.ftran(enter)
            best, leave = None, None
            for i in range(self.m):
                if u[i] > 0:
                    ratio = self.xb[i] / u[i]
                    if best is None or ratio < best or (ratio == best and self.basis[i] < self.basis[leave]):
                        best, leave = ratio, i
            if leave is None:
                return Status.UNBOUNDED, enter, u
            self.pivot(leave, enter, u)


def _to_columns(A) -> tuple[list[list[tuple[int, mpq]]], int, int]:
    A = exact_matrix(A)
    m, n = A.shape
    cols = []
    for j in range(n):
        cols.append([(i, _q(A[i, j])) for i in range(m) if A[i, j] != 0])
    return cols, m, n


def float_basis(c, A, b) -> list[int] | None:
    """Candidate optimal basis from a floating-point dual simplex solve."""
    Af = np.array(A, dtype=float)
    m, n = Af.shape
    try:
        res = linprog(np.array(c, dtype=float), A_eq=Af, b_eq=np.array(b, dtype=float),
                      bounds=(0, None), method="highs-ds")
    except ValueError:
        return None
    if res.status != 0:
        return None
    x = res.x
    y = res.eqlin.marginals
    red = np.array(c, dtype=float) - Af.T @ y
    support = [j for j in np.argsort(-x) if x[j] > 1e-9]
    rest = [j for j in np.argsort(np.abs(red)) if x[j] <= 1e-9]
    chosen, q = [], []
    scale = max(1.0, float(np.abs(Af).max()))
    for j in support + rest:
        v = Af[:, j] / scale
        for w in q:
            v = v - (w @ v) * w
        norm = np.linalg.norm(v)
        if norm > 1e-9:
            q.append(v / norm)
            chosen.append(int(j))
            if len(chosen) == m:
                return chosen
    return None


def solve_standard(c, A, b, *, basis_hint: Sequence[int] | None = None, warm: bool = True) -> StandardResult:
    """Exactly minimize ``c.x`` subject to ``A x = b``, ``x >= 0``."""
    cols, m, n = _to_columns(A)
    cq = [_q(v) for v in c]
    bq = [_q(v) for v in b]
    sign = [ONE if v >= 0 else -ONE for v in bq]
    cols_s = [[(i, v * sign[i]) for i, v in col] for col in cols]
    bs = [v * sign[i] for i, v in enumerate(bq)]
    sx = _Simplex(cols_s, bs, m)

    if basis_hint is None and warm and n and m:
        basis_hint = float_basis(c, A, b)
    warm_ok = basis_hint is not None and len(basis_hint) == m and sx.start_from(basis_hint)
    if not warm_ok:
        sx.start_artificial()
        status, _, _ = sx.run(lambda j: ONE if j >= n else ZERO, n)
        phase1 = sum((v for j, v in zip(sx.basis, sx.xb) if j >= n), ZERO)
        if phase1 > 0:
            y = sx.duals(lambda j: ONE if j >= n else ZERO)
            farkas = [_frac(y[i] * sign[i]) for i in range(m)]
            return StandardResult(Status.INFEASIBLE, farkas=farkas, pivots=sx.pivots)
        # drive zero-level artificials out where a real column can replace them
        for r in range(m):
            if sx.basis[r] >= n:
                basic = set(sx.basis)
                for j in range(n):
                    if j in basic:
                        continue
                    u = sx.ftran(j)
                    if u[r] != 0:
                        sx.pivot(r, j, u)
                        break

    cost = lambda j: cq[j] if j < n else ZERO
    status, enter, u = sx.run(cost, n)
    if status is Status.UNBOUNDED:
        ray = [ZERO] * n
        ray[enter] = ONE
        for i, j in enumerate(sx.basis):
            if j < n:
                ray[j] = -u[i]
        return StandardResult(Status.UNBOUNDED, ray=[_frac(v) for v in ray], pivots=sx.pivots,
                              warm_started=warm_ok)
    x = [ZERO] * n
    for i, j in enumerate(sx.basis):
        if j < n:
            x[j] = sx.xb[i]
    y = sx.duals(cost)
    y = [y[i] * sign[i] for i in range(m)]
    obj = sum((cq[j] * x[j] for j in range(n) if x[j] != 0), ZERO)
    return StandardResult(Status.OPTIMAL, _frac(obj), [_frac(v) for v in x], [_frac(v) for v in y],
                          list(sx.basis), pivots=sx.pivots, warm_started=warm_ok)


# inequality form ----------------------------------------------------------------

@dataclass
class InequalityResult:
    """Outcome of ``max c.x s.t. G x <= h``.

    ``x`` is a primal optimum and ``y >= 0`` a dual optimum with ``G^T y = c``
    and ``h.y = objective``. When infeasible, ``farkas`` is ``r >= 0`` with
    ``G^T r = 0`` and ``h.r < 0``. When unbounded, ``ray`` satisfies
    ``G d <= 0`` and ``c.d > 0``.
    """

    status: Status
    objective: Fraction | None = None
    x: list[Fraction] | None = None
    y: list[Fraction] | None = None
    farkas: list[Fraction] | None = None
    ray: list[Fraction] | None = None
    pivots: int = 0
    warm_started: bool = False
    meta: dict = field(default_factory=dict)


def solve_inequality(c, G, h, *, maximize: bool = True, warm: bool = True) -> InequalityResult:
    c = [Fraction(int(v)) if isinstance(v, np.integer) else Fraction(v) for v in c]
    if not maximize:
        c = [-v for v in c]
    G = exact_matrix(G)
    h = [Fraction(int(v)) if isinstance(v, np.integer) else Fraction(v) for v in h]
    dual = solve_standard(h, G.T, c, warm=warm)
    if dual.status is Status.OPTIMAL:
        obj = dual.objective if maximize else -dual.objective
        return InequalityResult(Status.OPTIMAL, obj, dual.y, dual.x, pivots=dual.pivots,
                                warm_started=dual.warm_started)
    if dual.status is Status.UNBOUNDED:
        return InequalityResult(Status.INFEASIBLE, farkas=dual.ray, pivots=dual.pivots)
    # dual infeasible: primal is unbounded if it is feasible at all
    feas = solve_standard(h, G.T, [0] * len(c), warm=False)
    if feas.status is Status.UNBOUNDED:
        return InequalityResult(Status.INFEASIBLE, farkas=feas.ray, pivots=dual.pivots + feas.pivots)
    return InequalityResult(Status.UNBOUNDED, ray=dual.farkas, pivots=dual.pivots + feas.pivots)


def check_inequality(res: InequalityResult, c, G, h, *, maximize: bool = True) -> bool:
    """Re-verify a certificate by exact substitution."""
    G = exact_matrix(G)
    c = [Fraction(int(v)) if isinstance(v, np.integer) else Fraction(v) for v in c]
    if not maximize:
        c = [-v for v in c]
    h = [Fraction(int(v)) if isinstance(v, np.integer) else Fraction(v) for v in h]
    m, n = G.shape
    dot = lambda u, v: sum((a * b for a, b in zip(u, v) if a and b), Fraction(0))
    if res.status is Status.OPTIMAL:
        Gx = [dot(G[i], res.x) for i in range(m)]
        GTy = [dot(G[:, j], res.y) for j in range(n)]
        obj = res.objective if maximize else -res.objective
        return (all(Gx[i] <= h[i] for i in range(m)) and all(v >= 0 for v in res.y)
                and GTy == c and dot(c, res.x) == obj == dot(h, res.y))
    if res.status is Status.INFEASIBLE:
        r = res.farkas
        return (all(v >= 0 for v in r) and all(dot(G[:, j], r) == 0 for j in range(n))
                and dot(h, r) < 0)
    d = res.ray
    return all(dot(G[i], d) <= 0 for i in range(m)) and dot(c, d) > 0
