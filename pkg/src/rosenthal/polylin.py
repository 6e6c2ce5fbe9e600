"""Exact linear programming and piecewise-linear norm queries.

Every universally quantified norm inequality in this package is reduced to
one of three LP-backed queries over norms of the form ``a -> max_j |l_j(a)|``:

* :func:`sup_norm_over_unit_ball`: ``sup {A(a) : B(a) <= 1}``
* :func:`min_norm_over_l1_sphere`: ``min {A(a) : sum w_i |a_i| = 1}``
* :func:`check_pwl_dominance`: does ``A(a) <= B(a) + eps * S(a)`` hold for all ``a``?

The simplex kernel works on ``gmpy2.mpq`` internally. Everything crossing the
module boundary is a :class:`fractions.Fraction`.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Any, Iterable, Optional, Sequence, Union

from gmpy2 import mpq

Number = Union[int, Fraction]
Vector = tuple[Fraction, ...]

UNBOUNDED = math.inf

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED_STATUS = "unbounded"


def as_fraction(x: Any) -> Fraction:
    """Coerce ints, Fractions, mpq and ``"p/q"`` strings to Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    if type(x).__name__ == "mpq":
        return Fraction(int(x.numerator), int(x.denominator))
    if isinstance(x, float):
        raise TypeError("floats are not accepted; pass an exact rational")
    return Fraction(x)


def as_vector(xs: Iterable[Any]) -> Vector:
    return tuple(as_fraction(x) for x in xs)


def fmt(x: Fraction) -> str:
    """Canonical ``p/q`` text (``p`` alone when the denominator is 1)."""
    x = as_fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _mpq_to_fraction(q) -> Fraction:
    return Fraction(int(q.numerator), int(q.denominator))


def _dot(u: Sequence, v: Sequence):
    return sum((x * y for x, y in zip(u, v) if x and y), Fraction(0))


# ---------------------------------------------------------------------------
# Linear programs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Constraint:
    coeffs: Vector
    rel: str
    rhs: Fraction

    def __post_init__(self):
        if self.rel not in ("<=", ">=", "="):
            raise ValueError(f"unknown relation {self.rel!r}")
        object.__setattr__(self, "coeffs", as_vector(self.coeffs))
        object.__setattr__(self, "rhs", as_fraction(self.rhs))

    def satisfied_by(self, x: Sequence[Fraction]) -> bool:
        lhs = _dot(self.coeffs, x)
        if self.rel == "<=":
            return lhs <= self.rhs
        if self.rel == ">=":
            return lhs >= self.rhs
        return lhs == self.rhs


Bound = tuple[Optional[Fraction], Optional[Fraction]]


@dataclass(frozen=True)
class LinearProgram:
    """Optimize ``objective . x`` subject to rows and per-variable boxes.

    ``bounds`` defaults to free variables. ``sense`` is ``"max"`` or ``"min"``.
    """

    objective: Vector
    constraints: tuple[Constraint, ...] = ()
    bounds: Optional[tuple[Bound, ...]] = None
    sense: str = "max"

    def __post_init__(self):
        obj = as_vector(self.objective)
        object.__setattr__(self, "objective", obj)
        cons = tuple(c if isinstance(c, Constraint) else Constraint(*c) for c in self.constraints)
        object.__setattr__(self, "constraints", cons)
        n = len(obj)
        for c in cons:
            if len(c.coeffs) != n:
                raise ValueError(f"constraint arity {len(c.coeffs)} != objective arity {n}")
        if self.bounds is None:
            object.__setattr__(self, "bounds", tuple((None, None) for _ in range(n)))
        else:
            if len(self.bounds) != n:
                raise ValueError("bounds arity mismatch")
            object.__setattr__(self, "bounds", tuple(
                (None if lo is None else as_fraction(lo), None if hi is None else as_fraction(hi))
                for lo, hi in self.bounds))
        if self.sense not in ("max", "min"):
            raise ValueError("sense must be 'max' or 'min'")

    @property
    def arity(self) -> int:
        return len(self.objective)

    def feasible(self, x: Sequence[Fraction]) -> bool:
        for (lo, hi), v in zip(self.bounds, x):
            if lo is not None and v < lo:
                return False
            if hi is not None and v > hi:
                return False
        return all(c.satisfied_by(x) for c in self.constraints)


@dataclass(frozen=True)
class LPSolution:
    status: str
    value: Optional[Fraction] = None
    x: Optional[Vector] = None

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL


class _Dictionary:
    """Chvatal-style dictionary ``x_B = b - A x_N``, ``z = z0 + c x_N``.

    Pivoting follows Bland's rule, which rules out cycling.
    """

    def __init__(self, rows, rhs, n_vars):
        self.m = len(rows)
        self.n = n_vars
        self.A = [list(r) for r in rows]
        self.b = list(rhs)
        self.nonbasic = list(range(n_vars))
        self.basic = list(range(n_vars, n_vars + self.m))
        self.c = [mpq(0)] * n_vars
        self.z0 = mpq(0)

    def pivot(self, r: int, j: int) -> None:
        A, b = self.A, self.b
        row = A[r]
        p = row[j]
        inv = 1 / p
        new_row = [v * inv for v in row]
        new_row[j] = inv
        br = b[r] * inv
        A[r] = new_row
        b[r] = br
        nz = [k for k, v in enumerate(new_row) if v]
        for i in range(self.m):
            if i == r:
                continue
            ri = A[i]
            f = ri[j]
            if not f:
                continue
            for k in nz:
                ri[k] -= f * new_row[k]
            ri[j] = -f * inv
            b[i] -= f * br
        f = self.c[j]
        if f:
            c = self.c
            for k in nz:
                c[k] -= f * new_row[k]
            c[j] = -f * inv
            self.z0 += f * br
        self.basic[r], self.nonbasic[j] = self.nonbasic[j], self.basic[r]

    def _entering(self) -> Optional[int]:
        best = None
        for j, cj in enumerate(self.c):
            if cj > 0 and (best is None or self.nonbasic[j] < self.nonbasic[best]):
                best = j
        return best

    def _leaving(self, j: int) -> Optional[int]:
        best = None
        best_ratio = None
        for i in range(self.m):
            a = self.A[i][j]
            if a > 0:
                ratio = self.b[i] / a
                if (best is None or ratio < best_ratio
                        or (ratio == best_ratio and self.basic[i] < self.basic[best])):
                    best, best_ratio = i, ratio
        return best

    def run(self) -> bool:
        """Iterate to optimality. Returns False when unbounded."""
        while True:
            j = self._entering()
            if j is None:
                return True
            r = self._leaving(j)
            if r is None:
                return False
            self.pivot(r, j)


def _standardize(lp: LinearProgram):
    """Rewrite as ``max c.y`` s.t. ``A y <= b``, ``y >= 0``.

    Returns rows, rhs, objective, objective offset, and the affine map
    ``x_i = shift_i + sum(coef * y_k)`` recovering original variables.
    """
    sign = 1 if lp.sense == "max" else -1
    cols: list[list[tuple[int, int]]] = []
    shift: list[Fraction] = []
    extra_rows: list[tuple[dict, Fraction]] = []
    ny = 0
    for lo, hi in lp.bounds:
        if lo is not None:
            cols.append([(ny, 1)])
            shift.append(lo)
            if hi is not None:
                if hi < lo:
                    return None
                extra_rows.append(({ny: Fraction(1)}, hi - lo))
            ny += 1
        elif hi is not None:
            cols.append([(ny, -1)])
            shift.append(hi)
            ny += 1
        else:
            cols.append([(ny, 1), (ny + 1, -1)])
            shift.append(Fraction(0))
            ny += 2

    def to_y(coeffs):
        out = [Fraction(0)] * ny
        const = Fraction(0)
        for a, col, s in zip(coeffs, cols, shift):
            if not a:
                continue
            const += a * s
            for k, sg in col:
                out[k] += a * sg
        return out, const

    rows, rhs = [], []
    for con in lp.constraints:
        coeffs, const = to_y(con.coeffs)
        bound = con.rhs - const
        if con.rel in ("<=", "="):
            rows.append(coeffs)
            rhs.append(bound)
        if con.rel in (">=", "="):
            rows.append([-v for v in coeffs])
            rhs.append(-bound)
    for d, bound in extra_rows:
        coeffs = [Fraction(0)] * ny
        for k, v in d.items():
            coeffs[k] = v
        rows.append(coeffs)
        rhs.append(bound)
    obj, offset = to_y(lp.objective)
    obj = [sign * v for v in obj]
    return rows, rhs, obj, sign * offset, cols, shift, ny


def solve_lp(lp: LinearProgram) -> LPSolution:
    """Solve ``lp`` exactly by two-phase rational simplex with Bland's rule.

    Optimal witnesses are re-substituted into every constraint and the
    objective before being returned.
    """
    std = _standardize(lp)
    if std is None:
        return LPSolution(INFEASIBLE)
    rows, rhs, obj, offset, cols, shift, ny = std
    m = len(rows)
    rows_q = [[mpq(v.numerator, v.denominator) for v in r] for r in rows]
    rhs_q = [mpq(v.numerator, v.denominator) for v in rhs]

    if any(v < 0 for v in rhs_q):
        # phase 1 with auxiliary x0 (index ny, placed as last nonbasic column)
        d = _Dictionary([r + [mpq(-1)] for r in rows_q], rhs_q, ny + 1)
        x0 = ny
        # renumber so that slack indices stay above x0
        d.basic = list(range(ny + 1, ny + 1 + m))
        d.c = [mpq(0)] * ny + [mpq(-1)]
        worst = min(range(m), key=lambda i: (d.b[i], d.basic[i]))
        d.pivot(worst, ny)
        d.run()
        if d.z0 < 0:
            return LPSolution(INFEASIBLE)
        if x0 in d.basic:
            r = d.basic.index(x0)
            j = next((k for k, v in enumerate(d.A[r]) if v), None)
            if j is None:
                # redundant row: x0 is identically zero
                del d.A[r], d.b[r], d.basic[r]
                d.m -= 1
            else:
                d.pivot(r, j)
        jx = d.nonbasic.index(x0)
        for row in d.A:
            del row[jx]
        del d.nonbasic[jx]
        d.n = ny
        # slack indices were shifted by one; map them back to keep Bland order stable
        d.basic = [v - 1 if v > x0 else v for v in d.basic]
        d.nonbasic = [v - 1 if v > x0 else v for v in d.nonbasic]
    else:
        d = _Dictionary(rows_q, rhs_q, ny)

    c = [mpq(0)] * d.n
    z0 = mpq(0)
    obj_q = [mpq(v.numerator, v.denominator) for v in obj]
    pos_nb = {v: k for k, v in enumerate(d.nonbasic)}
    for i, v in enumerate(d.basic):
        if v < ny and obj_q[v]:
            cv = obj_q[v]
            z0 += cv * d.b[i]
            for k, a in enumerate(d.A[i]):
                if a:
                    c[k] -= cv * a
    for v, k in pos_nb.items():
        if v < ny:
            c[k] += obj_q[v]
    d.c = c
    d.z0 = z0
    if not d.run():
        return LPSolution(UNBOUNDED_STATUS)

    y = [mpq(0)] * ny
    for i, v in enumerate(d.basic):
        if v < ny:
            y[v] = d.b[i]
    x = []
    for col, s in zip(cols, shift):
        val = mpq(s.numerator, s.denominator)
        for k, sg in col:
            val += sg * y[k]
        x.append(_mpq_to_fraction(val))
    x = tuple(x)
    value = _dot(lp.objective, x)
    # exact re-substitution: the witness must be feasible and attain the value
    assert lp.feasible(x), "simplex produced an infeasible witness"
    expected = (d.z0 + mpq(offset.numerator, offset.denominator))
    expected = _mpq_to_fraction(expected if lp.sense == "max" else -expected)
    assert value == expected, "simplex objective does not match the witness"
    return LPSolution(OPTIMAL, value, x)


# ---------------------------------------------------------------------------
# Piecewise-linear norms
# ---------------------------------------------------------------------------

def _canonical_piece(piece: Vector) -> Optional[Vector]:
    """Sign-normalize so the first nonzero entry is positive; None for zero."""
    for v in piece:
        if v:
            return piece if v > 0 else tuple(-x for x in piece)
    return None


@dataclass(frozen=True)
class PwlNorm:
    """The seminorm ``a -> max_j |pieces[j] . a|`` on ``arity`` coefficients.

    Pieces are stored deduplicated up to sign, sorted, and with zero
    functionals dropped (a single zero piece is kept for the zero seminorm).
    """

    arity: int
    pieces: tuple[Vector, ...]

    def __init__(self, arity: int, pieces: Iterable[Iterable[Any]]):
        canon = set()
        for p in pieces:
            p = as_vector(p)
            if len(p) != arity:
                raise ValueError(f"piece of length {len(p)} in a norm of arity {arity}")
            cp = _canonical_piece(p)
            if cp is not None:
                canon.add(cp)
        if not canon:
            canon = {tuple(Fraction(0) for _ in range(arity))}
        object.__setattr__(self, "arity", arity)
        object.__setattr__(self, "pieces", tuple(sorted(canon)))

    def __call__(self, a: Sequence[Any]) -> Fraction:
        a = as_vector(a)
        if len(a) != self.arity:
            raise ValueError("arity mismatch")
        return max(abs(_dot(p, a)) for p in self.pieces)

    def restrict(self, k: int) -> "PwlNorm":
        """The norm on the first ``k`` coordinates (later ones set to zero)."""
        return PwlNorm(k, (p[:k] for p in self.pieces))

    def pad(self, arity: int) -> "PwlNorm":
        zeros = (Fraction(0),) * (arity - self.arity)
        return PwlNorm(arity, (p + zeros for p in self.pieces))

    def scaled(self, c: Number) -> "PwlNorm":
        c = as_fraction(c)
        return PwlNorm(self.arity, (tuple(c * v for v in p) for p in self.pieces))

    @staticmethod
    def max_of(norms: Sequence["PwlNorm"]) -> "PwlNorm":
        arity = norms[0].arity
        if any(n.arity != arity for n in norms):
            raise ValueError("arity mismatch")
        return PwlNorm(arity, (p for n in norms for p in n.pieces))


@dataclass(frozen=True)
class SumAbsNorm:
    """The seminorm ``a -> sum_r |forms[r] . a|``, e.g. a weighted l1 norm."""

    arity: int
    forms: tuple[Vector, ...]

    def __init__(self, arity: int, forms: Iterable[Iterable[Any]]):
        fs = tuple(as_vector(f) for f in forms)
        if any(len(f) != arity for f in fs):
            raise ValueError("arity mismatch")
        object.__setattr__(self, "arity", arity)
        object.__setattr__(self, "forms", fs)

    @classmethod
    def weighted_l1(cls, weights: Sequence[Any]) -> "SumAbsNorm":
        w = as_vector(weights)
        k = len(w)
        return cls(k, (tuple(w[i] if j == i else Fraction(0) for j in range(k)) for i in range(k)))

    def __call__(self, a: Sequence[Any]) -> Fraction:
        a = as_vector(a)
        return sum((abs(_dot(f, a)) for f in self.forms), Fraction(0))


Slack = Union[PwlNorm, SumAbsNorm]


def halving_weights(k: int) -> Vector:
    """``(1/2, 1/4, ..., 1/2^k)``: the weights of the strong-embedding slack."""
    return tuple(Fraction(1, 2 ** (n + 1)) for n in range(k))


@dataclass
class CheckReport:
    """Outcome of a verification with optional exact counterexample."""

    name: str
    passed: bool
    details: dict = field(default_factory=dict)
    witness: Optional[Vector] = None

    def __bool__(self) -> bool:
        return self.passed

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}"


# ---------------------------------------------------------------------------
# Optional process-level fan-out
# ---------------------------------------------------------------------------

_POOL = None


def lp_workers() -> int:
    try:
        return max(1, int(os.environ.get("ROSENTHAL_LP_THREADS", "1")))
    except ValueError:
        return 1


def parallel_map(fn, items: list) -> list:
    """Order-preserving map, fanned out over processes when configured."""
    global _POOL
    workers = lp_workers()
    if workers <= 1 or len(items) < 8:
        return [fn(x) for x in items]
    if _POOL is None:
        _POOL = ProcessPoolExecutor(max_workers=workers)
    return list(_POOL.map(fn, items, chunksize=max(1, len(items) // (4 * workers))))


# ---------------------------------------------------------------------------
# Norm queries
# ---------------------------------------------------------------------------

def _ball_constraints(B: PwlNorm, bound: Fraction = Fraction(1)) -> list[Constraint]:
    out = []
    for p in B.pieces:
        if any(p):
            out.append(Constraint(p, "<=", bound))
            out.append(Constraint(p, ">=", -bound))
    return out


def _ball_piece_max(args) -> Union[Fraction, float]:
    piece, constraints = args
    sol = solve_lp(LinearProgram(piece, constraints))
    if sol.status == UNBOUNDED_STATUS:
        return UNBOUNDED
    assert sol.optimal
    return sol.value


def sup_norm_over_unit_ball(A: PwlNorm, B: PwlNorm) -> Union[Fraction, float]:
    """``sup {A(a) : B(a) <= 1}``; :data:`UNBOUNDED` (``inf``) if infinite.

    The unit ball of ``B`` is symmetric, so one LP per piece of ``A``
    (maximizing ``+l_j``) covers both signs.
    """
    if A.arity != B.arity:
        raise ValueError(f"arity mismatch: {A.arity} vs {B.arity}")
    cons = _ball_constraints(B)
    values = parallel_map(_ball_piece_max, [(p, cons) for p in A.pieces if any(p)])
    if not values:
        return Fraction(0)
    return max(values)


def _integer_pieces(pieces) -> tuple[list[tuple[int, ...]], int]:
    """Scale all pieces by one common denominator so comparisons run on ints."""
    L = 1
    for p in pieces:
        for x in p:
            L = math.lcm(L, x.denominator)
    return [tuple(int(x * L) for x in p) for p in pieces], L


def _face_pieces(int_pieces, signs):
    """Sign-transformed piece vectors on an orthant face, keeping maxima only.

    On the face ``a_i = s_i b_i`` with ``b >= 0`` a vector dominated
    componentwise by another can never attain the maximum, and vectors with
    no positive entry never exceed zero.
    """
    vecs = set()
    for p in int_pieces:
        v = tuple(x * s for x, s in zip(p, signs))
        if any(x > 0 for x in v):
            vecs.add(v)
        if any(x < 0 for x in v):
            vecs.add(tuple(-x for x in v))
    vecs = sorted(vecs, key=sum, reverse=True)
    kept: list[tuple] = []
    for v in vecs:
        if not any(all(x >= y for x, y in zip(u, v)) for u in kept):
            kept.append(v)
    return kept


def _face_min(args) -> Fraction:
    int_pieces, scale, weights, signs = args
    k = len(weights)
    vecs = [tuple(Fraction(x, scale) for x in v) for v in _face_pieces(int_pieces, signs)]
    if not vecs:
        return Fraction(0)
    if len(vecs) == 1:
        # min over the weighted simplex of one linear form is at a vertex
        return max(Fraction(0), min(x / w for x, w in zip(vecs[0], weights)))
    # variables: b_0..b_{k-1} >= 0, t >= 0; minimize t
    cons = [Constraint(v + (Fraction(-1),), "<=", 0) for v in vecs]
    cons.append(Constraint(tuple(weights) + (Fraction(0),), "=", 1))
    obj = (Fraction(0),) * k + (Fraction(1),)
    sol = solve_lp(LinearProgram(obj, cons, ((Fraction(0), None),) * (k + 1), sense="min"))
    assert sol.optimal
    return sol.value


def min_norm_over_l1_sphere(A: PwlNorm, weights: Sequence[Any], stop_below: Optional[Fraction] = None) -> Fraction:
    """``min {A(a) : sum w_i |a_i| = 1}``, exactly.

    One LP per sign pattern with the first sign fixed to ``+`` (``A`` is even).
    With ``stop_below`` set, the scan stops at the first face whose minimum
    is below it and returns that face value (an upper bound of the minimum).
    """
    w = as_vector(weights)
    if len(w) != A.arity:
        raise ValueError(f"arity mismatch: {A.arity} vs {len(w)}")
    if any(x <= 0 for x in w):
        raise ValueError("weights must be strictly positive")
    k = len(w)
    if k == 0:
        raise ValueError("empty coefficient space")
    int_pieces, scale = _integer_pieces(A.pieces)
    faces = [(1,) + rest for rest in product((1, -1), repeat=k - 1)]
    if stop_below is not None:
        best = None
        for s in faces:
            v = _face_min((int_pieces, scale, w, s))
            if best is None or v < best:
                best = v
            if best < stop_below:
                break
        return best
    return min(parallel_map(_face_min, [(int_pieces, scale, w, s) for s in faces]))


def _dominance_piece(args):
    piece, B, slack, eps = args
    k = len(piece)
    # variables: a (k, box [-1, 1]), t >= 0, then slack variables
    cons = []
    zero_k = (Fraction(0),) * k
    if isinstance(slack, SumAbsNorm):
        n_s = len(slack.forms)
        tail = n_s + 1  # u_r for each form and the total u
        for p in B.pieces:
            pad = (Fraction(0),) * tail
            cons.append(Constraint(tuple(-x for x in p) + (Fraction(1),) + pad, ">=", 0))
            cons.append(Constraint(p + (Fraction(1),) + pad, ">=", 0))
        for r, f in enumerate(slack.forms):
            ur = tuple(Fraction(1) if j == r else Fraction(0) for j in range(n_s)) + (Fraction(0),)
            cons.append(Constraint(tuple(-x for x in f) + (Fraction(0),) + ur, ">=", 0))
            cons.append(Constraint(f + (Fraction(0),) + ur, ">=", 0))
        cons.append(Constraint(zero_k + (Fraction(0),) + (Fraction(-1),) * n_s + (Fraction(1),), ">=", 0))
    else:
        tail = 1
        for p in B.pieces:
            cons.append(Constraint(tuple(-x for x in p) + (Fraction(1), Fraction(0)), ">=", 0))
            cons.append(Constraint(p + (Fraction(1), Fraction(0)), ">=", 0))
        for f in slack.pieces:
            cons.append(Constraint(tuple(-x for x in f) + (Fraction(0), Fraction(1)), ">=", 0))
            cons.append(Constraint(f + (Fraction(0), Fraction(1)), ">=", 0))
    obj = piece + (Fraction(-1),) + (Fraction(0),) * (tail - 1) + (-eps,)
    bounds = ((Fraction(-1), Fraction(1)),) * k + ((Fraction(0), None),) * (1 + tail)
    sol = solve_lp(LinearProgram(obj, cons, bounds))
    assert sol.optimal
    return sol.value, sol.x[:k]


def check_pwl_dominance(A: PwlNorm, B: PwlNorm, slack: Slack, eps: Any, name: str = "dominance") -> CheckReport:
    """Decide ``A(a) <= B(a) + eps * slack(a)`` for every real vector ``a``.

    Both sides are positively 1-homogeneous, so it suffices to check the box
    ``[-1, 1]^k``; all three norms are even, so only ``+l_j`` is needed per
    piece of ``A``. On failure the report carries a witness ``a`` whose exact
    re-evaluation violates the inequality.
    """
    eps = as_fraction(eps)
    if not (A.arity == B.arity == slack.arity):
        raise ValueError(f"arity mismatch: {A.arity}, {B.arity}, {slack.arity}")
    if eps < 0:
        raise ValueError("eps must be non-negative")
    pieces = [p for p in A.pieces if any(p)]
    results = parallel_map(_dominance_piece, [(p, B, slack, eps) for p in pieces])
    worst, witness = Fraction(0), None
    for value, x in results:
        if value > worst:
            worst, witness = value, x
    report = CheckReport(name, witness is None, {"max_excess_on_box": worst, "eps": eps, "lps": len(pieces)})
    if witness is not None:
        lhs, rhs = A(witness), B(witness) + eps * slack(witness)
        assert lhs > rhs, "dominance witness does not re-substitute to a violation"
        report.witness = witness
        report.details.update(lhs=lhs, rhs=rhs)
    return report
