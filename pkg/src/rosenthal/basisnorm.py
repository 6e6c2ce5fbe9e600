"""Basis constants, equivalence constants and the prefix-norm space X_g."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Union

from .ell1 import FnWindow
from .polylin import (CheckReport, PwlNorm, UNBOUNDED, as_vector,
                      sup_norm_over_unit_ball)
from .stepfn import combination_norm, prefix_max_norm, sup_norm

NOT_BASIC = math.inf

Const = Union[Fraction, float]


def _as_norm(x: Union[FnWindow, PwlNorm]) -> PwlNorm:
    if isinstance(x, PwlNorm):
        return x
    return combination_norm(list(x))


@dataclass
class EquivalenceReport:
    """``forward = sup {X(a) : Y(a) <= 1}``, ``backward`` with roles swapped.

    ``best`` is the least ``C`` with ``Y/C <= X <= C Y``; ``inf`` marks an
    unbounded direction. ``bound`` is the constant a caller promised, if any.
    """

    forward: Const
    backward: Const
    bound: Optional[Fraction] = None
    details: dict = field(default_factory=dict)

    @property
    def best(self) -> Const:
        return max(self.forward, self.backward)

    @property
    def forward_unbounded(self) -> bool:
        return self.forward == UNBOUNDED

    @property
    def backward_unbounded(self) -> bool:
        return self.backward == UNBOUNDED

    @property
    def within_bound(self) -> bool:
        return self.bound is not None and self.best <= self.bound


def equivalence_constants(x: Union[FnWindow, PwlNorm], y: Union[FnWindow, PwlNorm]) -> EquivalenceReport:
    X, Y = _as_norm(x), _as_norm(y)
    if X.arity != Y.arity:
        raise ValueError(f"length mismatch: {X.arity} vs {Y.arity}")
    return EquivalenceReport(sup_norm_over_unit_ball(X, Y), sup_norm_over_unit_ball(Y, X))


def basis_constant_of_norm(N: PwlNorm) -> Const:
    """Least ``K`` with ``N(P_m a) <= K N(P_k a)`` for all ``m < k`` and all ``a``.

    ``P_m`` keeps the first ``m + 1`` coordinates. Returns ``inf`` when some
    ratio is unbounded (the sequence is not basic).
    """
    K: Const = Fraction(1)
    for k in range(1, N.arity):
        full = N.restrict(k + 1)
        for m in range(k):
            head = N.restrict(m + 1).pad(k + 1)
            K = max(K, sup_norm_over_unit_ball(head, full))
            if K == NOT_BASIC:
                return NOT_BASIC
    return K


def basis_constant(w: FnWindow) -> Const:
    """Basis constant of the window, or ``inf`` when it is not basic."""
    if len(w) == 0:
        raise ValueError("empty window")
    if any(f.is_zero() for f in w):
        raise ValueError("basic sequences consist of non-zero vectors")
    return basis_constant_of_norm(combination_norm(list(w)))


@dataclass(frozen=True)
class PrefixNormSystem:
    """The norm ``||x||_g = max_k ||sum_{n<=k} x(n) g_n||_inf`` on a window."""

    g: FnWindow

    @property
    def norm(self) -> PwlNorm:
        return prefix_max_norm(list(self.g))

    def __len__(self) -> int:
        return len(self.g)


def prefix_norm(x: Sequence, sys: PrefixNormSystem) -> Fraction:
    x = as_vector(x)
    if len(x) > len(sys.g):
        if any(x[len(sys.g):]):
            raise ValueError("support escapes the window")
        x = x[: len(sys.g)]
    x = x + (Fraction(0),) * (len(sys.g) - len(x))
    return sys.norm(x)


def verify_P1(sys: PrefixNormSystem) -> CheckReport:
    """The coordinate basis of X_g is monotone, and normalized iff g is."""
    g = list(sys.g)
    if len(set(g)) != len(g) or any(f.is_zero() for f in g):
        raise ValueError("window entries must be distinct and non-zero")
    K = basis_constant_of_norm(sys.norm)
    n = len(g)
    unit_norms = [prefix_norm(tuple(Fraction(int(i == j)) for j in range(n)), sys) for i in range(n)]
    g_norms = [sup_norm(f) for f in g]
    same_norms = unit_norms == g_norms
    normalized_e = all(v == 1 for v in unit_norms)
    normalized_g = all(v == 1 for v in g_norms)
    passed = K == 1 and same_norms and normalized_e == normalized_g
    return CheckReport("P1", passed, {"basis_constant": K, "unit_vector_norms": unit_norms,
                                      "normalized": normalized_e})


def verify_P2(w: FnWindow) -> CheckReport:
    """Coordinate basis of X_g versus g itself: equivalent with constant <= K."""
    K = basis_constant(w)
    if K == NOT_BASIC:
        raise ValueError("window is not basic")
    rep = equivalence_constants(PrefixNormSystem(w).norm, w)
    rep.bound = K
    return CheckReport("P2", rep.within_bound, {"basis_constant": K, "forward": rep.forward,
                                                "backward": rep.backward, "best": rep.best})
