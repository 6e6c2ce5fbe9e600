"""Strong embedding as an LP-certified inequality over all coefficients.

For windows ``g_0..g_k`` and a selection ``f_{l_0}..f_{l_k}`` the inequality

    | max_i ||sum_{n<=i} a_n g_n|| - ||sum_n a_n f_{l_n}|| | <= eps sum |a_n| / 2^(n+1)

is decided for every real ``a`` by two dominance checks. Selections are finite,
so every statement here is about windows of the infinite sequences.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .basisnorm import (NOT_BASIC, EquivalenceReport, PrefixNormSystem,
                        basis_constant, equivalence_constants)
from .ell1 import FnWindow, build_l1_tree
from .polylin import (CheckReport, PwlNorm, SumAbsNorm, Vector, as_fraction,
                      check_pwl_dominance, fmt, halving_weights,
                      sup_norm_over_unit_ball)
from .seqtree import SeqTree, check_monotone, order
from .stepfn import combination_norm, prefix_max_norm, sup_norm

PROPNEW_STEPS = 10


class PreconditionError(ValueError):
    """A hypothesis of a derived statement does not hold on this instance."""


@dataclass
class StrongEmbeddingCertificate:
    eps: Fraction
    length: int
    g_names: tuple
    selection: tuple
    upper: CheckReport  # prefix-max(g) <= comb(f) + eps * slack
    lower: CheckReport  # comb(f) <= prefix-max(g) + eps * slack

    @property
    def holds(self) -> bool:
        return self.upper.passed and self.lower.passed

    @property
    def witness(self) -> Optional[Vector]:
        return self.upper.witness or self.lower.witness

    def to_json(self) -> dict:
        def rep(r: CheckReport):
            out = {"passed": r.passed, "max_excess_on_box": fmt(r.details["max_excess_on_box"])}
            if r.witness is not None:
                out["witness"] = [fmt(v) for v in r.witness]
                out["lhs"] = fmt(r.details["lhs"])
                out["rhs"] = fmt(r.details["rhs"])
            return out
        return {
            "eps": fmt(self.eps),
            "length": self.length,
            "g": list(self.g_names),
            "selection": list(self.selection),
            "holds": self.holds,
            "prefix_g_le_f": rep(self.upper),
            "f_le_prefix_g": rep(self.lower),
        }

    def to_text(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=2)


def srce1_norms(g: Sequence, f_sel: Sequence) -> tuple[PwlNorm, PwlNorm, SumAbsNorm]:
    g, f_sel = list(g), list(f_sel)
    if len(g) != len(f_sel):
        raise ValueError(f"length mismatch: {len(g)} vs {len(f_sel)}")
    k = len(g)
    return prefix_max_norm(g), combination_norm(f_sel), SumAbsNorm.weighted_l1(halving_weights(k))


def check_srce1(g: FnWindow, f_sel: FnWindow, eps, selection: Sequence[int] = ()) -> StrongEmbeddingCertificate:
    """Decide the strong-embedding inequality for all coefficient vectors."""
    eps = as_fraction(eps)
    if eps < 0:
        raise ValueError("eps must be non-negative")
    P, C, S = srce1_norms(g, f_sel)
    upper = check_pwl_dominance(P, C, S, eps, name="prefix-max(g) <= comb(f) + eps*slack")
    lower = check_pwl_dominance(C, P, S, eps, name="comb(f) <= prefix-max(g) + eps*slack")
    names = tuple(g.names) if isinstance(g, FnWindow) else ()
    return StrongEmbeddingCertificate(eps, len(P.pieces[0]), names,
                                      tuple(selection) or tuple(range(len(g))), upper, lower)


def _normalized(g: FnWindow) -> bool:
    return all(sup_norm(f) == 1 for f in g)


def extract_2K_equivalence(g: FnWindow, f_sel: FnWindow, eps) -> EquivalenceReport:
    """From a certificate with ``eps < 1/(4K)``, derive that g and the
    selection are ``2K``-equivalent, re-checking every step exactly."""
    eps = as_fraction(eps)
    if not _normalized(g):
        raise PreconditionError("g must be normalized")
    K = basis_constant(g)
    if K == NOT_BASIC:
        raise PreconditionError("g is not basic")
    if not 0 < eps < 1 / (4 * K):
        raise PreconditionError(f"need 0 < eps < 1/(4K) = {fmt(1 / (4 * K))}, got {fmt(eps)}")
    cert = check_srce1(g, f_sel, eps)
    if not cert.holds:
        raise PreconditionError(f"strong-embedding inequality fails at eps={fmt(eps)}")
    # coordinate bound |a_m| <= 2K ||sum a g||, checked rather than assumed
    G = combination_norm(list(g))
    n = len(g)
    coord = max(sup_norm_over_unit_ball(PwlNorm(n, [[int(i == m) for i in range(n)]]), G)
                for m in range(n))
    if coord > 2 * K:
        raise PreconditionError(f"coordinate functionals exceed 2K: {coord}")
    rep = equivalence_constants(g, f_sel)
    rep.bound = 2 * K
    rep.details.update(basis_constant=K, coordinate_bound=coord, certificate=cert)
    assert rep.within_bound, f"2K-equivalence failed: best {rep.best} > {2 * K}"
    return rep


@dataclass
class MonotoneMapResult:
    witness: dict
    source: SeqTree
    target: SeqTree
    monotone: bool
    source_order: int
    target_order: int
    details: dict = field(default_factory=dict)


def monotone_map_iv(g: FnWindow, f: FnWindow, selection: Sequence[int], eps, d,
                    max_len: Optional[int] = None) -> MonotoneMapResult:
    """The map ``(m_0..m_k) -> (l_{m_0}..l_{m_k})`` from ``T^d_g`` into ``T^{2d}_f``.

    The target tree is ``T^{2d}`` of ``f`` explored over indices in the
    selection only (a subtree of the full one, so its order is a lower bound).
    """
    eps, d = as_fraction(eps), as_fraction(d)
    selection = tuple(selection)
    if list(selection) != sorted(set(selection)):
        raise ValueError("selection must be strictly increasing")
    if not eps < 1 / (2 * d):
        raise PreconditionError(f"need eps < 1/(2d) = {fmt(1 / (2 * d))}, got {fmt(eps)}")
    f_sel = f.select(selection)
    cert = check_srce1(g, f_sel, eps, selection)
    if not cert.holds:
        raise PreconditionError(f"strong-embedding inequality fails at eps={fmt(eps)}")
    max_len = len(g) if max_len is None else max_len
    Tg = build_l1_tree(g, d, max_len)
    Tsel = build_l1_tree(f_sel, 2 * d, max_len)
    Tf = SeqTree(tuple(selection[i] for i in s) for s in Tsel.nodes)
    w = {s: tuple(selection[m] for m in s) for s in Tg.nodes}
    escaped = [s for s in Tg.sorted() if w[s] not in Tf]
    if escaped:
        raise AssertionError(f"image of {escaped[0]!r} is not in T^2d of f; strong embedding contradicted")
    ok = check_monotone(w, Tg, Tf)
    return MonotoneMapResult(w, Tg, Tf, ok, order(Tg), order(Tf), {"eps": eps, "d": d, "certificate": cert})


def check_propnew(g: FnWindow, f_sel: FnWindow, eps) -> EquivalenceReport:
    """(1+eps)-equivalence of the X_g coordinate basis and the selection.

    A certificate is searched over ``eps / 2^j`` for ``j = 0..10``; the
    smallest certified value is recorded. The equivalence constant itself is
    computed exactly and compared against ``1 + eps``.
    """
    eps = as_fraction(eps)
    certified = None
    for j in range(PROPNEW_STEPS + 1):
        e = eps / 2 ** j
        cert = check_srce1(g, f_sel, e)
        if not cert.holds:
            break
        certified = (e, cert)
    if certified is None:
        raise PreconditionError(f"no certificate on the schedule eps/2^j, j=0..{PROPNEW_STEPS}")
    rep = equivalence_constants(PrefixNormSystem(g).norm, combination_norm(list(f_sel)))
    rep.bound = 1 + eps
    rep.details.update(certified_eps=certified[0], certificate=certified[1])
    return rep


def max_diff_lemma(r: Sequence, theta: Sequence, delta: Sequence) -> bool:
    """``|max r - max theta| <= max delta`` whenever ``|r_i - theta_i| <= delta_i``."""
    r, theta, delta = (tuple(as_fraction(x) for x in v) for v in (r, theta, delta))
    if not (len(r) == len(theta) == len(delta)) or not r:
        raise ValueError("sequences must be non-empty and of equal length")
    if any(abs(a - b) > c for a, b, c in zip(r, theta, delta)):
        raise ValueError("precondition |r_i - theta_i| <= delta_i violated")
    return abs(max(r) - max(theta)) <= max(delta)
