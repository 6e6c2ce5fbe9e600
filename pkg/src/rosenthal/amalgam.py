"""The universal sequence built from a pair-tree and a dense window.

Construction, at finite depth:

* fix a dense window ``d_0, d_1, ...`` on ``dyadic(k)`` and a partition of
  ``0..depth-1`` into blocks ``D_n``;
* each member ``(g, eps)`` becomes a branch ``sigma`` of dense indices with
  ``||g_n - d_sigma(j)|| <= eps / 2^(j+1)`` for ``j in D_n``, injective in ``j``;
* nodes ``t = (s, w)`` of the resulting pair-tree get ``h_t = d_{s[-1]}``
  (``0`` at the root), a binary word ``phi(t)`` that respects prefixes, and a
  breadth-first index; the output sequence is
  ``f_n = 1_{V_phi(t_n)} (x) h_{t_n}`` on ``dyadic(L) x dyadic(k)``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Optional, Sequence

from .ell1 import FnWindow
from .embed import StrongEmbeddingCertificate, check_srce1
from .polylin import CheckReport, SumAbsNorm, as_fraction, check_pwl_dominance, fmt
from .seqtree import is_prefix
from .stepfn import (AtomSpace, StepFn, combination_norm, cylinder_indicator,
                     dirac_at, prefix_max_norm, sup_norm, tensor, zero)

Node = tuple  # (s, w): two tuples of equal length


class EncodingError(ValueError):
    """The dense window cannot approximate a member at the requested depth."""


@dataclass(frozen=True)
class DenseWindow:
    fns: tuple[StepFn, ...]

    def __init__(self, fns: Sequence[StepFn]):
        fns = tuple(fns)
        if not fns:
            raise ValueError("empty dense window")
        space = fns[0].space
        if space.kind != "dyadic":
            raise ValueError("dense functions live on a dyadic space")
        for i, f in enumerate(fns):
            if f.space != space:
                raise ValueError("dense functions live on different spaces")
            if f.is_zero():
                raise ValueError(f"dense function {i} is zero")
            if sup_norm(f) > 1:
                raise ValueError(f"dense function {i} has norm > 1")
        if len(set(fns)) != len(fns):
            raise ValueError("dense functions must be pairwise distinct")
        object.__setattr__(self, "fns", fns)

    @property
    def space(self) -> AtomSpace:
        return self.fns[0].space

    def __len__(self) -> int:
        return len(self.fns)

    def __getitem__(self, i: int) -> StepFn:
        return self.fns[i]

    def to_json(self) -> list:
        return [f.to_json() for f in self.fns]

    @classmethod
    def from_json(cls, obj) -> "DenseWindow":
        return cls([StepFn.from_json(f) for f in obj])


def dense_grid(level: int, values=(0, Fraction(1, 2), -Fraction(1, 2), 1, -1)) -> list[StepFn]:
    """All non-zero functions on ``dyadic(level)`` with values in ``values``."""
    from .stepfn import all_functions
    return [f for f in all_functions(AtomSpace.dyadic(level), values) if not f.is_zero()]


def dense_copies(g: StepFn, eps, depth: int, copies: int) -> list[StepFn]:
    """``g`` and shrunken copies ``(1 - eta_j) g``, ``eta_j = eps / 2^(depth+1+j)``.

    Each copy is within ``eps / 2^(depth+1)`` of ``g``, so it is admissible at
    every position of a branch of length ``depth``.
    """
    eps = as_fraction(eps)
    return [g] + [g * (1 - eps / 2 ** (depth + 1 + j)) for j in range(copies)]


def dense_window_for(members: Sequence[tuple[FnWindow, Any]], depth: int,
                     extra: Sequence[StepFn] = ()) -> DenseWindow:
    """A dense window rich enough to encode every member at ``depth``.

    Each member function gets ``depth`` admissible copies, which is enough for
    an injective branch. ``extra`` functions are appended after them.
    """
    out: list[StepFn] = []
    seen = set()
    for g, eps in members:
        for f in g:
            for c in dense_copies(f, eps, depth, depth):
                if c not in seen and not c.is_zero():
                    seen.add(c)
                    out.append(c)
    for f in extra:
        if f not in seen:
            seen.add(f)
            out.append(f)
    return DenseWindow(out)


def build_partition(count: int, range_: int) -> list[frozenset]:
    """``D_n = {m < range_ : m = n mod count}``."""
    if count < 1:
        raise ValueError("count must be >= 1")
    if range_ < count:
        raise ValueError(f"range {range_} < count {count}: some block would be empty")
    return [frozenset(range(n, range_, count)) for n in range(count)]


def _block_of(partition: Sequence[frozenset], j: int) -> int:
    for n, D in enumerate(partition):
        if j in D:
            return n
    raise ValueError(f"{j} is not covered by the partition")


@dataclass
class PairTree:
    """Downward-closed pairs ``(s, w)`` plus marked branches of full depth."""

    nodes: frozenset
    branches: dict  # branch node -> list of member indices
    depth: int
    partition: list

    def __post_init__(self):
        for s, w in self.nodes:
            if len(s) != len(w):
                raise ValueError("pair components must have equal length")
            for i in range(len(s)):
                if (s[:i], w[:i]) not in self.nodes:
                    raise ValueError(f"not downward closed at {(s, w)!r}")
        for t in self.nodes:
            if not any(t == b or is_prefix(t[0], b[0]) and b[1][: len(t[1])] == t[1]
                       for b in self.branches):
                raise ValueError(f"node {t!r} lies below no marked branch")

    def branch_of(self, member: int) -> Node:
        for b, ms in self.branches.items():
            if member in ms:
                return b
        raise KeyError(f"member {member} has no marked branch")


def _matching(candidates: list[list[int]]) -> Optional[list[int]]:
    """Injective choice ``j -> candidates[j]`` by augmenting paths.

    Positions are processed in order and candidates in their listed order,
    so the result is deterministic.
    """
    owner: dict[int, int] = {}

    def augment(j: int, seen: set) -> bool:
        # a free candidate first, so earlier positions keep their choice when possible
        for c in candidates[j]:
            if c not in owner:
                owner[c] = j
                return True
        for c in candidates[j]:
            if c in seen:
                continue
            seen.add(c)
            if c not in owner or augment(owner[c], seen):
                owner[c] = j
                return True
        return False

    for j in range(len(candidates)):
        if not augment(j, set()):
            return None
    choice = [None] * len(candidates)
    for c, j in owner.items():
        choice[j] = c
    return choice


def encode_members(members: Sequence[tuple[FnWindow, Any]], dense: DenseWindow, depth: int,
                   count: Optional[int] = None) -> PairTree:
    """One branch per ``(g, eps)`` realizing the approximation condition.

    The partition has ``count`` blocks (default: the longest member window).
    Positions in blocks beyond a member's window carry no constraint.
    """
    if not members:
        raise ValueError("no members")
    if count is None:
        count = max(len(g) for g, _ in members)
    partition = build_partition(count, depth)
    nodes = set()
    branches: dict = {}
    for idx, (g, eps) in enumerate(members):
        eps = as_fraction(eps)
        if eps <= 0:
            raise ValueError("eps must be positive")
        if any(f.space != dense.space for f in g):
            raise ValueError(f"member {idx} lives on a different space than the dense window")
        cands = []
        for j in range(depth):
            n = _block_of(partition, j)
            if n < len(g):
                tol = eps / 2 ** (j + 1)
                ok = [i for i, d in enumerate(dense.fns) if sup_norm(g[n] - d) <= tol]
                if not ok:
                    raise EncodingError(f"member {idx}: no dense function within {fmt(tol)} "
                                        f"of g_{n} at position {j}; the dense window is too coarse")
            else:
                ok = list(range(len(dense)))
            cands.append(ok)
        sigma = _matching(cands)
        if sigma is None:
            raise EncodingError(f"member {idx}: admissible dense functions cannot be chosen injectively "
                                f"up to depth {depth}; add more copies to the dense window")
        s = tuple(sigma)
        w = (0,) * depth
        nodes.update((s[:i], w[:i]) for i in range(depth + 1))
        branches.setdefault((s, w), []).append(idx)
    return PairTree(frozenset(nodes), branches, depth, partition)


def _phi(nodes: Sequence[Node]) -> dict:
    """Prefix-respecting binary words: child ``c`` appends ``1^c 0``."""
    phi = {((), ()): ""}
    by_parent: dict = {}
    for t in sorted(nodes, key=_node_key):
        if t[0]:
            by_parent.setdefault((t[0][:-1], t[1][:-1]), []).append(t)
    for t in sorted(nodes, key=_node_key):
        for c, child in enumerate(by_parent.get(t, [])):
            phi[child] = phi[t] + "1" * c + "0"
    return phi


def _node_key(t: Node):
    return (len(t[0]), t[0], t[1])


@dataclass
class AmalgamOutput:
    nodes: list            # breadth-first enumeration; nodes[n] = t_n
    phi: dict              # node -> binary word
    h: dict                # node -> StepFn on the dense space
    f: list                # f[n] on product(dyadic(level), dense space)
    level: int
    tree: PairTree
    dense: DenseWindow
    index: dict = field(default_factory=dict)  # node -> n

    def window(self) -> FnWindow:
        """``f_1, f_2, ...``: the root's zero function is dropped (index shift 1)."""
        return FnWindow(self.f[1:], [f"f{n}" for n in range(1, len(self.f))])

    def check_invariants(self) -> None:
        for t in self.nodes:
            for u in self.nodes:
                nested = self.phi[t] != self.phi[u] and self.phi[u].startswith(self.phi[t])
                below = is_prefix(t[0], u[0]) and u[1][: len(t[1])] == t[1]
                assert nested == below, f"phi does not mirror the tree at {t!r}, {u!r}"
                if below:
                    assert self.index[t] < self.index[u], "enumeration is not a linear extension"
        assert all(sup_norm(h) <= 1 for h in self.h.values())
        assert all(sup_norm(f) <= 1 for f in self.f)
        assert len(set(self.f)) == len(self.f), "f_n are not pairwise distinct"


def build_amalgam(T: PairTree, dense: DenseWindow, phi: Optional[dict] = None,
                  check: bool = True) -> AmalgamOutput:
    """Build ``f_n`` from the pair-tree. ``phi`` overrides the word scheme
    (used for negative controls, together with ``check=False``)."""
    if not T.nodes:
        raise ValueError("empty tree")
    nodes = sorted(T.nodes, key=_node_key)
    phi = dict(_phi(nodes) if phi is None else phi)
    level = max(len(u) for u in phi.values())
    h = {t: (zero(dense.space) if not t[0] else dense[t[0][-1]]) for t in nodes}
    f = [tensor(cylinder_indicator(level, phi[t]), h[t]) for t in nodes]
    out = AmalgamOutput(nodes, phi, h, f, level, T, dense, {t: n for n, t in enumerate(nodes)})
    if check:
        out.check_invariants()
    return out


def select_chain(out: AmalgamOutput, member: int, length: int, eps=None,
                 g: Optional[FnWindow] = None, offset: int = 0) -> list[int]:
    """Indices ``l_0 < ... < l_{length-1}`` with ``t_{l_n} = sigma | m_n``.

    ``m_n - 1`` is the least element of ``D_n`` that is ``>= offset`` and
    larger than ``m_{n-1} - 1``. With ``g`` and ``eps`` supplied, the
    approximation bound ``||g_n - h_{t_{l_n}}|| <= eps/2^m_n <= eps/2^(n+1)``
    and the chain property are asserted.
    """
    branch = out.tree.branch_of(member)
    s, w = branch
    part = out.tree.partition
    if length > len(part):
        raise ValueError(f"need {length} blocks, partition has {len(part)}")
    ms = []
    prev = offset - 1
    for n in range(length):
        later = sorted(j for j in part[n] if j > prev)
        if not later:
            raise ValueError(f"branch of depth {len(s)} is too short for a chain of length {length}")
        prev = later[0]
        ms.append(prev + 1)
    L = [out.index[(s[:m], w[:m])] for m in ms]
    assert L == sorted(L) and len(set(L)) == len(L)
    for a, b in zip(L, L[1:]):
        ta, tb = out.nodes[a], out.nodes[b]
        assert is_prefix(ta[0], tb[0]), "selected nodes do not form a chain"
    if g is not None and eps is not None:
        eps = as_fraction(eps)
        for n, (m, l) in enumerate(zip(ms, L)):
            dist = sup_norm(g[n] - out.h[out.nodes[l]])
            assert dist <= eps / 2 ** m <= eps / 2 ** (n + 1), \
                f"approximation bound fails at n={n}: {dist} > {eps / 2 ** m}"
    return L


def verify_norm_identity(out: AmalgamOutput, L: Sequence[int]) -> CheckReport:
    """``max_i ||sum_{n<=i} a_n h_{t_{l_n}}|| = ||sum_n a_n f_{l_n}||`` for all ``a``."""
    hs = [out.h[out.nodes[l]] for l in L]
    fs = [out.f[l] for l in L]
    P = prefix_max_norm(hs)
    C = combination_norm(fs)
    zero_slack = SumAbsNorm(len(L), [])
    one = check_pwl_dominance(P, C, zero_slack, 0, name="prefix-max(h) <= comb(f)")
    two = check_pwl_dominance(C, P, zero_slack, 0, name="comb(f) <= prefix-max(h)")
    witness = one.witness or two.witness
    details = {"selection": list(L), "prefix_le_comb": one.passed, "comb_le_prefix": two.passed}
    if witness is not None:
        details.update(prefix_value=P(witness), comb_value=C(witness))
    return CheckReport("norm identity", one.passed and two.passed, details, witness)


def verify_member_strong_embedding(out: AmalgamOutput, member: int, g: FnWindow, eps,
                                   offset: int = 0) -> StrongEmbeddingCertificate:
    encoded_eps = as_fraction(eps)
    L = select_chain(out, member, len(g), offset=offset)
    f_sel = FnWindow([out.f[l] for l in L], [f"f{l}" for l in L])
    return check_srce1(g, f_sel, encoded_eps, L)


def star_embed_image(g: StepFn, tau: str, out: AmalgamOutput) -> StepFn:
    """``(x, y) -> delta_tau(x) g(y)`` on the amalgam's product space."""
    return tensor(dirac_at(out.level, tau), g)


def corrupt_phi(out: AmalgamOutput, L: Sequence[int]) -> dict:
    """A word assignment that puts the chain ``L`` on pairwise disjoint cylinders.

    Every other node keeps its word; selected nodes get distinct words of
    length ``level + 1`` (hence pairwise incomparable).
    """
    phi = dict(out.phi)
    bits = max(1, (len(L) - 1).bit_length())
    for i, l in enumerate(L):
        phi[out.nodes[l]] = "1" * (out.level + 1 - bits) + format(i, f"0{bits}b")
    return phi


def bundle_to_json(members: Sequence[tuple[FnWindow, Any]], out: AmalgamOutput,
                   selections: dict, certificates: dict, identities: dict) -> dict:
    def node(t):
        return [list(t[0]), list(t[1])]
    return {
        "depth": out.tree.depth,
        "partition": [sorted(D) for D in out.tree.partition],
        "level": out.level,
        "dense": out.dense.to_json(),
        "members": [{"eps": fmt(as_fraction(e)), "window": g.to_json()} for g, e in members],
        "nodes": [node(t) for t in out.nodes],
        "phi": [out.phi[t] for t in out.nodes],
        "branches": [{"node": node(b), "members": ms} for b, ms in sorted(out.tree.branches.items())],
        "selections": {str(k): v for k, v in sorted(selections.items())},
        "certificates": {str(k): c.to_json() for k, c in sorted(certificates.items())},
        "norm_identity": {str(k): r.passed for k, r in sorted(identities.items())},
    }


def bundle_from_json(obj: dict) -> tuple[list, AmalgamOutput]:
    """Rebuild members and the amalgam from a bundle, trusting no stored verdicts."""
    members = [(FnWindow.from_json(m["window"]), Fraction(m["eps"])) for m in obj["members"]]
    dense = DenseWindow.from_json(obj["dense"])
    nodes = frozenset((tuple(s), tuple(w)) for s, w in obj["nodes"])
    branches = {(tuple(b["node"][0]), tuple(b["node"][1])): list(b["members"]) for b in obj["branches"]}
    partition = [frozenset(D) for D in obj["partition"]]
    tree = PairTree(nodes, branches, obj["depth"], partition)
    order = [(tuple(s), tuple(w)) for s, w in obj["nodes"]]
    phi = dict(zip(order, obj["phi"]))
    out = build_amalgam(tree, dense, phi=phi, check=False)
    if out.nodes != order:
        raise ValueError("bundle node order is not the canonical enumeration")
    return members, out


def bundle_text(bundle: dict) -> str:
    return json.dumps(bundle, sort_keys=True, indent=1) + "\n"
