"""Finite trees of sequences: derivatives, orders and monotone maps.

A tree is a prefix-closed finite set of tuples. All trees here are finite,
so the order (the number of derivative steps needed to reach the empty tree)
is a natural number.
"""
from __future__ import annotations

import ast
from dataclasses import dataclass
from typing import Any, Iterable, Mapping

Seq = tuple


def is_prefix(s: Seq, t: Seq) -> bool:
    """``s`` is a proper initial segment of ``t``."""
    return len(s) < len(t) and t[: len(s)] == s


@dataclass(frozen=True)
class SeqTree:
    nodes: frozenset

    def __init__(self, nodes: Iterable[Iterable[Any]] = ()):
        ns = frozenset(tuple(n) for n in nodes)
        for t in ns:
            for i in range(len(t)):
                if t[:i] not in ns:
                    raise ValueError(f"not downward closed: {t!r} present but prefix {t[:i]!r} missing")
        object.__setattr__(self, "nodes", ns)

    @classmethod
    def closure(cls, nodes: Iterable[Iterable[Any]]) -> "SeqTree":
        """The smallest tree containing ``nodes``."""
        out = set()
        for t in nodes:
            t = tuple(t)
            out.update(t[:i] for i in range(len(t) + 1))
        return cls(out)

    def __contains__(self, t) -> bool:
        return tuple(t) in self.nodes

    def __len__(self) -> int:
        return len(self.nodes)

    def __iter__(self):
        return iter(self.sorted())

    def __le__(self, other: "SeqTree") -> bool:
        return self.nodes <= other.nodes

    def sorted(self) -> list[Seq]:
        return sorted(self.nodes, key=_sort_key)

    def children(self, t: Seq) -> list[Seq]:
        t = tuple(t)
        return sorted((s for s in self.nodes if len(s) == len(t) + 1 and s[:-1] == t), key=_sort_key)

    def height(self) -> int:
        return max((len(t) for t in self.nodes), default=-1)

    def to_text(self) -> str:
        return "\n".join(_fmt_node(t) for t in self.sorted()) + ("\n" if self.nodes else "")

    @classmethod
    def from_text(cls, text: str) -> "SeqTree":
        nodes = []
        for line in text.splitlines():
            line = line.strip()
            if not line:
                continue
            val = ast.literal_eval(line)
            if not isinstance(val, tuple):
                val = (val,)
            nodes.append(val)
        return cls(nodes)


def _sort_key(t: Seq):
    return (len(t), tuple(repr(x) if not isinstance(x, (int, tuple)) else x for x in t))


def _fmt_node(t: Seq) -> str:
    if len(t) == 1:
        return f"({t[0]!r},)"
    return "(" + ", ".join(repr(x) for x in t) + ")"


def derivative(T: SeqTree) -> SeqTree:
    """Nodes of ``T`` with a proper extension in ``T``."""
    return SeqTree({t[:-1] for t in T.nodes if t})


def order(T: SeqTree) -> int:
    """Least ``n`` with ``T^(n)`` empty, by iterating the derivative."""
    n = 0
    while T.nodes:
        T = derivative(T)
        n += 1
    return n


def check_monotone(w: Mapping[Seq, Seq], S: SeqTree, T: SeqTree) -> bool:
    """Is ``w`` a monotone map ``S -> T`` (strict prefixes go to strict prefixes)?

    When it is, ``order(S) <= order(T)`` is asserted as well.
    """
    w = {tuple(k): tuple(v) for k, v in w.items()}
    missing = [s for s in S.nodes if s not in w]
    if missing:
        raise ValueError(f"map is not total on S (e.g. {min(missing, key=_sort_key)!r})")
    escaped = [s for s in S.nodes if w[s] not in T.nodes]
    if escaped:
        s = min(escaped, key=_sort_key)
        raise ValueError(f"image of {s!r} is {w[s]!r}, which is not in T")
    for s in S.nodes:
        for i in range(len(s)):
            if not is_prefix(w[s[:i]], w[s]):
                return False
    assert order(S) <= order(T), "monotone map found but order(S) > order(T)"
    return True


def glue(indexed: Mapping[int, SeqTree]) -> SeqTree:
    """``{()} U {(d,) + s : s in T_d}``; empty when no components are given."""
    if not indexed:
        return SeqTree()
    nodes = {()}
    for d, T in indexed.items():
        nodes.update((d,) + s for s in T.nodes)
    return SeqTree(nodes)
