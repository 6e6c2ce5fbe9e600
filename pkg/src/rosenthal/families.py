"""Hereditary families of finite sets, their trees and projection windows."""
from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Optional

from .ell1 import FnWindow, _explore, _tree_at
from .polylin import CheckReport
from .seqtree import SeqTree, check_monotone, order
from .stepfn import AtomSpace, StepFn

CLAIM_D = Fraction(2)


def _key(s: frozenset):
    return (len(s), sorted(s))


@dataclass(frozen=True)
class HereditaryFamily:
    """A hereditary family of subsets of ``{0, ..., ground}``."""

    ground: int
    members: frozenset

    def __init__(self, ground: int, members: Iterable[Iterable[int]]):
        ms = frozenset(frozenset(m) for m in members)
        if frozenset() not in ms:
            raise ValueError("a hereditary family contains the empty set")
        for m in ms:
            if any(not 0 <= x <= ground for x in m):
                raise ValueError(f"member {sorted(m)} leaves the ground set 0..{ground}")
            for x in m:
                if m - {x} not in ms:
                    raise ValueError(f"not hereditary: {sorted(m)} present, {sorted(m - {x})} missing")
        object.__setattr__(self, "ground", ground)
        object.__setattr__(self, "members", ms)

    @classmethod
    def closure(cls, ground: int, sets: Iterable[Iterable[int]]) -> "HereditaryFamily":
        out = {frozenset()}
        for s in sets:
            s = sorted(set(s))
            for k in range(len(s) + 1):
                out.update(frozenset(c) for c in combinations(s, k))
        return cls(ground, out)

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, s) -> bool:
        return frozenset(s) in self.members

    def sorted(self) -> list[frozenset]:
        return sorted(self.members, key=_key)

    @property
    def has_singletons(self) -> bool:
        return all(frozenset({n}) in self.members for n in range(self.ground + 1))

    def to_text(self) -> str:
        lines = [f"# ground {self.ground}"]
        lines += ["{" + ",".join(str(x) for x in sorted(m)) + "}" for m in self.sorted()]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "HereditaryFamily":
        ground = None
        sets = []
        for line in text.splitlines():
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                parts = line[1:].split()
                if len(parts) == 2 and parts[0] == "ground":
                    ground = int(parts[1])
                continue
            if not (line.startswith("{") and line.endswith("}")):
                raise ValueError(f"bad member line: {line!r}")
            body = line[1:-1].strip()
            sets.append(frozenset(int(x) for x in body.split(",")) if body else frozenset())
        if ground is None:
            ground = max((max(s) for s in sets if s), default=0)
        return cls(ground, sets)


def schreier_restricted(N: int) -> HereditaryFamily:
    """``{F subset of {0..N} : |F| <= min F + 1}`` together with the empty set."""
    members = [frozenset()]
    for k in range(1, N + 2):
        for c in combinations(range(N + 1), k):
            if k <= c[0] + 1:
                members.append(frozenset(c))
    return HereditaryFamily(N, members)


def uniform_family(N: int, k: int) -> HereditaryFamily:
    """All subsets of ``{0..N}`` with at most ``k`` elements."""
    return HereditaryFamily(N, (frozenset(c) for j in range(min(k, N + 1) + 1)
                                for c in combinations(range(N + 1), j)))


def random_family(rng: random.Random, max_ground: int = 8, max_generators: int = 4,
                  max_size: Optional[int] = None) -> HereditaryFamily:
    """Downward closure of a few random maximal sets plus all singletons.

    Ground size is uniform in ``1..max_ground``; generator sizes are uniform
    up to the ground size (or ``max_size``). Only ``rng`` is consumed, so a
    seeded generator gives a reproducible stream of families.
    """
    n = rng.randint(1, max_ground)
    cap = n if max_size is None else min(n, max_size)
    gens = []
    for _ in range(rng.randint(1, max_generators)):
        size = rng.randint(1, cap)
        gens.append(rng.sample(range(n), size))
    gens += [[x] for x in range(n)]
    return HereditaryFamily.closure(n - 1, gens)


def family_tree(F: HereditaryFamily) -> SeqTree:
    """Increasing enumerations of the members."""
    return SeqTree(tuple(sorted(m)) for m in F.members)


def projection_functions(F: HereditaryFamily) -> FnWindow:
    """``pi_n(G) = 1 if n in G else 0`` on the discrete space of members."""
    if not F.has_singletons:
        raise ValueError("family lacks some singleton; projections need not be distinct")
    labels = F.sorted()
    space = AtomSpace.discrete(labels)
    fns = [StepFn(space, tuple(Fraction(int(n in G)) for G in labels)) for n in range(F.ground + 1)]
    return FnWindow(fns, [f"pi{n}" for n in range(F.ground + 1)])


def verify_hereditary_claim(F: HereditaryFamily, max_len=None) -> CheckReport:
    """Every member enumerates a node of ``T^2`` of the projection window, and
    the identity is a monotone map from the family tree into ``T^2``.

    ``max_len`` bounds the tuples explored in ``T^2``; by default it is the
    size of the ground set, so the whole of ``T^2`` is built.
    """
    window = projection_functions(F)
    TF = family_tree(F)
    if max_len is None:
        max_len = F.ground + 1
    constants = _explore(window, CLAIM_D, max_len)
    T2 = _tree_at(constants, CLAIM_D)
    missing = [t for t in TF.sorted() if t not in T2]
    member_constants = {t: constants[t] for t in TF.sorted() if t and t in constants}
    details = {
        "d": CLAIM_D,
        "members": len(F),
        "order_family_tree": order(TF),
        "order_T2": order(T2),
        "T2_max_len": max_len,
        "member_constants": member_constants,
    }
    if missing:
        details["missing"] = missing
        return CheckReport("hereditary claim", False, details)
    monotone = check_monotone({t: t for t in TF.nodes}, TF, T2)
    details["identity_monotone"] = monotone
    passed = monotone and details["order_family_tree"] <= details["order_T2"]
    return CheckReport("hereditary claim", passed, details)
