"""l1-trees of function windows and the finite rank built from them.

For a window ``f_0, ..., f_m`` and ``d >= 1``, the tree ``T^d`` holds the
strictly increasing index tuples ``s`` for which

    (1/d) sum |a_i| <= || sum a_i f_{s_i} ||_inf <= d sum |a_i|   for all a.

The lower constant is computed exactly by LP (never sampled). Windows are
finite and tuples are length-bounded, so the ranks computed here are lower
approximations of the ordinal ranks of the infinite sequences.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .polylin import as_fraction, min_norm_over_l1_sphere
from .seqtree import SeqTree, glue, order
from .stepfn import StepFn, combination_norm, sup_norm


@dataclass(frozen=True)
class FnWindow:
    """A finite window of pairwise distinct functions in the unit ball."""

    fns: tuple[StepFn, ...]
    names: tuple[str, ...] = ()

    def __init__(self, fns: Iterable[StepFn], names: Sequence[str] = (), require_unit_ball: bool = True):
        fns = tuple(fns)
        if fns:
            space = fns[0].space
            if any(f.space != space for f in fns):
                raise ValueError("window functions live on different atom spaces")
        if len(set(fns)) != len(fns):
            raise ValueError("window functions must be pairwise distinct")
        if require_unit_ball:
            for i, f in enumerate(fns):
                if sup_norm(f) > 1:
                    raise ValueError(f"function {i} has sup norm {sup_norm(f)} > 1")
        names = tuple(names) or tuple(f"f{i}" for i in range(len(fns)))
        if len(names) != len(fns):
            raise ValueError("one name per function")
        object.__setattr__(self, "fns", fns)
        object.__setattr__(self, "names", names)

    def __len__(self) -> int:
        return len(self.fns)

    def __getitem__(self, i):
        return self.fns[i]

    def __iter__(self):
        return iter(self.fns)

    def select(self, idx: Sequence[int]) -> "FnWindow":
        return FnWindow([self.fns[i] for i in idx], [self.names[i] for i in idx])

    def to_json(self) -> dict:
        return {"names": list(self.names), "fns": [f.to_json() for f in self.fns]}

    @classmethod
    def from_json(cls, obj) -> "FnWindow":
        if isinstance(obj, list):
            return cls([StepFn.from_json(f) for f in obj])
        return cls([StepFn.from_json(f) for f in obj["fns"]], obj.get("names", ()))


def l1_equivalence_constants(sub: Sequence[StepFn]) -> tuple[Fraction, Fraction]:
    """Exact ``(lower, upper)`` with ``lower sum|a| <= ||sum a f|| <= upper sum|a|``.

    The upper constant is attained at a vertex ``+-e_i`` of the l1 ball.
    """
    sub = list(sub)
    if not sub:
        raise ValueError("empty sub-list")
    upper = max(sup_norm(f) for f in sub)
    lower = min_norm_over_l1_sphere(combination_norm(sub), (1,) * len(sub))
    return lower, upper


def _explore(w: FnWindow, d_max: Fraction, max_len: int) -> dict:
    """Exact constants of every increasing tuple that passes at ``d_max``.

    Breadth-first: a tuple is only tried when its parent passed, which is
    enough because both constants are monotone under taking prefixes.
    """
    norms = [sup_norm(f) for f in w.fns]
    threshold = 1 / d_max
    passed = {(): (None, Fraction(0))}
    frontier = [()]
    for _ in range(max_len):
        nxt = []
        for s in frontier:
            start = s[-1] + 1 if s else 0
            for n in range(start, len(w)):
                t = s + (n,)
                upper = max(norms[i] for i in t)
                if upper > d_max:
                    continue
                lower = min_norm_over_l1_sphere(
                    combination_norm([w.fns[i] for i in t]), (1,) * len(t), stop_below=threshold)
                if lower < threshold:
                    continue
                plo, pup = passed[s]
                assert plo is None or lower <= plo, "lower l1 constant grew along an extension"
                assert upper >= pup, "upper l1 constant shrank along an extension"
                passed[t] = (lower, upper)
                nxt.append(t)
        frontier = nxt
    return passed


def _tree_at(constants: dict, d: Fraction) -> SeqTree:
    return SeqTree(s for s, (lo, up) in constants.items()
                   if not s or (lo >= 1 / d and up <= d))


def build_l1_tree(w: FnWindow, d, max_len: Optional[int] = None) -> SeqTree:
    """``T^d`` of the window, restricted to tuples of length ``<= max_len``."""
    d = as_fraction(d)
    if d < 1:
        raise ValueError("d must be >= 1")
    max_len = len(w) if max_len is None else max_len
    return _tree_at(_explore(w, d, max_len), d)


def build_l1_trees(w: FnWindow, d_range: Iterable, max_len: Optional[int] = None) -> dict:
    """``{d: T^d}`` for every ``d`` in ``d_range``, sharing one exploration."""
    ds = [as_fraction(d) for d in d_range]
    if not ds:
        return {}
    if min(ds) < 1:
        raise ValueError("d must be >= 1")
    max_len = len(w) if max_len is None else max_len
    constants = _explore(w, max(ds), max_len)
    return {d: _tree_at(constants, d) for d in ds}


def build_glued_tree(w: FnWindow, d_range: Iterable[int], max_len: Optional[int] = None) -> SeqTree:
    """The glued tree with ``T^d`` hanging below the root child ``(d,)``."""
    trees = build_l1_trees(w, d_range, max_len)
    return glue({int(d): T for d, T in trees.items()})


def rank(w: FnWindow, d_range: Iterable[int], max_len: Optional[int] = None) -> int:
    return order(build_glued_tree(w, d_range, max_len))
