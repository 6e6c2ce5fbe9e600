"""Finite atom spaces and rational step functions on them."""
from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from itertools import product as _cartesian
from typing import Any, Callable, Optional, Sequence, Union

from .polylin import PwlNorm, Vector, as_fraction, as_vector, fmt


@dataclass(frozen=True)
class AtomSpace:
    """One of ``dyadic(k)`` (the 2^k cylinders of length k), a discrete label
    set, or a product of two spaces (atoms ordered lexicographically)."""

    kind: str
    level: int = 0
    labels: tuple = ()
    left: Optional["AtomSpace"] = None
    right: Optional["AtomSpace"] = None

    @classmethod
    def dyadic(cls, level: int) -> "AtomSpace":
        if level < 0:
            raise ValueError("negative level")
        return cls("dyadic", level=level)

    @classmethod
    def discrete(cls, labels: Sequence[Any]) -> "AtomSpace":
        labels = tuple(labels)
        if not labels:
            raise ValueError("a discrete space needs at least one atom")
        if len(set(labels)) != len(labels):
            raise ValueError("duplicate atom labels")
        return cls("discrete", labels=labels)

    @classmethod
    def product(cls, left: "AtomSpace", right: "AtomSpace") -> "AtomSpace":
        return cls("product", left=left, right=right)

    @property
    def size(self) -> int:
        if self.kind == "dyadic":
            return 2 ** self.level
        if self.kind == "discrete":
            return len(self.labels)
        return self.left.size * self.right.size

    def atom(self, i: int):
        """Human-readable name of atom ``i``: a bit string, a label, or a pair."""
        if self.kind == "dyadic":
            return format(i, f"0{self.level}b") if self.level else ""
        if self.kind == "discrete":
            return self.labels[i]
        q, r = divmod(i, self.right.size)
        return (self.left.atom(q), self.right.atom(r))

    def to_json(self):
        if self.kind == "dyadic":
            return {"dyadic": self.level}
        if self.kind == "discrete":
            return {"discrete": [_label_to_json(x) for x in self.labels]}
        return {"product": [self.left.to_json(), self.right.to_json()]}

    @classmethod
    def from_json(cls, obj) -> "AtomSpace":
        if not isinstance(obj, dict) or len(obj) != 1:
            raise ValueError(f"bad atom space: {obj!r}")
        (key, val), = obj.items()
        if key == "dyadic":
            return cls.dyadic(int(val))
        if key == "discrete":
            return cls.discrete([_label_from_json(x) for x in val])
        if key == "product":
            return cls.product(cls.from_json(val[0]), cls.from_json(val[1]))
        raise ValueError(f"unknown atom space kind {key!r}")


def _label_to_json(x):
    if isinstance(x, frozenset):
        return sorted(x)
    return x


def _label_from_json(x):
    if isinstance(x, list):
        return frozenset(x)
    return x


@dataclass(frozen=True)
class StepFn:
    space: AtomSpace
    values: Vector

    def __post_init__(self):
        object.__setattr__(self, "values", as_vector(self.values))
        if len(self.values) != self.space.size:
            raise ValueError(f"{len(self.values)} values for {self.space.size} atoms")

    def __getitem__(self, i: int) -> Fraction:
        return self.values[i]

    def __len__(self) -> int:
        return len(self.values)

    def __add__(self, other: "StepFn") -> "StepFn":
        return lin_comb((1, 1), (self, other))

    def __sub__(self, other: "StepFn") -> "StepFn":
        return lin_comb((1, -1), (self, other))

    def __mul__(self, c) -> "StepFn":
        c = as_fraction(c)
        return StepFn(self.space, tuple(c * v for v in self.values))

    __rmul__ = __mul__

    def __neg__(self) -> "StepFn":
        return self * -1

    def is_zero(self) -> bool:
        return not any(self.values)

    def to_json(self) -> dict:
        return {"space": self.space.to_json(), "values": [fmt(v) for v in self.values]}

    @classmethod
    def from_json(cls, obj) -> "StepFn":
        return cls(AtomSpace.from_json(obj["space"]), tuple(Fraction(v) for v in obj["values"]))

    def to_text(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_text(cls, text: str) -> "StepFn":
        return cls.from_json(json.loads(text))


def constant(space: AtomSpace, c=1) -> StepFn:
    return StepFn(space, (as_fraction(c),) * space.size)


def zero(space: AtomSpace) -> StepFn:
    return constant(space, 0)


def sup_norm(f: StepFn) -> Fraction:
    return max((abs(v) for v in f.values), default=Fraction(0))


def lin_comb(coeffs: Sequence[Any], fns: Sequence[StepFn]) -> StepFn:
    coeffs = as_vector(coeffs)
    if len(coeffs) != len(fns):
        raise ValueError("coefficient and function counts differ")
    if not fns:
        raise ValueError("empty combination")
    space = fns[0].space
    if any(f.space != space for f in fns):
        raise ValueError("functions live on different atom spaces")
    vals = [Fraction(0)] * space.size
    for a, f in zip(coeffs, fns):
        if a:
            for i, v in enumerate(f.values):
                if v:
                    vals[i] += a * v
    return StepFn(space, tuple(vals))


def _word(u: Union[str, Sequence[int]]) -> str:
    s = "".join(str(int(b)) for b in u) if not isinstance(u, str) else u
    if any(c not in "01" for c in s):
        raise ValueError(f"not a binary word: {u!r}")
    return s


def cylinder_indicator(level: int, node: Union[str, Sequence[int]]) -> StepFn:
    """Indicator of the cylinder ``{sigma : node is a prefix of sigma}`` at ``level``."""
    u = _word(node)
    if len(u) > level:
        raise ValueError(f"word of length {len(u)} exceeds level {level}")
    space = AtomSpace.dyadic(level)
    rest = level - len(u)
    lo = (int(u, 2) << rest) if u else 0
    hi = lo + (1 << rest)
    return StepFn(space, tuple(Fraction(1) if lo <= i < hi else Fraction(0) for i in range(space.size)))


def dirac_at(level: int, tau: Union[str, Sequence[int]]) -> StepFn:
    """Indicator of the single atom ``tau``; stands in for the Dirac function."""
    t = _word(tau)
    if len(t) != level:
        raise ValueError(f"word length {len(t)} != level {level}")
    return cylinder_indicator(level, t)


def tensor(f: StepFn, g: StepFn) -> StepFn:
    """``(x, y) -> f(x) * g(y)`` on ``product(f.space, g.space)``."""
    vals = tuple(a * b for a in f.values for b in g.values)
    return StepFn(AtomSpace.product(f.space, g.space), vals)


def pullback(f: StepFn, e: Sequence[int], space: AtomSpace) -> StepFn:
    """``z -> f(e(z))`` on ``space``; ``e[z]`` is an atom index of ``f.space``.

    ``e`` must be onto, otherwise sup norms of combinations may shrink.
    """
    if len(e) != space.size:
        raise ValueError("the atom map must be total on the new space")
    if set(e) != set(range(f.space.size)):
        raise ValueError("the atom map is not onto")
    return StepFn(space, tuple(f.values[j] for j in e))


def refine(f: StepFn, level: int) -> StepFn:
    if f.space.kind != "dyadic":
        raise ValueError("refine applies to dyadic spaces only")
    k = f.space.level
    if level < k:
        raise ValueError(f"cannot refine level {k} down to {level}")
    rep = 2 ** (level - k)
    return StepFn(AtomSpace.dyadic(level), tuple(v for v in f.values for _ in range(rep)))


def evaluation_rows(fns: Sequence[StepFn]) -> list[Vector]:
    """Per-atom coefficient vectors ``(f_0(x), ..., f_k(x))``."""
    if not fns:
        return []
    space = fns[0].space
    if any(f.space != space for f in fns):
        raise ValueError("functions live on different atom spaces")
    return list(zip(*(f.values for f in fns)))


def combination_norm(fns: Sequence[StepFn]) -> PwlNorm:
    """The norm ``a -> ||sum a_n f_n||_inf`` as a piecewise-linear norm."""
    return PwlNorm(len(fns), evaluation_rows(fns))


def prefix_max_norm(fns: Sequence[StepFn]) -> PwlNorm:
    """``a -> max_i ||sum_{n<=i} a_n f_n||_inf``."""
    k = len(fns)
    rows = evaluation_rows(fns)
    pieces = []
    for i in range(k):
        zeros = (Fraction(0),) * (k - i - 1)
        pieces.extend(r[: i + 1] + zeros for r in rows)
    return PwlNorm(k, pieces)


def all_functions(space: AtomSpace, values: Sequence[Any]) -> list[StepFn]:
    """Every function on ``space`` with values drawn from ``values``."""
    vals = as_vector(values)
    return [StepFn(space, v) for v in _cartesian(vals, repeat=space.size)]


def from_callable(space: AtomSpace, fn: Callable[[Any], Any]) -> StepFn:
    return StepFn(space, tuple(as_fraction(fn(space.atom(i))) for i in range(space.size)))
