"""
Finite sets with a marked subset and ordered fibers, and the interval model of Delta^op.

Morphisms of pointed finite sets carry a total order on every fiber; composing
concatenates fibers. The functor ``chi`` sends the interval model of Delta^op
into these morphisms, and the faces of the cyclic bar construction are read
off from it: the fiber over each target position lists the source positions
multiplied into it, in multiplication order.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import FrozenSet, List, Sequence, Tuple

logger = logging.getLogger(__name__)


class ABMorphismError(ValueError):
    """Raised when a morphism is malformed or two morphisms do not compose."""


@dataclass(frozen=True)
class ABObject:
    """The finite set {0, ..., size-1} with a marked subset."""

    size: int
    marked: FrozenSet[int] = frozenset()

    def __post_init__(self) -> None:
        if self.size < 0:
            raise ABMorphismError("Set size must be non-negative.")
        marked = frozenset(self.marked)
        if any(not 0 <= u < self.size for u in marked):
            raise ABMorphismError(f"Marked points {sorted(marked)} are not all in 0..{self.size - 1}")
        object.__setattr__(self, "marked", marked)


def pointed(size: int) -> ABObject:
    """({0, ..., size-1}, {0})"""
    return ABObject(size, frozenset({0}))


@dataclass(frozen=True)
class ABMorphism:
    source: ABObject
    target: ABObject
    mapping: Tuple[int, ...]
    fiber_orders: Tuple[Tuple[int, ...], ...]

    def __post_init__(self) -> None:
        mapping = tuple(self.mapping)
        fibers = tuple(tuple(fiber) for fiber in self.fiber_orders)
        object.__setattr__(self, "mapping", mapping)
        object.__setattr__(self, "fiber_orders", fibers)
        if len(mapping) != self.source.size:
            raise ABMorphismError(f"Map has {len(mapping)} values for a source of size {self.source.size}")
        if any(not 0 <= t < self.target.size for t in mapping):
            raise ABMorphismError(f"Map {mapping} leaves the target of size {self.target.size}")
        if len(fibers) != self.target.size:
            raise ABMorphismError("Need exactly one fiber order per target point.")
        for t, fiber in enumerate(fibers):
            expected = sorted(s for s, image in enumerate(mapping) if image == t)
            if sorted(fiber) != expected:
                raise ABMorphismError(f"Fiber order {fiber} over {t} is not a listing of {expected}")
        images = [mapping[u] for u in self.source.marked]
        if len(set(images)) != len(images) or set(images) != set(self.target.marked):
            raise ABMorphismError("The map does not restrict to a bijection of marked sets.")

    def fiber(self, t: int) -> Tuple[int, ...]:
        return self.fiber_orders[t]

    def __str__(self) -> str:
        parts = [f"{t}:" + "<".join(map(str, fiber)) for t, fiber in enumerate(self.fiber_orders)]
        return "{" + ", ".join(parts) + "}"


def ab_morphism(source: ABObject, target: ABObject, mapping: Sequence[int], fiber_orders: Sequence[Sequence[int]] = ()) -> ABMorphism:
    """Build a morphism; fibers not listed in ``fiber_orders`` get numeric order."""
    orders = [list(fiber) for fiber in fiber_orders]
    for t in range(len(orders), target.size):
        orders.append([s for s, image in enumerate(mapping) if image == t])
    return ABMorphism(source, target, tuple(mapping), tuple(tuple(o) for o in orders))


def identity_ab(obj: ABObject) -> ABMorphism:
    return ABMorphism(obj, obj, tuple(range(obj.size)), tuple((s,) for s in range(obj.size)))


def compose_ab(g: ABMorphism, f: ABMorphism) -> ABMorphism:
    """g after f; the fiber over x concatenates the f-fibers in g's order over x."""
    if f.target != g.source:
        raise ABMorphismError(f"Cannot compose: target of f has size {f.target.size}, source of g has size {g.source.size}")
    mapping = tuple(g.mapping[t] for t in f.mapping)
    fibers = tuple(tuple(s for t in g.fiber_orders[x] for s in f.fiber_orders[t]) for x in range(g.target.size))
    return ABMorphism(f.source, g.target, mapping, fibers)


# ---------------------------------------------------------------------- #
# Delta^op as endpoint-preserving monotone maps [n] = {0, ..., n+1} -> [m]


@dataclass(frozen=True)
class DeltaOpMorphism:
    n: int
    m: int
    mapping: Tuple[int, ...]

    def __post_init__(self) -> None:
        mapping = tuple(self.mapping)
        object.__setattr__(self, "mapping", mapping)
        if self.n < 0 or self.m < 0:
            raise ABMorphismError("Levels must be non-negative.")
        if len(mapping) != self.n + 2:
            raise ABMorphismError(f"A map out of [{self.n}] needs {self.n + 2} values, got {len(mapping)}")
        if mapping[0] != 0 or mapping[-1] != self.m + 1:
            raise ABMorphismError(f"{mapping} does not preserve the endpoints of [{self.m}]")
        if any(b < a for a, b in zip(mapping, mapping[1:])):
            raise ABMorphismError(f"{mapping} is not monotone")
        if any(not 0 <= x <= self.m + 1 for x in mapping):
            raise ABMorphismError(f"{mapping} leaves [{self.m}]")


def identity_delta(n: int) -> DeltaOpMorphism:
    return DeltaOpMorphism(n, n, tuple(range(n + 2)))


def compose_delta(g: DeltaOpMorphism, f: DeltaOpMorphism) -> DeltaOpMorphism:
    if f.m != g.n:
        raise ABMorphismError(f"Cannot compose maps [{f.n}] -> [{f.m}] and [{g.n}] -> [{g.m}]")
    return DeltaOpMorphism(f.n, g.m, tuple(g.mapping[x] for x in f.mapping))


def chi(f: DeltaOpMorphism) -> ABMorphism:
    """
    ({0..n}, {0}) -> ({0..m}, {0}): i goes to f(i), except that the top
    endpoint m+1 wraps around to 0. The fiber over 0 lists the points hitting
    m+1 before those hitting 0; every other fiber is in numeric order.
    """
    top = f.m + 1
    points = range(f.n + 1)
    mapping = tuple(0 if f.mapping[i] == top else f.mapping[i] for i in points)
    wrapped = [i for i in points if f.mapping[i] == top]
    bottom = [i for i in points if f.mapping[i] == 0]
    fibers = [tuple(wrapped + bottom)]
    fibers.extend(tuple(i for i in points if f.mapping[i] == j) for j in range(1, f.m + 1))
    return ABMorphism(pointed(f.n + 1), pointed(f.m + 1), mapping, tuple(fibers))


def delta_op_face(p: int, i: int) -> DeltaOpMorphism:
    """The face [p] -> [p-1]: j -> j for j <= i and j -> j-1 above."""
    if p < 1:
        raise ABMorphismError("Faces exist from level 1 upward.")
    if not 0 <= i <= p:
        raise ABMorphismError(f"Face index {i} out of range 0..{p}")
    return DeltaOpMorphism(p, p - 1, tuple(j if j <= i else j - 1 for j in range(p + 2)))


@lru_cache(maxsize=None)
def _faces(p: int) -> Tuple[ABMorphism, ...]:
    faces = tuple(chi(delta_op_face(p, i)) for i in range(p + 1))
    logger.debug("Bar faces at level %s: %s", p, ", ".join(map(str, faces)))
    return faces


def face_morphisms(p: int) -> List[ABMorphism]:
    """d_0, ..., d_p : ({0..p}, {0}) -> ({0..p-1}, {0}) of the cyclic bar construction."""
    if p < 1:
        raise ABMorphismError("The cyclic bar construction has no faces at level 0.")
    return list(_faces(p))
