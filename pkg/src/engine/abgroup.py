"""
Finite abelian groups, finite rings given by multiplication tables, and bimodules.

Every group is a product ``Z/d_1 x ... x Z/d_r`` in the factor order it was
written in. Elements carry invariant-factor coordinates; the canonical
enumeration is lexicographic on coordinates, so an element's *index* (its
position in that enumeration) is a mixed-radix number with the first
coordinate most significant. Everything downstream (cube functions, bases,
ring tables) works on indices for speed and wraps them in ``GroupElement``
only at the API surface.
"""

from __future__ import annotations

import itertools
import json
import logging
import random
import re
from dataclasses import dataclass
from functools import cached_property
from math import prod
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple, Union

logger = logging.getLogger(__name__)

EXHAUSTIVE_RING_CHECK_LIMIT = 256
EXHAUSTIVE_DISTRIBUTIVITY_LIMIT = 16
RANDOM_CHECK_SAMPLES = 10_000
ADD_TABLE_LIMIT = 1024

_FACTOR_PATTERN = re.compile(r"^Z/(\d+)$")
_SEPARATOR_PATTERN = re.compile(r"\s+x\s+")


class SpecParseError(ValueError):
    """Raised when a group or ring spec does not match the expected grammar."""


class GroupDomainError(ValueError):
    """Raised when a cyclic factor Z/n has n < 2."""


class GroupMismatchError(ValueError):
    """Raised when elements of different groups are combined."""


class RingValidationError(RuntimeError):
    """Raised when a multiplication table fails a ring axiom."""

    def __init__(self, message: str, witness: Tuple[Any, ...] = ()):
        super().__init__(message)
        self.witness = witness


# ---------------------------------------------------------------------- #
# Groups


@dataclass(frozen=True)
class FinAbGroup:
    """The group ``Z/d_1 x ... x Z/d_r``; the empty product is the trivial group."""

    factors: Tuple[int, ...] = ()

    def __post_init__(self) -> None:
        factors = tuple(int(d) for d in self.factors)
        for d in factors:
            if d < 2:
                raise GroupDomainError(f"Cyclic factor Z/{d} is not allowed; every factor needs n >= 2.")
        object.__setattr__(self, "factors", factors)

    @property
    def order(self) -> int:
        return prod(self.factors)

    @property
    def rank(self) -> int:
        return len(self.factors)

    def spec(self) -> str:
        """Canonical spec string, e.g. ``"Z/2 x Z/4"``; the trivial group is ``"0"``."""
        return " x ".join(f"Z/{d}" for d in self.factors) or "0"

    def __str__(self) -> str:
        return self.spec()

    @cached_property
    def _strides(self) -> Tuple[int, ...]:
        strides = []
        step = 1
        for d in reversed(self.factors):
            strides.append(step)
            step *= d
        return tuple(reversed(strides))

    # Index <-> coordinates

    def coords_of(self, index: int) -> Tuple[int, ...]:
        if not 0 <= index < self.order:
            raise IndexError(f"Element index {index} out of range for {self.spec()}")
        return tuple((index // s) % d for s, d in zip(self._strides, self.factors))

    def index_of(self, coords: Sequence[int]) -> int:
        if len(coords) != self.rank:
            raise GroupMismatchError(f"Expected {self.rank} coordinates for {self.spec()}, got {len(coords)}")
        return sum((int(c) % d) * s for c, d, s in zip(coords, self.factors, self._strides))

    def element(self, coords: Sequence[int]) -> "GroupElement":
        """Element with the given coordinates, reduced modulo each factor."""
        if len(coords) != self.rank:
            raise GroupMismatchError(f"Expected {self.rank} coordinates for {self.spec()}, got {len(coords)}")
        return GroupElement(self, tuple(int(c) % d for c, d in zip(coords, self.factors)))

    def element_at(self, index: int) -> "GroupElement":
        return GroupElement(self, self.coords_of(index))

    def elements(self) -> Iterator["GroupElement"]:
        for coords in itertools.product(*(range(d) for d in self.factors)):
            yield GroupElement(self, coords)

    @property
    def zero(self) -> "GroupElement":
        return GroupElement(self, (0,) * self.rank)

    def generators(self) -> List["GroupElement"]:
        """The unit coordinate vectors, one per cyclic factor."""
        return [self.element([1 if j == i else 0 for j in range(self.rank)]) for i in range(self.rank)]

    # Index arithmetic

    @cached_property
    def add_table(self) -> Optional[Tuple[Tuple[int, ...], ...]]:
        if self.order > ADD_TABLE_LIMIT:
            return None
        return tuple(
            tuple(self._add_by_coords(a, b) for b in range(self.order))
            for a in range(self.order)
        )

    def _add_by_coords(self, a: int, b: int) -> int:
        return self.index_of([x + y for x, y in zip(self.coords_of(a), self.coords_of(b))])

    def add_index(self, a: int, b: int) -> int:
        table = self.add_table
        if table is not None:
            return table[a][b]
        return self._add_by_coords(a, b)

    def neg_index(self, a: int) -> int:
        return self.index_of([-c for c in self.coords_of(a)])

    # Constructions

    def direct_sum(self, other: "FinAbGroup") -> "FinAbGroup":
        return FinAbGroup(self.factors + other.factors)

    def inclusion_indices(self, other: "FinAbGroup") -> Tuple[Tuple[int, ...], Tuple[int, ...]]:
        """Index maps of the two summand inclusions into ``self.direct_sum(other)``."""
        total = self.direct_sum(other)
        left = tuple(total.index_of(self.coords_of(a) + (0,) * other.rank) for a in range(self.order))
        right = tuple(total.index_of((0,) * self.rank + other.coords_of(b)) for b in range(other.order))
        return left, right


@dataclass(frozen=True)
class GroupElement:
    group: FinAbGroup
    coords: Tuple[int, ...]

    def __post_init__(self) -> None:
        coords = tuple(int(c) for c in self.coords)
        if len(coords) != self.group.rank:
            raise GroupMismatchError(
                f"Element has {len(coords)} coordinates but {self.group.spec()} has {self.group.rank} factors"
            )
        for c, d in zip(coords, self.group.factors):
            if not 0 <= c < d:
                raise ValueError(f"Coordinate {c} out of range 0..{d - 1}")
        object.__setattr__(self, "coords", coords)

    def _check(self, other: "GroupElement") -> None:
        if not isinstance(other, GroupElement) or other.group != self.group:
            raise GroupMismatchError("Cannot combine elements of different groups.")

    @property
    def index(self) -> int:
        return self.group.index_of(self.coords)

    def __add__(self, other: "GroupElement") -> "GroupElement":
        self._check(other)
        return self.group.element([a + b for a, b in zip(self.coords, other.coords)])

    def __sub__(self, other: "GroupElement") -> "GroupElement":
        self._check(other)
        return self.group.element([a - b for a, b in zip(self.coords, other.coords)])

    def __neg__(self) -> "GroupElement":
        return self.group.element([-a for a in self.coords])

    def __mul__(self, k: int) -> "GroupElement":
        if not isinstance(k, int):
            return NotImplemented
        return self.group.element([k * a for a in self.coords])

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return not any(self.coords)

    def __str__(self) -> str:
        if len(self.coords) == 1:
            return str(self.coords[0])
        return "(" + ", ".join(str(c) for c in self.coords) + ")"


def add(a: GroupElement, b: GroupElement) -> GroupElement:
    return a + b


def negate(a: GroupElement) -> GroupElement:
    return -a


def is_zero(a: GroupElement) -> bool:
    return a.is_zero()


def normalize_spec(spec: str) -> str:
    """Collapse whitespace runs; the result is the literal used for cache keys."""
    return " ".join((spec or "").split())


def group_from_spec(spec: str) -> FinAbGroup:
    """
    Parse ``"Z/n ( x Z/n )*"`` into a group, keeping the listed factor order.

    Raises:
        SpecParseError: the text does not follow the grammar.
        GroupDomainError: some factor has n < 2.
    """
    text = normalize_spec(spec)
    if not text:
        raise SpecParseError("Empty group spec. Expected something like 'Z/2 x Z/4'.")
    factors = []
    for token in _SEPARATOR_PATTERN.split(text):
        match = _FACTOR_PATTERN.match(token)
        if not match:
            raise SpecParseError(f"Malformed factor '{token}' in group spec '{spec}'. Expected 'Z/n'.")
        factors.append(int(match.group(1)))
    return FinAbGroup(tuple(factors))


# ---------------------------------------------------------------------- #
# Rings


@dataclass(frozen=True)
class RingTable:
    """A finite ring: additive group, full multiplication table on indices, unit."""

    additive: FinAbGroup
    mul_table: Tuple[Tuple[int, ...], ...]
    one_index: int
    name: str = ""

    @property
    def order(self) -> int:
        return self.additive.order

    @property
    def one(self) -> GroupElement:
        return self.additive.element_at(self.one_index)

    def mul_index(self, a: int, b: int) -> int:
        return self.mul_table[a][b]

    def mul(self, a: GroupElement, b: GroupElement) -> GroupElement:
        if a.group != self.additive or b.group != self.additive:
            raise GroupMismatchError("Ring multiplication needs elements of the ring's additive group.")
        return self.additive.element_at(self.mul_table[a.index][b.index])

    def spec(self) -> str:
        return self.name or self.additive.spec()

    @cached_property
    def is_commutative(self) -> bool:
        n = self.order
        return all(self.mul_table[a][b] == self.mul_table[b][a] for a in range(n) for b in range(a + 1, n))

    def validate(self, seed: int = 0) -> "RingTable":
        """
        Check the ring axioms, raising ``RingValidationError`` with a witness.

        Additivity in each argument is checked against every generator (which
        implies bilinearity); distributivity is exhaustive up to
        ``EXHAUSTIVE_DISTRIBUTIVITY_LIMIT`` elements and sampled beyond;
        associativity and the unit laws are exhaustive up to
        ``EXHAUSTIVE_RING_CHECK_LIMIT`` and sampled beyond.
        """
        group = self.additive
        n = group.order
        table = self.mul_table
        if len(table) != n or any(len(row) != n for row in table):
            raise RingValidationError(f"Multiplication table must be {n} x {n}.")
        if any(not 0 <= c < n for row in table for c in row):
            raise RingValidationError("Multiplication table refers to elements outside the group.")
        if not 0 <= self.one_index < n:
            raise RingValidationError("Unit element is outside the group.")

        plus = group.add_index
        generators = [g.index for g in group.generators()]
        for a in range(n):
            for b in range(n):
                for g in generators:
                    bg = plus(b, g)
                    if table[a][bg] != plus(table[a][b], table[a][g]):
                        raise RingValidationError("Multiplication is not additive on the right.", self._witness(a, b, g))
                    if table[bg][a] != plus(table[b][a], table[g][a]):
                        raise RingValidationError("Multiplication is not additive on the left.", self._witness(b, g, a))

        for a, b, c in self._triples(EXHAUSTIVE_DISTRIBUTIVITY_LIMIT, seed):
            if table[a][plus(b, c)] != plus(table[a][b], table[a][c]):
                raise RingValidationError("Left distributivity fails.", self._witness(a, b, c))
            if table[plus(b, c)][a] != plus(table[b][a], table[c][a]):
                raise RingValidationError("Right distributivity fails.", self._witness(b, c, a))

        one = self.one_index
        for a in range(n):
            if table[one][a] != a or table[a][one] != a:
                raise RingValidationError("The given unit is not a two-sided identity.", self._witness(one, a))

        for a, b, c in self._triples(EXHAUSTIVE_RING_CHECK_LIMIT, seed):
            if table[table[a][b]][c] != table[a][table[b][c]]:
                raise RingValidationError("Multiplication is not associative.", self._witness(a, b, c))

        logger.debug("Validated ring %s (%s elements)", self.spec(), n)
        return self

    def _triples(self, exhaustive_limit: int, seed: int) -> Iterator[Tuple[int, int, int]]:
        n = self.order
        if n <= exhaustive_limit:
            yield from itertools.product(range(n), repeat=3)
            return
        rng = random.Random(seed)
        for _ in range(RANDOM_CHECK_SAMPLES):
            yield rng.randrange(n), rng.randrange(n), rng.randrange(n)

    def _witness(self, *indices: int) -> Tuple[Tuple[int, ...], ...]:
        return tuple(self.additive.coords_of(i) for i in indices)


def cyclic_ring(n: int) -> RingTable:
    """The ring Z/n with its standard multiplication."""
    group = FinAbGroup((n,))
    table = tuple(tuple((a * b) % n for b in range(n)) for a in range(n))
    return RingTable(group, table, one_index=1, name=f"Z/{n}")


def matrix_ring_payload(size: int, modulus: int) -> Dict[str, Any]:
    """
    Ring-table payload for the full matrix ring M_size(Z/modulus).

    Matrix entries are the coordinates, row-major, so the additive group is
    ``(Z/modulus)^(size*size)`` and the table lists every product in
    canonical enumeration order.
    """
    if size < 1:
        raise ValueError("Matrix size must be at least 1.")
    group = FinAbGroup((modulus,) * (size * size))
    elements = [group.coords_of(i) for i in range(group.order)]

    def matmul(x: Tuple[int, ...], y: Tuple[int, ...]) -> List[int]:
        return [
            sum(x[r * size + k] * y[k * size + c] for k in range(size)) % modulus
            for r in range(size)
            for c in range(size)
        ]

    identity = [1 if r == c else 0 for r in range(size) for c in range(size)]
    return {
        "group": group.spec(),
        "one": identity,
        "mul": [[list(x), list(y), matmul(x, y)] for x in elements for y in elements],
    }


def _load_json(path: Path) -> Dict[str, Any]:
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise SpecParseError(f"Unable to read table file {path}: {exc}") from exc


def _coords_field(payload: Any, group: FinAbGroup, label: str) -> int:
    if not isinstance(payload, list) or len(payload) != group.rank:
        raise SpecParseError(f"'{label}' must be a list of {group.rank} coordinates, got {payload!r}")
    try:
        return group.index_of([int(c) for c in payload])
    except (TypeError, ValueError) as exc:
        raise SpecParseError(f"'{label}' has non-integer coordinates: {payload!r}") from exc


def _table_from_triples(
    group: FinAbGroup,
    triples: Any,
    left_group: FinAbGroup,
    right_group: FinAbGroup,
    label: str,
) -> Tuple[Tuple[int, ...], ...]:
    if not isinstance(triples, list):
        raise SpecParseError(f"'{label}' must be a list of [x, y, x*y] triples.")
    table: List[List[Optional[int]]] = [[None] * right_group.order for _ in range(left_group.order)]
    for entry in triples:
        if not isinstance(entry, list) or len(entry) != 3:
            raise SpecParseError(f"Malformed '{label}' entry {entry!r}; expected [x, y, x*y].")
        x = _coords_field(entry[0], left_group, label)
        y = _coords_field(entry[1], right_group, label)
        z = _coords_field(entry[2], group, label)
        if table[x][y] is not None and table[x][y] != z:
            raise SpecParseError(f"Conflicting '{label}' entries for {entry[0]} * {entry[1]}.")
        table[x][y] = z
    for x, row in enumerate(table):
        for y, z in enumerate(row):
            if z is None:
                raise SpecParseError(
                    f"'{label}' is missing the product of {left_group.coords_of(x)} and {right_group.coords_of(y)}."
                )
    return tuple(tuple(row) for row in table)  # type: ignore[arg-type]


def ring_from_payload(payload: Dict[str, Any], name: str = "") -> RingTable:
    try:
        group = group_from_spec(payload["group"])
        one = _coords_field(payload["one"], group, "one")
        table = _table_from_triples(group, payload["mul"], group, group, "mul")
    except KeyError as exc:
        raise SpecParseError(f"Ring table is missing the {exc} field.") from exc
    return RingTable(group, table, one, name=name).validate()


def ring_from_spec(spec: Union[str, Path]) -> RingTable:
    """
    Build a validated ring from ``"Z/n"`` or from a JSON ring-table file.

    The table schema is ``{"group": "Z/2 x Z/2", "one": [..], "mul": [[a, b, ab], ...]}``
    with one entry per ordered pair.
    """
    text = str(spec).strip()
    if isinstance(spec, Path) or text.endswith(".json") or Path(text).is_file():
        path = Path(text)
        logger.info("Loading ring table from %s", path)
        return ring_from_payload(_load_json(path), name=path.stem)
    group = group_from_spec(str(spec))
    if group.rank != 1:
        raise SpecParseError(
            f"'{normalize_spec(str(spec))}' is not a cyclic ring spec; products need a ring table file."
        )
    return cyclic_ring(group.factors[0]).validate()


# ---------------------------------------------------------------------- #
# Bimodules


@dataclass(frozen=True)
class BimoduleTable:
    """An R-bimodule M with full left (r, m) and right (m, r) action tables."""

    group: FinAbGroup
    ring: RingTable
    left_table: Tuple[Tuple[int, ...], ...]
    right_table: Tuple[Tuple[int, ...], ...]
    name: str = ""

    def left_index(self, r: int, m: int) -> int:
        return self.left_table[r][m]

    def right_index(self, m: int, r: int) -> int:
        return self.right_table[m][r]

    def left(self, r: GroupElement, m: GroupElement) -> GroupElement:
        return self.group.element_at(self.left_table[r.index][m.index])

    def right(self, m: GroupElement, r: GroupElement) -> GroupElement:
        return self.group.element_at(self.right_table[m.index][r.index])

    def spec(self) -> str:
        return self.name or self.group.spec()

    def validate(self, exhaustive_limit: int = EXHAUSTIVE_DISTRIBUTIVITY_LIMIT, seed: int = 0) -> "BimoduleTable":
        """Biadditivity, associativity, unitality and commuting actions."""
        ring = self.ring
        rn, mn = ring.order, self.group.order
        mplus, rplus = self.group.add_index, ring.additive.add_index
        left, right, mul = self.left_table, self.right_table, ring.mul_table

        if len(left) != rn or any(len(row) != mn for row in left):
            raise RingValidationError("Left action table has the wrong shape.")
        if len(right) != mn or any(len(row) != rn for row in right):
            raise RingValidationError("Right action table has the wrong shape.")

        for m in range(mn):
            if left[ring.one_index][m] != m or right[m][ring.one_index] != m:
                raise RingValidationError("The ring unit does not act trivially.", (self.group.coords_of(m),))

        if rn * rn * mn <= exhaustive_limit ** 3:
            triples: Any = itertools.product(range(rn), range(rn), range(mn))
        else:
            rng = random.Random(seed)
            triples = ((rng.randrange(rn), rng.randrange(rn), rng.randrange(mn)) for _ in range(RANDOM_CHECK_SAMPLES))
        for a, b, m in triples:
            if left[mul[a][b]][m] != left[a][left[b][m]]:
                raise RingValidationError("Left action is not associative.", (a, b, m))
            if right[m][mul[a][b]] != right[right[m][a]][b]:
                raise RingValidationError("Right action is not associative.", (m, a, b))
            if right[left[a][m]][b] != left[a][right[m][b]]:
                raise RingValidationError("Left and right actions do not commute.", (a, m, b))
            if left[rplus(a, b)][m] != mplus(left[a][m], left[b][m]):
                raise RingValidationError("Left action is not additive in the ring.", (a, b, m))
            if right[m][rplus(a, b)] != mplus(right[m][a], right[m][b]):
                raise RingValidationError("Right action is not additive in the ring.", (m, a, b))

        for r in range(rn):
            for m in range(mn):
                for g in self.group.generators():
                    mg = mplus(m, g.index)
                    if left[r][mg] != mplus(left[r][m], left[r][g.index]):
                        raise RingValidationError("Left action is not additive in the module.", (r, m))
                    if right[mg][r] != mplus(right[m][r], right[g.index][r]):
                        raise RingValidationError("Right action is not additive in the module.", (m, r))
        return self


def self_bimodule(ring: RingTable) -> BimoduleTable:
    """R as a bimodule over itself by left and right multiplication."""
    n = ring.order
    table = ring.mul_table
    right = tuple(tuple(table[m][r] for r in range(n)) for m in range(n))
    return BimoduleTable(ring.additive, ring, table, right, name=ring.spec())


def bimodule_from_payload(payload: Dict[str, Any], ring: RingTable, name: str = "") -> BimoduleTable:
    try:
        group = group_from_spec(payload["group"])
        left = _table_from_triples(group, payload["left"], ring.additive, group, "left")
        right = _table_from_triples(group, payload["right"], group, ring.additive, "right")
    except KeyError as exc:
        raise SpecParseError(f"Bimodule table is missing the {exc} field.") from exc
    return BimoduleTable(group, ring, left, right, name=name).validate()


def bimodule_from_spec(spec: Union[str, Path], ring: RingTable) -> BimoduleTable:
    """``"self"`` or a JSON file with ``group``, ``left`` ([r, m, rm]) and ``right`` ([m, r, mr]) triples."""
    if isinstance(spec, str) and spec.strip().lower() == "self":
        return self_bimodule(ring)
    path = Path(spec)
    logger.info("Loading bimodule table from %s", path)
    return bimodule_from_payload(_load_json(path), ring, name=path.stem)
