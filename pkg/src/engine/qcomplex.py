"""
MacLane's cubical Q-construction.

A cube function of dimension n is stored as a tuple of group-element indices
of length 2^n, indexed by vertex bitmask (coordinate 1 is the lowest bit).
Q_n(A) has the non-degenerate cube functions as its basis: those with no
face restriction that is constantly zero.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from functools import lru_cache
from multiprocessing import Pool
from typing import Any, Callable, Dict, Iterator, List, Mapping, Optional, Protocol, Sequence, Tuple, Union

from .abgroup import FinAbGroup, GroupElement, GroupMismatchError, RingTable
from .intlinalg import (
    ChainGroup,
    FPAbelianGroup,
    FPComplex,
    SparseIntMatrix,
    block_diagonal,
    homology_of_fp_complex,
    mapping_cone,
)

logger = logging.getLogger(__name__)

DEFAULT_BUDGET = 10**8

Values = Tuple[int, ...]


class DegreeOutOfRangeError(RuntimeError):
    """Raised when a degree needs more cube functions than the budget allows."""

    def __init__(self, message: str, required: int = 0, budget: int = 0):
        super().__init__(message)
        self.required = required
        self.budget = budget


# ---------------------------------------------------------------------- #
# Cubes


@dataclass(frozen=True)
class Cube:
    n: int

    def __post_init__(self) -> None:
        if self.n < 0:
            raise ValueError("Cube dimension must be non-negative.")

    @property
    def vertex_count(self) -> int:
        return 1 << self.n

    def vertices(self) -> range:
        return range(self.vertex_count)

    def coords(self, vertex: int) -> Tuple[int, ...]:
        return tuple((vertex >> i) & 1 for i in range(self.n))

    def vertex(self, coords: Sequence[int]) -> int:
        if len(coords) != self.n or any(c not in (0, 1) for c in coords):
            raise ValueError(f"{tuple(coords)} is not a vertex of C_{self.n}")
        return sum(c << i for i, c in enumerate(coords))


def insert_coordinate(vertex: int, n: int, i: int, bit: int) -> int:
    """Vertex of C_{n+1} obtained by inserting ``bit`` at position ``i`` (1-based)."""
    if not 1 <= i <= n + 1:
        raise ValueError(f"Insert position {i} out of range 1..{n + 1}")
    if bit not in (0, 1):
        raise ValueError(f"Inserted bit must be 0 or 1, got {bit}")
    if not 0 <= vertex < (1 << n):
        raise ValueError(f"Vertex {vertex} is not in C_{n}")
    low = vertex & ((1 << (i - 1)) - 1)
    high = vertex >> (i - 1)
    return low | (bit << (i - 1)) | (high << i)


@lru_cache(maxsize=None)
def insertion_table(n: int, i: int, bit: int) -> Tuple[int, ...]:
    """``insert_coordinate(e, n - 1, i, bit)`` for every vertex e of C_{n-1}."""
    return tuple(insert_coordinate(e, n - 1, i, bit) for e in range(1 << (n - 1)))


@lru_cache(maxsize=None)
def face_masks(n: int) -> Tuple[int, ...]:
    """Bitmasks (over vertices of C_n) of the 2n codimension-one faces."""
    masks = []
    for i in range(1, n + 1):
        for bit in (0, 1):
            mask = 0
            for e in insertion_table(n, i, bit):
                mask |= 1 << e
            masks.append(mask)
    return tuple(masks)


def _zero_mask(values: Values) -> int:
    mask = 0
    for v, x in enumerate(values):
        if not x:
            mask |= 1 << v
    return mask


def is_degenerate(values: Values) -> bool:
    """True when some face restriction is constantly 0 (in degree 0: the value is 0)."""
    if len(values) == 1:
        return values[0] == 0
    zero = _zero_mask(values)
    return any(zero & mask == mask for mask in face_masks(len(values).bit_length() - 1))


@dataclass(frozen=True)
class CubeFunction:
    """A function C_n -> group, as a value table indexed by vertex bitmask."""

    group: FinAbGroup
    values: Values

    def __post_init__(self) -> None:
        size = len(self.values)
        if size == 0 or size & (size - 1):
            raise ValueError(f"Value table length {size} is not a power of two.")
        if any(not 0 <= x < self.group.order for x in self.values):
            raise GroupMismatchError(f"Cube function values fall outside {self.group.spec()}")

    @property
    def n(self) -> int:
        return len(self.values).bit_length() - 1

    def __call__(self, vertex: int) -> GroupElement:
        return self.group.element_at(self.values[vertex])

    def is_degenerate(self) -> bool:
        return is_degenerate(self.values)

    def __str__(self) -> str:
        return "[" + ",".join(str(self(v)) for v in range(len(self.values))) + "]"


# ---------------------------------------------------------------------- #
# Bases


@dataclass
class QBasis:
    """Ordered non-degenerate cube functions of one degree, lexicographic on value tables."""

    group: FinAbGroup
    n: int
    basis: Tuple[Values, ...]
    index: Dict[Values, int] = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        if not self.index:
            self.index = {values: i for i, values in enumerate(self.basis)}

    @property
    def rank(self) -> int:
        return len(self.basis)

    def __len__(self) -> int:
        return len(self.basis)

    def function(self, position: int) -> CubeFunction:
        return CubeFunction(self.group, self.basis[position])

    def position(self, f: Union[CubeFunction, Values]) -> Optional[int]:
        values = f.values if isinstance(f, CubeFunction) else tuple(f)
        return self.index.get(values)

    def to_payload(self) -> Dict[str, Any]:
        return {"group": self.group.spec(), "n": self.n, "basis": [list(values) for values in self.basis]}

    @classmethod
    def from_payload(cls, payload: Mapping[str, Any], group: FinAbGroup) -> "QBasis":
        if payload.get("group") != group.spec():
            raise ValueError(f"Basis payload is for {payload.get('group')!r}, not {group.spec()!r}")
        n = int(payload["n"])
        basis = tuple(tuple(int(x) for x in values) for values in payload["basis"])
        if any(len(values) != 1 << n for values in basis):
            raise ValueError("Basis payload has value tables of the wrong length.")
        if any(not 0 <= x < group.order for values in basis for x in values):
            raise ValueError("Basis payload has values outside the group.")
        if any(is_degenerate(values) for values in basis):
            raise ValueError("Basis payload contains a degenerate function.")
        if any(a >= b for a, b in zip(basis, basis[1:])):
            raise ValueError("Basis payload is not in strictly increasing lexicographic order.")
        return cls(group, n, basis)


def enumeration_size(group: FinAbGroup, n: int) -> int:
    return group.order ** (1 << n)


def check_budget(group: FinAbGroup, n: int, budget: int) -> None:
    required = enumeration_size(group, n)
    if required > budget:
        raise DegreeOutOfRangeError(
            f"Degree {n} of Q({group.spec()}) is out of computational range: "
            f"{group.order}^{1 << n} = {required} cube functions exceed the budget of {budget}.",
            required=required,
            budget=budget,
        )


def _enumerate_chunk(args: Tuple[int, int, int]) -> List[Values]:
    """Non-degenerate value tables whose value at vertex 0 is ``first``."""
    order, n, first = args
    if n == 0:
        return [] if first == 0 else [(first,)]
    masks = face_masks(n)
    found = []
    for rest in itertools.product(range(order), repeat=(1 << n) - 1):
        values = (first,) + rest
        zero = _zero_mask(values)
        if not any(zero & mask == mask for mask in masks):
            found.append(values)
    return found


def enumerate_basis(group: FinAbGroup, n: int, workers: int = 1) -> QBasis:
    """
    Stream all |A|^(2^n) value tables and keep the non-degenerate ones.

    The enumeration is split by the value at vertex 0; chunks are merged in
    that order, so the result is the same for any number of workers.
    """
    chunks = [(group.order, n, first) for first in range(group.order)]
    if workers > 1 and n > 0:
        with Pool(processes=workers) as pool:
            parts = pool.map(_enumerate_chunk, chunks)
    else:
        parts = [_enumerate_chunk(chunk) for chunk in chunks]
    basis = tuple(values for part in parts for values in part)
    logger.info("Q_%s(%s): rank %s of %s functions", n, group.spec(), len(basis), enumeration_size(group, n))
    return QBasis(group, n, basis)


# ---------------------------------------------------------------------- #
# The differential


def _delta_terms(values: Values, n: int, plus: Callable[[int, int], int]) -> Iterator[Tuple[int, Values]]:
    """(coefficient, image) pairs of delta' = sum_i (-1)^i (P_i - R_i - S_i), before projection."""
    for i in range(1, n + 1):
        sign = -1 if i % 2 else 1
        at_zero, at_one = insertion_table(n, i, 0), insertion_table(n, i, 1)
        r = tuple(values[e] for e in at_zero)
        s = tuple(values[e] for e in at_one)
        yield sign, tuple(plus(a, b) for a, b in zip(r, s))
        yield -sign, r
        yield -sign, s


def q_prime_delta(group: FinAbGroup, f: Union[CubeFunction, Values]) -> Dict[Values, int]:
    """delta' on an arbitrary monomial of Q'_n, degenerate terms included."""
    values = f.values if isinstance(f, CubeFunction) else tuple(f)
    n = len(values).bit_length() - 1
    if n == 0:
        raise ValueError("delta is not defined on degree 0")
    out: Dict[Values, int] = {}
    for coeff, image in _delta_terms(values, n, group.add_index):
        out[image] = out.get(image, 0) + coeff
    return {image: c for image, c in out.items() if c}


def delta_column(values: Values, target: QBasis) -> Dict[int, int]:
    """Column of delta_n for one basis element; degenerate images are dropped."""
    column: Dict[int, int] = {}
    index = target.index
    for coeff, image in _delta_terms(values, target.n + 1, target.group.add_index):
        row = index.get(image)
        if row is not None:
            column[row] = column.get(row, 0) + coeff
    return {r: c for r, c in column.items() if c}


def build_delta(source: QBasis, target: QBasis) -> SparseIntMatrix:
    if source.n != target.n + 1 or source.group != target.group:
        raise ValueError(f"Cannot build delta from degree {source.n} to degree {target.n}")
    columns = [delta_column(values, target) for values in source.basis]
    matrix = SparseIntMatrix(target.rank, source.rank, columns)
    logger.info("delta_%s on Q(%s): %sx%s, nnz=%s", source.n, source.group.spec(), matrix.rows, matrix.cols, matrix.nnz)
    return matrix


# ---------------------------------------------------------------------- #
# Artifact storage


class ArtifactStore(Protocol):
    def load(self, group_spec: str, degree: int, kind: str) -> Optional[Dict[str, Any]]:
        ...

    def store(self, group_spec: str, degree: int, kind: str, payload: Dict[str, Any]) -> None:
        ...


@dataclass
class QChainData:
    """Bases and differentials of Q_*(A) in degrees 0..max_n."""

    group: FinAbGroup
    max_n: int
    bases: Dict[int, QBasis]
    deltas: Dict[int, SparseIntMatrix]

    def fp_complex(self) -> FPComplex:
        """The free complex on degrees 0..max_n, truncated at the top."""
        groups = {n: ChainGroup.free(self.bases[n].rank) for n in range(self.max_n + 1)}
        return FPComplex(0, self.max_n, groups, dict(self.deltas), truncated=True)


class QComplex:
    """
    Lazily built Q_*(A) with in-memory memoization and an optional artifact store.
    """

    def __init__(self, group: FinAbGroup, budget: int = DEFAULT_BUDGET, workers: int = 1, store: Optional[ArtifactStore] = None):
        self.group = group
        self.budget = budget
        self.workers = workers
        self.store = store
        self._bases: Dict[int, QBasis] = {}
        self._deltas: Dict[int, SparseIntMatrix] = {}

    def basis(self, n: int, budget: Optional[int] = None) -> QBasis:
        if n < 0:
            raise ValueError("Q-degrees are non-negative.")
        check_budget(self.group, n, self.budget if budget is None else budget)
        if n not in self._bases:
            self._bases[n] = self._load_basis(n) or self._compute_basis(n)
        return self._bases[n]

    def _load_basis(self, n: int) -> Optional[QBasis]:
        if self.store is None:
            return None
        payload = self.store.load(self.group.spec(), n, "basis")
        if payload is None:
            return None
        try:
            return QBasis.from_payload(payload, self.group)
        except (KeyError, TypeError, ValueError) as exc:
            logger.warning("Discarding unusable cached basis Q_%s(%s): %s", n, self.group.spec(), exc)
            return None

    def _compute_basis(self, n: int) -> QBasis:
        basis = enumerate_basis(self.group, n, self.workers)
        if self.store is not None:
            self.store.store(self.group.spec(), n, "basis", basis.to_payload())
        return basis

    def delta(self, n: int, budget: Optional[int] = None) -> SparseIntMatrix:
        if n < 1:
            raise ValueError("delta_n is defined for n >= 1.")
        source, target = self.basis(n, budget), self.basis(n - 1, budget)
        if n not in self._deltas:
            matrix = None
            if self.store is not None:
                payload = self.store.load(self.group.spec(), n, "delta")
                if payload is not None:
                    try:
                        matrix = SparseIntMatrix.from_payload(payload)
                    except (KeyError, TypeError, ValueError, IndexError) as exc:
                        logger.warning("Discarding unusable cached delta_%s(%s): %s", n, self.group.spec(), exc)
                    if matrix is not None and matrix.shape != (target.rank, source.rank):
                        logger.warning("Cached delta_%s(%s) has the wrong shape; rebuilding", n, self.group.spec())
                        matrix = None
            if matrix is None:
                matrix = build_delta(source, target)
                if self.store is not None:
                    self.store.store(self.group.spec(), n, "delta", matrix.to_payload())
            self._deltas[n] = matrix
        return self._deltas[n]

    def chain_data(self, max_n: int, budget: Optional[int] = None) -> QChainData:
        bases = {n: self.basis(n, budget) for n in range(max_n + 1)}
        deltas = {n: self.delta(n, budget) for n in range(1, max_n + 1)}
        return QChainData(self.group, max_n, bases, deltas)

    def homology(self, k: int, budget: Optional[int] = None) -> FPAbelianGroup:
        result = homology_of_fp_complex(self.chain_data(k + 1, budget).fp_complex(), k)
        logger.info("H_%s(Q(%s)) = %s", k, self.group.spec(), result)
        return result


_complexes: Dict[FinAbGroup, QComplex] = {}
_default_settings: Tuple[Optional[int], Optional[int], Optional[ArtifactStore]] = (None, None, None)


def q_complex(
    group: FinAbGroup,
    budget: Optional[int] = None,
    workers: Optional[int] = None,
    store: Optional[ArtifactStore] = None,
) -> QComplex:
    """Shared QComplex for ``group``; arguments that are given replace the current settings."""
    complex_ = _complexes.get(group)
    if complex_ is None:
        complex_ = _complexes[group] = QComplex(group)
        default_budget, default_workers, default_store = _default_settings
        complex_.budget = default_budget or DEFAULT_BUDGET
        complex_.workers = default_workers or 1
        complex_.store = default_store
    if budget is not None:
        complex_.budget = budget
    if workers is not None:
        complex_.workers = workers
    if store is not None:
        complex_.store = store
    return complex_


def configure_q_complexes(budget: Optional[int] = None, workers: Optional[int] = None, store: Optional[ArtifactStore] = None) -> None:
    """Defaults applied to every shared QComplex, present and future."""
    global _default_settings
    _default_settings = (budget, workers, store)
    for complex_ in _complexes.values():
        complex_.budget = budget or DEFAULT_BUDGET
        complex_.workers = workers or 1
        complex_.store = store


def clear_q_complexes() -> None:
    global _default_settings
    _complexes.clear()
    _default_settings = (None, None, None)


# ---------------------------------------------------------------------- #
# Module-level operations


def q_basis(group: FinAbGroup, n: int, budget: Optional[int] = None) -> QBasis:
    return q_complex(group).basis(n, budget)


def delta_matrix(group: FinAbGroup, n: int, budget: Optional[int] = None) -> SparseIntMatrix:
    """delta_n: Q_n -> Q_{n-1} in the QBasis bases."""
    if n == 0:
        raise ValueError("There is no differential out of degree 0.")
    return q_complex(group).delta(n, budget)


def q_homology(group: FinAbGroup, k: int, budget: Optional[int] = None) -> FPAbelianGroup:
    return q_complex(group).homology(k, budget)


def unit_function(ring: RingTable) -> CubeFunction:
    """The class [1] in Q_0(R), the unit of the Dixmier product."""
    return CubeFunction(ring.additive, (ring.one_index,))


# Dixmier products


@dataclass(frozen=True)
class BilinearMap:
    """A bilinear map left x right -> target given by an index table."""

    left: FinAbGroup
    right: FinAbGroup
    target: FinAbGroup
    table: Tuple[Tuple[int, ...], ...]

    @classmethod
    def from_ring(cls, ring: RingTable) -> "BilinearMap":
        group = ring.additive
        return cls(group, group, group, ring.mul_table)

    def __call__(self, a: int, b: int) -> int:
        return self.table[a][b]


def dixmier_values(f: Values, g: Values, mul: Callable[[int, int], int]) -> Values:
    """h(x ++ y) = mul(f(x), g(y)); f's coordinates are the low bits."""
    return tuple(mul(a, b) for b in g for a in f)


def dixmier_matrix(
    left: FinAbGroup,
    right: FinAbGroup,
    n: int,
    m: int,
    mul: Union[BilinearMap, RingTable],
    budget: Optional[int] = None,
) -> SparseIntMatrix:
    """
    Q_n(A) (x) Q_m(B) -> Q_{n+m}(C).

    Columns enumerate pairs (i, j) of basis positions as ``i * rank_m + j``;
    degenerate products are dropped.
    """
    if isinstance(mul, RingTable):
        mul = BilinearMap.from_ring(mul)
    if mul.left != left or mul.right != right:
        raise GroupMismatchError("The bilinear map does not match the factor groups.")
    first, second = q_basis(left, n, budget), q_basis(right, m, budget)
    target = q_basis(mul.target, n + m, budget)
    table = mul.table
    columns = []
    for f in first.basis:
        for g in second.basis:
            row = target.index.get(tuple(table[a][b] for b in g for a in f))
            columns.append({} if row is None else {row: 1})
    return SparseIntMatrix(target.rank, first.rank * second.rank, columns)


# Augmentation


def augmentation_target(group: FinAbGroup) -> ChainGroup:
    """A presented as Z^r / diag(d_1, ..., d_r)."""
    return ChainGroup.cyclic_sum(group.factors)


def augmentation_matrix(group: FinAbGroup, budget: Optional[int] = None) -> SparseIntMatrix:
    """[a] -> a in coordinates; higher degrees augment to zero."""
    basis = q_basis(group, 0, budget)
    columns = [{k: c for k, c in enumerate(group.coords_of(values[0])) if c} for values in basis.basis]
    return SparseIntMatrix(group.rank, basis.rank, columns)


# Additivity


def additivity_map(left: FinAbGroup, right: FinAbGroup, n: int, budget: Optional[int] = None) -> SparseIntMatrix:
    """Q_n(U) + Q_n(V) -> Q_n(U + V), induced pointwise by the summand inclusions."""
    total = left.direct_sum(right)
    include_left, include_right = left.inclusion_indices(right)
    target = q_basis(total, n, budget)
    columns = []
    for group, include in ((left, include_left), (right, include_right)):
        for values in q_basis(group, n, budget).basis:
            row = target.index.get(tuple(include[x] for x in values))
            columns.append({} if row is None else {row: 1})
    return SparseIntMatrix(target.rank, len(columns), columns)


@dataclass(frozen=True)
class AdditivityVerdict:
    degree: int
    source: FPAbelianGroup
    target: FPAbelianGroup
    cone: FPAbelianGroup

    @property
    def isomorphic(self) -> bool:
        # Surjective onto an isomorphic finitely generated group.
        return self.source == self.target and self.cone.is_zero


def _sum_complex(first: QChainData, second: QChainData) -> FPComplex:
    top = first.max_n
    groups = {n: ChainGroup.free(first.bases[n].rank + second.bases[n].rank) for n in range(top + 1)}
    deltas = {n: block_diagonal([first.deltas[n], second.deltas[n]]) for n in range(1, top + 1)}
    return FPComplex(0, top, groups, deltas, truncated=True)


def additivity_report(left: FinAbGroup, right: FinAbGroup, max_degree: int, budget: Optional[int] = None) -> List[AdditivityVerdict]:
    """Per-degree comparison of H_k(Q(U) + Q(V)) and H_k(Q(U + V)) through the mapping cone."""
    top = max_degree + 1
    source = _sum_complex(q_complex(left).chain_data(top, budget), q_complex(right).chain_data(top, budget))
    target = q_complex(left.direct_sum(right)).chain_data(top, budget).fp_complex()
    chain_map = {n: additivity_map(left, right, n, budget) for n in range(top + 1)}
    cone = mapping_cone(chain_map, source, target)
    verdicts = []
    for k in range(max_degree + 1):
        verdict = AdditivityVerdict(
            k,
            homology_of_fp_complex(source, k),
            homology_of_fp_complex(target, k),
            homology_of_fp_complex(cone, k),
        )
        logger.info("Additivity in degree %s: %s -> %s, cone %s", k, verdict.source, verdict.target, verdict.cone)
        verdicts.append(verdict)
    return verdicts
