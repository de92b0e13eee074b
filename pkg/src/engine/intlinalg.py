"""
Exact sparse integer linear algebra.

Smith normal form by elementary operations on arbitrary-precision integers,
kernel and quotient lattices, and homology of bounded complexes of finitely
presented abelian groups. Matrices are stored column-major as dicts of
nonzero entries; a column is the image of one generator, which is how every
differential in this project is assembled.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Set, Tuple

import numpy as np

logger = logging.getLogger(__name__)

Column = Dict[int, int]

# Duplicate columns are merged during diagonal-only elimination once the
# matrix is this many times wider than it is tall.
DEDUP_WIDTH_RATIO = 2
DEDUP_EVERY = 8


class LatticeInclusionError(RuntimeError):
    """Raised when a lattice is not contained in the lattice it is divided by."""

    def __init__(self, message: str, witness_column: int):
        super().__init__(message)
        self.witness_column = witness_column


class ComplexWindowError(ValueError):
    """Raised when homology is requested outside the window a complex was built for."""


class ComplexCompatibilityError(RuntimeError):
    """Raised when differentials do not respect relations or fail d^2 = 0."""


# ---------------------------------------------------------------------- #
# Matrices


class SparseIntMatrix:
    """Immutable sparse integer matrix; absent entries are zero."""

    __slots__ = ("rows", "cols", "_columns")

    def __init__(self, rows: int, cols: int, columns: Optional[Sequence[Mapping[int, int]]] = None):
        if rows < 0 or cols < 0:
            raise ValueError("Matrix dimensions must be non-negative.")
        self.rows = rows
        self.cols = cols
        stored: List[Column] = []
        if columns is None:
            stored = [{} for _ in range(cols)]
        else:
            if len(columns) != cols:
                raise ValueError(f"Expected {cols} columns, got {len(columns)}")
            for col in columns:
                clean = {}
                for r, v in col.items():
                    if not 0 <= r < rows:
                        raise IndexError(f"Row index {r} out of range for {rows} rows")
                    if v:
                        clean[r] = int(v)
                stored.append(clean)
        self._columns = stored

    @classmethod
    def _wrap(cls, rows: int, cols: int, columns: List[Column]) -> "SparseIntMatrix":
        """Adopt already-clean columns without copying."""
        matrix = cls.__new__(cls)
        matrix.rows, matrix.cols, matrix._columns = rows, cols, columns
        return matrix

    @classmethod
    def from_entries(cls, rows: int, cols: int, entries: Mapping[Tuple[int, int], int]) -> "SparseIntMatrix":
        columns: List[Column] = [{} for _ in range(cols)]
        for (r, c), v in entries.items():
            if not 0 <= c < cols:
                raise IndexError(f"Column index {c} out of range for {cols} columns")
            if v:
                columns[c][r] = v
        return cls(rows, cols, columns)

    @classmethod
    def from_dense(cls, data) -> "SparseIntMatrix":
        array = np.array(data, dtype=object)
        if array.size == 0:
            shape = array.shape if array.ndim == 2 else (0, 0)
            return cls.zeros(*shape)
        if array.ndim != 2:
            raise ValueError("Dense input must be two-dimensional.")
        rows, cols = array.shape
        return cls(rows, cols, [{r: int(array[r, c]) for r in range(rows) if array[r, c]} for c in range(cols)])

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "SparseIntMatrix":
        return cls._wrap(rows, cols, [{} for _ in range(cols)])

    @classmethod
    def identity(cls, n: int) -> "SparseIntMatrix":
        return cls._wrap(n, n, [{i: 1} for i in range(n)])

    @classmethod
    def diagonal(cls, values: Sequence[int], rows: Optional[int] = None, cols: Optional[int] = None) -> "SparseIntMatrix":
        rows = len(values) if rows is None else rows
        cols = len(values) if cols is None else cols
        columns: List[Column] = [{} for _ in range(cols)]
        for i, v in enumerate(values):
            if v:
                columns[i][i] = int(v)
        return cls(rows, cols, columns)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.rows, self.cols

    @property
    def entries(self) -> Dict[Tuple[int, int], int]:
        return {(r, c): v for c, col in enumerate(self._columns) for r, v in col.items()}

    def column(self, j: int) -> Column:
        return dict(self._columns[j])

    def iter_columns(self) -> Iterator[Column]:
        for col in self._columns:
            yield dict(col)

    @property
    def nnz(self) -> int:
        return sum(len(col) for col in self._columns)

    def is_zero(self) -> bool:
        return not any(self._columns)

    def to_dense(self) -> np.ndarray:
        array = np.zeros((self.rows, self.cols), dtype=object)
        for c, col in enumerate(self._columns):
            for r, v in col.items():
                array[r, c] = v
        return array

    def transpose(self) -> "SparseIntMatrix":
        columns: List[Column] = [{} for _ in range(self.rows)]
        for c, col in enumerate(self._columns):
            for r, v in col.items():
                columns[r][c] = v
        return SparseIntMatrix._wrap(self.cols, self.rows, columns)

    def __matmul__(self, other: "SparseIntMatrix") -> "SparseIntMatrix":
        if self.cols != other.rows:
            raise ValueError(f"Cannot multiply {self.shape} by {other.shape}")
        columns = []
        for col in other._columns:
            out: Column = {}
            for k, v in col.items():
                for r, w in self._columns[k].items():
                    out[r] = out.get(r, 0) + v * w
            columns.append({r: v for r, v in out.items() if v})
        return SparseIntMatrix._wrap(self.rows, other.cols, columns)

    def __add__(self, other: "SparseIntMatrix") -> "SparseIntMatrix":
        if self.shape != other.shape:
            raise ValueError(f"Cannot add {self.shape} and {other.shape}")
        columns = []
        for a, b in zip(self._columns, other._columns):
            out = dict(a)
            for r, v in b.items():
                out[r] = out.get(r, 0) + v
            columns.append({r: v for r, v in out.items() if v})
        return SparseIntMatrix._wrap(self.rows, self.cols, columns)

    def __neg__(self) -> "SparseIntMatrix":
        return self.scale(-1)

    def __sub__(self, other: "SparseIntMatrix") -> "SparseIntMatrix":
        return self + (-other)

    def scale(self, k: int) -> "SparseIntMatrix":
        if k == 0:
            return SparseIntMatrix.zeros(self.rows, self.cols)
        return SparseIntMatrix._wrap(self.rows, self.cols, [{r: k * v for r, v in col.items()} for col in self._columns])

    def select_rows(self, start: int, stop: int) -> "SparseIntMatrix":
        columns = [{r - start: v for r, v in col.items() if start <= r < stop} for col in self._columns]
        return SparseIntMatrix._wrap(stop - start, self.cols, columns)

    def select_columns(self, indices: Iterable[int]) -> "SparseIntMatrix":
        columns = [dict(self._columns[j]) for j in indices]
        return SparseIntMatrix._wrap(self.rows, len(columns), columns)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SparseIntMatrix):
            return NotImplemented
        return self.shape == other.shape and self._columns == other._columns

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return f"SparseIntMatrix({self.rows}x{self.cols}, nnz={self.nnz})"

    # Serialization (cache format)

    def to_payload(self) -> Dict[str, object]:
        return {
            "rows": self.rows,
            "cols": self.cols,
            "entries": [[r, c, v] for c, col in enumerate(self._columns) for r, v in sorted(col.items())],
        }

    @classmethod
    def from_payload(cls, payload: Mapping[str, object]) -> "SparseIntMatrix":
        rows, cols = int(payload["rows"]), int(payload["cols"])  # type: ignore[arg-type]
        return cls.from_entries(rows, cols, {(int(r), int(c)): int(v) for r, c, v in payload["entries"]})  # type: ignore[union-attr]


def hstack(matrices: Sequence[SparseIntMatrix], rows: Optional[int] = None) -> SparseIntMatrix:
    if not matrices:
        return SparseIntMatrix.zeros(rows or 0, 0)
    height = matrices[0].rows
    if any(m.rows != height for m in matrices):
        raise ValueError("hstack needs matrices with equal row counts")
    columns = [dict(col) for m in matrices for col in m._columns]
    return SparseIntMatrix._wrap(height, len(columns), columns)


def block_matrix(
    blocks: Sequence[Sequence[Optional[SparseIntMatrix]]],
    row_sizes: Sequence[int],
    col_sizes: Sequence[int],
) -> SparseIntMatrix:
    """Assemble a block matrix; ``None`` blocks are zero."""
    row_offsets = [sum(row_sizes[:i]) for i in range(len(row_sizes))]
    columns: List[Column] = []
    for bj, width in enumerate(col_sizes):
        for j in range(width):
            out: Column = {}
            for bi, offset in enumerate(row_offsets):
                block = blocks[bi][bj]
                if block is None:
                    continue
                if block.shape != (row_sizes[bi], width):
                    raise ValueError(f"Block ({bi}, {bj}) has shape {block.shape}, expected {(row_sizes[bi], width)}")
                for r, v in block._columns[j].items():
                    out[offset + r] = v
            columns.append(out)
    return SparseIntMatrix._wrap(sum(row_sizes), sum(col_sizes), columns)


def kron(left: SparseIntMatrix, right: SparseIntMatrix) -> SparseIntMatrix:
    """Tensor product; column (i, j) sits at ``i * right.cols + j``, row (a, b) at ``a * right.rows + b``."""
    columns: List[Column] = []
    for lcol in left._columns:
        for rcol in right._columns:
            columns.append({a * right.rows + b: v * w for a, v in lcol.items() for b, w in rcol.items()})
    return SparseIntMatrix._wrap(left.rows * right.rows, left.cols * right.cols, columns)


def block_diagonal(matrices: Sequence[SparseIntMatrix]) -> SparseIntMatrix:
    rows = [m.rows for m in matrices]
    cols = [m.cols for m in matrices]
    blocks = [[m if i == j else None for j, m in enumerate(matrices)] for i in range(len(matrices))]
    return block_matrix(blocks, rows, cols)


# ---------------------------------------------------------------------- #
# Smith normal form


@dataclass(frozen=True)
class SNFResult:
    """``U @ A @ V == diag(factors)`` with unimodular U, V (when requested)."""

    factors: Tuple[int, ...]
    rows: int
    cols: int
    U: Optional[SparseIntMatrix] = None
    V: Optional[SparseIntMatrix] = None

    @property
    def rank(self) -> int:
        return len(self.factors)

    def diagonal_matrix(self) -> SparseIntMatrix:
        return SparseIntMatrix.diagonal(self.factors, self.rows, self.cols)


class _Eliminator:
    """Mutable working copy of a matrix for elementary row and column operations."""

    def __init__(self, matrix: SparseIntMatrix, transforms: bool):
        self.cols: Dict[int, Column] = {j: dict(col) for j, col in enumerate(matrix._columns) if col}
        self.rows: Dict[int, Set[int]] = {}
        for j, col in self.cols.items():
            for r in col:
                self.rows.setdefault(r, set()).add(j)
        self.transforms = transforms
        # U is kept as rows, V as columns, each a sparse dict.
        self.u: Dict[int, Column] = {i: {i: 1} for i in range(matrix.rows)} if transforms else {}
        self.v: Dict[int, Column] = {j: {j: 1} for j in range(matrix.cols)} if transforms else {}
        self.steps = 0

    def _set(self, r: int, j: int, value: int) -> None:
        col = self.cols.setdefault(j, {})
        if value:
            if r not in col:
                self.rows.setdefault(r, set()).add(j)
            col[r] = value
        elif r in col:
            del col[r]
            members = self.rows[r]
            members.discard(j)
            if not members:
                del self.rows[r]

    def add_column_multiple(self, target: int, source: int, q: int) -> None:
        """col_target += q * col_source."""
        if not q:
            return
        target_col = self.cols.setdefault(target, {})
        for r, v in list(self.cols[source].items()):
            self._set(r, target, target_col.get(r, 0) + q * v)
        if not self.cols[target]:
            del self.cols[target]
        if self.transforms:
            _axpy(self.v[target], self.v[source], q)

    def add_row_multiple(self, target: int, source: int, q: int) -> None:
        """row_target += q * row_source."""
        if not q:
            return
        for j in list(self.rows.get(source, ())):
            col = self.cols[j]
            self._set(target, j, col.get(target, 0) + q * col[source])
            if not self.cols[j]:
                del self.cols[j]
        if self.transforms:
            _axpy(self.u[target], self.u[source], q)

    def drop_column(self, j: int) -> None:
        for r in self.cols.pop(j, {}):
            members = self.rows[r]
            members.discard(j)
            if not members:
                del self.rows[r]

    def entry(self, r: int, j: int) -> int:
        return self.cols.get(j, {}).get(r, 0)

    def pivot(self) -> Tuple[int, int]:
        """Entry of minimal absolute value, ties broken by smallest (row, col)."""
        best: Optional[Tuple[int, int, int]] = None
        for r in sorted(self.rows):
            abs_value, j = min((abs(self.cols[j][r]), j) for j in self.rows[r])
            if abs_value == 1:
                return r, j
            if best is None or abs_value < best[0]:
                best = (abs_value, r, j)
        assert best is not None
        return best[1], best[2]

    def dedup_columns(self) -> None:
        seen: Set[frozenset] = set()
        for j in sorted(self.cols):
            col = self.cols[j]
            lead = col[min(col)]
            key = frozenset(col.items()) if lead > 0 else frozenset((r, -v) for r, v in col.items())
            if key in seen:
                self.drop_column(j)
            else:
                seen.add(key)


def _axpy(target: Column, source: Column, q: int) -> None:
    for k, v in source.items():
        value = target.get(k, 0) + q * v
        if value:
            target[k] = value
        else:
            target.pop(k, None)


def snf(matrix: SparseIntMatrix, transforms: bool = True) -> SNFResult:
    """
    Smith normal form by minimal-absolute-value pivoting.

    With ``transforms=False`` only the invariant factors are computed, which
    lets the elimination discard zero and duplicate columns along the way.
    """
    work = _Eliminator(matrix, transforms)
    pivots: List[Tuple[int, int]] = []
    factors: List[int] = []

    while work.cols:
        r, c = work.pivot()
        a = work.entry(r, c)
        if abs(a) == 1:
            # Clear the pivot row with column operations; the pivot column
            # then needs only bookkeeping row operations.
            for j in sorted(work.rows[r] - {c}):
                work.add_column_multiple(j, c, -work.entry(r, j) * a)
            if transforms:
                for i in sorted(set(work.cols[c]) - {r}):
                    _axpy(work.u[i], work.u[r], -work.entry(i, c) * a)
        else:
            for i in sorted(set(work.cols[c]) - {r}):
                work.add_row_multiple(i, r, -(work.entry(i, c) // a))
            for j in sorted(work.rows.get(r, set()) - {c}):
                work.add_column_multiple(j, c, -(work.entry(r, j) // a))
            if len(work.cols.get(c, {})) > 1 or len(work.rows.get(r, ())) > 1:
                continue
            witness = _non_divisible_entry(work, a, r, c)
            if witness is not None:
                work.add_row_multiple(r, witness, 1)
                continue

        if a < 0 and transforms:
            work.u[r] = {k: -v for k, v in work.u[r].items()}
        work.drop_column(c)
        pivots.append((r, c))
        factors.append(abs(a))
        work.steps += 1
        if not transforms and len(work.cols) > DEDUP_WIDTH_RATIO * max(len(work.rows), 1) and work.steps % DEDUP_EVERY == 0:
            work.dedup_columns()

    logger.debug("SNF of %sx%s matrix: rank %s", matrix.rows, matrix.cols, len(factors))
    if not transforms:
        return SNFResult(tuple(factors), matrix.rows, matrix.cols)

    pivot_rows = [r for r, _ in pivots]
    pivot_cols = [c for _, c in pivots]
    taken_rows, taken_cols = set(pivot_rows), set(pivot_cols)
    row_order = pivot_rows + [i for i in range(matrix.rows) if i not in taken_rows]
    col_order = pivot_cols + [j for j in range(matrix.cols) if j not in taken_cols]

    u_columns: List[Column] = [{} for _ in range(matrix.rows)]
    for new_row, old_row in enumerate(row_order):
        for k, v in work.u[old_row].items():
            u_columns[k][new_row] = v
    U = SparseIntMatrix._wrap(matrix.rows, matrix.rows, u_columns)
    V = SparseIntMatrix._wrap(matrix.cols, matrix.cols, [dict(work.v[j]) for j in col_order])
    return SNFResult(tuple(factors), matrix.rows, matrix.cols, U, V)


def _non_divisible_entry(work: _Eliminator, a: int, r: int, c: int) -> Optional[int]:
    """Row of the first remaining entry not divisible by the isolated pivot ``a``."""
    if abs(a) == 1:
        return None
    for j in sorted(work.cols):
        if j == c:
            continue
        for i in sorted(work.cols[j]):
            if work.cols[j][i] % a:
                return i
    return None


# ---------------------------------------------------------------------- #
# Finitely presented abelian groups


@dataclass(frozen=True)
class FPAbelianGroup:
    """``Z^free_rank + Z/t_1 + ... + Z/t_k`` with t_1 | t_2 | ... and every t_i >= 2."""

    free_rank: int = 0
    torsion: Tuple[int, ...] = ()

    def __post_init__(self) -> None:
        torsion = tuple(int(t) for t in self.torsion)
        if self.free_rank < 0:
            raise ValueError("Free rank must be non-negative.")
        for i, t in enumerate(torsion):
            if t < 2:
                raise ValueError(f"Torsion coefficient {t} must be at least 2.")
            if i + 1 < len(torsion) and torsion[i + 1] % t:
                raise ValueError(f"Torsion coefficients {torsion} do not form a divisibility chain.")
        object.__setattr__(self, "torsion", torsion)

    @classmethod
    def from_orders(cls, orders: Sequence[int], free_rank: int = 0) -> "FPAbelianGroup":
        """Canonical form of ``Z^free_rank + (+) Z/o_i`` for arbitrary positive orders."""
        factors = snf(SparseIntMatrix.diagonal(list(orders)), transforms=False).factors
        return cls(free_rank, tuple(f for f in factors if f > 1))

    @classmethod
    def parse(cls, text: str) -> "FPAbelianGroup":
        text = "".join(text.split())
        if text == "0":
            return cls()
        free, orders = 0, []
        for part in text.split("+"):
            if part == "Z":
                free += 1
            elif part.startswith("Z/") and part[2:].isdigit():
                orders.append(int(part[2:]))
            else:
                raise ValueError(f"Cannot parse group summand '{part}'")
        return cls.from_orders(orders, free)

    @property
    def is_zero(self) -> bool:
        return self.free_rank == 0 and not self.torsion

    @property
    def order(self) -> Optional[int]:
        """Group order, or None when infinite."""
        if self.free_rank:
            return None
        result = 1
        for t in self.torsion:
            result *= t
        return result

    def format(self) -> str:
        parts = ["Z"] * self.free_rank + [f"Z/{t}" for t in self.torsion]
        return "+".join(parts) or "0"

    def __str__(self) -> str:
        return self.format()


def quotient_lattice(K: SparseIntMatrix, I: SparseIntMatrix) -> FPAbelianGroup:
    """
    The group lattice(K) / lattice(I), for column lattices with I inside K.

    I's columns are written in the basis ``d_k * U^-1 e_k`` of lattice(K)
    coming from ``U K V = diag(d)``, and the coordinate matrix is reduced.
    """
    if K.rows != I.rows:
        raise ValueError(f"Lattices live in different ambient ranks: {K.rows} vs {I.rows}")
    result = snf(K, transforms=True)
    rank = result.rank
    assert result.U is not None
    transformed = result.U @ I
    columns: List[Column] = []
    for j, col in enumerate(transformed._columns):
        coords: Column = {}
        for k, v in col.items():
            if k >= rank or v % result.factors[k]:
                raise LatticeInclusionError(f"Column {j} of the sublattice is not in the ambient lattice.", j)
            coords[k] = v // result.factors[k]
        columns.append(coords)
    relations = snf(SparseIntMatrix._wrap(rank, I.cols, columns), transforms=False).factors
    return FPAbelianGroup(rank - len(relations), tuple(f for f in relations if f > 1))


def kernel_lattice(A: SparseIntMatrix) -> SparseIntMatrix:
    """Columns spanning {x : A x = 0}: the columns of V past the rank."""
    result = snf(A, transforms=True)
    assert result.V is not None
    return result.V.select_columns(range(result.rank, A.cols))


def _diagonal_values(matrix: SparseIntMatrix) -> Optional[Dict[int, int]]:
    values: Dict[int, int] = {}
    for j, col in enumerate(matrix._columns):
        if not col:
            continue
        if len(col) != 1 or j not in col or j in values:
            return None
        values[j] = col[j]
    return values


def lattice_contains(generators: SparseIntMatrix, vectors: SparseIntMatrix) -> Optional[int]:
    """Index of the first column of ``vectors`` outside lattice(generators), or None."""
    diagonal = _diagonal_values(generators)
    if diagonal is not None:
        for j, col in enumerate(vectors._columns):
            for r, v in col.items():
                d = diagonal.get(r)
                if d is None or v % d:
                    return j
        return None
    result = snf(generators, transforms=True)
    assert result.U is not None
    for j, col in enumerate((result.U @ vectors)._columns):
        for k, v in col.items():
            if k >= result.rank or v % result.factors[k]:
                return j
    return None


# ---------------------------------------------------------------------- #
# Complexes


@dataclass(frozen=True)
class ChainGroup:
    """``Z^generators / lattice(relations)``."""

    generators: int
    relations: SparseIntMatrix

    @classmethod
    def free(cls, generators: int) -> "ChainGroup":
        return cls(generators, SparseIntMatrix.zeros(generators, 0))

    @classmethod
    def cyclic_sum(cls, orders: Sequence[int]) -> "ChainGroup":
        return cls(len(orders), SparseIntMatrix.diagonal(list(orders)))

    @property
    def is_free(self) -> bool:
        return self.relations.cols == 0 or self.relations.is_zero()


@dataclass
class FPComplex:
    """
    Chain groups on degrees ``lo..hi`` with differentials ``d_n: C_n -> C_{n-1}``.

    Degrees below ``lo`` and above ``hi`` are zero. A *truncated* complex was
    cut off at ``hi``, so its homology is only meaningful below ``hi``.
    """

    lo: int
    hi: int
    groups: Dict[int, ChainGroup]
    differentials: Dict[int, SparseIntMatrix] = field(default_factory=dict)
    truncated: bool = True

    def group(self, n: int) -> ChainGroup:
        if n < self.lo or n > self.hi:
            return ChainGroup.free(0)
        return self.groups[n]

    def differential(self, n: int) -> SparseIntMatrix:
        target, source = self.group(n - 1), self.group(n)
        matrix = self.differentials.get(n)
        if matrix is None:
            return SparseIntMatrix.zeros(target.generators, source.generators)
        if matrix.shape != (target.generators, source.generators):
            raise ComplexCompatibilityError(f"d_{n} has shape {matrix.shape}, expected {(target.generators, source.generators)}")
        return matrix

    def verify(self) -> None:
        """Check that every d_n respects relations and that d_{n-1} d_n = 0 in the presented groups."""
        for n in range(self.lo + 1, self.hi + 1):
            d = self.differential(n)
            image_of_relations = d @ self.group(n).relations
            bad = lattice_contains(self.group(n - 1).relations, image_of_relations)
            if bad is not None:
                raise ComplexCompatibilityError(f"d_{n} does not preserve relations (relation column {bad}).")
            if n - 1 > self.lo:
                square = self.differential(n - 1) @ d
                bad = lattice_contains(self.group(n - 2).relations, square)
                if bad is not None:
                    raise ComplexCompatibilityError(f"d_{n - 1} d_{n} is nonzero on generator {bad}.")


def free_complex(ranks: Mapping[int, int], differentials: Mapping[int, SparseIntMatrix], truncated: bool = True) -> FPComplex:
    lo, hi = min(ranks), max(ranks)
    return FPComplex(lo, hi, {n: ChainGroup.free(k) for n, k in ranks.items()}, dict(differentials), truncated)


def free_homology(d_n: SparseIntMatrix, d_next: SparseIntMatrix, generators: int) -> FPAbelianGroup:
    """Classical ker/im homology of free groups from ranks and invariant factors."""
    rank_out = snf(d_n, transforms=False).rank if d_n.cols and d_n.rows else 0
    incoming = snf(d_next, transforms=False).factors if d_next.cols and d_next.rows else ()
    return FPAbelianGroup(generators - rank_out - len(incoming), tuple(f for f in incoming if f > 1))


def homology_of_fp_complex(complex_: FPComplex, n: int, method: str = "auto") -> FPAbelianGroup:
    """
    H_n = Z_n / B_n in canonical form.

    Z_n is the first-block projection of ker [d_n | -R_{n-1}] and
    B_n = lattice(d_{n+1}) + lattice(R_n). When the groups at n-1 and n are
    free, ``method="auto"`` takes the classical rank/invariant-factor route;
    ``method="lattice"`` forces the general one.
    """
    if n < complex_.lo or n > complex_.hi or (complex_.truncated and n >= complex_.hi):
        raise ComplexWindowError(
            f"Degree {n} is outside the usable window of a complex on [{complex_.lo}, {complex_.hi}]"
            + (" (truncated at the top)" if complex_.truncated else "")
        )
    source, below = complex_.group(n), complex_.group(n - 1)
    d_n, d_next = complex_.differential(n), complex_.differential(n + 1)

    if method == "auto" and source.is_free and below.is_free:
        return free_homology(d_n, d_next, source.generators)

    if below.generators == 0:
        cycles = SparseIntMatrix.identity(source.generators)
    else:
        stacked = hstack([d_n, -below.relations])
        cycles = kernel_lattice(stacked).select_rows(0, source.generators)
    boundaries = hstack([d_next, source.relations], rows=source.generators)
    return quotient_lattice(cycles, boundaries)


def mapping_cone(chain_map: Mapping[int, SparseIntMatrix], source: FPComplex, target: FPComplex) -> FPComplex:
    """
    Cone of f: S -> T with cone_n = T_n + S_{n-1} and
    d(t, s) = (d t + f s, -d s).
    """
    lo = min(target.lo, source.lo + 1)
    truncated = target.truncated or source.truncated
    hi = min(target.hi, source.hi + 1) if truncated else max(target.hi, source.hi + 1)
    groups: Dict[int, ChainGroup] = {}
    for n in range(lo, hi + 1):
        t, s = target.group(n), source.group(n - 1)
        groups[n] = ChainGroup(
            t.generators + s.generators,
            block_diagonal([t.relations, s.relations]),
        )
    differentials: Dict[int, SparseIntMatrix] = {}
    for n in range(lo + 1, hi + 1):
        t_out, s_out = target.group(n - 1).generators, source.group(n - 2).generators
        t_in, s_in = target.group(n).generators, source.group(n - 1).generators
        f = chain_map.get(n - 1, SparseIntMatrix.zeros(t_out, s_in)) if s_in and t_out else SparseIntMatrix.zeros(t_out, s_in)
        differentials[n] = block_matrix(
            [[target.differential(n), f], [None, -source.differential(n - 1)]],
            [t_out, s_out],
            [t_in, s_in],
        )
    return FPComplex(lo, hi, groups, differentials, truncated=truncated)
