"""
Hochschild complex of the chain algebra Q_*(R) with coefficients in an R-bimodule M.

Bidegree (p, q) is ``M (x) Q_{q_1}(R) (x) ... (x) Q_{q_p}(R)`` summed over the
compositions q = q_1 + ... + q_p. M is presented by the coordinates of its
cyclic factors, so every tensor basis element contributes one copy of each
factor of M. Faces are generated from ``abop.face_morphisms``; Q-factors act
on M through the augmentation, so only degree-0 factors can merge into the M
slot. The total differential on bidegree (p, q) is ``b + (-1)^p d_int``.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from math import gcd, prod
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from .abgroup import BimoduleTable, FinAbGroup, RingTable
from .abop import ABMorphism, face_morphisms
from .intlinalg import (
    ChainGroup,
    FPAbelianGroup,
    FPComplex,
    SparseIntMatrix,
    block_matrix,
    homology_of_fp_complex,
)
from .qcomplex import DEFAULT_BUDGET, DegreeOutOfRangeError, QBasis, q_complex

logger = logging.getLogger(__name__)

Composition = Tuple[int, ...]


class BarBudgetError(DegreeOutOfRangeError):
    """Raised when a bar term needs a Q-degree beyond the budget."""

    def __init__(self, message: str, p: int, q: int, required: int = 0, budget: int = 0):
        super().__init__(message, required=required, budget=budget)
        self.p = p
        self.q = q


def compositions(q: int, p: int) -> List[Composition]:
    """Ordered ways to write q as a sum of p non-negative parts, lexicographic."""
    if p == 0:
        return [()] if q == 0 else []
    return [c for c in itertools.product(range(q + 1), repeat=p) if sum(c) == q]


def koszul_sign(degrees: Sequence[int], order: Sequence[int]) -> int:
    """Sign of moving graded slots from numeric order into ``order``."""
    exponent = 0
    for a, b in itertools.combinations(order, 2):
        if a > b:
            exponent += degrees[a] * degrees[b]
    return -1 if exponent % 2 else 1


def _generator_indices(group: FinAbGroup) -> List[int]:
    return [g.index for g in group.generators()]


@dataclass(frozen=True)
class BarBlock:
    """Generators of one composition: offset + g * size + (mixed-radix factor index)."""

    composition: Composition
    offset: int
    sizes: Tuple[int, ...]
    module_rank: int

    @property
    def size(self) -> int:
        return prod(self.sizes)

    @property
    def rank(self) -> int:
        return self.module_rank * self.size

    def radix(self, local: Sequence[int]) -> int:
        index = 0
        for l, s in zip(local, self.sizes):
            index = index * s + l
        return index

    def index(self, g: int, local: Sequence[int]) -> int:
        return self.offset + g * self.size + self.radix(local)

    def locals(self) -> Iterator[Tuple[int, ...]]:
        return itertools.product(*(range(s) for s in self.sizes))


@dataclass
class BarTerm:
    """The presented group at bidegree (p, q)."""

    p: int
    q: int
    module_orders: Tuple[int, ...]
    blocks: Tuple[BarBlock, ...]
    _by_composition: Dict[Composition, BarBlock] = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        self._by_composition = {block.composition: block for block in self.blocks}

    @property
    def factor_degrees(self) -> List[Composition]:
        return [block.composition for block in self.blocks]

    @property
    def rank(self) -> int:
        return sum(block.rank for block in self.blocks)

    def block(self, composition: Composition) -> BarBlock:
        return self._by_composition[composition]

    def orders(self) -> List[int]:
        orders: List[int] = []
        for block in self.blocks:
            for d in self.module_orders:
                orders.extend([d] * block.size)
        return orders

    def chain_group(self) -> ChainGroup:
        return ChainGroup(self.rank, SparseIntMatrix.diagonal(self.orders()))

    def group(self) -> FPAbelianGroup:
        return FPAbelianGroup.from_orders(self.orders())

    def generators(self) -> Iterator[Tuple[Composition, int, Tuple[int, ...]]]:
        """(composition, M-generator, local factor indices) in column order."""
        for block in self.blocks:
            for g in range(block.module_rank):
                for local in block.locals():
                    yield block.composition, g, local


@dataclass
class TotalComplex:
    """Total complex on [0, top] with the bidegree layout of every chain group."""

    top: int
    terms: Dict[int, List[BarTerm]]
    complex: FPComplex

    def homology(self, n: int) -> FPAbelianGroup:
        return homology_of_fp_complex(self.complex, n)


class HochschildComplex:
    """
    Builds bar terms, faces, the internal differential and the total complex
    for one (R, M) pair, memoizing everything it builds.
    """

    def __init__(self, ring: RingTable, module: BimoduleTable, budget: Optional[int] = None, normalized: bool = False):
        if module.ring is not ring and module.ring != ring:
            raise ValueError("The bimodule is over a different ring.")
        self.ring = ring
        self.module = module
        self.budget = budget if budget is not None else DEFAULT_BUDGET
        self.normalized = normalized
        self.q = q_complex(ring.additive)
        self._module_generators = _generator_indices(module.group)
        self._terms: Dict[Tuple[int, int], BarTerm] = {}
        self._factor_lists: Dict[int, Tuple[int, ...]] = {}
        self._factor_lookup: Dict[int, Dict[int, int]] = {}

    # Factors

    def _basis(self, d: int, p: int, q: int) -> QBasis:
        try:
            return self.q.basis(d, self.budget)
        except DegreeOutOfRangeError as exc:
            raise BarBudgetError(
                f"Bar term ({p}, {q}) needs Q_{d}({self.ring.additive.spec()}): {exc}",
                p, q, exc.required, exc.budget,
            ) from exc

    def _factors(self, d: int, p: int = 0, q: int = 0) -> Tuple[int, ...]:
        """Basis positions of Q_d used as tensor factors."""
        if d not in self._factor_lists:
            basis = self._basis(d, p, q)
            positions = range(basis.rank)
            if self.normalized and d == 0:
                unit = basis.position((self.ring.one_index,))
                positions = [i for i in positions if i != unit]
            self._factor_lists[d] = tuple(positions)
            self._factor_lookup[d] = {pos: i for i, pos in enumerate(self._factor_lists[d])}
        return self._factor_lists[d]

    # Bar terms

    def bar_term(self, p: int, q: int) -> BarTerm:
        if p < 0 or q < 0:
            raise ValueError("Bidegrees are non-negative.")
        key = (p, q)
        if key not in self._terms:
            for d in range(q + 1 if p else 0):
                self._factors(d, p, q)
            module_rank = len(self._module_generators)
            blocks = []
            offset = 0
            for composition in compositions(q, p):
                sizes = tuple(len(self._factor_lists[d]) for d in composition)
                block = BarBlock(composition, offset, sizes, module_rank)
                blocks.append(block)
                offset += block.rank
            self._terms[key] = BarTerm(p, q, self.module.group.factors, tuple(blocks))
            logger.info("Bar term (%s, %s): %s generators", p, q, self._terms[key].rank)
        return self._terms[key]

    # Faces

    def _act(self, morphism_fiber: Tuple[int, ...], m: int, values: Sequence[Tuple[int, ...]]) -> int:
        """Multiply the M element into the degree-0 factors listed around slot 0."""
        zero = morphism_fiber.index(0)
        module = self.module
        for j in reversed(morphism_fiber[:zero]):
            m = module.left_index(values[j][0], m)
        for j in morphism_fiber[zero + 1:]:
            m = module.right_index(m, values[j][0])
        return m

    def _product(self, fiber: Tuple[int, ...], values: Sequence[Tuple[int, ...]]) -> Tuple[int, ...]:
        table = self.ring.mul_table
        product = values[fiber[0]]
        for j in fiber[1:]:
            product = tuple(table[a][b] for b in values[j] for a in product)
        return product

    def apply_morphism(self, morphism: ABMorphism, p: int, q: int) -> SparseIntMatrix:
        """The map (p, q) -> (p', q) induced by a morphism ({0..p},{0}) -> ({0..p'},{0})."""
        source = self.bar_term(p, q)
        p_out = morphism.target.size - 1
        target = self.bar_term(p_out, q)
        fibers = morphism.fiber_orders
        module_group = self.module.group
        columns: List[Dict[int, int]] = [{} for _ in range(source.rank)]

        for block in source.blocks:
            degrees = (0,) + block.composition
            if any(degrees[j] for j in fibers[0]):
                continue
            out_composition = tuple(sum(degrees[j] for j in fibers[t]) for t in range(1, p_out + 1))
            out_block = target.block(out_composition)
            sign = koszul_sign(degrees, [j for fiber in fibers for j in fiber])
            in_bases = [None] + [self.q.basis(d, self.budget) for d in block.composition]
            in_lists = [None] + [self._factor_lists[d] for d in block.composition]
            out_bases = [None] + [self.q.basis(d, self.budget) for d in out_composition]
            out_lookup = [None] + [self._factor_lookup[d] for d in out_composition]

            for g in range(block.module_rank):
                m0 = self._module_generators[g]
                for local in block.locals():
                    positions = [None] + [in_lists[j][l] for j, l in enumerate(local, start=1)]
                    values = [()] + [in_bases[j].basis[positions[j]] for j in range(1, p + 1)]
                    m = self._act(fibers[0], m0, values)
                    if m == 0:
                        continue
                    out_local = []
                    for t in range(1, p_out + 1):
                        fiber = fibers[t]
                        if len(fiber) == 1:
                            position = positions[fiber[0]]
                        else:
                            position = out_bases[t].index.get(self._product(fiber, values))
                            if position is None:
                                break
                        local_index = out_lookup[t].get(position)
                        if local_index is None:
                            break
                        out_local.append(local_index)
                    else:
                        column = columns[block.index(g, local)]
                        base = out_block.index(0, out_local)
                        for g_out, c in enumerate(module_group.coords_of(m)):
                            if c:
                                row = base + g_out * out_block.size
                                column[row] = column.get(row, 0) + sign * c
        return SparseIntMatrix(target.rank, source.rank, [{r: v for r, v in col.items() if v} for col in columns])

    def face_matrix(self, i: int, p: int, q: int) -> SparseIntMatrix:
        return self.apply_morphism(face_morphisms(p)[i], p, q)

    def bar_differential(self, p: int, q: int) -> SparseIntMatrix:
        """b = sum_i (-1)^i d_i : (p, q) -> (p-1, q)."""
        total = None
        for i in range(p + 1):
            face = self.face_matrix(i, p, q)
            total = face if i == 0 else (total - face if i % 2 else total + face)
        assert total is not None
        return total

    # Internal differential

    def internal_matrix(self, p: int, q: int) -> SparseIntMatrix:
        """d_int : (p, q) -> (p, q-1), with sign (-1)^(q_1 + ... + q_{j-1}) on the j-th factor."""
        source = self.bar_term(p, q)
        target = self.bar_term(p, q - 1)
        columns: List[Dict[int, int]] = [{} for _ in range(source.rank)]
        delta_columns: Dict[int, List[Dict[int, int]]] = {}
        for block in source.blocks:
            composition = block.composition
            for j, d in enumerate(composition):
                if d == 0:
                    continue
                if d not in delta_columns:
                    delta_columns[d] = list(self.q.delta(d, self.budget).iter_columns())
                sign = -1 if sum(composition[:j]) % 2 else 1
                out_block = target.block(composition[:j] + (d - 1,) + composition[j + 1:])
                in_list, out_lookup = self._factor_lists[d], self._factor_lookup[d - 1]
                for g in range(block.module_rank):
                    for local in block.locals():
                        column = columns[block.index(g, local)]
                        out_local = list(local)
                        for r, c in delta_columns[d][in_list[local[j]]].items():
                            local_index = out_lookup.get(r)
                            if local_index is None:
                                continue
                            out_local[j] = local_index
                            row = out_block.index(g, out_local)
                            column[row] = column.get(row, 0) + sign * c
        return SparseIntMatrix(target.rank, source.rank, [{r: v for r, v in col.items() if v} for col in columns])

    # Totalization

    def total_complex(self, max_degree: int) -> TotalComplex:
        """Total complex on degrees 0..max_degree+1, truncated at the top."""
        top = max_degree + 1
        terms = {n: [self.bar_term(p, n - p) for p in range(n + 1)] for n in range(top + 1)}
        groups = {}
        for n in range(top + 1):
            orders = [d for term in terms[n] for d in term.orders()]
            groups[n] = ChainGroup(len(orders), SparseIntMatrix.diagonal(orders))
        differentials = {}
        for n in range(1, top + 1):
            blocks: List[List[Optional[SparseIntMatrix]]] = [[None] * (n + 1) for _ in range(n)]
            for p in range(n + 1):
                q = n - p
                if p >= 1:
                    blocks[p - 1][p] = self.bar_differential(p, q)
                    if q >= 1:
                        internal = self.internal_matrix(p, q)
                        blocks[p][p] = internal if p % 2 == 0 else -internal
            differentials[n] = block_matrix(
                blocks,
                [term.rank for term in terms[n - 1]],
                [term.rank for term in terms[n]],
            )
            logger.info("D_%s: %sx%s, nnz=%s", n, differentials[n].rows, differentials[n].cols, differentials[n].nnz)
        complex_ = FPComplex(0, top, groups, differentials, truncated=True)
        complex_.verify()
        return TotalComplex(top, terms, complex_)

    def homology(self, k: int) -> FPAbelianGroup:
        result = self.total_complex(k).homology(k)
        logger.info("HML_%s(%s, %s) = %s", k, self.ring.spec(), self.module.spec(), result)
        return result


# ---------------------------------------------------------------------- #
# Module-level operations


def bar_term(ring: RingTable, module: BimoduleTable, p: int, q: int, budget: Optional[int] = None) -> BarTerm:
    return HochschildComplex(ring, module, budget).bar_term(p, q)


def face_matrix(
    ring: RingTable,
    module: BimoduleTable,
    i: int,
    p: int,
    q: int,
    budget: Optional[int] = None,
) -> SparseIntMatrix:
    return HochschildComplex(ring, module, budget).face_matrix(i, p, q)


def total_complex(
    ring: RingTable,
    module: BimoduleTable,
    max_degree: int,
    budget: Optional[int] = None,
    normalized: bool = False,
) -> TotalComplex:
    return HochschildComplex(ring, module, budget, normalized).total_complex(max_degree)


def hml(
    ring: RingTable,
    module: BimoduleTable,
    k: int,
    budget: Optional[int] = None,
    normalized: bool = False,
) -> FPAbelianGroup:
    return HochschildComplex(ring, module, budget, normalized).homology(k)


def hml_series(
    ring: RingTable,
    module: BimoduleTable,
    max_degree: int,
    budget: Optional[int] = None,
    normalized: bool = False,
) -> List[FPAbelianGroup]:
    """HML_0 .. HML_max_degree from one total complex."""
    total = HochschildComplex(ring, module, budget, normalized).total_complex(max_degree)
    return [total.homology(k) for k in range(max_degree + 1)]


# ---------------------------------------------------------------------- #
# Underived Hochschild homology of the discrete ring


class ClassicalHochschild:
    """
    The cyclic bar construction [p] -> M (x) R^(x)p with tensor products over Z.

    A generator is a tuple of factor indices (one per tensor slot); its order
    is the gcd of the factor orders, and order-1 generators are left out.
    """

    def __init__(self, ring: RingTable, module: BimoduleTable):
        self.ring = ring
        self.module = module
        self._ring_generators = _generator_indices(ring.additive)
        self._module_generators = _generator_indices(module.group)
        self._levels: Dict[int, Tuple[List[Tuple[int, ...]], Dict[Tuple[int, ...], int], List[int]]] = {}

    def level(self, p: int) -> Tuple[List[Tuple[int, ...]], Dict[Tuple[int, ...], int], List[int]]:
        if p not in self._levels:
            ring_factors, module_factors = self.ring.additive.factors, self.module.group.factors
            generators, orders = [], []
            for tup in itertools.product(range(len(module_factors)), *([range(len(ring_factors))] * p)):
                order = gcd(module_factors[tup[0]], *(ring_factors[g] for g in tup[1:]))
                if order > 1:
                    generators.append(tup)
                    orders.append(order)
            self._levels[p] = (generators, {g: i for i, g in enumerate(generators)}, orders)
        return self._levels[p]

    def face_matrix(self, i: int, p: int) -> SparseIntMatrix:
        morphism = face_morphisms(p)[i]
        fibers = morphism.fiber_orders
        source, _, _ = self.level(p)
        _, target_index, target_orders = self.level(p - 1)
        module, table = self.module, self.ring.mul_table
        ring_coords, module_coords = self.ring.additive.coords_of, self.module.group.coords_of
        columns = []
        for tup in source:
            values = [self._module_generators[tup[0]]] + [self._ring_generators[g] for g in tup[1:]]
            zero = fibers[0].index(0)
            m = values[0]
            for j in reversed(fibers[0][:zero]):
                m = module.left_index(values[j], m)
            for j in fibers[0][zero + 1:]:
                m = module.right_index(m, values[j])
            products = []
            for fiber in fibers[1:]:
                r = values[fiber[0]]
                for j in fiber[1:]:
                    r = table[r][values[j]]
                products.append(r)
            expansions = [list(enumerate(module_coords(m)))] + [list(enumerate(ring_coords(r))) for r in products]
            column: Dict[int, int] = {}
            for combo in itertools.product(*expansions):
                coefficient = prod(c for _, c in combo)
                if not coefficient:
                    continue
                row = target_index.get(tuple(g for g, _ in combo))
                if row is not None:
                    column[row] = (column.get(row, 0) + coefficient) % target_orders[row]
            columns.append({r: v for r, v in column.items() if v})
        return SparseIntMatrix(len(target_index), len(source), columns)

    def complex(self, max_degree: int) -> FPComplex:
        top = max_degree + 1
        groups = {}
        for p in range(top + 1):
            generators, _, orders = self.level(p)
            groups[p] = ChainGroup(len(generators), SparseIntMatrix.diagonal(orders))
        differentials = {}
        for p in range(1, top + 1):
            total = None
            for i in range(p + 1):
                face = self.face_matrix(i, p)
                total = face if i == 0 else (total - face if i % 2 else total + face)
            differentials[p] = total
        return FPComplex(0, top, groups, differentials, truncated=True)


def classical_hh(ring: RingTable, module: BimoduleTable, k: int) -> FPAbelianGroup:
    result = homology_of_fp_complex(ClassicalHochschild(ring, module).complex(k), k)
    logger.info("HH_%s(%s, %s) = %s", k, ring.spec(), module.spec(), result)
    return result


def classical_hh_series(ring: RingTable, module: BimoduleTable, max_degree: int) -> List[FPAbelianGroup]:
    complex_ = ClassicalHochschild(ring, module).complex(max_degree)
    return [homology_of_fp_complex(complex_, k) for k in range(max_degree + 1)]
