"""
Invariant suite behind the ``selftest`` command.

Every check returns ``None`` on success or a short description of the first
counterexample. The test suite reuses these functions with larger parameters.
"""

from __future__ import annotations

import itertools
import logging
import random
import time
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence

import numpy as np

from src.engine.abgroup import FinAbGroup, RingTable, cyclic_ring, self_bimodule
from src.engine.abop import (
    DeltaOpMorphism,
    chi,
    compose_ab,
    compose_delta,
    face_morphisms,
)
from src.engine.hochschild import HochschildComplex, hml_series
from src.engine.intlinalg import (
    FPAbelianGroup,
    SparseIntMatrix,
    kron,
    lattice_contains,
    snf,
)
from src.engine.qcomplex import (
    augmentation_matrix,
    delta_matrix,
    dixmier_matrix,
    dixmier_values,
    is_degenerate,
    q_basis,
    q_homology,
    q_prime_delta,
)

logger = logging.getLogger(__name__)

Check = Callable[[], Optional[str]]

# Every finite abelian group of order at most 8, plus reordered presentations.
SMALL_GROUP_FACTORS = (
    (2,), (3,), (4,), (5,), (6,), (7,), (8,),
    (2, 2), (2, 3), (2, 4), (4, 2), (2, 2, 2),
)


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""
    elapsed_ms: float = 0.0


# ---------------------------------------------------------------------- #
# Q-construction


def delta_squared_defect(group: FinAbGroup, max_n: int) -> Optional[str]:
    for n in range(2, max_n + 1):
        product = delta_matrix(group, n - 1) @ delta_matrix(group, n)
        if not product.is_zero():
            return f"delta_{n - 1} delta_{n} != 0 on Q({group.spec()})"
    return None


def n_stability_defect(group: FinAbGroup, max_n: int) -> Optional[str]:
    """delta' of a degenerate monomial has no surviving non-degenerate term."""
    for n in range(1, max_n + 1):
        for values in itertools.product(range(group.order), repeat=1 << n):
            if not is_degenerate(values):
                continue
            for image, coefficient in q_prime_delta(group, values).items():
                if not is_degenerate(image):
                    return f"delta'{values} has non-degenerate term {image} with coefficient {coefficient}"
    return None


def _identity(group: FinAbGroup, n: int) -> SparseIntMatrix:
    return SparseIntMatrix.identity(q_basis(group, n).rank)


def leibniz_defect(ring: RingTable, max_total: int) -> Optional[str]:
    """delta(x.y) = delta(x).y + (-1)^|x| x.delta(y) on all basis pairs."""
    group = ring.additive
    for total in range(1, max_total + 1):
        for n in range(total + 1):
            m = total - n
            lhs = delta_matrix(group, total) @ dixmier_matrix(group, group, n, m, ring)
            rhs = SparseIntMatrix.zeros(lhs.rows, lhs.cols)
            if n >= 1:
                rhs = rhs + dixmier_matrix(group, group, n - 1, m, ring) @ kron(delta_matrix(group, n), _identity(group, m))
            if m >= 1:
                term = dixmier_matrix(group, group, n, m - 1, ring) @ kron(_identity(group, n), delta_matrix(group, m))
                rhs = rhs + term.scale(-1 if n % 2 else 1)
            if lhs != rhs:
                return f"Leibniz rule fails for degrees ({n}, {m}) over {ring.spec()}"
    return None


def associativity_defect(ring: RingTable, max_total: int) -> Optional[str]:
    group = ring.additive
    for n, m, l in itertools.product(range(max_total + 1), repeat=3):
        if n + m + l > max_total:
            continue
        lhs = dixmier_matrix(group, group, n + m, l, ring) @ kron(dixmier_matrix(group, group, n, m, ring), _identity(group, l))
        rhs = dixmier_matrix(group, group, n, m + l, ring) @ kron(_identity(group, n), dixmier_matrix(group, group, m, l, ring))
        if lhs != rhs:
            return f"Dixmier product is not associative in degrees ({n}, {m}, {l}) over {ring.spec()}"
    return None


def augmentation_defect(ring: RingTable) -> Optional[str]:
    """epsilon is multiplicative in degree 0 and kills boundaries."""
    group = ring.additive
    basis = q_basis(group, 0)
    for x, y in itertools.product(basis.basis, repeat=2):
        product = dixmier_values(x, y, ring.mul_index)
        if product[0] != ring.mul_index(x[0], y[0]):
            return f"epsilon([{x[0]}].[{y[0]}]) differs from the ring product"
    relations = SparseIntMatrix.diagonal(group.factors)
    if lattice_contains(relations, augmentation_matrix(group) @ delta_matrix(group, 1)) is not None:
        return f"epsilon o delta_1 != 0 on Q({group.spec()})"
    return None


def h0_defect(group: FinAbGroup) -> Optional[str]:
    expected = FPAbelianGroup.from_orders(group.factors)
    found = q_homology(group, 0)
    if found != expected:
        return f"H_0(Q({group.spec()})) = {found}, expected {expected}"
    return None


# ---------------------------------------------------------------------- #
# Faces and chi


def simplicial_identity_defect(max_p: int) -> Optional[str]:
    for p in range(2, max_p + 1):
        upper, lower = face_morphisms(p), face_morphisms(p - 1)
        for j in range(p + 1):
            for i in range(j):
                if compose_ab(lower[i], upper[j]) != compose_ab(lower[j - 1], upper[i]):
                    return f"d_{i} d_{j} != d_{j - 1} d_{i} at level {p}"
    return None


def random_delta_op(n: int, m: int, rng: random.Random) -> DeltaOpMorphism:
    interior = sorted(rng.randint(0, m + 1) for _ in range(n))
    return DeltaOpMorphism(n, m, (0, *interior, m + 1))


def chi_functoriality_defect(samples: int, max_level: int = 4, seed: int = 0) -> Optional[str]:
    rng = random.Random(seed)
    for _ in range(samples):
        n, m, l = (rng.randint(0, max_level) for _ in range(3))
        f, g = random_delta_op(n, m, rng), random_delta_op(m, l, rng)
        if chi(compose_delta(g, f)) != compose_ab(chi(g), chi(f)):
            return f"chi(g o f) != chi(g) o chi(f) for f={f.mapping}, g={g.mapping}"
    return None


# ---------------------------------------------------------------------- #
# Linear algebra


def naive_invariant_factors(data: Sequence[Sequence[int]]) -> List[int]:
    """Dense Euclidean reduction, independent of the sparse eliminator."""
    a = np.array(data, dtype=object)
    if a.size == 0:
        return []
    rows, cols = a.shape
    factors: List[int] = []
    for t in range(min(rows, cols)):
        while True:
            block = [(abs(a[i, j]), i, j) for i in range(t, rows) for j in range(t, cols) if a[i, j] != 0]
            if not block:
                return factors
            _, i, j = min(block)
            a[[t, i], :] = a[[i, t], :]
            a[:, [t, j]] = a[:, [j, t]]
            pivot = a[t, t]
            for i in range(t + 1, rows):
                a[i, :] = a[i, :] - (a[i, t] // pivot) * a[t, :]
            for j in range(t + 1, cols):
                a[:, j] = a[:, j] - (a[t, j] // pivot) * a[:, t]
            if any(a[i, t] for i in range(t + 1, rows)) or any(a[t, j] for j in range(t + 1, cols)):
                continue
            stray = [i for i in range(t + 1, rows) for j in range(t + 1, cols) if a[i, j] % pivot]
            if stray:
                a[t, :] = a[t, :] + a[stray[0], :]
                continue
            factors.append(abs(pivot))
            break
    return factors


def random_int_matrix(rng: random.Random, max_dim: int = 6, bound: int = 9) -> List[List[int]]:
    rows, cols = rng.randint(1, max_dim), rng.randint(1, max_dim)
    return [[rng.randint(-bound, bound) for _ in range(cols)] for _ in range(rows)]


def snf_oracle_defect(samples: int, seed: int = 0) -> Optional[str]:
    rng = random.Random(seed)
    for _ in range(samples):
        data = random_int_matrix(rng)
        result = snf(SparseIntMatrix.from_dense(data))
        expected = naive_invariant_factors(data)
        if list(result.factors) != expected:
            return f"SNF of {data} gave {result.factors}, expected {expected}"
        assert result.U is not None and result.V is not None
        if result.U @ SparseIntMatrix.from_dense(data) @ result.V != result.diagonal_matrix():
            return f"U A V != D for {data}"
    return None


# ---------------------------------------------------------------------- #
# Hochschild


def total_complex_defect(ring: RingTable, max_degree: int) -> Optional[str]:
    """Building the total complex checks D^2 = 0 against the relations."""
    try:
        HochschildComplex(ring, self_bimodule(ring)).total_complex(max_degree)
    except RuntimeError as exc:
        return f"{ring.spec()}: {exc}"
    return None


def hml_values_defect(ring: RingTable, expected: Sequence[str]) -> Optional[str]:
    found = [g.format() for g in hml_series(ring, self_bimodule(ring), len(expected) - 1)]
    if found != list(expected):
        return f"HML({ring.spec()}, {ring.spec()}) = {found}, expected {list(expected)}"
    return None


# ---------------------------------------------------------------------- #
# Suite


def selftest_checks(quick: bool = False) -> List[tuple]:
    f2, f3, z4 = cyclic_ring(2), cyclic_ring(3), cyclic_ring(4)
    v4 = FinAbGroup((2, 2))
    checks = [
        ("delta^2 = 0 on Q(Z/2)", lambda: delta_squared_defect(f2.additive, 3 if quick else 4)),
        ("delta^2 = 0 on Q(Z/3)", lambda: delta_squared_defect(f3.additive, 3)),
        ("delta^2 = 0 on Q(Z/4)", lambda: delta_squared_defect(z4.additive, 2 if quick else 3)),
        ("delta^2 = 0 on Q(Z/2 x Z/2)", lambda: delta_squared_defect(v4, 2 if quick else 3)),
        ("N-stability of delta'", lambda: n_stability_defect(f2.additive, 3) or n_stability_defect(f3.additive, 2 if quick else 3)),
        ("Dixmier Leibniz rule", lambda: leibniz_defect(f2, 3) or leibniz_defect(f3, 2 if quick else 3)),
        ("Dixmier associativity", lambda: associativity_defect(f2, 2 if quick else 3) or associativity_defect(f3, 2)),
        ("augmentation", lambda: augmentation_defect(f2) or augmentation_defect(z4)),
        ("H_0(Q(A)) = A", lambda: next((d for d in map(h0_defect, map(FinAbGroup, SMALL_GROUP_FACTORS)) if d), None)),
        ("simplicial identities", lambda: simplicial_identity_defect(5)),
        ("chi functoriality", lambda: chi_functoriality_defect(100 if quick else 500)),
        ("SNF oracle", lambda: snf_oracle_defect(100 if quick else 500)),
        (
            "D^2 = 0 on the total complex",
            lambda: total_complex_defect(f2, 2 if quick else 3)
            or total_complex_defect(f3, 1 if quick else 2)
            or total_complex_defect(z4, 1 if quick else 2),
        ),
        ("HML(F_2, F_2)", lambda: hml_values_defect(f2, ["Z/2", "0", "Z/2"])),
    ]
    return checks


def run_selftest(quick: bool = False) -> List[CheckResult]:
    results = []
    for name, check in selftest_checks(quick):
        started = time.perf_counter()
        try:
            detail = check()
        except Exception as exc:  # a crash is a failed check, not a failed run
            detail = f"{type(exc).__name__}: {exc}"
        elapsed = (time.perf_counter() - started) * 1000
        results.append(CheckResult(name, detail is None, detail or "", elapsed))
        logger.info("%s: %s (%.0f ms)", name, "ok" if detail is None else detail, elapsed)
    return results
