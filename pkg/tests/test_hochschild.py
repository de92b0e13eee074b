import pytest

from src.cli.selftest import hml_values_defect, total_complex_defect
from src.engine.abgroup import cyclic_ring, ring_from_spec, self_bimodule
from src.engine.abop import ab_morphism, pointed
from src.engine.hochschild import (
    BarBudgetError,
    ClassicalHochschild,
    HochschildComplex,
    bar_term,
    classical_hh,
    classical_hh_series,
    compositions,
    face_matrix,
    hml,
    hml_series,
    koszul_sign,
    total_complex,
)
from src.engine.intlinalg import ComplexCompatibilityError, FPAbelianGroup, SparseIntMatrix, lattice_contains
from src.engine.qcomplex import DegreeOutOfRangeError, dixmier_values, is_degenerate, q_basis


def groups(values):
    return [g.format() for g in values]


def test_compositions_are_lexicographic():
    assert compositions(2, 2) == [(0, 2), (1, 1), (2, 0)]
    assert compositions(0, 0) == [()]
    assert compositions(1, 0) == []


def test_koszul_sign():
    assert koszul_sign((1, 1), (1, 0)) == -1
    assert koszul_sign((1, 2), (1, 0)) == 1
    assert koszul_sign((0, 1, 1), (0, 1, 2)) == 1


def test_bar_term_layout_over_f2(f2, f2_self):
    term = bar_term(f2, f2_self, 2, 2)
    assert term.factor_degrees == [(0, 2), (1, 1), (2, 0)]
    assert term.rank == 15
    assert term.block((1, 1)).offset == 7
    assert term.group() == FPAbelianGroup(0, (2,) * 15)


def test_bar_term_in_degree_zero(z4):
    term = bar_term(z4, self_bimodule(z4), 0, 0)
    assert term.rank == 1
    assert term.group() == FPAbelianGroup(0, (4,))
    assert bar_term(z4, self_bimodule(z4), 0, 2).rank == 0


def test_lowest_faces_over_f2(f2, f2_self):
    one = SparseIntMatrix.from_dense([[1]])
    assert face_matrix(f2, f2_self, 0, 1, 0) == one
    assert face_matrix(f2, f2_self, 1, 1, 0) == one
    assert HochschildComplex(f2, f2_self).bar_differential(1, 0).is_zero()


def test_inner_face_multiplies_degree_zero_factors(z4):
    d1 = face_matrix(z4, self_bimodule(z4), 1, 2, 0)
    assert d1.shape == (3, 9)
    # m (x) [1] (x) [3] -> m (x) [3]
    assert d1.column(2) == {2: 1}
    # m (x) [2] (x) [2] -> m (x) [0], which is degenerate
    assert d1.column(4) == {}


def test_outer_faces_act_on_the_module(z4):
    module = self_bimodule(z4)
    d0 = face_matrix(z4, module, 0, 1, 0)
    d1 = face_matrix(z4, module, 1, 1, 0)
    # 1 (x) [3] goes to 3 on both sides over a commutative ring.
    assert d0.column(2) == {0: 3}
    assert d1.column(2) == {0: 3}


def test_face_of_a_degree_one_factor_into_the_module_vanishes(f2, f2_self):
    # d_0 on (1, 1) would push a Q_1 factor into M.
    assert face_matrix(f2, f2_self, 0, 1, 1).is_zero()


def test_faces_over_a_noncommutative_ring(m2f2_table):
    ring = ring_from_spec(m2f2_table)
    engine = HochschildComplex(ring, self_bimodule(ring))
    d0, d1 = engine.face_matrix(0, 1, 0), engine.face_matrix(1, 1, 0)
    assert d0.shape == d1.shape == (4, 60)
    assert d0 != d1


def test_apply_morphism_matches_the_named_face(f3):
    module = self_bimodule(f3)
    engine = HochschildComplex(f3, module)
    # ({0, 1}, {0}) -> ({0}, {0}) with fiber 1 < 0 is d_1.
    morphism = ab_morphism(pointed(2), pointed(1), (0, 0), [(1, 0)])
    assert engine.apply_morphism(morphism, 1, 0) == engine.face_matrix(1, 1, 0)


def test_internal_differential_uses_delta(f2, f2_self):
    engine = HochschildComplex(f2, f2_self)
    internal = engine.internal_matrix(1, 1)
    assert internal == SparseIntMatrix.from_dense([[2]])


def test_bar_and_internal_differentials_commute(f2, f2_self, f3):
    for ring, module in ((f2, f2_self), (f3, self_bimodule(f3))):
        engine = HochschildComplex(ring, module)
        for p, q in ((2, 1), (1, 2), (2, 2)):
            lhs = engine.bar_differential(p, q - 1) @ engine.internal_matrix(p, q)
            rhs = engine.internal_matrix(p - 1, q) @ engine.bar_differential(p, q)
            relations = engine.bar_term(p - 1, q - 1).chain_group().relations
            assert lattice_contains(relations, lhs - rhs) is None


def test_bar_differential_squares_to_zero(f3):
    engine = HochschildComplex(f3, self_bimodule(f3))
    for q in range(3):
        square = engine.bar_differential(2, q) @ engine.bar_differential(3, q)
        relations = engine.bar_term(1, q).chain_group().relations
        assert lattice_contains(relations, square) is None


def test_total_complex_is_a_complex(f2, f3, z4):
    assert total_complex_defect(f2, 2) is None
    assert total_complex_defect(f3, 1) is None
    assert total_complex_defect(z4, 1) is None
    assert total_complex_defect(z4, 2) is None


def _d0_only_in_lowest_degree(monkeypatch):
    """Replace b = d_0 - d_1 on (1, 0) by d_0 alone, which breaks D^2 = 0."""
    original = HochschildComplex.bar_differential

    def patched(self, p, q):
        if (p, q) == (1, 0):
            return self.face_matrix(0, 1, 0)
        return original(self, p, q)

    monkeypatch.setattr(HochschildComplex, "bar_differential", patched)


def test_total_complex_rejects_a_nonzero_square(f3, monkeypatch):
    _d0_only_in_lowest_degree(monkeypatch)
    with pytest.raises(ComplexCompatibilityError, match="d_1 d_2"):
        HochschildComplex(f3, self_bimodule(f3)).total_complex(1)


def test_total_complex_layout(f2, f2_self):
    total = total_complex(f2, f2_self, 1)
    assert total.top == 2
    assert [term.p for term in total.terms[2]] == [0, 1, 2]
    assert total.complex.truncated


def test_hml_zero_is_the_ring(f3, z4):
    assert hml(f3, self_bimodule(f3), 0) == FPAbelianGroup(0, (3,))
    assert hml(z4, self_bimodule(z4), 0) == FPAbelianGroup(0, (4,))


def test_hml_over_f2(f2, f2_self):
    assert groups(hml_series(f2, f2_self, 2)) == ["Z/2", "0", "Z/2"]


def test_hml_over_f3(f3):
    assert groups(hml_series(f3, self_bimodule(f3), 2)) == ["Z/3", "0", "Z/3"]


@pytest.mark.slow
def test_hml_over_f2_in_degree_three(f2, f2_self):
    assert hml_values_defect(f2, ["Z/2", "0", "Z/2", "0"]) is None


def test_normalized_complex_gives_the_same_homology(f2, f2_self, f3):
    assert groups(hml_series(f2, f2_self, 2, normalized=True)) == ["Z/2", "0", "Z/2"]
    module = self_bimodule(f3)
    assert hml_series(f3, module, 1, normalized=True) == hml_series(f3, module, 1)


def test_normalized_terms_drop_the_unit(f2, f2_self):
    engine = HochschildComplex(f2, f2_self, normalized=True)
    assert engine.bar_term(1, 0).rank == 0
    assert engine.bar_term(2, 2).rank == 1


def test_budget_is_reported_with_the_bidegree(f2, f2_self):
    engine = HochschildComplex(f2, f2_self, budget=10)
    with pytest.raises(BarBudgetError) as info:
        engine.bar_term(1, 2)
    assert (info.value.p, info.value.q) == (1, 2)
    assert info.value.required == 16
    assert isinstance(info.value, DegreeOutOfRangeError)


def test_module_over_another_ring_is_rejected(f2, f3):
    with pytest.raises(ValueError):
        HochschildComplex(f2, self_bimodule(f3))


# Underived Hochschild homology


def test_classical_hh_over_f2(f2, f2_self):
    assert groups(classical_hh_series(f2, f2_self, 2)) == ["Z/2", "0", "0"]


def test_classical_hh_over_z4(z4):
    module = self_bimodule(z4)
    assert classical_hh(z4, module, 0) == FPAbelianGroup(0, (4,))
    assert classical_hh(z4, module, 1) == FPAbelianGroup()


def test_classical_levels_skip_trivial_generators():
    ring = cyclic_ring(2)
    engine = ClassicalHochschild(ring, self_bimodule(cyclic_ring(2)))
    generators, _, orders = engine.level(3)
    assert generators == [(0, 0, 0, 0)]
    assert orders == [2]


@pytest.mark.slow
def test_matrix_ring_matches_its_base_field_in_low_degrees(m2f2_table):
    ring = ring_from_spec(m2f2_table)
    assert groups(hml_series(ring, self_bimodule(ring), 1)) == ["Z/2", "0"]


def _hand_coded_face(engine, i, p, q):
    """Adjacent Dixmier multiplication inside, module actions at the two ends."""
    ring = engine.ring
    source, target = engine.bar_term(p, q), engine.bar_term(p - 1, q)
    columns = []
    for composition, _, local in source.generators():
        factors = [q_basis(ring.additive, d).basis[l] for d, l in zip(composition, local)]
        m = 1
        if i == 0:
            if composition[0]:
                columns.append({})
                continue
            m = ring.mul_index(m, factors[0][0])
            rest = factors[1:]
        elif i == p:
            if composition[-1]:
                columns.append({})
                continue
            m = ring.mul_index(factors[-1][0], m)
            rest = factors[:-1]
        else:
            merged = dixmier_values(factors[i - 1], factors[i], ring.mul_index)
            rest = factors[: i - 1] + [merged] + factors[i + 1:]
        if m == 0 or any(is_degenerate(v) for v in rest):
            columns.append({})
            continue
        degrees = tuple(len(v).bit_length() - 1 for v in rest)
        positions = [q_basis(ring.additive, d).position(v) for d, v in zip(degrees, rest)]
        columns.append({target.block(degrees).index(0, positions): 1})
    return SparseIntMatrix(target.rank, source.rank, columns)


@pytest.mark.parametrize("p", [1, 2, 3])
@pytest.mark.parametrize("q", [0, 1, 2])
def test_faces_match_the_hand_coded_hochschild_faces(f2, f2_self, p, q):
    engine = HochschildComplex(f2, f2_self)
    for i in range(p + 1):
        assert engine.face_matrix(i, p, q) == _hand_coded_face(engine, i, p, q)
