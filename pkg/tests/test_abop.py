import random

import pytest

from src.cli.selftest import chi_functoriality_defect, simplicial_identity_defect
from src.engine.abop import (
    ABMorphism,
    ABMorphismError,
    ABObject,
    DeltaOpMorphism,
    ab_morphism,
    chi,
    compose_ab,
    compose_delta,
    delta_op_face,
    face_morphisms,
    identity_ab,
    identity_delta,
    pointed,
)


def test_marked_points_must_lie_in_the_set():
    with pytest.raises(ABMorphismError):
        ABObject(2, frozenset({2}))


def test_fibers_must_list_the_preimages():
    with pytest.raises(ABMorphismError, match="Fiber order"):
        ABMorphism(pointed(2), pointed(1), (0, 0), ((0,),))


def test_marked_points_must_correspond():
    source = ABObject(2, frozenset({0, 1}))
    with pytest.raises(ABMorphismError, match="bijection"):
        ab_morphism(source, pointed(1), (0, 0))


def test_unlisted_fibers_default_to_numeric_order():
    f = ab_morphism(pointed(3), pointed(2), (0, 1, 1), [(0,)])
    assert f.fiber(1) == (1, 2)


def test_composition_concatenates_fibers():
    f = ab_morphism(pointed(3), pointed(2), (0, 1, 1), [(0,), (2, 1)])
    g = ab_morphism(pointed(2), pointed(1), (0, 0), [(1, 0)])
    h = compose_ab(g, f)
    assert h.mapping == (0, 0, 0)
    assert h.fiber(0) == (2, 1, 0)


def test_composition_checks_endpoints():
    f = identity_ab(pointed(2))
    with pytest.raises(ABMorphismError):
        compose_ab(identity_ab(pointed(3)), f)


def test_identities_are_neutral():
    f = ab_morphism(pointed(3), pointed(2), (0, 1, 1), [(0,), (2, 1)])
    assert compose_ab(identity_ab(pointed(2)), f) == f
    assert compose_ab(f, identity_ab(pointed(3))) == f


def test_delta_op_morphisms_preserve_endpoints():
    with pytest.raises(ABMorphismError, match="endpoints"):
        DeltaOpMorphism(1, 1, (0, 1, 1))
    with pytest.raises(ABMorphismError, match="monotone"):
        DeltaOpMorphism(2, 2, (0, 2, 1, 3))
    with pytest.raises(ABMorphismError):
        compose_delta(identity_delta(1), identity_delta(2))


def test_delta_op_faces():
    assert delta_op_face(2, 0).mapping == (0, 0, 1, 2)
    assert delta_op_face(2, 2).mapping == (0, 1, 2, 2)
    with pytest.raises(ABMorphismError):
        delta_op_face(2, 3)


def test_chi_of_the_identity():
    assert chi(identity_delta(2)) == identity_ab(pointed(3))


def test_chi_wraps_the_top_endpoint_before_zero():
    # [1] -> [0] sending 1 to the top endpoint.
    f = chi(DeltaOpMorphism(1, 0, (0, 1, 1)))
    assert f.mapping == (0, 0)
    assert f.fiber(0) == (1, 0)


@pytest.mark.parametrize(
    "p, expected",
    [
        (1, [((0, 1),), ((1, 0),)]),
        (2, [((0, 1), (2,)), ((0,), (1, 2)), ((2, 0), (1,))]),
    ],
)
def test_bar_faces(p, expected):
    assert [face.fiber_orders for face in face_morphisms(p)] == expected


def test_no_faces_at_level_zero():
    with pytest.raises(ABMorphismError):
        face_morphisms(0)


def test_face_str():
    assert str(face_morphisms(1)[1]) == "{0:1<0}"


def test_simplicial_identities():
    assert simplicial_identity_defect(6) is None


def test_chi_is_a_functor():
    assert chi_functoriality_defect(500, seed=3) is None


def random_pointed_morphism(source_size, target_size, rng):
    mapping = [0] + [rng.randrange(target_size) for _ in range(source_size - 1)]
    fibers = []
    for t in range(target_size):
        fiber = [s for s, image in enumerate(mapping) if image == t]
        rng.shuffle(fiber)
        fibers.append(fiber)
    return ab_morphism(pointed(source_size), pointed(target_size), mapping, fibers)


def test_composition_is_associative_including_fiber_orders():
    rng = random.Random(4)
    for _ in range(300):
        a, b, c, d = (rng.randint(1, 6) for _ in range(4))
        f = random_pointed_morphism(a, b, rng)
        g = random_pointed_morphism(b, c, rng)
        h = random_pointed_morphism(c, d, rng)
        assert compose_ab(h, compose_ab(g, f)) == compose_ab(compose_ab(h, g), f)


def test_random_morphisms_permute_fibers():
    rng = random.Random(4)
    fibers = [random_pointed_morphism(6, 1, rng).fiber(0) for _ in range(20)]
    assert len(set(fibers)) > 1
    assert all(sorted(fiber) == list(range(6)) for fiber in fibers)
