import json

import pytest

from src.engine.abgroup import (
    FinAbGroup,
    GroupDomainError,
    RingValidationError,
    SpecParseError,
    bimodule_from_spec,
    group_from_spec,
    matrix_ring_payload,
    normalize_spec,
    ring_from_spec,
)
from src.engine.intlinalg import FPAbelianGroup


def test_group_spec_keeps_factor_order():
    group = group_from_spec("Z/4 x Z/2")
    assert group.factors == (4, 2)
    assert group.order == 8
    assert group.spec() == "Z/4 x Z/2"


def test_group_spec_tolerates_extra_whitespace():
    assert group_from_spec("  Z/2   x  Z/3 ") == FinAbGroup((2, 3))
    assert normalize_spec("  Z/2   x  Z/3 ") == "Z/2 x Z/3"


@pytest.mark.parametrize("spec", ["", "Z", "Z/", "Z/2 + Z/3", "Z/2xZ/3", "Q/2", "Z/-3"])
def test_malformed_group_specs_are_rejected(spec):
    with pytest.raises(SpecParseError):
        group_from_spec(spec)


@pytest.mark.parametrize("spec", ["Z/1", "Z/0", "Z/2 x Z/1"])
def test_degenerate_factors_are_domain_errors(spec):
    with pytest.raises(GroupDomainError):
        group_from_spec(spec)


def test_cyclic_ring_spec():
    ring = ring_from_spec("Z/4")
    assert ring.order == 4
    assert ring.one.coords == (1,)
    assert ring.is_commutative


def test_product_group_is_not_a_ring_spec():
    with pytest.raises(SpecParseError, match="ring table file"):
        ring_from_spec("Z/2 x Z/2")


def test_ring_table_file(m2f2_table):
    ring = ring_from_spec(str(m2f2_table))
    assert ring.order == 16
    assert ring.one.coords == (1, 0, 0, 1)
    assert not ring.is_commutative
    assert ring.spec() == "m2f2"


def test_ring_table_file_without_json_suffix(tmp_path):
    path = tmp_path / "f3.table"
    path.write_text(json.dumps(matrix_ring_payload(1, 3)))
    ring = ring_from_spec(str(path))
    assert ring.order == 3
    assert ring.spec() == "f3"


def test_ring_table_missing_products_are_reported(tmp_path):
    path = tmp_path / "partial.json"
    path.write_text(json.dumps({"group": "Z/2", "one": [1], "mul": [[[1], [1], [1]]]}))
    with pytest.raises(SpecParseError, match="missing the product"):
        ring_from_spec(path)


def test_ring_table_conflicts_are_reported(tmp_path):
    path = tmp_path / "conflict.json"
    triples = [[[a], [b], [a * b]] for a in range(2) for b in range(2)] + [[[1], [1], [0]]]
    path.write_text(json.dumps({"group": "Z/2", "one": [1], "mul": triples}))
    with pytest.raises(SpecParseError, match="Conflicting"):
        ring_from_spec(path)


def test_ring_table_failing_an_axiom_carries_a_witness(tmp_path):
    path = tmp_path / "bad.json"
    # x * y = x + y is not bilinear.
    triples = [[[a], [b], [(a + b) % 3]] for a in range(3) for b in range(3)]
    path.write_text(json.dumps({"group": "Z/3", "one": [0], "mul": triples}))
    with pytest.raises(RingValidationError) as info:
        ring_from_spec(path)
    assert info.value.witness


def test_unreadable_table_file(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    with pytest.raises(SpecParseError, match="Unable to read"):
        ring_from_spec(path)


def test_self_coefficients(f2):
    module = bimodule_from_spec("self", f2)
    assert module.group == f2.additive
    assert module.left_index(1, 1) == 1


@pytest.mark.parametrize(
    "text, free, torsion",
    [
        ("0", 0, ()),
        ("Z", 1, ()),
        ("Z/2", 0, (2,)),
        ("Z+Z/2+Z/4", 1, (2, 4)),
        ("Z/2 + Z/3", 0, (6,)),
        ("Z/4+Z/2+Z", 1, (2, 4)),
    ],
)
def test_fp_group_parse(text, free, torsion):
    group = FPAbelianGroup.parse(text)
    assert group.free_rank == free
    assert group.torsion == torsion


def test_fp_group_format_is_canonical():
    assert FPAbelianGroup().format() == "0"
    assert FPAbelianGroup(2, (2, 6)).format() == "Z+Z+Z/2+Z/6"
    assert FPAbelianGroup.from_orders([6, 4]).format() == "Z/2+Z/12"


def test_fp_group_rejects_broken_divisibility():
    with pytest.raises(ValueError):
        FPAbelianGroup(0, (4, 6))
    with pytest.raises(ValueError):
        FPAbelianGroup.parse("Z/x")
