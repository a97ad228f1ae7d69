"""
Tests for voltage-group elements, permutation groups and cosets.
"""
import numpy as np
import pytest

from src.models.config import ForgeSettings
from src.models.group import GroupElement, product
from src.services.exceptions import InfeasibleError, StructureError
from src.services.permtools import (
    Coset,
    PermGroup,
    coset_intersection,
    from_sympy,
    intersection_elements,
    monodromy_group,
    to_sympy,
)


def _element(images, s_bit=0):
    return GroupElement(np.array(images), s_bit)


def test_product_applies_left_factor_first():
    """(g * h) sends a point through g, then through h."""
    g = _element([1, 2, 0, 3])
    h = _element([0, 1, 3, 2])
    gh = g * h
    for point in range(4):
        assert gh.act(point) == h.act(g.act(point))
    assert product([g, h], 4) == gh
    assert product([], 4).is_identity()


def test_inverse_and_order():
    """Inverses cancel and orders combine cycle lengths with s."""
    g = _element([1, 2, 0, 3], s_bit=1)
    assert (g * g.inverse()).is_identity()
    assert g.order() == 6
    assert GroupElement.s(4).order() == 2
    assert GroupElement.identity(4).order() == 1


def test_s_bit_validated():
    """Only 0 and 1 are exponents of s."""
    with pytest.raises(StructureError):
        _element([0, 1], s_bit=2)


def test_explicit_action_shifts_cyclic_coordinate():
    """s moves the cyclic coordinate by ell."""
    g = _element([1, 0], s_bit=1)
    ell = ForgeSettings().ell
    assert ell == 2
    assert g.act_explicit(0, 1, ell=ell) == (1, 3)
    assert g.act_explicit(1, 3, ell=2) == (0, 1)
    with pytest.raises(StructureError):
        g.act_explicit(0, 0, ell=0)


def test_sympy_encoding():
    """The two extra points carry s."""
    g = _element([2, 0, 1], s_bit=1)
    encoded = to_sympy(g)
    assert encoded.size == 5
    assert from_sympy(encoded, 3) == g


def test_monodromy_orders(square, torus4):
    """Regular maps have monodromy groups as large as their flag sets."""
    assert monodromy_group(square).order() == 8
    assert monodromy_group(torus4).order() == 128


def test_membership(square):
    """Words in the generators belong to the group; s does not."""
    group = monodromy_group(square)
    word = GroupElement(square.adj[0]) * GroupElement(square.adj[1])
    assert group.contains(word)
    assert not group.contains(GroupElement.s(8))
    assert group.contains(GroupElement.identity(8))


def test_generators_deduplicated():
    """Identities and repeated generators are dropped."""
    g = _element([1, 0, 2])
    group = PermGroup([g, GroupElement.identity(3), g], 3)
    assert len(group.generators) == 1
    assert group.order() == 2


def test_degree_mismatch():
    """Generators must act on the group's point set."""
    with pytest.raises(StructureError):
        PermGroup([_element([1, 0])], 3)


def test_enumeration_cap(torus4):
    """Enumerating above the cap is refused."""
    group = monodromy_group(torus4)
    with pytest.raises(InfeasibleError) as excinfo:
        list(group.elements(cap=10))
    assert excinfo.value.required == 128
    assert len(list(group.elements())) == 128


def test_subgroup_relations(square):
    """<r0> lies in the full group but not the other way round."""
    full = monodromy_group(square)
    small = PermGroup([GroupElement(square.adj[0])], 8)
    assert full.contains_group(small)
    assert not small.contains_group(full)
    assert full.equals(monodromy_group(square))


def test_cosets(square):
    """Left cosets of <r0>: membership, size and intersections."""
    r0, r1 = GroupElement(square.adj[0]), GroupElement(square.adj[1])
    H = PermGroup([r0], 8)
    coset = Coset(rep=r1, subgroup=H)
    assert coset.size() == 2
    assert coset.contains(r1 * r0)
    assert not coset.contains(r0)
    assert sorted(g.key() for g in coset.elements()) == sorted(g.key() for g in (r1, r1 * r0))

    same = Coset(rep=r1 * r0, subgroup=H)
    assert coset.contains_coset(same) and same.contains_coset(coset)
    other = Coset(rep=GroupElement.identity(8), subgroup=H)
    assert intersection_elements(coset, other) == []
    assert coset_intersection(coset, other) is None

    whole = Coset(rep=GroupElement.identity(8), subgroup=monodromy_group(square))
    meet = coset_intersection(whole, coset)
    assert meet is not None
    assert meet.size() == 2


def test_right_coset_intersection(square):
    """Right cosets intersect into a right coset of the common subgroup."""
    r0, r1 = GroupElement(square.adj[0]), GroupElement(square.adj[1])
    H = PermGroup([r0], 8)
    right = Coset(rep=r1, subgroup=H, side="right")
    assert right.contains(r0 * r1)
    meet = coset_intersection(right, Coset(rep=r0 * r1, subgroup=H, side="right"))
    assert meet is not None
    assert meet.side == "right"
    assert meet.subgroup.contains(r0)
    assert meet.contains_coset(right) and right.contains_coset(meet)
    with pytest.raises(StructureError):
        coset_intersection(right, Coset(rep=r1, subgroup=H))
