"""
Tests for the doubling construction, asymmetric facet sets and base edges.
"""
import numpy as np
import pytest

from src.models.config import ForgeSettings
from src.models.maniplex import Maniplex
from src.services.exceptions import ConstructionError, InfeasibleError
from src.services.flagcore import is_isomorphic, validate_maniplex
from src.services.hat2 import (
    Hat2Maniplex,
    base_edges,
    check_hat_s_asymmetric,
    check_hat_s_spread,
    eta_definitional,
    eta_from_s,
    find_s3,
    forced_choices_agree,
    hat2,
    hat_S,
    lift_automorphism,
    lift_translation,
    mask_of,
    permute_mask,
    rho0_hat,
    verify_s3,
)
from src.services.symmetry import automorphisms, is_automorphism


def test_doubled_square_is_the_torus(square, torus4):
    """Doubling the square gives {4,4}_(4,0)."""
    doubled = hat2(square, materialize=True)
    assert isinstance(doubled, Maniplex)
    assert doubled.num_flags == 128
    assert validate_maniplex(doubled).is_valid
    assert is_isomorphic(doubled, torus4) is not None


def test_doubled_square_is_regular(square):
    """Doubling keeps regularity."""
    doubled = hat2(square, materialize=True)
    assert automorphisms(doubled).order() == doubled.num_flags


def test_implicit_flags(torus4):
    """Flags of the implicit doubling are (phi, x) pairs."""
    H = hat2(torus4)
    assert isinstance(H, Hat2Maniplex)
    assert H.rank == 4
    assert H.num_facets == 16
    assert H.num_flags == 128 << 16
    assert H.facet_count == 1 << 16
    flag = H.flag_id(5, 0b1010)
    assert H.decode(flag) == (5, 0b1010)
    phi, x = H.step_pair(5, 0b1010, 3)
    assert phi == 5 and x == 0b1010 ^ (1 << int(H.facet_of[5]))
    assert H.step(H.step(flag, 3), 3) == flag
    assert H.apply_word([0, 1, 0, 1, 0, 1, 0, 1], 5, 3) == (5, 3)
    with pytest.raises(ConstructionError):
        H.step_pair(0, 0, 4)


def test_materialize_cap(torus4):
    """Materializing beyond the cap is refused."""
    with pytest.raises(InfeasibleError):
        hat2(torus4, materialize=True, settings=ForgeSettings(materialize_cap=1000))


def test_masks():
    """Facet vectors are bitmasks; permuting moves bits."""
    assert mask_of([0, 3]) == 0b1001
    assert permute_mask(0b1001, np.array([2, 1, 0, 3])) == 0b1100


def test_lifted_automorphisms(square):
    """Lifts and translations are automorphisms of the doubled square."""
    H = hat2(square)
    assert isinstance(H, Hat2Maniplex)
    doubled = H.materialize(1000)
    for sigma in automorphisms(square).perms:
        assert is_automorphism(doubled, lift_automorphism(H, sigma).permutation(H))
    assert is_automorphism(doubled, lift_translation(H, 0b0110).permutation(H))
    with pytest.raises(ConstructionError):
        lift_automorphism(H, np.array([1, 0, 2, 3, 4, 5, 6, 7]))


def test_hat_s():
    """The zero vector and one unit vector per facet of S."""
    assert hat_S((0, 3)) == (0, 1, 8)


@pytest.fixture(scope="module")
def torus_s3():
    from src.services.constructions import torus_map_44

    M = torus_map_44(4)
    aut = automorphisms(M)
    return M, aut, find_s3(M, aut)


def test_asymmetric_facet_set(torus_s3):
    """The torus has a spread facet set no automorphism fixes."""
    M, aut, S = torus_s3
    assert S is not None and len(S) > 0
    assert list(S) == sorted(S)
    assert verify_s3(M, S, aut).passed


def test_asymmetric_set_lifts(torus_s3):
    """The lifted set is again asymmetric and spread."""
    M, aut, S = torus_s3
    H = hat2(M)
    assert isinstance(H, Hat2Maniplex)
    assert check_hat_s_asymmetric(H, S, aut)
    assert check_hat_s_spread(H, S)


def test_facet_shift_two_ways(torus_s3):
    """The shift built from automorphisms equals the one built from words."""
    M, aut, S = torus_s3
    H = hat2(M)
    assert isinstance(H, Hat2Maniplex)
    eta = eta_from_s(H, S, aut)
    assert np.array_equal(eta.shifts, eta_definitional(H, S).shifts)
    assert eta.shifts[0] == mask_of(S)
    phi, x = eta.apply(*eta.apply(7, 0b11))
    assert (phi, x) == (7, 0b11)


def test_invariant_set_rejected(torus4):
    """All facets together are fixed by every automorphism."""
    H = hat2(torus4)
    assert isinstance(H, Hat2Maniplex)
    with pytest.raises(ConstructionError):
        eta_from_s(H, range(16))


def test_base_edges_and_reflection(torus_s3):
    """Copies of S use their translated base flag; the reflection swaps B and B^0."""
    M, aut, S = torus_s3
    H = hat2(M)
    assert isinstance(H, Hat2Maniplex)
    table = base_edges(H, S, aut)
    assert len(table.copies) == M.num_flags
    assert table.base_flag(0) == 0
    assert table.base_flag(mask_of(S)) == 0
    assert not table.is_copy(0)
    reflection = rho0_hat(H, table, aut)
    assert reflection.apply(0, 0) == (int(M.adj[0][0]), 0)
    x = next(iter(k for k in table.copies if table.base_flag(k) != 0))
    B = table.base_flag(x)
    assert reflection.apply(B, x) == (int(M.adj[0][B]), x)


def test_square_has_no_spread_set(square):
    """Two opposite vertices of the square already touch every edge."""
    assert find_s3(square) is None
    assert find_s3(square, spread=False) is None


def test_forced_base_flags(torus_s3):
    """Facets reached from the zero facet by the shift use the arriving flag."""
    M, aut, S = torus_s3
    H = hat2(M)
    assert isinstance(H, Hat2Maniplex)
    assert forced_choices_agree(base_edges(H, S, aut), eta_from_s(H, S, aut))
