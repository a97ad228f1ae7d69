"""
Tests for the square, the torus maps, polyhedral maps, the knight monodromy and covered classes.
"""
import numpy as np
import pytest

from src.services.constructions import (
    cell_of_flag,
    complement,
    enumerate_covered_classes,
    eta_knight,
    is_facet_separating,
    one_cell_torus,
    polyhedral_map,
    torus_map_44,
)
from src.services.exceptions import ColorRangeError, ConstructionError
from src.services.flagcore import i_faces, validate_maniplex
from src.services.poset import is_polytope
from src.services.symmetry import automorphisms, flag_orbits
from src.services.utils import is_involution


def test_torus_sizes():
    """{4,4}_(s,0) has 8 s^2 flags and s^2 squares."""
    for s in (2, 3, 4, 8):
        M = torus_map_44(s)
        assert M.rank == 3
        assert M.num_flags == 8 * s * s
        assert len(i_faces(M, 2)) == s * s
        assert validate_maniplex(M).is_valid


def test_torus_too_small():
    """The named torus maps start at s = 2."""
    with pytest.raises(ConstructionError):
        torus_map_44(1)


def test_one_cell_torus(one_cell):
    """One square glued to itself: 8 flags, still a maniplex."""
    assert one_cell == one_cell_torus()
    assert one_cell.num_flags == 8
    assert validate_maniplex(one_cell).is_valid
    assert [len(i_faces(one_cell, i)) for i in range(3)] == [1, 2, 1]


def test_cells_hold_eight_flags(torus4):
    """Squares of the torus are exactly the cells of the board."""
    facets = i_faces(torus4, 2)
    for flags in facets.faces:
        assert len({cell_of_flag(int(f)) for f in flags}) == 1


def test_knight_monodromy(torus8):
    """On the 8x8 board the knight move is an involution separating every square."""
    eta = eta_knight(torus8)
    assert is_involution(eta)
    assert is_facet_separating(torus8, eta)
    facets = i_faces(torus8, 2)
    for flags in facets.faces:
        assert np.unique(facets.face_of[eta[flags]]).shape[0] == 8


def test_knight_needs_rank_three(square):
    """The knight word is only defined on maps."""
    with pytest.raises(ConstructionError):
        eta_knight(square)


def test_identity_does_not_separate(torus4):
    """The identity keeps every square in place."""
    assert not is_facet_separating(torus4, np.arange(torus4.num_flags))


def test_covered_classes():
    """n^2 - n + 1 semi-edge sets at every rank."""
    for n in range(3, 9):
        classes = enumerate_covered_classes(n)
        assert len(classes) == n * n - n + 1
        assert len(set(classes)) == len(classes)
    classes = enumerate_covered_classes(4)
    assert classes[0] == (1, 2, 3)
    assert classes[-1] == ()
    assert (1, 2) in classes
    with pytest.raises(ColorRangeError):
        enumerate_covered_classes(2)


def test_complement():
    """Colors below n that are missing from the set."""
    assert complement((1, 2), 4) == (0, 3)
    assert complement((), 3) == (0, 1, 2)


def test_tetrahedron_from_faces():
    """Four triangles on four vertices give the 24 flags of the tetrahedron."""
    M = polyhedral_map([[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]])
    assert M.num_flags == 24
    assert validate_maniplex(M).is_valid
    assert automorphisms(M).order() == 24


def test_polyhedral_map_errors():
    """Faces must be cycles and every edge must lie on two faces."""
    with pytest.raises(ConstructionError):
        polyhedral_map([[0, 1]])
    with pytest.raises(ConstructionError):
        polyhedral_map([[0, 1, 1]])
    with pytest.raises(ConstructionError):
        polyhedral_map([[0, 1, 2]])


def test_two_orbit_polyhedra(cuboctahedron, rhombic_dodecahedron):
    """Both polyhedra have 96 flags in two orbits of 48."""
    for M in (cuboctahedron, rhombic_dodecahedron):
        assert M.num_flags == 96
        assert validate_maniplex(M).is_valid
        aut = automorphisms(M)
        assert aut.order() == 48
        orbits = flag_orbits(M, aut)
        assert sorted(np.bincount(orbits).tolist()) == [48, 48]
        assert is_polytope(M).is_polytope
    assert len(i_faces(cuboctahedron, 2)) == 14
    assert len(i_faces(cuboctahedron, 0)) == 12
    assert len(i_faces(rhombic_dodecahedron, 2)) == 12
    assert len(i_faces(rhombic_dodecahedron, 0)) == 14
    # triangles come first, so orbit 0 is the triangle flags
    triangles = i_faces(cuboctahedron, 2).faces[0]
    assert triangles.shape[0] == 6
    assert not np.any(flag_orbits(cuboctahedron)[triangles])
