"""
Tests for face posets, the polytopality oracle and lattice checks.
"""
import pytest

from src.models.config import ForgeSettings
from src.models.report import OracleStatus
from src.services.constructions import torus_map_44
from src.services.exceptions import PreconditionError
from src.services.flagcore import is_isomorphic
from src.services.poset import (
    build_poset,
    check_diamond,
    check_flagged,
    check_strong_flag_connected,
    closure,
    closure_mask,
    flag_graph_of_poset,
    hat2_poset,
    is_polytope,
    join,
    lattice_check,
    meet,
)


def test_square_poset(square):
    """The square has 4 vertices and 4 edges between the formal faces."""
    P = build_poset(square)
    assert P.face_counts() == [1, 4, 4, 1]
    assert not check_flagged(P)
    assert not check_diamond(P)
    assert P.least == (-1, 0)
    assert P.greatest == (2, 0)
    assert P.leq(P.least, P.greatest) and P.leq((0, 0), (0, 0))
    assert not P.lt((0, 0), (0, 0))


def test_square_is_polytope(square):
    """The oracle accepts the square."""
    result = is_polytope(square)
    assert result.status == OracleStatus.POLYTOPE
    assert result.face_counts == [1, 4, 4, 1]


def test_torus_is_polytope(torus4):
    """{4,4}_(4,0) is an abstract polytope."""
    result = is_polytope(torus4)
    assert result.is_polytope
    assert result.face_counts == [1, 16, 32, 16, 1]


def test_small_torus_is_polytope(torus2):
    """{4,4}_(2,0) is still a polytope."""
    assert is_polytope(torus2).is_polytope


def test_one_cell_torus_fails_diamond(one_cell):
    """One vertex and two loop edges: an edge has a single vertex below it."""
    P = build_poset(one_cell)
    assert P.face_counts() == [1, 1, 2, 1, 1]
    assert check_diamond(P)
    result = is_polytope(one_cell)
    assert result.status == OracleStatus.NOT_POLYTOPE
    assert any("diamond" in reason for reason in result.reasons)


def test_strong_connectivity_needs_diamond(one_cell):
    """Strong flag-connectivity is only checked on diamond posets."""
    with pytest.raises(PreconditionError):
        check_strong_flag_connected(build_poset(one_cell))


def test_flag_graph_of_poset(torus4):
    """Rebuilding the flag graph from the poset gives the map back."""
    P = build_poset(torus4)
    assert not check_strong_flag_connected(P)
    assert is_isomorphic(flag_graph_of_poset(P), torus4) is not None


def test_oracle_cap():
    """Maniplexes above the oracle cap are refused, not decided."""
    result = is_polytope(torus_map_44(4), ForgeSettings(oracle_cap=100))
    assert result.status == OracleStatus.INFEASIBLE
    assert result.num_flags == 128


def test_closure(torus4):
    """A facet is its own closure; a vertex of the torus lies in 4 squares."""
    P = build_poset(torus4)
    facet = P.facets()[3]
    assert closure(P, facet) == frozenset([facet])
    assert closure_mask(P, facet) == 1 << 3
    assert len(closure(P, (0, 0))) == 4
    assert len(closure(P, (1, 0))) == 2
    assert closure(P, P.greatest) == frozenset()


def test_torus_join_and_meet(torus4):
    """An edge is the join of its two vertices and the meet of its two squares."""
    P = build_poset(torus4)
    edge = (1, 0)
    below = sorted(f for f in P.down(edge) if f[0] == 0)
    above = sorted(f for f in P.up[edge] if f[0] == 2)
    assert len(below) == 2 and len(above) == 2
    assert join(P, below[0], below[1]) == edge
    assert meet(P, above[0], above[1]) == edge


def test_lattice_property(torus4, torus2):
    """The 4x4 torus is a lattice; on the 2x2 torus two squares share two edges."""
    assert lattice_check(build_poset(torus4)).is_lattice
    small = lattice_check(build_poset(torus2))
    assert not small.is_lattice
    assert small.failures
    assert small.formula_checked == 0


def test_doubled_lattice_formulas(square):
    """Joins and meets of the doubled square follow the closed formulas."""
    base = build_poset(square)
    doubled = hat2_poset(base)
    report = lattice_check(doubled, base=base)
    assert report.is_lattice
    assert report.formula_checked > 0
    assert report.formula_mismatches == 0
    # distinct facets of the doubled poset share no facet
    assert report.formula_checked < 2 * report.pairs_checked


def test_doubled_poset_counts(square, torus4):
    """Doubling the square poset gives the face counts of {4,4}_(4,0)."""
    doubled = hat2_poset(build_poset(square))
    assert doubled.face_counts() == build_poset(torus4).face_counts()
    assert doubled.labels is not None


def test_poset_document(square):
    """The JSON dump lists faces of every rank with their covers."""
    document = build_poset(square).to_document()
    assert document["rank"] == 2
    assert len(document["faces"]["0"]) == 4
    assert document["faces"]["-1"][0]["covers"] == [[0, i] for i in range(4)]
