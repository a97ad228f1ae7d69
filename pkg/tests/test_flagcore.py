"""
Tests for flag graph validation, faces, colorings and words.
"""
import numpy as np
import pytest

from src.models.maniplex import Maniplex, ManiplexDocument, ViolationKind
from src.services.exceptions import ColorRangeError, StructureError
from src.services.flagcore import (
    apply_word,
    colored_components,
    dual,
    i_faces,
    is_isomorphic,
    preserves_coloring,
    two_coloring,
    validate_maniplex,
    word_between,
    word_permutation,
)


def test_square_is_a_maniplex(square):
    """The square is a valid rank 2 maniplex with 8 flags."""
    report = validate_maniplex(square)
    assert report.is_valid
    assert square.rank == 2
    assert square.num_flags == 8


def test_torus_face_counts(torus4):
    """{4,4}_(4,0) has 16 vertices, 32 edges and 16 squares."""
    assert validate_maniplex(torus4).is_valid
    assert [len(i_faces(torus4, i)) for i in range(3)] == [16, 32, 16]
    for face in i_faces(torus4, 2).faces:
        assert face.shape[0] == 8


def test_fixed_point_reported():
    """A color fixing flags is reported with a witness."""
    M = Maniplex((np.array([1, 0, 2, 3]), np.array([3, 2, 1, 0])))
    report = validate_maniplex(M)
    assert report.kinds() == [ViolationKind.FIXED_POINT]
    assert report.violations[0].flag == 2


def test_parallel_edges_and_components_reported():
    """Two colors joining the same flags, in two components."""
    pair = np.array([1, 0, 3, 2])
    report = validate_maniplex(Maniplex((pair, pair)))
    assert ViolationKind.MULTI_EDGE in report.kinds()
    assert ViolationKind.DISCONNECTED in report.kinds()
    assert not report.is_valid


def test_non_permutation_rejected():
    """Adjacency arrays must be permutations."""
    with pytest.raises(StructureError):
        Maniplex((np.array([0, 0]),))
    with pytest.raises(StructureError):
        Maniplex((np.array([1, 0]), np.array([1, 0, 2])))


def test_document_shape_checked():
    """The JSON form rejects a wrong number of adjacency lists."""
    with pytest.raises(ValueError):
        ManiplexDocument(rank=2, num_flags=2, adj=[[1, 0]])


def test_document_round_trip(torus4):
    """Serializing and reading back gives the same maniplex."""
    assert Maniplex.from_document(torus4.to_document()) == torus4


def test_dual_of_self_dual_torus(torus4):
    """{4,4}_(4,0) is isomorphic to its dual."""
    assert is_isomorphic(dual(torus4), torus4) is not None


def test_isomorphism_rejects_different_sizes(square, torus4):
    """Maniplexes with different flag counts are never isomorphic."""
    assert is_isomorphic(square, torus4) is None


def test_word_permutation_and_apply_word(square):
    """(r0 r1)^4 is trivial on the square; words act on the right."""
    assert np.array_equal(word_permutation(square, [0, 1] * 4), np.arange(8))
    images = word_permutation(square, [0, 1, 0])
    for flag in range(8):
        assert images[flag] == apply_word(square, [0, 1, 0], flag)


def test_word_out_of_range(square):
    """Colors beyond the rank are rejected."""
    with pytest.raises(ColorRangeError):
        apply_word(square, [2], 0)
    with pytest.raises(ColorRangeError):
        colored_components(square, [0, 5])


def test_word_between_reaches_target(torus4):
    """Shortest words really connect the two flags."""
    for target in (1, 17, 100):
        word = word_between(torus4, 0, target)
        assert word is not None
        assert apply_word(torus4, word, 0) == target
    assert word_between(torus4, 0, 0) == []


def test_two_coloring_flip_sets(torus4, one_cell):
    """Colorings exist for the torus and flag 0 is always white."""
    for flips in ([0], [0, 1], [0, 2], [0, 1, 2]):
        coloring = two_coloring(torus4, flips)
        assert coloring is not None
        assert coloring.is_white(0)
        for c in range(3):
            same = coloring.color[torus4.adj[c]] == coloring.color
            assert bool(np.all(same)) == (c not in flips)
    assert two_coloring(one_cell, [0, 2]) is not None


def test_one_cell_colorings(one_cell):
    """The one-cell torus is orientable; r2 inside one cell forbids flipping on 2 alone."""
    coloring = two_coloring(one_cell, [0, 1, 2])
    assert coloring is not None
    assert coloring.color.tolist() == [0, 1, 0, 1, 0, 1, 0, 1]
    assert two_coloring(one_cell, [1]) is not None
    assert two_coloring(one_cell, [2]) is None
    assert two_coloring(one_cell, [0]) is None


def test_preserves_coloring(torus4):
    """Products of two flip colors keep flag colors."""
    coloring = two_coloring(torus4, [0, 1, 2])
    assert coloring is not None
    assert preserves_coloring(coloring, word_permutation(torus4, [0, 1]))
    assert not preserves_coloring(coloring, torus4.adj[0])
