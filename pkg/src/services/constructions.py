"""
Concrete maniplexes: the square, the {4,4} torus maps, two 2-orbit convex
polyhedra and the knight-move monodromy, plus the list of symmetry classes
the voltage construction covers.

Flags of a torus map are numbered ``8 * (i * s + j) + k`` for the cell
``(i, j)`` of the ``s x s`` board and the local flag ``k`` of that cell (see
``SQUARE_FLAGS`` in constants).
"""
from itertools import combinations, product
from typing import Dict, List, Sequence, Tuple

import numpy as np
from aws_lambda_powertools import Logger

from src.models.maniplex import Maniplex
from src.services.constants import KNIGHT_WORD, SQUARE_FLAGS, TORUS_R2_MOVES
from src.services.exceptions import ColorRangeError, ConstructionError
from src.services.flagcore import dual, i_faces, word_permutation
from src.services.utils import is_involution

logger = Logger()

# r0 and r1 inside a cell, by local flag
_LOCAL_R0 = np.array([1, 0, 3, 2, 5, 4, 7, 6], dtype=np.int64)
_LOCAL_R1 = np.array([7, 2, 1, 4, 3, 6, 5, 0], dtype=np.int64)


def square_flag_graph() -> Maniplex:
    """Flag graph of the square: an octagon alternating colors 0 and 1."""
    return Maniplex((_LOCAL_R0, _LOCAL_R1))


def torus_map_44(s: int) -> Maniplex:
    """
    Flag graph of the map {4,4}_(s,0): an ``s x s`` board of squares with
    opposite borders identified.

    Raises:
        ConstructionError: If ``s < 2``
    """
    if s < 2:
        raise ConstructionError(f"Torus map {{4,4}}_({s},0) needs s >= 2")
    return _torus(s)


def one_cell_torus() -> Maniplex:
    """
    The map {4,4}_(1,0): one square with opposite sides identified.

    A maniplex with one vertex, two edges and one face whose face poset is
    not a polytope.
    """
    return _torus(1)


def _torus(s: int) -> Maniplex:
    cells = s * s
    base = SQUARE_FLAGS * np.arange(cells, dtype=np.int64).repeat(SQUARE_FLAGS)
    local = np.tile(np.arange(SQUARE_FLAGS, dtype=np.int64), cells)
    r0 = base + _LOCAL_R0[local]
    r1 = base + _LOCAL_R1[local]

    moves = np.asarray(TORUS_R2_MOVES, dtype=np.int64)
    cell = base // SQUARE_FLAGS
    i, j = cell // s, cell % s
    ni = (i + moves[local, 0]) % s
    nj = (j + moves[local, 1]) % s
    r2 = SQUARE_FLAGS * (ni * s + nj) + moves[local, 2]
    M = Maniplex((r0, r1, r2))
    logger.debug("Torus map built", extra={"s": s, "num_flags": M.num_flags})
    return M


Edge = Tuple[int, int]


def polyhedral_map(faces: Sequence[Sequence[int]]) -> Maniplex:
    """
    Flag graph of a map given by the vertex cycle of every face.

    Flags are triples ``(vertex, edge, face)``, numbered face by face with
    two flags per edge of the cycle, starting at the first vertex of face 0.

    Raises:
        ConstructionError: If a face has fewer than three distinct vertices
            or an edge does not lie on exactly two faces
    """
    flags: List[Tuple[int, Edge, int]] = []
    index: Dict[Tuple[int, Edge, int], int] = {}
    edges_at: Dict[Tuple[int, int], List[Edge]] = {}
    faces_of: Dict[Edge, List[int]] = {}
    for f, cycle in enumerate(faces):
        k = len(cycle)
        if k < 3 or len(set(cycle)) != k:
            raise ConstructionError(f"Face {f} is not a cycle of at least three vertices: {list(cycle)}")
        for i in range(k):
            a, b = int(cycle[i]), int(cycle[(i + 1) % k])
            edge = (min(a, b), max(a, b))
            faces_of.setdefault(edge, []).append(f)
            for v in (a, b):
                index[(v, edge, f)] = len(flags)
                flags.append((v, edge, f))
                edges_at.setdefault((v, f), []).append(edge)

    bad = sorted(edge for edge, on in faces_of.items() if len(on) != 2)
    if bad:
        raise ConstructionError(f"Edges {bad[:4]} do not lie on exactly two faces")

    r0 = np.empty(len(flags), dtype=np.int64)
    r1 = np.empty(len(flags), dtype=np.int64)
    r2 = np.empty(len(flags), dtype=np.int64)
    for flag, (v, edge, f) in enumerate(flags):
        other_vertex = edge[0] if edge[1] == v else edge[1]
        other_edge = next(e for e in edges_at[(v, f)] if e != edge)
        other_face = next(g for g in faces_of[edge] if g != f)
        r0[flag] = index[(other_vertex, edge, f)]
        r1[flag] = index[(v, other_edge, f)]
        r2[flag] = index[(v, edge, other_face)]
    M = Maniplex((r0, r1, r2))
    logger.debug("Polyhedral map built", extra={"faces": len(faces), "num_flags": M.num_flags})
    return M


def cuboctahedron() -> Maniplex:
    """
    The cuboctahedron, with vertices at the edge midpoints of the cube.

    Its 8 triangles come first, then its 6 squares; the automorphism group
    has two flag orbits, the flags of triangles and the flags of squares.
    """
    points = sorted(p for p in product((-1, 0, 1), repeat=3) if p.count(0) == 1)
    vertex = {p: k for k, p in enumerate(points)}

    def at(values: Dict[int, int]) -> int:
        return vertex[tuple(values.get(axis, 0) for axis in range(3))]

    faces: List[List[int]] = []
    for s0, s1, s2 in product((1, -1), repeat=3):
        faces.append([at({0: s0, 1: s1}), at({0: s0, 2: s2}), at({1: s1, 2: s2})])
    for axis in range(3):
        j, k = (a for a in range(3) if a != axis)
        for sign in (1, -1):
            faces.append([
                at({axis: sign, j: 1}),
                at({axis: sign, k: 1}),
                at({axis: sign, j: -1}),
                at({axis: sign, k: -1}),
            ])
    return polyhedral_map(faces)


def rhombic_dodecahedron() -> Maniplex:
    """Dual of the cuboctahedron: 12 rhombi, two vertex orbits."""
    return dual(cuboctahedron())


def cell_of_flag(flag: int) -> int:
    """Cell index ``i * s + j`` of a torus flag."""
    return flag // SQUARE_FLAGS


def is_facet_separating(M: Maniplex, perm: np.ndarray) -> bool:
    """
    True if ``perm`` sends the flags of every facet to pairwise distinct facets.
    """
    facets = i_faces(M, M.rank - 1)
    for flags in facets.faces:
        images = facets.face_of[perm[flags]]
        if np.unique(images).shape[0] != flags.shape[0]:
            return False
    return True


def eta_knight(M: Maniplex) -> np.ndarray:
    """
    The knight-move monodromy ``r2 r1 r0 r1 r2 r1 r2 r1`` on {4,4}_(s,0).

    Raises:
        ConstructionError: If the result is not an involution or does not
            separate facets (the board is too small)
    """
    if M.rank != 3:
        raise ConstructionError(f"Knight monodromy needs a rank 3 torus map, got rank {M.rank}")
    eta = word_permutation(M, KNIGHT_WORD)
    if not is_involution(eta):
        raise ConstructionError("Knight monodromy is not an involution on this map")
    if not is_facet_separating(M, eta):
        raise ConstructionError("Knight monodromy does not separate the facets of this map")
    eta.setflags(write=False)
    return eta


def enumerate_covered_classes(n: int) -> List[Tuple[int, ...]]:
    """
    Semi-edge color sets ``I`` of the two-orbit classes the construction covers.

    These are the ``I`` whose complement has one or two colors, or is an
    interval of at least three colors; there are ``n^2 - n + 1`` of them.

    Args:
        n: Rank

    Returns:
        Sorted tuples ``I``, ordered by complement size then lexicographically
    """
    if n < 3:
        raise ColorRangeError(f"Covered classes are listed for rank >= 3, got {n}")
    colors = range(n)
    complements: List[Tuple[int, ...]] = []
    complements.extend((c,) for c in colors)
    complements.extend(combinations(colors, 2))
    for length in range(3, n + 1):
        complements.extend(tuple(range(start, start + length)) for start in range(n - length + 1))
    classes = [tuple(c for c in colors if c not in comp) for comp in complements]
    logger.debug("Covered classes", extra={"rank": n, "count": len(classes)})
    return classes


def complement(colors: Sequence[int], n: int) -> Tuple[int, ...]:
    """Colors of ``range(n)`` missing from ``colors``."""
    present = set(colors)
    return tuple(c for c in range(n) if c not in present)
