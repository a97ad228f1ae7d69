"""
Core maniplex operations.

This module validates flag graphs, extracts i-faces, dualizes, two-colors
flags, applies monodromy words and decides isomorphism by anchored
propagation. Flags are dense integer ids and every color is an image array.
"""
from collections import deque
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np
from aws_lambda_powertools import Logger

from src.models.maniplex import (
    FlagColoring,
    Maniplex,
    ValidationReport,
    Violation,
    ViolationKind,
)
from src.services.exceptions import ColorRangeError
from src.services.utils import component_labels

logger = Logger()


@dataclass(frozen=True, eq=False)
class FacePartition:
    """Faces of one rank: ``face_of[flag]`` is the face id, ``faces[id]`` its flags."""
    rank: int
    face_of: np.ndarray
    faces: Tuple[np.ndarray, ...]

    def __len__(self) -> int:
        return len(self.faces)


def check_color(M: Maniplex, color: int) -> None:
    """Raise ColorRangeError unless ``color`` is a color of ``M``."""
    if not 0 <= color < M.rank:
        raise ColorRangeError(f"Color {color} out of range for rank {M.rank}")


def validate_maniplex(M: Maniplex) -> ValidationReport:
    """
    Check the maniplex axioms.

    Reports one witness per violated axiom and color (pair): fixed points,
    flags where two colors coincide, non-commuting colors that differ by more
    than one, and disconnectedness. Malformed adjacency arrays are rejected
    earlier, when the Maniplex is built.

    Args:
        M: Flag graph to check

    Returns:
        ValidationReport, empty when M is a maniplex
    """
    report = ValidationReport(rank=M.rank, num_flags=M.num_flags)
    flags = np.arange(M.num_flags)

    for i, images in enumerate(M.adj):
        fixed = np.flatnonzero(images == flags)
        if fixed.size:
            report.violations.append(Violation(
                kind=ViolationKind.FIXED_POINT,
                colors=[i],
                flag=int(fixed[0]),
                detail=f"{fixed.size} flags fixed by color {i}",
            ))

    for i in range(M.rank):
        for j in range(i + 1, M.rank):
            same = np.flatnonzero((M.adj[i] == M.adj[j]) & (M.adj[i] != flags))
            if same.size:
                report.violations.append(Violation(
                    kind=ViolationKind.MULTI_EDGE,
                    colors=[i, j],
                    flag=int(same[0]),
                    detail=f"colors {i} and {j} join the same flags at {same.size} flags",
                ))
            if j - i > 1:
                bad = np.flatnonzero(M.adj[i][M.adj[j]] != M.adj[j][M.adj[i]])
                if bad.size:
                    report.violations.append(Violation(
                        kind=ViolationKind.NON_COMMUTING,
                        colors=[i, j],
                        flag=int(bad[0]),
                        detail=f"alternating ({i},{j})-path of length 4 is open at {bad.size} flags",
                    ))

    labels = component_labels(M.num_flags, M.adj)
    components = int(labels.max()) + 1 if M.num_flags else 0
    if components > 1:
        report.violations.append(Violation(
            kind=ViolationKind.DISCONNECTED,
            colors=list(range(M.rank)),
            flag=int(np.flatnonzero(labels == 1)[0]),
            detail=f"{components} connected components",
        ))

    logger.debug("Maniplex validated", extra={
        "rank": M.rank,
        "num_flags": M.num_flags,
        "violations": len(report.violations),
    })
    return report


def dual(M: Maniplex) -> Maniplex:
    """Reverse the colors: color i becomes color n-1-i."""
    return Maniplex(adj=tuple(reversed(M.adj)))


def colored_components(M: Maniplex, colors: Iterable[int]) -> np.ndarray:
    """Component label of every flag in the subgraph using only ``colors``."""
    chosen = sorted(set(colors))
    for color in chosen:
        check_color(M, color)
    return component_labels(M.num_flags, [M.adj[c] for c in chosen])


def i_faces(M: Maniplex, i: int) -> FacePartition:
    """
    The i-faces: components of the subgraph omitting color ``i``.

    Face ids are ordered by the smallest flag they contain.
    """
    check_color(M, i)
    face_of = colored_components(M, (c for c in range(M.rank) if c != i))
    face_of.setflags(write=False)
    order = np.argsort(face_of, kind="stable")
    bounds = np.searchsorted(face_of[order], np.arange(int(face_of.max()) + 2))
    faces = tuple(order[bounds[k]:bounds[k + 1]] for k in range(len(bounds) - 1))
    return FacePartition(rank=i, face_of=face_of, faces=faces)


def two_coloring(M: Maniplex, flip_colors: Iterable[int]) -> Optional[FlagColoring]:
    """
    Color flags white/black so that exactly the colors in ``flip_colors`` swap colors.

    Flag 0 is white. Same-color constraints are encoded by routing each such
    edge through an auxiliary node, which turns the question into
    bipartiteness.

    Args:
        M: Maniplex to color
        flip_colors: Colors that must change the flag color

    Returns:
        FlagColoring, or None when the parity constraints are inconsistent
    """
    flips = frozenset(flip_colors)
    for color in flips:
        check_color(M, color)
    n = M.num_flags
    if not flips:
        return FlagColoring(color=np.zeros(n, dtype=np.int8), flip_colors=flips)

    graph = nx.Graph()
    graph.add_nodes_from(range(n))
    aux = n
    flags = np.arange(n)
    for color, images in enumerate(M.adj):
        # each edge once
        lower = flags[flags < images]
        if color in flips:
            graph.add_edges_from(zip(lower.tolist(), images[lower].tolist()))
        else:
            for a, b in zip(lower.tolist(), images[lower].tolist()):
                graph.add_edge(a, aux)
                graph.add_edge(aux, b)
                aux += 1

    if not nx.is_bipartite(graph):
        logger.debug("No two-coloring", extra={"flip_colors": sorted(flips)})
        return None

    sides = nx.bipartite.color(graph)
    color = np.array([sides[flag] for flag in range(n)], dtype=np.int8)
    # normalize each component so its smallest flag is white
    labels = component_labels(n, M.adj)
    for label in np.unique(labels):
        members = np.flatnonzero(labels == label)
        if color[members[0]] == 1:
            color[members] ^= 1
    return FlagColoring(color=color, flip_colors=flips)


@dataclass(frozen=True, eq=False)
class SpanningOrder:
    """BFS order of flags with the parent and color that discovered each one."""
    order: np.ndarray
    parent: np.ndarray
    color: np.ndarray


def spanning_order(M: Maniplex, root: int = 0) -> SpanningOrder:
    """BFS from ``root`` scanning colors in ascending order."""
    n = M.num_flags
    parent = np.full(n, -1, dtype=np.int64)
    via = np.full(n, -1, dtype=np.int64)
    seen = np.zeros(n, dtype=bool)
    seen[root] = True
    order = [root]
    queue = deque([root])
    while queue:
        flag = queue.popleft()
        for c, images in enumerate(M.adj):
            nxt = int(images[flag])
            if not seen[nxt]:
                seen[nxt] = True
                parent[nxt] = flag
                via[nxt] = c
                order.append(nxt)
                queue.append(nxt)
    return SpanningOrder(order=np.asarray(order, dtype=np.int64), parent=parent, color=via)


def anchored_map(
    M1: Maniplex,
    M2: Maniplex,
    anchor: int,
    tree: Optional[SpanningOrder] = None,
    root: int = 0,
) -> Optional[np.ndarray]:
    """
    Propagate ``root -> anchor`` along colors and check the result.

    Args:
        M1: Source maniplex
        M2: Target maniplex
        anchor: Image of ``root``
        tree: Precomputed spanning order of M1 from ``root``
        root: Anchored flag of M1

    Returns:
        Color-preserving bijection as an image array, or None if the
        propagation is inconsistent
    """
    if tree is None:
        tree = spanning_order(M1, root)
    if tree.order.shape[0] != M1.num_flags:
        return None
    mapping = np.full(M1.num_flags, -1, dtype=np.int64)
    mapping[root] = anchor
    parent = tree.parent
    via = tree.color
    adj2 = M2.adj
    for flag in tree.order[1:].tolist():
        mapping[flag] = adj2[via[flag]][mapping[parent[flag]]]
    for c in range(M1.rank):
        if not np.array_equal(mapping[M1.adj[c]], adj2[c][mapping]):
            return None
    if np.unique(mapping).shape[0] != M1.num_flags:
        return None
    return mapping


def is_isomorphic(M1: Maniplex, M2: Maniplex) -> Optional[np.ndarray]:
    """
    Find a color-preserving isomorphism.

    Flag 0 of M1 is anchored to each flag of M2 in turn; connectivity and
    the matching structure make the rest of the map forced.

    Returns:
        Image array of a bijection from flags of M1 to flags of M2, or None
    """
    if M1.rank != M2.rank or M1.num_flags != M2.num_flags:
        return None
    tree = spanning_order(M1)
    for anchor in range(M2.num_flags):
        mapping = anchored_map(M1, M2, anchor, tree)
        if mapping is not None:
            return mapping
    return None


def apply_word(M: Maniplex, word: Sequence[int], flag: int) -> int:
    """Right action ``flag . r_{w0} . r_{w1} ...``."""
    for color in word:
        check_color(M, color)
        flag = int(M.adj[color][flag])
    return flag


def word_permutation(M: Maniplex, word: Sequence[int]) -> np.ndarray:
    """Image array of the monodromy ``r_{w0} r_{w1} ...`` acting on all flags."""
    images = np.arange(M.num_flags, dtype=np.int64)
    for color in word:
        check_color(M, color)
        images = M.adj[color][images]
    return images


def word_between(M: Maniplex, source: int, target: int, colors: Optional[Sequence[int]] = None) -> Optional[List[int]]:
    """
    Shortest color word moving ``source`` to ``target``.

    Args:
        M: Maniplex
        source: Start flag
        target: End flag
        colors: Allowed colors (all by default)

    Returns:
        Word such that ``apply_word(M, word, source) == target``, or None
    """
    allowed = list(range(M.rank)) if colors is None else sorted(set(colors))
    back: Dict[int, Optional[Tuple[int, int]]] = {source: None}
    queue = deque([source])
    while queue:
        flag = queue.popleft()
        if flag == target:
            word: List[int] = []
            step = back[flag]
            while step is not None:
                previous, color = step
                word.append(color)
                step = back[previous]
            return word[::-1]
        for color in allowed:
            nxt = int(M.adj[color][flag])
            if nxt not in back:
                back[nxt] = (flag, color)
                queue.append(nxt)
    return None


def preserves_coloring(coloring: FlagColoring, perm: np.ndarray) -> bool:
    """True if ``perm`` maps white flags to white flags."""
    return bool(np.array_equal(coloring.color[perm], coloring.color))
