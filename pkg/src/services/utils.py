"""
Shared utility functions for permutation arrays and graph components.

Permutations are numpy image arrays: ``p[i]`` is the image of point ``i``.
Composition follows the right action used throughout the package, so
``compose(p, q)`` applies ``p`` first and ``q`` second.
"""
from typing import Iterable, List, Sequence

import networkx as nx
import numpy as np

from src.services.exceptions import StructureError


def as_permutation(images: Sequence[int] | np.ndarray, size: int | None = None) -> np.ndarray:
    """
    Convert a sequence of images into a read-only permutation array.

    Args:
        images: Image of every point
        size: Expected number of points, if known

    Returns:
        Read-only int64 array

    Raises:
        StructureError: If the images do not form a permutation of the right size
    """
    perm = np.asarray(images, dtype=np.int64).copy()
    if perm.ndim != 1:
        raise StructureError("Permutation must be one-dimensional")
    if size is not None and perm.shape[0] != size:
        raise StructureError(f"Permutation has {perm.shape[0]} points, expected {size}")
    n = perm.shape[0]
    if n and (perm.min() < 0 or perm.max() >= n):
        raise StructureError("Permutation image out of range")
    if np.unique(perm).shape[0] != n:
        raise StructureError("Permutation is not injective")
    perm.setflags(write=False)
    return perm


def identity(size: int) -> np.ndarray:
    """Identity permutation on ``size`` points."""
    perm = np.arange(size, dtype=np.int64)
    perm.setflags(write=False)
    return perm


def compose(first: np.ndarray, second: np.ndarray) -> np.ndarray:
    """Apply ``first`` then ``second``."""
    return second[first]


def compose_all(perms: Iterable[np.ndarray], size: int) -> np.ndarray:
    """Compose permutations left to right; the empty product is the identity."""
    result = np.arange(size, dtype=np.int64)
    for perm in perms:
        result = perm[result]
    return result


def invert(perm: np.ndarray) -> np.ndarray:
    """Inverse permutation."""
    inverse = np.empty_like(perm)
    inverse[perm] = np.arange(perm.shape[0], dtype=perm.dtype)
    return inverse


def is_involution(perm: np.ndarray) -> bool:
    """True if ``perm`` squares to the identity."""
    return bool(np.array_equal(perm[perm], np.arange(perm.shape[0])))


def component_labels(num_nodes: int, matchings: Sequence[np.ndarray]) -> np.ndarray:
    """
    Label connected components of the graph whose edges are ``i -- m[i]``.

    Components are numbered by their smallest node, in increasing order, so
    labels are reproducible run to run.

    Args:
        num_nodes: Number of nodes
        matchings: Image arrays, one per edge color in use

    Returns:
        Array mapping node to component label
    """
    graph = nx.Graph()
    graph.add_nodes_from(range(num_nodes))
    nodes = np.arange(num_nodes)
    for matching in matchings:
        graph.add_edges_from(zip(nodes.tolist(), np.asarray(matching).tolist()))

    labels = np.empty(num_nodes, dtype=np.int64)
    components: List[List[int]] = sorted(
        (sorted(component) for component in nx.connected_components(graph)),
        key=lambda component: component[0],
    )
    for label, component in enumerate(components):
        labels[component] = label
    return labels


def relabel_dense(labels: np.ndarray) -> np.ndarray:
    """Renumber labels to 0..k-1 in order of first appearance."""
    _, first, inverse = np.unique(labels, return_index=True, return_inverse=True)
    order = np.argsort(np.argsort(first))
    return order[inverse].astype(np.int64)
