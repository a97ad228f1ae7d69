"""
Automorphisms, flag orbits and symmetry type graphs.

Automorphisms are found by anchored propagation: flag 0 is sent to every
candidate flag and the rest of the map is forced by the colors. A candidate
is kept when the forced map commutes with every color.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import combinations
from typing import Dict, List, Optional, Tuple

import networkx as nx
import numpy as np
from aws_lambda_powertools import Logger
from pydantic import BaseModel

from src.models.group import GroupElement
from src.models.maniplex import Maniplex
from src.models.premaniplex import Dart, Premaniplex, VoltageAssignment
from src.services.constants import AUTOMORPHISM_SEARCH_CAP
from src.services.exceptions import ConstructionError, InfeasibleError
from src.services.flagcore import anchored_map, spanning_order
from src.services.permtools import PermGroup
from src.services.utils import relabel_dense

logger = Logger()


@dataclass(frozen=True, eq=False)
class AutGroup:
    """Automorphisms of a maniplex, listed by the image of flag 0."""
    num_flags: int
    perms: Tuple[np.ndarray, ...]

    def order(self) -> int:
        return len(self.perms)

    def by_image(self) -> Dict[int, np.ndarray]:
        """Map from the image of flag 0 to the automorphism."""
        return {int(p[0]): p for p in self.perms}

    def mapping(self, source: int, target: int) -> Optional[np.ndarray]:
        """The automorphism sending ``source`` to ``target``, if any."""
        for p in self.perms:
            if int(p[source]) == target:
                return p
        return None

    def non_identity(self) -> List[np.ndarray]:
        """All automorphisms except the identity."""
        flags = np.arange(self.num_flags)
        return [p for p in self.perms if not np.array_equal(p, flags)]

    def as_perm_group(self) -> PermGroup:
        """The automorphism group as a PermGroup on flags."""
        return PermGroup([GroupElement(p) for p in self.perms], self.num_flags)


def automorphisms(M: Maniplex, jobs: int = 1) -> AutGroup:
    """
    Complete list of automorphisms.

    Args:
        M: Maniplex
        jobs: Worker threads for the candidate anchors

    Raises:
        InfeasibleError: Above the automorphism search cap
    """
    if M.num_flags > AUTOMORPHISM_SEARCH_CAP:
        raise InfeasibleError(
            f"Automorphism search on {M.num_flags} flags exceeds {AUTOMORPHISM_SEARCH_CAP}",
            limit=AUTOMORPHISM_SEARCH_CAP,
            required=M.num_flags,
        )
    tree = spanning_order(M)
    anchors = range(M.num_flags)
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(lambda a: anchored_map(M, M, a, tree), anchors))
    else:
        results = [anchored_map(M, M, a, tree) for a in anchors]
    perms = tuple(p for p in results if p is not None)
    for p in perms:
        p.setflags(write=False)
    logger.debug("Automorphisms computed", extra={"num_flags": M.num_flags, "order": len(perms)})
    return AutGroup(num_flags=M.num_flags, perms=perms)


def flag_orbits(M: Maniplex, aut: Optional[AutGroup] = None) -> np.ndarray:
    """
    Orbit label of every flag, numbered in order of first appearance.
    """
    aut = aut or automorphisms(M)
    smallest = np.min(np.stack(aut.perms), axis=0)
    return relabel_dense(smallest)


def is_regular(M: Maniplex, aut: Optional[AutGroup] = None) -> bool:
    """True if the automorphism group is transitive on flags."""
    aut = aut or automorphisms(M)
    return aut.order() == M.num_flags


def is_automorphism(M: Maniplex, perm: np.ndarray) -> bool:
    """True if ``perm`` commutes with every color."""
    return all(np.array_equal(perm[a], a[perm]) for a in M.adj)


def symmetry_type_graph(M: Maniplex, aut: Optional[AutGroup] = None) -> Premaniplex:
    """
    Quotient of M by its automorphism group.

    Orbits become vertices; a color joining an orbit to itself becomes a
    semi-edge, otherwise a link. Dart ids follow vertices then colors.
    """
    orbits = flag_orbits(M, aut)
    k = int(orbits.max()) + 1
    reps = [int(np.flatnonzero(orbits == o)[0]) for o in range(k)]
    darts: List[Dart] = []
    for o in range(k):
        for c in range(M.rank):
            target = int(orbits[M.adj[c][reps[o]]])
            if target == o:
                d = len(darts)
                darts.append(Dart(id=d, color=c, start=o, end=o, inv=d))
            elif o < target:
                d = len(darts)
                darts.append(Dart(id=d, color=c, start=o, end=target, inv=d + 1))
                darts.append(Dart(id=d + 1, color=c, start=target, end=o, inv=d))
    return Premaniplex(rank=M.rank, num_vertices=k, darts=tuple(darts))


def stg_voltages(M: Maniplex, aut: Optional[AutGroup] = None) -> Tuple[Premaniplex, VoltageAssignment]:
    """
    Symmetry type graph of M with voltages in its automorphism group.

    Automorphisms act on the flags of orbit 0, renumbered in increasing
    order. A dart of color ``c`` from orbit ``u`` to orbit ``v`` carries the
    automorphism sending the first flag of ``v`` to the ``c``-neighbour of the
    first flag of ``u``. The derived graph is isomorphic to M.

    Raises:
        ConstructionError: If some dart has no automorphism (aut is incomplete)
    """
    aut = aut or automorphisms(M)
    orbits = flag_orbits(M, aut)
    X = symmetry_type_graph(M, aut)
    reps = [int(np.flatnonzero(orbits == o)[0]) for o in range(X.num_vertices)]
    domain = np.flatnonzero(orbits == 0)
    index = np.full(M.num_flags, -1, dtype=np.int64)
    index[domain] = np.arange(domain.shape[0], dtype=np.int64)

    voltages: List[GroupElement] = []
    for dart in X.darts:
        sigma = aut.mapping(reps[dart.end], int(M.adj[dart.color][reps[dart.start]]))
        if sigma is None:
            raise ConstructionError(f"No automorphism for dart {dart.id} of color {dart.color}")
        voltages.append(GroupElement(index[sigma[domain]]))
    logger.debug("Symmetry type graph voltages", extra={"orbits": X.num_vertices, "degree": int(domain.shape[0])})
    return X, VoltageAssignment(tuple(voltages))


class OrbitBound(BaseModel):
    """Bounds on the number of flag orbits of an implicit derived maniplex."""
    lower: int
    upper: int
    status: str
    invariants: Dict[int, List[int]]


def _alternating_cycle(X: Premaniplex, xi: VoltageAssignment, vertex: int, colors: Tuple[int, int], limit: int) -> int:
    """Length of the alternating cycle through ``(vertex, 1)`` of the derived graph, or -1 past ``limit``."""
    start = GroupElement.identity(xi.degree)
    v, g = vertex, start
    for step in range(1, limit + 1):
        d = X.dart_at(v, colors[(step - 1) % 2])
        v, g = d.end, xi.of(d.id) * g
        if step % 2 == 0 and v == vertex and g == start:
            return step
    return -1


def derived_orbit_bound(X: Premaniplex, xi: VoltageAssignment, limit: int = 4096) -> OrbitBound:
    """
    Orbit bounds for a derived maniplex too large to build.

    The voltage group acts on the derived graph by automorphisms, so every
    orbit meets the fibre over some vertex: there are at most ``|V(X)|``
    orbits. Lengths of alternating cycles through ``(v, 1)`` are automorphism
    invariants; if they differ between two vertices, those fibres lie in
    different orbits.
    """
    invariants: Dict[int, List[int]] = {}
    for v in range(X.num_vertices):
        invariants[v] = [
            _alternating_cycle(X, xi, v, (i, j), limit)
            for i, j in combinations(range(X.rank), 2)
        ]
    distinct = {tuple(vals) for vals in invariants.values()}
    lower = len(distinct) if all(-1 not in vals for vals in invariants.values()) else 1
    status = "distinguished" if lower == X.num_vertices else "undetermined"
    logger.info("Orbit bound", extra={"lower": lower, "upper": X.num_vertices, "status": status})
    return OrbitBound(lower=max(lower, 1), upper=X.num_vertices, status=status, invariants=invariants)


def facet_permutation(M: Maniplex, facet_of: np.ndarray, perm: np.ndarray) -> np.ndarray:
    """Action of an automorphism on facets: ``F -> F sigma``."""
    # the smallest flag of every facet
    _, first = np.unique(facet_of, return_index=True)
    return facet_of[perm[first]]


def premaniplex_graph(X: Premaniplex) -> nx.MultiGraph:
    """One edge per dart pair; semi-edges become self-loops tagged ``semi``."""
    graph = nx.MultiGraph()
    labels = X.vertex_labels or tuple(str(v) for v in range(X.num_vertices))
    for v in range(X.num_vertices):
        graph.add_node(v, label=labels[v])
    for dart in X.darts:
        if dart.id <= dart.inv:
            graph.add_edge(dart.start, dart.end, color=dart.color, semi=dart.is_semi_edge)
    return graph


def to_dot(X: Premaniplex, name: str = "stg") -> str:
    """
    Graphviz DOT text of a premaniplex.

    Output depends only on X: nodes in id order, edges in dart order.
    """
    graph = premaniplex_graph(X)
    lines = [f"graph {_dot_id(name)} {{"]
    for v, data in graph.nodes(data=True):
        lines.append(f'  {v} [label="{data["label"]}"];')
    for a, b, data in graph.edges(data=True):
        attrs = f'label="{data["color"]}"'
        if data["semi"]:
            attrs += ', style="dashed", xlabel="semi"'
        lines.append(f"  {a} -- {b} [{attrs}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _dot_id(name: str) -> str:
    cleaned = "".join(ch if ch.isalnum() else "_" for ch in name)
    return cleaned if cleaned and not cleaned[0].isdigit() else f"g_{cleaned}"
