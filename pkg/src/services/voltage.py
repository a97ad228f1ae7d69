"""
Premaniplexes, path voltages and derived graphs.

A path ``W = d1 d2 ... dk`` has voltage ``xi(dk) * ... * xi(d1)``: walking
``d`` moves the derived flag ``(x, g)`` to ``(y, xi(d) * g)``. Voltages of
paths from ``a`` to ``b`` inside a color set therefore form the left coset
``xi(P) * H_a``, with ``P`` any such path and ``H_a`` the group of closed
path voltages at ``a``.

Typical usage:
    X = build_2nI(4, {1, 2})
    H = restricted_voltage_group(X, xi, 0, [0, 1, 2])
    coset = restricted_voltage_coset(X, xi, 0, 1, [0, 2, 3])
"""
import random
from collections import deque
from itertools import combinations
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

import numpy as np
from aws_lambda_powertools import Logger

from src.models.config import ForgeSettings
from src.models.group import GroupElement, product
from src.models.maniplex import Maniplex
from src.models.premaniplex import Dart, Path, Premaniplex, VoltageAssignment
from src.models.report import CheckResult, ManiplexCheckReport
from src.services.constants import BLACK, WHITE
from src.services.exceptions import (
    ColorRangeError,
    ConstructionError,
    InfeasibleError,
    StructureError,
)
from src.services.flagcore import validate_maniplex
from src.services.permtools import Coset, PermGroup

logger = Logger()


def build_2nI(n: int, I: Iterable[int]) -> Premaniplex:
    """
    Two-vertex premaniplex with semi-edges of the colors in ``I``.

    Vertex 0 is white and vertex 1 is black. The dart of color ``c`` at
    vertex ``v`` has id ``2c + v``; colors outside ``I`` are links between
    the two vertices.

    Args:
        n: Rank (number of colors)
        I: Colors of the semi-edges

    Returns:
        Premaniplex with vertex labels "white", "black"

    Raises:
        ConstructionError: If ``I`` holds every color
        ColorRangeError: If a color of ``I`` is out of range
    """
    semi = set(I)
    if any(not 0 <= c < n for c in semi):
        raise ColorRangeError(f"Semi-edge colors {sorted(semi)} outside rank {n}")
    if len(semi) == n:
        raise ConstructionError("All colors are semi-edges; that is the one-vertex premaniplex")
    darts: List[Dart] = []
    for c in range(n):
        for v in (WHITE, BLACK):
            d = 2 * c + v
            if c in semi:
                darts.append(Dart(id=d, color=c, start=v, end=v, inv=d))
            else:
                darts.append(Dart(id=d, color=c, start=v, end=1 - v, inv=d ^ 1))
    return Premaniplex(rank=n, num_vertices=2, darts=tuple(darts), vertex_labels=("white", "black"))


def one_vertex_premaniplex(n: int) -> Premaniplex:
    """The premaniplex with one vertex and a semi-edge of every color."""
    darts = tuple(Dart(id=c, color=c, start=0, end=0, inv=c) for c in range(n))
    return Premaniplex(rank=n, num_vertices=1, darts=darts)


def check_premaniplex(X: Premaniplex) -> List[str]:
    """
    Problems with the premaniplex axioms beyond the local dart structure.

    Returns:
        Descriptions of open alternating 4-paths of non-consecutive colors
        and of disconnectedness; empty when X is a premaniplex
    """
    problems: List[str] = []
    for i, j in combinations(range(X.rank), 2):
        if j - i < 2:
            continue
        for v in range(X.num_vertices):
            end = v
            for c in (i, j, i, j):
                end = X.step(end, c)
            if end != v:
                problems.append(f"Alternating ({i},{j}) path from vertex {v} is open")
    reached = tree_paths(X, 0, range(X.rank))
    if len(reached) != X.num_vertices:
        problems.append(f"Only {len(reached)} of {X.num_vertices} vertices reachable from vertex 0")
    return problems


def path_end(X: Premaniplex, W: Path) -> int:
    """
    End vertex of a path.

    Raises:
        StructureError: If consecutive darts do not compose
    """
    vertex = W.start
    for dart_id in W.darts:
        if not 0 <= dart_id < len(X.darts):
            raise StructureError(f"Unknown dart {dart_id}")
        dart = X.darts[dart_id]
        if dart.start != vertex:
            raise StructureError(f"Dart {dart_id} starts at {dart.start}, path is at {vertex}")
        vertex = dart.end
    return vertex


def reduce_path(X: Premaniplex, W: Path) -> Path:
    """Cancel every adjacent ``d d^-1`` pair."""
    path_end(X, W)
    stack: List[int] = []
    for dart_id in W.darts:
        if stack and X.darts[stack[-1]].inv == dart_id:
            stack.pop()
        else:
            stack.append(dart_id)
    return Path(W.start, tuple(stack))


def inverse_path(X: Premaniplex, W: Path) -> Path:
    """The reverse path ``dk^-1 ... d1^-1``."""
    end = path_end(X, W)
    return Path(end, tuple(X.darts[d].inv for d in reversed(W.darts)))


def concat(X: Premaniplex, first: Path, second: Path) -> Path:
    """Walk ``first`` then ``second``."""
    if path_end(X, first) != second.start:
        raise StructureError("Paths do not compose")
    return Path(first.start, first.darts + second.darts)


def path_from_colors(X: Premaniplex, start: int, colors: Sequence[int]) -> Path:
    """The unique path from ``start`` following ``colors``."""
    darts: List[int] = []
    vertex = start
    for c in colors:
        dart = X.dart_at(vertex, c)
        darts.append(dart.id)
        vertex = dart.end
    return Path(start, tuple(darts))


def path_voltage(X: Premaniplex, xi: VoltageAssignment, W: Path) -> GroupElement:
    """
    Voltage ``xi(dk) * ... * xi(d1)`` of a path.

    Raises:
        StructureError: If the path does not compose
    """
    path_end(X, W)
    return product([xi.of(d) for d in reversed(W.darts)], xi.degree)


def _restricted(colors: Iterable[int], rank: int) -> List[int]:
    allowed = sorted(set(colors))
    for c in allowed:
        if not 0 <= c < rank:
            raise ColorRangeError(f"Color {c} out of range for rank {rank}")
    return allowed


def tree_paths(X: Premaniplex, base: int, colors: Iterable[int]) -> Dict[int, Path]:
    """
    BFS spanning tree of the component of ``base`` using ``colors``.

    Vertices are scanned in BFS order and darts by ascending color.

    Returns:
        Tree path from ``base`` to every reached vertex
    """
    allowed = _restricted(colors, X.rank)
    paths: Dict[int, Path] = {base: Path(base)}
    queue = deque([base])
    while queue:
        v = queue.popleft()
        for c in allowed:
            dart = X.dart_at(v, c)
            if dart.end not in paths:
                paths[dart.end] = Path(base, paths[v].darts + (dart.id,))
                queue.append(dart.end)
    return paths


def fundamental_generators(X: Premaniplex, base: int, colors: Iterable[int]) -> List[Path]:
    """
    Generators ``C_d`` of the closed paths at ``base`` inside ``colors``.

    One generator per edge outside the spanning tree: the tree path to the
    start of ``d``, then ``d``, then the tree path back from its end.
    """
    allowed = _restricted(colors, X.rank)
    paths = tree_paths(X, base, allowed)
    tree_darts: Set[int] = set()
    for path in paths.values():
        if path.darts:
            last = X.darts[path.darts[-1]]
            tree_darts.update((last.id, last.inv))
    generators: List[Path] = []
    seen: Set[int] = set()
    for v in sorted(paths):
        for c in allowed:
            dart = X.dart_at(v, c)
            if dart.id in tree_darts or dart.id in seen:
                continue
            seen.update((dart.id, dart.inv))
            back = inverse_path(X, paths[dart.end])
            generators.append(Path(base, paths[v].darts + (dart.id,) + back.darts))
    return generators


def restricted_voltage_group(
    X: Premaniplex,
    xi: VoltageAssignment,
    a: int,
    colors: Iterable[int],
) -> PermGroup:
    """Group of voltages of closed paths at ``a`` using only ``colors``."""
    generators = [path_voltage(X, xi, W) for W in fundamental_generators(X, a, colors)]
    return PermGroup(generators, xi.degree)


def restricted_voltage_coset(
    X: Premaniplex,
    xi: VoltageAssignment,
    a: int,
    b: int,
    colors: Iterable[int],
) -> Optional[Coset]:
    """
    Voltages of paths from ``a`` to ``b`` using only ``colors``.

    Returns:
        Left coset ``xi(P) * H_a``, or None when no such path exists
    """
    allowed = _restricted(colors, X.rank)
    paths = tree_paths(X, a, allowed)
    if b not in paths:
        return None
    rep = path_voltage(X, xi, paths[b])
    return Coset(rep=rep, subgroup=restricted_voltage_group(X, xi, a, allowed))


def normalize_gauge(X: Premaniplex, xi: VoltageAssignment, base: int = 0) -> Tuple[VoltageAssignment, bool]:
    """
    Make the voltages on a spanning tree trivial.

    Every dart ``d: x -> y`` gets ``t_y^-1 * xi(d) * t_x`` with ``t_v`` the
    voltage of the tree path to ``v``. Closed path voltages at ``base`` do
    not change.

    Returns:
        The normalized assignment and whether any voltage changed
    """
    paths = tree_paths(X, base, range(X.rank))
    tau = {v: path_voltage(X, xi, W) for v, W in paths.items()}
    changed = False
    voltages: List[GroupElement] = []
    for dart in X.darts:
        if dart.start not in tau:
            voltages.append(xi.of(dart.id))
            continue
        new = tau[dart.end].inverse() * xi.of(dart.id) * tau[dart.start]
        changed = changed or new != xi.of(dart.id)
        voltages.append(new)
    return VoltageAssignment(tuple(voltages)), changed


def check_derived_is_maniplex(
    X: Premaniplex,
    xi: VoltageAssignment,
    ambient: Optional[PermGroup] = None,
) -> ManiplexCheckReport:
    """
    Decide whether the derived graph is a maniplex.

    After normalizing to a trivial spanning tree, the derived graph is a
    maniplex exactly when the voltages generate the whole group, every
    semi-edge voltage has order two, parallel darts carry distinct voltages
    and alternating 4-paths of non-consecutive colors have trivial voltage.

    Args:
        X: Premaniplex
        xi: Voltage assignment
        ambient: Voltage group; the group generated by ``xi`` by default

    Returns:
        ManiplexCheckReport with one result per condition
    """
    xi.check_inverses(X)
    normalized, changed = normalize_gauge(X, xi)
    ambient = ambient or PermGroup(list(xi.voltages), xi.degree)
    generated = PermGroup(list(normalized.voltages), xi.degree)
    generation = CheckResult(
        name="generation",
        passed=generated.order() == ambient.order() and ambient.contains_group(generated),
        detail=f"generated order {generated.order()}, group order {ambient.order()}",
    )

    semi_failures = [
        d.id for d in X.darts if d.is_semi_edge and normalized.of(d.id).order() != 2
    ]
    semi_edge_order = CheckResult(
        name="semi_edge_order",
        passed=not semi_failures,
        detail=f"darts {semi_failures}" if semi_failures else None,
    )

    parallel: List[Tuple[int, int]] = []
    for d1, d2 in combinations(X.darts, 2):
        if d1.start == d2.start and d1.end == d2.end and normalized.of(d1.id) == normalized.of(d2.id):
            parallel.append((d1.id, d2.id))
    parallel_darts = CheckResult(
        name="parallel_darts",
        passed=not parallel,
        detail=f"equal voltages on {parallel}" if parallel else None,
    )

    open_paths: List[str] = []
    for i, j in combinations(range(X.rank), 2):
        if j - i < 2:
            continue
        for v in range(X.num_vertices):
            W = path_from_colors(X, v, (i, j, i, j))
            if path_end(X, W) != v or not path_voltage(X, normalized, W).is_identity():
                open_paths.append(f"({i},{j}) at {v}")
    alternating_paths = CheckResult(
        name="alternating_paths",
        passed=not open_paths,
        detail=", ".join(open_paths) if open_paths else None,
    )

    report = ManiplexCheckReport(
        generation=generation,
        semi_edge_order=semi_edge_order,
        parallel_darts=parallel_darts,
        alternating_paths=alternating_paths,
        gauge_normalized=changed,
    )
    logger.debug("Derived maniplex check", extra={
        "vertices": X.num_vertices,
        "is_maniplex": report.is_maniplex,
        "gauge_normalized": changed,
    })
    return report


def derived_graph(
    X: Premaniplex,
    xi: VoltageAssignment,
    settings: Optional[ForgeSettings] = None,
) -> Maniplex:
    """
    Build the derived graph explicitly.

    Flag ``(x, g)`` gets id ``x * |G| + index(g)``, with group elements in
    sympy's enumeration order starting at the identity.

    Raises:
        InfeasibleError: If the group or the flag count exceeds a cap
        ConstructionError: If the result is not a maniplex
    """
    settings = settings or ForgeSettings()
    xi.check_inverses(X)
    group = PermGroup(list(xi.voltages), xi.degree)
    order = group.order()
    if order * X.num_vertices > settings.materialize_cap:
        raise InfeasibleError(
            f"Derived graph would have {order * X.num_vertices} flags",
            limit=settings.materialize_cap,
            required=order * X.num_vertices,
        )
    elements = list(group.elements(settings.enumeration_cap))
    perms = np.stack([g.perm for g in elements])
    s_bits = np.array([g.s_bit for g in elements], dtype=np.int64)
    index = {g.key(): k for k, g in enumerate(elements)}

    adj = [np.empty(order * X.num_vertices, dtype=np.int64) for _ in range(X.rank)]
    for dart in X.darts:
        voltage = xi.of(dart.id)
        # rows of xi(d) * g, one per g
        moved = np.ascontiguousarray(perms[:, voltage.perm])
        moved_s = s_bits ^ voltage.s_bit
        targets = np.fromiter(
            (index[moved[k].tobytes() + bytes([int(moved_s[k])])] for k in range(order)),
            dtype=np.int64,
            count=order,
        )
        sources = dart.start * order + np.arange(order)
        adj[dart.color][sources] = dart.end * order + targets

    M = Maniplex(tuple(adj))
    report = validate_maniplex(M)
    if not report.is_valid:
        raise ConstructionError(f"Derived graph is not a maniplex: {sorted(k.value for k in report.kinds())}")
    logger.info("Derived graph built", extra={"num_flags": M.num_flags, "rank": M.rank, "group_order": order})
    return M


def sample_path(
    X: Premaniplex,
    rng: random.Random,
    start: int,
    colors: Sequence[int],
    max_length: int,
) -> Path:
    """
    Random reduced path inside ``colors``.

    The length is uniform in ``[0, max_length]`` and no color repeats
    immediately, so no ``d d^-1`` occurs.
    """
    allowed = _restricted(colors, X.rank)
    length = rng.randint(0, max_length)
    darts: List[int] = []
    vertex = start
    previous = -1
    for _ in range(length):
        choices = [c for c in allowed if c != previous]
        if not choices:
            break
        c = rng.choice(choices)
        dart = X.dart_at(vertex, c)
        darts.append(dart.id)
        vertex = dart.end
        previous = c
    return Path(start, tuple(darts))


def path_colors(X: Premaniplex, W: Path) -> List[int]:
    """Colors of the darts of a path, in walking order."""
    return [X.darts[d].color for d in W.darts]


def one_vertex_voltages(M: Maniplex) -> VoltageAssignment:
    """Voltages ``r_i`` on the one-vertex premaniplex of rank ``M.rank``."""
    return VoltageAssignment(tuple(GroupElement(a) for a in M.adj))
