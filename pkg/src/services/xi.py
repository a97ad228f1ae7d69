"""
Voltage assignments on the two-vertex premaniplexes.

Voltages are colour-preserving monodromies of a base maniplex M restricted
to its white flags, together with the central involution ``s``. Darts of
colors below the rank of M get the covering voltages (white semi-edge
``r_i``, black semi-edge ``r0 r_i r0``, links ``r0 r_i`` and ``r_i r0``);
darts of the new top color get ``y = rho0 r0``, where ``rho0`` reflects
every facet of M across its base edge.
"""
from collections import deque
from dataclasses import dataclass
from typing import Iterable, List, Literal, Optional, Sequence, Tuple

import numpy as np
from aws_lambda_powertools import Logger

from src.models.config import ForgeSettings
from src.models.group import GroupElement
from src.models.maniplex import FlagColoring, Maniplex
from src.models.premaniplex import Dart, Premaniplex, VoltageAssignment
from src.services.constants import BLACK, MAIN_SEMI_COLORS, WHITE
from src.services.constructions import eta_knight, torus_map_44
from src.services.exceptions import ConstructionError, InfeasibleError, StructureError
from src.services.flagcore import i_faces, two_coloring, word_permutation
from src.services.utils import compose, compose_all, identity
from src.services.voltage import build_2nI

logger = Logger()

Variant = Literal["xi", "xiprime"]


def restrict_to_white(perm: np.ndarray, coloring: FlagColoring, s_bit: int = 0) -> GroupElement:
    """
    Restrict a colour-preserving flag permutation to the white flags.

    White flags are renumbered 0..W-1 in increasing order.

    Raises:
        StructureError: If ``perm`` sends a white flag to a black one
    """
    white = coloring.white_flags
    images = perm[white]
    if np.any(coloring.color[images] != WHITE):
        raise StructureError("Permutation does not preserve the flag coloring")
    index = np.full(perm.shape[0], -1, dtype=np.int64)
    index[white] = np.arange(white.shape[0], dtype=np.int64)
    return GroupElement(index[images], s_bit)


def covering_voltage(M: Maniplex, dart: Dart) -> np.ndarray:
    """
    Full flag permutation carried by a dart of color below ``M.rank``.

    Vertex 0 of the premaniplex is white and vertex 1 black.
    """
    r0 = M.adj[0]
    rc = M.adj[dart.color]
    if dart.color == 0:
        if dart.is_semi_edge:
            raise ConstructionError("Color 0 must be a link")
        return identity(M.num_flags)
    if dart.is_semi_edge:
        return rc if dart.start == WHITE else compose_all((r0, rc, r0), M.num_flags)
    if dart.start == WHITE:
        return compose(r0, rc)
    return compose(rc, r0)


def covering_voltages(M: Maniplex, semi_colors: Iterable[int]) -> Tuple[Premaniplex, FlagColoring, VoltageAssignment]:
    """
    Two-vertex premaniplex of rank ``M.rank`` with voltages whose derived
    graph is M again (for regular M).

    Raises:
        ConstructionError: If 0 is a semi-edge color or M cannot be colored
    """
    I = sorted(set(semi_colors))
    if 0 in I:
        raise ConstructionError("Color 0 must be a link")
    X = build_2nI(M.rank, I)
    flips = [c for c in range(M.rank) if c not in I]
    coloring = two_coloring(M, flips)
    if coloring is None:
        raise ConstructionError(f"Base maniplex does not cover the premaniplex: no coloring flipping {flips}")
    xi = VoltageAssignment(tuple(restrict_to_white(covering_voltage(M, d), coloring) for d in X.darts))
    return X, coloring, xi


def choose_base_flags(M: Maniplex, eta: np.ndarray, coloring: FlagColoring) -> np.ndarray:
    """
    Base flag of every facet.

    The facet of flag 0 uses flag 0. A facet reached by ``eta`` from a black
    flag of that facet uses the arriving flag. The other facet on the edge of
    flag 0 uses the flag ``0^(n-1)``; every remaining facet uses its
    smallest flag.

    Raises:
        ConstructionError: If two forced choices hit the same facet
    """
    facets = i_faces(M, M.rank - 1)
    base = np.full(len(facets), -1, dtype=np.int64)
    f0 = int(facets.face_of[0])
    base[f0] = 0
    for psi in facets.faces[f0].tolist():
        if coloring.color[psi] != BLACK:
            continue
        target = int(eta[psi])
        facet = int(facets.face_of[target])
        if base[facet] not in (-1, target):
            raise ConstructionError(f"Facet {facet} has two forced base flags")
        base[facet] = target
    across = int(M.adj[M.rank - 1][0])
    if base[facets.face_of[across]] == -1:
        base[facets.face_of[across]] = across
    for facet, flags in enumerate(facets.faces):
        if base[facet] == -1:
            base[facet] = int(flags.min())
    base.setflags(write=False)
    return base


def facet_reflection(M: Maniplex, base_flags: np.ndarray) -> np.ndarray:
    """
    The permutation acting on every facet as the reflection ``B -> B^0``
    of its base flag ``B``.

    Raises:
        ConstructionError: If some facet is not regular enough for it
    """
    n = M.rank
    colors = range(n - 1)
    mapping = np.full(M.num_flags, -1, dtype=np.int64)
    queue = deque()
    for flag in base_flags.tolist():
        mapping[flag] = M.adj[0][flag]
        queue.append(flag)
    while queue:
        flag = queue.popleft()
        for c in colors:
            nxt = int(M.adj[c][flag])
            if mapping[nxt] == -1:
                mapping[nxt] = M.adj[c][mapping[flag]]
                queue.append(nxt)
    if np.any(mapping < 0):
        raise ConstructionError("Some flags are in no facet with a base flag")
    for c in colors:
        if not np.array_equal(mapping[M.adj[c]], M.adj[c][mapping]):
            raise ConstructionError(f"Facet reflection does not commute with color {c}")
    if np.unique(mapping).shape[0] != M.num_flags:
        raise ConstructionError("Facet reflection is not a bijection")
    mapping.setflags(write=False)
    return mapping


def xi_assignment(
    X: Premaniplex,
    M: Maniplex,
    coloring: FlagColoring,
    y: np.ndarray,
    variant: Variant = "xi",
) -> VoltageAssignment:
    """
    Voltages on ``X`` (rank ``M.rank + 1``), restricted to white flags.

    The top color carries ``y``; the ``xiprime`` variant multiplies it by ``s``.

    Raises:
        ConstructionError: If 0 or the top color is a semi-edge color
    """
    n = M.rank
    if X.rank != n + 1:
        raise ConstructionError(f"Premaniplex of rank {X.rank} over a base of rank {n}")
    if X.dart_at(WHITE, 0).is_semi_edge or X.dart_at(WHITE, n).is_semi_edge:
        raise ConstructionError("Colors 0 and n must be links")
    if variant not in ("xi", "xiprime"):
        raise ConstructionError(f"Unknown variant {variant}")
    s_bit = 1 if variant == "xiprime" else 0
    voltages: List[GroupElement] = []
    for dart in X.darts:
        if dart.color == n:
            voltages.append(restrict_to_white(y, coloring, s_bit))
        else:
            voltages.append(restrict_to_white(covering_voltage(M, dart), coloring))
    return VoltageAssignment(tuple(voltages))


@dataclass(frozen=True, eq=False)
class Rank4Pipeline:
    """
    Everything the main construction needs, built once and shared.

    Attributes:
        base: Base maniplex M of rank n
        semi_colors: Semi-edge colors I of the premaniplex
        coloring: Coloring of M flipping the link colors below n
        eta: Involutory facet-separating monodromy
        facet_of: Facet of every flag
        base_flags: Base flag of every facet
        rho0: Facet reflection across the base edges
        y: ``rho0`` followed by ``r0``
        premaniplex: The two-vertex premaniplex of rank n + 1
        xi: Voltages with ``y`` on the top color
        xi_prime: Voltages with ``y s`` on the top color
    """
    base: Maniplex
    semi_colors: Tuple[int, ...]
    coloring: FlagColoring
    eta: np.ndarray
    facet_of: np.ndarray
    base_flags: np.ndarray
    rho0: np.ndarray
    y: np.ndarray
    premaniplex: Premaniplex
    xi: VoltageAssignment
    xi_prime: VoltageAssignment

    @property
    def n(self) -> int:
        """Rank of the base maniplex, also the top color of the premaniplex."""
        return self.base.rank

    @property
    def degree(self) -> int:
        return self.xi.degree

    def voltages(self, variant: Variant) -> VoltageAssignment:
        return self.xi_prime if variant == "xiprime" else self.xi

    def element(self, perm: np.ndarray, s_bit: int = 0) -> GroupElement:
        """A colour-preserving flag permutation as a voltage."""
        return restrict_to_white(perm, self.coloring, s_bit)

    def word(self, word: Sequence[int]) -> GroupElement:
        """The monodromy of a color word as a voltage."""
        return self.element(word_permutation(self.base, word))

    def conjugate_by_rho0(self, color: int) -> np.ndarray:
        """Full permutation ``rho0 r_c rho0``."""
        return compose_all((self.rho0, self.base.adj[color], self.rho0), self.base.num_flags)


def build_pipeline(M: Maniplex, eta: np.ndarray, semi_colors: Iterable[int]) -> Rank4Pipeline:
    """
    Assemble the construction over a base maniplex and a chosen ``eta``.

    Raises:
        ConstructionError: If 0 or n is a semi-edge color, or M cannot be
            colored compatibly with the semi-edge colors
    """
    n = M.rank
    I = tuple(sorted(set(semi_colors)))
    if 0 in I or n in I:
        raise ConstructionError(f"Colors 0 and {n} must be links, got I={list(I)}")
    X = build_2nI(n + 1, I)
    flips = [c for c in range(n) if c not in I]
    coloring = two_coloring(M, flips)
    if coloring is None:
        raise ConstructionError(f"Base maniplex does not cover the premaniplex: no coloring flipping {flips}")
    facet_of = i_faces(M, n - 1).face_of
    base_flags = choose_base_flags(M, eta, coloring)
    rho0 = facet_reflection(M, base_flags)
    y = compose(rho0, M.adj[0])
    y.setflags(write=False)
    pipeline = Rank4Pipeline(
        base=M,
        semi_colors=I,
        coloring=coloring,
        eta=eta,
        facet_of=facet_of,
        base_flags=base_flags,
        rho0=rho0,
        y=y,
        premaniplex=X,
        xi=xi_assignment(X, M, coloring, y, "xi"),
        xi_prime=xi_assignment(X, M, coloring, y, "xiprime"),
    )
    logger.info("Voltage construction assembled", extra={
        "rank": n + 1,
        "semi_colors": list(I),
        "base_flags": M.num_flags,
        "white_flags": pipeline.degree,
    })
    return pipeline


def build_rank4_pipeline(
    semi_colors: Iterable[int] = MAIN_SEMI_COLORS,
    settings: Optional[ForgeSettings] = None,
    s: int = 8,
) -> Rank4Pipeline:
    """The construction over {4,4}_(s,0) with the knight-move monodromy."""
    settings = settings or ForgeSettings()
    M = torus_map_44(s)
    if M.num_flags > settings.materialize_cap:
        raise InfeasibleError(
            f"Base map with {M.num_flags} flags exceeds the materialization cap",
            limit=settings.materialize_cap,
            required=M.num_flags,
        )
    return build_pipeline(M, eta_knight(M), semi_colors)


def check_y_edges(pipeline: Rank4Pipeline) -> List[int]:
    """
    Facets where ``y`` misbehaves on edges.

    In every facet with base flag ``B``, ``y`` must fix the flags on the
    base edge and swap the edges of ``B^1`` and ``B^010``.

    Returns:
        Facet ids where this fails; empty on success
    """
    M = pipeline.base
    r0, r1 = M.adj[0], M.adj[1]
    edge_of = i_faces(M, 1).face_of
    bad: List[int] = []
    for facet, B in enumerate(pipeline.base_flags.tolist()):
        on_base = [B, int(r0[B])]
        e0 = int(edge_of[r1[B]])
        e1 = int(edge_of[r0[r1[r0[B]]]])
        flags = np.flatnonzero(pipeline.facet_of == facet)
        fixed = all(int(pipeline.y[f]) == f for f in on_base)
        swapped = all(
            int(edge_of[pipeline.y[f]]) == (e1 if edge_of[f] == e0 else e0)
            for f in flags.tolist()
            if edge_of[f] in (e0, e1)
        )
        if not (fixed and swapped):
            bad.append(facet)
    return bad
