"""
The doubling construction and the objects built on it.

Flags of the doubled maniplex are pairs ``(phi, x)``: a base flag and a
facet vector ``x``, an integer bitmask over the base facets. Colors below
the base rank act on ``phi``; the new top color toggles the bit of the
facet of ``phi``. Flag ids are ``x * N + phi`` with ``N`` base flags, so
nothing has to be materialized to walk the graph.

Typical usage:
    H = hat2(torus_map_44(4))
    S = find_s3(H.base)
    eta = eta_from_s(H, S)
    table = base_edges(H, S)
    reflection = rho0_hat(H, table)
"""
from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from aws_lambda_powertools import Logger

from src.models.config import ForgeSettings
from src.models.maniplex import Maniplex
from src.services.exceptions import ConstructionError, InfeasibleError
from src.services.flagcore import i_faces, word_between, word_permutation
from src.services.poset import FacePoset, build_poset, closure_mask
from src.services.symmetry import AutGroup, automorphisms, facet_permutation, is_automorphism

logger = Logger()

# Facet vectors are stored in int64 arrays
MAX_FACETS = 62

Pair = Tuple[int, int]


@dataclass(frozen=True, eq=False)
class Hat2Maniplex:
    """
    Implicit doubled maniplex over ``base``.

    Attributes:
        base: The base maniplex M
        facet_of: Base facet of every base flag
        num_facets: Number of base facets
    """
    base: Maniplex
    facet_of: np.ndarray
    num_facets: int

    @property
    def rank(self) -> int:
        return self.base.rank + 1

    @property
    def base_flags(self) -> int:
        return self.base.num_flags

    @property
    def num_flags(self) -> int:
        return self.base.num_flags << self.num_facets

    @property
    def facet_count(self) -> int:
        """Facets of the doubled maniplex: one per facet vector."""
        return 1 << self.num_facets

    def flag_id(self, phi: int, x: int) -> int:
        return x * self.base_flags + phi

    def decode(self, flag: int) -> Pair:
        """``(phi, x)`` of a flag id."""
        x, phi = divmod(flag, self.base_flags)
        return phi, x

    def step_pair(self, phi: int, x: int, color: int) -> Pair:
        """The ``color``-adjacent flag of ``(phi, x)``."""
        if color < self.base.rank:
            return int(self.base.adj[color][phi]), x
        if color == self.base.rank:
            return phi, x ^ (1 << int(self.facet_of[phi]))
        raise ConstructionError(f"Color {color} out of range for rank {self.rank}")

    def step(self, flag: int, color: int) -> int:
        phi, x = self.step_pair(*self.decode(flag), color)
        return self.flag_id(phi, x)

    def apply_word(self, word: Sequence[int], phi: int, x: int) -> Pair:
        """Right action of a color word on ``(phi, x)``."""
        for color in word:
            phi, x = self.step_pair(phi, x, color)
        return phi, x

    def materialize(self, cap: int) -> Maniplex:
        """
        Explicit flag graph.

        Raises:
            InfeasibleError: If the flag count exceeds ``cap``
        """
        total = self.num_flags
        if total > cap:
            raise InfeasibleError(
                f"Doubled maniplex has {total} flags, cap is {cap}",
                limit=cap,
                required=total,
            )
        N = self.base_flags
        ids = np.arange(total, dtype=np.int64)
        x, phi = np.divmod(ids, N)
        adj = [x * N + images[phi] for images in self.base.adj]
        adj.append((x ^ (np.int64(1) << self.facet_of[phi])) * N + phi)
        M = Maniplex(tuple(adj))
        logger.debug("Doubled maniplex materialized", extra={"num_flags": total, "rank": M.rank})
        return M


def hat2(
    M: Maniplex,
    materialize: bool = False,
    settings: Optional[ForgeSettings] = None,
) -> Union[Hat2Maniplex, Maniplex]:
    """
    Double a maniplex.

    Args:
        M: Base maniplex
        materialize: Return an explicit Maniplex instead of the implicit form
        settings: Supplies the materialization cap

    Raises:
        ConstructionError: If M has more facets than a facet vector holds
        InfeasibleError: If materializing exceeds the cap
    """
    facets = i_faces(M, M.rank - 1)
    if len(facets) > MAX_FACETS:
        raise ConstructionError(f"{len(facets)} facets exceed the facet vector width {MAX_FACETS}")
    H = Hat2Maniplex(base=M, facet_of=facets.face_of, num_facets=len(facets))
    logger.info("Doubled maniplex", extra={
        "base_flags": M.num_flags,
        "base_facets": len(facets),
        "num_flags": H.num_flags,
    })
    if materialize:
        settings = settings or ForgeSettings()
        return H.materialize(settings.materialize_cap)
    return H


def _bits(mask: int) -> List[int]:
    return [i for i in range(mask.bit_length()) if mask >> i & 1]


def mask_of(facets: Iterable[int]) -> int:
    """Facet vector with the given support."""
    mask = 0
    for f in facets:
        mask |= 1 << int(f)
    return mask


def permute_mask(mask: int, facet_perm: np.ndarray) -> int:
    """Move every bit ``F`` of ``mask`` to ``facet_perm[F]``."""
    return mask_of(int(facet_perm[f]) for f in _bits(mask))


@dataclass(frozen=True, eq=False)
class Hat2Map:
    """
    ``(phi, x) -> (sigma(phi), sigma(x) + shift)``.

    Every automorphism of the doubled maniplex over a regular base has this
    form: a lifted base automorphism followed by a translation.
    """
    sigma: np.ndarray
    facet_perm: np.ndarray
    shift: int = 0

    def apply(self, phi: int, x: int) -> Pair:
        return int(self.sigma[phi]), permute_mask(x, self.facet_perm) ^ self.shift

    def permutation(self, H: Hat2Maniplex) -> np.ndarray:
        """Image array on all flags; only for materializable instances."""
        N = H.base_flags
        ids = np.arange(H.num_flags, dtype=np.int64)
        x, phi = np.divmod(ids, N)
        bits = (x[:, None] >> np.arange(H.num_facets)) & 1
        moved = (bits << self.facet_perm[None, :]).sum(axis=1) ^ self.shift
        return moved * N + self.sigma[phi]


def lift_automorphism(H: Hat2Maniplex, sigma: np.ndarray) -> Hat2Map:
    """
    Lift ``sigma`` in Aut(M): ``(phi, x) -> (phi sigma, sigma^-1 x)``.

    The support of the new vector is the old support moved by ``sigma``.

    Raises:
        ConstructionError: If ``sigma`` is not an automorphism of the base
    """
    if not is_automorphism(H.base, sigma):
        raise ConstructionError("Permutation is not an automorphism of the base maniplex")
    return Hat2Map(sigma=sigma, facet_perm=facet_permutation(H.base, H.facet_of, sigma))


def lift_translation(H: Hat2Maniplex, y: int) -> Hat2Map:
    """Translation ``T_y: (phi, x) -> (phi, x + y)``."""
    return Hat2Map(
        sigma=np.arange(H.base_flags, dtype=np.int64),
        facet_perm=np.arange(H.num_facets, dtype=np.int64),
        shift=y,
    )


def _facet_perms(M: Maniplex, aut: AutGroup) -> np.ndarray:
    facet_of = i_faces(M, M.rank - 1).face_of
    perms = [facet_permutation(M, facet_of, p) for p in aut.non_identity()]
    if not perms:
        return np.empty((0, int(facet_of.max()) + 1), dtype=np.int64)
    return np.stack(perms)


def _face_closures(P: FacePoset) -> np.ndarray:
    """Closure masks of the proper faces, ranks 0 to n-1."""
    return np.unique(np.array([closure_mask(P, f) for f in P.proper_faces()], dtype=np.int64))


def _spread(masks: np.ndarray, closures: np.ndarray) -> np.ndarray:
    """For every mask: not inside the union of any two closures."""
    unions = np.unique(closures[:, None] | closures[None, :])
    return ((masks[:, None] & ~unions[None, :]) != 0).all(axis=1)


def _asymmetric(masks: np.ndarray, members: np.ndarray, facet_perms: np.ndarray) -> np.ndarray:
    """For every mask: moved by every non-identity automorphism."""
    if facet_perms.shape[0] == 0:
        return np.ones(masks.shape[0], dtype=bool)
    units = np.int64(1) << facet_perms
    images = units[:, members].sum(axis=2)
    return ~(images == masks[None, :]).any(axis=0)


def find_s3(
    M: Maniplex,
    aut: Optional[AutGroup] = None,
    spread: bool = True,
) -> Optional[Tuple[int, ...]]:
    """
    Smallest facet set moved by every non-trivial automorphism.

    Non-empty candidates are tried by size, then in lexicographic order of
    facet ids.
    With ``spread`` the set must also avoid lying inside the closures of any
    two proper faces.

    Returns:
        Sorted facet ids, or None when no subset qualifies
    """
    aut = aut or automorphisms(M)
    facet_perms = _facet_perms(M, aut)
    num_facets = facet_perms.shape[1]
    if num_facets > MAX_FACETS:
        raise ConstructionError(f"{num_facets} facets exceed the facet vector width {MAX_FACETS}")
    closures = _face_closures(build_poset(M)) if spread else None
    for size in range(1, num_facets + 1):
        members = np.array(list(combinations(range(num_facets), size)), dtype=np.int64).reshape(-1, size)
        masks = (np.int64(1) << members).sum(axis=1)
        ok = _asymmetric(masks, members, facet_perms)
        if closures is not None:
            ok &= _spread(masks, closures)
        hits = np.flatnonzero(ok)
        if hits.size:
            found = tuple(int(f) for f in members[hits[0]])
            logger.info("Asymmetric facet set found", extra={"facets": list(found), "size": size})
            return found
    logger.info("No asymmetric facet set", extra={"num_facets": num_facets})
    return None


@dataclass(frozen=True)
class FacetSetCheck:
    """Outcome of the two defining checks of an asymmetric facet set."""
    asymmetric: bool
    spread: bool

    @property
    def passed(self) -> bool:
        return self.asymmetric and self.spread


def verify_s3(M: Maniplex, S: Sequence[int], aut: Optional[AutGroup] = None) -> FacetSetCheck:
    """Check ``S`` against every automorphism and every pair of proper faces."""
    aut = aut or automorphisms(M)
    members = np.array([sorted(S)], dtype=np.int64)
    masks = np.array([mask_of(S)], dtype=np.int64)
    closures = _face_closures(build_poset(M))
    return FacetSetCheck(
        asymmetric=bool(_asymmetric(masks, members, _facet_perms(M, aut))[0]),
        spread=bool(_spread(masks, closures)[0]),
    )


def hat_S(S: Sequence[int]) -> Tuple[int, ...]:
    """
    Facet set of the doubled maniplex built from ``S``.

    Facets of the doubled maniplex are facet vectors: the zero vector and
    the unit vectors of the facets in ``S``.
    """
    return tuple(sorted({0} | {1 << int(f) for f in S}))


def check_hat_s_asymmetric(H: Hat2Maniplex, S: Sequence[int], aut: Optional[AutGroup] = None) -> bool:
    """
    True if ``hat_S(S)`` is moved by every non-trivial automorphism of H.

    Requires a regular base: automorphisms of H are then the lifted base
    automorphisms followed by translations, and a map fixing the set must
    send the zero vector into it, so only translations by its members need
    checking.
    """
    aut = aut or automorphisms(H.base)
    if aut.order() != H.base_flags:
        raise ConstructionError("Base maniplex is not regular")
    hat = set(hat_S(S))
    identity = np.arange(H.base_flags)
    for sigma in aut.perms:
        facet_perm = facet_permutation(H.base, H.facet_of, sigma)
        moved = {permute_mask(x, facet_perm) for x in hat}
        for y in hat:
            if y == 0 and np.array_equal(sigma, identity):
                continue
            if {m ^ y for m in moved} == hat:
                return False
    return True


def check_hat_s_spread(H: Hat2Maniplex, S: Sequence[int]) -> bool:
    """
    True if ``hat_S(S)`` lies inside the closures of no two proper faces of H.

    Faces of H are classes ``(F, x)`` and their closure is every ``x'``
    that agrees with ``x`` off the closure of ``F``. A face whose closure
    meets the set can be represented with ``x`` in the set, so those
    representatives cover every case.
    """
    P = build_poset(H.base)
    hat = np.array(hat_S(S), dtype=np.int64)
    full = (1 << hat.shape[0]) - 1
    weights = np.int64(1) << np.arange(hat.shape[0], dtype=np.int64)
    closures = [closure_mask(P, f) for f in P.proper_faces()] + [0]
    rows = []
    for cm in closures:
        for x in hat.tolist():
            inside = ((hat ^ x) & ~np.int64(cm)) == 0
            rows.append(int((inside * weights).sum()))
    covers = np.unique(np.array(rows, dtype=np.int64))
    return not bool(((covers[:, None] | covers[None, :]) == full).any())


@dataclass(frozen=True, eq=False)
class FacetShift:
    """Flag permutation ``(phi, x) -> (phi, x + shifts[phi])``."""
    shifts: np.ndarray

    def apply(self, phi: int, x: int) -> Pair:
        return phi, x ^ int(self.shifts[phi])

    def permutation(self, H: Hat2Maniplex) -> np.ndarray:
        N = H.base_flags
        ids = np.arange(H.num_flags, dtype=np.int64)
        x, phi = np.divmod(ids, N)
        return (x ^ self.shifts[phi]) * N + phi

    def separates_base_facet(self) -> bool:
        """Flags of the zero facet land in pairwise distinct facets."""
        return np.unique(self.shifts).shape[0] == self.shifts.shape[0]


def eta_from_s(H: Hat2Maniplex, S: Sequence[int], aut: Optional[AutGroup] = None) -> FacetShift:
    """
    The involutory monodromy that adds a copy of ``S`` to the facet vector.

    ``(psi, x) -> (psi, x + S gamma)`` where ``gamma`` is the automorphism of
    the regular base sending flag 0 to ``psi``.

    Raises:
        ConstructionError: If the base is not regular or ``S`` is fixed by a
            non-trivial automorphism
    """
    aut = aut or automorphisms(H.base)
    if aut.order() != H.base_flags:
        raise ConstructionError("Base maniplex is not regular")
    members = np.array([sorted(S)], dtype=np.int64)
    if not _asymmetric(np.array([mask_of(S)], dtype=np.int64), members, _facet_perms(H.base, aut))[0]:
        raise ConstructionError(f"Facet set {sorted(S)} is fixed by a non-trivial automorphism")
    shifts = np.zeros(H.base_flags, dtype=np.int64)
    for sigma in aut.perms:
        facet_perm = facet_permutation(H.base, H.facet_of, sigma)
        shifts[int(sigma[0])] = mask_of(int(facet_perm[f]) for f in S)
    shifts.setflags(write=False)
    eta = FacetShift(shifts)
    logger.info("Facet-shift monodromy built", extra={
        "base_flags": H.base_flags,
        "separating": eta.separates_base_facet(),
    })
    return eta


def eta_definitional(H: Hat2Maniplex, S: Sequence[int]) -> FacetShift:
    """
    Same monodromy from words: ``x + sum of the facets of psi w_F`` for ``F`` in ``S``,
    with ``w_F`` a word taking flag 0 into ``F``.
    """
    shifts = np.zeros(H.base_flags, dtype=np.int64)
    for f in S:
        target = int(np.flatnonzero(H.facet_of == f)[0])
        word = word_between(H.base, 0, target)
        if word is None:
            raise ConstructionError(f"Facet {f} is unreachable from flag 0")
        images = word_permutation(H.base, word)
        shifts ^= np.int64(1) << H.facet_of[images]
    shifts.setflags(write=False)
    return FacetShift(shifts)


@dataclass(eq=False)
class BaseEdgeTable:
    """
    Base flag of every facet of the doubled maniplex.

    Facet ``x`` uses the base flag ``0 gamma`` when the support of ``x`` is
    the copy ``S gamma`` of the previous asymmetric set, and flag 0
    otherwise. Its base edge is the edge of that flag.
    """
    H: Hat2Maniplex
    S: Tuple[int, ...]
    copies: Dict[int, np.ndarray]
    edge_of: np.ndarray
    _reflections: Dict[int, np.ndarray] = field(default_factory=dict, repr=False)

    def gamma(self, x: int) -> Optional[np.ndarray]:
        """Automorphism making the support of ``x`` a copy of S, if any."""
        return self.copies.get(x)

    def base_flag(self, x: int) -> int:
        """Base flag (in M) of facet ``x``."""
        gamma = self.copies.get(x)
        return 0 if gamma is None else int(gamma[0])

    def base_edge(self, x: int) -> int:
        """Edge id (in M) of the base edge of facet ``x``."""
        return int(self.edge_of[self.base_flag(x)])

    def is_copy(self, x: int) -> bool:
        return x in self.copies


def base_edges(H: Hat2Maniplex, S: Sequence[int], aut: Optional[AutGroup] = None) -> BaseEdgeTable:
    """
    Build the base edge table.

    Raises:
        ConstructionError: If two automorphisms give the same copy of S
    """
    aut = aut or automorphisms(H.base)
    copies: Dict[int, np.ndarray] = {}
    for sigma in aut.perms:
        facet_perm = facet_permutation(H.base, H.facet_of, sigma)
        key = mask_of(int(facet_perm[f]) for f in S)
        if key in copies:
            raise ConstructionError(f"Facet set {sorted(S)} has two automorphisms with the same image")
        copies[key] = sigma
    edges = i_faces(H.base, 1)
    logger.debug("Base edge table", extra={"copies": len(copies), "base_edge": int(edges.face_of[0])})
    return BaseEdgeTable(H=H, S=tuple(sorted(S)), copies=copies, edge_of=edges.face_of)


def forced_choices_agree(table: BaseEdgeTable, eta: FacetShift) -> bool:
    """
    True if every facet reached from the zero facet by ``eta`` has the
    arriving flag as its base flag.
    """
    return all(
        table.base_flag(int(eta.shifts[psi])) == psi for psi in range(table.H.base_flags)
    )


@dataclass(eq=False)
class FacetReflection:
    """Per-facet reflection of the doubled maniplex across the base edge."""
    table: BaseEdgeTable
    aut: AutGroup
    _cache: Dict[int, np.ndarray] = field(default_factory=dict, repr=False)

    def reflection(self, base_flag: int) -> np.ndarray:
        """Automorphism of M with ``B -> B^0``."""
        if base_flag not in self._cache:
            target = int(self.table.H.base.adj[0][base_flag])
            sigma = self.aut.mapping(base_flag, target)
            if sigma is None:
                raise ConstructionError(f"No reflection sends flag {base_flag} to {target}")
            self._cache[base_flag] = sigma
        return self._cache[base_flag]

    def apply(self, phi: int, x: int) -> Pair:
        return int(self.reflection(self.table.base_flag(x))[phi]), x


def rho0_hat(H: Hat2Maniplex, table: BaseEdgeTable, aut: Optional[AutGroup] = None) -> FacetReflection:
    """
    Reflection of every facet fixing all faces of its base flag but the vertex.

    Raises:
        ConstructionError: If the base is not regular
    """
    aut = aut or automorphisms(H.base)
    if aut.order() != H.base_flags:
        raise ConstructionError("Facets are not regular")
    return FacetReflection(table=table, aut=aut)
