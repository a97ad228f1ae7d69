"""
Face posets of maniplexes and the direct polytopality oracle.

Faces are ``(rank, index)`` pairs with ranks -1..n; ``(-1, 0)`` is the least
face and ``(n, 0)`` the greatest. Incidence follows the flag graph: an i-face
and a j-face are incident when they share a flag.
"""
from dataclasses import dataclass, field
from itertools import combinations
from typing import Any, Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple

import numpy as np
from aws_lambda_powertools import Logger

from src.models.config import ForgeSettings
from src.models.maniplex import Maniplex
from src.models.report import (
    DiamondViolation,
    FlagConnectivityFailure,
    LatticeFailure,
    LatticeReport,
    OracleResult,
    OracleStatus,
)
from src.services.exceptions import PreconditionError, StructureError
from src.services.flagcore import i_faces, is_isomorphic, validate_maniplex
from src.services.utils import component_labels

logger = Logger()

Face = Tuple[int, int]


@dataclass(eq=False)
class FacePoset:
    """
    Ranked incidence structure.

    ``up[F]`` holds every face strictly above ``F``. ``flag_faces`` is set
    for posets read off a maniplex: row ``flag`` lists its face of every
    rank 0..n-1. ``labels`` carries construction data, such as the
    ``(face, vector)`` pair behind each face of a doubled poset.
    """
    rank: int
    counts: Tuple[int, ...]
    up: Dict[Face, FrozenSet[Face]]
    flag_faces: Optional[np.ndarray] = None
    labels: Optional[Dict[Face, Any]] = None
    _down: Optional[Dict[Face, FrozenSet[Face]]] = field(default=None, repr=False)
    _covers: Dict[Face, List[Face]] = field(default_factory=dict, repr=False)

    @property
    def least(self) -> Face:
        return (-1, 0)

    @property
    def greatest(self) -> Face:
        return (self.rank, 0)

    def faces(self, rank: int) -> List[Face]:
        """Faces of one rank."""
        return [(rank, i) for i in range(self.counts[rank + 1])]

    def all_faces(self) -> List[Face]:
        """Every face, ordered by rank then index."""
        return [f for r in range(-1, self.rank + 1) for f in self.faces(r)]

    def proper_faces(self) -> List[Face]:
        """Faces of ranks 0..n-1."""
        return [f for r in range(self.rank) for f in self.faces(r)]

    def facets(self) -> List[Face]:
        """Faces of rank n-1."""
        return self.faces(self.rank - 1)

    def lt(self, a: Face, b: Face) -> bool:
        return b in self.up[a]

    def leq(self, a: Face, b: Face) -> bool:
        return a == b or b in self.up[a]

    def down(self, face: Face) -> FrozenSet[Face]:
        """Every face strictly below ``face``."""
        if self._down is None:
            below: Dict[Face, Set[Face]] = {f: set() for f in self.all_faces()}
            for lower, uppers in self.up.items():
                for upper in uppers:
                    below[upper].add(lower)
            self._down = {f: frozenset(s) for f, s in below.items()}
        return self._down[face]

    def covers(self, face: Face) -> List[Face]:
        """Minimal faces strictly above ``face``."""
        if face not in self._covers:
            above = self.up[face]
            self._covers[face] = sorted(g for g in above if not any(self.lt(h, g) for h in above if h != g))
        return self._covers[face]

    def face_counts(self) -> List[int]:
        """Number of faces of every rank -1..n."""
        return list(self.counts)

    def to_document(self) -> Dict[str, Any]:
        """Faces by rank with their covering lists."""
        return {
            "rank": self.rank,
            "faces": {
                str(r): [{"id": i, "covers": [list(g) for g in self.covers((r, i))]} for i in range(self.counts[r + 1])]
                for r in range(-1, self.rank + 1)
            },
        }


def poset_from_relations(
    rank: int,
    counts: Sequence[int],
    relations: Iterable[Tuple[Face, Face]],
    labels: Optional[Dict[Face, Any]] = None,
) -> FacePoset:
    """
    Build a poset from proper faces and incidences.

    Args:
        rank: Top rank n
        counts: Number of faces of ranks 0..n-1
        relations: Pairs ``(F, G)`` with ``F < G``; closed transitively here
        labels: Optional construction data per face

    Returns:
        FacePoset with a least and a greatest face added
    """
    if len(counts) != rank:
        raise StructureError(f"Expected {rank} face counts, got {len(counts)}")
    all_counts = (1,) + tuple(counts) + (1,)
    faces = [(r, i) for r in range(-1, rank + 1) for i in range(all_counts[r + 1])]
    up: Dict[Face, Set[Face]] = {f: set() for f in faces}
    for lower, upper in relations:
        if lower[0] >= upper[0]:
            raise StructureError(f"Relation {lower} < {upper} does not increase rank")
        up[lower].add(upper)
    for f in faces:
        if f[0] < rank:
            up[f].add((rank, 0))
        if f[0] > -1:
            up[(-1, 0)].add(f)
    # transitive closure, processed from the top rank down
    for f in sorted(faces, key=lambda face: -face[0]):
        closure = set(up[f])
        for g in list(up[f]):
            closure |= up[g]
        up[f] = closure
    return FacePoset(
        rank=rank,
        counts=all_counts,
        up={f: frozenset(s) for f, s in up.items()},
        labels=labels,
    )


def build_poset(M: Maniplex) -> FacePoset:
    """
    Face poset of a maniplex.

    The i-faces are the components without color i; faces are incident when
    they share a flag. Formal least and greatest faces are added.
    """
    n = M.rank
    partitions = [i_faces(M, i) for i in range(n)]
    flag_faces = np.stack([p.face_of for p in partitions], axis=1)
    counts = (1,) + tuple(len(p) for p in partitions) + (1,)

    up: Dict[Face, Set[Face]] = {(r, i): set() for r in range(-1, n + 1) for i in range(counts[r + 1])}
    for i in range(n):
        for j in range(i + 1, n):
            pairs = np.unique(flag_faces[:, [i, j]], axis=0)
            for a, b in pairs.tolist():
                up[(i, a)].add((j, b))
    for r in range(n):
        for i in range(counts[r + 1]):
            up[(r, i)].add((n, 0))
            up[(-1, 0)].add((r, i))
    up[(-1, 0)].add((n, 0))

    flag_faces.setflags(write=False)
    poset = FacePoset(
        rank=n,
        counts=counts,
        up={f: frozenset(s) for f, s in up.items()},
        flag_faces=flag_faces,
    )
    logger.debug("Face poset built", extra={"rank": n, "face_counts": list(counts)})
    return poset


def check_flagged(P: FacePoset) -> List[str]:
    """
    Check that every maximal chain meets every rank.

    A maximal chain runs along covers from the least to the greatest face,
    so it suffices that covers raise the rank by one and that incidence is
    transitive.

    Returns:
        Problems found, empty when the poset is flagged
    """
    problems: List[str] = []
    for f in P.all_faces():
        for g in P.covers(f):
            if g[0] != f[0] + 1:
                problems.append(f"cover {f} < {g} skips a rank")
        for g in P.up[f]:
            missing = [h for h in P.up[g] if h not in P.up[f]]
            if missing:
                problems.append(f"incidence not transitive: {f} < {g} < {missing[0]}")
                break
    return problems


def maximal_chains(P: FacePoset) -> np.ndarray:
    """
    All maximal chains, each listed by its faces of ranks 0..n-1.

    Returns:
        Array of shape (number of chains, n), rows in lexicographic order
    """
    chains: List[Tuple[int, ...]] = []

    def extend(face: Face, prefix: Tuple[int, ...]) -> None:
        if face == P.greatest:
            chains.append(prefix[:-1])
            return
        for g in P.covers(face):
            extend(g, prefix + (g[1],))

    extend(P.least, ())
    if not chains:
        return np.zeros((0, P.rank), dtype=np.int64)
    width = P.rank
    rows = [c for c in chains if len(c) == width]
    return np.asarray(sorted(rows), dtype=np.int64).reshape(len(rows), width)


def check_diamond(P: FacePoset) -> List[DiamondViolation]:
    """
    Check that every F < G two ranks apart have exactly two faces between them.

    Returns:
        Violations, empty when the diamond condition holds
    """
    violations: List[DiamondViolation] = []
    for f in P.all_faces():
        above = P.up[f]
        for g in sorted(above):
            if g[0] != f[0] + 2:
                continue
            between = sum(1 for h in above if h[0] == f[0] + 1 and P.lt(h, g))
            if between != 2:
                violations.append(DiamondViolation(lower=f, upper=g, between=between))
    return violations


def chain_adjacency(P: FacePoset, chains: np.ndarray) -> List[np.ndarray]:
    """
    i-adjacency between maximal chains.

    Raises:
        PreconditionError: If some chain does not have exactly one i-adjacent chain
    """
    index = {tuple(row): k for k, row in enumerate(chains.tolist())}
    adjacency = []
    for i in range(P.rank):
        groups: Dict[Tuple[int, ...], List[int]] = {}
        for k, row in enumerate(chains.tolist()):
            key = tuple(row[:i] + row[i + 1:])
            groups.setdefault(key, []).append(k)
        images = np.empty(len(index), dtype=np.int64)
        for members in groups.values():
            if len(members) != 2:
                raise PreconditionError(f"{len(members)} chains differ only at rank {i}; diamond condition fails")
            images[members[0]], images[members[1]] = members[1], members[0]
        adjacency.append(images)
    return adjacency


def check_strong_flag_connected(P: FacePoset) -> List[FlagConnectivityFailure]:
    """
    Strong flag-connectivity.

    For every color set D, flags that agree outside D must be joined by a
    path that changes only ranks in D. Checked per D on the components of
    the D-colored chain graph; this is the pairwise condition grouped by the
    set of ranks where two flags differ.

    Raises:
        PreconditionError: If the diamond condition fails

    Returns:
        One witness pair per failing D, empty when the poset is strongly flag-connected
    """
    if check_diamond(P):
        raise PreconditionError("Strong flag-connectivity needs the diamond condition")
    chains = maximal_chains(P)
    adjacency = chain_adjacency(P, chains)
    failures: List[FlagConnectivityFailure] = []
    n = P.rank
    for size in range(1, n + 1):
        for D in combinations(range(n), size):
            labels = component_labels(chains.shape[0], [adjacency[i] for i in D])
            outside = [i for i in range(n) if i not in D]
            seen: Dict[Tuple[int, ...], int] = {}
            for k, row in enumerate(chains.tolist()):
                key = tuple(row[i] for i in outside)
                first = seen.setdefault(key, k)
                if labels[first] != labels[k]:
                    failures.append(FlagConnectivityFailure(
                        colors=list(D),
                        flags=(tuple(chains[first].tolist()), tuple(row)),
                    ))
                    break
    return failures


def flag_graph_of_poset(P: FacePoset) -> Maniplex:
    """Flag graph of a diamond poset: chains joined by i-adjacency."""
    chains = maximal_chains(P)
    return Maniplex(adj=tuple(chain_adjacency(P, chains)))


def is_polytope(M: Maniplex, settings: Optional[ForgeSettings] = None) -> OracleResult:
    """
    Decide polytopality directly from the face poset.

    Checks the maniplex axioms, flaggedness, the diamond condition, strong
    flag-connectivity and that the flag graph rebuilt from the poset is
    isomorphic to M.

    Args:
        M: Maniplex to test
        settings: Source of the oracle size cap

    Returns:
        OracleResult; INFEASIBLE when M exceeds the cap
    """
    cap = (settings or ForgeSettings()).oracle_cap
    if M.num_flags > cap:
        logger.warning("Oracle refused", extra={"num_flags": M.num_flags, "oracle_cap": cap})
        return OracleResult(
            status=OracleStatus.INFEASIBLE,
            num_flags=M.num_flags,
            reasons=[f"{M.num_flags} flags exceed the oracle cap {cap}"],
        )

    def negative(reasons: List[str], counts: Sequence[int] = ()) -> OracleResult:
        logger.info("Oracle verdict", extra={"status": "not_polytope", "reason": reasons[0]})
        return OracleResult(status=OracleStatus.NOT_POLYTOPE, num_flags=M.num_flags,
                            reasons=reasons, face_counts=list(counts))

    report = validate_maniplex(M)
    if not report.is_valid:
        return negative([f"not a maniplex: {v.detail}" for v in report.violations])

    P = build_poset(M)
    flagged = check_flagged(P)
    if flagged:
        return negative(flagged, P.counts)
    diamond = check_diamond(P)
    if diamond:
        return negative([f"diamond fails between {v.lower} and {v.upper} ({v.between} faces)" for v in diamond], P.counts)
    failures = check_strong_flag_connected(P)
    if failures:
        return negative([f"flags {f.flags[0]} and {f.flags[1]} not joined using ranks {f.colors}" for f in failures], P.counts)
    rebuilt = flag_graph_of_poset(P)
    if is_isomorphic(rebuilt, M) is None:
        return negative(["flag graph of the poset is not isomorphic to M"], P.counts)

    logger.info("Oracle verdict", extra={"status": "polytope", "num_flags": M.num_flags})
    return OracleResult(status=OracleStatus.POLYTOPE, num_flags=M.num_flags, face_counts=list(P.counts))


def closure(P: FacePoset, face: Face) -> FrozenSet[Face]:
    """
    Facets incident to ``face``.

    The greatest face has an empty closure and the least face is in the
    closure of every facet; both are degenerate and logged.
    """
    if face[0] == P.rank:
        logger.warning("Closure of the greatest face requested", extra={"face": list(face)})
        return frozenset()
    if face[0] == -1:
        logger.warning("Closure of the least face requested", extra={"face": list(face)})
        return frozenset(P.facets())
    if face[0] == P.rank - 1:
        return frozenset([face])
    return frozenset(g for g in P.up[face] if g[0] == P.rank - 1)


def closure_mask(P: FacePoset, face: Face) -> int:
    """Closure as a bitmask over facet indices."""
    mask = 0
    for g in closure(P, face):
        mask |= 1 << g[1]
    return mask


def join(P: FacePoset, a: Face, b: Face) -> Optional[Face]:
    """Least upper bound, or None when it is not unique."""
    uppers = ({a} | P.up[a]) & ({b} | P.up[b])
    found = [u for u in uppers if uppers <= ({u} | P.up[u])]
    return found[0] if len(found) == 1 else None


def meet(P: FacePoset, a: Face, b: Face) -> Optional[Face]:
    """Greatest lower bound, or None when it is not unique."""
    lowers = ({a} | P.down(a)) & ({b} | P.down(b))
    found = [l for l in lowers if lowers <= ({l} | P.down(l))]
    return found[0] if len(found) == 1 else None


def meet_of(P: FacePoset, faces: Iterable[Face]) -> Optional[Face]:
    """Greatest lower bound of a set of faces."""
    lowers: Optional[Set[Face]] = None
    for f in faces:
        below = {f} | P.down(f)
        lowers = below if lowers is None else lowers & below
    if lowers is None:
        return P.greatest
    found = [l for l in lowers if lowers <= ({l} | P.down(l))]
    return found[0] if len(found) == 1 else None


def hat2_poset(P: FacePoset) -> FacePoset:
    """
    The doubled poset: classes of pairs ``(F, x)`` plus a new greatest face.

    ``x`` is a vector over the facets of P, stored as a bitmask. Two pairs
    with the same F are identified when every facet where the vectors differ
    lies above F; the canonical representative clears the bits of the
    closure of F. ``(A, x) < (B, y)`` when ``A < B`` and ``(A, x) ~ (A, y)``.
    Labels map every face to its ``(F, x)`` pair.
    """
    m = P.counts[P.rank]
    masks = {f: closure_mask(P, f) for f in P.all_faces()}
    full = (1 << m) - 1

    index: Dict[Tuple[Face, int], Face] = {}
    labels: Dict[Face, Any] = {}
    counts: List[int] = []
    for r in range(-1, P.rank + 1):
        pairs = sorted({(f, x & ~masks[f] & full) for f in P.faces(r) for x in range(1 << m)})
        counts.append(len(pairs))
        for k, pair in enumerate(pairs):
            index[pair] = (r, k)
            labels[(r, k)] = pair

    relations: List[Tuple[Face, Face]] = []
    for (a, x), face in index.items():
        cl = masks[a]
        bits = [1 << j for j in range(m) if cl >> j & 1]
        for b in P.up[a]:
            seen: Set[int] = set()
            for size in range(len(bits) + 1):
                for chosen in combinations(bits, size):
                    y = (x ^ sum(chosen)) & ~masks[b] & full
                    if y not in seen:
                        seen.add(y)
                        relations.append((face, index[(b, y)]))

    # the least face of P has a single class, which is the least face here
    return poset_from_relations(P.rank + 1, counts[1:], relations, labels=labels)


def hat2_join(P: FacePoset, hatP: FacePoset, a: Face, b: Face) -> Optional[Face]:
    """
    Join by formula: ``(A, w) ∨ (B, w) = (A ∨ B, w)`` for a common facet ``(F_n, w)``.

    Returns None when the two faces share no facet of the doubled poset.
    """
    assert hatP.labels is not None
    (A, x), (B, y) = hatP.labels[a], hatP.labels[b]
    mask_a, mask_b = closure_mask(P, A), closure_mask(P, B)
    # a common facet w agrees with x off cl(A) and with y off cl(B)
    if (x ^ y) & ~(mask_a | mask_b):
        return None
    w = (x & ~mask_a) | (y & mask_a & ~mask_b)
    top = join(P, A, B)
    if top is None:
        return None
    target = (top, w & ~closure_mask(P, top) & ((1 << P.counts[P.rank]) - 1))
    return next((face for face, label in hatP.labels.items() if label == target), None)


def hat2_meet(P: FacePoset, hatP: FacePoset, a: Face, b: Face) -> Optional[Face]:
    """Meet by formula: ``(C, x)`` with C the meet of ``supp(x + y) ∪ {A, B}``."""
    assert hatP.labels is not None
    (A, x), (B, y) = hatP.labels[a], hatP.labels[b]
    support = [(P.rank - 1, j) for j in range(P.counts[P.rank]) if (x ^ y) >> j & 1]
    C = meet_of(P, support + [A, B])
    if C is None:
        return None
    target = (C, x & ~closure_mask(P, C) & ((1 << P.counts[P.rank]) - 1))
    return next((face for face, label in hatP.labels.items() if label == target), None)


def lattice_check(P: FacePoset, base: Optional[FacePoset] = None) -> LatticeReport:
    """
    Check that every pair of faces has a unique join and meet.

    Args:
        P: Poset to check
        base: When P is ``hat2_poset(base)``, joins and meets are also
            compared with the closed formulas

    Returns:
        LatticeReport with failures and formula mismatch counts
    """
    report = LatticeReport(is_lattice=True)
    faces = P.all_faces()
    for a, b in combinations(faces, 2):
        report.pairs_checked += 1
        j = join(P, a, b)
        mt = meet(P, a, b)
        if j is None:
            uppers = ({a} | P.up[a]) & ({b} | P.up[b])
            report.failures.append(LatticeFailure(faces=(a, b), operation="join", candidates=sorted(uppers)[:8]))
        if mt is None:
            lowers = ({a} | P.down(a)) & ({b} | P.down(b))
            report.failures.append(LatticeFailure(faces=(a, b), operation="meet", candidates=sorted(lowers)[:8]))
        if base is None or P.labels is None or P.greatest in (a, b):
            continue
        formula_join = hat2_join(base, P, a, b)
        # formulas hold only below a common facet
        if formula_join is None:
            continue
        report.formula_checked += 2
        if formula_join != j:
            report.formula_mismatches += 1
        if hat2_meet(base, P, a, b) != mt:
            report.formula_mismatches += 1
    report.is_lattice = not report.failures
    return report
