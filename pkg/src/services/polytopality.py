"""
Polytopality of derived maniplexes.

A derived maniplex is polytopal exactly when, for all ``k, m`` and all
ordered vertex pairs ``(a, b)``, the voltages of paths from ``a`` to ``b``
with colors in ``[0, m]`` and those with colors in ``[k, n-1]`` intersect
in the voltages of paths with colors in ``[k, m]``. The inclusion of the
right side in the intersection always holds, so only the other direction
is searched.

The module also holds the property suites run by ``forge verify``.
"""
import os
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import combinations
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from aws_lambda_powertools import Logger

from src.models.config import ForgeSettings
from src.models.group import GroupElement
from src.models.premaniplex import Premaniplex, VoltageAssignment
from src.models.report import (
    CrossValidationReport,
    IntersectionReport,
    OracleStatus,
    PolytopalityVerdict,
    SuiteReport,
    TupleResult,
    TupleStatus,
    Verdict,
)
from src.services.constants import BLACK, WHITE
from src.services.constructions import (
    cuboctahedron,
    one_cell_torus,
    rhombic_dodecahedron,
    square_flag_graph,
    torus_map_44,
)
from src.services.exceptions import ConstructionError, InfeasibleError
from src.services.flagcore import i_faces
from src.services.hat2 import Hat2Maniplex, base_edges, find_s3, hat2, rho0_hat
from src.services.permtools import Coset, PermGroup, intersection_elements, monodromy_group
from src.services.poset import build_poset, closure_mask, is_polytope
from src.services.symmetry import derived_orbit_bound, stg_voltages
from src.services.utils import compose_all
from src.services.voltage import (
    check_derived_is_maniplex,
    derived_graph,
    one_vertex_premaniplex,
    one_vertex_voltages,
    path_colors,
    path_end,
    path_voltage,
    restricted_voltage_coset,
    restricted_voltage_group,
    sample_path,
)
from src.services.xi import Rank4Pipeline, build_rank4_pipeline, check_y_edges, covering_voltages

logger = Logger()


def voltage_set(
    X: Premaniplex,
    xi: VoltageAssignment,
    a: int,
    b: int,
    colors: Sequence[int],
) -> Optional[Coset]:
    """Voltages of paths from ``a`` to ``b`` with colors in ``colors``; None when there are none."""
    if a == b:
        group = restricted_voltage_group(X, xi, a, colors)
        return Coset(rep=GroupElement.identity(xi.degree), subgroup=group)
    return restricted_voltage_coset(X, xi, a, b, colors)


def _interval(lo: int, hi: int) -> Tuple[int, ...]:
    return tuple(range(lo, hi + 1))


@dataclass
class _VoltageSets:
    """Voltage sets shared between tuples of one check."""
    X: Premaniplex
    xi: VoltageAssignment

    def __post_init__(self) -> None:
        self._cache: Dict[Tuple[int, int, Tuple[int, ...]], Optional[Coset]] = {}

    def get(self, a: int, b: int, colors: Tuple[int, ...]) -> Optional[Coset]:
        key = (a, b, colors)
        if key not in self._cache:
            self._cache[key] = voltage_set(self.X, self.xi, a, b, colors)
        return self._cache[key]


def check_tuple(
    sets: _VoltageSets,
    k: int,
    m: int,
    a: int,
    b: int,
    cap: int,
) -> TupleResult:
    """
    One intersection tuple.

    Tries containment between the two sides first, then enumerates the
    smaller side, and refuses when both sides exceed ``cap``.
    """
    n = sets.X.rank

    def result(status: TupleStatus, method: str, witness: Optional[str] = None) -> TupleResult:
        return TupleResult(k=k, m=m, a=a, b=b, status=status, method=method, witness=witness)

    if k == 0 or m == n - 1:
        return result(TupleStatus.PASS, "trivial")

    left = sets.get(a, b, _interval(0, m))
    right = sets.get(a, b, _interval(k, n - 1))
    target = sets.get(a, b, _interval(k, m))

    if left is None or right is None:
        if target is None:
            return result(TupleStatus.PASS, "empty")
        return result(TupleStatus.FAIL, "empty", "target nonempty while a side is empty")

    for outer, inner in ((left, right), (right, left)):
        if not outer.contains_coset(inner):
            continue
        # the intersection is inner, and target lies inside it
        if target is not None and target.contains_coset(inner):
            return result(TupleStatus.PASS, "containment")
        witness = inner.rep
        if target is not None and target.contains(witness):
            witness = next(witness * h for h in inner.subgroup.generators if not target.contains(witness * h))
        return result(TupleStatus.FAIL, "containment", f"{witness!r} in both sides but not in [{k},{m}]")

    try:
        found = intersection_elements(left, right, cap)
    except InfeasibleError as e:
        logger.warning("Tuple refused", extra={"k": k, "m": m, "a": a, "b": b, "limit": e.limit, "required": e.required})
        return result(TupleStatus.INFEASIBLE, "refused", str(e))

    if target is None:
        if found:
            return result(TupleStatus.FAIL, "enumeration", f"{found[0]!r} in both sides, no path with colors in [{k},{m}]")
        return result(TupleStatus.PASS, "enumeration")
    for element in found:
        if not target.contains(element):
            return result(TupleStatus.FAIL, "enumeration", f"{element!r} in both sides but not in [{k},{m}]")
    if len(found) != target.size():
        return result(TupleStatus.FAIL, "enumeration", f"{len(found)} common elements, target has {target.size()}")
    return result(TupleStatus.PASS, "enumeration")


def _workers(jobs: int) -> int:
    return jobs if jobs > 0 else (os.cpu_count() or 1)


def check_intersection_properties(
    X: Premaniplex,
    xi: VoltageAssignment,
    settings: Optional[ForgeSettings] = None,
    min_k: int = 0,
) -> IntersectionReport:
    """
    Check every tuple ``(k, m, a, b)`` with ``k >= min_k``.

    Tuples are reported in order of ``k``, ``m``, ``a``, ``b`` regardless of
    how many worker threads ran them.
    """
    settings = settings or ForgeSettings()
    n = X.rank
    sets = _VoltageSets(X, xi)
    tuples = [
        (k, m, a, b)
        for k in range(min_k, n)
        for m in range(n)
        for a in range(X.num_vertices)
        for b in range(X.num_vertices)
    ]
    workers = _workers(settings.jobs)

    def run(t: Tuple[int, int, int, int]) -> TupleResult:
        return check_tuple(sets, *t, cap=settings.enumeration_cap)

    if workers > 1:
        # build shared sets first so threads only read the cache
        for k, m, a, b in tuples:
            if k != 0 and m != n - 1:
                for colors in (_interval(0, m), _interval(k, n - 1), _interval(k, m)):
                    sets.get(a, b, colors)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, tuples))
    else:
        results = [run(t) for t in tuples]

    report = IntersectionReport(rank=n, tuples=results)
    for t in results:
        logger.debug("Intersection tuple", extra=t.model_dump())
    logger.info("Intersection check", extra={
        "rank": n,
        "tuples": len(results),
        "failures": len(report.failures),
        "infeasible": len(report.infeasible),
    })
    return report


def verify_polytopal(
    X: Premaniplex,
    xi: VoltageAssignment,
    settings: Optional[ForgeSettings] = None,
) -> PolytopalityVerdict:
    """Maniplex test followed by the intersection check."""
    settings = settings or ForgeSettings()
    maniplex_report = check_derived_is_maniplex(X, xi)
    if not maniplex_report.is_maniplex:
        failure = maniplex_report.first_failure()
        witness = f"{failure.name}: {failure.detail}" if failure else None
        logger.info("Verdict", extra={"verdict": Verdict.NOT_MANIPLEX.value, "witness": witness})
        return PolytopalityVerdict(verdict=Verdict.NOT_MANIPLEX, maniplex_report=maniplex_report, witness=witness)

    intersection = check_intersection_properties(X, xi, settings)
    if intersection.failures:
        t = intersection.failures[0]
        verdict = Verdict.NOT_POLYTOPAL
        witness = f"k={t.k} m={t.m} a={t.a} b={t.b}: {t.witness}"
    elif intersection.infeasible:
        verdict = Verdict.INFEASIBLE
        witness = ", ".join(f"({t.k},{t.m},{t.a},{t.b})" for t in intersection.infeasible)
    else:
        verdict = Verdict.POLYTOPAL
        witness = None
    logger.info("Verdict", extra={"verdict": verdict.value, "witness": witness})
    return PolytopalityVerdict(
        verdict=verdict,
        maniplex_report=maniplex_report,
        intersection_report=intersection,
        witness=witness,
    )


def cross_validate(
    X: Premaniplex,
    xi: VoltageAssignment,
    settings: Optional[ForgeSettings] = None,
) -> CrossValidationReport:
    """
    Compare the checker with the face-poset oracle on the derived graph.

    Skipped with a notice when the derived graph exceeds the oracle cap or
    is not a maniplex.
    """
    settings = settings or ForgeSettings()
    verdict = verify_polytopal(X, xi, settings)
    if verdict.verdict == Verdict.NOT_MANIPLEX:
        return CrossValidationReport(checker=verdict.verdict, skipped=True, notice="derived graph is not a maniplex")
    size = X.num_vertices * PermGroup(list(xi.voltages), xi.degree).order()
    if size > settings.oracle_cap:
        notice = f"derived graph has {size} flags, oracle cap is {settings.oracle_cap}"
        logger.warning("Cross-validation skipped", extra={"num_flags": size, "oracle_cap": settings.oracle_cap})
        return CrossValidationReport(checker=verdict.verdict, skipped=True, notice=notice)
    oracle = is_polytope(derived_graph(X, xi, settings), settings)
    if oracle.status == OracleStatus.INFEASIBLE or verdict.verdict == Verdict.INFEASIBLE:
        return CrossValidationReport(checker=verdict.verdict, oracle=oracle.status, skipped=True, notice="; ".join(oracle.reasons))
    agree = (verdict.verdict == Verdict.POLYTOPAL) == oracle.is_polytope
    if not agree:
        logger.error("Checker and oracle disagree", extra={"checker": verdict.verdict.value, "oracle": oracle.status.value})
    return CrossValidationReport(checker=verdict.verdict, oracle=oracle.status, agree=agree)


def inject_fault(X: Premaniplex, xi: VoltageAssignment, dart_id: int, voltage: GroupElement) -> VoltageAssignment:
    """Replace the voltage of one dart (and its inverse)."""
    voltages = list(xi.voltages)
    voltages[dart_id] = voltage
    voltages[X.darts[dart_id].inv] = voltage.inverse()
    return VoltageAssignment(tuple(voltages))


def cross_validation_instances() -> List[Tuple[str, Premaniplex, VoltageAssignment]]:
    """Small instances whose derived graphs the oracle can check."""
    instances: List[Tuple[str, Premaniplex, VoltageAssignment]] = []
    for name, M in (
        ("square", square_flag_graph()),
        ("torus44:4", torus_map_44(4)),
        ("torus44:2", torus_map_44(2)),
        ("torus44:1", one_cell_torus()),
    ):
        instances.append((f"one-vertex {name}", one_vertex_premaniplex(M.rank), one_vertex_voltages(M)))
    for I in ((1, 2), (1,), (2,), ()):
        X, _, xi = covering_voltages(torus_map_44(4), I)
        instances.append((f"covering torus44:4 I={list(I)}", X, xi))
    X, _, xi = covering_voltages(one_cell_torus(), (1,))
    instances.append(("covering torus44:1 I=[1]", X, xi))
    for name, M in (("cuboctahedron", cuboctahedron()), ("rhombic-dodecahedron", rhombic_dodecahedron())):
        X, xi = stg_voltages(M)
        instances.append((f"two-orbit {name}", X, xi))
    return instances


def run_oracle_suite(settings: Optional[ForgeSettings] = None) -> SuiteReport:
    """Cross-validate every small instance."""
    settings = settings or ForgeSettings()
    report = SuiteReport(suite="oracle", seed=settings.seed)
    for name, X, xi in cross_validation_instances():
        result = cross_validate(X, xi, settings)
        detail = f"checker={result.checker.value} oracle={result.oracle.value if result.oracle else None}"
        report.add(name, bool(result.agree) and not result.skipped, result.notice or detail)
    X, _, xi = covering_voltages(torus_map_44(4), (1, 2))
    semi = X.dart_at(WHITE, 1).id
    faulty = inject_fault(X, xi, semi, GroupElement.identity(xi.degree))
    report.add("fault: identity on a semi-edge", verify_polytopal(X, faulty, settings).verdict == Verdict.NOT_MANIPLEX)
    return report


def _full_product(pipeline: Rank4Pipeline, colors: Sequence[int]) -> np.ndarray:
    return compose_all((pipeline.base.adj[c] for c in colors), pipeline.base.num_flags)


def verify_claim(pipeline: Rank4Pipeline, settings: Optional[ForgeSettings] = None) -> Tuple[int, int]:
    """
    Sampled paths from the white vertex avoiding colors 1 and n have voltage
    ``r0^e r_cm ... r_c1``, with ``e = 0`` exactly for closed paths.

    Returns:
        (paths checked, failures)
    """
    settings = settings or ForgeSettings()
    X, xi, n = pipeline.premaniplex, pipeline.xi, pipeline.n
    colors = [c for c in range(n + 1) if c not in (1, n)]
    rng = random.Random(settings.seed)
    failures = 0
    for _ in range(settings.sample_paths):
        W = sample_path(X, rng, WHITE, colors, settings.max_path_length)
        word = ([0] if path_end(X, W) == BLACK else []) + path_colors(X, W)[::-1]
        expected = pipeline.element(_full_product(pipeline, word))
        if path_voltage(X, xi, W) != expected:
            failures += 1
    logger.info("Path voltage formula", extra={"paths": settings.sample_paths, "failures": failures, "seed": settings.seed})
    return settings.sample_paths, failures


def _monodromy_elements(pipeline: Rank4Pipeline, settings: ForgeSettings) -> List[np.ndarray]:
    """Colour-preserving monodromies of the base, as full flag permutations."""
    color = pipeline.coloring.color
    return [
        g.perm for g in monodromy_group(pipeline.base).elements(settings.enumeration_cap)
        if g.s_bit == 0 and np.array_equal(color[g.perm], color)
    ]


def verify_path_lemmas(pipeline: Rank4Pipeline, settings: Optional[ForgeSettings] = None) -> List[Tuple[str, bool]]:
    """
    Closed and open path lemmas for every ``K`` containing color 1.

    Closed: colour-preserving monodromies ``w`` with ``(F)_K = (F w)_K`` for
    the white base flag ``F`` are the voltages of closed paths at the white
    vertex avoiding ``K`` and ``n``. Open: the same with ``F^0 w`` against
    paths to the black vertex.
    """
    settings = settings or ForgeSettings()
    M, X, xi, n = pipeline.base, pipeline.premaniplex, pipeline.xi, pipeline.n
    faces = np.stack([i_faces(M, r).face_of for r in range(n)], axis=1)
    monodromies = _monodromy_elements(pipeline, settings)
    start, start0 = 0, int(M.adj[0][0])
    results: List[Tuple[str, bool]] = []
    for size in range(1, n + 1):
        for K in combinations(range(n), size):
            if 1 not in K:
                continue
            ranks = list(K)
            colors = [c for c in range(n + 1) if c not in K and c != n]
            target = faces[start, ranks]
            closed = {pipeline.element(w).key() for w in monodromies if np.array_equal(faces[w[start], ranks], target)}
            opened = {pipeline.element(w).key() for w in monodromies if np.array_equal(faces[w[start0], ranks], target)}
            group = restricted_voltage_group(X, xi, WHITE, colors)
            coset = restricted_voltage_coset(X, xi, WHITE, BLACK, colors)
            group_keys = {g.key() for g in group.elements(settings.enumeration_cap)}
            coset_keys = set() if coset is None else {g.key() for g in coset.elements(settings.enumeration_cap)}
            results.append((f"closed K={list(K)}", closed == group_keys))
            results.append((f"open K={list(K)}", opened == coset_keys))
    return results


def verify_k1_support_lemmas(pipeline: Rank4Pipeline, settings: Optional[ForgeSettings] = None) -> List[Tuple[str, bool]]:
    """
    Support facts behind the ``k = 1`` case.

    The closed paths at the white vertex using colors ``1..n`` have voltages
    generated by ``r_1 .. r_(n-1)`` and ``rho0 r_(n-1) rho0``; ``rho0``
    commutes with the lower colors; paths to the black vertex with colors in
    ``[0, m]`` and in ``[1, n]`` share no voltage; ``y w`` is never a
    monodromy.

    Raises:
        ConstructionError: Unless the semi-edge colors are ``1..n-1``
    """
    settings = settings or ForgeSettings()
    M, X, xi, n = pipeline.base, pipeline.premaniplex, pipeline.xi, pipeline.n
    if pipeline.semi_colors != tuple(range(1, n)):
        raise ConstructionError(f"Support facts need semi-edge colors 1..{n - 1}")
    results: List[Tuple[str, bool]] = []

    upper = restricted_voltage_group(X, xi, WHITE, range(1, n + 1))
    generators = [pipeline.element(M.adj[i]) for i in range(1, n)]
    generators.append(pipeline.element(pipeline.conjugate_by_rho0(n - 1)))
    expected = PermGroup(generators, pipeline.degree)
    results.append(("generating set", upper.equals(expected)))

    commute = all(
        np.array_equal(pipeline.conjugate_by_rho0(i), M.adj[i]) for i in range(n - 1)
    )
    results.append(("rho0 commutes with lower colors", commute))

    top = restricted_voltage_coset(X, xi, WHITE, BLACK, range(1, n + 1))
    disjoint = top is not None
    for m in range(n):
        lower = restricted_voltage_coset(X, xi, WHITE, BLACK, range(0, m + 1))
        if lower is not None and top is not None:
            disjoint = disjoint and not intersection_elements(lower, top, settings.enumeration_cap)
    results.append(("open paths disjoint", disjoint))

    monodromies = restricted_voltage_group(X, xi, WHITE, range(n))
    rng = random.Random(settings.seed)
    y = pipeline.element(pipeline.y)
    gens = upper.generators
    never = True
    for _ in range(min(settings.sample_paths, 200)):
        omega = GroupElement.identity(pipeline.degree)
        for _ in range(rng.randint(0, settings.max_path_length)):
            omega = omega * rng.choice(gens)
        never = never and not monodromies.contains(y * omega)
    results.append(("y w is not a monodromy", never))
    return results


@dataclass(frozen=True, eq=False)
class DoubledWorld:
    """The implicit doubled torus with its reflection, used for the vertex-fixing check."""
    H: Hat2Maniplex
    S: Tuple[int, ...]
    u: int
    v: int
    vertex_of: np.ndarray
    span: int


def build_doubled_world(settings: Optional[ForgeSettings] = None) -> DoubledWorld:
    """Doubled {4,4}_(4,0) with the vertices ``u, v`` of the base edge."""
    M = torus_map_44(4)
    H = hat2(M, materialize=False, settings=settings)
    assert isinstance(H, Hat2Maniplex)
    S = find_s3(M)
    if S is None:
        raise ConstructionError("No asymmetric facet set on the base torus")
    P = build_poset(M)
    vertex_of = i_faces(M, 0).face_of
    u, v = int(vertex_of[0]), int(vertex_of[M.adj[0][0]])
    span = closure_mask(P, (0, u)) | closure_mask(P, (0, v))
    return DoubledWorld(H=H, S=S, u=u, v=v, vertex_of=vertex_of, span=span)


def verify_vertex_fixing(world: DoubledWorld, settings: Optional[ForgeSettings] = None) -> Tuple[int, int]:
    """
    Sampled words in ``r1, r2, r3`` and ``rho0 r3 rho0`` keep flags at the
    vertex ``u`` with support inside the closures of ``u`` and ``v``.

    Returns:
        (words checked, failures)
    """
    settings = settings or ForgeSettings()
    H = world.H
    table = base_edges(H, world.S)
    reflection = rho0_hat(H, table)
    at_u = np.flatnonzero(world.vertex_of == world.u).tolist()
    span_bits = [i for i in range(H.num_facets) if world.span >> i & 1]
    rng = random.Random(settings.seed)
    top = H.rank - 1

    def conjugated(phi: int, x: int) -> Tuple[int, int]:
        phi, x = reflection.apply(phi, x)
        phi, x = H.step_pair(phi, x, top)
        return reflection.apply(phi, x)

    failures = 0
    samples = min(settings.sample_paths, 2000)
    for _ in range(samples):
        phi = rng.choice(at_u)
        x = 0
        for bit in span_bits:
            if rng.random() < 0.5:
                x |= 1 << bit
        for _ in range(rng.randint(0, settings.max_path_length)):
            move = rng.randrange(4)
            if move < 3:
                phi, x = H.step_pair(phi, x, move + 1)
            else:
                phi, x = conjugated(phi, x)
            if world.vertex_of[phi] != world.u or x & ~world.span:
                failures += 1
                break
    logger.info("Vertex fixing", extra={"words": samples, "failures": failures, "seed": settings.seed})
    return samples, failures


def run_lemma_suite(pipeline: Optional[Rank4Pipeline] = None, settings: Optional[ForgeSettings] = None) -> SuiteReport:
    """Path voltage formula, path lemmas, support facts and edge behaviour of ``y``."""
    settings = settings or ForgeSettings()
    pipeline = pipeline or build_rank4_pipeline(settings=settings)
    report = SuiteReport(suite="lemmas", seed=settings.seed)
    checked, failures = verify_claim(pipeline, settings)
    report.add("path voltage formula", failures == 0, f"{failures} of {checked} sampled paths failed")
    for name, passed in verify_path_lemmas(pipeline, settings):
        report.add(name, passed)
    for name, passed in verify_k1_support_lemmas(pipeline, settings):
        report.add(name, passed)
    bad = check_y_edges(pipeline)
    report.add("y fixes base edges and swaps e0 and e1", not bad, f"facets {bad}" if bad else None)
    words, failures = verify_vertex_fixing(build_doubled_world(settings), settings)
    report.add("vertex fixing on the doubled torus", failures == 0, f"{failures} of {words} sampled words failed")
    return report


def run_main_suite(settings: Optional[ForgeSettings] = None) -> SuiteReport:
    """
    The main construction at rank 4: both variants are polytopal maniplexes
    for I = {1, 2}, the ``k > 1`` tuples pass for every I with 0 and 3 links,
    and the second variant has at most two flag orbits.
    """
    settings = settings or ForgeSettings()
    report = SuiteReport(suite="main", seed=settings.seed)
    pipeline = build_rank4_pipeline(settings=settings)
    X = pipeline.premaniplex
    for variant in ("xi", "xiprime"):
        verdict = verify_polytopal(X, pipeline.voltages(variant), settings)
        report.add(f"{variant} polytopal", verdict.verdict == Verdict.POLYTOPAL, verdict.witness or verdict.verdict.value)
    for I in ((), (1,), (2,), (1, 2)):
        other = build_rank4_pipeline(I, settings)
        tuples = check_intersection_properties(other.premaniplex, other.xi, settings, min_k=2)
        report.add(f"k>1 tuples I={list(I)}", tuples.all_passed, f"{len(tuples.failures)} failures, {len(tuples.infeasible)} refused")
    bound = derived_orbit_bound(X, pipeline.xi_prime, settings.oracle_cap)
    report.add("xiprime orbit bound", bound.upper == 2 and bound.lower >= 1, f"{bound.lower}..{bound.upper} ({bound.status})")
    logger.info("Suite finished", extra={"suite": report.suite, "passed": report.passed})
    return report
