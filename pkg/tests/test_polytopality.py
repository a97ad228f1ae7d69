"""
Tests for the intersection checker, its cross-validation and the property suites.
"""
import pytest

from src.models.group import GroupElement
from src.models.report import OracleStatus, TupleStatus, Verdict
from src.services.constants import WHITE
from src.services.polytopality import (
    check_intersection_properties,
    cross_validate,
    cross_validation_instances,
    inject_fault,
    run_lemma_suite,
    run_main_suite,
    run_oracle_suite,
    verify_claim,
    verify_k1_support_lemmas,
    verify_path_lemmas,
    verify_polytopal,
    voltage_set,
)
from src.services.symmetry import stg_voltages
from src.services.voltage import one_vertex_premaniplex, one_vertex_voltages


def test_one_vertex_maps_are_polytopal(square, torus4, settings):
    """Regular polytopes pass every tuple."""
    for M in (square, torus4):
        verdict = verify_polytopal(one_vertex_premaniplex(M.rank), one_vertex_voltages(M), settings)
        assert verdict.verdict == Verdict.POLYTOPAL
        assert verdict.witness is None


def test_one_cell_torus_fails_at_k1(one_cell, settings):
    """One vertex and one face: <r0> meets <r1, r2> in more than the identity."""
    verdict = verify_polytopal(one_vertex_premaniplex(3), one_vertex_voltages(one_cell), settings)
    assert verdict.verdict == Verdict.NOT_POLYTOPAL
    assert verdict.witness is not None and verdict.witness.startswith("k=1")
    failures = verdict.intersection_report.failures
    assert {(t.k, t.m) for t in failures} >= {(1, 0), (1, 1)}


def test_trivial_tuples(torus4, settings):
    """k = 0 or m = n - 1 need no search."""
    report = check_intersection_properties(one_vertex_premaniplex(3), one_vertex_voltages(torus4), settings)
    assert len(report.tuples) == 9
    trivial = [t for t in report.tuples if t.k == 0 or t.m == 2]
    assert len(trivial) == 5
    assert all(t.method == "trivial" and t.status == TupleStatus.PASS for t in trivial)


def test_tuple_order_independent_of_workers(two_orbit_rank3, settings):
    """Threads report the same tuples in the same order."""
    X, xi = two_orbit_rank3
    serial = check_intersection_properties(X, xi, settings)
    threaded = check_intersection_properties(X, xi, settings.model_copy(update={"jobs": 4}))
    assert [t.model_dump() for t in serial.tuples] == [t.model_dump() for t in threaded.tuples]
    assert serial.all_passed


def test_voltage_set_at_one_vertex(torus4):
    """Closed paths at a vertex give a subgroup coset at the identity."""
    X = one_vertex_premaniplex(3)
    xi = one_vertex_voltages(torus4)
    coset = voltage_set(X, xi, 0, 0, (0, 1))
    assert coset is not None
    assert coset.rep.is_identity()
    assert coset.size() == 8


def test_cross_validation_agrees(two_orbit_rank3, one_cell, settings):
    """Checker and oracle agree on a polytope and on a non-polytope."""
    X, xi = two_orbit_rank3
    report = cross_validate(X, xi, settings)
    assert report.agree is True
    assert report.oracle == OracleStatus.POLYTOPE
    report = cross_validate(one_vertex_premaniplex(3), one_vertex_voltages(one_cell), settings)
    assert report.agree is True
    assert report.checker == Verdict.NOT_POLYTOPAL


def test_two_orbit_polyhedra_cross_validate(cuboctahedron, rhombic_dodecahedron, settings):
    """Checker and oracle both accept the two 2-orbit convex polyhedra."""
    for M in (cuboctahedron, rhombic_dodecahedron):
        X, xi = stg_voltages(M)
        assert X.num_vertices == 2
        report = cross_validate(X, xi, settings)
        assert not report.skipped
        assert report.checker == Verdict.POLYTOPAL
        assert report.oracle == OracleStatus.POLYTOPE
        assert report.agree is True


def test_cross_validation_instances_include_two_orbit_polyhedra():
    names = [name for name, _, _ in cross_validation_instances()]
    assert "two-orbit cuboctahedron" in names
    assert "two-orbit rhombic-dodecahedron" in names


def test_cross_validation_skips_large_graphs(two_orbit_rank3, settings):
    """Above the oracle cap only the checker runs."""
    X, xi = two_orbit_rank3
    report = cross_validate(X, xi, settings.model_copy(update={"oracle_cap": 10}))
    assert report.skipped
    assert report.agree is None
    assert report.notice is not None


def test_fault_is_not_a_maniplex(two_orbit_rank3, settings):
    """The identity on a semi-edge is caught before any tuple runs."""
    X, xi = two_orbit_rank3
    faulty = inject_fault(X, xi, X.dart_at(WHITE, 1).id, GroupElement.identity(xi.degree))
    verdict = verify_polytopal(X, faulty, settings)
    assert verdict.verdict == Verdict.NOT_MANIPLEX
    assert verdict.intersection_report is None
    assert cross_validate(X, faulty, settings).skipped


@pytest.mark.slow
def test_oracle_suite(settings):
    """Every small instance agrees with the oracle."""
    report = run_oracle_suite(settings)
    assert report.suite == "oracle"
    assert report.passed, [c.name for c in report.checks if not c.passed]


@pytest.mark.slow
def test_path_voltage_formula(rank4_pipeline, settings):
    """Sampled paths have the predicted voltages."""
    checked, failures = verify_claim(rank4_pipeline, settings)
    assert checked == settings.sample_paths
    assert failures == 0


@pytest.mark.slow
def test_path_lemmas(rank4_pipeline, settings):
    """Closed and open path lemmas hold for every K containing 1."""
    results = verify_path_lemmas(rank4_pipeline, settings)
    assert len(results) == 8
    assert all(passed for _, passed in results)


@pytest.mark.slow
def test_k1_support_lemmas(rank4_pipeline, settings):
    """Generating set, commuting reflection, disjoint open paths."""
    results = dict(verify_k1_support_lemmas(rank4_pipeline, settings))
    assert all(results.values()), results


@pytest.mark.slow
def test_lemma_suite(rank4_pipeline, settings):
    """The whole lemma suite passes with a small sample."""
    report = run_lemma_suite(rank4_pipeline, settings)
    assert report.seed == settings.seed
    assert report.passed, [c.name for c in report.checks if not c.passed]


@pytest.mark.slow
def test_main_suite(settings):
    """Both variants polytopal, k > 1 tuples pass for every I, two orbits at most."""
    report = run_main_suite(settings)
    assert report.passed, [c.name for c in report.checks if not c.passed]
