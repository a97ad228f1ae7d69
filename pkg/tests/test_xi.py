"""
Tests for the voltage construction over the 8x8 torus.
"""
import numpy as np
import pytest

from src.models.report import Verdict
from src.services.exceptions import ConstructionError, StructureError
from src.services.polytopality import verify_polytopal
from src.services.utils import is_involution
from src.services.xi import (
    build_pipeline,
    check_y_edges,
    covering_voltages,
    restrict_to_white,
)


def test_pipeline_shape(rank4_pipeline):
    """Rank 3 base, rank 4 premaniplex, voltages on the 256 white flags."""
    pipeline = rank4_pipeline
    assert pipeline.n == 3
    assert pipeline.premaniplex.rank == 4
    assert pipeline.semi_colors == (1, 2)
    assert pipeline.degree == 256
    pipeline.xi.check_inverses(pipeline.premaniplex)
    pipeline.xi_prime.check_inverses(pipeline.premaniplex)


def test_variants_differ_only_on_top_color(rank4_pipeline):
    """The second variant multiplies the top voltage by s."""
    X = rank4_pipeline.premaniplex
    for dart in X.darts:
        plain = rank4_pipeline.xi.of(dart.id)
        primed = rank4_pipeline.xi_prime.of(dart.id)
        assert np.array_equal(plain.perm, primed.perm)
        assert primed.s_bit == (1 if dart.color == 3 else 0)


def test_facet_reflection(rank4_pipeline):
    """Every facet is reflected across its base edge."""
    pipeline = rank4_pipeline
    M = pipeline.base
    assert pipeline.base_flags[pipeline.facet_of[0]] == 0
    for B in pipeline.base_flags.tolist():
        assert pipeline.rho0[B] == M.adj[0][B]
    assert is_involution(pipeline.rho0)
    for c in (0, 1):
        assert np.array_equal(pipeline.conjugate_by_rho0(c), M.adj[c])


def test_y_on_edges(rank4_pipeline):
    """y is an involution fixing the base edge and swapping its neighbours."""
    assert is_involution(rank4_pipeline.y)
    assert check_y_edges(rank4_pipeline) == []


def test_link_colors_enforced(rank4_pipeline):
    """Colors 0 and n must stay links."""
    with pytest.raises(ConstructionError):
        build_pipeline(rank4_pipeline.base, rank4_pipeline.eta, (1, 3))
    with pytest.raises(ConstructionError):
        covering_voltages(rank4_pipeline.base, (0,))


def test_restriction_needs_color_preserving(rank4_pipeline):
    """r0 swaps white and black flags."""
    with pytest.raises(StructureError):
        restrict_to_white(rank4_pipeline.base.adj[0], rank4_pipeline.coloring)


def test_words_as_voltages(rank4_pipeline):
    """Colour-preserving words restrict to permutations of the white flags."""
    element = rank4_pipeline.word([1, 2])
    assert element.degree == 256
    assert element.order() == 4


@pytest.mark.slow
@pytest.mark.parametrize("variant", ["xi", "xiprime"])
def test_both_variants_polytopal(rank4_pipeline, settings, variant):
    """The derived maniplexes of both variants are polytopal."""
    verdict = verify_polytopal(rank4_pipeline.premaniplex, rank4_pipeline.voltages(variant), settings)
    assert verdict.verdict == Verdict.POLYTOPAL
    assert verdict.intersection_report is not None
    assert verdict.intersection_report.all_passed
