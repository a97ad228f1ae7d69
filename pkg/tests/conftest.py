"""
Pytest configuration and shared fixtures.
"""
import os
from typing import Tuple

import pytest

# Keep test logs quiet unless asked for
os.environ.setdefault('LOG_LEVEL', 'WARNING')

from src.models.config import ForgeSettings
from src.models.maniplex import Maniplex
from src.models.premaniplex import Premaniplex, VoltageAssignment
from src.services.constructions import (
    cuboctahedron as build_cuboctahedron,
    one_cell_torus,
    rhombic_dodecahedron as build_rhombic_dodecahedron,
    square_flag_graph,
    torus_map_44,
)
from src.services.xi import Rank4Pipeline, build_rank4_pipeline, covering_voltages


@pytest.fixture
def settings() -> ForgeSettings:
    """Small sampling budget and a fixed seed."""
    return ForgeSettings(seed=7, sample_paths=60, max_path_length=12, jobs=1)


@pytest.fixture
def square() -> Maniplex:
    """Flag graph of the square (8 flags)."""
    return square_flag_graph()


@pytest.fixture
def torus2() -> Maniplex:
    """The map {4,4}_(2,0) (32 flags)."""
    return torus_map_44(2)


@pytest.fixture(scope="session")
def torus4() -> Maniplex:
    """The map {4,4}_(4,0) (128 flags)."""
    return torus_map_44(4)


@pytest.fixture(scope="session")
def torus8() -> Maniplex:
    """The map {4,4}_(8,0) (512 flags)."""
    return torus_map_44(8)


@pytest.fixture
def one_cell() -> Maniplex:
    """The map {4,4}_(1,0): a maniplex that is not polytopal."""
    return one_cell_torus()


@pytest.fixture(scope="session")
def cuboctahedron() -> Maniplex:
    """The cuboctahedron (96 flags, two flag orbits)."""
    return build_cuboctahedron()


@pytest.fixture(scope="session")
def rhombic_dodecahedron() -> Maniplex:
    """The rhombic dodecahedron (96 flags, two flag orbits)."""
    return build_rhombic_dodecahedron()


@pytest.fixture
def two_orbit_rank3(torus4: Maniplex) -> Tuple[Premaniplex, VoltageAssignment]:
    """Covering voltages of {4,4}_(4,0) on the premaniplex with semi-edges 1 and 2."""
    X, _, xi = covering_voltages(torus4, (1, 2))
    return X, xi


@pytest.fixture(scope="session")
def rank4_pipeline() -> Rank4Pipeline:
    """The rank 4 construction over {4,4}_(8,0) with the knight monodromy."""
    return build_rank4_pipeline()
