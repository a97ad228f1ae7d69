"""
Constants and shared data for maniplex services.
"""
from typing import Tuple

WHITE = 0
BLACK = 1

DEFAULT_MATERIALIZE_CAP = 2 ** 24
DEFAULT_ENUMERATION_CAP = 10 ** 7
DEFAULT_ORACLE_CAP = 4096
DEFAULT_SAMPLE_PATHS = 10_000
DEFAULT_MAX_PATH_LENGTH = 32
DEFAULT_ELL = 2

# Above this flag count automorphism search is replaced by orbit bounds
AUTOMORPHISM_SEARCH_CAP = 200_000

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_INFEASIBLE = 2
EXIT_INPUT_ERROR = 3
EXIT_INTERNAL_ERROR = 4

# eta = r2 r1 r0 r1 r2 r1 r2 r1, applied left to right
KNIGHT_WORD: Tuple[int, ...] = (2, 1, 0, 1, 2, 1, 2, 1)

# Flags of a square in the order they are visited by r0, r1 alternately.
# Local flag k of a cell: 0=(c0,E0) 1=(c1,E0) 2=(c1,E1) 3=(c2,E1)
# 4=(c2,E2) 5=(c3,E2) 6=(c3,E3) 7=(c0,E3), corners counter-clockwise
# from the lower left, edges bottom/right/top/left.
SQUARE_FLAGS = 8

# r2 across the cell border: local flag -> (di, dj, local flag of neighbour)
TORUS_R2_MOVES: Tuple[Tuple[int, int, int], ...] = (
    (0, -1, 5),
    (0, -1, 4),
    (1, 0, 7),
    (1, 0, 6),
    (0, 1, 1),
    (0, 1, 0),
    (-1, 0, 3),
    (-1, 0, 2),
)

MAIN_SEMI_COLORS = (1, 2)
