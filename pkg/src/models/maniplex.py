"""
Maniplex model definitions: flag graphs, flag colorings and validation reports.
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field, model_validator

from src.services.utils import as_permutation


@dataclass(frozen=True, eq=False)
class Maniplex:
    """
    Rank-n edge-colored flag graph stored as n flag permutations.

    ``adj[i][flag]`` is the i-adjacent flag. Arrays are read-only once the
    object is built, so instances can be shared between threads.
    """
    adj: Tuple[np.ndarray, ...]
    labels: Optional[Dict[int, str]] = field(default=None)

    def __post_init__(self) -> None:
        size = int(np.asarray(self.adj[0]).shape[0]) if self.adj else 0
        arrays = tuple(as_permutation(images, size) for images in self.adj)
        object.__setattr__(self, "adj", arrays)

    @property
    def rank(self) -> int:
        """Number of colors."""
        return len(self.adj)

    @property
    def num_flags(self) -> int:
        """Number of flags."""
        return int(self.adj[0].shape[0]) if self.adj else 0

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Maniplex):
            return NotImplemented
        return self.rank == other.rank and all(
            np.array_equal(a, b) for a, b in zip(self.adj, other.adj)
        )

    def __hash__(self) -> int:
        return hash(tuple(a.tobytes() for a in self.adj))

    def to_document(self) -> "ManiplexDocument":
        """Serializable form."""
        return ManiplexDocument(
            rank=self.rank,
            num_flags=self.num_flags,
            adj=[a.tolist() for a in self.adj],
        )

    @classmethod
    def from_document(cls, document: "ManiplexDocument") -> "Maniplex":
        """Build from the serializable form."""
        return cls(adj=tuple(np.asarray(images, dtype=np.int64) for images in document.adj))

    @classmethod
    def from_pairs(cls, num_flags: int, pairs_by_color: Sequence[Sequence[Tuple[int, int]]]) -> "Maniplex":
        """
        Build a maniplex from the edges of every color.

        Args:
            num_flags: Number of flags
            pairs_by_color: For each color, the flag pairs joined by that color

        Returns:
            Maniplex whose adj arrays swap every listed pair
        """
        adj = []
        for pairs in pairs_by_color:
            images = np.arange(num_flags, dtype=np.int64)
            for a, b in pairs:
                images[a] = b
                images[b] = a
            adj.append(images)
        return cls(adj=tuple(adj))


class ManiplexDocument(BaseModel):
    """JSON form of a maniplex: ``{"rank", "num_flags", "adj"}``."""
    rank: int = Field(..., ge=1)
    num_flags: int = Field(..., ge=1)
    adj: List[List[int]]

    @model_validator(mode="after")
    def check_shape(self) -> "ManiplexDocument":
        """Check that there is one image list of the right length per color."""
        if len(self.adj) != self.rank:
            raise ValueError(f"expected {self.rank} adjacency lists, got {len(self.adj)}")
        for color, images in enumerate(self.adj):
            if len(images) != self.num_flags:
                raise ValueError(f"adjacency list {color} has {len(images)} entries, expected {self.num_flags}")
        return self


@dataclass(frozen=True, eq=False)
class FlagColoring:
    """
    Two-coloring of the flags: 0 is white and 1 is black.

    Every color in ``flip_colors`` joins flags of different colors; every
    other color joins flags of the same color.
    """
    color: np.ndarray
    flip_colors: FrozenSet[int]

    @property
    def white_flags(self) -> np.ndarray:
        """Ids of white flags in increasing order."""
        return np.flatnonzero(self.color == 0)

    @property
    def black_flags(self) -> np.ndarray:
        """Ids of black flags in increasing order."""
        return np.flatnonzero(self.color == 1)

    def is_white(self, flag: int) -> bool:
        """True if ``flag`` is white."""
        return bool(self.color[flag] == 0)


class ViolationKind(str, Enum):
    """Maniplex axioms a flag graph can violate."""
    FIXED_POINT = "fixed_point"
    MULTI_EDGE = "multi_edge"
    NON_COMMUTING = "non_commuting"
    DISCONNECTED = "disconnected"


class Violation(BaseModel):
    """A single violated axiom with a witness flag."""
    kind: ViolationKind
    colors: List[int]
    flag: int
    detail: str


class ValidationReport(BaseModel):
    """Outcome of checking the maniplex axioms."""
    rank: int
    num_flags: int
    violations: List[Violation] = Field(default_factory=list)

    @property
    def is_valid(self) -> bool:
        """True when no axiom is violated."""
        return not self.violations

    def kinds(self) -> List[ViolationKind]:
        """Distinct violation kinds, in report order."""
        seen: List[ViolationKind] = []
        for violation in self.violations:
            if violation.kind not in seen:
                seen.append(violation.kind)
        return seen
