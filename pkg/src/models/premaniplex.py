"""
Premaniplex model definitions: darts, premaniplexes, paths and voltage assignments.
"""
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field

from src.models.group import GroupElement, GroupElementDocument
from src.services.exceptions import ColorRangeError, StructureError


class Dart(BaseModel):
    """
    Directed half of an edge.

    A dart whose inverse is itself is a semi-edge.
    """
    model_config = ConfigDict(frozen=True, populate_by_name=True)

    id: int = Field(..., ge=0)
    color: int = Field(..., ge=0)
    start: int = Field(..., ge=0, alias="from")
    end: int = Field(..., ge=0, alias="to")
    inv: int = Field(..., ge=0)

    @property
    def is_semi_edge(self) -> bool:
        """True if the dart is its own inverse."""
        return self.inv == self.id


@dataclass(frozen=True)
class Premaniplex:
    """
    Small multigraph with one dart of every color at every vertex.

    Dart ids must be 0..len(darts)-1 in order. ``vertex_labels`` is free
    text, e.g. "white"/"black" on two-vertex premaniplexes.
    """
    rank: int
    num_vertices: int
    darts: Tuple[Dart, ...]
    vertex_labels: Optional[Tuple[str, ...]] = None
    _at: Dict[Tuple[int, int], int] = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self) -> None:
        at: Dict[Tuple[int, int], int] = {}
        for index, dart in enumerate(self.darts):
            if dart.id != index:
                raise StructureError(f"Dart ids must be consecutive, found {dart.id} at position {index}")
            if dart.color >= self.rank:
                raise ColorRangeError(f"Dart {dart.id} has color {dart.color} outside rank {self.rank}")
            if dart.start >= self.num_vertices or dart.end >= self.num_vertices:
                raise StructureError(f"Dart {dart.id} leaves the vertex range")
            if dart.inv >= len(self.darts):
                raise StructureError(f"Dart {dart.id} has unknown inverse {dart.inv}")
            inverse = self.darts[dart.inv]
            if inverse.inv != dart.id or inverse.color != dart.color:
                raise StructureError(f"Dart {dart.id} and {dart.inv} are not mutually inverse")
            if inverse.start != dart.end or inverse.end != dart.start:
                raise StructureError(f"Inverse of dart {dart.id} does not reverse it")
            key = (dart.start, dart.color)
            if key in at:
                raise StructureError(f"Vertex {dart.start} has two darts of color {dart.color}")
            at[key] = dart.id
        for vertex in range(self.num_vertices):
            for color in range(self.rank):
                if (vertex, color) not in at:
                    raise StructureError(f"Vertex {vertex} has no dart of color {color}")
        self._at.update(at)

    def dart_at(self, vertex: int, color: int) -> Dart:
        """The unique dart of ``color`` starting at ``vertex``."""
        if not 0 <= color < self.rank:
            raise ColorRangeError(f"Color {color} out of range for rank {self.rank}")
        return self.darts[self._at[(vertex, color)]]

    def step(self, vertex: int, color: int) -> int:
        """Vertex reached from ``vertex`` along ``color``."""
        return self.dart_at(vertex, color).end

    def semi_edge_colors(self, vertex: int) -> List[int]:
        """Colors of the semi-edges at ``vertex``."""
        return [c for c in range(self.rank) if self.dart_at(vertex, c).is_semi_edge]

    def to_document(self) -> "PremaniplexDocument":
        """Serializable form."""
        return PremaniplexDocument(
            rank=self.rank,
            vertices=self.num_vertices,
            darts=list(self.darts),
            labels=list(self.vertex_labels) if self.vertex_labels else None,
        )

    @classmethod
    def from_document(cls, document: "PremaniplexDocument") -> "Premaniplex":
        """Build from the serializable form."""
        rank = document.rank
        if rank is None:
            rank = 1 + max((d.color for d in document.darts), default=-1)
        return cls(
            rank=rank,
            num_vertices=document.vertices,
            darts=tuple(document.darts),
            vertex_labels=tuple(document.labels) if document.labels else None,
        )


class PremaniplexDocument(BaseModel):
    """JSON form: ``{"vertices": k, "darts": [{"id","color","from","to","inv"}]}``."""
    model_config = ConfigDict(populate_by_name=True)

    vertices: int = Field(..., ge=1)
    darts: List[Dart]
    rank: Optional[int] = Field(None, ge=1)
    labels: Optional[List[str]] = None


@dataclass(frozen=True)
class Path:
    """Start vertex and dart sequence; the empty sequence is the trivial path."""
    start: int
    darts: Tuple[int, ...] = ()

    def __len__(self) -> int:
        return len(self.darts)


@dataclass(frozen=True)
class VoltageAssignment:
    """
    Voltage of every dart, indexed by dart id.

    Inverse darts carry inverse voltages.
    """
    voltages: Tuple[GroupElement, ...]

    def __post_init__(self) -> None:
        if not self.voltages:
            raise StructureError("A voltage assignment needs at least one dart")
        degree = self.voltages[0].degree
        for dart_id, voltage in enumerate(self.voltages):
            if voltage.degree != degree:
                raise StructureError(f"Voltage of dart {dart_id} has degree {voltage.degree}, expected {degree}")

    @property
    def degree(self) -> int:
        """Number of points the voltages act on."""
        return self.voltages[0].degree

    def of(self, dart_id: int) -> GroupElement:
        """Voltage of a dart."""
        return self.voltages[dart_id]

    def check_inverses(self, premaniplex: Premaniplex) -> None:
        """
        Check ``xi(d^-1) = xi(d)^-1`` for every dart.

        Raises:
            StructureError: On a size mismatch or an inconsistent pair
        """
        if len(self.voltages) != len(premaniplex.darts):
            raise StructureError(
                f"{len(self.voltages)} voltages for {len(premaniplex.darts)} darts"
            )
        for dart in premaniplex.darts:
            if self.voltages[dart.inv] != self.voltages[dart.id].inverse():
                raise StructureError(f"Voltage of dart {dart.inv} is not the inverse of dart {dart.id}")

    def to_document(self) -> Dict[str, GroupElementDocument]:
        """Serializable form keyed by dart id."""
        return {str(i): v.to_document() for i, v in enumerate(self.voltages)}

    @classmethod
    def from_document(cls, document: Dict[str, GroupElementDocument]) -> "VoltageAssignment":
        """Build from the serializable form."""
        try:
            ordered = [document[str(i)] for i in range(len(document))]
        except KeyError as e:
            raise StructureError(f"Voltage JSON is missing dart {e}") from e
        return cls(tuple(GroupElement.from_document(d) for d in ordered))
