"""
Voltage-group elements.

A voltage is a permutation of a fixed point set (the flags of a base
maniplex, or its white half) together with the exponent of a central
involution ``s`` that only acts on an auxiliary cyclic coordinate.
"""
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field

from src.services.exceptions import StructureError
from src.services.utils import as_permutation, identity, invert


@dataclass(frozen=True, eq=False)
class GroupElement:
    """
    Pair ``(perm, s_bit)`` under the right action.

    The product ``g * h`` applies ``g`` first and ``h`` second, matching the
    convention of sympy permutations. The ``s`` exponents add mod 2.
    """
    perm: np.ndarray
    s_bit: int = 0

    def __post_init__(self) -> None:
        if self.s_bit not in (0, 1):
            raise StructureError(f"s_bit must be 0 or 1, got {self.s_bit}")
        if not (isinstance(self.perm, np.ndarray) and not self.perm.flags.writeable):
            object.__setattr__(self, "perm", as_permutation(self.perm))

    @classmethod
    def identity(cls, degree: int) -> "GroupElement":
        """Identity on ``degree`` points."""
        return cls(identity(degree), 0)

    @classmethod
    def s(cls, degree: int) -> "GroupElement":
        """The central involution alone."""
        return cls(identity(degree), 1)

    @property
    def degree(self) -> int:
        """Number of points the permutation part acts on."""
        return int(self.perm.shape[0])

    def __mul__(self, other: "GroupElement") -> "GroupElement":
        if self.degree != other.degree:
            raise StructureError(f"Cannot multiply elements of degree {self.degree} and {other.degree}")
        product = other.perm[self.perm]
        product.setflags(write=False)
        return GroupElement(product, self.s_bit ^ other.s_bit)

    def inverse(self) -> "GroupElement":
        """Group inverse; ``s`` is its own inverse."""
        inv = invert(self.perm)
        inv.setflags(write=False)
        return GroupElement(inv, self.s_bit)

    def is_identity(self) -> bool:
        """True for the neutral element."""
        return self.s_bit == 0 and bool(np.array_equal(self.perm, np.arange(self.degree)))

    def order(self) -> int:
        """Element order, computed from cycle lengths."""
        seen = np.zeros(self.degree, dtype=bool)
        result = 1
        for start in range(self.degree):
            if seen[start]:
                continue
            length = 0
            point = start
            while not seen[point]:
                seen[point] = True
                point = int(self.perm[point])
                length += 1
            result = int(np.lcm(result, length))
        if self.s_bit:
            result = int(np.lcm(result, 2))
        return result

    def act(self, point: int) -> int:
        """Image of a point of the flag coordinate."""
        return int(self.perm[point])

    def act_explicit(self, point: int, z: int, ell: int) -> Tuple[int, int]:
        """
        Act on ``(point, z)`` with ``z`` in the cyclic group of order ``2 * ell``.

        ``s`` acts as ``z -> z + ell``; the permutation part leaves ``z`` alone.
        """
        if ell < 1:
            raise StructureError(f"ell must be positive, got {ell}")
        modulus = 2 * ell
        return int(self.perm[point]), (z + self.s_bit * ell) % modulus

    def key(self) -> bytes:
        """Hashable canonical form."""
        return self.perm.tobytes() + bytes([self.s_bit])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GroupElement):
            return NotImplemented
        return self.s_bit == other.s_bit and bool(np.array_equal(self.perm, other.perm))

    def __hash__(self) -> int:
        return hash(self.key())

    def __repr__(self) -> str:
        return f"GroupElement(degree={self.degree}, s={self.s_bit}, moved={int(np.count_nonzero(self.perm != np.arange(self.degree)))})"

    def to_document(self) -> "GroupElementDocument":
        """Serializable form."""
        return GroupElementDocument(perm=self.perm.tolist(), s=self.s_bit)

    @classmethod
    def from_document(cls, document: "GroupElementDocument") -> "GroupElement":
        """Build from the serializable form."""
        return cls(as_permutation(document.perm), document.s)


def product(elements: Sequence[GroupElement], degree: int) -> GroupElement:
    """Product ``e0 * e1 * ...``; empty products give the identity."""
    result = GroupElement.identity(degree)
    for element in elements:
        result = result * element
    return result


class GroupElementDocument(BaseModel):
    """JSON form of a voltage: ``{"perm": [...], "s": 0|1}``."""
    perm: List[int]
    s: int = Field(0, ge=0, le=1)
