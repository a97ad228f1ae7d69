"""
Permutation groups over voltage-group elements.

Groups are generated by GroupElement values acting on a common point set.
Stabilizer chains come from sympy's Schreier-Sims implementation; the
central involution ``s`` is encoded as a transposition of two extra points
appended after the flag points.

Typical usage:
    group = PermGroup([r1, r2], degree)
    group.order()
    group.contains(element)
    coset_intersection(Coset(g, group), Coset(h, other), cap)
"""
import threading
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Literal, Optional, Sequence

import numpy as np
from aws_lambda_powertools import Logger
from sympy.combinatorics import Permutation, PermutationGroup

from src.models.group import GroupElement
from src.models.maniplex import Maniplex
from src.services.constants import DEFAULT_ENUMERATION_CAP
from src.services.exceptions import InfeasibleError, StructureError

logger = Logger()


def to_sympy(element: GroupElement) -> Permutation:
    """Encode ``(perm, s)`` as a sympy permutation on ``degree + 2`` points."""
    n = element.degree
    tail = [n + 1, n] if element.s_bit else [n, n + 1]
    return Permutation(element.perm.tolist() + tail)


def from_sympy(perm: Permutation, degree: int) -> GroupElement:
    """Decode a sympy permutation produced by :func:`to_sympy`."""
    images = perm.array_form
    if len(images) < degree + 2:
        images = images + list(range(len(images), degree + 2))
    s_bit = 1 if images[degree] == degree + 1 else 0
    return GroupElement(np.asarray(images[:degree], dtype=np.int64), s_bit)


@dataclass(eq=False)
class PermGroup:
    """
    Finitely generated group of GroupElement values.

    The sympy group and its stabilizer chain are built on first use under a
    lock; afterwards the object is only read.
    """
    generators: List[GroupElement]
    degree: int
    _group: Optional[PermutationGroup] = field(default=None, repr=False)
    _order: Optional[int] = field(default=None, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def __post_init__(self) -> None:
        for generator in self.generators:
            if generator.degree != self.degree:
                raise StructureError(
                    f"Generator of degree {generator.degree} in a group of degree {self.degree}"
                )
        # drop identities and repeats, keep first-seen order
        unique: Dict[bytes, GroupElement] = {}
        for generator in self.generators:
            if not generator.is_identity():
                unique.setdefault(generator.key(), generator)
        self.generators = list(unique.values())

    @property
    def sympy_group(self) -> PermutationGroup:
        """The sympy group with its Schreier-Sims data computed."""
        if self._group is None:
            with self._lock:
                if self._group is None:
                    if self.generators:
                        group = PermutationGroup([to_sympy(g) for g in self.generators])
                    else:
                        group = PermutationGroup([Permutation(list(range(self.degree + 2)))])
                    group.schreier_sims()
                    self._order = int(group.order())
                    self._group = group
                    logger.debug("Stabilizer chain built", extra={
                        "degree": self.degree,
                        "generators": len(self.generators),
                        "order": self._order,
                    })
        return self._group

    def order(self) -> int:
        """Exact group order."""
        _ = self.sympy_group
        assert self._order is not None
        return self._order

    def contains(self, element: GroupElement) -> bool:
        """Exact membership."""
        if element.degree != self.degree:
            return False
        if element.is_identity():
            return True
        return bool(self.sympy_group.contains(to_sympy(element), strict=False))

    def contains_group(self, other: "PermGroup") -> bool:
        """True if every generator of ``other`` lies in this group."""
        return all(self.contains(g) for g in other.generators)

    def equals(self, other: "PermGroup") -> bool:
        """Group equality by mutual containment."""
        return self.contains_group(other) and other.contains_group(self)

    def elements(self, cap: int = DEFAULT_ENUMERATION_CAP) -> Iterator[GroupElement]:
        """
        Enumerate all elements.

        Raises:
            InfeasibleError: If the order exceeds ``cap``
        """
        order = self.order()
        if order > cap:
            raise InfeasibleError(
                f"Group of order {order} exceeds the enumeration cap {cap}",
                limit=cap,
                required=order,
            )
        for perm in self.sympy_group.generate(af=True):
            yield from_sympy(Permutation(perm), self.degree)

    def with_generators(self, extra: Sequence[GroupElement]) -> "PermGroup":
        """Group generated by the current generators and ``extra``."""
        return PermGroup(list(self.generators) + list(extra), self.degree)


def group_order(group: PermGroup) -> int:
    """Exact order of ``group``."""
    return group.order()


def contains(group: PermGroup, element: GroupElement) -> bool:
    """Exact membership test."""
    return group.contains(element)


def monodromy_group(M: Maniplex) -> PermGroup:
    """The monodromy group ``<r_0, ..., r_{n-1}>`` acting on all flags."""
    return PermGroup([GroupElement(a) for a in M.adj], M.num_flags)


@dataclass(eq=False)
class Coset:
    """
    ``rep * H`` (left) or ``H * rep`` (right).

    Path voltages between two vertices form left cosets of the voltage
    group of closed paths at the start vertex.
    """
    rep: GroupElement
    subgroup: PermGroup
    side: Literal["left", "right"] = "left"

    def contains(self, element: GroupElement) -> bool:
        """Exact membership."""
        if self.side == "left":
            return self.subgroup.contains(self.rep.inverse() * element)
        return self.subgroup.contains(element * self.rep.inverse())

    def size(self) -> int:
        """Number of elements."""
        return self.subgroup.order()

    def elements(self, cap: int = DEFAULT_ENUMERATION_CAP) -> Iterator[GroupElement]:
        """Enumerate the coset (refuses above ``cap``)."""
        for h in self.subgroup.elements(cap):
            yield self.rep * h if self.side == "left" else h * self.rep

    def contains_coset(self, other: "Coset") -> bool:
        """
        True if ``other`` is a subset, decided from generators.

        ``aH ⊆ bK`` holds exactly when ``a`` lies in ``bK`` and ``H ⊆ K``;
        the same holds for right cosets. Mixed sides are not compared.
        """
        if self.side != other.side:
            return False
        return self.contains(other.rep) and self.subgroup.contains_group(other.subgroup)


def intersection_elements(A: Coset, B: Coset, cap: int = DEFAULT_ENUMERATION_CAP) -> List[GroupElement]:
    """
    Elements of ``A ∩ B`` by enumerating the smaller side.

    Raises:
        InfeasibleError: If both sides exceed ``cap``
    """
    if A.rep.degree != B.rep.degree:
        raise StructureError("Cosets act on different point sets")
    small, large = (A, B) if A.size() <= B.size() else (B, A)
    if small.size() > cap:
        raise InfeasibleError(
            f"Both cosets exceed the enumeration cap {cap}",
            limit=cap,
            required=small.size(),
        )
    found = [g for g in small.elements(cap) if large.contains(g)]
    found.sort(key=lambda g: g.key())
    return found


def coset_intersection(A: Coset, B: Coset, cap: int = DEFAULT_ENUMERATION_CAP) -> Optional[Coset]:
    """
    Intersection of two cosets on the same side.

    The result is empty or a coset of ``H_A ∩ H_B`` on that side. Its
    subgroup is generated greedily from the translated elements.

    Returns:
        Coset, or None when the intersection is empty

    Raises:
        StructureError: If one coset is left and the other right
    """
    if A.side != B.side:
        raise StructureError("Cannot intersect a left coset with a right coset")
    found = intersection_elements(A, B, cap)
    if not found:
        return None
    rep = found[0]
    inverse = rep.inverse()
    subgroup = PermGroup([], rep.degree)
    for element in found[1:]:
        candidate = inverse * element if A.side == "left" else element * inverse
        if not subgroup.contains(candidate):
            subgroup = subgroup.with_generators([candidate])
    return Coset(rep=rep, subgroup=subgroup, side=A.side)
