"""
Service-level exceptions.

This module contains exceptions that can be raised by the construction and
verification services. Axiom failures of a well-formed input are reported in
the returned reports; exceptions are reserved for inputs that cannot be
processed at all.
"""
from typing import Optional


class ForgeError(Exception):
    """Base exception for maniplex construction and verification errors."""
    pass


class StructureError(ForgeError):
    """Raised when input data is malformed (not a permutation, bad JSON shape)."""
    pass


class ColorRangeError(StructureError):
    """Raised when a color or rank lies outside the admissible range."""
    pass


class InfeasibleError(ForgeError):
    """Raised when a size guard would be exceeded."""

    def __init__(self, message: str, limit: Optional[int] = None, required: Optional[int] = None):
        super().__init__(message)
        self.limit = limit
        self.required = required


class ConstructionError(ForgeError):
    """Raised when a construction's precondition does not hold."""
    pass


class PreconditionError(ForgeError):
    """Raised when an algorithm is called on input outside its domain."""
    pass
