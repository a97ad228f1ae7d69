"""
Report models shared by verification services and the command-line front end.
"""
from enum import Enum
from typing import List, Optional, Tuple

from pydantic import BaseModel, Field


class OracleStatus(str, Enum):
    """Verdicts of the face-poset oracle."""
    POLYTOPE = "polytope"
    NOT_POLYTOPE = "not_polytope"
    INFEASIBLE = "infeasible"


class DiamondViolation(BaseModel):
    """A pair of faces two ranks apart without exactly two faces between them."""
    lower: Tuple[int, int]
    upper: Tuple[int, int]
    between: int


class FlagConnectivityFailure(BaseModel):
    """Two flags agreeing outside ``colors`` that cannot be joined using ``colors``."""
    colors: List[int]
    flags: Tuple[Tuple[int, ...], Tuple[int, ...]]


class OracleResult(BaseModel):
    """Outcome of the direct polytopality oracle."""
    status: OracleStatus
    num_flags: int
    reasons: List[str] = Field(default_factory=list)
    face_counts: List[int] = Field(default_factory=list)

    @property
    def is_polytope(self) -> bool:
        """True only for a positive verdict."""
        return self.status == OracleStatus.POLYTOPE


class LatticeFailure(BaseModel):
    """Pair of faces without a unique join or meet."""
    faces: Tuple[Tuple[int, int], Tuple[int, int]]
    operation: str
    candidates: List[Tuple[int, int]]


class LatticeReport(BaseModel):
    """Outcome of the lattice check, with formula cross-check counts on doubled posets."""
    is_lattice: bool
    failures: List[LatticeFailure] = Field(default_factory=list)
    pairs_checked: int = 0
    formula_checked: int = 0
    formula_mismatches: int = 0


class CheckResult(BaseModel):
    """A single named pass/fail check with an optional witness."""
    name: str
    passed: bool
    detail: Optional[str] = None


class ManiplexCheckReport(BaseModel):
    """Per-condition outcome of the derived-graph maniplex test."""
    generation: CheckResult
    semi_edge_order: CheckResult
    parallel_darts: CheckResult
    alternating_paths: CheckResult
    gauge_normalized: bool = False

    @property
    def checks(self) -> List[CheckResult]:
        """All four conditions in order."""
        return [self.generation, self.semi_edge_order, self.parallel_darts, self.alternating_paths]

    @property
    def is_maniplex(self) -> bool:
        """True when every condition holds."""
        return all(check.passed for check in self.checks)

    def first_failure(self) -> Optional[CheckResult]:
        """First failing condition, if any."""
        return next((check for check in self.checks if not check.passed), None)


class TupleStatus(str, Enum):
    """Outcome of one intersection tuple."""
    PASS = "pass"
    FAIL = "fail"
    INFEASIBLE = "infeasible"


class TupleResult(BaseModel):
    """Intersection check for one ``(k, m, a, b)``."""
    k: int
    m: int
    a: int
    b: int
    status: TupleStatus
    method: str
    witness: Optional[str] = None


class IntersectionReport(BaseModel):
    """Outcome of the intersection-property checker over all tuples."""
    rank: int
    tuples: List[TupleResult] = Field(default_factory=list)

    @property
    def failures(self) -> List[TupleResult]:
        """Tuples where the equality fails."""
        return [t for t in self.tuples if t.status == TupleStatus.FAIL]

    @property
    def infeasible(self) -> List[TupleResult]:
        """Tuples the checker refused."""
        return [t for t in self.tuples if t.status == TupleStatus.INFEASIBLE]

    @property
    def all_passed(self) -> bool:
        """True when every tuple passed."""
        return all(t.status == TupleStatus.PASS for t in self.tuples)


class Verdict(str, Enum):
    """Polytopality verdicts for a voltage construction."""
    POLYTOPAL = "polytopal"
    NOT_MANIPLEX = "not_maniplex"
    NOT_POLYTOPAL = "not_polytopal"
    INFEASIBLE = "infeasible"


class PolytopalityVerdict(BaseModel):
    """Combined maniplex and intersection verdict."""
    verdict: Verdict
    maniplex_report: ManiplexCheckReport
    intersection_report: Optional[IntersectionReport] = None
    witness: Optional[str] = None


class CrossValidationReport(BaseModel):
    """Agreement between the voltage checker and the poset oracle."""
    checker: Verdict
    oracle: Optional[OracleStatus] = None
    agree: Optional[bool] = None
    skipped: bool = False
    notice: Optional[str] = None


class SuiteReport(BaseModel):
    """Named collection of checks, as written by ``forge verify``."""
    suite: str
    seed: int
    checks: List[CheckResult] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        """True when every check passed."""
        return all(check.passed for check in self.checks)

    def add(self, name: str, passed: bool, detail: Optional[str] = None) -> None:
        """Append a check result."""
        self.checks.append(CheckResult(name=name, passed=bool(passed), detail=detail))
