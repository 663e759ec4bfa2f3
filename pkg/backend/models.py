from __future__ import annotations
from typing import Dict, List, Optional, Union
from enum import Enum
from pydantic import BaseModel, Field, field_validator

from backend.padic_core import PadicNumber, is_odd_prime
from config import (
    DEFAULT_PRECISION,
    DEFAULT_PRIME,
    DEFAULT_WEIGHT,
    MAX_DEGREE,
    MAX_PRECISION,
    MAX_WEIGHT,
    VERIFY_SUITES,
)


class Suite(str, Enum):
    shuffle = "shuffle"
    grouplike = "grouplike"
    anchors = "anchors"
    theorem = "theorem"
    torsor = "torsor"
    oracle = "oracle"
    branch = "branch"
    precision = "precision"


class RouteName(str, Enum):
    af = "af"
    cl = "cl"
    disc0 = "disc0"
    disc1 = "disc1"
    samedisc = "samedisc"
    reverse = "reverse"


class RunConfig(BaseModel):
    """Validated command-line parameters."""
    p: int = DEFAULT_PRIME
    N: int = Field(default=DEFAULT_PRECISION, ge=1, le=MAX_PRECISION)
    W: int = Field(default=DEFAULT_WEIGHT, ge=0, le=MAX_WEIGHT)
    D: Union[int, str] = "auto"
    threads: int = Field(default=1, ge=1)
    word: Optional[str] = None
    index: Optional[List[int]] = None
    z: Optional[str] = None
    lower: Optional[str] = None
    upper: Optional[str] = None
    suites: List[Suite] = Field(default_factory=lambda: [Suite(s) for s in VERIFY_SUITES])
    json_out: Optional[str] = None
    pretty: bool = False

    @field_validator("p")
    @classmethod
    def _odd_prime(cls, v: int) -> int:
        if not is_odd_prime(v):
            raise ValueError("p must be an odd prime")
        return v

    @field_validator("D")
    @classmethod
    def _degree(cls, v: Union[int, str]) -> Union[int, str]:
        if v == "auto":
            return v
        d = int(v)
        if not 1 <= d <= MAX_DEGREE:
            raise ValueError(f"D must be 'auto' or lie in [1, {MAX_DEGREE}]")
        return d

    @field_validator("index")
    @classmethod
    def _index(cls, v: Optional[List[int]]) -> Optional[List[int]]:
        if v is not None and (not v or any(k < 1 for k in v)):
            raise ValueError("index entries must be positive integers")
        return v

    @property
    def degree(self) -> Optional[int]:
        return None if self.D == "auto" else int(self.D)


class PadicValue(BaseModel):
    """JSON rendering of a p-adic number."""
    p: int
    v: int
    unit: str
    prec: int
    zero: bool
    text: str

    @classmethod
    def of(cls, x: PadicNumber) -> "PadicValue":
        return cls(**x.to_json(), text=x.render())


class SolverStatsOut(BaseModel):
    weight: int
    unknowns: int
    equations: int
    rank: int


class Manifest(BaseModel):
    """Run parameters, kept apart from the value payload."""
    p: int
    N: int
    W: int
    D: Optional[int] = None
    threads: int = 1
    solver: List[SolverStatsOut] = []


class ValueResult(BaseModel):
    p: int
    N: int
    word: str
    route: RouteName
    value: PadicValue
    check: Optional[str] = None
    manifest: Optional[Manifest] = None


class CheckResult(BaseModel):
    suite: Suite
    name: str
    passed: bool
    residual: str = "0"
    tolerance: str = "0"
    detail: str = ""


class VerifyReport(BaseModel):
    p: int
    N: int
    W: int
    passed: bool
    checks: List[CheckResult]
    counts: Dict[str, int] = {}


class ShuffleResult(BaseModel):
    u: str
    v: str
    terms: List[Dict[str, Union[str, int]]]
