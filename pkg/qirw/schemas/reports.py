import json
from typing import Any, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field

from qirw.schemas.documents import WeightingDocument

PASS = "PASS"
FAIL = "FAIL"


class LedgerDocument(BaseModel):
    model_config = ConfigDict(from_attributes=True)

    c: int
    c_prime: int
    r: int
    c2: int
    c3: int
    c0: int


class AnchorSystemDocument(BaseModel):
    model_config = ConfigDict(from_attributes=True)

    indices: list[int]
    vertices: list[int]
    q_path: list[int]


class DistanceWitness(BaseModel):
    """A weighted target distance the report promises; certify re-derives it."""

    u: int
    v: int
    distance: int
    kind: str = "anchor"


class LevelReport(BaseModel):
    depth: int
    source_vertices: int
    target_vertices: int
    width: int
    measured_c: Optional[int] = None
    remeasured_c: Optional[int] = None
    c_used: Optional[int] = None
    retried_with_c4: bool = False
    c: Optional[int] = None
    ledger: Optional[LedgerDocument] = None
    far_vertices: int = 0
    boundary_edges: int = 0
    fresh_id_start: Optional[int] = None
    base_case: bool = False
    # surjectivization: the stated (floor(L/(2C+1)), C) and the proved (L, C) readings
    reduction_readings: dict[str, list[int]] = Field(default_factory=dict)
    # worst-case (L, C) of the shortcut map next to its measured C
    shortcut_bound: Optional[list[int]] = None
    shortcut_measured_c: Optional[int] = None
    components: int = 0


class SynthesisReport(BaseModel):
    weighting: WeightingDocument
    c_prime: int
    w_bound: int
    internal_additive: Optional[int]
    achieved_size: int
    verdict: Literal["PASS", "FAIL"]
    profile: str
    levels: list[LevelReport] = []
    witnesses: list[DistanceWitness] = []
    anchors: Optional[AnchorSystemDocument] = None
    failure: Optional[dict] = None

    @classmethod
    def failed(cls, profile: str, levels: list[LevelReport], message: str, witness: dict[str, Any]) -> "SynthesisReport":
        """A FAIL report holding the violated guarantee and the levels reached before it."""
        return cls(
            weighting=WeightingDocument(weights=[]),
            c_prime=0,
            w_bound=0,
            internal_additive=None,
            achieved_size=0,
            verdict=FAIL,
            profile=profile,
            levels=list(levels),
            failure={"message": message, "witness": json.loads(json.dumps(witness, default=str))},
        )


class Verdict(BaseModel):
    verdict: Literal["PASS", "FAIL"]
    oracle_additive: Optional[int]
    achieved_size: Optional[int]
    claimed_c_prime: int
    claimed_w: int
    diffs: list[str] = []

    @property
    def passed(self) -> bool:
        return self.verdict == PASS
