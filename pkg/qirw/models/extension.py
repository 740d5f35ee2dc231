from dataclasses import dataclass
from typing import Optional, Protocol

from qirw.models.anchors import AnchorSystem
from qirw.models.decomposition import PathDecomposition
from qirw.models.graph import Edge, EdgeWeighting, Graph, Path, Vertex
from qirw.models.quasi_isometry import VertexMap


@dataclass(frozen=True)
class ConstantLedger:
    c: int
    c_prime: int
    r: int
    c2: int
    c3: int
    c0: int

    def as_dict(self) -> dict:
        return {"c": self.c, "c_prime": self.c_prime, "r": self.r, "c2": self.c2, "c3": self.c3, "c0": self.c0}


@dataclass(frozen=True)
class BounderOutcome:
    """What a recursive bounder hands back for (F, H')."""

    weighting: EdgeWeighting
    additive: int
    size: int
    claimed: int


class AdditiveBounder(Protocol):
    def __call__(self, psi: VertexMap, decomposition: PathDecomposition) -> BounderOutcome: ...


@dataclass(frozen=True)
class ExtensionScaffold:
    phi: VertexMap
    geodesic: Path
    c: int
    r: int
    near: frozenset[Vertex]
    far: frozenset[Vertex]
    far_image: frozenset[Vertex]
    y_set: frozenset[Vertex]
    z_set: frozenset[Vertex]
    boundary: frozenset[Edge]
    h_prime: Graph
    f_graph: Graph
    psi: Optional[VertexMap]
    fresh_id_start: int
    shortcut_paths: int
    decomposition: Optional[PathDecomposition] = None


@dataclass(frozen=True)
class UsegeoInput:
    """Everything the extension step consumes; fixgeo output is one way to fill it."""

    phi: VertexMap
    geodesic: Path
    anchors: AnchorSystem
    w1: EdgeWeighting
    c: int
    decomposition: PathDecomposition


@dataclass(frozen=True)
class ExtensionResult:
    weighting: EdgeWeighting
    ledger: ConstantLedger
    scaffold: ExtensionScaffold
    outcome: Optional[BounderOutcome]
