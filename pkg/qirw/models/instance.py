from dataclasses import dataclass, field

from qirw.models.decomposition import PathDecomposition
from qirw.models.graph import Graph
from qirw.models.quasi_isometry import VertexMap


@dataclass(frozen=True)
class Instance:
    """A map phi: G -> H with a decomposition of H; provenance is enough to regenerate it."""

    g: Graph
    h: Graph
    decomposition: PathDecomposition
    phi: VertexMap
    provenance: dict = field(default_factory=dict)
