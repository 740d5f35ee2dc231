from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from qirw.core.exceptions import InputError
from qirw.models.decomposition import PathDecomposition
from qirw.models.graph import EdgeWeighting, Graph, edge_key
from qirw.models.instance import Instance
from qirw.models.quasi_isometry import VertexMap


class GraphDocument(BaseModel):
    vertices: list[int]
    edges: list[tuple[int, int]] = []

    @field_validator("vertices")
    @classmethod
    def non_negative_ids(cls, vertices: list[int]) -> list[int]:
        if any(v < 0 for v in vertices):
            raise ValueError("vertex ids must be non-negative")
        if len(set(vertices)) != len(vertices):
            raise ValueError("vertex ids must be unique")
        return vertices

    @model_validator(mode="after")
    def edges_inside(self) -> "GraphDocument":
        known = set(self.vertices)
        for u, v in self.edges:
            if u == v:
                raise ValueError(f"loop at vertex {u}")
            if u not in known or v not in known:
                raise ValueError(f"edge [{u}, {v}] has an endpoint outside the vertex list")
        return self

    def to_domain(self) -> Graph:
        return Graph.build(self.vertices, self.edges)

    @classmethod
    def from_domain(cls, g: Graph) -> "GraphDocument":
        return cls(vertices=list(g.sorted_vertices), edges=sorted(g.edges))


class WeightingDocument(BaseModel):
    weights: list[tuple[int, int, int]]

    @field_validator("weights")
    @classmethod
    def non_negative(cls, weights: list[tuple[int, int, int]]) -> list[tuple[int, int, int]]:
        for u, v, w in weights:
            if w < 0:
                raise ValueError(f"weight of edge [{u}, {v}] is negative")
        return weights

    def to_domain(self, host: Graph) -> EdgeWeighting:
        weights = {}
        for u, v, w in self.weights:
            e = edge_key(u, v)
            if e in weights:
                raise InputError(f"edge [{u}, {v}] is weighted twice")
            weights[e] = w
        return EdgeWeighting(host, weights)

    @classmethod
    def from_domain(cls, hw: EdgeWeighting) -> "WeightingDocument":
        return cls(weights=[(u, v, w) for (u, v), w in sorted(hw.weight.items())])


class DecompositionDocument(BaseModel):
    bags: list[list[int]]

    def to_domain(self, host: Graph) -> PathDecomposition:
        return PathDecomposition.build(host, self.bags)

    @classmethod
    def from_domain(cls, d: PathDecomposition) -> "DecompositionDocument":
        return cls(bags=[sorted(bag) for bag in d.bags])


class VertexMapDocument(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    pairs: list[tuple[int, int]] = Field(alias="map")

    def to_domain(self, source: Graph, target: Graph) -> VertexMap:
        image = dict(self.pairs)
        if len(image) != len(self.pairs):
            raise InputError("a source vertex is mapped twice")
        return VertexMap(source, target, image)

    @classmethod
    def from_domain(cls, phi: VertexMap) -> "VertexMapDocument":
        return cls(pairs=sorted(phi.image.items()))


class Provenance(BaseModel):
    generator: str
    seed: Optional[int] = None
    params: dict = {}


class InstanceDocument(BaseModel):
    g: GraphDocument
    h: GraphDocument
    bags: DecompositionDocument
    phi: VertexMapDocument
    provenance: Optional[Provenance] = None

    def to_domain(self) -> Instance:
        g = self.g.to_domain()
        h = self.h.to_domain()
        provenance = self.provenance.model_dump() if self.provenance else {}
        return Instance(g=g, h=h, decomposition=self.bags.to_domain(h), phi=self.phi.to_domain(g, h), provenance=provenance)

    @classmethod
    def from_domain(cls, instance: Instance) -> "InstanceDocument":
        return cls(
            g=GraphDocument.from_domain(instance.g),
            h=GraphDocument.from_domain(instance.h),
            bags=DecompositionDocument.from_domain(instance.decomposition),
            phi=VertexMapDocument.from_domain(instance.phi),
            provenance=Provenance(**instance.provenance) if instance.provenance else None,
        )
