import enum
from dataclasses import dataclass
from functools import cached_property
from types import MappingProxyType
from typing import Iterable, Mapping, Optional, Union

from qirw.core.exceptions import InputError
from qirw.models.graph import Graph, Metric, Vertex, host_of


class Infeasible(enum.Enum):
    """No finite constant works: a pair is finite on one side and infinite on the other."""

    INFEASIBLE = "infeasible"

    def __str__(self) -> str:
        return self.value


INFEASIBLE = Infeasible.INFEASIBLE
Constant = Union[int, Infeasible]


@dataclass(frozen=True, eq=False)
class VertexMap:
    """A total map V(source) -> V(target); the target may carry edge weights."""

    source: Graph
    target: Metric
    image: Mapping[Vertex, Vertex]

    def __post_init__(self):
        image = dict(self.image)
        if set(image) != set(self.source.vertex_ids):
            missing = sorted(set(self.source.vertex_ids) - set(image))
            raise InputError("vertex map is not total on the source", data={"missing": missing[:20]})
        target_vertices = self.target_graph.vertex_ids
        outside = sorted(v for v, x in image.items() if x not in target_vertices)
        if outside:
            raise InputError("vertex map sends vertices outside the target", data={"sources": outside[:20]})
        object.__setattr__(self, "image", MappingProxyType(image))

    @property
    def target_graph(self) -> Graph:
        return host_of(self.target)

    def __call__(self, v: Vertex) -> Vertex:
        return self.image[v]

    @cached_property
    def image_set(self) -> frozenset[Vertex]:
        return frozenset(self.image.values())

    def preimages(self, targets: Iterable[Vertex]) -> list[Vertex]:
        targets = set(targets)
        return sorted(v for v, x in self.image.items() if x in targets)

    def preimage_selector(self) -> Mapping[Vertex, Vertex]:
        """The minimum-id preimage of every image vertex."""
        chosen: dict[Vertex, Vertex] = {}
        for v in self.source.sorted_vertices:
            chosen.setdefault(self.image[v], v)
        return MappingProxyType(chosen)

    def is_surjective(self) -> bool:
        return self.image_set == self.target_graph.vertex_ids

    def onto(self, target: Metric) -> "VertexMap":
        """The same assignment read into another target (for example a weighting of it)."""
        return VertexMap(self.source, target, self.image)


@dataclass(frozen=True)
class QIParams:
    L: int
    C: int

    def __post_init__(self):
        if self.L < 0 or self.C < 0:
            raise InputError(f"quasi-isometry parameters must be non-negative, got ({self.L}, {self.C})")

    @classmethod
    def normal(cls, c: int) -> "QIParams":
        """The (C-1, C) form."""
        return cls(max(c - 1, 0), c)


@dataclass(frozen=True)
class QIViolation:
    """First violated bullet of the definition (1, 2 or 3) with its witnesses."""

    bullet: int
    witnesses: tuple
    detail: str

    def as_dict(self) -> dict:
        return {"bullet": self.bullet, "witnesses": [str(w) for w in self.witnesses], "detail": self.detail}


@dataclass(frozen=True)
class ClusterAssignment:
    host: Graph
    clusters: Mapping[Vertex, frozenset[Vertex]]
    owner: Mapping[Vertex, Vertex]
    depth: Optional[Mapping[Vertex, int]] = None

    @property
    def representatives(self) -> frozenset[Vertex]:
        return frozenset(self.clusters)

    def is_trivial(self) -> bool:
        return all(len(members) == 1 for members in self.clusters.values())
