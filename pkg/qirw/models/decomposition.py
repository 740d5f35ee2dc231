from dataclasses import dataclass
from typing import Iterable

from qirw.models.graph import Graph, Vertex


@dataclass(frozen=True)
class PathDecomposition:
    """Bags B_0..B_{n-1} over a host graph, indexed by position."""

    host: Graph
    bags: tuple[frozenset[Vertex], ...]

    @classmethod
    def build(cls, host: Graph, bags: Iterable[Iterable[Vertex]]) -> "PathDecomposition":
        return cls(host, tuple(frozenset(bag) for bag in bags))

    @property
    def width(self) -> int:
        return max((len(bag) for bag in self.bags), default=0) - 1

    def __len__(self) -> int:
        return len(self.bags)


@dataclass(frozen=True)
class Violation:
    """A failed decomposition axiom and the objects that witness it."""

    axiom: str
    witness: tuple

    def as_dict(self) -> dict:
        return {"axiom": self.axiom, "witness": list(self.witness)}
