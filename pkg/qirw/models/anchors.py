from dataclasses import dataclass, replace

from qirw.models.graph import Path, Vertex


@dataclass(frozen=True)
class AnchorSystem:
    """
    Anchors along the image of a geodesic.

    `indices` is J (positions on the geodesic, increasing) and `vertices[k]` is the
    anchor r_j for j = indices[k]; every anchor lies on `q_path`, in order.
    """

    geodesic: Path
    indices: tuple[int, ...]
    vertices: tuple[Vertex, ...]
    q_path: Path
    connectors: tuple[Path, ...] = ()

    def pairs(self) -> list[tuple[int, Vertex]]:
        return list(zip(self.indices, self.vertices))

    def trimmed(self) -> "AnchorSystem":
        """Q cut down to the union of its anchor subpaths."""
        return replace(self, q_path=self.q_path.subpath(self.vertices[0], self.vertices[-1]))
