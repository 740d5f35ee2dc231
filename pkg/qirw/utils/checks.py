import itertools
from typing import Any, Iterable, Sequence, TypeVar

import numpy as np

from qirw.core.config import settings
from qirw.core.exceptions import InvariantViolation

T = TypeVar("T")

CHECKED = "checked"
FAST = "fast"


class InvariantChecker:
    """Runtime assertion policy for postconditions.

    The checked profile sweeps every pair; the fast profile looks at a
    deterministic sample and leaves the exhaustive work to the final
    certification.
    """

    def __init__(self, profile: str | None = None, sample_size: int | None = None, seed: int = 0):
        self.profile = profile or settings.PROFILE
        if self.profile not in (CHECKED, FAST):
            raise ValueError(f"unknown profile {self.profile!r}")
        self.sample_size = sample_size or settings.FAST_SAMPLE_PAIRS
        self.seed = seed

    @property
    def checked(self) -> bool:
        return self.profile == CHECKED

    def pairs(self, items: Sequence[T]) -> Iterable[tuple[T, T]]:
        """Unordered pairs of distinct positions, all of them or a sample."""
        total = len(items) * (len(items) - 1) // 2
        if self.checked or total <= self.sample_size:
            return itertools.combinations(items, 2)
        rng = np.random.default_rng(self.seed)
        picks = rng.integers(0, len(items), size=(self.sample_size, 2))
        return [(items[min(a, b)], items[max(a, b)]) for a, b in picks if a != b]

    def items(self, items: Sequence[T]) -> Sequence[T]:
        if self.checked or len(items) <= self.sample_size:
            return items
        rng = np.random.default_rng(self.seed)
        return [items[i] for i in sorted(rng.choice(len(items), size=self.sample_size, replace=False))]

    def require(self, condition: bool, message: str, **witness: Any) -> None:
        if not condition:
            raise InvariantViolation(message, data={key: _plain(value) for key, value in witness.items()})


def _plain(value: Any) -> Any:
    if isinstance(value, (frozenset, set)):
        return sorted(value)
    if isinstance(value, tuple):
        return list(value)
    return value
