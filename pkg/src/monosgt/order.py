"""Orthant ordering cones and the partial-order predicates built on them.

A cone is described by one sign per coordinate.  ``signs=(+1,)`` is the
standard order on the real line, ``signs=(-1,)`` the opposite order, and
``signs=(+1, +1)`` the positive quadrant.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np


class OrderError(ValueError):
    """Malformed cone or a dimension mismatch between a cone and a vector."""


@dataclass(frozen=True)
class OrderCone:
    signs: tuple[int, ...]

    def __post_init__(self):
        signs = tuple(int(s) for s in self.signs)
        if not signs:
            raise OrderError("cone needs at least one coordinate")
        if any(s not in (1, -1) for s in signs):
            raise OrderError(f"cone signs must be +1 or -1, got {self.signs!r}")
        object.__setattr__(self, "signs", signs)

    @property
    def dimension(self) -> int:
        return len(self.signs)

    @classmethod
    def parse(cls, text: str) -> "OrderCone":
        """Build a cone from a sign string such as ``"+"``, ``"-"`` or ``"+-+"``."""
        text = text.strip()
        if not text or any(c not in "+-" for c in text):
            raise OrderError(f"malformed cone string {text!r}")
        return cls(tuple(1 if c == "+" else -1 for c in text))

    @classmethod
    def standard(cls, n: int = 1) -> "OrderCone":
        return cls((1,) * n)

    @classmethod
    def opposite(cls, n: int = 1) -> "OrderCone":
        return cls((-1,) * n)

    def __str__(self) -> str:
        return "".join("+" if s > 0 else "-" for s in self.signs)

    def reversed(self) -> "OrderCone":
        return OrderCone(tuple(-s for s in self.signs))

    def contains(self, v) -> bool:
        """Membership of ``v`` in the cone K itself."""
        v = self._vec(v)
        return bool(np.all(np.asarray(self.signs) * v >= 0))

    def _vec(self, a) -> np.ndarray:
        a = np.atleast_1d(np.asarray(a, dtype=float))
        if a.shape != (self.dimension,):
            raise OrderError(
                f"vector of shape {a.shape} does not match cone dimension {self.dimension}"
            )
        return a


def cone_leq(cone: OrderCone, a, b) -> bool:
    """``a ⪯ b``, i.e. ``b - a`` lies in the cone."""
    d = cone._vec(b) - cone._vec(a)
    return bool(np.all(np.asarray(cone.signs) * d >= 0))


def cone_ll(cone: OrderCone, a, b) -> bool:
    """``a ≺≺ b``, i.e. ``b - a`` lies in the interior of the cone."""
    d = cone._vec(b) - cone._vec(a)
    return bool(np.all(np.asarray(cone.signs) * d > 0))


def is_totally_ordered(cone: OrderCone, points: Iterable[Sequence[float] | float]) -> bool:
    """True when every pair of distinct points is strictly comparable."""
    pts = [cone._vec(p) for p in points]
    for p, q in combinations(pts, 2):
        if np.array_equal(p, q):
            continue
        if not (cone_ll(cone, p, q) or cone_ll(cone, q, p)):
            return False
    return True
