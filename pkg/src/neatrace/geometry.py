"""Small 2D vector and angle helpers shared across the engine."""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import _kernels


@dataclass(frozen=True, slots=True)
class Vec2:
    """Immutable 2D vector in world units. Components must be finite."""

    x: float
    y: float

    def __add__(self, other: "Vec2") -> "Vec2":
        return Vec2(self.x + other.x, self.y + other.y)

    def __sub__(self, other: "Vec2") -> "Vec2":
        return Vec2(self.x - other.x, self.y - other.y)

    def scaled(self, k: float) -> "Vec2":
        return Vec2(self.x * k, self.y * k)

    def length(self) -> float:
        return math.sqrt(self.x * self.x + self.y * self.y)

    def is_finite(self) -> bool:
        return math.isfinite(self.x) and math.isfinite(self.y)

    def heading_to(self, other: "Vec2") -> float:
        """Heading in degrees of the vector from self to other."""
        return normalize_heading(
            math.degrees(math.atan2(other.y - self.y, other.x - self.x)))


def normalize_heading(h: float) -> float:
    """Wrap a heading into [0, 360)."""
    return float(_kernels.norm_heading(h))


def signed_angle_delta(a: float, b: float) -> float:
    """Smallest signed angle a - b in degrees, in (-180, 180]."""
    return float(_kernels.signed_delta(a, b))


def heading_vector(h: float) -> Vec2:
    """Unit vector pointing along heading h (degrees)."""
    r = math.radians(h)
    return Vec2(math.cos(r), math.sin(r))
