"""Planar point-process primitives: disc windows, Poisson sampling, paired partners.

Patterns store coordinates as (n, 2) float arrays in generation order; there is
no toroidal wrapping, the window is an honest disc.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

DEFAULT_WINDOW_RADIUS = 50.0

# Slack for the inside-window invariant, absorbs rounding in r*cos/sin.
_CONTAINS_TOL = 1e-9


class Point(NamedTuple):
    x: float
    y: float


@dataclass(frozen=True)
class SimWindow:
    """Disc observation window centred at the origin."""

    radius: float = DEFAULT_WINDOW_RADIUS

    def __post_init__(self) -> None:
        if self.radius <= 0:
            raise ValueError(f"window radius must be positive, got {self.radius}")

    @property
    def area(self) -> float:
        return math.pi * self.radius**2

    def contains(self, xy: np.ndarray) -> np.ndarray:
        """Boolean mask of rows of ``xy`` lying inside the disc (with tolerance)."""
        xy = np.asarray(xy, dtype=float)
        return np.hypot(xy[..., 0], xy[..., 1]) <= self.radius + _CONTAINS_TOL


@dataclass(frozen=True)
class PointPattern:
    """A finite point configuration inside a window.

    ``intensity`` records the nominal density the pattern was drawn at; it is
    carried along so thinning can scale it.
    """

    xy: np.ndarray
    window: SimWindow
    intensity: float = 0.0

    def __post_init__(self) -> None:
        xy = np.asarray(self.xy, dtype=float)
        if xy.ndim != 2 or xy.shape[1] != 2:
            xy = xy.reshape(-1, 2)
        object.__setattr__(self, "xy", xy)
        if self.intensity < 0:
            raise ValueError("intensity must be nonnegative")
        if xy.size and not bool(np.all(self.window.contains(xy))):
            raise ValueError("point pattern contains points outside its window")

    @property
    def n(self) -> int:
        return self.xy.shape[0]

    @property
    def points(self) -> list[Point]:
        return [Point(float(x), float(y)) for x, y in self.xy]

    def radii(self) -> np.ndarray:
        """Distances of all points from the origin."""
        return np.hypot(self.xy[:, 0], self.xy[:, 1])


def empty_pattern(window: SimWindow, intensity: float = 0.0) -> PointPattern:
    return PointPattern(np.empty((0, 2)), window, intensity)


def sample_hppp(intensity: float, window: SimWindow, rng: np.random.Generator) -> PointPattern:
    """Draw a homogeneous Poisson pattern on the disc window.

    Count is Poisson(intensity * area); given the count, points are i.i.d.
    uniform on the disc (radius R*sqrt(U), uniform angle).
    """
    if intensity < 0:
        raise ValueError("intensity must be nonnegative")
    n = int(rng.poisson(intensity * window.area))
    r = window.radius * np.sqrt(rng.random(n))
    phi = 2.0 * math.pi * rng.random(n)
    xy = np.column_stack((r * np.cos(phi), r * np.sin(phi)))
    return PointPattern(xy, window, intensity)


def place_partner(pattern: PointPattern, separation: float, rng: np.random.Generator) -> PointPattern:
    """Place one partner per point at exactly ``separation``, uniform direction.

    Partners of points near the boundary can land outside the parent window,
    so the partner pattern carries an enlarged window.
    """
    if separation < 0:
        raise ValueError("separation must be nonnegative")
    phi = 2.0 * math.pi * rng.random(pattern.n)
    offset = separation * np.column_stack((np.cos(phi), np.sin(phi)))
    window = SimWindow(pattern.window.radius + separation) if separation > 0 else pattern.window
    return PointPattern(pattern.xy + offset, window, pattern.intensity)


def distance(a: Point | tuple[float, float], b: Point | tuple[float, float]) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])
