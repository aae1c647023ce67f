"""Map geometry: scenarios, region-of-interest labeling, LOS classification, sampling.

Two scenario layouts are supported:

* :class:`StreetScenario` -- a square map with four square buildings at the
  corners separated by a cross of two streets.  Base stations sit in the
  streets; the region of interest (ROI) is a rectangle inside the lower-left
  building.
* :class:`CircularScenario` -- a disc with a single base station at the
  center and a rectangular ROI inside the disc.  Every position is
  line-of-sight.  This is the layout with a closed-form likelihood-ratio
  test (see :mod:`irlv.neyman_pearson`).

Labels follow the inside/outside convention: label 0 means the position is
in the ROI, label 1 means it is in the complement.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

REGION_INSIDE = "inside"
REGION_OUTSIDE = "outside"
REGION_MAP = "map"
_REGIONS = (REGION_INSIDE, REGION_OUTSIDE, REGION_MAP)


class OutOfMapError(ValueError):
    """Raised when a queried position lies outside the scenario map."""


class Position(NamedTuple):
    """2-D point on the map plane, in meters."""

    x: float
    y: float


def distance(p, q) -> float:
    """Euclidean distance in meters between two positions."""
    return math.hypot(p[0] - q[0], p[1] - q[1])


@dataclass(frozen=True)
class Rectangle:
    """Axis-aligned rectangle with strictly positive extent (closed set)."""

    xmin: float
    ymin: float
    xmax: float
    ymax: float

    def __post_init__(self):
        if not (self.xmin < self.xmax and self.ymin < self.ymax):
            raise ValueError(f"degenerate rectangle: {self}")
        for v in (self.xmin, self.ymin, self.xmax, self.ymax):
            if not math.isfinite(v):
                raise ValueError(f"non-finite rectangle corner: {self}")

    @property
    def min_corner(self) -> Position:
        return Position(self.xmin, self.ymin)

    @property
    def max_corner(self) -> Position:
        return Position(self.xmax, self.ymax)

    @property
    def width(self) -> float:
        return self.xmax - self.xmin

    @property
    def height(self) -> float:
        return self.ymax - self.ymin

    @property
    def area(self) -> float:
        return self.width * self.height

    @property
    def centroid(self) -> Position:
        return Position(0.5 * (self.xmin + self.xmax), 0.5 * (self.ymin + self.ymax))

    def contains(self, x, y):
        """Closed-set membership; x and y may be scalars or arrays."""
        return (
            (np.asarray(x) >= self.xmin)
            & (np.asarray(x) <= self.xmax)
            & (np.asarray(y) >= self.ymin)
            & (np.asarray(y) <= self.ymax)
        )

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Uniform points inside the rectangle, shape (size, 2)."""
        xy = rng.uniform(size=(size, 2))
        xy[:, 0] = self.xmin + xy[:, 0] * self.width
        xy[:, 1] = self.ymin + xy[:, 1] * self.height
        return xy


def _rejection_sample(bbox, accept, rng, size):
    """Uniform samples over an acceptance region inside a bounding box.

    accept(x, y) must return a boolean mask; the acceptance probability has
    to be bounded away from zero for termination.
    """
    xmin, ymin, xmax, ymax = bbox
    out = np.empty((size, 2))
    filled = 0
    while filled < size:
        n = max(2 * (size - filled), 64)
        x = rng.uniform(xmin, xmax, n)
        y = rng.uniform(ymin, ymax, n)
        ok = accept(x, y)
        k = min(int(ok.sum()), size - filled)
        out[filled : filled + k, 0] = x[ok][:k]
        out[filled : filled + k, 1] = y[ok][:k]
        filled += k
    return out


@dataclass(frozen=True)
class StreetScenario:
    """Square map with four corner buildings and a cross of two streets.

    The horizontal and vertical street rectangles overlap in a central
    square; base stations placed there see both streets.  Only positions in
    a street that also contains the serving base station are line-of-sight.
    """

    map_side: float
    building_side: float
    street_width: float
    roi: Rectangle
    bs_positions: tuple[Position, ...]

    def __post_init__(self):
        if not math.isclose(
            2.0 * self.building_side + self.street_width, self.map_side, rel_tol=1e-9
        ):
            raise ValueError(
                "inconsistent geometry: 2*building_side + street_width must equal map_side"
            )
        b = self.building_side
        if not (0.0 <= self.roi.xmin and self.roi.xmax <= b and 0.0 <= self.roi.ymin and self.roi.ymax <= b):
            raise ValueError("roi must lie inside the lower-left building")
        if len(self.bs_positions) == 0:
            raise ValueError("at least one base station required")
        object.__setattr__(
            self, "bs_positions", tuple(Position(float(p[0]), float(p[1])) for p in self.bs_positions)
        )
        for p in self.bs_positions:
            if not self.contains(p[0], p[1]):
                raise ValueError(f"base station outside the map: {p}")

    @classmethod
    def default(cls, map_side=525.0, building_side=255.0, street_width=15.0, roi=None,
                bs_positions=None) -> "StreetScenario":
        """Scenario with the standard urban layout: 525 m map, 255 m buildings,
        15 m streets, five base stations (one per street arm plus map center).

        The default ROI is the quadrant of the lower-left building closest to
        the map center.
        """
        b, w = building_side, street_width
        mid = b + 0.5 * w  # street center line
        if roi is None:
            roi = Rectangle(0.5 * b, 0.5 * b, b, b)
        if bs_positions is None:
            bs_positions = (
                Position(0.5 * b, mid),            # west arm, horizontal street
                Position(b + w + 0.5 * b, mid),    # east arm
                Position(mid, 0.5 * b),            # south arm, vertical street
                Position(mid, b + w + 0.5 * b),    # north arm
                Position(mid, mid),                # street intersection
            )
        return cls(map_side, building_side, street_width, roi, tuple(bs_positions))

    @property
    def n_bs(self) -> int:
        return len(self.bs_positions)

    @property
    def bounds(self) -> tuple[float, float, float, float]:
        return (0.0, 0.0, self.map_side, self.map_side)

    @property
    def horizontal_street(self) -> Rectangle:
        b, w = self.building_side, self.street_width
        return Rectangle(0.0, b, self.map_side, b + w)

    @property
    def vertical_street(self) -> Rectangle:
        b, w = self.building_side, self.street_width
        return Rectangle(b, 0.0, b + w, self.map_side)

    @property
    def streets(self) -> tuple[Rectangle, Rectangle]:
        return (self.horizontal_street, self.vertical_street)

    def contains(self, x, y):
        return (
            (np.asarray(x) >= 0.0)
            & (np.asarray(x) <= self.map_side)
            & (np.asarray(y) >= 0.0)
            & (np.asarray(y) <= self.map_side)
        )

    def on_street(self, x, y):
        """Membership in the union of the two streets."""
        return self.horizontal_street.contains(x, y) | self.vertical_street.contains(x, y)

    def in_roi_many(self, xy: np.ndarray) -> np.ndarray:
        """Labels for an (n, 2) array of in-map positions: 0 inside ROI, 1 outside."""
        xy = np.asarray(xy, dtype=float)
        if not np.all(self.contains(xy[:, 0], xy[:, 1])):
            raise OutOfMapError("position out of map")
        return np.where(self.roi.contains(xy[:, 0], xy[:, 1]), 0, 1).astype(np.int64)

    def los_mask(self, xy: np.ndarray, bs_index: int) -> np.ndarray:
        """LOS indicator for (n, 2) positions towards one base station.

        A position is LOS iff it lies in a street rectangle that also
        contains the base station; the center base station belongs to both
        streets and is LOS to the whole cross.  A base station outside every
        street (e.g. a candidate placement inside a building) is NLOS to
        every position.
        """
        if not 0 <= bs_index < self.n_bs:
            raise IndexError(f"bs_index {bs_index} out of range")
        bs = self.bs_positions[bs_index]
        xy = np.asarray(xy, dtype=float)
        mask = np.zeros(xy.shape[0], dtype=bool)
        for street in self.streets:
            if street.contains(bs.x, bs.y):
                mask |= street.contains(xy[:, 0], xy[:, 1])
        return mask

    def sample_region(self, region: str, rng: np.random.Generator, size: int) -> np.ndarray:
        if region not in _REGIONS:
            raise ValueError(f"unknown region {region!r}; expected one of {_REGIONS}")
        if region == REGION_INSIDE:
            return self.roi.sample(rng, size)
        if region == REGION_MAP:
            return _rejection_sample(self.bounds, lambda x, y: np.ones_like(x, bool), rng, size)
        return _rejection_sample(
            self.bounds, lambda x, y: ~self.roi.contains(x, y), rng, size
        )

    def with_bs_positions(self, positions) -> "StreetScenario":
        """Same geometry with replaced base-station placements (may be off-street)."""
        return dataclasses.replace(self, bs_positions=tuple(Position(float(p[0]), float(p[1])) for p in positions))


@dataclass(frozen=True)
class CircularScenario:
    """Disc-shaped map with one base station at the origin; LOS everywhere."""

    r_out: float
    roi: Rectangle

    def __post_init__(self):
        if self.r_out <= 0:
            raise ValueError("r_out must be positive")
        corners = [
            (self.roi.xmin, self.roi.ymin),
            (self.roi.xmin, self.roi.ymax),
            (self.roi.xmax, self.roi.ymin),
            (self.roi.xmax, self.roi.ymax),
        ]
        if max(math.hypot(x, y) for x, y in corners) > self.r_out:
            raise ValueError("roi must lie entirely inside the outer circle")

    @classmethod
    def default(cls, r_out=40.0, roi_width=25.0, roi_height=25.0, r_min=4.0) -> "CircularScenario":
        """ROI anchored with its near edge centered on the +x axis, so the
        nearest ROI point to the base station is (r_min, 0)."""
        roi = Rectangle(r_min, -0.5 * roi_height, r_min + roi_width, 0.5 * roi_height)
        return cls(r_out, roi)

    @property
    def bs_positions(self) -> tuple[Position, ...]:
        return (Position(0.0, 0.0),)

    @property
    def n_bs(self) -> int:
        return 1

    @property
    def bounds(self) -> tuple[float, float, float, float]:
        return (-self.r_out, -self.r_out, self.r_out, self.r_out)

    @property
    def r_min(self) -> float:
        """Distance from the base station to the nearest ROI point."""
        dx = max(self.roi.xmin, 0.0, -self.roi.xmax)
        dy = max(self.roi.ymin, 0.0, -self.roi.ymax)
        return math.hypot(dx, dy)

    @property
    def r_max(self) -> float:
        """Distance from the base station to the farthest ROI corner."""
        dx = max(abs(self.roi.xmin), abs(self.roi.xmax))
        dy = max(abs(self.roi.ymin), abs(self.roi.ymax))
        return math.hypot(dx, dy)

    def contains(self, x, y):
        return np.asarray(x) ** 2 + np.asarray(y) ** 2 <= self.r_out**2

    def in_roi_many(self, xy: np.ndarray) -> np.ndarray:
        xy = np.asarray(xy, dtype=float)
        if not np.all(self.contains(xy[:, 0], xy[:, 1])):
            raise OutOfMapError("position out of map")
        return np.where(self.roi.contains(xy[:, 0], xy[:, 1]), 0, 1).astype(np.int64)

    def los_mask(self, xy: np.ndarray, bs_index: int) -> np.ndarray:
        if bs_index != 0:
            raise IndexError(f"bs_index {bs_index} out of range")
        return np.ones(np.asarray(xy).shape[0], dtype=bool)

    def sample_region(self, region: str, rng: np.random.Generator, size: int) -> np.ndarray:
        if region not in _REGIONS:
            raise ValueError(f"unknown region {region!r}; expected one of {_REGIONS}")
        if region == REGION_INSIDE:
            return self.roi.sample(rng, size)
        if region == REGION_MAP:
            return _rejection_sample(self.bounds, self.contains, rng, size)
        return _rejection_sample(
            self.bounds,
            lambda x, y: self.contains(x, y) & ~self.roi.contains(x, y),
            rng,
            size,
        )


def in_roi(scenario, pos) -> int:
    """0 if pos is in the region of interest, 1 otherwise.

    Boundary points count as inside (closed ROI).  Raises OutOfMapError for
    positions outside the map.
    """
    return int(scenario.in_roi_many(np.asarray(pos, dtype=float).reshape(1, 2))[0])


def is_los(scenario, pos, bs_index: int) -> bool:
    """Whether the link between pos and base station bs_index is line-of-sight."""
    return bool(scenario.los_mask(np.asarray(pos, dtype=float).reshape(1, 2), bs_index)[0])


def sample_uniform(scenario, region: str, rng: np.random.Generator, size: int | None = None):
    """Uniform position(s) over ``"inside"`` (ROI), ``"outside"``, or ``"map"``.

    Returns a single Position when size is None, else an (size, 2) array.
    """
    xy = scenario.sample_region(region, rng, 1 if size is None else size)
    if size is None:
        return Position(float(xy[0, 0]), float(xy[0, 1]))
    return xy
