"""Index arithmetic on the multi-particle lattice Z^(n*d).

A configuration of n distinguishable particles in Z^d is a single point
of Z^(n*d); particle j owns the coordinate block [j*d, (j+1)*d).  Cubes
are max-norm balls.  The lexicographic enumeration of a cube's points is
the matrix-index convention used everywhere else in the package.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SizeLimitError

#: Refuse enumerations beyond this many points.
MAX_CUBE_POINTS = 50_000_000


def max_norm(x) -> int:
    """Max-norm |x| = max_i |x_i| of an integer vector."""
    x = np.asarray(x, dtype=np.int64)
    if x.size == 0:
        raise ValueError("max_norm of an empty vector")
    return int(np.max(np.abs(x)))


def sum_norm(x) -> int:
    """Sum-norm |x|_1 = sum_i |x_i|, the norm defining nearest neighbors."""
    x = np.asarray(x, dtype=np.int64)
    if x.size == 0:
        raise ValueError("sum_norm of an empty vector")
    return int(np.sum(np.abs(x)))


@dataclass(frozen=True)
class ParticleConfig:
    """n particle positions in Z^d, stored as one point of Z^(n*d)."""

    n: int
    d: int
    coords: tuple[int, ...]

    def __post_init__(self):
        if self.n < 1 or self.d < 1:
            raise ValueError(f"need n >= 1 and d >= 1, got n={self.n}, d={self.d}")
        coords = tuple(int(c) for c in self.coords)
        object.__setattr__(self, "coords", coords)
        if len(coords) != self.n * self.d:
            raise ValueError(
                f"coords length {len(coords)} != n*d = {self.n * self.d}"
            )

    @classmethod
    def from_particles(cls, positions) -> "ParticleConfig":
        """Build from an iterable of n positions, each a length-d tuple."""
        positions = [tuple(int(c) for c in p) for p in positions]
        d = len(positions[0])
        flat = tuple(c for p in positions for c in p)
        return cls(n=len(positions), d=d, coords=flat)

    def particle(self, j: int) -> tuple[int, ...]:
        """Coordinates of particle j (0-based)."""
        return self.coords[j * self.d : (j + 1) * self.d]

    def particles(self) -> list[tuple[int, ...]]:
        return [self.particle(j) for j in range(self.n)]

    def as_array(self) -> np.ndarray:
        return np.asarray(self.coords, dtype=np.int64)


def min_separation(x: ParticleConfig) -> int:
    """Minimal max-norm distance between distinct particles of x."""
    if x.n < 2:
        raise ValueError("min_separation requires at least two particles")
    best = None
    for i in range(x.n):
        for j in range(i + 1, x.n):
            diff = np.subtract(x.particle(i), x.particle(j))
            dist = int(np.max(np.abs(diff)))
            best = dist if best is None else min(best, dist)
    return best


def separated_config(n: int, d: int, r0: int, k: int, m: int) -> ParticleConfig:
    """The well-separated configuration C*(1, 2, ..., n*d) with C = r0+2km+1.

    Its minimal inter-particle distance exceeds r0 + 2km, so a pair
    interaction of range r0 vanishes on a radius-(k*m) neighborhood.
    """
    if r0 < 0 or k < 1 or m < 1:
        raise ValueError("need r0 >= 0, k >= 1, m >= 1")
    c = r0 + 2 * k * m + 1
    coords = tuple(c * i for i in range(1, n * d + 1))
    return ParticleConfig(n=n, d=d, coords=coords)


@dataclass(frozen=True)
class Cube:
    """Max-norm ball {y : |y - center| <= radius} in Z^(n*d)."""

    center: ParticleConfig
    radius: int

    def __post_init__(self):
        if self.radius < 0:
            raise ValueError("cube radius must be non-negative")

    @property
    def n(self) -> int:
        return self.center.n

    @property
    def d(self) -> int:
        return self.center.d

    @property
    def ndim(self) -> int:
        return self.center.n * self.center.d

    @property
    def side(self) -> int:
        return 2 * self.radius + 1

    @property
    def num_points(self) -> int:
        return self.side**self.ndim

    @property
    def lower(self) -> np.ndarray:
        return self.center.as_array() - self.radius

    def __contains__(self, x: ParticleConfig) -> bool:
        diff = x.as_array() - self.center.as_array()
        return bool(np.max(np.abs(diff)) <= self.radius) if diff.size else True

    def index_of(self, x: ParticleConfig) -> int:
        """Row index of x under the lexicographic point enumeration."""
        if x not in self:
            raise ValueError(f"{x} is not inside {self}")
        digits = x.as_array() - self.lower
        idx = 0
        for dig in digits:
            idx = idx * self.side + int(dig)
        return idx


def cube(center_coords, radius: int, n: int, d: int) -> Cube:
    """Convenience constructor from flat center coordinates."""
    return Cube(ParticleConfig(n=n, d=d, coords=tuple(center_coords)), radius)


def origin_cube(radius: int, n: int, d: int) -> Cube:
    """C^(n)_L(0): the cube of radius L centered at the origin."""
    return cube((0,) * (n * d), radius, n, d)


def cube_points_array(c: Cube) -> np.ndarray:
    """All points of the cube as an (M, n*d) int array, lexicographic.

    Row order is the global matrix-index convention: the first coordinate
    varies slowest.  ``Cube.index_of`` inverts it.
    """
    if c.num_points > MAX_CUBE_POINTS:
        raise SizeLimitError(
            f"cube has {c.num_points} points, above the limit {MAX_CUBE_POINTS}"
        )
    grid = np.indices((c.side,) * c.ndim, dtype=np.int64)
    return grid.reshape(c.ndim, -1).T + c.lower[None, :]


def cube_points(c: Cube) -> list[ParticleConfig]:
    """Lexicographically ordered list of the cube's points."""
    arr = cube_points_array(c)
    n, d = c.n, c.d
    return [ParticleConfig(n=n, d=d, coords=tuple(row)) for row in arr]


def inner_boundary(c: Cube) -> list[ParticleConfig]:
    """Points at max-norm distance exactly L from the center."""
    if c.radius == 0:
        raise ValueError("a radius-0 cube has an empty inner boundary")
    idx = inner_boundary_indices(c)
    arr = cube_points_array(c)[idx]
    return [ParticleConfig(n=c.n, d=c.d, coords=tuple(row)) for row in arr]


def inner_boundary_indices(c: Cube) -> np.ndarray:
    """Row indices (matrix-index convention) of the inner boundary."""
    if c.radius == 0:
        raise ValueError("a radius-0 cube has an empty inner boundary")
    arr = cube_points_array(c)
    dist = np.max(np.abs(arr - c.center.as_array()[None, :]), axis=1)
    return np.flatnonzero(dist == c.radius)


def nearest_neighbors(x: ParticleConfig, c: Cube) -> list[ParticleConfig]:
    """Points of the cube at sum-norm distance 1 from x.

    Hopping terms to neighbors outside the cube are simply dropped
    (simple boundary conditions), so boundary points have fewer than
    2*n*d neighbors.
    """
    if x not in c:
        raise ValueError(f"{x} is not inside {c}")
    out = []
    coords = list(x.coords)
    for k in range(len(coords)):
        for step in (-1, 1):
            y = coords.copy()
            y[k] += step
            cand = ParticleConfig(n=x.n, d=x.d, coords=tuple(y))
            if cand in c:
                out.append(cand)
    return out


def pair_distance_matrix(points: np.ndarray) -> np.ndarray:
    """Max-norm distance between every pair of rows of an (M, k) array."""
    diff = points[:, None, :] - points[None, :, :]
    return np.max(np.abs(diff), axis=2)


def row_indices(c: Cube, points: np.ndarray) -> np.ndarray:
    """Vectorized ``Cube.index_of`` for an (M, n*d) array of points."""
    points = np.atleast_2d(np.asarray(points, dtype=np.int64))
    digits = points - c.lower[None, :]
    if np.any(digits < 0) or np.any(digits >= c.side):
        raise ValueError("some points lie outside the cube")
    strides = c.side ** np.arange(c.ndim - 1, -1, -1, dtype=np.int64)
    return digits @ strides


def iter_shells(c: Cube, center: ParticleConfig):
    """Yield (radius, row-index array) for max-norm shells around a point.

    Shells are nonempty for every radius up to the farthest cube corner,
    because the cube is a box containing the center.
    """
    arr = cube_points_array(c)
    dist = np.max(np.abs(arr - center.as_array()[None, :]), axis=1)
    for r in range(int(np.max(dist)) + 1):
        yield r, np.flatnonzero(dist == r)
