"""Metric primitives, radial kernels, and synthetic dataset generators.

Everything downstream (cover trees, towers, mapper) consumes the
``PointCloud`` defined here and the plain Euclidean metric.  Generators
are pure functions of their parameters plus an explicit seed, so any
dataset used in a run can be reproduced from its provenance record.
"""

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InputError

__all__ = [
    "PointCloud",
    "RadialKernel",
    "tent_profile",
    "distance",
    "kernel_eval",
    "generate_dataset",
    "dataset_names",
    "save_points_csv",
    "load_points_csv",
]


@dataclass(frozen=True)
class PointCloud:
    """A finite dataset in Euclidean space.

    Point ids are the row indices 0..n-1; the coordinate array is made
    read-only on construction so clouds can be shared freely.
    """

    points: np.ndarray

    def __post_init__(self):
        pts = np.ascontiguousarray(np.atleast_2d(np.asarray(self.points, dtype=float)))
        if pts.ndim != 2 or pts.shape[0] == 0:
            raise InputError("point cloud must be a non-empty 2-d array")
        if not np.all(np.isfinite(pts)):
            raise InputError("point cloud contains non-finite coordinates")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def n(self):
        return self.points.shape[0]

    @property
    def dim(self):
        return self.points.shape[1]

    @property
    def ids(self):
        return np.arange(self.n)

    def __len__(self):
        return self.n


def tent_profile(r):
    """Default compactly supported kernel profile, max(1 - r, 0)."""
    return np.maximum(1.0 - np.asarray(r, dtype=float), 0.0)


@dataclass(frozen=True)
class RadialKernel:
    """Radial similarity kernel: value at (x, y) is profile(d(x, y) / bandwidth).

    The profile must vanish on [1, inf) so the kernel is supported in the
    open ball of radius ``bandwidth``; the default tent profile also has
    profile(0) = 1.
    """

    bandwidth: float
    profile: callable = field(default=tent_profile)

    def __post_init__(self):
        if not self.bandwidth > 0:
            raise InputError(f"kernel bandwidth must be positive, got {self.bandwidth}")

    def with_bandwidth(self, h):
        return RadialKernel(bandwidth=h, profile=self.profile)

    def at_distance(self, d):
        """Kernel value for precomputed distances (scalar or array)."""
        return self.profile(np.asarray(d, dtype=float) / self.bandwidth)


def distance(a, b):
    """Euclidean distance between two points given as coordinate sequences."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise InputError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return float(np.linalg.norm(a - b))


def kernel_eval(kernel, a, b):
    """Evaluate a radial kernel at a pair of points."""
    return float(kernel.at_distance(distance(a, b)))


# ---------------------------------------------------------------------------
# Dataset generators
# ---------------------------------------------------------------------------


def _square_grid(points_per_square):
    """Raster of g points inside the unit square, row-major on a ceil(sqrt(g))
    grid; g = 1 gives the center point."""
    g = int(points_per_square)
    if g < 1:
        raise InputError("points_per_square must be >= 1")
    r = int(np.ceil(np.sqrt(g)))
    cells = [((j + 0.5) / r, (i + 0.5) / r) for i in range(r) for j in range(r)]
    return np.array(cells[:g], dtype=float)


def cantor_square(depth=7, points_per_square=1, **_ignored):
    """Finite approximation of the Cantor square (Cantor dust in the plane).

    Iteration ``depth`` keeps the four corner thirds of every square, so the
    output contains 4**depth congruent sub-squares of side 3**(-depth), each
    sampled on the same fixed raster of ``points_per_square`` points.

    Parameters
    ----------
    depth : int
        Number of corner-subdivision iterations, >= 0.
    points_per_square : int
        Samples per terminal sub-square; 1 places the square centers.
    """
    k = int(depth)
    if k < 0:
        raise InputError("depth must be >= 0")
    shift = 2.0 / 3.0
    corners = np.array([[0.0, 0.0], [shift, 0.0], [0.0, shift], [shift, shift]])
    origins = np.zeros((1, 2))
    for _ in range(k):
        # one iterated-function-system step: contract by 3, copy to the corners
        origins = (origins[:, None, :] / 3.0 + corners[None, :, :]).reshape(-1, 2)
        order = np.lexsort((origins[:, 0], origins[:, 1]))
        origins = origins[order]
    side = 3.0 ** (-k)
    grid = _square_grid(points_per_square) * side
    pts = (origins[:, None, :] + grid[None, :, :]).reshape(-1, 2)
    return PointCloud(pts)


def _triangle_lattice(a, b, c, resolution):
    """Evenly dispersed barycentric lattice over a triangle (vertices included)."""
    r = int(resolution)
    if r < 1:
        raise InputError("resolution must be >= 1")
    a, b, c = (np.asarray(v, dtype=float) for v in (a, b, c))
    pts = []
    for i in range(r + 1):
        for j in range(r + 1 - i):
            pts.append(a + (i / r) * (b - a) + (j / r) * (c - a))
    return np.array(pts)


def pinwheel(resolution=16, **_ignored):
    """Three triangular blades invariant under rotation by 120 degrees.

    A base blade is sampled on a triangular lattice and copied under the
    rotations by 2*pi/3 and 4*pi/3 about the origin, so the point set is
    exactly invariant (up to round-off) under that rotation.  The blade tips
    approach the origin without touching, which makes the three blades a
    weakly connected pinwheel at coarse scales.
    """
    base = _triangle_lattice((0.15, 0.0), (1.0, 0.35), (1.0, -0.35), resolution)
    blocks = []
    for k in range(3):
        t = 2.0 * np.pi * k / 3.0
        rot = np.array([[np.cos(t), -np.sin(t)], [np.sin(t), np.cos(t)]])
        blocks.append(base @ rot.T)
    return PointCloud(np.vstack(blocks))


def sphere_annuli(n_azimuth=40, n_band=4, band_width=0.18, **_ignored):
    """Grids of points on six tangent geodesic annuli of a unit 2-sphere.

    Each annulus is a band of angular half-width ``band_width`` (radians)
    around the 45-degree circle centered on one of the six cube-face axes
    (+-x, +-y, +-z); adjacent bands touch near the cube edge directions, so
    the union is connected and carries the cube's symmetries.  Points embed
    in R^3 and downstream constructions use the chordal metric.
    """
    nt, ns = int(n_azimuth), int(n_band)
    if nt < 3 or ns < 1:
        raise InputError("need n_azimuth >= 3 and n_band >= 1")
    axes = np.array([
        [1, 0, 0], [-1, 0, 0],
        [0, 1, 0], [0, -1, 0],
        [0, 0, 1], [0, 0, -1],
    ], dtype=float)
    pts = []
    polar = np.pi / 4.0
    offs = np.linspace(-band_width, band_width, ns) if ns > 1 else np.array([0.0])
    for u in axes:
        # orthonormal frame transverse to the axis
        helper = np.array([0.0, 0.0, 1.0]) if abs(u[2]) < 0.9 else np.array([1.0, 0.0, 0.0])
        e1 = np.cross(u, helper)
        e1 /= np.linalg.norm(e1)
        e2 = np.cross(u, e1)
        for s in polar + offs:
            # half-step azimuth offset avoids duplicate points where bands touch
            for t in (np.arange(nt) + 0.5) * (2.0 * np.pi / nt):
                p = np.cos(s) * u + np.sin(s) * (np.cos(t) * e1 + np.sin(t) * e2)
                pts.append(p)
    pts = np.array(pts)
    pts = np.unique(np.round(pts, 12), axis=0)
    return PointCloud(pts)


def uniform_cloud(n=1000, dim=2, seed=0, low=0.0, high=1.0, **_ignored):
    """Uniform random points in a box, deterministic in the seed."""
    n, dim = int(n), int(dim)
    if n < 1 or dim < 1:
        raise InputError("need n >= 1 and dim >= 1")
    rng = np.random.default_rng(int(seed))
    return PointCloud(rng.uniform(float(low), float(high), size=(n, dim)))


def y_shape(stem_points=30, arm_points=80, **_ignored):
    """Planar Y: a short stem below the origin and two long arms above it.

    With the vertical coordinate as filter the branch point sits in the lower
    interval range, so a three-interval cover isolates the two arm tips while
    the middle interval sees both arms merged through the junction.
    """
    ns, na = int(stem_points), int(arm_points)
    if ns < 2 or na < 2:
        raise InputError("need stem_points >= 2 and arm_points >= 2")
    t = np.linspace(0.0, 1.0, ns, endpoint=False)
    stem = np.stack([np.zeros(ns), -1.0 + t], axis=1)
    s = np.linspace(0.0, 1.0, na + 1)[1:]
    left = np.stack([-2.0 * s, 3.0 * s], axis=1)
    right = np.stack([2.0 * s, 3.0 * s], axis=1)
    junction = np.array([[0.0, 0.0]])
    return PointCloud(np.vstack([stem, junction, left, right]))


def flare_cross(arm_points=40, arm_reach=3.0, core_points=260, core_radius=0.8,
                seed=0, **_ignored):
    """Dense disc-shaped core with four sparse arms along the axes.

    Density filters see the arms as low-density flares hanging off a high
    density center, which is the structure the mapper pipeline is meant to
    highlight.
    """
    na, nc = int(arm_points), int(core_points)
    if na < 2 or nc < 8:
        raise InputError("need arm_points >= 2 and core_points >= 8")
    rng = np.random.default_rng(int(seed))
    r = np.sqrt(rng.uniform(0.0, 1.0, nc)) * float(core_radius)
    th = rng.uniform(0.0, 2.0 * np.pi, nc)
    core = np.stack([r * np.cos(th), r * np.sin(th)], axis=1)
    s = np.linspace(float(core_radius) * 0.9, float(arm_reach), na)
    jitter = rng.normal(scale=0.02, size=(4, na, 2))
    arms = []
    for k, (dx, dy) in enumerate([(1, 0), (-1, 0), (0, 1), (0, -1)]):
        arms.append(np.stack([dx * s, dy * s], axis=1) + jitter[k])
    return PointCloud(np.vstack([core] + arms))


_GENERATORS = {
    "cantor": cantor_square,
    "pin": pinwheel,
    "sphere": sphere_annuli,
    "uniform": uniform_cloud,
    "yshape": y_shape,
    "flare_cross": flare_cross,
}


def dataset_names():
    return sorted(_GENERATORS)


def generate_dataset(name, params=None, seed=None):
    """Build a named synthetic dataset.

    ``params`` is a dict forwarded to the generator; ``seed`` (when given)
    overrides any seed inside params.  Unknown names raise ``InputError``.
    """
    key = str(name).lower()
    if key not in _GENERATORS:
        raise InputError(f"unknown dataset {name!r}; expected one of {dataset_names()}")
    kwargs = dict(params or {})
    if seed is not None:
        kwargs["seed"] = seed
    return _GENERATORS[key](**kwargs)


# ---------------------------------------------------------------------------
# Serialization: one point per row, plain decimal floats, no header
# ---------------------------------------------------------------------------


def save_points_csv(cloud, path):
    path = Path(path)
    with path.open("w") as fh:
        for row in cloud.points:
            fh.write(",".join(repr(float(v)) for v in row))
            fh.write("\n")
    return path


def load_points_csv(path):
    rows = []
    with Path(path).open() as fh:
        for line in fh:
            line = line.strip()
            if line:
                rows.append([float(tok) for tok in line.split(",")])
    if not rows:
        raise InputError(f"no points found in {path}")
    return PointCloud(np.array(rows, dtype=float))
