"""Points on the unit 2-sphere with dual angle/vector representation."""

import math

import numpy as np

from .errors import DomainError

TWO_PI = 2.0 * math.pi


def _wrap_longitude(phi):
    phi = math.fmod(float(phi), TWO_PI)
    if phi < 0.0:
        phi += TWO_PI
    if phi >= TWO_PI:  # fmod rounding can land exactly on 2*pi
        phi = 0.0
    return phi


class SpherePoint:
    """A point on S^2.

    ``theta`` is the colatitude in [0, pi], ``phi`` the longitude in
    [0, 2*pi); ``xyz`` is the unit 3-vector, cached so that repeated dot
    products are cheap.  Instances are immutable.
    """

    __slots__ = ("theta", "phi", "xyz")

    def __init__(self, theta, phi):
        theta = float(theta)
        if not 0.0 <= theta <= math.pi:
            raise DomainError(f"colatitude must lie in [0, pi], got {theta}")
        phi = _wrap_longitude(phi)
        st = math.sin(theta)
        xyz = np.array([st * math.cos(phi), st * math.sin(phi), math.cos(theta)])
        xyz.setflags(write=False)
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "xyz", xyz)

    def __setattr__(self, name, value):
        raise AttributeError("SpherePoint is immutable")

    @classmethod
    def from_xyz(cls, vec):
        """Build a point from any nonzero 3-vector (normalized internally)."""
        vec = np.asarray(vec, dtype=float)
        if vec.shape != (3,):
            raise DomainError(f"expected a 3-vector, got shape {vec.shape}")
        norm = float(np.linalg.norm(vec))
        if norm < 1e-12:
            raise DomainError("cannot normalize a (near-)zero vector")
        unit = vec / norm
        unit.setflags(write=False)
        theta = math.acos(min(1.0, max(-1.0, unit[2])))
        phi = _wrap_longitude(math.atan2(unit[1], unit[0]))
        p = cls.__new__(cls)
        object.__setattr__(p, "theta", theta)
        object.__setattr__(p, "phi", phi)
        object.__setattr__(p, "xyz", unit)
        return p

    def antipode(self):
        """The point -xyz; the stored vector is the exact sign flip."""
        return SpherePoint.from_xyz(-self.xyz)

    def dot(self, other):
        return float(np.dot(self.xyz, other.xyz))

    def geodesic(self, other):
        """Great-circle distance in radians."""
        return math.acos(min(1.0, max(-1.0, self.dot(other))))

    def __repr__(self):
        return f"SpherePoint(theta={self.theta!r}, phi={self.phi!r})"


def points_theta_phi(points):
    """Stack the angles of a point sequence into two float arrays."""
    theta = np.array([p.theta for p in points])
    phi = np.array([p.phi for p in points])
    return theta, phi


def dot_matrix(points_a, points_b=None):
    """Pairwise dot products, clipped into [-1, 1]."""
    a = np.array([p.xyz for p in points_a])
    b = a if points_b is None else np.array([p.xyz for p in points_b])
    return np.clip(a @ b.T, -1.0, 1.0)


def min_pairwise_geodesic(points):
    """Smallest great-circle gap of a point set (inf for fewer than 2)."""
    n = len(points)
    if n < 2:
        return math.inf
    g = dot_matrix(points)
    np.fill_diagonal(g, -1.0)
    return float(np.arccos(np.max(g)))


def check_distinct(points, min_gap=1e-9):
    """Raise if two points are closer than ``min_gap`` radians."""
    if min_pairwise_geodesic(points) <= min_gap:
        raise DomainError(f"point set contains duplicates (min gap <= {min_gap})")


def random_points(n, rng, hemisphere=None, equator_gap=0.0):
    """Uniform random points from an explicit ``numpy.random.Generator``.

    ``hemisphere='lower'`` restricts to z < 0, keeping at least
    ``equator_gap`` in |z| so the set stays disjoint from its antipodes.
    """
    pts = []
    while len(pts) < n:
        v = rng.normal(size=3)
        norm = np.linalg.norm(v)
        if norm < 1e-8:
            continue
        v = v / norm
        if hemisphere == "lower":
            if abs(v[2]) <= equator_gap:
                continue
            v[2] = -abs(v[2])
            v /= np.linalg.norm(v)
        pts.append(SpherePoint.from_xyz(v))
    return pts
