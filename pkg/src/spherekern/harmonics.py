"""Legendre polynomials, associated Legendre functions, and complex
spherical harmonics.

The associated Legendre functions carry the Condon-Shortley phase, so
``assoc_legendre(1, 1, cos(theta)) == -sin(theta)``.  Internally all
evaluation runs through the fully normalized functions

    nplm(j, k, t) = sqrt((2j+1)/(4*pi) * (j-k)!/(j+k)!) * P_{j,k}(t),

whose upward three-term recurrence in the degree is stable and free of
factorial overflow up to degree ~2000; the unnormalized values are
reconstructed on request only (and only for j <= 150, where the
reconstruction factor still fits in a double).

The harmonic is ``Y_j^k(theta, phi) = nplm(j, k, cos(theta)) * exp(i*k*phi)``,
which equals the classical ``1/sqrt(2*pi) * sqrt((2j+1)/2 * (j-k)!/(j+k)!)
* P_{j,k}(cos(theta)) * exp(i*k*phi)``.

Everything here is a pure function; there are no evaluation caches.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .geometry import SpherePoint, points_theta_phi

FOUR_PI = 4.0 * math.pi

#: Largest degree for which the unnormalized P_{j,k} is exposed; beyond it
#: the factorial reconstruction factor can overflow a double.
MAX_UNNORMALIZED_DEGREE = 150


# ---------------------------------------------------------------------------
# indexing


def flat_index(j, k):
    """Single index l = j^2 + j + 1 + k; maps (0,0) -> 1."""
    return j * j + j + 1 + k


def degree_order(flat):
    """Inverse of :func:`flat_index`."""
    if flat < 1:
        raise DomainError(f"flat index must be >= 1, got {flat}")
    j = math.isqrt(flat - 1)
    k = flat - 1 - j * j - j
    return j, k


@dataclass(frozen=True)
class HarmonicIndex:
    """Degree/order pair (j, k) with |k| <= j."""

    j: int
    k: int

    def __post_init__(self):
        if self.j < 0:
            raise DomainError(f"degree must be nonnegative, got {self.j}")
        if abs(self.k) > self.j:
            raise DomainError(f"order {self.k} exceeds degree {self.j}")

    @property
    def flat(self):
        return flat_index(self.j, self.k)

    @property
    def eigenvalue(self):
        """Laplace-Beltrami eigenvalue j*(j+1)."""
        return self.j * (self.j + 1)

    @classmethod
    def from_flat(cls, flat):
        return cls(*degree_order(flat))


def eigenvalue_of_flat(flat):
    j, _ = degree_order(flat)
    return j * (j + 1)


# ---------------------------------------------------------------------------
# Legendre polynomials


def _check_t(t):
    t = np.asarray(t, dtype=float)
    if np.any(np.abs(t) > 1.0):
        raise DomainError("argument must lie in [-1, 1]")
    return t


def legendre(j, t):
    """Legendre polynomial P_j(t) by the three-term recurrence.

    Accepts scalars or arrays; P_j(1) = 1 and P_j(-1) = (-1)^j exactly.
    """
    if j < 0:
        raise DomainError(f"degree must be nonnegative, got {j}")
    t = _check_t(t)
    scalar = t.ndim == 0
    t = np.atleast_1d(t)
    p_prev = np.ones_like(t)
    if j == 0:
        return float(p_prev[0]) if scalar else p_prev
    p = t.copy()
    for l in range(1, j):
        p_prev, p = p, ((2 * l + 1) * t * p - l * p_prev) / (l + 1)
    return float(p[0]) if scalar else p


def legendre_asymptotic(j, theta):
    """Leading large-degree form sqrt(2/(pi*j*sin(theta))) *
    cos((j + 1/2)*theta - pi/4), valid for theta strictly inside (0, pi);
    the remainder is O(j^{-3/2})."""
    if j < 1:
        raise DomainError(f"degree must be >= 1, got {j}")
    theta = float(theta)
    if not 0.0 < theta < math.pi:
        raise DomainError("theta must lie strictly inside (0, pi)")
    amp = math.sqrt(2.0 / (math.pi * j * math.sin(theta)))
    return amp * math.cos((j + 0.5) * theta - 0.25 * math.pi)


# ---------------------------------------------------------------------------
# normalized associated Legendre functions


def _seed_sectoral(k, s):
    """nplm(k, k, t) where s = sqrt(1 - t^2); includes the Condon-Shortley
    sign (-1)^k."""
    prod = 1.0
    for i in range(1, k + 1):
        prod *= (2 * i + 1) / (2 * i)
    sign = -1.0 if k % 2 else 1.0
    return sign * math.sqrt(prod / FOUR_PI) * s**k


def _recurrence_coeffs(j, k):
    a = math.sqrt((4 * j * j - 1) / (j * j - k * k))
    if j == k + 1:
        return a, 0.0
    b = -math.sqrt(
        (2 * j + 1) * (j - 1 - k) * (j - 1 + k) / ((2 * j - 3) * (j * j - k * k))
    )
    return a, b


def _nplm_fixed_order(j_max, k, t):
    """nplm(j, k, t) for j = k..j_max at fixed order k >= 0.

    Returns an array of shape (j_max - k + 1,) + t.shape.
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    s = np.sqrt(np.maximum(0.0, 1.0 - t * t))
    out = np.empty((j_max - k + 1,) + t.shape)
    out[0] = _seed_sectoral(k, s)
    if j_max == k:
        return out
    a, _ = _recurrence_coeffs(k + 1, k)
    out[1] = a * t * out[0]
    for j in range(k + 2, j_max + 1):
        a, b = _recurrence_coeffs(j, k)
        out[j - k] = a * t * out[j - k - 1] + b * out[j - k - 2]
    return out


def assoc_legendre_normalized(j, k, t):
    """Fully normalized associated Legendre function (any |k| <= j).

    Negative orders use nplm(j, -k, t) = (-1)^k nplm(j, k, t).
    """
    if j < 0:
        raise DomainError(f"degree must be nonnegative, got {j}")
    if abs(k) > j:
        raise DomainError(f"order {k} exceeds degree {j}")
    t = _check_t(t)
    scalar = t.ndim == 0
    kk = abs(k)
    vals = _nplm_fixed_order(j, kk, t)[-1]
    if k < 0 and kk % 2:
        vals = -vals
    return float(vals[()] if vals.ndim == 0 else vals[0]) if scalar else vals


def assoc_legendre(j, k, t):
    """Associated Legendre function P_{j,k}(t), Condon-Shortley phase
    included (P_{1,1}(t) = -sqrt(1 - t^2)).

    Only 0 <= k <= j is accepted, and j <= 150 so the normalization
    factor can be undone without overflow.
    """
    if j < 0 or k < 0:
        raise DomainError("degree and order must be nonnegative")
    if k > j:
        raise DomainError(f"order {k} exceeds degree {j}")
    if j > MAX_UNNORMALIZED_DEGREE:
        raise DomainError(
            f"unnormalized values are exposed only for j <= "
            f"{MAX_UNNORMALIZED_DEGREE}; use assoc_legendre_normalized"
        )
    t = _check_t(t)
    scalar = t.ndim == 0
    vals = _nplm_fixed_order(j, k, t)[-1]
    log_ratio = math.lgamma(j + k + 1) - math.lgamma(j - k + 1)
    factor = math.sqrt(FOUR_PI / (2 * j + 1)) * math.exp(0.5 * log_ratio)
    vals = vals * factor
    return float(vals[0]) if scalar else vals


# ---------------------------------------------------------------------------
# spherical harmonics


def spherical_harmonic(idx, p):
    """Y_j^k at a sphere point (complex)."""
    if not isinstance(idx, HarmonicIndex):
        idx = HarmonicIndex(*idx)
    nplm = assoc_legendre_normalized(idx.j, idx.k, math.cos(p.theta))
    return nplm * complex(math.cos(idx.k * p.phi), math.sin(idx.k * p.phi))


def harmonic_vector(j, p):
    """All orders of one degree: array [Y_j^{-j}(p), ..., Y_j^{j}(p)]."""
    if j < 0:
        raise DomainError(f"degree must be nonnegative, got {j}")
    t = math.cos(p.theta)
    out = np.empty(2 * j + 1, dtype=complex)
    for k in range(j + 1):
        nplm = float(_nplm_fixed_order(j, k, t)[-1][0])
        phase = complex(math.cos(k * p.phi), math.sin(k * p.phi))
        out[j + k] = nplm * phase
        if k:
            sign = -1.0 if k % 2 else 1.0
            out[j - k] = sign * nplm * phase.conjugate()
    return out


def harmonic_matrix(j_max, points):
    """Matrix of Y values: shape ((j_max+1)^2, n) with row l-1 holding
    Y_{j}^{k}(points) for the flat index l = flat_index(j, k).

    ``points`` is a sequence of :class:`SpherePoint` or a (theta, phi)
    array pair.
    """
    if isinstance(points, tuple) and len(points) == 2:
        theta, phi = (np.atleast_1d(np.asarray(a, dtype=float)) for a in points)
    else:
        theta, phi = points_theta_phi(points)
    t = np.cos(theta)
    n = t.shape[0]
    out = np.empty(((j_max + 1) ** 2, n), dtype=complex)
    for k in range(j_max + 1):
        cols = _nplm_fixed_order(j_max, k, t)  # degrees k..j_max
        phase = np.exp(1j * k * phi)
        sign = -1.0 if k % 2 else 1.0
        for j in range(k, j_max + 1):
            out[flat_index(j, k) - 1] = cols[j - k] * phase
            if k:
                out[flat_index(j, -k) - 1] = sign * cols[j - k] * np.conj(phase)
    return out


def addition_theorem_gap(j, p, q):
    """| P_j(p.q) - 4*pi/(2j+1) * sum_k Y_j^k(q) conj(Y_j^k(p)) |.

    Identically zero in exact arithmetic; used as a self-test primitive.
    """
    if j < 0:
        raise DomainError(f"degree must be nonnegative, got {j}")
    lhs = legendre(j, p.dot(q))
    yp = harmonic_vector(j, p)
    yq = harmonic_vector(j, q)
    rhs = FOUR_PI / (2 * j + 1) * np.sum(yq * np.conj(yp))
    return abs(lhs - rhs)
