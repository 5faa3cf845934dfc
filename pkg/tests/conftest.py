"""Shared helpers: independent oracles and seeded generators."""

import cmath
import math
from fractions import Fraction

import numpy as np
import pytest
from scipy.special import lpmv

from spherekern.geometry import SpherePoint


def y_direct(j, k, theta, phi):
    """Independent spherical-harmonic oracle: the normalization evaluated
    with exact rational factorial ratios, times scipy's associated
    Legendre function (Condon-Shortley phase included), for any |k| <= j."""
    ratio = Fraction(math.factorial(j - k), math.factorial(j + k))
    norm = math.sqrt((2 * j + 1) / (4.0 * math.pi) * float(ratio))
    return norm * float(lpmv(k, j, math.cos(theta))) * cmath.exp(1j * k * phi)


def random_rotation(rng):
    """Haar-ish random rotation from a QR factorization."""
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def rotate_point(p, rot):
    return SpherePoint.from_xyz(rot @ p.xyz)


def fibonacci_points(n):
    """Well-separated deterministic nodes (golden-angle spiral)."""
    golden = math.pi * (3.0 - math.sqrt(5.0))
    pts = []
    for i in range(n):
        z = 1.0 - (2.0 * i + 1.0) / n
        theta = math.acos(z)
        phi = (i * golden) % (2.0 * math.pi)
        pts.append(SpherePoint(theta, phi))
    return pts


def random_hermitian(rng, n, scale=1.0):
    m = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return scale * 0.5 * (m + m.conj().T)


def random_psd(rng, n, scale=1.0):
    m = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return scale * (m @ m.conj().T) / n


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)
