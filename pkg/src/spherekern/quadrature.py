"""Gauss-Legendre rules on [-1, 1] and the product rule on the sphere.

The sphere rule places colatitudes at the arccos of the Gauss nodes and
2m equispaced longitudes pi*j/m, j = 1..2m, with point weight
(pi/m) * w_i.  Weights sum to 4*pi; the rule integrates products
Y_j^k conj(Y_{j'}^{k'}) exactly whenever j + j' <= 2m - 1.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError, DomainError
from .geometry import SpherePoint

_NEWTON_TOL = 1e-15
_NEWTON_MAX_ITER = 100


@dataclass(frozen=True)
class GaussRule:
    """Nodes (ascending, in (-1, 1)) and positive weights on [-1, 1]."""

    nodes: np.ndarray
    weights: np.ndarray

    @property
    def m(self):
        return len(self.nodes)

    def integrate(self, f):
        return float(np.dot(self.weights, f(self.nodes)))


def _legendre_value_and_derivative(m, t):
    """(P_m(t), P_m'(t)) via the recurrence; |t| < 1 assumed."""
    p_prev = np.ones_like(t)
    p = t.copy()
    for l in range(1, m):
        p_prev, p = p, ((2 * l + 1) * t * p - l * p_prev) / (l + 1)
    dp = m * (t * p - p_prev) / (t * t - 1.0)
    return p, dp


def gauss_legendre(m):
    """Gauss-Legendre rule with ``m`` nodes.

    Nodes are the roots of P_m found by Newton iteration seeded with the
    Chebyshev-angle approximation; weights are 2 / ((1 - t^2) P_m'(t)^2).
    Deterministic; raises :class:`ConvergenceError` only on an internal
    failure of the Newton loop.
    """
    if m < 1:
        raise DomainError(f"node count must be >= 1, got {m}")
    i = np.arange(1, m + 1)
    t = np.cos(math.pi * (4 * i - 1) / (4 * m + 2))
    for _ in range(_NEWTON_MAX_ITER):
        p, dp = _legendre_value_and_derivative(m, t)
        delta = p / dp
        t = t - delta
        if np.max(np.abs(delta)) < _NEWTON_TOL:
            break
    else:
        raise ConvergenceError(f"Newton iteration for P_{m} roots did not converge")
    _, dp = _legendre_value_and_derivative(m, t)
    w = 2.0 / ((1.0 - t * t) * dp * dp)
    order = np.argsort(t)
    nodes, weights = t[order], w[order]
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return GaussRule(nodes=nodes, weights=weights)


@dataclass(frozen=True)
class SphereRule:
    """Product quadrature rule on S^2 with 2*m*m points."""

    m: int
    theta: np.ndarray  # colatitude per point, length 2*m*m
    phi: np.ndarray
    weights: np.ndarray
    _points: list = field(default=None, repr=False, compare=False)

    @property
    def points(self):
        if self._points is None:
            pts = [SpherePoint(t, p) for t, p in zip(self.theta, self.phi)]
            object.__setattr__(self, "_points", pts)
        return self._points

    def integrate(self, f):
        """Sum of weight * f(point); ``f`` maps a SpherePoint to a number,
        or is an array of values in rule order."""
        if callable(f):
            vals = np.array([f(p) for p in self.points])
        else:
            vals = np.asarray(f)
        return complex(np.dot(self.weights, vals))

    def integrate_angles(self, f):
        """Vectorized variant: ``f(theta_array, phi_array) -> values``."""
        return complex(np.dot(self.weights, f(self.theta, self.phi)))


def sphere_rule(m):
    """The 2m*m-point product rule (Gauss in cos(colatitude), equispaced
    longitude)."""
    gauss = gauss_legendre(m)
    theta_lat = np.arccos(gauss.nodes)
    phi_lon = math.pi * np.arange(1, 2 * m + 1) / m
    phi_lon[-1] = 0.0  # 2*pi wraps to 0
    theta = np.repeat(theta_lat, 2 * m)
    phi = np.tile(phi_lon, m)
    weights = np.repeat(gauss.weights * (math.pi / m), 2 * m)
    for a in (theta, phi, weights):
        a.setflags(write=False)
    return SphereRule(m=m, theta=theta, phi=phi, weights=weights)


def tensor_integrate(rule, kernel):
    """Double sum over the rule's points of w_p w_q K(p, q).

    ``kernel`` is either a callable (p, q) -> complex or a
    :class:`~spherekern.kernels.CoefficientTensor` (evaluated vectorized).
    """
    from .kernels import CoefficientTensor, kernel_matrix

    pts = rule.points
    if isinstance(kernel, CoefficientTensor):
        values = kernel_matrix(kernel, pts)
    else:
        values = np.array([[kernel(p, q) for q in pts] for p in pts])
    w = rule.weights
    return complex(w @ values @ w)
