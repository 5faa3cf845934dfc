"""Explicit point sets and coefficients exhibiting degeneracy or
negativity of a kernel's quadratic form.

Three constructions are provided:

* antipodal pairs with signed coefficients, annihilating kernels whose
  nonzero blocks live on a single degree parity;
* hemisphere null-space point sets for kernels whose blocks of one
  parity vanish above a cutoff degree: coefficients solving
  ``sum_x c_x Y_j^k(x) = 0`` on the cutoff degrees are mirrored to the
  antipodal copy with the sign that cancels the opposite parity
  automatically (equal signs cancel all odd degrees, opposite signs all
  even degrees);
* quadrature discretizations turning a negative coefficient-space
  direction into a finite point set with a negative quadratic form.

All randomness comes from an explicit seed; nothing reads ambient state.
"""

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .certify import BlockStatus, certify
from .errors import ConvergenceError, DomainError, KernelStructureError
from .geometry import SpherePoint, check_distinct, random_points
from .harmonics import degree_order, flat_index, harmonic_matrix
from .kernels import (
    BandLimitedFunction,
    coefficient_contraction,
    kernel_matrix,
)
from .quadrature import sphere_rule

#: Deterministic seed point for antipodal witnesses (off the poles, the
#: equator, and coordinate planes, so no harmonic vanishes by accident).
_SEED_POINT = (0.8, 0.3)

_CHUNK_ENTRIES = 4_000_000


class WitnessKind(Enum):
    ANTIPODAL_ODD_COEFFS = "AntipodalOddCoeffs"
    ANTIPODAL_EVEN_COEFFS = "AntipodalEvenCoeffs"
    HEMISPHERE_NULLSPACE = "HemisphereNullspace"
    QUADRATURE_DISCRETIZATION = "QuadratureDiscretization"


@dataclass(frozen=True)
class Witness:
    """A finite point set with coefficients and the value of the kernel
    quadratic form sum c_x conj(c_z) K(x, z) they produce.

    ``scale`` is the absolute mass sum |c_x| |c_z| |K(x, z)| of the same
    form, the natural yardstick for calling ``quad_form`` zero/negative.
    Coefficients are normalized to unit max-modulus.
    """

    points: tuple
    coeffs: np.ndarray
    quad_form: float
    kind: WitnessKind
    scale: float

    def validate(self, tensor, rtol=1e-9):
        """Recompute the quadratic form from scratch and compare."""
        check_distinct(self.points)
        peak = float(np.max(np.abs(self.coeffs)))
        if abs(peak - 1.0) > 1e-12:
            raise DomainError(f"witness coefficients not normalized (max {peak})")
        q, scale = _pointwise_form(tensor, list(self.points), self.coeffs)
        if abs(q - self.quad_form) > rtol * max(scale, 1e-300):
            raise DomainError(
                f"stored quadratic form {self.quad_form:.6e} does not "
                f"reproduce (recomputed {q:.6e}, scale {scale:.3e})"
            )
        return q


def _pointwise_form(tensor, points, coeffs):
    """(form, mass) of the Hermitian quadratic form, chunked over rows so
    huge point sets never materialize a full Gram matrix."""
    coeffs = np.asarray(coeffs, dtype=complex)
    n = len(points)
    if len(coeffs) != n:
        raise DomainError(f"{n} points but {len(coeffs)} coefficients")
    total = 0.0 + 0.0j
    mass = 0.0
    abs_c = np.abs(coeffs)
    conj_c = np.conj(coeffs)
    chunk = max(1, _CHUNK_ENTRIES // max(n, 1))
    for lo in range(0, n, chunk):
        hi = min(n, lo + chunk)
        rows = kernel_matrix(tensor, points[lo:hi], points)
        total += coeffs[lo:hi] @ (rows @ conj_c)
        mass += float(abs_c[lo:hi] @ (np.abs(rows) @ abs_c))
    if abs(total.imag) > 1e-10 * max(mass, 1e-300):
        raise ArithmeticError(
            f"quadratic form has non-vanishing imaginary part "
            f"{total.imag:.3e} at scale {mass:.3e}"
        )
    return float(total.real), mass


def quadratic_form(tensor, points, coeffs):
    """Real value of sum over points of c_x conj(c_z) K(x, z).

    Points must be pairwise distinct; the imaginary part of the Hermitian
    form is asserted to vanish at relative 1e-10.
    """
    points = list(points)
    check_distinct(points)
    value, _ = _pointwise_form(tensor, points, coeffs)
    return value


def quadratic_form_scale(tensor, points, coeffs):
    """The absolute-mass scale of the quadratic form (same chunking)."""
    _, scale = _pointwise_form(tensor, list(points), coeffs)
    return scale


def block_quadratic_form(tensor, points, coeffs):
    """The same form computed in coefficient space: with
    y_j[k] = sum_x c_x Y_j^k(x), returns sum_j y_j^T D_j conj(y_j)."""
    coeffs = np.asarray(coeffs, dtype=complex)
    if len(coeffs) != len(points):
        raise DomainError(f"{len(points)} points but {len(coeffs)} coefficients")
    y = harmonic_matrix(tensor.j_max, list(points)) @ coeffs
    value = coefficient_contraction(tensor, y)
    return float(value.real)


# ---------------------------------------------------------------------------
# antipodal witnesses (single-parity kernels)


def _support_parities(tensor, tol=1e-10):
    """(even_support, odd_support) flags of nonzero block content,
    tail included, as detected by certification."""
    cert = certify(tensor, tensor.j_max, tol=tol)
    even = any(b.nonzero and b.j % 2 == 0 for b in cert.per_block)
    odd = any(b.nonzero and b.j % 2 == 1 for b in cert.per_block)
    tail = tensor.tail
    if tail is not None and not tail.is_zero:
        even = even or tail.parity in ("both", "even")
        odd = odd or tail.parity in ("both", "odd")
    return even, odd


def antipodal_witness(tensor, case):
    """Two antipodal points annihilating a single-parity kernel.

    ``case=1`` expects even-only block support and uses coefficients
    (1, -1); ``case=2`` expects odd-only support and uses (1, 1).
    """
    if case not in (1, 2):
        raise DomainError(f"case must be 1 or 2, got {case}")
    even, odd = _support_parities(tensor)
    if case == 1 and odd:
        raise KernelStructureError(
            "case 1 needs even-only block support, but odd-degree blocks "
            "are nonzero"
        )
    if case == 2 and even:
        raise KernelStructureError(
            "case 2 needs odd-only block support, but even-degree blocks "
            "are nonzero"
        )
    p = SpherePoint(*_SEED_POINT)
    points = (p, p.antipode())
    coeffs = np.array([1.0, -1.0 if case == 1 else 1.0], dtype=complex)
    value, scale = _pointwise_form(tensor, list(points), coeffs)
    kind = WitnessKind.ANTIPODAL_ODD_COEFFS if case == 1 else (
        WitnessKind.ANTIPODAL_EVEN_COEFFS
    )
    return Witness(points=points, coeffs=coeffs, quad_form=value, kind=kind,
                   scale=scale)


# ---------------------------------------------------------------------------
# hemisphere null-space witnesses (finite single-parity content)


def _nullspace_system_size(j_hat):
    return math.ceil(0.5 * j_hat * j_hat + 1.5 * j_hat) + 2


def hemisphere_nullspace_witness(tensor, j_hat, parity, seed=7, retries=5):
    """Degeneracy witness for kernels whose blocks of one parity vanish
    above degree ``j_hat`` (the opposite parity may be anything PSD).

    Samples N = ceil(j_hat^2/2 + 3 j_hat/2) + 2 points in the open lower
    hemisphere, solves sum_x c_x Y_j^k(x) = 0 for every (j, k) with j of
    the given parity up to ``j_hat`` (degree 0 included for the even
    case), and mirrors the set antipodally with equal coefficients when
    ``parity='even'`` (cancelling all odd degrees) or opposite
    coefficients when ``parity='odd'`` (cancelling all even degrees).
    """
    if parity not in ("even", "odd"):
        raise DomainError(f"parity must be 'even' or 'odd', got {parity}")
    if j_hat < 0:
        raise DomainError("j_hat must be nonnegative")
    cert = certify(tensor, tensor.j_max)
    offending = [
        b.j
        for b in cert.per_block
        if b.nonzero and b.j > j_hat and (b.j % 2 == 0) == (parity == "even")
    ]
    if offending:
        raise KernelStructureError(
            f"{parity}-degree blocks must vanish above j_hat={j_hat}, "
            f"but degrees {offending} are nonzero"
        )
    tail = tensor.tail
    if tail is not None and not tail.is_zero and tail.parity in ("both", parity):
        raise KernelStructureError(
            f"declared tail covers {parity} degrees beyond j_hat; the "
            "finite null-space construction does not apply"
        )

    start = 0 if parity == "even" else 1
    degrees = list(range(start, j_hat + 1, 2))
    row_ids = [flat_index(j, k) - 1 for j in degrees for k in range(-j, j + 1)]
    n_points = _nullspace_system_size(j_hat)
    if len(row_ids) >= n_points:
        raise KernelStructureError(
            f"null-space system has {len(row_ids)} equations for "
            f"{n_points} unknowns; no free direction"
        )

    rng = np.random.default_rng(seed)
    last_exc = None
    for _ in range(retries):
        pts = random_points(n_points, rng, hemisphere="lower", equator_gap=1e-3)
        try:
            check_distinct(pts)
        except DomainError as exc:  # astronomically unlikely; resample
            last_exc = exc
            continue
        system = harmonic_matrix(max(j_hat, 0), pts)[row_ids] if degrees else None
        if system is None:
            c = np.ones(n_points, dtype=complex)
        else:
            _, svals, vh = np.linalg.svd(system, full_matrices=True)
            c = np.conj(vh[-1])
            residual = float(np.max(np.abs(system @ c)))
            if residual > 1e-8 * max(float(svals[0]), 1e-300):
                last_exc = ConvergenceError(
                    f"null-space residual {residual:.3e} too large"
                )
                continue
        sign = 1.0 if parity == "even" else -1.0
        full_points = tuple(pts) + tuple(p.antipode() for p in pts)
        full_coeffs = np.concatenate([c, sign * c])
        full_coeffs = full_coeffs / np.max(np.abs(full_coeffs))
        value, scale = _pointwise_form(tensor, list(full_points), full_coeffs)
        if abs(value) > 1e-8 * max(scale, 1e-300):
            last_exc = ConvergenceError(
                f"constructed form {value:.3e} not degenerate at scale {scale:.3e}"
            )
            continue
        return Witness(
            points=full_points,
            coeffs=full_coeffs,
            quad_form=value,
            kind=WitnessKind.HEMISPHERE_NULLSPACE,
            scale=scale,
        )
    raise ConvergenceError(
        f"hemisphere null-space construction failed after {retries} attempts"
    ) from last_exc


# ---------------------------------------------------------------------------
# quadrature discretization of a negative direction


def _cobasis_coefficients(f):
    """Coefficients of f in the conjugated harmonic basis: the elementwise
    limit of sum_x w_x f(x) Y_j^k(x) under quadrature refinement."""
    src = f.coeffs
    top_degree = degree_order(len(src))[0]
    out = np.zeros((top_degree + 1) ** 2, dtype=complex)
    for idx in range(len(out)):
        j, k = degree_order(idx + 1)
        mirror = flat_index(j, -k) - 1
        if mirror < len(src):
            out[idx] = (-1.0 if k % 2 else 1.0) * src[mirror]
    return out


def expansion_quadratic_form(tensor, f):
    """Coefficient-space value of the quadratic form induced by the
    band-limited function ``f``; negative values certify directions of
    negativity that :func:`discretize_negative_direction` can realize."""
    yhat = _cobasis_coefficients(f)
    value = coefficient_contraction(tensor, yhat)
    mass = float(np.sum(np.abs(yhat)) ** 2) * max(tensor.max_abs_entry(), 1e-300)
    if abs(value.imag) > 1e-10 * max(mass, abs(value.real), 1e-300):
        raise ArithmeticError(
            f"coefficient-space form has imaginary part {value.imag:.3e}"
        )
    return float(value.real)


def band_limited_from_block_vector(j, vector):
    """The band-limited function whose coefficient-space quadratic form
    against a degree-diagonal tensor equals v^dagger D_j v.

    ``vector`` lists the block coordinates for k = -j..j; feeding the
    eigenvector of a negative block eigenvalue mu gives the closed-form
    value mu * ||v||^2.
    """
    vector = np.asarray(vector, dtype=complex)
    if vector.shape != (2 * j + 1,):
        raise DomainError(f"expected {2 * j + 1} entries for degree {j}")
    entries = {}
    for m in range(-j, j + 1):
        sign = -1.0 if m % 2 else 1.0
        entries[(j, m)] = sign * np.conj(vector[-m + j])
    return BandLimitedFunction.from_degree_coeffs(entries)


def discretize_negative_direction(tensor, f, m=16, m_cap=256):
    """Turn a negative coefficient-space direction into a concrete
    negative quadratic form on the product quadrature grid.

    With c_x = w_x f(x) over the resolution-m sphere rule, the form
    converges to :func:`expansion_quadratic_form` as m grows (exactly,
    once the rule resolves both band limits).  The resolution doubles, up
    to ``m_cap``, until the discretized form is negative.
    """
    closed = expansion_quadratic_form(tensor, f)
    if closed >= 0.0:
        raise DomainError(
            f"coefficient-space form is {closed:.6e} >= 0; the function "
            "is not a negative direction for this kernel"
        )
    mm = m
    while mm <= m_cap:
        rule = sphere_rule(mm)
        coeffs = rule.weights * f.evaluate(rule.theta, rule.phi)
        peak = float(np.max(np.abs(coeffs)))
        if peak > 0.0:
            coeffs = coeffs / peak
            value, scale = _pointwise_form(tensor, rule.points, coeffs)
            if value < 0.0:
                return Witness(
                    points=tuple(rule.points),
                    coeffs=coeffs,
                    quad_form=value,
                    kind=WitnessKind.QUADRATURE_DISCRETIZATION,
                    scale=scale,
                )
        mm *= 2
    raise ConvergenceError(
        f"discretized form stayed nonnegative up to resolution m={m_cap} "
        f"(coefficient-space value {closed:.6e})"
    )


# ---------------------------------------------------------------------------
# reports


def witness_records(w):
    records = [
        {
            "type": "site",
            "theta": p.theta,
            "phi": p.phi,
            "c": [float(np.real(c)), float(np.imag(c))],
        }
        for p, c in zip(w.points, w.coeffs)
    ]
    records.append(
        {
            "type": "witness",
            "kind": w.kind.value,
            "n_points": len(w.points),
            "quad_form": w.quad_form,
            "scale": w.scale,
        }
    )
    return records
