"""Kernel interpolation of scattered data on the sphere.

Assembles the Gram matrix K(x, z) over the data sites, solves for the
coefficients of s(q) = sum_x c_x K(q, x), and evaluates the interpolant.
The solve refuses numerically singular Gram matrices and hands back the
near-null eigenvector, which doubles as a degeneracy witness candidate.
"""

import csv
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import ConvergenceError, DomainError, KernelStructureError, SingularGramError
from .geometry import SpherePoint, check_distinct
from .kernels import kernel_matrix

#: Relative eigenvalue floor below which the Gram matrix counts as singular.
SINGULAR_RTOL = 1e-12

#: Condition estimate up to which the nodal residual bound 1e-8*(1+max|f|)
#: applies unrelaxed.
COND_REFERENCE = 1e10

_GRAM_HERM_RTOL = 1e-11


@dataclass(frozen=True)
class InterpolationProblem:
    """Distinct data sites, one complex value per site, and the kernel."""

    points: tuple
    values: np.ndarray
    tensor: object

    def __init__(self, points, values, tensor):
        points = tuple(points)
        values = np.atleast_1d(np.asarray(values, dtype=complex))
        if len(points) < 1:
            raise DomainError("at least one data site is required")
        if len(points) != len(values):
            raise DomainError(
                f"{len(points)} sites but {len(values)} values"
            )
        check_distinct(points)
        values.setflags(write=False)
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "tensor", tensor)


@dataclass(frozen=True)
class Interpolant:
    """Solved coefficients plus Gram diagnostics."""

    problem: InterpolationProblem
    coeffs: np.ndarray
    min_eigenvalue: float
    max_eigenvalue: float
    condition: float
    residual: float

    def __call__(self, q):
        return evaluate(self, q)


def gram(tensor, points, tail_degree=None):
    """Hermitian matrix of kernel values over all site pairs.

    The raw evaluation must be Hermitian to relative 1e-11; it is then
    symmetrized exactly.
    """
    points = list(points)
    check_distinct(points)
    g = kernel_matrix(tensor, points, tail_degree=tail_degree)
    scale = float(np.max(np.abs(g))) if g.size else 0.0
    defect = float(np.max(np.abs(g - g.conj().T)))
    if defect > _GRAM_HERM_RTOL * max(scale, 1e-300):
        raise KernelStructureError(
            f"Gram matrix Hermitian defect {defect:.3e} exceeds "
            f"{_GRAM_HERM_RTOL} relative"
        )
    return 0.5 * (g + g.conj().T)


def fit(problem, tail_degree=None):
    """Solve the interpolation system K c = f by Hermitian factorization.

    Raises :class:`SingularGramError` (carrying the near-null eigenvector)
    when the smallest Gram eigenvalue falls below ``SINGULAR_RTOL`` times
    the largest in magnitude.
    """
    g = gram(problem.tensor, problem.points, tail_degree=tail_degree)
    eigvals, eigvecs = np.linalg.eigh(g)
    abs_eigs = np.abs(eigvals)
    i_min = int(np.argmin(abs_eigs))
    abs_min, abs_max = float(abs_eigs[i_min]), float(np.max(abs_eigs))
    if abs_max == 0.0 or abs_min <= SINGULAR_RTOL * abs_max:
        raise SingularGramError(
            f"Gram matrix is numerically singular (|eig| range "
            f"[{abs_min:.3e}, {abs_max:.3e}]); the kernel is degenerate "
            "on this point set",
            null_vector=eigvecs[:, i_min].copy(),
            min_eigenvalue=float(eigvals[i_min]),
        )
    coeffs = scipy.linalg.solve(g, problem.values, assume_a="her")
    condition = abs_max / abs_min
    residual = float(np.max(np.abs(g @ coeffs - problem.values)))
    bound = (
        1e-8
        * (1.0 + float(np.max(np.abs(problem.values))))
        * max(1.0, condition / COND_REFERENCE)
    )
    if residual > bound:
        raise ConvergenceError(
            f"nodal residual {residual:.3e} exceeds the post-solve bound "
            f"{bound:.3e} (condition {condition:.3e})"
        )
    coeffs.setflags(write=False)
    return Interpolant(
        problem=problem,
        coeffs=coeffs,
        min_eigenvalue=float(eigvals[0]),
        max_eigenvalue=float(eigvals[-1]),
        condition=condition,
        residual=residual,
    )


def evaluate(interp, q):
    """s(q) = sum_x c_x K(q, x)."""
    row = kernel_matrix(interp.problem.tensor, [q], list(interp.problem.points))
    return complex(row[0] @ interp.coeffs)


def evaluate_many(interp, points):
    rows = kernel_matrix(interp.problem.tensor, list(points), list(interp.problem.points))
    return rows @ interp.coeffs


# ---------------------------------------------------------------------------
# site files: delimited text, one record per site, header line required


def read_sites(path):
    """Read a site file: CSV with header ``theta,phi[,value_re,value_im]``.

    Returns (points, values-or-None); rejects duplicate sites and
    malformed records.
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip().lower() for h in next(reader)]
        except StopIteration:
            raise DomainError(f"{path}: empty site file (header line required)")
        required = ("theta", "phi")
        if header[:2] != list(required):
            raise DomainError(
                f"{path}: header must start with 'theta,phi', got {header!r}"
            )
        has_values = header[2:4] == ["value_re", "value_im"]
        if len(header) > 2 and not has_values:
            raise DomainError(
                f"{path}: value columns must be 'value_re,value_im', got "
                f"{header[2:]!r}"
            )
        points, values = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            want = 4 if has_values else 2
            if len(row) < want:
                raise DomainError(
                    f"{path}:{lineno}: expected {want} fields, got {len(row)}"
                )
            try:
                theta, phi = float(row[0]), float(row[1])
                if has_values:
                    values.append(complex(float(row[2]), float(row[3])))
            except ValueError as exc:
                raise DomainError(f"{path}:{lineno}: non-numeric field ({exc})")
            try:
                points.append(SpherePoint(theta, phi))
            except DomainError as exc:
                raise DomainError(f"{path}:{lineno}: {exc}")
    if not points:
        raise DomainError(f"{path}: no data records")
    try:
        check_distinct(points)
    except DomainError:
        raise DomainError(f"{path}: duplicate sites are not allowed")
    return points, (np.array(values) if has_values else None)


def write_sites(path, points, values=None):
    """Write a site file in the format :func:`read_sites` accepts."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        if values is None:
            writer.writerow(["theta", "phi"])
            for p in points:
                writer.writerow([repr(p.theta), repr(p.phi)])
        else:
            writer.writerow(["theta", "phi", "value_re", "value_im"])
            for p, v in zip(points, values):
                v = complex(v)
                writer.writerow([repr(p.theta), repr(p.phi), repr(v.real), repr(v.imag)])
