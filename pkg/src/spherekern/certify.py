"""Certification of (strict) positive definiteness for block kernels.

A degree-diagonal kernel is positive definite exactly when every degree
block is positive semidefinite, so the certificate classifies each block
by its spectrum.  Strictness is decidable from finite data only in one
direction: a finite tensor can never be strictly positive definite (its
quadratic form degenerates on antipodal constructions, see
:mod:`spherekern.witness`), while affirming strictness requires strictly
positive blocks on infinitely many even and infinitely many odd degrees,
which only a declared tail can provide.  Without a tail the verdict is
therefore never ``StrictlyPositiveDefinite``.
"""

import json
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DomainError, KernelStructureError
from .kernels import CoefficientTensor, Tail, laplace_symmetry_defect

DEFAULT_TOL = 1e-10


class BlockStatus(Enum):
    ZERO = "Zero"
    PSD_SINGULAR = "PsdSingular"
    POSITIVE_DEFINITE = "PositiveDefinite"
    INDEFINITE = "Indefinite"


class Verdict(Enum):
    NOT_POSITIVE_DEFINITE = "NotPositiveDefinite"
    POSITIVE_DEFINITE_ONLY = "PositiveDefiniteOnly"
    STRICTLY_POSITIVE_DEFINITE = "StrictlyPositiveDefinite"
    STRICTNESS_UNDETERMINED = "PositiveDefinite_StrictnessUndetermined"


@dataclass(frozen=True)
class BlockClassification:
    """Spectral classification of one degree block."""

    j: int
    status: BlockStatus
    min_eigenvalue: float
    null_space_basis: tuple = None  # complex vectors, present iff PSD_SINGULAR

    @property
    def nonzero(self):
        return self.status is not BlockStatus.ZERO


@dataclass(frozen=True)
class ParityReport:
    """Counts of nonzero and strictly positive blocks by degree parity,
    plus what the declared tail contributes beyond the classified range."""

    even_nonzero: int
    odd_nonzero: int
    even_strict: int
    odd_strict: int
    tail_parity: str = None
    tail_strictly_positive: bool = False

    def to_dict(self):
        return {
            "even_nonzero": self.even_nonzero,
            "odd_nonzero": self.odd_nonzero,
            "even_strict": self.even_strict,
            "odd_strict": self.odd_strict,
            "tail_parity": self.tail_parity,
            "tail_strictly_positive": self.tail_strictly_positive,
        }


@dataclass(frozen=True)
class Certificate:
    per_block: tuple
    strict_degrees: frozenset
    parity_report: ParityReport
    verdict: Verdict
    justification: str
    tol: float
    scale: float

    def block(self, j):
        return self.per_block[j]


def build_block(tensor, j):
    """Dense Hermitian matrix of degree-j coefficients, entry (k, k')
    stored at offset (k+j, k'+j); raises on a degree beyond the explicit
    range of a tensor without a tail."""
    return tensor.degree_block(j, include_tail=True)


def classify_block(block, tol=DEFAULT_TOL, j=None, scale=None):
    """Classify one Hermitian block by its eigenvalues.

    The decision threshold is ``tau = tol * max(1, max|entry|)``, or
    ``tol * scale`` when an explicit scale is supplied (as
    :func:`certify` does, to keep whole-tensor classification invariant
    under positive rescaling).
    """
    block = np.asarray(block, dtype=complex)
    if block.ndim != 2 or block.shape[0] != block.shape[1]:
        raise DomainError("block must be a square matrix")
    max_abs = float(np.max(np.abs(block))) if block.size else 0.0
    tau = tol * (max(1.0, max_abs) if scale is None else scale)
    defect = float(np.max(np.abs(block - block.conj().T)))
    if defect > max(tau, 1e-300):
        raise KernelStructureError(
            f"block is not Hermitian (defect {defect:.3e} > tolerance {tau:.3e})"
        )
    herm = 0.5 * (block + block.conj().T)
    eigvals, eigvecs = np.linalg.eigh(herm)
    min_eig = float(eigvals[0])
    null_basis = None
    if min_eig < -tau:
        status = BlockStatus.INDEFINITE
    elif max_abs <= tau:
        status = BlockStatus.ZERO
        min_eig = min_eig if abs(min_eig) > tau else 0.0
    elif min_eig > tau:
        status = BlockStatus.POSITIVE_DEFINITE
    else:
        status = BlockStatus.PSD_SINGULAR
        cols = np.nonzero(np.abs(eigvals) <= tau)[0]
        null_basis = tuple(eigvecs[:, i].copy() for i in cols)
    return BlockClassification(
        j=j if j is not None else -1,
        status=status,
        min_eigenvalue=min_eig,
        null_space_basis=null_basis,
    )


def _tail_flags(tail):
    nonzero = tail is not None and not tail.is_zero
    even_inf = nonzero and tail.parity in ("both", "even")
    odd_inf = nonzero and tail.parity in ("both", "odd")
    strict = nonzero and bool(tail.strictly_positive)
    return nonzero, even_inf, odd_inf, strict


def certify(tensor, j_check, tol=DEFAULT_TOL):
    """Classify all degree blocks j <= j_check and derive the verdict.

    The tensor must be degree-diagonal (no coupling between different
    degrees); ``j_check`` must cover the explicit range.  Thresholds are
    normalized by the largest block entry, so ``certify(alpha * T)``
    yields identical statuses and verdict for every alpha > 0.
    """
    if not isinstance(tensor, CoefficientTensor):
        raise DomainError("expected a CoefficientTensor")
    if j_check < tensor.j_max:
        raise DomainError(
            f"j_check={j_check} must cover the explicit degree range "
            f"(j_max={tensor.j_max})"
        )
    if tol <= 0:
        raise DomainError("tolerance must be positive")
    if laplace_symmetry_defect(tensor) != 0.0:
        raise KernelStructureError(
            "certification requires a degree-diagonal tensor; this one "
            "couples different degrees (Laplace symmetry defect > 0)"
        )

    has_tail = tensor.tail is not None
    blocks = {}
    for j in range(j_check + 1):
        if j <= tensor.j_max or has_tail:
            blocks[j] = tensor.degree_block(j, include_tail=True)
    scale = max((float(np.max(np.abs(b))) for b in blocks.values()), default=0.0)

    per_block = []
    for j in range(j_check + 1):
        if j in blocks:
            per_block.append(classify_block(blocks[j], tol=tol, j=j, scale=scale))
        else:
            per_block.append(
                BlockClassification(j=j, status=BlockStatus.ZERO, min_eigenvalue=0.0)
            )

    strict = frozenset(
        b.j for b in per_block if b.status is BlockStatus.POSITIVE_DEFINITE
    )
    even_nonzero = sum(1 for b in per_block if b.nonzero and b.j % 2 == 0)
    odd_nonzero = sum(1 for b in per_block if b.nonzero and b.j % 2 == 1)
    tail_nonzero, even_inf, odd_inf, tail_strict = _tail_flags(tensor.tail)
    report = ParityReport(
        even_nonzero=even_nonzero,
        odd_nonzero=odd_nonzero,
        even_strict=sum(1 for j in strict if j % 2 == 0),
        odd_strict=sum(1 for j in strict if j % 2 == 1),
        tail_parity=tensor.tail.parity if tail_nonzero else None,
        tail_strictly_positive=tail_strict,
    )

    indefinite = [b for b in per_block if b.status is BlockStatus.INDEFINITE]
    tail_negative = (
        isinstance(tensor.tail, Tail)
        and not tensor.tail.is_zero
        and tensor.tail.amplitude < 0.0
    )
    if indefinite:
        worst = min(indefinite, key=lambda b: b.min_eigenvalue)
        verdict = Verdict.NOT_POSITIVE_DEFINITE
        justification = (
            f"block operator at degree {worst.j} is indefinite "
            f"(min eigenvalue {worst.min_eigenvalue:.6e}); a single "
            "indefinite block refutes positive definiteness"
        )
    elif tail_negative:
        verdict = Verdict.NOT_POSITIVE_DEFINITE
        justification = (
            "declared tail has negative amplitude, so every tail block "
            "is negative definite"
        )
    elif even_inf and odd_inf and tail_strict:
        verdict = Verdict.STRICTLY_POSITIVE_DEFINITE
        justification = (
            "all blocks positive semidefinite and the declared tail "
            "contributes strictly positive blocks on infinitely many even "
            "and infinitely many odd degrees, which suffices for strictness"
        )
    else:
        even_content = math.inf if even_inf else even_nonzero
        odd_content = math.inf if odd_inf else odd_nonzero
        if even_content == 0 and odd_content == 0:
            verdict = Verdict.POSITIVE_DEFINITE_ONLY
            justification = (
                "empty support: the kernel vanishes identically, hence is "
                "positive definite but nowhere strict"
            )
        elif odd_content == 0:
            verdict = Verdict.POSITIVE_DEFINITE_ONLY
            justification = (
                "parity necessity, case 1: nonzero blocks occur only on "
                "even degrees; antipodal point sets with opposite-signed "
                "coefficients annihilate the quadratic form"
            )
        elif even_content == 0:
            verdict = Verdict.POSITIVE_DEFINITE_ONLY
            justification = (
                "parity necessity, case 2: nonzero blocks occur only on "
                "odd degrees; antipodal point sets with equal coefficients "
                "annihilate the quadratic form"
            )
        elif even_content < math.inf:
            verdict = Verdict.POSITIVE_DEFINITE_ONLY
            justification = (
                "parity necessity, case 3: only finitely many even degrees "
                "carry nonzero blocks; a hemisphere null-space construction "
                "annihilates the quadratic form"
            )
        elif odd_content < math.inf:
            verdict = Verdict.POSITIVE_DEFINITE_ONLY
            justification = (
                "parity necessity, case 4: only finitely many odd degrees "
                "carry nonzero blocks; a hemisphere null-space construction "
                "annihilates the quadratic form"
            )
        else:
            verdict = Verdict.STRICTNESS_UNDETERMINED
            justification = (
                "all blocks positive semidefinite with nonzero content on "
                "infinitely many even and odd degrees, but strict positivity "
                "of infinitely many blocks per parity is not established; "
                "the sufficiency test is inconclusive"
            )

    return Certificate(
        per_block=tuple(per_block),
        strict_degrees=strict,
        parity_report=report,
        verdict=verdict,
        justification=justification,
        tol=tol,
        scale=scale,
    )


# ---------------------------------------------------------------------------
# reports


def certificate_records(cert):
    """Field-for-field record list shared by the machine and human forms."""
    records = [
        {
            "type": "block",
            "j": b.j,
            "status": b.status.value,
            "min_eig": b.min_eigenvalue,
        }
        for b in cert.per_block
    ]
    records.append(
        {
            "type": "verdict",
            "verdict": cert.verdict.value,
            "justification": cert.justification,
            "strict_degrees": sorted(cert.strict_degrees),
            "parity": cert.parity_report.to_dict(),
            "tol": cert.tol,
            "scale": cert.scale,
        }
    )
    return records


def render_machine(cert):
    lines = [
        json.dumps(rec, sort_keys=True, separators=(",", ":"))
        for rec in certificate_records(cert)
    ]
    return "\n".join(lines) + "\n"


def render_human(cert):
    records = certificate_records(cert)
    out = [f"{'j':>4}  {'status':<18}  {'min_eig':>24}"]
    for rec in records:
        if rec["type"] != "block":
            continue
        out.append(f"{rec['j']:>4}  {rec['status']:<18}  {rec['min_eig']:>24.16e}")
    summary = records[-1]
    parity = summary["parity"]
    out.append("")
    out.append(f"strict_degrees: {summary['strict_degrees']}")
    out.append(
        "parity: even_nonzero={even_nonzero} odd_nonzero={odd_nonzero} "
        "even_strict={even_strict} odd_strict={odd_strict} "
        "tail_parity={tail_parity} tail_strictly_positive={tail_strictly_positive}".format(
            **parity
        )
    )
    out.append(f"tol: {summary['tol']}")
    out.append(f"scale: {summary['scale']}")
    out.append(f"verdict: {summary['verdict']}")
    out.append(f"justification: {summary['justification']}")
    return "\n".join(out) + "\n"
