"""Coefficient tensors of Hermitian kernels on the sphere.

A kernel K(p, q) = sum over (j,k),(j',k') of alpha * Y_j^k(p) *
conj(Y_{j'}^{k'}(q)) is stored through one of five structural variants
of its coefficient tensor:

* ``full``             - dense matrix over the flat index l = j^2+j+1+k
* ``block_diagonal``   - one Hermitian (2j+1)^2 matrix per degree
* ``axially_symmetric``- one Hermitian matrix over degrees per order k
* ``isotropic``        - one real number per degree (c_j * identity blocks)
* ``diagonal``         - one real number per (j, k)

All variants are validated Hermitian at construction (relative 1e-12)
and then symmetrized exactly, so evaluation satisfies
K(p, q) = conj(K(q, p)) to rounding.

Explicit storage is truncated at ``j_max``; an optional :class:`Tail`
extends the tensor with a closed-form scalar block c_j * I beyond the
truncation.  Evaluation never extends past ``j_max`` unless the caller
passes ``tail_degree`` explicitly; :meth:`Tail.sup_bound` reports the
size of what a finite extension leaves out.
"""

import json
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import DivergenceError, DomainError, KernelSpecError, KernelStructureError
from .geometry import dot_matrix, points_theta_phi
from .harmonics import FOUR_PI, degree_order, flat_index, harmonic_matrix

VARIANTS = ("full", "block_diagonal", "axially_symmetric", "isotropic", "diagonal")
PARITIES = ("both", "even", "odd")

_HERMITIAN_RTOL = 1e-12


def _lambda(j):
    return float(j * (j + 1))


def _parity_ok(parity, j):
    if parity == "both":
        return True
    return (j % 2 == 0) == (parity == "even")


# ---------------------------------------------------------------------------
# tails


@dataclass(frozen=True)
class Tail:
    """Closed-form scalar generator for degrees beyond ``j_max``.

    ``value(j)`` is amplitude * (1+j)^(-exponent) (power law) or
    amplitude * ratio^j (geometric), zeroed on degrees outside the
    declared parity, times an optional heat damping exp(-damping*j*(j+1))
    accumulated by :func:`heat_smooth`.  The generated degree-j block is
    value(j) times the identity.

    The power law requires exponent > 1 and the geometric ratio must lie
    in (0, 1), so the squared coefficient sum is always finite.
    """

    family: str
    amplitude: float
    shape: float  # exponent (powerlaw) or ratio (geometric)
    parity: str = "both"
    damping: float = 0.0

    def __post_init__(self):
        if self.family not in ("powerlaw", "geometric"):
            raise KernelSpecError("tail.family", f"unknown family {self.family!r}")
        if self.parity not in PARITIES:
            raise KernelSpecError("tail.parity", f"must be one of {PARITIES}")
        if self.family == "powerlaw" and not self.shape > 1.0:
            raise KernelSpecError(
                "tail.exponent", "power-law exponent must exceed 1 for summability"
            )
        if self.family == "geometric" and not 0.0 < self.shape < 1.0:
            raise KernelSpecError("tail.ratio", "geometric ratio must lie in (0, 1)")
        if self.damping < 0.0:
            raise KernelSpecError("tail.damping", "damping must be nonnegative")

    # -- pointwise values ---------------------------------------------------

    def value(self, j):
        if not _parity_ok(self.parity, j):
            return 0.0
        if self.family == "powerlaw":
            base = (1.0 + j) ** (-self.shape)
        else:
            base = self.shape**j
        if self.damping:
            base *= math.exp(-self.damping * _lambda(j))
        return self.amplitude * base

    def block(self, j):
        return self.value(j) * np.eye(2 * j + 1, dtype=complex)

    # -- declared structure used by certification ---------------------------

    @property
    def is_zero(self):
        return self.amplitude == 0.0

    @property
    def strictly_positive(self):
        """Every generated block is positive definite."""
        return self.amplitude > 0.0

    def damped(self, extra):
        return replace(self, damping=self.damping + extra)

    def scaled(self, alpha):
        return replace(self, amplitude=self.amplitude * alpha)

    # -- series sums ---------------------------------------------------------

    def _series(self, j_start, term):
        """Sum term(j, value(j)) over parity-matching degrees j >= j_start."""
        total = 0.0
        quiet = 0
        for j in range(j_start, j_start + 2_000_000):
            if not _parity_ok(self.parity, j):
                continue
            t = term(j, self.value(j))
            total += t
            if abs(t) < 1e-17 * (abs(total) + 1e-300):
                quiet += 1
                if quiet >= 8:
                    return total
            else:
                quiet = 0
        raise DivergenceError(  # pragma: no cover - guarded by symbolic checks
            "tail series did not settle within the iteration budget"
        )

    def squared_sum(self, j_start, r=0.0):
        """Sum over tail degrees of (2j+1) * (1 + 2*j*(j+1))^r * value(j)^2.

        This is the tail's contribution to the squared Sobolev norm of
        order ``r``; raises :class:`DivergenceError` when the power-law
        envelope is not summable at this order.
        """
        if self.is_zero:
            return 0.0
        if (
            self.family == "powerlaw"
            and self.damping == 0.0
            and 2.0 * self.shape - 2.0 * r - 1.0 <= 1.0
        ):
            raise DivergenceError(
                f"power-law tail with exponent {self.shape} is not square-"
                f"summable against smoothness weight r={r}"
            )
        return self._series(
            j_start, lambda j, v: (2 * j + 1) * (1.0 + 2.0 * _lambda(j)) ** r * v * v
        )

    def heat_defect_sum(self, j_start, n):
        """Tail part of sum (1 - exp(-2*lambda_j/n))^2 (2j+1) value(j)^2."""
        if self.is_zero:
            return 0.0
        return self._series(
            j_start,
            lambda j, v: (1.0 - math.exp(-2.0 * _lambda(j) / n)) ** 2
            * (2 * j + 1)
            * v
            * v,
        )

    def sup_bound(self, j_start):
        """Uniform bound on the omitted kernel values,
        sum (2j+1)/(4*pi) * |value(j)| over tail degrees; may be inf."""
        if self.is_zero:
            return 0.0
        if self.family == "powerlaw" and self.damping == 0.0 and self.shape <= 2.0:
            return math.inf
        return self._series(j_start, lambda j, v: (2 * j + 1) / FOUR_PI * abs(v))

    # -- serialization --------------------------------------------------------

    def to_dict(self):
        params = {"amplitude": self.amplitude}
        params["exponent" if self.family == "powerlaw" else "ratio"] = self.shape
        if self.damping:
            params["damping"] = self.damping
        return {"family": self.family, "params": params, "parity": self.parity}

    @classmethod
    def from_dict(cls, d):
        family = d.get("family")
        params = d.get("params")
        if not isinstance(params, dict):
            raise KernelSpecError("tail.params", "must be an object")
        if "amplitude" not in params:
            raise KernelSpecError("tail.params.amplitude", "missing")
        shape_key = "exponent" if family == "powerlaw" else "ratio"
        if shape_key not in params:
            raise KernelSpecError(f"tail.params.{shape_key}", "missing")
        return cls(
            family=family,
            amplitude=float(params["amplitude"]),
            shape=float(params[shape_key]),
            parity=d.get("parity", "both"),
            damping=float(params.get("damping", 0.0)),
        )


class BlockGeneratorTail:
    """In-code tail producing an arbitrary Hermitian block per degree.

    Unlike the scalar :class:`Tail` families this form cannot be
    serialized, and its positivity cannot be inferred, so the caller
    declares ``strictly_positive`` (and implicitly PSD-ness).  Mainly
    useful to represent kernels whose strictness is genuinely open.
    """

    def __init__(self, block_fn, parity, strictly_positive):
        if parity not in PARITIES:
            raise DomainError(f"parity must be one of {PARITIES}")
        self._block_fn = block_fn
        self.parity = parity
        self.strictly_positive = bool(strictly_positive)
        self.is_zero = False
        self.damping = 0.0

    def block(self, j):
        if not _parity_ok(self.parity, j):
            return np.zeros((2 * j + 1, 2 * j + 1), dtype=complex)
        return np.asarray(self._block_fn(j), dtype=complex)

    def value(self, j):
        raise KernelStructureError("block-generator tails have no scalar value")

    def squared_sum(self, j_start, r=0.0):
        raise DivergenceError(
            "block-generator tails declare no summable envelope; "
            "Sobolev norms are unavailable"
        )

    def to_dict(self):
        raise KernelSpecError("tail", "block-generator tails are not serializable")


# ---------------------------------------------------------------------------
# construction helpers


def _as_hermitian(mat, what, scale):
    mat = np.asarray(mat, dtype=complex)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise KernelStructureError(f"{what}: expected a square matrix")
    defect = float(np.max(np.abs(mat - mat.conj().T))) if mat.size else 0.0
    if defect > _HERMITIAN_RTOL * max(scale, 1e-300):
        raise KernelStructureError(
            f"{what}: Hermitian defect {defect:.3e} exceeds relative "
            f"tolerance {_HERMITIAN_RTOL}"
        )
    out = 0.5 * (mat + mat.conj().T)
    out.setflags(write=False)
    return out


def _as_real_vector(vec, what):
    arr = np.asarray(vec)
    if np.iscomplexobj(arr):
        scale = float(np.max(np.abs(arr))) if arr.size else 0.0
        if arr.size and float(np.max(np.abs(arr.imag))) > _HERMITIAN_RTOL * max(
            scale, 1e-300
        ):
            raise KernelStructureError(f"{what}: entries must be real")
        arr = arr.real
    arr = np.asarray(arr, dtype=float)
    arr.setflags(write=False)
    return arr


class CoefficientTensor:
    """Expansion coefficients of a Hermitian kernel, in one of the five
    structural variants (see the module docstring).

    Use the classmethod constructors; instances are immutable.
    """

    __slots__ = ("variant", "j_max", "l_max", "c", "rows", "blocks", "orders",
                 "a", "tail")

    def __init__(self, variant, j_max, *, c=None, rows=None, blocks=None,
                 orders=None, a=None, l_max=None, tail=None):
        if variant not in VARIANTS:
            raise KernelStructureError(f"unknown variant {variant!r}")
        if j_max < 0:
            raise KernelStructureError("j_max must be nonnegative")
        object.__setattr__(self, "variant", variant)
        object.__setattr__(self, "j_max", int(j_max))
        object.__setattr__(self, "tail", tail)
        object.__setattr__(self, "c", None)
        object.__setattr__(self, "rows", None)
        object.__setattr__(self, "blocks", None)
        object.__setattr__(self, "orders", None)
        object.__setattr__(self, "a", None)
        default_l = (self.j_max + 1) ** 2

        if variant == "isotropic":
            arr = _as_real_vector(c, "isotropic coefficients")
            if arr.shape != (self.j_max + 1,):
                raise KernelStructureError(
                    f"isotropic coefficients: expected {self.j_max + 1} values"
                )
            object.__setattr__(self, "c", arr)
        elif variant == "diagonal":
            if len(rows) != self.j_max + 1:
                raise KernelStructureError(
                    f"diagonal rows: expected {self.j_max + 1} degrees"
                )
            clean = []
            for j, row in enumerate(rows):
                arr = _as_real_vector(row, f"diagonal row j={j}")
                if arr.shape != (2 * j + 1,):
                    raise KernelStructureError(
                        f"diagonal row j={j}: expected {2 * j + 1} values"
                    )
                clean.append(arr)
            object.__setattr__(self, "rows", tuple(clean))
        elif variant == "block_diagonal":
            if len(blocks) != self.j_max + 1:
                raise KernelStructureError(
                    f"blocks: expected {self.j_max + 1} degrees"
                )
            mats = [np.asarray(b, dtype=complex) for b in blocks]
            scale = max((float(np.max(np.abs(b))) for b in mats if b.size), default=0.0)
            clean = []
            for j, b in enumerate(mats):
                if b.shape != (2 * j + 1, 2 * j + 1):
                    raise KernelStructureError(
                        f"block j={j}: expected shape {(2 * j + 1, 2 * j + 1)}"
                    )
                clean.append(_as_hermitian(b, f"block j={j}", scale))
            object.__setattr__(self, "blocks", tuple(clean))
        elif variant == "axially_symmetric":
            if not orders:
                raise KernelStructureError("axially symmetric tensor needs orders")
            mats = {int(k): np.asarray(m, dtype=complex) for k, m in orders.items()}
            scale = max(
                (float(np.max(np.abs(m))) for m in mats.values() if m.size), default=0.0
            )
            clean = {}
            for k in range(-self.j_max, self.j_max + 1):
                size = self.j_max + 1 - abs(k)
                m = mats.pop(k, None)
                if m is None:
                    m = np.zeros((size, size), dtype=complex)
                if m.shape != (size, size):
                    raise KernelStructureError(
                        f"order k={k}: expected shape {(size, size)}"
                    )
                clean[k] = _as_hermitian(m, f"order k={k}", scale)
            if mats:
                raise KernelStructureError(
                    f"orders contain |k| > j_max: {sorted(mats)}"
                )
            object.__setattr__(self, "orders", clean)
        elif variant == "full":
            mat = np.asarray(a, dtype=complex)
            if mat.ndim != 2 or mat.shape[0] != mat.shape[1] or mat.shape[0] < 1:
                raise KernelStructureError("full tensor: expected a square matrix")
            if l_max is None:
                l_max = mat.shape[0]
            if l_max != mat.shape[0]:
                raise KernelStructureError("full tensor: l_max does not match matrix")
            scale = float(np.max(np.abs(mat)))
            object.__setattr__(self, "a", _as_hermitian(mat, "full tensor", scale))
            object.__setattr__(self, "j_max", degree_order(l_max)[0])
            default_l = l_max

        object.__setattr__(self, "l_max", default_l)

    def __setattr__(self, name, value):
        raise AttributeError("CoefficientTensor is immutable")

    # -- constructors ---------------------------------------------------------

    @classmethod
    def isotropic(cls, c, tail=None):
        c = np.atleast_1d(np.asarray(c))
        return cls("isotropic", len(c) - 1, c=c, tail=tail)

    @classmethod
    def diagonal(cls, rows, tail=None):
        return cls("diagonal", len(rows) - 1, rows=rows, tail=tail)

    @classmethod
    def block_diagonal(cls, blocks, tail=None):
        return cls("block_diagonal", len(blocks) - 1, blocks=blocks, tail=tail)

    @classmethod
    def axially_symmetric(cls, orders, j_max, tail=None):
        return cls("axially_symmetric", j_max, orders=orders, tail=tail)

    @classmethod
    def full(cls, a, tail=None):
        a = np.asarray(a, dtype=complex)
        return cls("full", 0, a=a, l_max=a.shape[0], tail=tail)

    # -- structure ------------------------------------------------------------

    def degree_block(self, j, include_tail=True):
        """The (2j+1)x(2j+1) Hermitian coefficient matrix of degree j."""
        if j < 0:
            raise DomainError(f"degree must be nonnegative, got {j}")
        if j > self.j_max:
            if self.tail is not None and include_tail:
                return self.tail.block(j)
            raise DomainError(
                f"degree {j} exceeds the explicit range j_max={self.j_max} "
                "and the tensor declares no tail"
            )
        n = 2 * j + 1
        if self.variant == "isotropic":
            return self.c[j] * np.eye(n, dtype=complex)
        if self.variant == "diagonal":
            return np.diag(self.rows[j].astype(complex))
        if self.variant == "block_diagonal":
            return self.blocks[j].copy()
        if self.variant == "axially_symmetric":
            diag = [self.orders[k][j - abs(k), j - abs(k)] for k in range(-j, j + 1)]
            return np.diag(np.asarray(diag, dtype=complex))
        lo, hi = j * j, (j + 1) * (j + 1)
        out = np.zeros((n, n), dtype=complex)
        hi_c = min(hi, self.l_max)
        if hi_c > lo:
            out[: hi_c - lo, : hi_c - lo] = self.a[lo:hi_c, lo:hi_c]
        return out

    def has_degree_couplings(self):
        """True when some stored entry couples two different degrees."""
        return laplace_symmetry_defect(self) != 0.0

    def max_abs_entry(self):
        if self.variant == "isotropic":
            return float(np.max(np.abs(self.c))) if self.c.size else 0.0
        if self.variant == "diagonal":
            return max((float(np.max(np.abs(r))) for r in self.rows if r.size), default=0.0)
        if self.variant == "block_diagonal":
            return max((float(np.max(np.abs(b))) for b in self.blocks), default=0.0)
        if self.variant == "axially_symmetric":
            return max(
                (float(np.max(np.abs(m))) for m in self.orders.values() if m.size),
                default=0.0,
            )
        return float(np.max(np.abs(self.a)))

    def scaled(self, alpha):
        """The tensor alpha * T for real alpha."""
        alpha = float(alpha)
        if self.tail is not None and not isinstance(self.tail, Tail):
            raise KernelStructureError("cannot scale a block-generator tail")
        tail = None if self.tail is None else self.tail.scaled(alpha)
        if self.variant == "isotropic":
            return CoefficientTensor.isotropic(alpha * self.c, tail=tail)
        if self.variant == "diagonal":
            return CoefficientTensor.diagonal([alpha * r for r in self.rows], tail=tail)
        if self.variant == "block_diagonal":
            return CoefficientTensor.block_diagonal(
                [alpha * b for b in self.blocks], tail=tail
            )
        if self.variant == "axially_symmetric":
            return CoefficientTensor.axially_symmetric(
                {k: alpha * m for k, m in self.orders.items()}, self.j_max, tail=tail
            )
        return CoefficientTensor.full(alpha * self.a, tail=tail)

    def __eq__(self, other):
        if not isinstance(other, CoefficientTensor):
            return NotImplemented
        if self.variant != other.variant or self.j_max != other.j_max:
            return False
        if self.tail != other.tail:
            return False
        if self.variant == "isotropic":
            return np.array_equal(self.c, other.c)
        if self.variant == "diagonal":
            return all(np.array_equal(a, b) for a, b in zip(self.rows, other.rows))
        if self.variant == "block_diagonal":
            return all(np.array_equal(a, b) for a, b in zip(self.blocks, other.blocks))
        if self.variant == "axially_symmetric":
            return all(
                np.array_equal(self.orders[k], other.orders[k]) for k in self.orders
            )
        return self.l_max == other.l_max and np.array_equal(self.a, other.a)

    __hash__ = None

    def __repr__(self):
        tail = "" if self.tail is None else ", tail=..."
        return f"CoefficientTensor({self.variant!r}, j_max={self.j_max}{tail})"


# ---------------------------------------------------------------------------
# evaluation


def _zonal_weights(tensor, tail_degree, explicit=True):
    """Per-degree weights w_j = block-scalar * (2j+1)/(4*pi) for the
    addition-theorem fast path.  ``explicit`` includes the stored
    isotropic coefficients; the tail part covers (j_max, tail_degree]."""
    jt = tensor.j_max if tail_degree is None else max(tensor.j_max, tail_degree)
    w = np.zeros(jt + 1)
    if explicit:
        w[: tensor.j_max + 1] = tensor.c
    if tail_degree is not None and isinstance(tensor.tail, Tail):
        for j in range(tensor.j_max + 1, jt + 1):
            w[j] = tensor.tail.value(j)
    return w * (2 * np.arange(jt + 1) + 1) / FOUR_PI


def _legendre_series(weights, x):
    """sum_j weights[j] * P_j(x), one recurrence pass, x any array."""
    x = np.asarray(x, dtype=float)
    total = np.full_like(x, weights[0])
    if len(weights) == 1:
        return total
    p_prev = np.ones_like(x)
    p = x.copy()
    total = total + weights[1] * p
    for l in range(1, len(weights) - 1):
        p_prev, p = p, ((2 * l + 1) * x * p - l * p_prev) / (l + 1)
        total = total + weights[l + 1] * p
    return total


def _degree_rows(j):
    lo, hi = j * j, (j + 1) * (j + 1)
    return slice(lo, hi)


def _order_rows(k, j_max):
    return [flat_index(j, k) - 1 for j in range(abs(k), j_max + 1)]


def kernel_matrix(tensor, points, cols=None, tail_degree=None):
    """Matrix of kernel values K(p, q) over ``points x (cols or points)``.

    Evaluation is truncated at the tensor's explicit range; pass
    ``tail_degree`` to extend a tailed tensor up to that degree.
    """
    same = cols is None
    rows_pts = list(points)
    cols_pts = rows_pts if same else list(cols)
    if tail_degree is not None and tensor.tail is None:
        raise DomainError("tail_degree given but the tensor declares no tail")

    jm = tensor.j_max
    if tensor.variant == "isotropic":
        dots = dot_matrix(rows_pts, cols_pts if not same else None)
        out = _legendre_series(_zonal_weights(tensor, None), dots).astype(complex)
    else:
        yr = harmonic_matrix(jm, rows_pts)
        yc = yr if same else harmonic_matrix(jm, cols_pts)
        if tensor.variant == "full":
            a = np.zeros(((jm + 1) ** 2, (jm + 1) ** 2), dtype=complex)
            a[: tensor.l_max, : tensor.l_max] = tensor.a
            out = yr.T @ a @ np.conj(yc)
        elif tensor.variant == "block_diagonal":
            out = np.zeros((len(rows_pts), len(cols_pts)), dtype=complex)
            for j in range(jm + 1):
                rows = _degree_rows(j)
                out += yr[rows].T @ tensor.blocks[j] @ np.conj(yc[rows])
        elif tensor.variant == "diagonal":
            out = np.zeros((len(rows_pts), len(cols_pts)), dtype=complex)
            for j in range(jm + 1):
                rows = _degree_rows(j)
                out += (yr[rows].T * tensor.rows[j]) @ np.conj(yc[rows])
        else:  # axially_symmetric
            out = np.zeros((len(rows_pts), len(cols_pts)), dtype=complex)
            for k in range(-jm, jm + 1):
                rows = _order_rows(k, jm)
                out += yr[rows].T @ tensor.orders[k] @ np.conj(yc[rows])

    if tail_degree is not None and tail_degree > jm:
        if isinstance(tensor.tail, Tail):
            dots = dot_matrix(rows_pts, cols_pts if not same else None)
            weights = _zonal_weights(tensor, tail_degree, explicit=False)
            out += _legendre_series(weights, dots)
        else:
            yr2 = harmonic_matrix(tail_degree, rows_pts)
            yc2 = yr2 if same else harmonic_matrix(tail_degree, cols_pts)
            for j in range(jm + 1, tail_degree + 1):
                rows = _degree_rows(j)
                out += yr2[rows].T @ tensor.tail.block(j) @ np.conj(yc2[rows])
    return out


def eval_kernel(tensor, p, q, tail_degree=None):
    """K(p, q) for the (truncated) expansion; K(p, q) = conj(K(q, p))."""
    return complex(kernel_matrix(tensor, [p], [q], tail_degree=tail_degree)[0, 0])


def coefficient_contraction(tensor, y):
    """sum over stored entries of y_l * a_{l,l'} * conj(y_{l'}).

    ``y`` is indexed by the flat harmonic index (0-based l-1) and may be
    shorter or longer than the tensor's range; missing entries count as
    zero.  This is the coefficient-space quadratic form of the kernel.
    """
    y = np.asarray(y, dtype=complex)
    full_len = (tensor.j_max + 1) ** 2
    if len(y) < full_len:
        y = np.concatenate([y, np.zeros(full_len - len(y), dtype=complex)])
    if tensor.variant == "full":
        yv = y[: tensor.l_max]
        return complex(yv @ (tensor.a @ np.conj(yv)))
    if tensor.variant == "axially_symmetric":
        total = 0.0 + 0.0j
        for k in range(-tensor.j_max, tensor.j_max + 1):
            yk = y[_order_rows(k, tensor.j_max)]
            total += yk @ (tensor.orders[k] @ np.conj(yk))
        return complex(total)
    total = 0.0 + 0.0j
    for j in range(tensor.j_max + 1):
        yj = y[_degree_rows(j)]
        total += yj @ (tensor.degree_block(j, include_tail=False) @ np.conj(yj))
    return complex(total)


# ---------------------------------------------------------------------------
# norms, smoothing, symmetry diagnostics


def _entry_weight_sum(tensor, weight):
    """sum weight(lambda_j, lambda_j') * |entry|^2 over stored entries."""
    total = 0.0
    if tensor.variant == "isotropic":
        for j, cj in enumerate(tensor.c):
            total += (2 * j + 1) * weight(_lambda(j), _lambda(j)) * cj * cj
    elif tensor.variant == "diagonal":
        for j, row in enumerate(tensor.rows):
            total += weight(_lambda(j), _lambda(j)) * float(np.sum(row * row))
    elif tensor.variant == "block_diagonal":
        for j, block in enumerate(tensor.blocks):
            total += weight(_lambda(j), _lambda(j)) * float(
                np.sum(np.abs(block) ** 2)
            )
    elif tensor.variant == "axially_symmetric":
        jm = tensor.j_max
        for k, mat in tensor.orders.items():
            degs = np.arange(abs(k), jm + 1, dtype=float)
            lam = degs * (degs + 1)
            w = weight(lam[:, None], lam[None, :])
            total += float(np.sum(w * np.abs(mat) ** 2))
    else:
        lam = np.array([_lambda(degree_order(l + 1)[0]) for l in range(tensor.l_max)])
        w = weight(lam[:, None], lam[None, :])
        total += float(np.sum(w * np.abs(tensor.a) ** 2))
    return total


def sobolev_norm(tensor, r):
    """Smoothness norm (sum (1 + lambda + lambda')^r |a|^2)^(1/2),
    tail included; raises :class:`DivergenceError` when the tail is not
    summable at this order."""
    total = _entry_weight_sum(tensor, lambda l1, l2: (1.0 + l1 + l2) ** r)
    if tensor.tail is not None:
        total += tensor.tail.squared_sum(tensor.j_max + 1, r)
    return math.sqrt(total)


def heat_smooth(tensor, n):
    """Damp entries by exp(-(lambda_j + lambda_j')/n); structure preserved.

    A degree-j diagonal block is scaled by exp(-2*j*(j+1)/n); a declared
    tail accumulates the damping in closed form.
    """
    if not n > 0:
        raise DomainError(f"smoothing parameter must be positive, got {n}")
    tail = tensor.tail
    if tail is not None:
        tail = tail.damped(2.0 / n)

    def deg_factor(j):
        return math.exp(-2.0 * _lambda(j) / n)

    if tensor.variant == "isotropic":
        c = np.array([cj * deg_factor(j) for j, cj in enumerate(tensor.c)])
        return CoefficientTensor.isotropic(c, tail=tail)
    if tensor.variant == "diagonal":
        rows = [row * deg_factor(j) for j, row in enumerate(tensor.rows)]
        return CoefficientTensor.diagonal(rows, tail=tail)
    if tensor.variant == "block_diagonal":
        blocks = [b * deg_factor(j) for j, b in enumerate(tensor.blocks)]
        return CoefficientTensor.block_diagonal(blocks, tail=tail)
    if tensor.variant == "axially_symmetric":
        jm = tensor.j_max
        orders = {}
        for k, mat in tensor.orders.items():
            degs = np.arange(abs(k), jm + 1, dtype=float)
            f = np.exp(-degs * (degs + 1) / n)
            orders[k] = mat * f[:, None] * f[None, :]
        return CoefficientTensor.axially_symmetric(orders, jm, tail=tail)
    lam = np.array([_lambda(degree_order(l + 1)[0]) for l in range(tensor.l_max)])
    f = np.exp(-lam / n)
    return CoefficientTensor.full(tensor.a * f[:, None] * f[None, :], tail=tail)


def heat_l2_defect_sq(tensor, n):
    """Closed-form squared L2 distance between the tensor and its
    heat-smoothed version: sum (1 - exp(-(lambda+lambda')/n))^2 |a|^2."""
    if not n > 0:
        raise DomainError(f"smoothing parameter must be positive, got {n}")
    total = _entry_weight_sum(
        tensor, lambda l1, l2: (1.0 - np.exp(-(l1 + l2) / n)) ** 2
    )
    if tensor.tail is not None:
        total += tensor.tail.heat_defect_sum(tensor.j_max + 1, n)
    return total


def laplace_symmetry_defect(tensor):
    """Largest |lambda_j - lambda_j'| * |entry| over stored entries,
    normalized by the largest |entry|; zero exactly when no entry couples
    two different degrees (the block-diagonal characterization)."""
    if tensor.variant in ("isotropic", "diagonal", "block_diagonal"):
        return 0.0
    scale = tensor.max_abs_entry()
    if scale == 0.0:
        return 0.0
    worst = 0.0
    if tensor.variant == "axially_symmetric":
        jm = tensor.j_max
        for k, mat in tensor.orders.items():
            degs = np.arange(abs(k), jm + 1, dtype=float)
            lam = degs * (degs + 1)
            gap = np.abs(lam[:, None] - lam[None, :])
            worst = max(worst, float(np.max(gap * np.abs(mat))))
    else:
        lam = np.array([_lambda(degree_order(l + 1)[0]) for l in range(tensor.l_max)])
        gap = np.abs(lam[:, None] - lam[None, :])
        worst = float(np.max(gap * np.abs(tensor.a)))
    return worst / scale


def laplacian_mismatch(tensor, p, q):
    """Difference of the termwise Laplace-Beltrami application in the
    first versus the second argument at one point pair (test utility;
    zero for degree-diagonal tensors)."""
    if tensor.variant in ("isotropic", "diagonal", "block_diagonal"):
        return 0.0 + 0.0j
    jm = tensor.j_max
    yp = harmonic_matrix(jm, [p])[:, 0]
    yq = harmonic_matrix(jm, [q])[:, 0]
    lam = np.array([_lambda(degree_order(l + 1)[0]) for l in range((jm + 1) ** 2)])
    if tensor.variant == "full":
        a = np.zeros(((jm + 1) ** 2, (jm + 1) ** 2), dtype=complex)
        a[: tensor.l_max, : tensor.l_max] = tensor.a
        slot1 = (lam * yp) @ (a @ np.conj(yq))
        slot2 = yp @ (a @ (lam * np.conj(yq)))
        return complex(slot1 - slot2)
    total = 0.0 + 0.0j
    for k in range(-jm, jm + 1):
        rows = _order_rows(k, jm)
        ypk, yqk, lamk = yp[rows], yq[rows], lam[rows]
        mat = tensor.orders[k]
        total += (lamk * ypk) @ (mat @ np.conj(yqk)) - ypk @ (mat @ (lamk * np.conj(yqk)))
    return complex(total)


# ---------------------------------------------------------------------------
# band-limited functions


class BandLimitedFunction:
    """A function with finitely many harmonic coefficients,
    g = sum_l coeffs[l-1] * Y_(l) over the flat index."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        arr = np.atleast_1d(np.asarray(coeffs, dtype=complex))
        if arr.ndim != 1 or arr.size < 1:
            raise DomainError("coefficients must form a nonempty vector")
        arr.setflags(write=False)
        object.__setattr__(self, "coeffs", arr)

    def __setattr__(self, name, value):
        raise AttributeError("BandLimitedFunction is immutable")

    @classmethod
    def from_degree_coeffs(cls, entries):
        """Build from a mapping {(j, k): coefficient}."""
        top = max(flat_index(j, k) for j, k in entries)
        arr = np.zeros(top, dtype=complex)
        for (j, k), v in entries.items():
            arr[flat_index(j, k) - 1] = v
        return cls(arr)

    @property
    def degree(self):
        return degree_order(len(self.coeffs))[0]

    @property
    def l2_norm_sq(self):
        """Squared L2 norm, equal to sum |coeffs|^2 by the Parseval identity."""
        return float(np.sum(np.abs(self.coeffs) ** 2))

    def evaluate(self, theta, phi):
        y = harmonic_matrix(self.degree, (theta, phi))
        return self.coeffs @ y[: len(self.coeffs)]

    def __call__(self, p):
        return complex(self.evaluate([p.theta], [p.phi])[0])


# ---------------------------------------------------------------------------
# kernel spec documents


def _c2pair(z):
    return [float(np.real(z)), float(np.imag(z))]


def _pair2c(v, field):
    if not (isinstance(v, (list, tuple)) and len(v) == 2):
        raise KernelSpecError(field, f"expected an [re, im] pair, got {v!r}")
    return complex(float(v[0]), float(v[1]))


def _cmat2json(mat):
    return [[_c2pair(z) for z in row] for row in np.asarray(mat)]


def _json2cmat(rows, field):
    try:
        return np.array(
            [[_pair2c(v, field) for v in row] for row in rows], dtype=complex
        )
    except (TypeError, IndexError) as exc:
        raise KernelSpecError(field, f"malformed complex matrix: {exc}") from exc


def tensor_to_dict(tensor):
    doc = {"variant": tensor.variant, "j_max": tensor.j_max}
    if tensor.variant == "isotropic":
        doc["c"] = [float(v) for v in tensor.c]
    elif tensor.variant == "diagonal":
        doc["diag"] = [[float(v) for v in row] for row in tensor.rows]
    elif tensor.variant == "block_diagonal":
        doc["blocks"] = [_cmat2json(b) for b in tensor.blocks]
    elif tensor.variant == "axially_symmetric":
        doc["orders"] = [
            {"k": k, "c": _cmat2json(tensor.orders[k])}
            for k in range(-tensor.j_max, tensor.j_max + 1)
        ]
    else:
        doc["l_max"] = tensor.l_max
        doc["a"] = _cmat2json(tensor.a)
    if tensor.tail is not None:
        doc["tail"] = tensor.tail.to_dict()
    return doc


def tensor_from_dict(doc):
    if not isinstance(doc, dict):
        raise KernelSpecError("<document>", "expected a JSON object")
    variant = doc.get("variant")
    if variant not in VARIANTS:
        raise KernelSpecError("variant", f"expected one of {VARIANTS}, got {variant!r}")
    if "j_max" not in doc:
        raise KernelSpecError("j_max", "missing")
    try:
        j_max = int(doc["j_max"])
    except (TypeError, ValueError) as exc:
        raise KernelSpecError("j_max", f"not an integer: {doc['j_max']!r}") from exc
    tail = None
    if doc.get("tail") is not None:
        if not isinstance(doc["tail"], dict):
            raise KernelSpecError("tail", "expected an object")
        tail = Tail.from_dict(doc["tail"])

    if variant == "isotropic":
        if "c" not in doc:
            raise KernelSpecError("c", "missing")
        c = np.asarray(doc["c"], dtype=float)
        if c.shape != (j_max + 1,):
            raise KernelSpecError("c", f"expected {j_max + 1} values")
        return CoefficientTensor.isotropic(c, tail=tail)
    if variant == "diagonal":
        if "diag" not in doc:
            raise KernelSpecError("diag", "missing")
        rows = doc["diag"]
        if len(rows) != j_max + 1:
            raise KernelSpecError("diag", f"expected {j_max + 1} rows")
        return CoefficientTensor.diagonal(
            [np.asarray(r, dtype=float) for r in rows], tail=tail
        )
    if variant == "block_diagonal":
        if "blocks" not in doc:
            raise KernelSpecError("blocks", "missing")
        if len(doc["blocks"]) != j_max + 1:
            raise KernelSpecError("blocks", f"expected {j_max + 1} blocks")
        blocks = [_json2cmat(b, f"blocks[{j}]") for j, b in enumerate(doc["blocks"])]
        return CoefficientTensor.block_diagonal(blocks, tail=tail)
    if variant == "axially_symmetric":
        if "orders" not in doc:
            raise KernelSpecError("orders", "missing")
        orders = {}
        for item in doc["orders"]:
            if "k" not in item:
                raise KernelSpecError("orders[].k", "missing")
            k = int(item["k"])
            orders[k] = _json2cmat(item.get("c"), f"orders[k={k}].c")
        return CoefficientTensor.axially_symmetric(orders, j_max, tail=tail)
    if "a" not in doc:
        raise KernelSpecError("a", "missing")
    a = _json2cmat(doc["a"], "a")
    l_max = int(doc.get("l_max", a.shape[0]))
    if l_max != a.shape[0]:
        raise KernelSpecError("l_max", "does not match the coefficient matrix")
    return CoefficientTensor.full(a, tail=tail)


def dumps_kernel_spec(tensor):
    return json.dumps(tensor_to_dict(tensor), indent=2, sort_keys=True) + "\n"


def loads_kernel_spec(text):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise KernelSpecError("<document>", f"invalid JSON: {exc}") from exc
    return tensor_from_dict(doc)


def save_kernel_spec(tensor, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_kernel_spec(tensor))


def load_kernel_spec(path):
    with open(path, "r", encoding="utf-8") as fh:
        return loads_kernel_spec(fh.read())
