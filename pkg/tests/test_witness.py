import math

import numpy as np
import pytest

from conftest import random_hermitian, random_psd
from spherekern.errors import DomainError, KernelStructureError
from spherekern.geometry import SpherePoint, random_points
from spherekern.harmonics import harmonic_matrix
from spherekern.kernels import (
    BandLimitedFunction,
    CoefficientTensor,
    Tail,
    eval_kernel,
)
from spherekern.witness import (
    Witness,
    WitnessKind,
    antipodal_witness,
    band_limited_from_block_vector,
    block_quadratic_form,
    discretize_negative_direction,
    expansion_quadratic_form,
    hemisphere_nullspace_witness,
    quadratic_form,
    quadratic_form_scale,
    witness_records,
)

FOUR_PI = 4.0 * math.pi


def coupled_negative_tensor():
    """Degree-1 block with eigenvalues {3, -1, 0}."""
    d1 = np.array([[1, 2, 0], [2, 1, 0], [0, 0, 0]], dtype=complex)
    return CoefficientTensor.block_diagonal([np.array([[1.0]]), d1])


class TestQuadraticForm:
    def test_single_point_unit_value(self, rng):
        t = CoefficientTensor.isotropic([FOUR_PI])
        (p,) = random_points(1, rng)
        assert quadratic_form(t, [p], [1.0]) == pytest.approx(1.0, abs=1e-13)

    def test_zero_coefficients(self, rng):
        t = CoefficientTensor.isotropic([1.0, 0.5])
        pts = random_points(3, rng)
        assert quadratic_form(t, pts, np.zeros(3)) == 0.0

    def test_antipodal_cancellation_even_tensor(self):
        t = CoefficientTensor.isotropic([1.0, 0.0, 0.7])
        p = SpherePoint(1.1, 0.4)
        val = quadratic_form(t, [p, p.antipode()], [1.0, -1.0])
        assert abs(val) < 1e-11

    def test_errors(self, rng):
        t = CoefficientTensor.isotropic([1.0])
        pts = random_points(2, rng)
        with pytest.raises(DomainError):
            quadratic_form(t, pts, [1.0])
        with pytest.raises(DomainError):
            quadratic_form(t, [pts[0], pts[0]], [1.0, 1.0])

    def test_dual_path_agreement(self, rng):
        tensors = [
            CoefficientTensor.isotropic(rng.uniform(-1, 1, size=4)),
            CoefficientTensor.block_diagonal(
                [np.array([[1.0]]), random_hermitian(rng, 3), random_hermitian(rng, 5)]
            ),
            CoefficientTensor.diagonal(
                [np.array([0.3]), rng.uniform(-1, 1, size=3)]
            ),
            CoefficientTensor.full(random_hermitian(rng, 9)),
            CoefficientTensor.axially_symmetric(
                {k: random_hermitian(rng, 3 - abs(k)) for k in range(-2, 3)}, 2
            ),
        ]
        for t in tensors:
            for _ in range(10):
                n = int(rng.integers(1, 9))
                pts = random_points(n, rng)
                c = rng.normal(size=n) + 1j * rng.normal(size=n)
                q1 = quadratic_form(t, pts, c)
                q2 = block_quadratic_form(t, pts, c)
                scale = quadratic_form_scale(t, pts, c)
                assert abs(q1 - q2) <= 1e-9 * max(scale, 1e-300)


class TestAntipodalWitness:
    def test_case_one_even_only(self):
        t = CoefficientTensor.isotropic([1.0, 0.0, 0.5])
        w = antipodal_witness(t, 1)
        assert w.kind is WitnessKind.ANTIPODAL_ODD_COEFFS
        assert len(w.points) == 2
        assert np.array_equal(w.coeffs, [1.0, -1.0])
        assert abs(w.quad_form) <= 1e-12 * w.scale + 1e-300
        w.validate(t)

    def test_case_two_odd_only(self):
        t = CoefficientTensor.isotropic([0.0, 1.0, 0.0, 0.5])
        w = antipodal_witness(t, 2)
        assert w.kind is WitnessKind.ANTIPODAL_EVEN_COEFFS
        assert np.array_equal(w.coeffs, [1.0, 1.0])
        assert abs(w.quad_form) <= 1e-12 * w.scale

    def test_non_witness_control(self):
        # case-2 coefficients on an even-only kernel double instead of cancel
        t = CoefficientTensor.isotropic([1.0, 0.0, 0.5])
        p = SpherePoint(0.8, 0.3)
        val = quadratic_form(t, [p, p.antipode()], [1.0, 1.0])
        assert val == pytest.approx(4.0 * eval_kernel(t, p, p).real, rel=1e-10)
        assert val > 0

    def test_preconditions(self):
        mixed = CoefficientTensor.isotropic([1.0, 1.0])
        with pytest.raises(KernelStructureError):
            antipodal_witness(mixed, 1)
        with pytest.raises(KernelStructureError):
            antipodal_witness(mixed, 2)
        even_tailed = CoefficientTensor.isotropic(
            [1.0], tail=Tail("powerlaw", 1.0, 4.0, "even")
        )
        w = antipodal_witness(even_tailed, 1)  # tail parity matches case 1
        assert abs(w.quad_form) <= 1e-12 * w.scale
        with pytest.raises(DomainError):
            antipodal_witness(mixed, 3)

    def test_strict_tensor_yields_positive_form(self):
        t = CoefficientTensor.isotropic(
            [(1.0 + j) ** -4 for j in range(11)], tail=Tail("powerlaw", 1.0, 4.0)
        )
        p = SpherePoint(0.8, 0.3)
        for c in ([1.0, -1.0], [1.0, 1.0]):
            val = quadratic_form(t, [p, p.antipode()], c)
            assert val > 1e-6


class TestHemisphereWitness:
    def test_case_three_seven_points(self):
        # even support up to j_hat = 2 plus arbitrary PSD odd content
        t = CoefficientTensor.isotropic([1.0, 0.8, 0.5, 0.3])
        w = hemisphere_nullspace_witness(t, 2, "even")
        assert w.kind is WitnessKind.HEMISPHERE_NULLSPACE
        assert len(w.points) == 14  # N = 7 lower-hemisphere points, mirrored
        assert np.max(np.abs(w.coeffs)) == pytest.approx(1.0)
        assert abs(w.quad_form) <= 1e-8 * w.scale
        w.validate(t)

    def test_null_residual(self):
        t = CoefficientTensor.isotropic([1.0, 0.8, 0.5, 0.3])
        w = hemisphere_nullspace_witness(t, 2, "even")
        lower = list(w.points[:7])
        c = w.coeffs[:7]
        y = harmonic_matrix(2, lower) @ c
        # rows of even degree (0 and 2) are annihilated
        for idx in (0, 4, 5, 6, 7, 8):
            assert abs(y[idx]) < 1e-9

    def test_case_four_minimal_cutoff(self):
        # no point zeroes all degree-1 harmonics, yet 4 points beat 3 equations
        t = CoefficientTensor.isotropic([1.0, 0.8, 0.5])
        w = hemisphere_nullspace_witness(t, 1, "odd")
        assert len(w.points) == 8
        assert abs(w.quad_form) <= 1e-8 * w.scale
        w.validate(t)

    def test_lower_hemisphere_sampling(self):
        t = CoefficientTensor.isotropic([1.0, 0.8, 0.5, 0.3])
        w = hemisphere_nullspace_witness(t, 2, "even", seed=123)
        half = len(w.points) // 2
        for p in w.points[:half]:
            assert p.xyz[2] < -1e-3
        for p in w.points[half:]:
            assert p.xyz[2] > 1e-3

    def test_deterministic_given_seed(self):
        t = CoefficientTensor.isotropic([1.0, 0.8, 0.5, 0.3])
        w1 = hemisphere_nullspace_witness(t, 2, "even", seed=11)
        w2 = hemisphere_nullspace_witness(t, 2, "even", seed=11)
        assert np.array_equal(w1.coeffs, w2.coeffs)
        assert w1.quad_form == w2.quad_form

    def test_precondition_violations(self):
        t = CoefficientTensor.isotropic([1.0, 0.8, 0.5, 0.3, 0.1])
        with pytest.raises(KernelStructureError):
            hemisphere_nullspace_witness(t, 2, "even")  # c4 != 0
        tailed = CoefficientTensor.isotropic(
            [1.0, 0.5], tail=Tail("powerlaw", 1.0, 4.0, "even")
        )
        with pytest.raises(KernelStructureError):
            hemisphere_nullspace_witness(tailed, 0, "even")
        with pytest.raises(DomainError):
            hemisphere_nullspace_witness(t, 2, "sideways")


class TestNegativeDirection:
    def test_closed_form_matches_eigenvalue(self):
        t = coupled_negative_tensor()
        d1 = t.blocks[1]
        eigvals, eigvecs = np.linalg.eigh(d1)
        assert eigvals[0] == pytest.approx(-1.0)
        f = band_limited_from_block_vector(1, eigvecs[:, 0])
        assert expansion_quadratic_form(t, f) == pytest.approx(-1.0, abs=1e-12)

    def test_discretization_negative_at_low_resolution(self):
        t = coupled_negative_tensor()
        eigvals, eigvecs = np.linalg.eigh(t.blocks[1])
        f = band_limited_from_block_vector(1, eigvecs[:, 0])
        w = discretize_negative_direction(t, f, m=8)
        assert w.kind is WitnessKind.QUADRATURE_DISCRETIZATION
        assert w.quad_form < 0
        assert len(w.points) == 2 * 8 * 8
        w.validate(t)

    def test_psd_tensor_rejects_every_direction(self, rng):
        t = CoefficientTensor.block_diagonal(
            [np.array([[0.5]]), random_psd(rng, 3), random_psd(rng, 5)]
        )
        for _ in range(10):
            coeffs = rng.normal(size=9) + 1j * rng.normal(size=9)
            f = BandLimitedFunction(coeffs)
            assert expansion_quadratic_form(t, f) >= -1e-12
            with pytest.raises(DomainError):
                discretize_negative_direction(t, f, m=8)

    def test_convergence_to_closed_form(self):
        from spherekern.quadrature import sphere_rule

        t = coupled_negative_tensor()
        eigvals, eigvecs = np.linalg.eigh(t.blocks[1])
        f = band_limited_from_block_vector(1, eigvecs[:, 0])
        closed = expansion_quadratic_form(t, f)
        diffs = []
        for m in (8, 16, 32):
            rule = sphere_rule(m)
            c = rule.weights * f.evaluate(rule.theta, rule.phi)
            diffs.append(abs(quadratic_form(t, rule.points, c) - closed))
        # band-limited integrands are integrated exactly here, so the
        # differences sit at rounding level; allow that much slack
        assert all(d < 1e-10 for d in diffs)
        for a, b in zip(diffs, diffs[1:]):
            assert b <= a + 1e-13

    def test_complex_block_direction(self, rng):
        block = random_hermitian(rng, 5)
        t = CoefficientTensor.block_diagonal(
            [np.array([[1.0]]), np.zeros((3, 3)), block]
        )
        eigvals, eigvecs = np.linalg.eigh(block)
        if eigvals[0] >= 0:  # force a negative direction
            block = block - (eigvals[0] + 1.0) * np.eye(5)
            t = CoefficientTensor.block_diagonal(
                [np.array([[1.0]]), np.zeros((3, 3)), block]
            )
            eigvals, eigvecs = np.linalg.eigh(block)
        f = band_limited_from_block_vector(2, eigvecs[:, 0])
        assert expansion_quadratic_form(t, f) == pytest.approx(
            float(eigvals[0]), rel=1e-10
        )
        w = discretize_negative_direction(t, f, m=8)
        assert w.quad_form < 0


class TestWitnessValidation:
    def test_tampered_value_detected(self):
        t = CoefficientTensor.isotropic([1.0, 0.0, 0.5])
        w = antipodal_witness(t, 1)
        bad = Witness(
            points=w.points,
            coeffs=w.coeffs,
            quad_form=w.quad_form + 1.0,
            kind=w.kind,
            scale=w.scale,
        )
        with pytest.raises(DomainError):
            bad.validate(t)

    def test_records_round_trip_fields(self):
        t = CoefficientTensor.isotropic([1.0, 0.0, 0.5])
        w = antipodal_witness(t, 1)
        records = witness_records(w)
        assert len(records) == 3
        assert records[-1]["kind"] == "AntipodalOddCoeffs"
        assert records[-1]["n_points"] == 2
        assert records[0]["theta"] == w.points[0].theta
