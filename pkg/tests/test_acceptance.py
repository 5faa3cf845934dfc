"""Acceptance suite: one test per criterion, one pass/fail line each.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines as
they print; each criterion also enforces its stated runtime budget.
"""

import json
import math
import time

import numpy as np
import pytest

from conftest import random_hermitian, random_psd
from spherekern.certify import Verdict, certify
from spherekern.cli import main as cli_main
from spherekern.errors import SingularGramError
from spherekern.geometry import SpherePoint, random_points
from spherekern.harmonics import (
    HarmonicIndex,
    addition_theorem_gap,
    harmonic_matrix,
    legendre,
    legendre_asymptotic,
    spherical_harmonic,
)
from spherekern.interpolate import InterpolationProblem, fit, gram, write_sites
from spherekern.kernels import (
    CoefficientTensor,
    Tail,
    heat_l2_defect_sq,
    heat_smooth,
    save_kernel_spec,
    sobolev_norm,
)
from spherekern.quadrature import sphere_rule
from spherekern.witness import (
    antipodal_witness,
    band_limited_from_block_vector,
    block_quadratic_form,
    discretize_negative_direction,
    expansion_quadratic_form,
    hemisphere_nullspace_witness,
    quadratic_form,
    quadratic_form_scale,
)

FOUR_PI = 4.0 * math.pi


def report(number, ok, detail, elapsed, budget):
    status = "PASS" if ok and elapsed < budget else "FAIL"
    print(f"[criterion {number}] {status} ({elapsed:.1f}s < {budget}s) {detail}")
    assert ok, f"criterion {number}: {detail}"
    assert elapsed < budget, f"criterion {number}: runtime {elapsed:.1f}s over budget"


def test_criterion_1_harmonics_correctness():
    start = time.time()
    rng = np.random.default_rng(101)
    max_gap = 0.0
    for _ in range(500):
        j = int(rng.integers(0, 51))
        p, q = random_points(2, rng)
        max_gap = max(max_gap, addition_theorem_gap(j, p, q))
    max_parity = 0.0
    for _ in range(300):
        j = int(rng.integers(0, 41))
        k = int(rng.integers(-j, j + 1)) if j else 0
        (p,) = random_points(1, rng)
        y = spherical_harmonic(HarmonicIndex(j, k), p)
        y_anti = spherical_harmonic(HarmonicIndex(j, k), p.antipode())
        max_parity = max(max_parity, abs(y_anti - (-1.0) ** j * y))
    max_display = 0.0
    for _ in range(20):
        theta = float(rng.uniform(0, math.pi))
        phi = float(rng.uniform(0, 2 * math.pi))
        p = SpherePoint(theta, phi)
        s, c = math.sin(theta), math.cos(theta)
        displays = {
            (1, 0): 0.5 * math.sqrt(3 / math.pi) * c,
            (1, 1): -0.5 * math.sqrt(3 / (2 * math.pi)) * s * np.exp(1j * phi),
            (1, -1): 0.5 * math.sqrt(3 / (2 * math.pi)) * s * np.exp(-1j * phi),
        }
        for (j, k), expected in displays.items():
            got = spherical_harmonic(HarmonicIndex(j, k), p)
            max_display = max(max_display, abs(got - expected))
    ok = max_gap < 1e-10 and max_parity < 1e-11 and max_display < 1e-14
    report(
        1,
        ok,
        f"addition gap {max_gap:.2e}, parity {max_parity:.2e}, "
        f"degree-1 displays {max_display:.2e}",
        time.time() - start,
        10.0,
    )


def test_criterion_2_quadrature_orthonormality():
    start = time.time()
    rule = sphere_rule(16)
    weight_err = abs(float(np.sum(rule.weights)) - FOUR_PI)
    y = harmonic_matrix(15, (rule.theta, rule.phi))
    gram_mat = (y * rule.weights) @ y.conj().T
    ortho = float(np.max(np.abs(gram_mat - np.eye(256))))
    ok = ortho < 1e-10 and weight_err < 1e-10
    report(
        2,
        ok,
        f"orthonormality defect {ortho:.2e}, weight sum error {weight_err:.2e}",
        time.time() - start,
        5.0,
    )


def _random_block_tensor(rng, force_indefinite):
    j_max = int(rng.integers(1, 9))
    blocks = []
    for j in range(j_max + 1):
        n = 2 * j + 1
        kind = rng.random()
        if kind < 0.2:
            blocks.append(np.zeros((n, n), dtype=complex))
        elif kind < 0.7 or not force_indefinite:
            blocks.append(random_psd(rng, n))
        else:
            blocks.append(random_hermitian(rng, n))
    if force_indefinite:
        # plant one certainly-indefinite block
        j = int(rng.integers(1, j_max + 1))
        n = 2 * j + 1
        h = random_hermitian(rng, n)
        lo = float(np.linalg.eigvalsh(h)[0])
        blocks[j] = h - (abs(lo) + 0.5) * np.eye(n)
    return CoefficientTensor.block_diagonal(blocks)


def test_criterion_3_block_equivalence_at_desk_scale():
    start = time.time()
    rng = np.random.default_rng(303)
    n_not_pd = n_psd = 0
    for trial in range(100):
        tensor = _random_block_tensor(rng, force_indefinite=trial % 2 == 0)
        cert = certify(tensor, tensor.j_max)
        if cert.verdict is Verdict.NOT_POSITIVE_DEFINITE:
            n_not_pd += 1
            worst = min(
                (b for b in cert.per_block), key=lambda b: b.min_eigenvalue
            )
            block = tensor.degree_block(worst.j)
            eigvals, eigvecs = np.linalg.eigh(block)
            f = band_limited_from_block_vector(worst.j, eigvecs[:, 0])
            assert expansion_quadratic_form(tensor, f) < 0
            w = discretize_negative_direction(tensor, f, m=16)
            assert w.quad_form < 0, f"trial {trial}: no negative discretization"
        else:
            n_psd += 1
            for _ in range(20):
                pts = random_points(int(rng.integers(2, 21)), rng)
                g = gram(tensor, pts)
                scale = max(float(np.max(np.abs(g))), 1e-300)
                min_eig = float(np.linalg.eigvalsh(g)[0])
                assert min_eig >= -1e-9 * scale, f"trial {trial}: {min_eig}"
    ok = n_not_pd > 20 and n_psd > 20
    report(
        3,
        ok,
        f"{n_not_pd} refuted by negative discretization, "
        f"{n_psd} PSD-sampled clean",
        time.time() - start,
        120.0,
    )


def test_criterion_4_necessity_cases():
    start = time.time()
    details = []

    def check(witness, tensor):
        assert np.max(np.abs(witness.coeffs)) > 0
        assert abs(witness.quad_form) <= 1e-8 * witness.scale
        problem = InterpolationProblem(
            witness.points, np.zeros(len(witness.points)), tensor
        )
        with pytest.raises(SingularGramError):
            fit(problem)
        details.append(f"|q|={abs(witness.quad_form):.1e}")

    even_only = CoefficientTensor.isotropic([1.0, 0.0, 0.7, 0.0, 0.4])
    check(antipodal_witness(even_only, 1), even_only)
    odd_only = CoefficientTensor.isotropic([0.0, 1.0, 0.0, 0.6])
    check(antipodal_witness(odd_only, 2), odd_only)
    finitely_even = CoefficientTensor.isotropic([1.0, 0.9, 0.8, 0.7, 0.6])
    check(hemisphere_nullspace_witness(finitely_even, 4, "even"), finitely_even)
    finitely_odd = CoefficientTensor.isotropic([1.0, 0.9, 0.8, 0.7])
    check(hemisphere_nullspace_witness(finitely_odd, 3, "odd"), finitely_odd)
    report(4, True, "cases 1-4: " + ", ".join(details), time.time() - start, 30.0)


def test_criterion_5_strict_sufficiency_route():
    start = time.time()
    tensor = CoefficientTensor.isotropic(
        [(1.0 + j) ** -4 for j in range(11)], tail=Tail("powerlaw", 1.0, 4.0)
    )
    cert = certify(tensor, 30)
    assert cert.verdict is Verdict.STRICTLY_POSITIVE_DEFINITE
    rng = np.random.default_rng(505)
    worst_ratio = math.inf
    for _ in range(50):
        pts = random_points(50, rng)
        eigvals = np.linalg.eigvalsh(gram(tensor, pts))
        assert eigvals[0] > 0
        worst_ratio = min(worst_ratio, float(eigvals[0] / eigvals[-1]))
    pts = random_points(50, rng)
    values = rng.normal(size=50) + 1j * rng.normal(size=50)
    interp = fit(InterpolationProblem(pts, values, tensor))
    bound = 1e-8 * (1.0 + float(np.max(np.abs(values))))
    ok = interp.residual < bound
    report(
        5,
        ok,
        f"verdict {cert.verdict.value}, worst Gram min/max eigen ratio "
        f"{worst_ratio:.2e}, residual {interp.residual:.2e} < {bound:.1e}",
        time.time() - start,
        60.0,
    )


def test_criterion_6_asymptotic_remainder_band():
    start = time.time()
    degrees = (100, 200, 400)
    worst_band = 0.0
    worst_scale = 0.0
    for theta in (0.5, 1.0, 2.0):
        scaled = [
            abs(legendre(j, math.cos(theta)) - legendre_asymptotic(j, theta)) * j**1.5
            for j in degrees
        ]
        worst_band = max(worst_band, max(scaled) / min(scaled))
        worst_scale = max(worst_scale, max(scaled))
    ok = worst_band <= 2.0 and worst_scale < 1.0
    report(
        6,
        ok,
        f"scaled errors within factor {worst_band:.2f} band, max {worst_scale:.3f}",
        time.time() - start,
        5.0,
    )


def test_criterion_7_heat_smoothing():
    start = time.time()
    rng = np.random.default_rng(707)
    blocks = [random_hermitian(rng, 2 * j + 1) for j in range(11)]
    tensor = CoefficientTensor.block_diagonal(blocks)
    norm_sq = sobolev_norm(tensor, 0.0) ** 2
    ladder = [10.0**e for e in range(0, 8)]
    defects = [heat_l2_defect_sq(tensor, n) for n in ladder]
    monotone = all(b < a for a, b in zip(defects, defects[1:]))
    crossing = [n for n, d in zip(ladder, defects) if d < 1e-6 * norm_sq]
    smoothed = heat_smooth(tensor, 37.0)
    structure = smoothed.variant == "block_diagonal" and all(
        np.array_equal(smoothed.blocks[j], blocks_j * math.exp(-2 * j * (j + 1) / 37.0))
        for j, blocks_j in enumerate(tensor.blocks)
    )
    ok = monotone and bool(crossing) and structure
    report(
        7,
        ok,
        f"defect monotone over n ladder, < 1e-6*norm^2 from n={crossing[0]:.0e}, "
        f"block structure preserved exactly",
        time.time() - start,
        5.0,
    )


def test_criterion_8_dual_path_quadratic_form():
    start = time.time()
    rng = np.random.default_rng(808)
    worst = 0.0
    for trial in range(200):
        variant = trial % 4
        if variant == 0:
            tensor = CoefficientTensor.isotropic(rng.uniform(-1, 1, size=5))
        elif variant == 1:
            tensor = CoefficientTensor.block_diagonal(
                [random_hermitian(rng, 2 * j + 1) for j in range(4)]
            )
        elif variant == 2:
            tensor = CoefficientTensor.full(random_hermitian(rng, 16))
        else:
            tensor = CoefficientTensor.axially_symmetric(
                {k: random_hermitian(rng, 4 - abs(k)) for k in range(-3, 4)}, 3
            )
        n = int(rng.integers(1, 12))
        pts = random_points(n, rng)
        coeffs = rng.normal(size=n) + 1j * rng.normal(size=n)
        q1 = quadratic_form(tensor, pts, coeffs)
        q2 = block_quadratic_form(tensor, pts, coeffs)
        scale = max(quadratic_form_scale(tensor, pts, coeffs), 1e-300)
        worst = max(worst, abs(q1 - q2) / scale)
    ok = worst <= 1e-9
    report(
        8,
        ok,
        f"worst pointwise vs coefficient-space relative gap {worst:.2e}",
        time.time() - start,
        30.0,
    )


def test_criterion_9_cli_determinism_and_exit_codes(tmp_path):
    start = time.time()
    rng = np.random.default_rng(909)
    spd = tmp_path / "spd.kspec"
    save_kernel_spec(
        CoefficientTensor.isotropic(
            [(1.0 + j) ** -4 for j in range(11)], tail=Tail("powerlaw", 1.0, 4.0)
        ),
        spd,
    )
    pd_only = tmp_path / "even.kspec"
    save_kernel_spec(CoefficientTensor.isotropic([1.0, 0.0, 0.5]), pd_only)
    not_pd = tmp_path / "indef.kspec"
    save_kernel_spec(
        CoefficientTensor.block_diagonal(
            [np.array([[1.0]]), np.array([[1, 0, 2], [0, 1, 0], [2, 0, 1]], dtype=complex)]
        ),
        not_pd,
    )
    exit_codes = {}
    outputs = {}
    for name, path in (("spd", spd), ("pd_only", pd_only), ("not_pd", not_pd)):
        runs = []
        for attempt in range(2):
            out = tmp_path / f"{name}-{attempt}.jsonl"
            code = cli_main(
                ["certify", str(path), "--format", "machine", "--seed", "1234",
                 "--output", str(out)]
            )
            runs.append(out.read_bytes())
            exit_codes[name] = code
        assert runs[0] == runs[1], f"{name}: machine output not byte-identical"
        outputs[name] = json.loads(runs[0].splitlines()[-1])["verdict"]
    # a witness run is seeded too
    case3 = tmp_path / "case3.kspec"
    save_kernel_spec(CoefficientTensor.isotropic([1.0, 0.8, 0.5, 0.3]), case3)
    w_runs = []
    for attempt in range(2):
        out = tmp_path / f"w{attempt}.jsonl"
        assert cli_main(
            ["witness", str(case3), "--j-hat", "2", "--parity", "even",
             "--seed", "7", "--format", "machine", "--output", str(out)]
        ) == 0
        w_runs.append(out.read_bytes())
    usage = cli_main(["certify", str(tmp_path / "missing.kspec")])
    ok = (
        exit_codes == {"spd": 0, "pd_only": 0, "not_pd": 2}
        and outputs["spd"] == "StrictlyPositiveDefinite"
        and outputs["pd_only"] == "PositiveDefiniteOnly"
        and outputs["not_pd"] == "NotPositiveDefinite"
        and w_runs[0] == w_runs[1]
        and usage == 1
    )
    report(
        9,
        ok,
        f"exit codes {exit_codes}, verdicts {outputs}, usage error 1, "
        "byte-identical reruns",
        time.time() - start,
        60.0,
    )
