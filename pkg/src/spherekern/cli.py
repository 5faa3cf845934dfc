"""Command-line interface.

Subcommands map one-to-one onto library calls: ``certify``, ``witness``,
``gram``, ``fit``, ``eval``, ``harmonics``, ``quadtest``.  Reports are
written either human-readable or as line-delimited JSON records
(``--format machine``); machine output is byte-identical across runs for
identical inputs and seed.

Exit codes: 0 success, 2 when certification reports NotPositiveDefinite
(also from the pre-check embedded in ``fit``), 1 on input or usage
errors.  The default classification tolerance is 1e-10, overridable with
the ``SPHEREKERN_TOL`` environment variable or ``--tol``.
"""

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import interpolate
from .certify import DEFAULT_TOL as _LIB_DEFAULT_TOL
from .certify import Verdict
from .certify import certify as run_certify
from .certify import render_human as render_certificate_human
from .certify import render_machine as render_certificate_machine
from .errors import DomainError
from .geometry import SpherePoint, random_points
from .harmonics import (
    HarmonicIndex,
    addition_theorem_gap,
    harmonic_matrix,
    spherical_harmonic,
)
from .kernels import load_kernel_spec, save_kernel_spec
from .quadrature import gauss_legendre, sphere_rule
from .witness import (
    antipodal_witness,
    hemisphere_nullspace_witness,
    witness_records,
)

#: Environment variable overriding the default classification tolerance.
TOL_ENV_VAR = "SPHEREKERN_TOL"
DEFAULT_TOL = _LIB_DEFAULT_TOL
#: Fixed default seed (never time-based), so runs are reproducible.
DEFAULT_SEED = 1234

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NOT_POSITIVE_DEFINITE = 2


@dataclass(frozen=True)
class CliConfig:
    command: str
    kernel_path: str = None
    points_path: str = None
    values_path: str = None
    j_check: int = None
    tol: float = DEFAULT_TOL
    m: int = 16
    seed: int = DEFAULT_SEED
    output: str = None
    format: str = "human"


def _default_tol():
    raw = os.environ.get(TOL_ENV_VAR)
    if raw is None:
        return DEFAULT_TOL
    try:
        tol = float(raw)
    except ValueError:
        raise DomainError(f"{TOL_ENV_VAR} must be a float, got {raw!r}")
    if tol <= 0:
        raise DomainError(f"{TOL_ENV_VAR} must be positive, got {tol}")
    return tol


def build_parser():
    parser = argparse.ArgumentParser(
        prog="spherekern",
        description="Positive definite kernels on the 2-sphere: "
        "certification, witnesses, interpolation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--tol", type=float, default=None,
                       help=f"classification tolerance (default {DEFAULT_TOL}, "
                            f"or ${TOL_ENV_VAR})")
        p.add_argument("--seed", type=int, default=DEFAULT_SEED,
                       help=f"random seed (fixed default {DEFAULT_SEED})")
        p.add_argument("--output", default=None, help="write report here "
                       "instead of stdout")
        p.add_argument("--format", choices=("human", "machine"),
                       default="human", help="report format")

    p = sub.add_parser("certify", help="classify degree blocks and emit a "
                       "positive-definiteness certificate")
    p.add_argument("kernel", help="kernel spec file")
    p.add_argument("--j-check", type=int, default=None,
                   help="classify blocks up to this degree "
                        "(default: the explicit range, +20 with a tail)")
    p.add_argument("--emit-normalized", metavar="PATH", default=None,
                   help="re-serialize the parsed tensor to PATH")
    common(p)

    p = sub.add_parser("witness", help="construct a degeneracy witness")
    p.add_argument("kernel")
    p.add_argument("--case", type=int, choices=(1, 2), default=None,
                   help="antipodal witness: 1 for even-only, 2 for odd-only "
                        "support")
    p.add_argument("--j-hat", type=int, default=None,
                   help="hemisphere witness: cutoff degree")
    p.add_argument("--parity", choices=("even", "odd"), default=None,
                   help="hemisphere witness: parity whose blocks vanish "
                        "above --j-hat")
    common(p)

    p = sub.add_parser("gram", help="assemble the Gram matrix of a site file")
    p.add_argument("kernel")
    p.add_argument("points", help="site file (theta,phi[,value_re,value_im])")
    common(p)

    p = sub.add_parser("fit", help="solve the interpolation problem")
    p.add_argument("kernel")
    p.add_argument("points")
    p.add_argument("values", nargs="?", default=None,
                   help="site file carrying values (defaults to the points "
                        "file when it has value columns)")
    p.add_argument("--j-check", type=int, default=None,
                   help="degree range of the embedded certification pre-check")
    p.add_argument("--eval-grid", type=int, default=None, metavar="M",
                   help="also evaluate the interpolant on the resolution-M "
                        "quadrature grid")
    common(p)

    p = sub.add_parser("eval", help="fit, then evaluate the interpolant at "
                       "given sites")
    p.add_argument("kernel")
    p.add_argument("points")
    p.add_argument("values", nargs="?", default=None)
    p.add_argument("--at", required=True, metavar="SITES",
                   help="site file of evaluation points")
    common(p)

    p = sub.add_parser("harmonics", help="evaluate one harmonic or run the "
                       "identity self-test")
    p.add_argument("--j", type=int, default=None)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--theta", type=float, default=None)
    p.add_argument("--phi", type=float, default=None)
    p.add_argument("--selftest", action="store_true",
                   help="check the addition theorem and parity identity on "
                        "random samples")
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--j-max", type=int, default=50)
    common(p)

    p = sub.add_parser("quadtest", help="self-test the sphere quadrature rule")
    p.add_argument("--m", type=int, default=16, help="rule resolution")
    p.add_argument("--j-check", type=int, default=None,
                   help="orthonormality degree range (default min(15, m-1))")
    common(p)

    return parser


# ---------------------------------------------------------------------------
# report plumbing


def _fmt_value(v):
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, tuple)):
        return "[" + ",".join(_fmt_value(x) for x in v) + "]"
    if isinstance(v, dict):
        return "{" + ",".join(f"{k}={_fmt_value(v[k])}" for k in sorted(v)) + "}"
    return str(v)


def _render_human(records):
    lines = []
    for rec in records:
        kind = rec.get("type", "record")
        fields = " ".join(
            f"{k}={_fmt_value(v)}" for k, v in sorted(rec.items()) if k != "type"
        )
        lines.append(f"[{kind}] {fields}")
    return "\n".join(lines) + "\n"


def _render_machine(records):
    return "\n".join(
        json.dumps(rec, sort_keys=True, separators=(",", ":")) for rec in records
    ) + "\n"


def _write_report(text, output):
    if output is None:
        sys.stdout.write(text)
    else:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(text)


def _emit(records, config):
    render = _render_machine if config.format == "machine" else _render_human
    _write_report(render(records), config.output)


def _c2(z):
    z = complex(z)
    return [z.real, z.imag]


# ---------------------------------------------------------------------------
# commands


def _certify_tensor(tensor, j_check, tol):
    if j_check is None:
        j_check = tensor.j_max + (20 if tensor.tail is not None else 0)
    return run_certify(tensor, j_check, tol=tol)


def cmd_certify(args, config):
    tensor = load_kernel_spec(args.kernel)
    if args.emit_normalized:
        save_kernel_spec(tensor, args.emit_normalized)
    cert = _certify_tensor(tensor, args.j_check, config.tol)
    if config.format == "machine":
        _write_report(render_certificate_machine(cert), config.output)
    else:
        _write_report(render_certificate_human(cert), config.output)
    if cert.verdict is Verdict.NOT_POSITIVE_DEFINITE:
        return EXIT_NOT_POSITIVE_DEFINITE
    return EXIT_OK


def cmd_witness(args, config):
    tensor = load_kernel_spec(args.kernel)
    hemisphere = args.j_hat is not None or args.parity is not None
    if args.case is not None and hemisphere:
        raise DomainError("--case and --j-hat/--parity are mutually exclusive")
    if args.case is not None:
        w = antipodal_witness(tensor, args.case)
    elif hemisphere:
        if args.j_hat is None or args.parity is None:
            raise DomainError("hemisphere witness needs both --j-hat and --parity")
        w = hemisphere_nullspace_witness(
            tensor, args.j_hat, args.parity, seed=config.seed
        )
    else:
        raise DomainError("choose a witness: --case 1|2 or --j-hat N --parity P")
    _emit(witness_records(w), config)
    return EXIT_OK


def cmd_gram(args, config):
    tensor = load_kernel_spec(args.kernel)
    points, _ = interpolate.read_sites(args.points)
    g = interpolate.gram(tensor, points)
    eigvals = np.linalg.eigvalsh(g)
    records = [
        {
            "type": "gram_row",
            "i": i,
            "re": [float(x) for x in g[i].real],
            "im": [float(x) for x in g[i].imag],
        }
        for i in range(g.shape[0])
    ]
    abs_eigs = np.abs(eigvals)
    records.append(
        {
            "type": "gram",
            "n": int(g.shape[0]),
            "min_eig": float(eigvals[0]),
            "max_eig": float(eigvals[-1]),
            "cond": float(np.max(abs_eigs) / max(np.min(abs_eigs), 1e-300)),
        }
    )
    _emit(records, config)
    return EXIT_OK


def _load_problem(tensor, points_path, values_path):
    points, inline_values = interpolate.read_sites(points_path)
    if values_path is not None:
        vpoints, values = interpolate.read_sites(values_path)
        if values is None:
            raise DomainError(f"{values_path}: no value columns")
        if len(vpoints) != len(points):
            raise DomainError(
                f"{values_path}: {len(vpoints)} records do not match "
                f"{len(points)} sites"
            )
    elif inline_values is not None:
        values = inline_values
    else:
        raise DomainError("no values: give a values file or value columns "
                          "in the points file")
    return interpolate.InterpolationProblem(points, values, tensor)


def _precheck_records(tensor, j_check, tol):
    from .kernels import laplace_symmetry_defect

    if laplace_symmetry_defect(tensor) != 0.0:
        return None, [
            {
                "type": "precheck",
                "skipped": True,
                "reason": "tensor couples different degrees; block "
                "certification does not apply",
            }
        ]
    cert = _certify_tensor(tensor, j_check, tol)
    return cert, [
        {
            "type": "precheck",
            "skipped": False,
            "verdict": cert.verdict.value,
            "justification": cert.justification,
        }
    ]


def cmd_fit(args, config):
    tensor = load_kernel_spec(args.kernel)
    problem = _load_problem(tensor, args.points, args.values)
    cert, records = _precheck_records(tensor, args.j_check, config.tol)
    if cert is not None and cert.verdict is Verdict.NOT_POSITIVE_DEFINITE:
        _emit(records, config)
        return EXIT_NOT_POSITIVE_DEFINITE
    interp = interpolate.fit(problem)
    records.append(
        {
            "type": "fit",
            "n": len(problem.points),
            "min_eig": interp.min_eigenvalue,
            "max_eig": interp.max_eigenvalue,
            "cond": interp.condition,
            "residual": interp.residual,
        }
    )
    s_at_nodes = interpolate.evaluate_many(interp, problem.points)
    for i, (p, c) in enumerate(zip(problem.points, interp.coeffs)):
        records.append(
            {
                "type": "coefficient",
                "i": i,
                "theta": p.theta,
                "phi": p.phi,
                "c": _c2(c),
            }
        )
    for i, (p, v, s) in enumerate(zip(problem.points, problem.values, s_at_nodes)):
        records.append(
            {
                "type": "residual",
                "i": i,
                "value": _c2(v),
                "s": _c2(s),
                "abs_err": float(abs(s - v)),
            }
        )
    if args.eval_grid:
        rule = sphere_rule(args.eval_grid)
        vals = interpolate.evaluate_many(interp, rule.points)
        for p, s in zip(rule.points, vals):
            records.append(
                {"type": "grid_eval", "theta": p.theta, "phi": p.phi, "s": _c2(s)}
            )
    _emit(records, config)
    return EXIT_OK


def cmd_eval(args, config):
    tensor = load_kernel_spec(args.kernel)
    problem = _load_problem(tensor, args.points, args.values)
    cert, records = _precheck_records(tensor, None, config.tol)
    if cert is not None and cert.verdict is Verdict.NOT_POSITIVE_DEFINITE:
        _emit(records, config)
        return EXIT_NOT_POSITIVE_DEFINITE
    interp = interpolate.fit(problem)
    at_points, _ = interpolate.read_sites(args.at)
    vals = interpolate.evaluate_many(interp, at_points)
    for p, s in zip(at_points, vals):
        records.append(
            {"type": "eval", "theta": p.theta, "phi": p.phi, "s": _c2(s)}
        )
    _emit(records, config)
    return EXIT_OK


def cmd_harmonics(args, config):
    if args.selftest:
        rng = np.random.default_rng(config.seed)
        max_gap = 0.0
        max_parity = 0.0
        for _ in range(args.samples):
            j = int(rng.integers(0, args.j_max + 1))
            p, q = random_points(2, rng)
            max_gap = max(max_gap, addition_theorem_gap(j, p, q))
            k = int(rng.integers(-j, j + 1)) if j else 0
            y = spherical_harmonic(HarmonicIndex(j, k), p)
            y_anti = spherical_harmonic(HarmonicIndex(j, k), p.antipode())
            max_parity = max(max_parity, abs(y_anti - (-1.0) ** j * y))
        ok = max_gap < 1e-10 and max_parity < 1e-11
        _emit(
            [
                {
                    "type": "harmonics_selftest",
                    "samples": args.samples,
                    "j_max": args.j_max,
                    "max_addition_gap": max_gap,
                    "max_parity_defect": max_parity,
                    "pass": ok,
                }
            ],
            config,
        )
        return EXIT_OK if ok else EXIT_ERROR
    if None in (args.j, args.k, args.theta, args.phi):
        raise DomainError("harmonics needs --selftest or all of "
                          "--j --k --theta --phi")
    y = spherical_harmonic(HarmonicIndex(args.j, args.k),
                           SpherePoint(args.theta, args.phi))
    _emit(
        [
            {
                "type": "harmonic",
                "j": args.j,
                "k": args.k,
                "theta": args.theta,
                "phi": args.phi,
                "value": _c2(y),
            }
        ],
        config,
    )
    return EXIT_OK


def cmd_quadtest(args, config):
    m = args.m
    if m < 1:
        raise DomainError("--m must be positive")
    j_check = args.j_check if args.j_check is not None else min(15, m - 1)
    if 2 * j_check > 2 * m - 1:
        raise DomainError(
            f"orthonormality up to degree {j_check} needs m > {j_check}"
        )
    rule = sphere_rule(m)
    weight_err = abs(float(np.sum(rule.weights)) - 4.0 * math.pi)
    y = harmonic_matrix(j_check, (rule.theta, rule.phi))
    gram_mat = (y * rule.weights) @ y.conj().T
    ortho_err = float(np.max(np.abs(gram_mat - np.eye(gram_mat.shape[0]))))
    gauss = gauss_legendre(m)
    mono_err = 0.0
    for d in range(2 * m):
        exact = 0.0 if d % 2 else 2.0 / (d + 1)
        mono_err = max(mono_err, abs(float(np.dot(gauss.weights, gauss.nodes**d)) - exact))
    ok = weight_err < 1e-10 and ortho_err < 1e-10 and mono_err < 1e-12
    _emit(
        [
            {
                "type": "quadtest",
                "m": m,
                "j_check": j_check,
                "weight_sum_error": weight_err,
                "max_orthonormality_defect": ortho_err,
                "max_monomial_error": mono_err,
                "pass": ok,
            }
        ],
        config,
    )
    return EXIT_OK if ok else EXIT_ERROR


_COMMANDS = {
    "certify": cmd_certify,
    "witness": cmd_witness,
    "gram": cmd_gram,
    "fit": cmd_fit,
    "eval": cmd_eval,
    "harmonics": cmd_harmonics,
    "quadtest": cmd_quadtest,
}


def build_config(args):
    tol = args.tol if getattr(args, "tol", None) is not None else _default_tol()
    if tol <= 0:
        raise DomainError(f"--tol must be positive, got {tol}")
    return CliConfig(
        command=args.command,
        kernel_path=getattr(args, "kernel", None),
        points_path=getattr(args, "points", None),
        values_path=getattr(args, "values", None),
        j_check=getattr(args, "j_check", None),
        tol=tol,
        m=getattr(args, "m", 16),
        seed=getattr(args, "seed", DEFAULT_SEED),
        output=getattr(args, "output", None),
        format=getattr(args, "format", "human"),
    )


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = build_config(args)
        return _COMMANDS[args.command](args, config)
    except (ValueError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


def entrypoint():
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
