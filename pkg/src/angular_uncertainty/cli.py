"""Command-line front end.

Exit status: 0 success, 2 invalid input, 1 internal failure, 3 when ``--check``
finds a bound violation or an optimizer/search mismatch.
"""

from __future__ import annotations

import argparse

import json
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import basis, bounds, constraints, oracle, optimizer
from .errors import InvalidInputError

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_USAGE = 2
EXIT_CHECK_FAILED = 3
DEFAULT_SEED = 20100521

SATURATION_TOL = 1e-10
OPTIMIZER_MATCH_TOL = 1e-4
OPTIMIZER_BOUND_SLACK = 1e-6


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _emit(text: str, output: str | None) -> None:
    if output:
        Path(output).write_text(text, encoding="utf-8", newline="\n")
    else:
        sys.stdout.write(text)


def _json(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def cmd_bound(args) -> tuple[dict, int]:
    omega = bounds.omega_bound(args.l2, args.r).value
    report = {
        "L2": args.l2,
        "R": args.r,
        "heisenberg": bounds.heisenberg_bound().value,
        "omega": omega,
        "w_as_printed": None,
        "w_consistent": None,
        "omega_min": None,
        "feasible": args.l2 == 0 or constraints.is_feasible(args.l2, args.r),
    }
    l = 0.5 * math.sqrt(4 * args.l2 + 1) - 0.5
    if args.r == 0 and abs(l - round(l)) < 1e-12:
        report["eigenstate"] = bounds.pj_bound(int(round(l))).value
    if args.l2 > 0:
        report["w_as_printed"] = bounds.closed_form_W(args.l2, args.r).value
        if report["feasible"]:
            report.update(constraints.w_audit(args.l2, args.r))
    return report, EXIT_OK


def cmd_curve(args) -> tuple[str, int]:
    rows = bounds.curve(args.r, args.lmin, args.lmax, args.steps)
    return bounds.curve_csv(rows), EXIT_OK


def cmd_example(args) -> tuple[dict, int]:
    state = basis.example_state(args.l0, args.l2)
    moments = basis.moments_superposition(state)
    stats = basis.angular_stats(state)
    omega = bounds.omega_bound(stats.L2_mean, stats.R).value
    report = {
        "l0": args.l0,
        "product": moments.product,
        "L2": stats.L2_mean,
        "R": stats.R,
        "omega": omega,
        "saturated": abs(moments.product - omega) <= SATURATION_TOL,
        "expected_product": 1.5 + args.l2 / (args.l0 + 1),
        "state": state.to_json_obj(),
    }
    if args.quadrature:
        report["quadrature_product"] = oracle.quadrature_moments(state).product
    return report, EXIT_OK


def _moment_F(args) -> float:
    if (args.f is None) == (args.r is None):
        raise InvalidInputError("give exactly one of --f or --r")
    return args.f if args.f is not None else args.r + args.l2**2


def cmd_solve(args) -> tuple[dict, int]:
    F = _moment_F(args)
    sol = constraints.solve_probabilities(*args.levels, args.l2, F)
    if sol.feasible and sol.distinct:
        sol = replace(sol, multipliers=constraints.recover_multipliers(sol))
    return sol.to_dict(), EXIT_OK


def cmd_omega_min(args) -> tuple[dict, int]:
    sol = constraints.omega_min_integer(args.l2, args.r, args.lmax)
    report = sol.to_dict()
    omega = bounds.omega_bound(args.l2, args.r).value
    report["omega_bound"] = omega
    report["saturated"] = abs(sol.omega - omega) <= SATURATION_TOL
    return report, EXIT_OK


def cmd_verify_basis(args) -> tuple[dict, int]:
    cfg = oracle.QuadratureConfig(nodes=args.nodes)
    worst_moment = 0.0
    worst_norm = 0.0
    worst_orth = 0.0
    worst_herm = 0.0
    for i in range(args.samples):
        rng = np.random.default_rng(args.seed + i)
        parity = oracle.Parity.EVEN if rng.integers(2) == 0 else oracle.Parity.ODD
        terms = int(rng.integers(1, args.terms + 1))
        state = oracle.random_state(args.n_max, args.l_max, parity, terms, int(rng.integers(2**63 - 1)))
        analytic = basis.moments_superposition(state)
        numeric = oracle.quadrature_moments(state, cfg)
        worst_moment = max(worst_moment, abs(analytic.r2 - numeric.r2), abs(analytic.p2 - numeric.p2))
    for l in range(args.l_max + 1):
        for n in range(args.n_max + 1):
            a = basis.QuantumNumbers(n, l)
            worst_norm = max(worst_norm, abs(oracle.radial_overlap(a, a, cfg) - 1.0))
            for n2 in range(n + 1, args.n_max + 1):
                b = basis.QuantumNumbers(n2, l)
                worst_orth = max(worst_orth, abs(oracle.radial_overlap(a, b, cfg)))
                worst_herm = max(
                    worst_herm,
                    abs(oracle.r2_quadrature(a, b, cfg) - oracle.r2_quadrature(b, a, cfg)),
                    abs(oracle.p2_quadrature(a, b, cfg) - oracle.p2_quadrature(b, a, cfg)),
                )
    report = {
        "samples": args.samples,
        "seed": args.seed,
        "max_moment_deviation": worst_moment,
        "max_normalization_error": worst_norm,
        "max_orthogonality_error": worst_orth,
        "max_hermiticity_error": worst_herm,
    }
    report["ok"] = worst_moment < 1e-8 and worst_norm < 1e-12 and worst_orth < 1e-12 and worst_herm < 1e-10
    code = EXIT_CHECK_FAILED if args.check and not report["ok"] else EXIT_OK
    return report, code


def cmd_scan(args) -> tuple[dict, int]:
    report = oracle.scan(args.samples, args.n_max, args.l_max, args.terms, args.seed)
    code = EXIT_CHECK_FAILED if args.check and report.violations else EXIT_OK
    return report.to_dict(), code


def cmd_minimize(args) -> tuple[dict, int]:
    problem = optimizer.OptimizeProblem(
        args.l2, args.r, n_max=args.n_max, l_max=args.lmax, restarts=args.restarts,
        seed=args.seed, tolerance=args.tolerance, complex_amplitudes=args.complex,
    )
    result = optimizer.minimize_product(problem)
    search = constraints.omega_min_integer(args.l2, args.r)
    report = result.to_dict()
    report["omega_min"] = search.omega
    report["matches_omega_min"] = abs(result.best_product - search.omega) <= OPTIMIZER_MATCH_TOL
    report["above_omega"] = result.best_product >= result.omega - OPTIMIZER_BOUND_SLACK
    failed = not (report["matches_omega_min"] and report["above_omega"])
    return report, EXIT_CHECK_FAILED if args.check and failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="angular-uncertainty", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--output", help="write to this path instead of stdout")
        p.set_defaults(func=func)
        return p

    p = add("bound", cmd_bound, "closed-form bounds and the W audit at (L2, R)")
    p.add_argument("--l2", type=float, required=True, help="mean of L^2")
    p.add_argument("--r", type=float, required=True, help="variance of L^2")

    p = add("curve", cmd_curve, "CSV of Omega(L^2, R) against L")
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--lmin", type=float, default=0.0)
    p.add_argument("--lmax", type=float, required=True)
    p.add_argument("--steps", type=int, default=100)

    p = add("example", cmd_example, "two-level example state built on |0 0 0> and |0 l0 0>")
    p.add_argument("--l0", type=int, required=True)
    p.add_argument("--l2", type=float, required=True)
    p.add_argument("--quadrature", action="store_true", help="also compute the product by quadrature")

    p = add("solve", cmd_solve, "probabilities, domain and multipliers for one l-triple")
    p.add_argument("--levels", type=int, nargs=3, required=True, metavar=("L1", "L2", "L3"))
    p.add_argument("--l2", type=float, required=True)
    p.add_argument("--f", type=float, help="mean of L^4")
    p.add_argument("--r", type=float, help="variance of L^2 (alternative to --f)")

    p = add("omega-min", cmd_omega_min, "exhaustive integer minimum of omega")
    p.add_argument("--l2", type=float, required=True)
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--lmax", type=int)

    p = add("verify-basis", cmd_verify_basis, "quadrature vs analytic moments on random states")
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--n-max", type=int, default=4)
    p.add_argument("--l-max", type=int, default=8)
    p.add_argument("--terms", type=int, default=5)
    p.add_argument("--nodes", type=int, default=128)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--check", action="store_true")

    p = add("scan", cmd_scan, "search random states for violations of Omega")
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--n-max", type=int, default=4)
    p.add_argument("--l-max", type=int, default=8)
    p.add_argument("--terms", type=int, default=5)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--check", action="store_true")

    p = add("minimize", cmd_minimize, "direct numerical minimization of the product")
    p.add_argument("--l2", type=float, required=True)
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--n-max", type=int, default=2)
    p.add_argument("--lmax", type=int)
    p.add_argument("--restarts", type=int, default=20)
    p.add_argument("--tolerance", type=float, default=1e-8)
    p.add_argument("--complex", action="store_true", help="optimize complex amplitudes")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--check", action="store_true")
    return parser


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        payload, code = args.func(args)
        text = payload if isinstance(payload, str) else _json(payload)
        _emit(text, args.output)
    except InvalidInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    return code


def main() -> None:
    sys.exit(run())
