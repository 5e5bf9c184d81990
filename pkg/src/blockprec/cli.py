"""Command-line driver for the preconditioning studies.

Subcommands: ``table`` (iteration-count table), ``ratio-sweep``
(block-diagonal vs lower-triangular with approximate Schur complements),
``spectrum-curves`` (closed-form eigenvalue magnitudes), ``verify-theorem``
(predicted vs computed spectra on synthesized systems), and ``vef`` (1D
transport application).  All emit CSV to --out or stdout; exit code 2 flags
non-converged cells (or failed verifications) under --strict.
"""

import argparse
import sys

import numpy as np

from .experiments import (
    ExperimentConfig,
    KIND_TOKENS,
    ratio_sweep,
    run_table,
    spectrum_curves,
    write_csv,
)
from .rng import GENERATOR_NAME
from .spectra import synthesize_prescribed, verify_prediction
from .transport import TransportProblem
from .vef import VEF_KINDS, assemble_vef, first_flight_eddington, vef_driver, vef_solve

__all__ = ["main"]


def _emit(text: str, out: str | None):
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w") as fh:
            fh.write(text)


def _simple_csv(header_meta: dict, fields, records, out):
    lines = [f"# {k}={v}" for k, v in header_meta.items()]
    lines.append(",".join(fields))
    for rec in records:
        lines.append(",".join(str(rec[f]) for f in fields))
    _emit("\n".join(lines) + "\n", out)


def _add_config_flags(p: argparse.ArgumentParser):
    p.add_argument("--n", type=int, default=250, help="block size")
    p.add_argument("--c_o", type=float, default=1.0)
    p.add_argument("--c1", type=float, default=1.0)
    p.add_argument("--c2", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-16)
    p.add_argument("--max-iters", type=int, default=None)
    p.add_argument("--out", default=None, help="CSV path ('-' = stdout)")
    p.add_argument("--strict", action="store_true",
                   help="exit 2 if any cell fails to converge")


def _config(args) -> ExperimentConfig:
    return ExperimentConfig(n=args.n, c_o=args.c_o, c_1=args.c1, c_2=args.c2,
                            seed=args.seed, rel_tol=args.tol,
                            max_iters=args.max_iters)


def _cmd_table(args) -> int:
    cfg = _config(args)
    rows = run_table(cfg, matrix_tags=tuple(args.tags),
                     kinds=tuple(args.kinds))
    meta = {"rho": rows[0].rho}
    write_csv(rows, args.out if args.out else "-", metadata=meta)
    if args.strict and any(not r.converged for r in rows):
        return 2
    return 0


def _cmd_ratio_sweep(args) -> int:
    cfg = _config(args)
    grid = [float(t) for t in args.eps_grid.split(",")]
    rows = ratio_sweep(cfg, grid, args.mode.replace("-", "_"))
    write_csv(rows, args.out if args.out else "-",
              metadata={"mode": args.mode})
    if args.strict and any(not r.converged for r in rows):
        return 2
    return 0


def _parse_grid(spec: str) -> np.ndarray:
    lo, hi, steps = spec.split(":")
    return np.linspace(float(lo), float(hi), int(steps))


def _cmd_spectrum_curves(args) -> int:
    grid = _parse_grid(args.grid)
    records = spectrum_curves(grid, tuple(args.kinds))
    _simple_csv({"prng": GENERATOR_NAME},
                ["kind", "lambda", "mag_plus", "mag_minus"], records, args.out)
    return 0


def _cmd_verify_theorem(args) -> int:
    lambdas = [float(t) for t in args.lambdas.split(",")]
    sys_ = synthesize_prescribed(args.n2, args.n2, lambdas, args.seed)
    records = []
    all_ok = True
    for token in args.kinds:
        kind, hat = KIND_TOKENS[token]
        rep = verify_prediction(sys_, kind, tol=args.tol)
        all_ok = all_ok and rep.passed
        records.append({
            "kind": token,
            "max_residual": repr(rep.max_residual),
            "spectrum_distance": repr(rep.spectrum_distance),
            "complete": str(rep.prediction.complete).lower(),
            "passed": str(rep.passed).lower(),
        })
    _simple_csv({"n2": args.n2, "seed": args.seed, "lambdas": args.lambdas},
                ["kind", "max_residual", "spectrum_distance", "complete",
                 "passed"], records, args.out)
    if args.strict and not all_ok:
        return 2
    return 0


def _cmd_vef(args) -> int:
    problem = TransportProblem(n_elements=args.elements, sigma_a=args.sigma_a,
                               n_angles=args.angles)
    lumped = args.kind in ("Dt", "Lt")
    if args.outer:
        result = vef_driver(problem, outer_tol=args.outer_tol,
                            max_outer=args.max_outer, kind=args.kind,
                            rel_tol=args.tol)
        iterations = result.outer_iterations
        converged = result.converged
    else:
        e_field = 1.0 / 3.0 if args.symmetrized else first_flight_eddington(problem)
        disc = assemble_vef(problem, e_field, lumped=lumped)
        res = vef_solve(disc, args.kind, rel_tol=args.tol,
                        symmetrized=args.symmetrized)
        iterations = res.iterations
        converged = res.converged
    rec = {
        "elements": args.elements,
        "sigma_a": args.sigma_a,
        "kind": args.kind,
        "lumped": str(lumped).lower(),
        "symmetrized": str(args.symmetrized).lower(),
        "iterations": iterations,
        "converged": str(converged).lower(),
    }
    _simple_csv({"h1_nodes": 2 * args.elements + 1, "outer": args.outer},
                ["elements", "sigma_a", "kind", "lumped", "symmetrized",
                 "iterations", "converged"], [rec], args.out)
    if args.strict and not converged:
        return 2
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="blockprec",
        description="Block preconditioning studies for 2x2 block systems.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("table", help="iteration-count table")
    _add_config_flags(p)
    p.add_argument("--tags", nargs="+", default=["M", "N"], choices=["M", "N"])
    p.add_argument("--kinds", nargs="+",
                   default=["L", "Lhat", "D+", "Dhat+", "D-", "Dhat-"],
                   choices=sorted(KIND_TOKENS))
    p.set_defaults(func=_cmd_table)

    p = sub.add_parser("ratio-sweep", help="diagonal/triangular iteration ratios")
    _add_config_flags(p)
    p.add_argument("--mode", required=True,
                   choices=["star", "cross", "cross-saddle"])
    p.add_argument("--eps-grid", default="0,0.125,0.25,0.5,0.75,1.0",
                   help="comma-separated epsilon values")
    p.set_defaults(func=_cmd_ratio_sweep, c1=10.0)

    p = sub.add_parser("spectrum-curves", help="closed-form |lambda| curves")
    p.add_argument("--grid", default="0.01:100:200", help="lo:hi:steps")
    p.add_argument("--kinds", nargs="+",
                   default=["D+", "D-", "Dhat+", "Dhat-"],
                   choices=["D+", "D-", "Dhat+", "Dhat-"])
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_spectrum_curves)

    p = sub.add_parser("verify-theorem", help="predicted vs computed spectra")
    p.add_argument("--n2", type=int, default=8)
    p.add_argument("--lambdas", required=True,
                   help="comma-separated generalized eigenvalues (length n2)")
    p.add_argument("--kinds", nargs="+",
                   default=["D+", "D-", "Dhat+", "Dhat-"],
                   choices=["D+", "D-", "Dhat+", "Dhat-"])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-7)
    p.add_argument("--out", default=None)
    p.add_argument("--strict", action="store_true")
    p.set_defaults(func=_cmd_verify_theorem)

    p = sub.add_parser("vef", help="1D transport application")
    p.add_argument("--elements", type=int, default=200)
    p.add_argument("--sigma-a", type=float, default=0.0)
    p.add_argument("--angles", type=int, default=8)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--kind", default="L", choices=list(VEF_KINDS))
    p.add_argument("--symmetrized", action="store_true")
    p.add_argument("--outer", action="store_true",
                   help="run the nonlinear driver instead of one linear solve")
    p.add_argument("--outer-tol", type=float, default=1e-8)
    p.add_argument("--max-outer", type=int, default=100)
    p.add_argument("--out", default=None)
    p.add_argument("--strict", action="store_true")
    p.set_defaults(func=_cmd_vef)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
