"""
Command line interface.

Exit codes: 0 success, 2 non-convergence, 3 configuration error,
4 dense-cap exceeded.
"""
import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path

from .bench import (
    SPECTRUM_KINDS,
    ExperimentConfig,
    ResultRow,
    condition_report,
    run_experiments,
    spectrum_dump,
    write_rows,
)
from .errors import ConfigError, DenseCapExceeded, DomainError
from .pipeline import METHODS, solve_bltt

EXIT_OK = 0
EXIT_NOT_CONVERGED = 2
EXIT_CONFIG = 3
EXIT_DENSE_CAP = 4


def _add_problem_args(sp):
    sp.add_argument("--alpha", type=float, required=True, help="time order, 0 < alpha < 1")
    sp.add_argument("--beta", type=float, required=True, help="space order, 1 < beta < 2")
    sp.add_argument("--e1", type=float, default=20.0)
    sp.add_argument("--e2", type=float, default=0.02)
    sp.add_argument("--bigN", type=int, required=True, help="spatial intervals")
    sp.add_argument("--bigM", type=int, required=True, help="time steps")
    sp.add_argument("--bigT", type=float, default=1.0)
    sp.add_argument("--bigL", type=float, default=1.0)


def _config_from_args(args, methods, output_path, **extra):
    return ExperimentConfig(
        alpha=args.alpha, beta=args.beta, e1=args.e1, e2=args.e2,
        L=args.bigL, T=args.bigT, N=args.bigN, M=args.bigM,
        methods=methods, output_path=output_path, **extra,
    )


def build_parser():
    parser = argparse.ArgumentParser(
        prog="bltt",
        description="All-at-once solver for time-space fractional diffusion problems.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("solve", help="solve the manufactured test problem with one method")
    _add_problem_args(sp)
    sp.add_argument("--method", choices=METHODS, default="sk2_bicgstab")
    sp.add_argument("--tol-outer", type=float, default=1e-8)
    sp.add_argument("--tol-inner", type=float, default=1e-3)
    sp.add_argument("--maxit", type=int, default=1000)
    sp.add_argument("--out", default=None, help="write <out>.csv and <out>.json")

    sp = sub.add_parser("bench", help="run every method listed in a JSON config")
    sp.add_argument("--config", required=True, help="JSON file with ExperimentConfig fields")
    sp.add_argument("--workers", type=int, default=1)

    sp = sub.add_parser("spectrum", help="dump eigenvalues of a dense diagnostic matrix")
    _add_problem_args(sp)
    sp.add_argument("--which", choices=SPECTRUM_KINDS, required=True)
    sp.add_argument("--out", required=True, help="CSV file of re,im rows")

    sp = sub.add_parser("condition", help="2-norm condition numbers of the diagnostic matrices")
    _add_problem_args(sp)
    sp.add_argument("--out", required=True, help="CSV file of matrix,condition_number rows")
    return parser


def _print_rows(rows):
    for r in rows:
        f = r.formatted()
        print(
            f"{f['method']:>13}  iter=({f['iter1']}+{f['iter2']}, {f['iter3']})  "
            f"error1={f['error1']}  error2={f['error2']}  time={f['time_seconds']}s  "
            f"converged={f['converged']}"
        )


def _cmd_solve(args):
    cfg = _config_from_args(
        args, [args.method], args.out or "solve",
        tol_outer=args.tol_outer, tol_inner=args.tol_inner, maxit=args.maxit,
    )
    _, rep = solve_bltt(
        cfg.problem(), args.method, tol_outer=cfg.tol_outer, tol_inner=cfg.tol_inner, maxit=cfg.maxit,
    )
    row = ResultRow(
        args.method, cfg.alpha, cfg.beta, cfg.N, cfg.M, rep.iter1, rep.iter2, rep.iter3,
        rep.wall_time, rep.error1, rep.error2, rep.converged,
    )
    _print_rows([row])
    if args.out:
        write_rows([row], args.out)
    return EXIT_OK if row.converged else EXIT_NOT_CONVERGED


def _cmd_bench(args):
    cfg = ExperimentConfig.from_json(args.config)
    rows = run_experiments(cfg, workers=args.workers)
    _print_rows(rows)
    return EXIT_OK if all(r.converged for r in rows) else EXIT_NOT_CONVERGED


def _cmd_spectrum(args):
    cfg = _config_from_args(args, [], args.out)
    ev = spectrum_dump(cfg.problem(), args.which, args.out)
    print(f"wrote {len(ev)} eigenvalues of {args.which} to {args.out}")
    return EXIT_OK


def _cmd_condition(args):
    cfg = _config_from_args(args, [], args.out)
    table = condition_report(cfg.problem())
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("matrix", "condition_number"))
    for k, v in table.items():
        writer.writerow((k, f"{v:.6e}"))
        print(f"{k:>11}  {v:.4f}")
    out = Path(args.out)
    out.write_text(buf.getvalue(), encoding="utf-8", newline="")
    out.with_suffix(".json").write_text(json.dumps(table, indent=2) + "\n", encoding="utf-8")
    return EXIT_OK


_COMMANDS = {
    "solve": _cmd_solve,
    "bench": _cmd_bench,
    "spectrum": _cmd_spectrum,
    "condition": _cmd_condition,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return _COMMANDS[args.command](args)
    except DenseCapExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DENSE_CAP
    except (ConfigError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ArithmeticError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NOT_CONVERGED


if __name__ == "__main__":
    sys.exit(main())
