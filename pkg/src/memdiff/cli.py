"""Command-line entry point: ``memdiff {validate,solve,certify,converge,oracle-check}``.

Exit codes: 0 success, 1 invalid configuration, 2 certificate or oracle check
failed, 3 numerical failure.  The field seed is taken from ``--seed``, then the
``MEMDIFF_SEED`` environment variable, then the config file.
"""
import argparse
import logging
import os
import sys
from pathlib import Path

import numpy as np

from memdiff import __version__, config, harness, output, solver
from memdiff.errors import ConfigError, NumericalError, Violation

EXIT_OK, EXIT_CONFIG, EXIT_CERTIFICATE, EXIT_NUMERICAL = 0, 1, 2, 3

log = logging.getLogger("memdiff")


def _seed(args):
    if args.seed is not None:
        return args.seed
    env = os.environ.get("MEMDIFF_SEED")
    if env:
        try:
            return int(env, 0)
        except ValueError:
            raise ConfigError(Violation("MEMDIFF_SEED", "syntax", f"{env!r} is not an integer")) from None
    return None


def _fail(msg, code):
    print(msg, file=sys.stderr)
    return code


def cmd_validate(cfg, run, out):
    print("ok")
    return EXIT_OK, []


def cmd_solve(cfg, run, out):
    traj = solver.solve(cfg)
    files = [output.write_trajectory(out / "trajectory.csv", traj)]
    if not traj.ok:
        return _fail(f"numerical failure: {traj.failure}", EXIT_NUMERICAL), files
    print(f"solved {traj.n_steps} steps, N={cfg.N}")
    return EXIT_OK, files


def cmd_certify(cfg, run, out, svg=False):
    report = harness.certify_config(cfg)
    files = [output.write_energy(out / "energy.csv", report)]
    if svg:
        files.append(output.write_svg(out / "energy.svg", report.times, report.energy, report.bound))
    k = report.constants
    print(
        f"verdict={report.verdict} J={k.J:.6g} x0={k.x0:.6g} C1={k.C1:.6g} C2={k.C2:.6g} "
        f"p={k.p:.4g} aggregate_bound={report.aggregate_bound:.6g} "
        f"h1_norm={report.h1_norm:.6g} dt_hminus1_norm={report.dt_hminus1_norm:.6g}"
    )
    failed = not report.passed
    if run.n_seeds > 1:
        sweep = harness.seed_sweep(cfg, run.n_seeds)
        rows = [
            [str(r), rep.verdict, "" if rep.first_violation is None else str(rep.first_violation),
             float(np.min(rep.margin)) if rep.margin.size else float("nan")]
            for r, rep in enumerate(sweep)
        ]
        files.append(
            output.write_csv(out / "sweep.csv", ["realization", "verdict", "first_violation", "min_margin"], rows)
        )
        print(f"sweep: {sum(r.passed for r in sweep)}/{len(sweep)} pass")
        failed = failed or not all(r.passed for r in sweep)
    if report.failure is not None:
        return _fail(f"numerical failure: {report.failure}", EXIT_NUMERICAL), files
    if failed:
        step = report.first_violation
        return _fail(f"certificate failed (first violation at step {step})", EXIT_CERTIFICATE), files
    return EXIT_OK, files


def cmd_converge(cfg, run, out):
    tables = []
    if not harness.oracle_violations(cfg):
        tables.append(harness.refine_dt(cfg, run.dt_list))
    tables.append(harness.refine_N(cfg, run.N_list))
    files = [output.write_convergence(out / "converge.csv", tables)]
    for table in tables:
        for r in table.rows:
            print(f"{r.param}={r.value:g} error={r.error:.6e} order={'' if r.order is None else f'{r.order:.3f}'}")
    return EXIT_OK, files


def cmd_oracle_check(cfg, run, out):
    traj = solver.solve(cfg)
    if not traj.ok:
        return _fail(f"numerical failure: {traj.failure}", EXIT_NUMERICAL), []
    exact = harness.oracle_linear(cfg)
    err = np.linalg.norm(traj.coeffs - exact.coeffs, axis=1)
    scale = np.maximum(np.linalg.norm(exact.coeffs, axis=1), np.finfo(float).tiny)
    rel = err / scale
    rows = ([str(k), t, e, r] for k, (t, e, r) in enumerate(zip(traj.times, err, rel)))
    files = [output.write_csv(out / "oracle.csv", ["step", "t", "error", "rel_error"], rows)]
    worst = float(np.max(rel))
    print(f"max relative error {worst:.3e} (tolerance {run.oracle_tol:g})")
    if worst > run.oracle_tol:
        return _fail("oracle check failed", EXIT_CERTIFICATE), files
    return EXIT_OK, files


COMMANDS = {
    "validate": cmd_validate,
    "solve": cmd_solve,
    "certify": cmd_certify,
    "converge": cmd_converge,
    "oracle-check": cmd_oracle_check,
}


def build_parser():
    parser = argparse.ArgumentParser(prog="memdiff", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON run configuration")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--seed", type=int, default=None, help="field master seed override")
        p.add_argument("--svg", action="store_true", help="also write energy.svg (certify)")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR, format="%(message)s")
    started = output.now()
    try:
        seed = _seed(args)
        cfg, run, model = config.parse_config(args.config, seed=seed)
    except ConfigError as exc:
        return _fail("invalid configuration: " + "; ".join(str(v) for v in exc.violations), EXIT_CONFIG)
    except OSError as exc:
        return _fail(f"cannot read config: {exc}", EXIT_CONFIG)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    handler = COMMANDS[args.command]
    try:
        if args.command == "certify":
            code, files = handler(cfg, run, out, svg=args.svg)
        else:
            code, files = handler(cfg, run, out)
    except ConfigError as exc:
        return _fail("invalid configuration: " + "; ".join(str(v) for v in exc.violations), EXIT_CONFIG)
    except NumericalError as exc:
        return _fail(f"numerical failure: {exc}", EXIT_NUMERICAL)
    if files:
        output.write_manifest(
            out / "manifest.json",
            output.config_digest(model.model_dump(mode="json")),
            __version__,
            started,
            files,
            args.command,
            code,
        )
    return code


if __name__ == "__main__":
    sys.exit(main())
