"""Command-line entry point: ``nsac {run,sweep,verify,oracle}``."""
import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import config, io, oracle, solver, verifier
from . import interface_geom as ig
from .errors import ConfigError, NSACError, ParameterError, PreconditionError
from .phasefield import SIGMA, equilibrium_profile

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

SYNOPSIS = """\
nsac [--out DIR] run --config F
nsac [--out DIR] sweep --config F --eps 0.08,0.04,0.02 [--jobs N]
nsac [--out DIR] verify --manifest M --mode {C1,C2} [--sigma X]
nsac [--out DIR] oracle --L X --n N"""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}\n{SYNOPSIS}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _parser():
    p = _Parser(prog="nsac", description="Compressible Navier-Stokes/Allen-Cahn runs and checks.")
    p.add_argument("--out", default=None, help="output root (default: $NSAC_OUT or ./nsac_out)")
    sub = p.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    r = sub.add_parser("run", help="integrate one configuration")
    r.add_argument("--config", required=True)

    s = sub.add_parser("sweep", help="eps sweep with rate fits")
    s.add_argument("--config", required=True)
    s.add_argument("--eps", required=True, help="comma-separated, strictly decreasing")
    s.add_argument("--jobs", type=int, default=None)

    v = sub.add_parser("verify", help="jump-condition checks on a run or sweep manifest")
    v.add_argument("--manifest", required=True)
    v.add_argument("--mode", required=True, choices=["C1", "C2"])
    v.add_argument("--sigma", type=float, default=SIGMA)

    o = sub.add_parser("oracle", help="layer profile and surface tension")
    o.add_argument("--L", type=float, default=10.0)
    o.add_argument("--n", type=int, default=4001)
    return p


def _load_raw(path):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc


def _cmd_run(args, out):
    raw = _load_raw(args.config)
    raw.setdefault("output_dir", str(out / Path(args.config).stem))
    res = solver.run(config.build(raw))
    print(res.manifest_path)
    return EXIT_OK


def _cmd_sweep(args, out):
    raw = _load_raw(args.config)
    config.resolve(raw)
    try:
        eps_list = [float(e) for e in args.eps.split(",") if e.strip()]
    except ValueError as exc:
        raise ConfigError(f"--eps must be a comma-separated list of numbers: {exc}") from exc
    target = out / f"sweep_{Path(args.config).stem}"
    rep = verifier.eps_sweep(raw, eps_list, raw["mobility"], target, jobs=args.jobs)
    print(json.dumps(rep.summary(), indent=2))
    return EXIT_OK if rep.passed else EXIT_FAIL


def _verify_run(manifest_path, mode, sigma, out):
    man = io.read_json(manifest_path)
    cfg = config.build(man["config"])
    paths = io.manifest_snapshot_paths(manifest_path)
    if len(paths) < 2:
        raise PreconditionError("verify needs a run with at least two snapshots (set pair_steps)")
    s1, s2 = io.read_snapshot(paths[-2][0]), io.read_snapshot(paths[-1][0])
    rec = verifier.check_jumps(s1, s2, cfg, mode, sigma)
    out.mkdir(parents=True, exist_ok=True)
    io.write_table(out / "interface_samples.csv", ig.SAMPLE_COLUMNS, ig.sample_rows(rec.samples, rec.traces))
    summary = {
        "kind": "verify",
        "mode": mode,
        "sigma": sigma,
        "t": s1.t,
        "samples": len(rec.samples),
        "u_jump_max": float(np.max(rec.u_jump)),
        "theta_jump_max": float(np.max(rec.theta_jump)),
        "stress_residual_max": float(np.max(rec.stress_residual)),
        "kinematic_max": float(np.max(rec.kinematic)),
        "fraction_in_S": float(np.mean(rec.in_S)),
    }
    io.write_json(summary, out / "verify_summary.json")
    print(json.dumps(summary, indent=2))
    return EXIT_OK


def _cmd_verify(args, out):
    mpath = Path(args.manifest)
    try:
        kind = io.read_json(mpath).get("kind")
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read manifest {mpath}: {exc}") from exc
    target = out / f"verify_{mpath.parent.name}"
    if kind == "sweep":
        rep = verifier.report_from_sweep(mpath, args.mode, args.sigma, out_dir=target)
        print(json.dumps(rep.summary(), indent=2))
        return EXIT_OK if rep.passed else EXIT_FAIL
    if kind == "run":
        return _verify_run(mpath, args.mode, args.sigma, target)
    raise ConfigError(f"{mpath}: unknown manifest kind {kind!r}")


def _cmd_oracle(args, out):
    prof = oracle.solve_phi_profile(args.L, args.n)
    quad = oracle.layer_quadratures(prof)
    sigma = quad["sigma"]
    result = {
        "L": args.L,
        "n": args.n,
        "sigma": sigma,
        "weighted": quad["weighted"],
        "sigma_closed_form": SIGMA,
        "sigma_abs_error": abs(sigma - SIGMA),
        "profile_sup_error": float(np.max(np.abs(prof.phi0 - equilibrium_profile(prof.xi)))),
    }
    out.mkdir(parents=True, exist_ok=True)
    io.write_json(result, out / "oracle.json")
    io.write_table(out / "oracle_profile.csv", oracle.ORACLE_COLUMNS, oracle.oracle_table(prof))
    print(json.dumps(result, indent=2))
    return EXIT_OK


COMMANDS = {"run": _cmd_run, "sweep": _cmd_sweep, "verify": _cmd_verify, "oracle": _cmd_oracle}


def main(argv=None):
    try:
        args = _parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    out = Path(args.out if args.out is not None else config.output_root())
    try:
        return COMMANDS[args.cmd](args, out)
    except (ConfigError, ParameterError, PreconditionError) as exc:
        print(f"nsac {args.cmd}: {exc}\n{SYNOPSIS}", file=sys.stderr)
        return EXIT_USAGE
    except NSACError as exc:
        print(f"nsac {args.cmd}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
