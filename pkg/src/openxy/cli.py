"""Command-line front-end: single solves, sweeps, oracle cross-checks.

Subcommands:

- ``solve``: one spec end to end; writes rapidities.csv, cmatrix.csv,
  profile.csv, magnetization.csv, osee.csv, and manifest.json into
  the output directory.
- ``sweep``: a grid described by a JSON config file (schema mirrors
  SweepConfig; see README); configs with an n axis get scaling fits.
- ``oracle-check``: random small-n specs compared against the dense
  Liouvillean oracle.

Exit codes: 0 success, 2 validation or config error, 3 numerical
failure, 4 I/O error, 5 oracle deviation above threshold.  Progress
goes to stdout, diagnostics to stderr.  All CSV numbers carry 17
significant digits and round-trip to the same double.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from . import __version__
from .model import ChainSpec, InvalidSpecError, build_structure_matrix, validate_spec
from .observables import (ObservablesError, distance_profile, magnetization,
                          spin_spin_matrix, two_point_table)
from .osee import OseeError, osee
from .spectral import SpectralError, diagonalize, relaxation_gap
from .sweep import SweepConfig, format_float, run_size_scan, run_sweep, write_csv

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4
EXIT_DEVIATION = 5

SOLVE_OBSERVABLES = ("rapidities", "cmatrix", "profile", "magnetization", "osee")
ORACLE_TOL = 1e-6


def _err(msg: str) -> None:
    print(msg, file=sys.stderr)


def _write_manifest(outdir: str, config: dict, timings: dict,
                    warnings: list, status: int) -> None:
    payload = {
        "config": config,
        "version": __version__,
        "timings": timings,
        "warnings": warnings,
        "status": status,
    }
    with open(os.path.join(outdir, "manifest.json"), "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def cmd_solve(args) -> int:
    try:
        spec = validate_spec(ChainSpec(n=args.n, gamma=args.gamma, h=args.h,
                                       gl1=args.gl1, gl2=args.gl2,
                                       gr1=args.gr1, gr2=args.gr2))
    except InvalidSpecError as exc:
        _err(str(exc))
        return EXIT_VALIDATION

    if args.observables is None:
        wanted = set(SOLVE_OBSERVABLES)
    else:
        wanted = {o.strip() for o in args.observables.split(",") if o.strip()}
        unknown = wanted - set(SOLVE_OBSERVABLES)
        if unknown:
            _err(f"unknown observables {sorted(unknown)}; "
                 f"allowed: {list(SOLVE_OBSERVABLES)}")
            return EXIT_VALIDATION
    cut = args.cut if args.cut is not None else spec.n // 2
    if not 1 <= cut < spec.n:
        _err(f"cut must be in 1..{spec.n - 1}, got {cut}")
        return EXIT_VALIDATION
    if not 0.0 < args.band < 1.0:
        _err(f"band must be in (0, 1), got {args.band}")
        return EXIT_VALIDATION

    timings: dict = {}
    warnings: list = []
    config = {"command": "solve", "n": spec.n, "gamma": spec.gamma, "h": spec.h,
              "gl1": spec.gl1, "gl2": spec.gl2, "gr1": spec.gr1, "gr2": spec.gr2,
              "observables": sorted(wanted), "cut": cut, "band": args.band,
              "out": args.out}
    try:
        os.makedirs(args.out, exist_ok=True)
    except OSError as exc:
        _err(f"cannot create output directory: {exc}")
        return EXIT_IO

    status = EXIT_OK
    try:
        t0 = time.time()
        sm = build_structure_matrix(spec)
        timings["build_s"] = round(time.time() - t0, 6)

        t0 = time.time()
        basis = diagonalize(sm)
        timings["diagonalize_s"] = round(time.time() - t0, 6)

        t0 = time.time()
        files = []
        if "rapidities" in wanted:
            files.append(("rapidities.csv", ["index", "re_beta", "im_beta"],
                          [[str(k), format_float(b.real), format_float(b.imag)]
                           for k, b in enumerate(basis.beta, start=1)]))
        if wanted & {"cmatrix", "profile", "magnetization"}:
            table = two_point_table(basis)
            warnings.extend(table.warnings)
            if "magnetization" in wanted:
                files.append(("magnetization.csv", ["site", "sz"],
                              [[str(m + 1), format_float(v)]
                               for m, v in enumerate(magnetization(table))]))
            if wanted & {"cmatrix", "profile"}:
                cmat = spin_spin_matrix(table)
                if "cmatrix" in wanted:
                    files.append(("cmatrix.csv", ["l", "m", "C"],
                                  [[str(l + 1), str(m + 1),
                                    format_float(cmat.c[l, m])]
                                   for l in range(spec.n) for m in range(spec.n)]))
                if "profile" in wanted:
                    prof = distance_profile(cmat, band=args.band)
                    files.append(("profile.csv", ["r", "C"],
                                  [[str(r), format_float(v)] for r, v in prof]))
        if "osee" in wanted:
            res = osee(basis, cut)
            files.append(("osee.csv",
                          ["cut", "S"] + [f"eta_{j + 1}"
                                          for j in range(len(res.eta))],
                          [[str(cut), format_float(res.entropy)]
                           + [format_float(e) for e in res.eta]]))
        timings["observables_s"] = round(time.time() - t0, 6)

        t0 = time.time()
        for name, header, rows in files:
            write_csv(os.path.join(args.out, name), header, rows)
        timings["write_s"] = round(time.time() - t0, 6)
        print(f"solved n={spec.n} gamma={spec.gamma} h={spec.h}; "
              f"wrote {len(files)} files to {args.out}")
    except (SpectralError, OseeError, ObservablesError) as exc:
        _err(str(exc))
        warnings.append(str(exc))
        status = EXIT_NUMERICAL
    except OSError as exc:
        _err(f"I/O failure: {exc}")
        warnings.append(str(exc))
        status = EXIT_IO

    try:
        _write_manifest(args.out, config, timings, warnings, status)
    except OSError as exc:
        _err(f"cannot write manifest: {exc}")
        return EXIT_IO
    return status


def _resolve_workers(flag_value, cfg_workers: int) -> int:
    if flag_value is not None:
        return flag_value
    env = os.environ.get("MAX_WORKERS")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ValueError(f"MAX_WORKERS must be an integer, got {env!r}")
    return cfg_workers


def cmd_sweep(args) -> int:
    try:
        with open(args.config) as fh:
            raw = json.load(fh)
    except OSError as exc:
        _err(f"cannot read config: {exc}")
        return EXIT_IO
    except json.JSONDecodeError as exc:
        _err(f"config parse error at line {exc.lineno}, column {exc.colno}: "
             f"{exc.msg}")
        return EXIT_VALIDATION

    try:
        cfg = SweepConfig.from_dict(raw)
        workers = _resolve_workers(args.workers, cfg.workers)
        if workers < 1:
            raise ValueError(f"workers must be >= 1, got {workers}")
    except (ValueError, InvalidSpecError) as exc:
        _err(str(exc))
        return EXIT_VALIDATION

    from dataclasses import replace

    if args.out is not None:
        cfg = replace(cfg, output=args.out)
    if cfg.output is None:
        _err("no output directory: set 'output' in the config or pass --out")
        return EXIT_VALIDATION
    cfg = replace(cfg, workers=workers)

    has_n_axis = any(a.name == "n" for a in cfg.axes)
    try:
        t0 = time.time()
        result = (run_size_scan if has_n_axis else run_sweep)(cfg)
        npts = len(result.rows)
        nerr = sum(1 for r in result.rows if "error" in r)
        print(f"swept {npts} points ({nerr} failed) in {time.time() - t0:.1f}s; "
              f"wrote {cfg.output}")
        for key, fit in result.fits.items():
            if not isinstance(fit, str):
                print(f"  fit {key}: params={tuple(round(p, 6) for p in fit.params)} "
                      f"r2={fit.r_squared:.4f}")
    except ValueError as exc:
        _err(str(exc))
        return EXIT_VALIDATION
    except OSError as exc:
        _err(f"I/O failure: {exc}")
        return EXIT_IO
    return EXIT_OK


def cmd_oracle_check(args) -> int:
    if args.n > 5:
        _err(f"n too large for oracle: {args.n} > 5")
        return EXIT_VALIDATION
    if args.n < 2:
        _err(f"n < 2: need at least two sites, got {args.n}")
        return EXIT_VALIDATION
    if args.trials < 1:
        _err(f"trials must be >= 1, got {args.trials}")
        return EXIT_VALIDATION

    from . import oracle

    rng = np.random.default_rng(args.rng_seed)
    worst = (-1.0, None, None)  # deviation, spec, quantity
    print(f"oracle check at n={args.n}, {args.trials} trials, "
          f"seed {args.rng_seed}")
    for trial in range(args.trials):
        gamma = args.gamma if args.gamma is not None else float(rng.uniform(0, 1))
        h = args.h if args.h is not None else float(rng.uniform(0, 1.2))
        rates = [float(r) for r in rng.uniform(0.0, 1.0, size=4)]
        spec = ChainSpec(n=args.n, gamma=gamma, h=h, gl1=rates[0],
                         gl2=rates[1], gr1=rates[2], gr2=rates[3])
        try:
            lio = oracle.build_liouvillean(spec)
            ness = oracle.steady_state(lio)
            g_ref = oracle.two_point_exact(ness) - np.eye(2 * spec.n)
            c_ref = oracle.zz_connected_exact(ness)
            sz_ref = oracle.sigma_z_profile_exact(ness)

            basis = diagonalize(build_structure_matrix(spec))
            table = two_point_table(basis)
            devs = {
                "G": float(np.max(np.abs(table.g - g_ref))),
                "C": float(np.max(np.abs(spin_spin_matrix(table).c - c_ref))),
                "sz": float(np.max(np.abs(np.array(magnetization(table)) - sz_ref))),
            }
            if spec.n % 2 == 0:
                cut = spec.n // 2
                devs["S"] = float(abs(osee(basis, cut).entropy
                                      - oracle.exact_osee(ness, cut)))
        except (oracle.OracleError, SpectralError, ObservablesError,
                OseeError) as exc:
            _err(f"trial {trial} failed on {spec.label()}: {exc}")
            return EXIT_NUMERICAL
        line = "  ".join(f"{k}={v:.3e}" for k, v in devs.items())
        print(f"  trial {trial:3d}: {line}")
        for k, v in devs.items():
            if v > worst[0]:
                worst = (v, spec, k)

    print(f"max deviation {worst[0]:.3e} ({worst[2]})")
    if worst[0] > ORACLE_TOL:
        spec = worst[1]
        _err(f"deviation {worst[0]:.3e} above {ORACLE_TOL:.1e} in {worst[2]}; "
             f"reproduce with: openxy oracle-check --n {spec.n} --trials 1 "
             f"--gamma {format_float(spec.gamma)} --h {format_float(spec.h)}")
        return EXIT_DEVIATION
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="openxy",
        description="Steady states of the boundary-driven open XY chain")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("solve", help="solve one spec and write CSV outputs")
    ps.add_argument("--n", type=int, required=True, help="number of sites")
    ps.add_argument("--gamma", type=float, required=True, help="anisotropy")
    ps.add_argument("--h", type=float, required=True, help="magnetic field")
    ps.add_argument("--gl1", type=float, default=0.0, help="left bath rate 1")
    ps.add_argument("--gl2", type=float, default=0.0, help="left bath rate 2")
    ps.add_argument("--gr1", type=float, default=0.0, help="right bath rate 1")
    ps.add_argument("--gr2", type=float, default=0.0, help="right bath rate 2")
    ps.add_argument("--out", required=True, help="output directory")
    ps.add_argument("--observables", default=None,
                    help="comma-separated subset of "
                         f"{','.join(SOLVE_OBSERVABLES)} (default: all)")
    ps.add_argument("--cut", type=int, default=None,
                    help="bipartition site count (default n//2)")
    ps.add_argument("--band", type=float, default=0.08,
                    help="center-band fraction for the distance profile")
    ps.set_defaults(func=cmd_solve)

    pw = sub.add_parser("sweep", help="run a parameter sweep from a config file")
    pw.add_argument("--config", required=True, help="JSON config file")
    pw.add_argument("--out", default=None, help="output directory (overrides config)")
    pw.add_argument("--workers", type=int, default=None,
                    help="worker processes (beats MAX_WORKERS and config)")
    pw.set_defaults(func=cmd_sweep)

    po = sub.add_parser("oracle-check",
                        help="compare the spectral pipeline against the dense oracle")
    po.add_argument("--n", type=int, required=True, help="sites (at most 5)")
    po.add_argument("--trials", type=int, default=10, help="random specs to draw")
    po.add_argument("--rng-seed", type=int, default=0, help="PRNG seed")
    po.add_argument("--gamma", type=float, default=None,
                    help="pin gamma instead of drawing it")
    po.add_argument("--h", type=float, default=None,
                    help="pin h instead of drawing it")
    po.set_defaults(func=cmd_oracle_check)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
