"""Parameter scans over (h, gamma, n) grids with persisted results.

A sweep is a rectangular grid over at most two of {h, gamma, n} around
a base spec.  Each grid point runs the full pipeline (structure matrix,
eigenbasis, requested observables) independently; failures at single
points are recorded as error rows and never abort the grid.  Scalars
land in one CSV in row-major grid order; matrix- and list-valued
outputs go to per-point sidecar files named by grid indices.  Repeated
runs of one config produce byte-identical CSV payloads (the manifest
carries the only timestamp).
"""

from __future__ import annotations

import hashlib
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import astuple, dataclass, field, replace

import numpy as np

from . import __version__
from .analysis import fit_linear, fit_power
from .model import ChainSpec, build_structure_matrix, validate_spec
from .observables import (distance_profile, magnetization, residual_correlator,
                          spin_spin_matrix, two_point_table)
from .osee import osee
from .spectral import diagonalize, relaxation_gap

__all__ = [
    "Axis",
    "SweepConfig",
    "SweepResult",
    "run_sweep",
    "run_size_scan",
    "format_float",
    "write_csv",
]

AXIS_NAMES = ("h", "gamma", "n")
OBSERVABLES = frozenset(
    {"rapidities", "gap", "cmatrix", "profile", "c_res", "magnetization", "osee"})
SCALAR_COLUMNS = ("gap", "c_res", "osee_S")


def format_float(x: float) -> str:
    """Full double precision, round-trippable decimal text."""
    return f"{float(x):.17g}"


def write_csv(path: str, header, rows) -> None:
    """Write rows of already-formatted strings with a fixed line ending."""
    import csv

    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


@dataclass(frozen=True)
class Axis:
    """One swept parameter: its name and the explicit value list."""

    name: str
    values: tuple

    @staticmethod
    def from_dict(d: dict, where: str = "axis") -> "Axis":
        if not isinstance(d, dict):
            raise ValueError(f"config field '{where}' must be an object")
        name = d.get("name")
        if name not in AXIS_NAMES:
            raise ValueError(
                f"config field '{where}.name' must be one of {AXIS_NAMES}, got {name!r}")
        if "values" in d:
            raw = list(d["values"])
        else:
            missing = [k for k in ("min", "max", "count") if k not in d]
            if missing:
                raise ValueError(
                    f"config field '{where}' needs 'values' or min/max/count "
                    f"(missing {missing})")
            count = int(d["count"])
            if count < 1:
                raise ValueError(f"config field '{where}.count' must be >= 1")
            raw = list(np.linspace(float(d["min"]), float(d["max"]), count))
        if not raw:
            raise ValueError(f"config field '{where}.values' must be nonempty")
        if name == "n":
            vals = tuple(int(v) for v in raw)
        else:
            vals = tuple(float(v) for v in raw)
        return Axis(name=name, values=vals)

    def to_dict(self) -> dict:
        return {"name": self.name, "values": list(self.values)}


@dataclass(frozen=True)
class SweepConfig:
    """Grid description: base spec, axes, observables, output, workers."""

    base: ChainSpec
    axes: tuple
    observables: frozenset
    output: str | None = None
    fmt: str = "csv"
    workers: int = 1
    band: float = 0.08
    cut: int | None = None

    @staticmethod
    def from_dict(d: dict) -> "SweepConfig":
        if not isinstance(d, dict):
            raise ValueError("config must be an object")
        base_d = d.get("base")
        if not isinstance(base_d, dict):
            raise ValueError("config field 'base' must be an object of spec fields")
        allowed = {"n", "gamma", "h", "gl1", "gl2", "gr1", "gr2"}
        unknown = set(base_d) - allowed
        if unknown:
            raise ValueError(f"config field 'base' has unknown keys {sorted(unknown)}")
        try:
            base = ChainSpec(
                n=int(base_d.get("n", 2)),
                gamma=float(base_d.get("gamma", 0.0)),
                h=float(base_d.get("h", 0.0)),
                gl1=float(base_d.get("gl1", 0.0)),
                gl2=float(base_d.get("gl2", 0.0)),
                gr1=float(base_d.get("gr1", 0.0)),
                gr2=float(base_d.get("gr2", 0.0)),
            )
        except (TypeError, ValueError) as exc:
            raise ValueError(f"config field 'base' is invalid: {exc}") from exc
        axes_d = d.get("axes")
        if not isinstance(axes_d, list) or not axes_d:
            raise ValueError("config field 'axes' must be a nonempty list")
        axes = tuple(Axis.from_dict(a, where=f"axes[{i}]")
                     for i, a in enumerate(axes_d))
        obs_d = d.get("observables", ["gap"])
        if not isinstance(obs_d, list):
            raise ValueError("config field 'observables' must be a list")
        cfg = SweepConfig(
            base=base,
            axes=axes,
            observables=frozenset(str(o) for o in obs_d),
            output=d.get("output"),
            fmt=str(d.get("format", "csv")),
            workers=int(d.get("workers", 1)),
            band=float(d.get("band", 0.08)),
            cut=None if d.get("cut") is None else int(d["cut"]),
        )
        validate_config(cfg)
        return cfg

    def to_dict(self) -> dict:
        return {
            "base": {
                "n": self.base.n, "gamma": self.base.gamma, "h": self.base.h,
                "gl1": self.base.gl1, "gl2": self.base.gl2,
                "gr1": self.base.gr1, "gr2": self.base.gr2,
            },
            "axes": [a.to_dict() for a in self.axes],
            "observables": sorted(self.observables),
            "output": self.output,
            "format": self.fmt,
            "workers": self.workers,
            "band": self.band,
            "cut": self.cut,
        }


def validate_config(cfg: SweepConfig) -> SweepConfig:
    """Check axis/observable consistency; raises ValueError with the field."""
    if not 1 <= len(cfg.axes) <= 2:
        raise ValueError(f"config field 'axes' must have 1 or 2 axes, got {len(cfg.axes)}")
    names = [a.name for a in cfg.axes]
    if len(set(names)) != len(names):
        raise ValueError(f"config field 'axes' repeats a name: {names}")
    bad = cfg.observables - OBSERVABLES
    if bad:
        raise ValueError(
            f"config field 'observables' has unknown entries {sorted(bad)}; "
            f"allowed: {sorted(OBSERVABLES)}")
    if not cfg.observables:
        raise ValueError("config field 'observables' must be nonempty")
    if cfg.fmt != "csv":
        raise ValueError(f"config field 'format' must be 'csv', got {cfg.fmt!r}")
    if cfg.workers < 1:
        raise ValueError(f"config field 'workers' must be >= 1, got {cfg.workers}")
    if "osee" in cfg.observables and cfg.cut is None:
        n_values = next((a.values for a in cfg.axes if a.name == "n"),
                        (cfg.base.n,))
        odd = [n for n in n_values if n % 2]
        if odd:
            raise ValueError(
                f"config field 'observables' requests osee at odd n {odd}; "
                "the symmetric cut needs even n (or set 'cut')")
    return cfg


def _grid_indices(cfg: SweepConfig):
    counts = [len(a.values) for a in cfg.axes]
    if len(counts) == 1:
        return [(i,) for i in range(counts[0])]
    return [(i, j) for i in range(counts[0]) for j in range(counts[1])]


def _point_spec(cfg: SweepConfig, idx) -> ChainSpec:
    spec = cfg.base
    for axis, i in zip(cfg.axes, idx):
        if axis.name == "n":
            spec = replace(spec, n=int(axis.values[i]))
        else:
            spec = replace(spec, **{axis.name: float(axis.values[i])})
    return spec


def _evaluate_point(task):
    """One grid point, exception-isolated; must stay picklable."""
    idx, spec_fields, observables, band, cut = task
    spec = ChainSpec(*spec_fields)
    out = {"index": idx, "warnings": []}
    try:
        validate_spec(spec)
        basis = diagonalize(build_structure_matrix(spec))
        if "rapidities" in observables:
            out["rapidities"] = np.array(basis.beta)
        if "gap" in observables:
            out["gap"] = relaxation_gap(basis).delta
        if observables & {"cmatrix", "profile", "c_res", "magnetization"}:
            table = two_point_table(basis)
            out["warnings"].extend(table.warnings)
            if "magnetization" in observables:
                out["magnetization"] = magnetization(table)
            if observables & {"cmatrix", "profile", "c_res"}:
                cmat = spin_spin_matrix(table)
                if "cmatrix" in observables:
                    out["cmatrix"] = cmat.c
                if "profile" in observables:
                    out["profile"] = distance_profile(cmat, band=band)
                if "c_res" in observables:
                    out["c_res"] = residual_correlator(cmat)
        if "osee" in observables:
            c = cut if cut is not None else spec.n // 2
            res = osee(basis, c)
            out["osee_S"] = res.entropy
            out["osee_eta"] = res.eta
            out["osee_cut"] = c
    except Exception as exc:
        out["error"] = f"{type(exc).__name__}: {exc}"
    return out


@dataclass(frozen=True)
class SweepResult:
    """Grid outputs in row-major order plus the run manifest."""

    config: SweepConfig
    rows: tuple
    manifest: dict
    fits: dict = field(default_factory=dict)

    def column(self, key: str) -> list:
        """Values of one scalar key across non-error rows."""
        return [r[key] for r in self.rows if "error" not in r and key in r]


def _sidecar_name(kind: str, idx) -> str:
    tag = "_".join(f"{i:04d}" for i in idx)
    return f"{kind}_{tag}.csv"


def _write_sidecars(cfg: SweepConfig, row, outdir: str) -> None:
    idx = row["index"]
    if "rapidities" in row:
        beta = row["rapidities"]
        write_csv(os.path.join(outdir, _sidecar_name("rapidities", idx)),
                  ["index", "re_beta", "im_beta"],
                  [[str(k), format_float(b.real), format_float(b.imag)]
                   for k, b in enumerate(beta, start=1)])
    if "cmatrix" in row:
        c = row["cmatrix"]
        n = c.shape[0]
        write_csv(os.path.join(outdir, _sidecar_name("cmatrix", idx)),
                  ["l", "m", "C"],
                  [[str(l + 1), str(m + 1), format_float(c[l, m])]
                   for l in range(n) for m in range(n)])
    if "profile" in row:
        write_csv(os.path.join(outdir, _sidecar_name("profile", idx)),
                  ["r", "C"],
                  [[str(r), format_float(v)] for r, v in row["profile"]])
    if "magnetization" in row:
        write_csv(os.path.join(outdir, _sidecar_name("magnetization", idx)),
                  ["site", "sz"],
                  [[str(m + 1), format_float(v)]
                   for m, v in enumerate(row["magnetization"])])
    if "osee_eta" in row:
        write_csv(os.path.join(outdir, _sidecar_name("osee", idx)),
                  ["cut", "S"] + [f"eta_{j + 1}" for j in range(len(row["osee_eta"]))],
                  [[str(row["osee_cut"]), format_float(row["osee_S"])]
                   + [format_float(e) for e in row["osee_eta"]]])


def _scalar_table(cfg: SweepConfig, rows):
    idx_cols = ["i"] if len(cfg.axes) == 1 else ["i", "j"]
    header = idx_cols + ["n", "gamma", "h", "gl1", "gl2", "gr1", "gr2"]
    obs_of = {"gap": "gap", "c_res": "c_res", "osee_S": "osee"}
    scalars = [c for c in SCALAR_COLUMNS if obs_of[c] in cfg.observables]
    header += scalars + ["error"]
    table = []
    for row in rows:
        spec = _point_spec(cfg, row["index"])
        rec = [str(i) for i in row["index"]]
        rec += [str(spec.n)] + [format_float(v) for v in
                                (spec.gamma, spec.h, spec.gl1, spec.gl2,
                                 spec.gr1, spec.gr2)]
        for c in scalars:
            rec.append(format_float(row[c]) if c in row else "")
        rec.append(row.get("error", ""))
        table.append(rec)
    return header, table


def _manifest(cfg: SweepConfig, timings: dict, warnings: list, status: int) -> dict:
    cfg_dict = cfg.to_dict()
    blob = json.dumps(cfg_dict, sort_keys=True).encode()
    return {
        "config": cfg_dict,
        "config_hash": hashlib.sha256(blob).hexdigest(),
        "version": __version__,
        "created": time.strftime("%Y-%m-%dT%H:%M:%S", time.gmtime()),
        "timings": timings,
        "warnings": warnings,
        "status": status,
    }


def run_sweep(cfg: SweepConfig) -> SweepResult:
    """Evaluate every grid point and persist results when output is set.

    Points run independently (in a process pool when workers > 1) and
    are committed in row-major grid order, so the output is
    deterministic regardless of completion order.
    """
    validate_config(cfg)
    t0 = time.time()
    indices = _grid_indices(cfg)
    tasks = [(idx, astuple(_point_spec(cfg, idx)), cfg.observables,
              cfg.band, cfg.cut) for idx in indices]
    nworkers = min(cfg.workers, len(tasks))
    if nworkers > 1:
        with ProcessPoolExecutor(max_workers=nworkers) as pool:
            rows = list(pool.map(_evaluate_point, tasks, chunksize=8))
    else:
        rows = [_evaluate_point(t) for t in tasks]

    warnings = []
    for row in rows:
        for w in row.get("warnings", []):
            warnings.append(f"point {row['index']}: {w}")
        if "error" in row:
            warnings.append(f"point {row['index']} failed: {row['error']}")
    timings = {"total_s": round(time.time() - t0, 3), "points": len(rows)}
    manifest = _manifest(cfg, timings, warnings, status=0)

    result = SweepResult(config=cfg, rows=tuple(rows), manifest=manifest)
    if cfg.output is not None:
        persist(result)
    return result


def persist(result: SweepResult) -> None:
    """Write table.csv, sidecars, and manifest.json to the output dir."""
    cfg = result.config
    outdir = cfg.output
    os.makedirs(outdir, exist_ok=True)
    header, table = _scalar_table(cfg, result.rows)
    write_csv(os.path.join(outdir, "table.csv"), header, table)
    for row in result.rows:
        if "error" not in row:
            _write_sidecars(cfg, row, outdir)
    manifest = dict(result.manifest)
    if result.fits:
        manifest["fits"] = {k: _fit_summary(v) for k, v in result.fits.items()}
    with open(os.path.join(outdir, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _fit_summary(fit) -> dict:
    if isinstance(fit, str):
        return {"error": fit}
    return {
        "kind": fit.kind,
        "params": list(fit.params),
        "r_squared": fit.r_squared,
        "window": list(fit.window),
        "npoints": fit.npoints,
        "stderr": fit.stderr,
    }


def run_size_scan(cfg: SweepConfig) -> SweepResult:
    """Sweep an n axis and attach gap / entropy scaling fits.

    The gap gets a power-law fit over all sizes (its log-log slope is
    the negated exponent); the half-chain entropy, when requested,
    gets a linear fit over the largest half of the sizes.
    """
    n_axis = next((a for a in cfg.axes if a.name == "n"), None)
    if n_axis is None:
        raise ValueError("size scan requires an n axis")
    sizes = list(n_axis.values)
    if any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise ValueError("size scan requires strictly increasing n values")
    cfg = replace(cfg, observables=frozenset(cfg.observables | {"gap"}))
    result = run_sweep(cfg)

    fits: dict = {}
    ns = [(_point_spec(cfg, r["index"]).n, r) for r in result.rows
          if "error" not in r]
    try:
        fits["gap_power"] = fit_power([n for n, _ in ns],
                                      [r["gap"] for _, r in ns])
    except ValueError as exc:
        fits["gap_power"] = str(exc)
    if "osee" in cfg.observables:
        pts = [(n, r["osee_S"]) for n, r in ns if "osee_S" in r]
        m = max(3, (len(pts) + 1) // 2)
        try:
            fits["osee_linear"] = fit_linear([p[0] for p in pts[-m:]],
                                             [p[1] for p in pts[-m:]])
        except ValueError as exc:
            fits["osee_linear"] = str(exc)

    result = SweepResult(config=result.config, rows=result.rows,
                         manifest=result.manifest, fits=fits)
    if cfg.output is not None:
        persist(result)
    return result
