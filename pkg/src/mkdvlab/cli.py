"""Batch command-line front end.

    mkdvlab <subcommand> [--config FILE] [--out DIR] [--<key> VALUE ...]

Every field of :class:`RunConfig` is a flag (underscores become dashes).
Values come from the command line, then the JSON config file, then the
defaults.  The output directory defaults to $MKDVLAB_OUT, else ./mkdvlab_out.
Exit status: 0 ok, 1 input error, 2 numerical failure.
"""
from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import logging
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .errors import InputError, NumericalError
from .io import write_csv, write_json, write_svg

logger = logging.getLogger("mkdvlab")

SUBCOMMANDS = ("scatter", "evolve", "inverse", "asympt", "pii", "compare")
OUT_ENV = "MKDVLAB_OUT"


@dataclass
class RunConfig:
    subcommand: str = "scatter"
    # initial data: a preset or a two-column CSV (x, y0)
    potential: str = "sech"
    potential_csv: str = ""
    amplitude: float = 0.1
    width: float = 1.0
    center: float = 0.0
    x_min: float = -40.0
    x_max: float = 40.0
    spacing: float = 0.01
    # reflection coefficient: computed, or read from a CSV written by `scatter`
    reflection_csv: str = ""
    z_max: float = 0.0
    n_z: int = 1025
    scatter_tol: float = 1e-10
    # direct solver
    n_modes: int = 16384
    domain_length: float = 400.0
    dt: float = 0.1
    drift_rate: float = 2e-12
    t_end: float = 10.0
    store_times: list = field(default_factory=list)
    # evaluation points: the grid x_values x t_values
    x_values: list = field(default_factory=lambda: [-2.0, -1.0, 0.0, 1.0, 2.0])
    t_values: list = field(default_factory=lambda: [1.0])
    # RH solver
    rh_tol: float = 1e-10
    ppw: float = 8.0
    max_nodes: int = 2_000_000
    # Painleve II
    k: float = float("nan")
    s_min: float = -40.0
    s_max: float = 0.0
    pii_ds: float = 0.005
    # regions
    M: float = 1.0
    C: float = 1.0
    tau_lo: float = 1.0
    tau_hi: float = 10.0
    c: float = 1.0
    t_min: float = 1.0
    # execution and output
    workers: int = 1
    plots: bool = True
    out: str = ""

    def validate(self) -> None:
        if self.subcommand not in SUBCOMMANDS:
            raise InputError(f"unknown subcommand {self.subcommand!r}")
        positive = ["spacing", "scatter_tol", "domain_length", "dt", "drift_rate", "rh_tol",
                    "ppw", "pii_ds", "M", "C", "tau_lo", "tau_hi", "c", "t_min"]
        for name in positive:
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and v > 0 and math.isfinite(v)):
                raise InputError(f"{name} must be a positive number, got {v!r}")
        if self.tau_lo >= self.tau_hi:
            raise InputError("tau_lo must be below tau_hi")
        if self.x_max <= self.x_min:
            raise InputError("x_max must exceed x_min")
        if self.n_modes < 16 or self.n_modes & (self.n_modes - 1):
            raise InputError("n_modes must be a power of two")
        if self.workers < 1:
            raise InputError("workers must be >= 1")
        for name in ("potential_csv", "reflection_csv"):
            path = getattr(self, name)
            if path and not Path(path).is_file():
                raise InputError(f"{name}: no such file {path}")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


_FIELDS = {f.name: f for f in dataclasses.fields(RunConfig)}


def _parse_list(text) -> list:
    if isinstance(text, list):
        return [float(v) for v in text]
    text = str(text).strip()
    if not text:
        return []
    return [float(v) for v in text.split(",")]


def _parse_bool(text) -> bool:
    if isinstance(text, bool):
        return text
    low = str(text).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise InputError(f"not a boolean: {text!r}")


def _coerce(name: str, value):
    default = getattr(RunConfig(), name)
    try:
        if isinstance(default, bool):
            return _parse_bool(value)
        if isinstance(default, list):
            return _parse_list(value)
        if isinstance(default, int):
            return int(value)
        if isinstance(default, float):
            return float(value)
        return str(value)
    except (TypeError, ValueError) as exc:
        raise InputError(f"bad value for {name}: {value!r}") from exc


class _Parser(argparse.ArgumentParser):
    # usage errors are input errors (exit 1), not argparse's default status 2
    def error(self, message):
        raise InputError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mkdvlab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"mkdvlab {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name, help=f"run the {name} step")
        p.add_argument("--config", help="JSON file of RunConfig keys")
        p.add_argument("-v", "--verbose", action="store_true")
        for fname in _FIELDS:
            if fname == "subcommand":
                continue
            p.add_argument("--" + fname.replace("_", "-"), dest=fname, default=None)
    return parser


def load_config(argv=None) -> tuple[RunConfig, bool]:
    args = build_parser().parse_args(argv)
    values = {}
    if args.config:
        try:
            with open(args.config) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(data, dict):
            raise InputError("config file must hold a JSON object")
        unknown = set(data) - set(_FIELDS)
        if unknown:
            raise InputError(f"unknown config keys: {sorted(unknown)}")
        values.update({k: _coerce(k, v) for k, v in data.items() if k != "subcommand"})
    for fname in _FIELDS:
        if fname != "subcommand" and getattr(args, fname, None) is not None:
            values[fname] = _coerce(fname, getattr(args, fname))
    cfg = RunConfig(subcommand=args.subcommand, **values)
    if not cfg.out:
        cfg.out = os.environ.get(OUT_ENV, "mkdvlab_out")
    cfg.validate()
    return cfg, args.verbose


# --- pipeline pieces ----------------------------------------------------------

def _potential(cfg: RunConfig):
    from .scattering import potential_from_csv, preset_potential

    if cfg.potential_csv:
        return potential_from_csv(cfg.potential_csv)
    return preset_potential(cfg.potential, cfg.amplitude, cfg.width, cfg.center,
                            cfg.x_min, cfg.x_max, cfg.spacing)


def _periodic(cfg: RunConfig):
    from .mkdv_direct import periodic_potential
    from .scattering import SampledPotential

    h = cfg.domain_length / cfg.n_modes
    if cfg.potential_csv:
        src = _potential(cfg)
        x = -0.5 * cfg.domain_length + h * np.arange(cfg.n_modes)
        vals = np.interp(x, src.x, src.values, left=0.0, right=0.0)
        return SampledPotential(float(x[0]), h, vals, label=src.label)
    return periodic_potential(cfg.potential, cfg.amplitude, cfg.n_modes, h,
                              width=cfg.width, center=cfg.center)


def _reflection(cfg: RunConfig):
    from .scattering import forward_scatter, reflection_from_csv, symmetric_grid

    if cfg.reflection_csv:
        return reflection_from_csv(cfg.reflection_csv)
    y0 = _potential(cfg)
    grid = symmetric_grid(cfg.z_max, cfg.n_z) if cfg.z_max > 0 else None
    return forward_scatter(y0, grid, tol=cfg.scatter_tol, n_points=cfg.n_z)


def _rh_cfg(cfg: RunConfig):
    from .inverse_rh import RHConfig

    return RHConfig(tol=cfg.rh_tol, ppw=cfg.ppw, max_nodes=cfg.max_nodes)


def _points(cfg: RunConfig) -> list:
    if not cfg.x_values or not cfg.t_values:
        raise InputError("x_values and t_values must be non-empty")
    return [(x, t) for t in cfg.t_values for x in cfg.x_values]


def _profile(cfg: RunConfig, rc=None, s_min=None):
    from .compare import default_k
    from .painleve import PIIConfig, solve_pii

    k = cfg.k
    if math.isnan(k):
        if rc is None:
            raise InputError("pii needs --k (or initial data to take k = i r(0))")
        k = default_k(rc)
    s_max = cfg.s_max if cfg.s_max > 0 else None
    return solve_pii(k, cfg.s_min if s_min is None else s_min, s_max, PIIConfig(ds=cfg.pii_ds))


class Outputs:
    """Files written by one run; removed together on failure."""

    def __init__(self, root: Path):
        self.root = root
        self.files: list[Path] = []

    def path(self, name: str) -> Path:
        p = self.root / name
        self.files.append(p)
        return p

    def cleanup(self) -> None:
        for p in self.files:
            try:
                p.unlink()
            except FileNotFoundError:
                pass

    def digests(self) -> dict:
        out = {}
        for p in self.files:
            if p.exists():
                out[p.name] = hashlib.sha256(p.read_bytes()).hexdigest()
        return out


def cmd_scatter(cfg: RunConfig, out: Outputs) -> dict:
    y0 = _potential(cfg)
    rc = _reflection(cfg)
    rc.to_csv(out.path("reflection.csv"))
    if cfg.plots:
        write_svg(out.path("reflection.svg"), [("|r|", rc.zgrid, np.abs(rc.values))],
                  title="reflection coefficient", xlabel="z", ylabel="|r(z)|")
    return {"potential_hash": y0.digest(), "sup_abs_r": rc.sup_abs(),
            "symmetry_residual": rc.symmetry_residual(), "error_estimate": rc.error_estimate}


def _evolve(cfg: RunConfig, t_end: float, store):
    from .mkdv_direct import DirectConfig, evolve

    y0 = _periodic(cfg)
    dcfg = DirectConfig(dt=cfg.dt, drift_rate=cfg.drift_rate)
    return y0, evolve(y0, t_end, dcfg, store_times=store)


def cmd_evolve(cfg: RunConfig, out: Outputs) -> dict:
    store = sorted(set(cfg.store_times) | {cfg.t_end}) if cfg.store_times else [cfg.t_end]
    _, traj = _evolve(cfg, cfg.t_end, store)
    for t, y in zip(traj.times, traj.fields):
        write_csv(out.path(f"snapshot_t{t:g}.csv"), ["x", "y"], [traj.x, y])
    write_csv(out.path("invariants.csv"), ["t", "mass", "l2norm"],
              [traj.times, traj.mass, traj.l2norm])
    if cfg.plots:
        series = [(f"t={t:g}", traj.x, y) for t, y in zip(traj.times, traj.fields)]
        write_svg(out.path("snapshots.svg"), series, title="direct solver", xlabel="x", ylabel="y")
    return {"mass_drift": traj.mass_drift(), "l2_drift": traj.l2_drift(),
            "domain_limited": traj.domain_limited, "steps": traj.steps}


def cmd_inverse(cfg: RunConfig, out: Outputs) -> dict:
    from .compare import rh_points
    from .inverse_rh import write_records

    rc = _reflection(cfg)
    recs = rh_points(rc, _points(cfg), _rh_cfg(cfg), cfg.workers)
    write_records(out.path("inverse.csv"), recs)
    return {"points": len(recs), "max_residual": max(r.residual_norm for r in recs)}


def cmd_asympt(cfg: RunConfig, out: Outputs) -> dict:
    from .regions import RegionConfig, predict, write_predictions

    rc = _reflection(cfg)
    rcfg = RegionConfig(cfg.M, cfg.C, cfg.tau_lo, cfg.tau_hi, cfg.c, cfg.t_min)
    pts = _points(cfg)
    # the profile must reach the most negative similarity variable in use
    s_need = min([x / (3 * t) ** (1 / 3) for x, t in pts if t > 0] + [cfg.s_min])
    prof = _profile(cfg, rc, s_min=min(cfg.s_min, s_need - 1.0))
    preds = [predict(x, t, rc, prof, rcfg) for x, t in pts]
    write_predictions(out.path("asymptotics.csv"), preds)
    counts = {}
    for p in preds:
        counts[p.region] = counts.get(p.region, 0) + 1
    return {"points": len(preds), "regions": counts, "k": prof.k}


def cmd_pii(cfg: RunConfig, out: Outputs) -> dict:
    rc = None if not math.isnan(cfg.k) else _reflection(cfg)
    prof = _profile(cfg, rc)
    prof.to_csv(out.path("painleve.csv"))
    if cfg.plots:
        write_svg(out.path("painleve.svg"), [(f"k={prof.k:.6g}", prof.sgrid, prof.p)],
                  title="Painleve II", xlabel="s", ylabel="p(s)")
    return {"k": prof.k, "residual_norm": prof.residual_norm, "p0": float(prof(0.0))
            if prof.s_min <= 0 <= prof.s_max else None}


def cmd_compare(cfg: RunConfig, out: Outputs) -> dict:
    from .compare import rh_points
    from .regions import RegionConfig, predict

    pts = _points(cfg)
    rc = _reflection(cfg)
    recs = rh_points(rc, pts, _rh_cfg(cfg), cfg.workers)
    positive = sorted({t for _, t in pts if t > 0})
    y0p, traj = (None, None)
    if positive:
        y0p, traj = _evolve(cfg, positive[-1], positive)
    else:
        y0p = _periodic(cfg)
    rcfg = RegionConfig(cfg.M, cfg.C, cfg.tau_lo, cfg.tau_hi, cfg.c, cfg.t_min)
    s_need = min([x / (3 * t) ** (1 / 3) for x, t in pts if t > 0] + [cfg.s_min])
    prof = _profile(cfg, rc, s_min=min(cfg.s_min, s_need - 1.0)) if positive else None
    y0 = _potential(cfg)
    rows = []
    for (x, t), rec in zip(pts, recs):
        if t == 0:
            yd = float(y0.source(np.array([x]))[0]) if y0.source else float(np.interp(x, y0.x, y0.values))
        else:
            yd = float(traj.value([x], t)[0])
        region, ya = "", math.nan
        if t >= cfg.t_min:
            pred = predict(x, t, rc, prof, rcfg)
            region, ya = pred.region, pred.value
        rows.append((x, t, yd, rec.y_rh, ya, region, abs(rec.y_rh - yd), abs(ya - yd)))
    cols = [list(c) for c in zip(*rows)]
    header = ["x", "t", "y_direct", "y_rh", "y_asym", "region", "err_rh", "err_asym"]
    write_csv(out.path("compare.csv"), header, cols)
    if cfg.plots:
        for t in sorted({t for _, t in pts}):
            sel = [r for r in rows if r[1] == t]
            xs = [r[0] for r in sel]
            series = [("direct", xs, [r[2] for r in sel]), ("RH", xs, [r[3] for r in sel])]
            if any(math.isfinite(r[4]) for r in sel):
                series.append(("asymptotic", xs, [r[4] for r in sel]))
            write_svg(out.path(f"compare_t{t:g}.svg"), series, title=f"t = {t:g}",
                      xlabel="x", ylabel="y")
    summary = {"max_err_rh": max(r[6] for r in rows), "points": len(rows)}
    if traj is not None:
        summary.update(mass_drift=traj.mass_drift(), l2_drift=traj.l2_drift(),
                       domain_limited=traj.domain_limited)
    return summary


COMMANDS = {"scatter": cmd_scatter, "evolve": cmd_evolve, "inverse": cmd_inverse,
            "asympt": cmd_asympt, "pii": cmd_pii, "compare": cmd_compare}


def run(cfg: RunConfig) -> int:
    root = Path(cfg.out)
    try:
        root.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        logger.error("cannot create output directory %s: %s", root, exc)
        return 1
    if not os.access(root, os.W_OK):
        logger.error("output directory %s is not writable", root)
        return 1
    out = Outputs(root)
    try:
        summary = COMMANDS[cfg.subcommand](cfg, out)
        manifest = {"version": __version__, "config": cfg.to_dict(), "summary": summary,
                    "outputs": out.digests()}
        write_json(out.path("manifest.json"), manifest)
    except InputError as exc:
        out.cleanup()
        logger.error("input error: %s", exc)
        return 1
    except NumericalError as exc:
        out.cleanup()
        logger.error("numerical failure: %s", exc)
        return 2
    except BaseException:
        out.cleanup()
        raise
    for key, val in summary.items():
        logger.info("%s: %s", key, val)
    return 0


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg, verbose = load_config(argv)
    except InputError as exc:
        logger.error("input error: %s", exc)
        return 1
    if verbose:
        logging.getLogger().setLevel(logging.DEBUG)
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
