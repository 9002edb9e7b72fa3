"""Command-line front end.

    pseudosusy spectrum --model scarf2 --p 1.25 --q 0.75 --m 1 --format json
    pseudosusy verify   --model scarf2 --checks pt,intertwine,algebra
    pseudosusy dirac    --model ptosc --m 1
    pseudosusy export   --model scarf2 --what potentials --out pots.csv

Configuration can come from a JSON file (--config); explicit flags override
file values. Reports are written atomically and contain no timestamps, so a
rerun with the same effective config reproduces the output byte for byte.

Exit codes: 0 success, 1 verification-check failure, 2 usage or config
error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import models as mdl
from .discretize import ArgumentError, build_grid, dirac_matrix
from .eigen import ConvergenceError, eigen_dense, eigvec_for
from .spectra import dirac_spectrum, sector_spectrum
from .verify import CHECK_NAMES, run_checks

SCHEMA_VERSION = 1

log = logging.getLogger("pseudosusy")


class ConfigError(ValueError):
    pass


_MODEL_KINDS = ("scarf2", "ptosc", "scalartanh")

_MODEL_KEYS = {"kind", "p", "q", "alpha", "kappa", "c", "lambda", "a", "mass"}
_GRID_KEYS = {"x_max", "n_points"}
_TOP_KEYS = {"schema_version", "model", "grid", "mode", "method", "checks",
             "format", "output", "tol_eig", "tol_match", "max_count", "plots",
             "what", "energy"}


@dataclass
class RunConfig:
    model_kind: str = "scarf2"
    p: float = 1.25
    q: float = 0.75
    alpha: float = 0.4
    kappa: int = 1
    c: float = 0.5
    lam: float = 4.0
    a: float = 0.5
    mass: float = 1.0
    x_max: Optional[float] = None
    n_points: Optional[int] = None
    mode: str = "factored"
    method: str = "auto"
    checks: list = field(default_factory=lambda: list(CHECK_NAMES))
    format: str = "json"
    output: Optional[str] = None
    tol_eig: float = 1e-8
    tol_match: float = 1e-3
    max_count: int = 8
    plots: Optional[str] = None
    what: str = "potentials"
    energy: Optional[float] = None

    def build_model(self) -> mdl.ModelSpec:
        try:
            if self.model_kind == "scarf2":
                return mdl.scarf2(self.p, self.q, self.mass)
            if self.model_kind == "ptosc":
                return mdl.pt_oscillator(self.alpha, self.kappa, self.c, self.mass)
            if self.model_kind == "scalartanh":
                return mdl.scalar_tanh(self.lam, self.a, self.mass)
        except mdl.ModelError as exc:
            raise ConfigError(str(exc)) from exc
        raise ConfigError(f"unknown model {self.model_kind!r}")

    def box(self, model: mdl.ModelSpec) -> tuple[float, int]:
        bx, bn = mdl.default_box(model)
        return (self.x_max if self.x_max is not None else bx,
                self.n_points if self.n_points is not None else bn)

    def effective(self, model: mdl.ModelSpec) -> dict:
        x_max, n_points = self.box(model)
        out = {
            "schema_version": SCHEMA_VERSION,
            "model": {"kind": self.model_kind, "mass": self.mass},
            "grid": {"x_max": x_max, "n_points": n_points},
            "mode": self.mode, "method": self.method,
            "tol_eig": self.tol_eig, "tol_match": self.tol_match,
            "max_count": self.max_count,
        }
        if self.model_kind == "scarf2":
            out["model"].update({"p": self.p, "q": self.q})
        elif self.model_kind == "ptosc":
            out["model"].update({"alpha": self.alpha, "kappa": self.kappa,
                                 "c": self.c})
        else:
            out["model"].update({"lambda": self.lam, "a": self.a})
        return out


def _reject_unknown(d: dict, allowed: set, where: str) -> None:
    unknown = set(d) - allowed
    if unknown:
        raise ConfigError(f"unknown {where} keys: {sorted(unknown)}")


def load_config(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a JSON object")
    _reject_unknown(raw, _TOP_KEYS, "config")
    if "model" in raw:
        _reject_unknown(raw["model"], _MODEL_KEYS, "model")
    if "grid" in raw:
        _reject_unknown(raw["grid"], _GRID_KEYS, "grid")
    return raw


def config_from_sources(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig()
    if getattr(args, "config", None):
        raw = load_config(args.config)
        model = raw.get("model", {})
        if "kind" in model:
            cfg.model_kind = model["kind"]
        for src, dst in (("p", "p"), ("q", "q"), ("alpha", "alpha"),
                         ("kappa", "kappa"), ("c", "c"), ("lambda", "lam"),
                         ("a", "a"), ("mass", "mass")):
            if src in model:
                setattr(cfg, dst, model[src])
        grid = raw.get("grid", {})
        if "x_max" in grid:
            cfg.x_max = float(grid["x_max"])
        if "n_points" in grid:
            cfg.n_points = int(grid["n_points"])
        for key in ("mode", "method", "checks", "format", "output", "tol_eig",
                    "tol_match", "max_count", "plots", "what", "energy"):
            if key in raw:
                setattr(cfg, key if key != "output" else "output", raw[key])
    overrides = {
        "model": "model_kind", "p": "p", "q": "q", "alpha": "alpha",
        "kappa": "kappa", "c": "c", "lam": "lam", "a": "a", "m": "mass",
        "xmax": "x_max", "n": "n_points", "mode": "mode", "method": "method",
        "format": "format", "out": "output", "tol_eig": "tol_eig",
        "tol_match": "tol_match", "max_count": "max_count", "plots": "plots",
        "what": "what", "energy": "energy",
    }
    for flag, attr in overrides.items():
        val = getattr(args, flag, None)
        if val is not None:
            setattr(cfg, attr, val)
    if getattr(args, "checks", None):
        cfg.checks = [c.strip() for c in args.checks.split(",") if c.strip()]
    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig) -> None:
    if cfg.model_kind not in _MODEL_KINDS:
        raise ConfigError(f"model must be one of {_MODEL_KINDS}")
    if cfg.mode not in ("factored", "direct"):
        raise ConfigError("mode must be factored or direct")
    if cfg.method not in ("auto", "qr", "lapack"):
        raise ConfigError("method must be auto, qr or lapack")
    if cfg.format not in ("json", "csv"):
        raise ConfigError("format must be json or csv")
    unknown = [c for c in cfg.checks if c not in CHECK_NAMES]
    if unknown:
        raise ConfigError(f"unknown checks: {unknown}; valid: {list(CHECK_NAMES)}")
    if cfg.n_points is not None and cfg.n_points < 2:
        raise ConfigError("n_points must be >= 2")
    if cfg.x_max is not None and cfg.x_max <= 0:
        raise ConfigError("x_max must be > 0")
    if cfg.what not in ("potentials", "eigenvector"):
        raise ConfigError("what must be potentials or eigenvector")


# -- output helpers ------------------------------------------------------------

def _atomic_write(path: str, data: str) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(data)
    os.replace(tmp, path)


def _emit(path: Optional[str], data: str) -> None:
    if path:
        _atomic_write(path, data)
        log.info("wrote %s", path)
    else:
        sys.stdout.write(data)


def _json_dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _fmt(v: float) -> str:
    return f"{v:.17g}"


def _nearest_gaps(levels, analytic):
    if analytic is None or not levels:
        return None
    gaps = []
    arr = np.asarray(analytic, dtype=float)
    for lv in levels:
        gaps.append(float(np.min(np.abs(arr - lv))) if len(arr) else None)
    return gaps


# -- commands -------------------------------------------------------------------

def cmd_spectrum(cfg: RunConfig) -> int:
    model = cfg.build_model()
    x_max, n_points = cfg.box(model)
    results = {}
    for i in (1, 2):
        res = sector_spectrum(model, x_max, n_points, i,
                              tol_match=cfg.tol_match, method=cfg.method,
                              mode=cfg.mode)
        results[i] = res
    payload = cfg.effective(model)
    payload["spectra"] = {
        "sector1": results[1].to_dict(),
        "sector2": results[2].to_dict(),
        "dirac": None,
    }
    payload["analytic"] = {
        "sector1": results[1].analytic,
        "sector2": results[2].analytic,
    }
    payload["gaps"] = {
        f"sector{i}": _nearest_gaps(results[i].levels, results[i].analytic)
        for i in (1, 2)
    }
    if cfg.format == "json":
        _emit(cfg.output, _json_dumps(payload))
    else:
        lines = ["sector,index,level,count,analytic,gap"]
        for i in (1, 2):
            res = results[i]
            gaps = _nearest_gaps(res.levels, res.analytic)
            for k, (lv, ct) in enumerate(zip(res.levels, res.level_counts)):
                ana = gap = ""
                if res.analytic is not None:
                    arr = np.asarray(res.analytic, dtype=float)
                    if len(arr):
                        ana = _fmt(float(arr[np.argmin(np.abs(arr - lv))]))
                        gap = _fmt(gaps[k])
                lines.append(f"{i},{k},{_fmt(lv)},{ct},{ana},{gap}")
        _emit(cfg.output, "\n".join(lines) + "\n")
    if cfg.plots:
        _render_spectrum_plots(cfg, model, x_max, n_points, list(results.values()))
    return 0


def cmd_verify(cfg: RunConfig) -> int:
    model = cfg.build_model()
    x_max, n_points = cfg.box(model)
    grid = build_grid(x_max, n_points)
    report = run_checks(model, grid, cfg.checks, method=cfg.method,
                        tol_match=cfg.tol_match)
    payload = cfg.effective(model)
    payload["checks"] = [c.to_dict() for c in report.checks]
    payload["flags"] = report.flags
    payload["pass"] = report.passed
    payload["spectra"] = {"sector1": None, "sector2": None, "dirac": None}
    payload["analytic"] = None
    _emit(cfg.output, _json_dumps(payload))
    if cfg.plots:
        os.makedirs(cfg.plots, exist_ok=True)
        from .report import render_check_residuals
        render_check_residuals(report, os.path.join(cfg.plots, "verify_residuals.png"))
    return 0 if report.passed else 1


def cmd_dirac(cfg: RunConfig) -> int:
    model = cfg.build_model()
    if model.sector != mdl.PSEUDOSCALAR:
        raise ConfigError("the dirac command needs a pseudoscalar model; "
                          "the scalar sector works with the decoupled pair")
    x_max, n_points = cfg.box(model)
    res = dirac_spectrum(model, x_max, n_points, tol_match=cfg.tol_match,
                         method=cfg.method)
    analytic = None
    if res.analytic_positive is not None:
        analytic = sorted(res.analytic_positive + res.analytic_negative)
    payload = cfg.effective(model)
    payload["spectra"] = {"sector1": None, "sector2": None,
                          "dirac": res.to_dict()}
    payload["analytic"] = {"dirac": analytic}
    payload["gaps"] = {"dirac": _nearest_gaps(res.levels, analytic)}
    if cfg.format == "json":
        _emit(cfg.output, _json_dumps(payload))
    else:
        gaps = _nearest_gaps(res.levels, analytic)
        lines = ["index,level,count,analytic,gap"]
        for k, (lv, ct) in enumerate(zip(res.levels, res.level_counts)):
            ana = gap = ""
            if analytic:
                arr = np.asarray(analytic, dtype=float)
                ana = _fmt(float(arr[np.argmin(np.abs(arr - lv))]))
                gap = _fmt(gaps[k])
            lines.append(f"{k},{_fmt(lv)},{ct},{ana},{gap}")
        _emit(cfg.output, "\n".join(lines) + "\n")
    if cfg.plots:
        os.makedirs(cfg.plots, exist_ok=True)
        from .report import render_dirac_levels
        render_dirac_levels(res, os.path.join(cfg.plots, "dirac_levels.png"))
    return 0


def cmd_export(cfg: RunConfig) -> int:
    model = cfg.build_model()
    x_max, n_points = cfg.box(model)
    grid = build_grid(x_max, n_points)
    if cfg.what == "potentials":
        w = np.atleast_1d(mdl.superpotential_value(model, grid.x))
        u1 = np.atleast_1d(mdl.partner_potential(model, 1, grid.x))
        u2 = np.atleast_1d(mdl.partner_potential(model, 2, grid.x))
        lines = ["x,re_W,im_W,re_U1,im_U1,re_U2,im_U2"]
        for j in range(grid.n_points):
            lines.append(",".join(_fmt(v) for v in (
                grid.x[j], w[j].real, w[j].imag, u1[j].real, u1[j].imag,
                u2[j].real, u2[j].imag)))
        _emit(cfg.output, "\n".join(lines) + "\n")
    else:
        if model.sector != mdl.PSEUDOSCALAR:
            raise ConfigError("eigenvector export targets the Dirac spinor; "
                              "use a pseudoscalar model")
        a = dirac_matrix(model, grid)
        spec = eigen_dense(a, method=cfg.method, meta=grid.meta())
        target = cfg.energy if cfg.energy is not None else model.mass
        vals = spec.values
        lam = vals[int(np.argmin(np.abs(vals - target)))]
        v = eigvec_for(a, lam)
        lines = [f"# dirac eigenvector at E = {_fmt(lam.real)} + {_fmt(lam.imag)}i",
                 "component,index,x,re,im"]
        n = grid.n_points
        for j in range(n):
            lines.append(f"upper,{j},{_fmt(grid.x[j])},{_fmt(v[j].real)},{_fmt(v[j].imag)}")
        for j in range(n):
            lines.append(f"lower,{j},{_fmt(grid.x[j])},{_fmt(v[n + j].real)},{_fmt(v[n + j].imag)}")
        _emit(cfg.output, "\n".join(lines) + "\n")
    if cfg.plots:
        os.makedirs(cfg.plots, exist_ok=True)
        from .report import render_potentials
        render_potentials(model, grid, os.path.join(cfg.plots, "potentials.png"))
    return 0


def _render_spectrum_plots(cfg, model, x_max, n_points, results) -> None:
    os.makedirs(cfg.plots, exist_ok=True)
    from .report import render_potentials, render_sector_levels
    grid = build_grid(x_max, min(n_points, 400))
    render_potentials(model, grid, os.path.join(cfg.plots, "potentials.png"))
    render_sector_levels(results, os.path.join(cfg.plots, "sector_levels.png"))


# -- entry point -------------------------------------------------------------------

def _add_common(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--config", help="JSON config file")
    sp.add_argument("--model", choices=_MODEL_KINDS)
    sp.add_argument("--p", type=float)
    sp.add_argument("--q", type=float)
    sp.add_argument("--alpha", type=float)
    sp.add_argument("--kappa", type=int)
    sp.add_argument("--c", type=float)
    sp.add_argument("--lambda", dest="lam", type=float)
    sp.add_argument("--a", type=float)
    sp.add_argument("--m", type=float, help="fermion mass")
    sp.add_argument("--xmax", type=float)
    sp.add_argument("--n", type=int, help="interior grid points")
    sp.add_argument("--mode", choices=("factored", "direct"))
    sp.add_argument("--method", choices=("auto", "qr", "lapack"),
                    help="eigensolver backend")
    sp.add_argument("--format", choices=("json", "csv"))
    sp.add_argument("--out", help="output path (stdout when omitted)")
    sp.add_argument("--tol-eig", dest="tol_eig", type=float)
    sp.add_argument("--tol-match", dest="tol_match", type=float)
    sp.add_argument("--max-count", dest="max_count", type=int)
    sp.add_argument("--plots", help="directory for rendered figures")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pseudosusy",
        description="Spectra and factorization identities for 1D Dirac "
                    "operators with non-Hermitian couplings")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in (("spectrum", cmd_spectrum), ("verify", cmd_verify),
                     ("dirac", cmd_dirac), ("export", cmd_export)):
        sp = sub.add_parser(name)
        _add_common(sp)
        sp.set_defaults(fn=fn)
        if name == "verify":
            sp.add_argument("--checks", help="comma-separated subset of: "
                                             + ",".join(CHECK_NAMES))
        if name == "export":
            sp.add_argument("--what", choices=("potentials", "eigenvector"))
            sp.add_argument("--energy", type=float,
                            help="target Dirac energy for eigenvector export")
    return parser


def main(argv=None) -> int:
    level = os.environ.get("PSEUDOSUSY_LOG", "error").lower()
    logging.basicConfig(
        level={"error": logging.ERROR, "info": logging.INFO,
               "debug": logging.DEBUG}.get(level, logging.ERROR),
        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_sources(args)
        return args.fn(cfg)
    except (ConfigError, ArgumentError, mdl.ModelError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (ConvergenceError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
