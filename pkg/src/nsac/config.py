"""JSON run configuration: parsing, defaults and validation."""
import copy
import json
import os

from . import thermo
from .errors import ConfigError, NSACError
from .grid import GridSpec
from .ics import preset_params
from .phasefield import MobilityMode, PhaseParams
from .solver import CAPILLARY_FORMS, SimConfig

DEFAULT_OUT = "nsac_out"

_TOP = {"grid", "eos", "viscosity", "eps", "mobility", "ic", "t_end", "cfl_safety",
        "snapshot_interval", "output_dir", "pair_steps", "diagnostics_every", "trace_delta",
        "quad_L", "rho_floor", "capillary_form"}
_GRID = {"dim", "nx", "ny", "lx", "ly", "cells_per_eps"}
_EOS = {"kind", "R", "cv", "a"}
_VISC = {"nu", "lambda", "k"}
_REQUIRED = ("grid", "eps", "mobility", "ic", "t_end")


def output_root():
    return os.environ.get("NSAC_OUT", DEFAULT_OUT)


def _reject_unknown(section, allowed, prefix):
    if not isinstance(section, dict):
        raise ConfigError(f"'{prefix or 'config'}' must be a JSON object")
    for key in section:
        if key not in allowed:
            name = f"{prefix}.{key}" if prefix else key
            raise ConfigError(f"unknown key '{name}'")


def _number(d, key, name, positive=False, nonneg=False):
    val = d[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigError(f"{name} must be a number")
    if positive and not val > 0:
        raise ConfigError(f"{name} must be > 0")
    if nonneg and not val >= 0:
        raise ConfigError(f"{name} must be >= 0")
    return float(val)


def resolve(raw):
    """Apply defaults and validate a config dictionary; returns a new dict."""
    _reject_unknown(raw, _TOP, "")
    for key in _REQUIRED:
        if key not in raw:
            raise ConfigError(f"missing required key '{key}'")
    cfg = copy.deepcopy(raw)

    eps = _number(cfg, "eps", "eps", positive=True)
    if cfg["mobility"] not in ("C1", "C2"):
        raise ConfigError("mobility must be 'C1' or 'C2'")
    _number(cfg, "t_end", "t_end", nonneg=True)

    g = cfg["grid"]
    _reject_unknown(g, _GRID, "grid")
    g.setdefault("dim", 1)
    if g["dim"] not in (1, 2):
        raise ConfigError("grid.dim must be 1 or 2")
    if "lx" not in g:
        raise ConfigError("missing required key 'grid.lx'")
    lx = _number(g, "lx", "grid.lx", positive=True)
    g.setdefault("cells_per_eps", 8)
    cpe = _number(g, "cells_per_eps", "grid.cells_per_eps", positive=True)
    g.setdefault("nx", int(round(lx * cpe / eps)))
    if g["dim"] == 2:
        g.setdefault("ly", lx)
        ly = _number(g, "ly", "grid.ly", positive=True)
        g.setdefault("ny", int(round(ly * cpe / eps)))
    else:
        if "ny" in g and g["ny"] != 1:
            raise ConfigError("grid.ny must be 1 (or absent) for dim 1")
        g.pop("ly", None)
        g["ny"] = 1
    for key in ("nx", "ny"):
        if not isinstance(g[key], int) or isinstance(g[key], bool):
            raise ConfigError(f"grid.{key} must be an integer")
    if g["nx"] < 8 or (g["dim"] == 2 and g["ny"] < 8):
        raise ConfigError("grid.nx and grid.ny must be >= 8")

    e = cfg.setdefault("eos", {})
    _reject_unknown(e, _EOS, "eos")
    e.setdefault("kind", "ideal")
    e.setdefault("R", 1.0)
    e.setdefault("cv", 1.0)
    e.setdefault("a", 0.0)
    if e["kind"] not in thermo.EOS_KINDS:
        raise ConfigError(f"eos.kind must be one of {list(thermo.EOS_KINDS)}")
    _number(e, "R", "eos.R", positive=True)
    _number(e, "cv", "eos.cv", positive=True)
    _number(e, "a", "eos.a", nonneg=True)

    v = cfg.setdefault("viscosity", {})
    _reject_unknown(v, _VISC, "viscosity")
    v.setdefault("nu", 0.1)
    v.setdefault("lambda", 0.1)
    v.setdefault("k", 0.1)
    for key in ("nu", "lambda", "k"):
        _number(v, key, f"viscosity.{key}", positive=True)

    if not isinstance(cfg["ic"], dict):
        raise ConfigError("ic must be a JSON object")
    preset_params(cfg["ic"])

    cfg.setdefault("cfl_safety", 0.4)
    c = _number(cfg, "cfl_safety", "cfl_safety")
    if not 0 < c < 1:
        raise ConfigError("cfl_safety must lie in (0, 1)")
    cfg.setdefault("snapshot_interval", 0.0)
    _number(cfg, "snapshot_interval", "snapshot_interval", nonneg=True)
    cfg.setdefault("output_dir", os.path.join(output_root(), "run"))
    cfg.setdefault("pair_steps", 0)
    cfg.setdefault("diagnostics_every", 10)
    for key in ("pair_steps", "diagnostics_every"):
        if not isinstance(cfg[key], int) or cfg[key] < 0:
            raise ConfigError(f"{key} must be a non-negative integer")
    cfg.setdefault("trace_delta", 4.0 * eps)
    _number(cfg, "trace_delta", "trace_delta", positive=True)
    cfg.setdefault("quad_L", 10.0)
    if _number(cfg, "quad_L", "quad_L") < 8:
        raise ConfigError("quad_L must be >= 8")
    cfg.setdefault("rho_floor", 1e-6)
    _number(cfg, "rho_floor", "rho_floor", positive=True)
    cfg.setdefault("capillary_form", "potential")
    if cfg["capillary_form"] not in CAPILLARY_FORMS:
        raise ConfigError(f"capillary_form must be one of {list(CAPILLARY_FORMS)}")
    return cfg


def build(raw):
    """SimConfig from a config dictionary (defaults applied)."""
    cfg = resolve(raw)
    g = cfg["grid"]
    try:
        grid = (GridSpec.line(g["nx"], g["lx"]) if g["dim"] == 1
                else GridSpec.plane(g["nx"], g["ny"], g["lx"], g["ly"]))
        e = cfg["eos"]
        eos = thermo.EosModel(e["kind"], float(e["R"]), float(e["cv"]), float(e["a"]))
        v = cfg["viscosity"]
        visc = thermo.ViscosityHeat(float(v["nu"]), float(v["lambda"]), float(v["k"]), dim=g["dim"])
        phase = PhaseParams(float(cfg["eps"]), MobilityMode(cfg["mobility"]))
        return SimConfig(grid=grid, eos=eos, visc=visc, phase=phase, ic=dict(cfg["ic"]),
                         t_end=float(cfg["t_end"]), cfl_safety=float(cfg["cfl_safety"]),
                         snapshot_interval=float(cfg["snapshot_interval"]),
                         output_dir=str(cfg["output_dir"]), pair_steps=int(cfg["pair_steps"]),
                         diagnostics_every=int(cfg["diagnostics_every"]),
                         trace_delta=float(cfg["trace_delta"]), quad_L=float(cfg["quad_L"]),
                         rho_floor=float(cfg["rho_floor"]),
                         capillary_form=cfg["capillary_form"], source=cfg)
    except ConfigError:
        raise
    except (NSACError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def parse_config(text):
    """Parse a UTF-8 JSON config document into a validated SimConfig."""
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    return build(raw)
