"""
Quantitative checks of the sharp-interface limit on simulation output:
profile shape, interface jump conditions, bulk residuals away from the layer,
eps-sweep rate fits, the curvature-driven bubble law and the Laplace law.
"""
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import grid as G
from . import interface_geom as ig
from . import io
from . import thermo
from .errors import BubbleVanishedError, EmptyMaskError, NSACError, PreconditionError
from .phasefield import SIGMA, SQRT2, MobilityMode

EXACT_FLOOR = 1e-13
CONVERGENT_SLOPE = 0.5
BULK_EXCLUSION = 6.0


def profile_error(state, sdf, eps):
    """RMS of phi - tanh(d / (sqrt(2) eps)) over the valid band of ``sdf``."""
    mask = sdf.mask
    if not mask.any():
        raise EmptyMaskError("signed-distance band contains no cells")
    diff = state.phi[mask] - np.tanh(sdf.d[mask] / (SQRT2 * eps))
    return float(np.sqrt(np.mean(diff * diff)))


@dataclass
class JumpRecord:
    """Per-sample jump data; arrays have one entry per interface sample."""

    mode: MobilityMode
    samples: ig.InterfaceSamples
    traces: ig.Traces
    u_jump: np.ndarray
    theta_jump: np.ndarray
    rho_jump: np.ndarray
    rho_mean: np.ndarray
    stress_jump: np.ndarray          # (m, dim)
    target: np.ndarray               # sigma kappa n, (m, dim)
    stress_residual: np.ndarray
    slip: np.ndarray                 # V_n - mean(u).n
    kinematic: np.ndarray
    kappa_off_S: np.ndarray
    in_S: np.ndarray
    tau_rho: np.ndarray

    @property
    def pressure_jump(self):
        """p^- - p^+ per sample."""
        return self.traces.p[1] - self.traces.p[0]


def trace_noise(state, samples, delta, eps, visc, eos):
    """Trace-extrapolation noise for a uniform density at the same samples."""
    flat = ig.one_sided_traces(_uniform_like(state), samples, delta, eps, visc, eos)
    return float(np.max(np.abs(flat.jump("rho"))))


def _uniform_like(state):
    from .solver import State

    rho = np.full_like(state.rho, float(np.mean(state.rho)))
    theta = np.full_like(state.theta, float(np.mean(state.theta)))
    return State(rho, np.zeros_like(state.u), state.phi, theta, state.t, state.grid)


def check_jumps(state1, state2, cfg, mode, sigma=SIGMA, delta=None, samples=None):
    """Jump conditions across the zero level set of ``state1.phi``.

    ``state2`` is a later snapshot used only for the normal velocity.
    """
    mode = MobilityMode(mode)
    grid = state1.grid
    delta = cfg.trace_delta if delta is None else delta
    if samples is None:
        samples = ig.extract_interface(state1.phi, grid)
    ig.geometry(state1.phi, grid, samples)
    ig.normal_velocity(samples, state1.phi, state2.phi, state2.t - state1.t, grid)
    tr = ig.one_sided_traces(state1, samples, delta, cfg.eps, cfg.visc, cfg.eos)

    n = samples.n
    u_jump = np.linalg.norm(tr.jump("u"), axis=1)
    theta_jump = np.abs(tr.jump("theta"))
    rho_jump = np.abs(tr.jump("rho"))
    rho_mean = 0.5 * (tr.rho[0] + tr.rho[1])
    stress_jump = np.einsum("mab,mb->ma", tr.stress[0] - tr.stress[1], n)
    target = sigma * samples.kappa[:, None] * n
    stress_res = np.linalg.norm(stress_jump - target, axis=1)
    un = np.sum(0.5 * (tr.u[0] + tr.u[1]) * n, axis=1)
    slip = samples.Vn - un

    noise = trace_noise(state1, samples, delta, cfg.eps, cfg.visc, cfg.eos)
    tau = np.maximum(0.05 * np.abs(rho_mean), 3.0 * noise)
    in_S = rho_jump <= tau
    kappa_off = np.where(in_S, 0.0, np.abs(samples.kappa))
    if mode is MobilityMode.C1:
        kinematic = np.abs(slip)
    else:
        kinematic = np.where(in_S, np.abs(rho_mean ** 2 * slip + samples.kappa), np.abs(slip))
    return JumpRecord(mode, samples, tr, u_jump, theta_jump, rho_jump, rho_mean, stress_jump, target,
                      stress_res, slip, kinematic, kappa_off, in_S, tau)


@dataclass
class BulkResidual:
    plus: dict
    minus: dict
    phi_deviation: float

    def worst(self, name):
        return max(self.plus[name], self.minus[name])


BULK_EQUATIONS = ("mass", "momentum", "temperature")


def _sharp_residual_terms(state, cfg):
    """Spatial parts of the sharp-interface bulk equations (no phase terms)."""
    grid, visc = cfg.grid, cfg.visc
    rho, u, theta = state.rho, state.u, state.theta
    st = thermo.eos_eval(cfg.eos, rho, theta)
    S = G.viscous_stress(u, visc, grid)
    div_u = G.divergence(u, grid)
    mass = G.divergence(rho * u, grid)
    flux = rho * u[:, None] * u[None, :]
    for a in range(grid.dim):
        flux[a, a] += st.p
    mom = G.tensor_divergence(flux - S, grid)
    Gu = G.velocity_gradient(u, grid)
    work = np.einsum("ab...,ab...->...", S, Gu)
    adv = np.sum(u * G.gradient(theta, grid), axis=0)
    temp = rho * st.e_theta * adv + theta * st.p_theta * div_u - work - visc.k * G.laplacian(theta, grid)
    return mass, mom, temp, rho * st.e_theta


def bulk_masks(phi, grid, eps, exclusion=BULK_EXCLUSION):
    sdf = ig.signed_distance(phi, grid, band=exclusion * eps)
    return sdf.d > exclusion * eps, sdf.d < -exclusion * eps


def bulk_residual(state1, state2, cfg, masks=None):
    """Residuals of the sharp-interface bulk system on the two phase masks.

    Time derivatives are differences over the pair, spatial terms are the
    trapezoid average of both snapshots.
    """
    grid = state1.grid
    if masks is None:
        masks = bulk_masks(state1.phi, grid, cfg.eps)
    plus, minus = masks
    if not plus.any() or not minus.any():
        raise EmptyMaskError("a bulk mask is empty")
    dt = state2.t - state1.t
    if not dt > 0:
        raise PreconditionError("bulk residual needs two snapshots with t2 > t1")
    a = _sharp_residual_terms(state1, cfg)
    b = _sharp_residual_terms(state2, cfg)
    r_mass = (state2.rho - state1.rho) / dt + 0.5 * (a[0] + b[0])
    r_mom = (state2.rho * state2.u - state1.rho * state1.u) / dt + 0.5 * (a[1] + b[1])
    r_mom = np.sqrt(np.sum(r_mom ** 2, axis=0))
    r_temp = 0.5 * (a[3] + b[3]) * (state2.theta - state1.theta) / dt + 0.5 * (a[2] + b[2])
    fields = {"mass": r_mass, "momentum": r_mom, "temperature": r_temp}

    def norms(mask):
        return {k: float(np.max(np.abs(v[mask]))) for k, v in fields.items()}

    both = plus | minus
    dev = float(np.max(np.abs(np.abs(state1.phi[both]) - 1.0)))
    return BulkResidual(norms(plus), norms(minus), dev)


def loglog_slope(eps, values):
    """Least-squares slope of log(value) against log(eps), or 'exact'."""
    eps = np.asarray(eps, float)
    values = np.abs(np.asarray(values, float))
    if np.all(values < EXACT_FLOOR):
        return "exact"
    values = np.maximum(values, EXACT_FLOOR)
    return float(np.polyfit(np.log(eps), np.log(values), 1)[0])


def verdict(slope):
    if slope == "exact":
        return "exact"
    return "convergent" if slope >= CONVERGENT_SLOPE else "non-convergent"


def analyze_pair(state1, state2, cfg, mode, sigma=SIGMA):
    """All sweep metrics for one snapshot pair, as (max, median) tuples."""
    rec = check_jumps(state1, state2, cfg, mode, sigma)
    sdf = ig.signed_distance(state1.phi, state1.grid, band=8.0 * cfg.eps)
    bulk = bulk_residual(state1, state2, cfg)

    def agg(a):
        a = np.asarray(a, float)
        return float(np.max(a)), float(np.median(a))

    prof = profile_error(state1, sdf, cfg.eps)
    metrics = {
        "profile_error": (prof, prof),
        "u_jump": agg(rec.u_jump),
        "theta_jump": agg(rec.theta_jump),
        "kinematic": agg(rec.kinematic),
        "stress_residual": agg(rec.stress_residual),
        "phi_bulk_deviation": (bulk.phi_deviation, bulk.phi_deviation),
    }
    for eq in BULK_EQUATIONS:
        v = bulk.worst(eq)
        metrics[f"bulk_{eq}"] = (v, v)
    if MobilityMode(mode) is MobilityMode.C2:
        metrics["kappa_off_S"] = agg(rec.kappa_off_S)
    return metrics


MANDATORY = ("u_jump", "theta_jump", "kinematic", "stress_residual")


@dataclass
class SweepReport:
    scenario: str
    mode: str
    eps: list
    metrics: dict = field(default_factory=dict)   # name -> {"max": [...], "median": [...]}
    slopes: dict = field(default_factory=dict)
    verdicts: dict = field(default_factory=dict)
    mandatory: tuple = MANDATORY

    @property
    def passed(self):
        return all(self.verdicts.get(m) != "non-convergent" for m in self.mandatory if m in self.verdicts)

    def summary(self):
        return {
            "scenario": self.scenario,
            "mode": self.mode,
            "eps": list(self.eps),
            "mandatory": list(self.mandatory),
            "passed": self.passed,
            "metrics": {k: {"values": self.metrics[k]["max"], "median": self.metrics[k]["median"],
                            "slope": self.slopes[k], "verdict": self.verdicts[k]} for k in self.metrics},
        }

    def write(self, out_dir):
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for name, vals in self.metrics.items():
            rows = []
            for i, e in enumerate(self.eps):
                so_far = loglog_slope(self.eps[: i + 1], vals["max"][: i + 1]) if i > 0 else ""
                rows.append([e, vals["max"][i], vals["median"][i], so_far])
            io.write_table(out / f"metric_{name}.csv", ["eps", "max", "median", "slope_so_far"], rows)
        io.write_json(self.summary(), out / "summary.json")


def build_report(eps_list, per_eps, mode, scenario, mandatory=MANDATORY):
    rep = SweepReport(scenario, MobilityMode(mode).value, list(eps_list), mandatory=tuple(mandatory))
    for name in per_eps[0]:
        mx = [m[name][0] for m in per_eps]
        md = [m[name][1] for m in per_eps]
        rep.metrics[name] = {"max": mx, "median": md}
        rep.slopes[name] = loglog_slope(eps_list, mx)
        rep.verdicts[name] = verdict(rep.slopes[name])
    return rep


def check_eps_list(eps_list):
    eps_list = [float(e) for e in eps_list]
    if len(eps_list) < 3:
        raise PreconditionError("an eps sweep needs at least 3 values")
    if any(not b < a for a, b in zip(eps_list, eps_list[1:])) or eps_list[-1] <= 0:
        raise PreconditionError("eps values must be positive and strictly decreasing")
    return eps_list


def sweep_member_config(raw, eps, out_dir):
    """Copy of a raw config dict re-targeted to ``eps`` (grid tied to eps)."""
    cfg = json.loads(json.dumps(raw))
    cfg["eps"] = eps
    g = cfg.setdefault("grid", {})
    g.pop("nx", None)
    g.pop("ny", None)
    cfg.pop("trace_delta", None)
    cfg["output_dir"] = str(out_dir)
    if cfg.get("pair_steps", 0) < 1:
        cfg["pair_steps"] = 1
    return cfg


def _run_member(args):
    from . import config, solver

    raw, eps = args
    try:
        res = solver.run(config.build(raw))
    except NSACError as exc:
        # plain NSACError so the annotated failure pickles across the process pool
        raise NSACError(f"eps={eps}: {exc}") from exc
    return str(res.manifest_path)


def analyze_run(manifest_path, mode, sigma=SIGMA):
    """Metrics on the last two snapshots of a run manifest."""
    from . import config

    man = io.read_json(manifest_path)
    cfg = config.build(man["config"])
    paths = io.manifest_snapshot_paths(manifest_path)
    if len(paths) < 2:
        raise PreconditionError(f"{manifest_path}: need at least two snapshots")
    s1 = io.read_snapshot(paths[-2][0])
    s2 = io.read_snapshot(paths[-1][0])
    return analyze_pair(s1, s2, cfg, mode, sigma)


def eps_sweep(raw, eps_list, mode, out_dir, jobs=None, scenario=None, sigma=SIGMA):
    """Run the scenario for each eps, analyze the final snapshot pair and fit rates."""
    eps_list = check_eps_list(eps_list)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    members = [(sweep_member_config(raw, e, out / f"eps_{e:g}"), e) for e in eps_list]
    jobs = len(eps_list) if jobs is None else max(1, int(jobs))
    if jobs == 1:
        manifests = [_run_member(m) for m in members]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            manifests = list(pool.map(_run_member, members))
    rel = [os.path.relpath(m, out) for m in manifests]
    sweep_manifest = {"kind": "sweep", "schema_version": io.SCHEMA_VERSION,
                      "scenario": scenario or raw.get("ic", {}).get("preset", "custom"),
                      "mode": MobilityMode(mode).value, "eps": eps_list, "runs": rel}
    io.write_json(sweep_manifest, out / "manifest.json")
    return report_from_sweep(out / "manifest.json", mode, sigma)


def report_from_sweep(manifest_path, mode, sigma=SIGMA, out_dir=None):
    man = io.read_json(manifest_path)
    base = Path(manifest_path).parent
    eps_list = check_eps_list(man["eps"])
    per_eps = [analyze_run(base / r, mode, sigma) for r in man["runs"]]
    rep = build_report(eps_list, per_eps, mode, man.get("scenario", "custom"))
    rep.write(out_dir or base / "report")
    return rep


@dataclass
class RadiusSeries:
    t: np.ndarray
    r: np.ndarray


def bubble_radius(phi, grid, eps):
    """Area-equivalent radius of the largest closed phi < 0 region."""
    samples = ig.extract_interface(phi, grid)
    areas = ig.polygon_area(samples)
    r = float(np.sqrt(max(areas.values()) / np.pi))
    if r < 4.0 * eps:
        raise BubbleVanishedError(f"bubble radius {r:.4g} < 4 eps")
    return r


def radius_series(states, eps):
    t = np.array([s.t for s in states])
    r = np.array([bubble_radius(s.phi, s.grid, eps) for s in states])
    return RadiusSeries(t, r)


@dataclass
class FlowLawReport:
    rho: float
    slope: float
    predicted: float
    relative_deviation: float
    max_deviation: float
    series: RadiusSeries


def curvature_flow_check(series, rho, t_skip=0.0):
    """Compare r(t)^2 with the law r^2 = r0^2 - 2 t / rho^2.

    The slope of r^2 is fitted over samples with t >= t_skip; the relative
    deviation is |slope / predicted - 1|. ``max_deviation`` is the largest
    pointwise gap between measured and predicted r^2 change, relative to the
    total predicted change over the window.
    """
    t, r2 = series.t, series.r ** 2
    keep = t >= t_skip
    if keep.sum() < 2:
        raise PreconditionError("need at least two radius samples in the fit window")
    slope = float(np.polyfit(t[keep], r2[keep], 1)[0])
    pred = -2.0 / rho ** 2
    t0 = t[keep][0]
    gap = (r2[keep] - r2[keep][0]) - pred * (t[keep] - t0)
    span = abs(pred) * (t[keep][-1] - t0)
    return FlowLawReport(rho, slope, pred, abs(slope / pred - 1.0), float(np.max(np.abs(gap)) / span), series)


@dataclass
class LaplaceFit:
    kappa: np.ndarray
    dp: np.ndarray
    sigma_fit: float
    relative_errors: np.ndarray


def laplace_fit(kappa, dp, sigma=SIGMA):
    """Fit dp = s kappa through the origin; report per-point errors vs sigma kappa."""
    kappa = np.asarray(kappa, float)
    dp = np.asarray(dp, float)
    s = float(np.dot(kappa, dp) / np.dot(kappa, kappa))
    return LaplaceFit(kappa, dp, s, np.abs(dp / (sigma * kappa) - 1.0))


def pressure_jump(state, cfg, delta=None):
    """Sample-averaged p^- - p^+ and curvature for one snapshot."""
    samples = ig.extract_interface(state.phi, state.grid)
    ig.geometry(state.phi, state.grid, samples)
    tr = ig.one_sided_traces(state, samples, cfg.trace_delta if delta is None else delta,
                             cfg.eps, cfg.visc, cfg.eos)
    return float(np.mean(tr.p[1] - tr.p[0])), float(np.mean(samples.kappa))
