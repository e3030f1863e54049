"""
Acceptance criteria 1-9. Each test records sub-checks through
``acceptance_report.check``; the terminal summary prints one line per
criterion. The scenario runs are the expensive part (a few minutes in total).
"""
import json
import time

import numpy as np
import pytest

from nsac import cli, config, io, oracle, solver, verifier
from nsac import grid as G
from nsac.grid import GridSpec
from nsac.ics import initial_state
from nsac.phasefield import SIGMA

from acceptance_report import check

SWEEP_EPS = [0.08, 0.04, 0.02]

PLANAR = {
    "grid": {"dim": 1, "lx": 8.0, "cells_per_eps": 8},
    "eps": 0.08,
    "mobility": "C1",
    "ic": {"preset": "planar1d", "a": 0.25, "b": 0.75, "rho_plus": 1.0, "rho_minus": 0.5, "theta": 1.0,
           "balance_pressure": True, "velocity": 0.5, "blend_width": 1.5, "prepare": True},
    "viscosity": {"nu": 0.02, "lambda": 0.02, "k": 0.02},
    "t_end": 0.2,
    "pair_steps": 1,
    "diagnostics_every": 100,
}
PLANAR_U = 0.5

# known gaps, analysed in the decisions notes
GAP_PROFILE = "profile error is set by h/eps (fixed at 1/8), so it is flat across the sweep"
GAP_KINEMATIC = "kinematic floor ~ U (h/eps)^2 from grid advection of the layer; flat at fixed h/eps"
GAP_BULK = "bulk maxima sit at the 6 eps mask edge where layer tails scale like exp(-6 sqrt2)/eps^2"


@pytest.fixture(scope="module")
def planar_sweep(tmp_path_factory):
    out = tmp_path_factory.mktemp("planar_sweep")
    return verifier.eps_sweep(PLANAR, SWEEP_EPS, "C1", out, jobs=1, scenario="planar_contrast")


def _metric(rep, name):
    return rep.metrics[name]["max"], rep.slopes[name]


def _fmt(vals):
    return "[" + ", ".join(f"{v:.3g}" for v in vals) + "]"


# -- 1 ---------------------------------------------------------------------

def test_criterion1_surface_tension(tmp_path):
    t0 = time.perf_counter()
    code = cli.main(["--out", str(tmp_path), "oracle", "--L", "10", "--n", "4001"])
    wall = time.perf_counter() - t0
    sigma = json.loads((tmp_path / "oracle.json").read_text())["sigma"]
    check(1, "sigma", code == 0 and abs(sigma - 2 * np.sqrt(2) / 3) <= 1e-8,
          f"sigma={sigma:.12f}, error {abs(sigma - SIGMA):.1e} (<= 1e-8)")
    check(1, "runtime", wall < 1.0, f"{wall:.2f} s (< 1 s)")


# -- 2 ---------------------------------------------------------------------

def test_criterion2_profile_oracle():
    prof = oracle.solve_phi_profile(10.0, 4001)
    err = float(np.max(np.abs(prof.phi0 - np.tanh(prof.xi / np.sqrt(2)))))
    check(2, "oracle profile", err <= 1e-8, f"sup error {err:.1e} (<= 1e-8)")


@pytest.mark.slow
def test_criterion2_simulated_profile(planar_sweep):
    vals, _ = _metric(planar_sweep, "profile_error")
    check(2, "rms at eps=0.04", vals[1] <= 0.02, f"{vals[1]:.3g} (<= 0.02)")


@pytest.mark.slow
def test_criterion2_profile_decreasing(planar_sweep):
    vals, slope = _metric(planar_sweep, "profile_error")
    check(2, "rms decreasing in eps", all(b < a for a, b in zip(vals, vals[1:])),
          f"rms {_fmt(vals)} for eps {SWEEP_EPS}", known_gap=GAP_PROFILE)


# -- 3 ---------------------------------------------------------------------

@pytest.mark.slow
def test_criterion3_conservation(tmp_path):
    raw = {"grid": {"dim": 2, "lx": 1.0, "nx": 128, "ny": 128}, "eps": 0.04, "mobility": "C1",
           "ic": {"preset": "bubble2d", "r0": 0.25, "theta": 10.0},
           "viscosity": {"nu": 0.1, "lambda": 0.1, "k": 0.1}, "t_end": 1.0, "output_dir": str(tmp_path)}
    cfg = config.build(raw)
    st = initial_state(cfg)
    d0 = solver.diagnostics(st, cfg)
    t0 = time.perf_counter()
    for _ in range(1000):
        st = solver.step(st, cfg, solver.stable_dt(st, cfg), check_dt=False)
    wall = time.perf_counter() - t0
    d1 = solver.diagnostics(st, cfg)
    mass = abs(d1["mass"] - d0["mass"]) / d0["mass"]
    energy = abs(d1["total_energy"] - d0["total_energy"]) / abs(d0["total_energy"])
    check(3, "mass drift", mass <= 1e-12, f"{mass:.1e} over 1000 steps (<= 1e-12)")
    check(3, "energy drift", energy <= 1e-4, f"{energy:.1e} over 1000 steps (<= 1e-4)")
    check(3, "runtime", wall < 600, f"{wall:.0f} s for 1000 steps at 128^2")

    # one-step balance of phase mass against the trapezoid of the mu integral
    errs = []
    dt0 = solver.stable_dt(st, cfg)
    for fac in (1.0, 0.5, 0.25):
        dt = fac * dt0
        a = solver.diagnostics(st, cfg)
        b = solver.diagnostics(solver.step(st, cfg, dt, check_dt=False), cfg)
        errs.append(abs(b["phase_mass"] - a["phase_mass"] + 0.5 * dt * (a["mu_integral"] + b["mu_integral"])))
    order = np.log2(errs[0] / errs[1]), np.log2(errs[1] / errs[2])
    check(3, "phase balance order", min(order) >= 2.5,
          f"local error {_fmt(errs)}, observed orders {order[0]:.2f}, {order[1]:.2f} (local O(dt^3))")


# -- 4 ---------------------------------------------------------------------

@pytest.mark.slow
@pytest.mark.parametrize("name", ["u_jump", "theta_jump", "stress_residual"])
def test_criterion4_jump_slopes(planar_sweep, name):
    vals, slope = _metric(planar_sweep, name)
    check(4, f"{name} slope", verifier.verdict(slope) in ("convergent", "exact"),
          f"max {_fmt(vals)}, slope {slope if isinstance(slope, str) else round(slope, 2)} (>= 0.5)")


@pytest.mark.slow
def test_criterion4_kinematic_bound(planar_sweep):
    vals, _ = _metric(planar_sweep, "kinematic")
    check(4, "kinematic bound at eps=0.02", vals[-1] <= 0.05 * PLANAR_U,
          f"|V_n - u.n| = {vals[-1]:.2e} (<= {0.05 * PLANAR_U})")


@pytest.mark.slow
def test_criterion4_kinematic_slope(planar_sweep):
    vals, slope = _metric(planar_sweep, "kinematic")
    check(4, "kinematic slope", verifier.verdict(slope) in ("convergent", "exact"),
          f"max {_fmt(vals)}, slope {slope:.2f} (>= 0.5)", known_gap=GAP_KINEMATIC)


# -- 5 ---------------------------------------------------------------------

LAPLACE_RADII = (0.15, 0.2, 0.25)
LAPLACE_T_END = 0.2


def _laplace_run(r0, out):
    raw = {"grid": {"dim": 2, "lx": 0.8, "cells_per_eps": 4}, "eps": 0.02, "mobility": "C1",
           "ic": {"preset": "bubble2d", "r0": r0, "theta": 50.0},
           "viscosity": {"nu": 0.01, "lambda": 0.01, "k": 0.01}, "t_end": LAPLACE_T_END,
           "snapshot_interval": LAPLACE_T_END / 30, "diagnostics_every": 50, "output_dir": str(out)}
    cfg = config.build(raw)
    res = solver.run(cfg)
    rows = []
    for path, t in io.manifest_snapshot_paths(res.manifest_path):
        # the bubble starts at uniform pressure; average once the jump has built up
        if t >= LAPLACE_T_END / 3:
            s = io.read_snapshot(path)
            rows.append(verifier.pressure_jump(s, cfg))
    dp, kappa = np.mean(np.array(rows), axis=0)
    return dp, kappa, res.final_state, cfg


@pytest.fixture(scope="module")
def laplace_runs(tmp_path_factory):
    return {r: _laplace_run(r, tmp_path_factory.mktemp(f"laplace_{r}")) for r in LAPLACE_RADII}


@pytest.mark.slow
def test_criterion5_laplace(laplace_runs):
    kappa = np.array([laplace_runs[r][1] for r in LAPLACE_RADII])
    dp = np.array([laplace_runs[r][0] for r in LAPLACE_RADII])
    fit = verifier.laplace_fit(kappa, dp)
    for r, k, d, e in zip(LAPLACE_RADII, kappa, dp, fit.relative_errors):
        check(5, f"r0={r}", e <= 0.15, f"dp={d:.4f}, sigma*kappa={SIGMA * k:.4f}, error {e:.1%} (<= 15%)")
    rel = abs(fit.sigma_fit / SIGMA - 1)
    check(5, "fitted sigma", rel <= 0.15, f"{fit.sigma_fit:.4f} vs {SIGMA:.4f}, error {rel:.1%} (<= 15%)")


@pytest.mark.slow
def test_criterion8_bubble_phi_deviation(laplace_runs):
    _, _, st, cfg = laplace_runs[0.25]
    plus, minus = verifier.bulk_masks(st.phi, cfg.grid, cfg.eps)
    dev = float(np.max(np.abs(np.abs(st.phi[plus | minus]) - 1)))
    check(8, "bubble max||phi|-1| at eps=0.02", dev <= 0.01, f"{dev:.1e} (<= 0.01)")


# -- 6 ---------------------------------------------------------------------

BUBBLE_T_END = 0.01


def _bubble_run(mode, rho, out):
    raw = {"grid": {"dim": 2, "lx": 0.75, "cells_per_eps": 4}, "eps": 0.02, "mobility": mode,
           "ic": {"preset": "bubble2d", "r0": 0.25, "rho_in": rho, "rho_out": rho, "theta": 10.0},
           "viscosity": {"nu": 0.1, "lambda": 0.1, "k": 0.1}, "t_end": BUBBLE_T_END,
           "snapshot_interval": BUBBLE_T_END / 10, "diagnostics_every": 50, "output_dir": str(out)}
    cfg = config.build(raw)
    res = solver.run(cfg)
    states = [io.read_snapshot(p) for p, _ in io.manifest_snapshot_paths(res.manifest_path)]
    return verifier.curvature_flow_check(verifier.radius_series(states, cfg.eps), rho), states, cfg


@pytest.fixture(scope="module")
def bubble_runs(tmp_path_factory):
    return {key: _bubble_run(*key, tmp_path_factory.mktemp(f"bubble_{key[0]}_{key[1]}"))
            for key in (("C2", 1.0), ("C2", 2.0), ("C1", 1.0))}


@pytest.mark.slow
def test_criterion6_c2_law(bubble_runs):
    for rho in (1.0, 2.0):
        rep = bubble_runs[("C2", rho)][0]
        check(6, f"C2 rho={rho:g}", rep.relative_deviation <= 0.15,
              f"d(r^2)/dt={rep.slope:.4f} vs {rep.predicted:.4f}, deviation {rep.relative_deviation:.1%} "
              f"(pointwise {rep.max_deviation:.1%}) (<= 15%)")
    ratio = bubble_runs[("C2", 2.0)][0].slope / bubble_runs[("C2", 1.0)][0].slope
    check(6, "density scaling", abs(ratio / 0.25 - 1) <= 0.3, f"rate ratio {ratio:.3f} vs 0.25 (+-30%)")
    c1 = bubble_runs[("C1", 1.0)][0]
    factor = abs(c1.predicted) / max(abs(c1.slope), 1e-300)
    check(6, "C1 contrast", factor >= 5, f"C1 shrinks {factor:.1f}x slower than the C2 law (>= 5x)")


@pytest.mark.slow
def test_criterion6_sign_consistency(bubble_runs):
    _, states, cfg = bubble_runs[("C2", 1.0)]
    worst = 0.0
    for s1, s2 in zip(states[2:-1], states[3:]):
        rec = verifier.check_jumps(s1, s2, cfg, "C2")
        ok = (np.all(rec.samples.kappa > 0) and np.all(rec.samples.Vn < 0)
              and np.all(rec.kinematic < np.abs(rec.samples.kappa)) and np.all(rec.in_S))
        worst = max(worst, float(np.max(rec.kinematic / np.abs(rec.samples.kappa))))
        if not ok:
            break
    check(6, "sign consistency", ok, f"kappa>0, V_n<0 and |rho^2 slip + kappa| / kappa <= {worst:.2f} < 1")


# -- 7 ---------------------------------------------------------------------

def test_criterion7_oracle_residuals():
    for mode, kw in (("C1", {}), ("C2", {"rho_minus": 0.5, "rho_plus": 2.0})):
        fam = oracle.construct_family(mode=mode, V_n=0.3, theta=1.5, **kw)
        res = oracle.zeroth_residuals(fam, 0.3, mode)
        worst = max(res.values())
        check(7, f"family {mode}", worst <= 1e-6, f"max residual {worst:.1e} (<= 1e-6)")

    fam = oracle.construct_family(mode="C1", V_n=0.3)
    bump = 0.01 * np.sin(fam.xi)
    cases = {"theta0": "temperature", "phi0": "potential", "un0": "momentum", "mu0": "phase"}
    for field, eq in cases.items():
        bad = fam.with_fields(**{field: getattr(fam, field) + bump})
        r = oracle.zeroth_residuals(bad, 0.3, "C1")[eq]
        check(7, f"perturbed {field}", r >= 1e-3, f"{eq} residual {r:.1e} (>= 1e-3)")


# -- 8 ---------------------------------------------------------------------

@pytest.mark.slow
def test_criterion8_phi_deviation(planar_sweep):
    vals, _ = _metric(planar_sweep, "phi_bulk_deviation")
    check(8, "planar max||phi|-1| at eps=0.02", vals[-1] <= 0.01, f"{vals[-1]:.1e} (<= 0.01)")


@pytest.mark.slow
@pytest.mark.parametrize("eq", ["mass", "momentum", "temperature"])
def test_criterion8_bulk_residuals(planar_sweep, eq):
    vals, slope = _metric(planar_sweep, f"bulk_{eq}")
    ok = all(b < a for a, b in zip(vals, vals[1:]))
    check(8, f"bulk {eq} decreasing", ok, f"max {_fmt(vals)}, slope {slope:.2f}",
          known_gap=GAP_BULK if eq != "mass" else None)


# -- 9 ---------------------------------------------------------------------

def _op_order(op, exact):
    ns = (32, 64, 128)
    errs = []
    for n in ns:
        g = GridSpec.plane(n, n, 1.0, 1.0)
        errs.append(float(np.max(np.abs(op(g) - exact(g)))))
    return -np.polyfit(np.log(ns), np.log(errs), 1)[0]


def test_criterion9_operator_orders():
    def f(g):
        X, Y = g.coords()
        return np.sin(2 * np.pi * X) * np.cos(2 * np.pi * Y)

    def v(g):
        X, Y = g.coords()
        return np.stack([np.sin(2 * np.pi * X) * np.cos(2 * np.pi * Y), np.cos(4 * np.pi * X)])

    def with_xy(fn):
        return lambda g: fn(*g.coords())

    k = 2 * np.pi
    ops = {
        "gradient": (lambda g: G.gradient(f(g), g)[0], with_xy(lambda X, Y: k * np.cos(k * X) * np.cos(k * Y))),
        "divergence": (lambda g: G.divergence(v(g), g), with_xy(lambda X, Y: k * np.cos(k * X) * np.cos(k * Y))),
        "laplacian": (lambda g: G.laplacian(f(g), g), lambda g: -2 * k * k * f(g)),
    }
    for name, (op, exact) in ops.items():
        p = _op_order(op, exact)
        check(9, f"{name} order", abs(p - 2) <= 0.2, f"{p:.3f} (2.0 +- 0.2)")


def test_criterion9_time_order(tmp_path):
    raw = {"grid": {"dim": 1, "lx": 1.0, "nx": 64}, "eps": 0.1, "mobility": "C1",
           "ic": {"preset": "planar1d", "velocity": 0.3, "rho_minus": 0.8, "blend_width": 0.1},
           "t_end": 0.0, "output_dir": str(tmp_path)}
    cfg = config.build(raw)
    st0 = initial_state(cfg)
    dt = 0.5 * solver.stable_dt(st0, cfg)

    def advance(d):
        s = st0
        for _ in range(int(round(16 * dt / d))):
            s = solver.step(s, cfg, d, check_dt=False)
        return s

    ref = advance(dt / 4)
    errs = [max(float(np.max(np.abs(getattr(advance(d), f) - getattr(ref, f)))) for f in ("rho", "u", "phi", "theta"))
            for d in (dt, dt / 2)]
    # against a dt/4 reference the ratio is (1 - 4^-p) / (2^-p - 4^-p), 9 for p = 3
    ratio = errs[0] / errs[1]
    check(9, "SSP-RK3 self-convergence", ratio >= 7, f"error ratio {ratio:.2f} (>= 7, order 3 gives 9)")


def test_criterion9_determinism(tmp_path):
    raw = {"grid": {"dim": 2, "lx": 1.0, "cells_per_eps": 4}, "eps": 0.08, "mobility": "C2",
           "ic": {"preset": "shear2d", "rho_in": 0.8}, "t_end": 0.005, "snapshot_interval": 0.0025}
    blobs = []
    for k in range(2):
        res = solver.run(config.build(dict(raw, output_dir=str(tmp_path / f"r{k}"))))
        blobs.append([p.read_bytes() for p in res.snapshots])
    check(9, "bit-identical reruns", blobs[0] == blobs[1], f"{len(blobs[0])} snapshots compared byte for byte")
