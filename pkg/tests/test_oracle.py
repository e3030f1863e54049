import numpy as np
import pytest

from nsac import oracle
from nsac.errors import ParameterError
from nsac.phasefield import SIGMA, MobilityMode


@pytest.fixture(scope="module")
def prof():
    return oracle.solve_phi_profile(10.0, 4001)


def test_profile_matches_tanh(prof):
    assert np.max(np.abs(prof.phi0 - np.tanh(prof.xi / np.sqrt(2)))) <= 1e-8


def test_profile_centre_and_symmetry(prof):
    mid = len(prof.xi) // 2
    assert prof.xi[mid] == 0 and prof.phi0[mid] == 0.0
    assert np.max(np.abs(prof.phi0 + prof.phi0[::-1])) <= 1e-12


def test_profile_end_states(prof):
    # 1 - tanh(L/sqrt 2) is 2 e^{-sqrt2 L} to leading order
    tail = 2 * np.exp(-np.sqrt(2) * 10)
    assert abs(prof.phi0[0] + 1) <= tail and abs(prof.phi0[-1] - 1) <= tail


@pytest.mark.parametrize("L,n", [(7.9, 4001), (10, 401), (10, 4000)])
def test_profile_rejects_bad_parameters(L, n):
    with pytest.raises(ParameterError):
        oracle.solve_phi_profile(L, n)


def test_sigma(prof):
    assert oracle.layer_quadratures(prof)["sigma"] == pytest.approx(0.9428090416, abs=1e-8)


def test_weighted_constant_density(prof):
    q = oracle.layer_quadratures(prof, 2.5)
    assert q["weighted"] == pytest.approx(2.5 * q["sigma"], rel=1e-13)


def test_weighted_varying_density(prof):
    q = oracle.layer_quadratures(prof, 1 + 0.5 * np.tanh(prof.xi / np.sqrt(2)))
    assert 0.5 * SIGMA < q["weighted"] < 1.5 * SIGMA


def test_sigma_quadrature_convergence():
    # at L=12 the truncation tail is far below the discretisation error
    errs = [abs(oracle.layer_quadratures(oracle.solve_phi_profile(12.0, n))["sigma"] - SIGMA)
            for n in (801, 1601, 3201)]
    assert errs[0] / errs[1] >= 8 and errs[1] / errs[2] >= 8


def test_zeroth_residuals_c1_family():
    fam = oracle.construct_family(V_n=0.3, theta=2.0)
    res = oracle.zeroth_residuals(fam, 0.3, MobilityMode.C1)
    assert set(res) == {"mass", "momentum", "phase", "potential", "temperature"}
    assert max(res.values()) <= 1e-6


def test_zeroth_residuals_detect_temperature_perturbation():
    fam = oracle.construct_family(V_n=0.3)
    bad = fam.with_fields(theta0=fam.theta0 + 0.01 * np.sin(fam.xi))
    assert oracle.zeroth_residuals(bad, 0.3, "C1")["temperature"] >= 1e-3


def test_zeroth_residuals_c2_varying_density():
    fam = oracle.construct_family(mode="C2", V_n=0.3, rho_minus=0.5, rho_plus=2.0)
    res = oracle.zeroth_residuals(fam, 0.3, "C2")
    assert res["phase"] <= 1e-6
    assert max(res.values()) <= 1e-6


def test_family_constraints():
    with pytest.raises(ParameterError):
        oracle.construct_family(mode="C1", V_n=0.3, un=0.1)
    with pytest.raises(ParameterError):
        oracle.construct_family(mode="C2", V_n=0.3, un=0.1, rho_minus=1.0, rho_plus=2.0)
    # C2 with constant density admits slip
    fam = oracle.construct_family(mode="C2", V_n=0.3, un=0.1)
    assert fam.un0[0] == 0.1


@pytest.mark.parametrize("mode,rm,rp", [("C1", 0.5, 2.0), ("C2", 0.5, 2.0), ("C1", 1.0, 1.0)])
def test_mass_flux_constant(mode, rm, rp):
    fam = oracle.construct_family(mode=mode, V_n=0.3, rho_minus=rm, rho_plus=rp)
    flux = oracle.mass_flux(fam, 0.3)
    assert np.ptp(flux) <= 1e-10


def test_mechanical_balance():
    fam = oracle.construct_family(V_n=-0.2)
    assert np.max(np.abs(oracle.mechanical_balance(fam, nu=0.3, lam=0.1))) <= 1e-8


@pytest.mark.parametrize("rho0,slip,expected", [(1.0, -4.0, 0.0), (2.0, -1.0, 0.0), (1.0, 0.0, 4 * SIGMA)])
def test_lemma25(rho0, slip, expected):
    assert oracle.lemma25_check(rho0, slip, 0.0, 4.0) == pytest.approx(expected, abs=1e-8)
    assert oracle.lemma25_check(rho0, slip + 0.5, 0.5, 4.0) == pytest.approx(expected, abs=1e-8)


def test_lemma25_value():
    assert oracle.lemma25_check(1.0, 0.0, 0.0, 4.0) == pytest.approx(3.7712, abs=1e-4)
    with pytest.raises(ParameterError):
        oracle.lemma25_check(0.0, 0.0, 0.0, 4.0)


def test_oracle_table(prof):
    tab = oracle.oracle_table(prof)
    assert tab.shape == (len(prof.xi), len(oracle.ORACLE_COLUMNS))
    assert np.allclose(tab[:, 2], (1 - prof.phi0 ** 2) / np.sqrt(2))
