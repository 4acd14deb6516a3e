import math

import numpy as np
import pytest
from scipy.constants import hbar, k as k_B

from carlsim import dynamics as D
from carlsim.params import ParameterError
from carlsim.pump import PumpProfile
from conftest import RB87, make_params, make_scenario


def test_equal_spacing_has_no_bunching():
    st = D.init_ensemble(4, 0.0, 796.1e-9, RB87.mass)
    k = 2 * math.pi / 796.1e-9
    np.testing.assert_allclose(2 * k * st.z, [0, math.pi / 2, math.pi, 3 * math.pi / 2], atol=1e-15)
    assert abs(D.bunching(st.z, k)) < 1e-15


def test_bunching_values():
    k = 2 * math.pi / 796.1e-9
    assert D.bunching(np.zeros(7), k) == 1.0
    b = D.bunching(np.array([0.0, (math.pi / 2) / (2 * k)]), k)
    assert b == pytest.approx((1 - 1j) / 2, abs=1e-15)


def test_thermal_spread():
    st = D.init_ensemble(20000, 800e-9, 796.1e-9, RB87.mass, seed=3)
    k = 2 * math.pi / 796.1e-9
    rms = np.sqrt(RB87.mass * k_B * 800e-9) / (2 * hbar * k)
    assert rms == pytest.approx(0.7584475852243477, rel=1e-9)
    assert np.std(st.p) / (2 * hbar * k) == pytest.approx(rms, rel=0.03)


def test_same_seed_same_state():
    a = D.init_ensemble(50, 1e-6, 796.1e-9, RB87.mass, seed=9, jitter_eps=1e-3)
    b = D.init_ensemble(50, 1e-6, 796.1e-9, RB87.mass, seed=9, jitter_eps=1e-3)
    assert a == b and a.digest() == b.digest()
    assert a != D.init_ensemble(50, 1e-6, 796.1e-9, RB87.mass, seed=10, jitter_eps=1e-3)


def test_rhs_pure_seeding():
    scen = make_scenario(radiation_pressure=False)
    z = np.array([0.0, 1e-8, 5e-8])
    st = D.EnsembleState(0.0, z, np.zeros(3), 0j)
    dz, dp, da = D.derivatives(st, scen)
    assert np.all(dp == 0)
    pr = scen.params
    ap = D.pump_amplitude_at(scen, 0.0)
    expect = -1j * scen.weight * pr.u0 * ap * np.exp(-2j * pr.k * z).sum()
    assert da == pytest.approx(expect, rel=1e-12)


def test_rhs_mirror_term_isolated():
    scen = make_scenario(us_over_kappa=0.05, phase=0.7, radiation_pressure=False, n_sim=4, delta_c=1e4)
    st = D.init_ensemble(4, 0.0, 796.1e-9, RB87.mass, alpha0=0.3 + 0.1j)
    _, _, da = D.derivatives(st, scen)
    pr = scen.params
    ap = D.pump_amplitude_at(scen, 0.0)
    us = 0.05 * pr.kappa
    expect = -(pr.kappa + 1j * 1e4) * (0.3 + 0.1j) - 1j * us * np.exp(-0.7j) * ap
    assert da == pytest.approx(expect, rel=1e-12)


def test_force_vanishes_for_real_phases():
    scen = make_scenario(radiation_pressure=False)
    st = D.EnsembleState(0.0, np.array([0.0, 0.0]), np.zeros(2), 2.0 + 0j)
    _, dp, _ = D.derivatives(st, scen)
    assert np.all(dp == 0.0)


def test_force_sign_pushes_against_z():
    # a scattered photon into the probe kicks atoms toward -z in these coordinates
    scen = make_scenario(radiation_pressure=False)
    pr = scen.params
    z = np.array([0.1 / (2 * pr.k)])
    st = D.EnsembleState(0.0, z, np.zeros(1), 1.0 + 0j)
    _, dp, _ = D.derivatives(st, scen)
    ap = D.pump_amplitude_at(scen, 0.0)
    assert dp[0] == pytest.approx(4 * hbar * pr.k * pr.u0 * ap * math.sin(0.1), rel=1e-12)


def test_fixed_point():
    scen = make_scenario(jitter_eps=0.0, n_sim=8, radiation_pressure=False)
    st = D.initial_state(scen)
    nxt = D.step(st, scen)
    np.testing.assert_array_equal(nxt.z, st.z)
    np.testing.assert_array_equal(nxt.p, st.p)
    assert nxt.alpha == 0 and nxt.t == scen.dt


def test_free_flight():
    scen = make_scenario(params=make_params(power=0.0), radiation_pressure=False, n_sim=3)
    z0 = np.array([0.0, 1e-7, 2e-7])
    p0 = np.array([1e-28, -2e-28, 3e-28])
    st = D.EnsembleState(0.0, z0, p0, 0j)
    out = D._advance(st, scen, 1e-8, 100, 100, "numpy")[0]
    np.testing.assert_allclose(out.z, z0 + p0 * 1e-6 / RB87.mass, rtol=1e-12, atol=1e-22)
    np.testing.assert_array_equal(out.p, p0)


@pytest.mark.parametrize("method,tol", [("rk4", 1e-8), ("euler", 1e-4)])
def test_empty_cavity_decay(method, tol):
    scen = make_scenario(n_real=0.0, method=method, dt=1e-9, duration=20e-6, decimation=100,
                         initial_probe=1.0, params=make_params(power=0.0))
    tr = D.simulate(scen)
    exact = np.exp(-2 * scen.params.kappa * tr.t)
    assert np.max(np.abs(np.abs(tr.alpha) ** 2 - exact)) < tol


def test_euler_decay_error_shrinks():
    errs = []
    for dt in (4e-9, 2e-9, 1e-9):
        scen = make_scenario(n_real=0.0, dt=dt, duration=10e-6, decimation=1, initial_probe=1.0,
                             params=make_params(power=0.0))
        tr = D.simulate(scen)
        errs.append(np.max(np.abs(np.abs(tr.alpha) ** 2 - np.exp(-2 * scen.params.kappa * tr.t))))
    assert errs[0] > errs[1] > errs[2]


def test_unseeded_ensemble_stays_dark():
    scen = make_scenario(jitter_eps=0.0, duration=30e-6, radiation_pressure=False)
    tr = D.simulate(scen)
    assert np.all(tr.p_minus == 0.0)
    assert np.all(tr.abs_b == 0.0)


def test_pulse_train_fig3_parameters():
    params = make_params(wavelength=797.3e-9, power=4.0, waist=200e-6, profile=PumpProfile("servo_ramp"))
    from carlsim.observables import find_peaks
    ps = find_peaks(D.simulate(make_scenario(n_real=1.5e6, params=params, duration=100e-6)))
    assert len(ps.peaks) >= 2
    assert ps.peaks[1][1] < ps.peaks[0][1]


def test_determinism():
    scen = make_scenario(temperature=1e-6, seed=4, duration=20e-6)
    a, b = D.simulate(scen), D.simulate(scen)
    for name in ("t", "p_plus", "p_minus", "alpha", "abs_b", "mean_p"):
        assert getattr(a, name).tobytes() == getattr(b, name).tobytes()


def test_adiabatic_probe_linear_in_inverse_kappa():
    scen = make_scenario(n_real=0.0, us_over_kappa=0.1)
    a1 = D.adiabatic_probe(0.0, scen, 10.0)
    pr2 = make_params(finesse=43500.0)
    scen2 = D.Scenario(pr2, 0.0, backscatter=scen.backscatter)
    assert abs(D.adiabatic_probe(0.0, scen2, 10.0)) == pytest.approx(abs(a1) / 2, rel=1e-12)
    assert D.adiabatic_probe(0.0, make_scenario(n_real=0.0), 10.0) == 0


def test_scenario_validation():
    with pytest.raises(ParameterError):
        make_scenario(n_real=50, n_sim=100)
    with pytest.raises(ParameterError):
        make_scenario(dt=0.0)
    with pytest.raises(ParameterError):
        make_scenario(method="leapfrog")
    with pytest.raises(ParameterError):
        make_scenario(temperature=-1.0)
    make_scenario(n_real=0.0)


def test_divergence_reported():
    scen = make_scenario(dt=1e-3, duration=1.0, initial_probe=1e20)
    with pytest.raises(D.IntegrationDiverged):
        D.simulate(scen)


def test_state_dict_roundtrip():
    st = D.init_ensemble(10, 1e-6, 796.1e-9, RB87.mass, seed=1, alpha0=1 + 2j)
    assert D.EnsembleState.from_dict(st.to_dict()) == st
