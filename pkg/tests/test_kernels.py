import numpy as np
import pytest

from carlsim import dynamics as D, kernels
from conftest import make_scenario

pytestmark = pytest.mark.skipif(not kernels.numba_available(), reason="numba not installed")


@pytest.mark.parametrize("method", ["euler", "rk4"])
def test_backends_agree_before_saturation(method):
    # chaotic after saturation, so compare the linear build-up only
    scen = make_scenario(method=method, temperature=1e-6, duration=8e-6, decimation=5)
    a = D.simulate(scen, backend="numba")
    b = D.simulate(scen, backend="numpy")
    np.testing.assert_allclose(a.alpha, b.alpha, rtol=1e-8, atol=1e-8 * np.abs(b.alpha).max())
    np.testing.assert_allclose(a.mean_p, b.mean_p, rtol=1e-8, atol=1e-10)


def test_backends_agree_on_single_step():
    scen = make_scenario(temperature=1e-6, us_over_kappa=0.03, initial_probe=3 + 1j)
    st = D.initial_state(scen)
    a = D.step(st, scen, backend="numba")
    b = D.step(st, scen, backend="numpy")
    np.testing.assert_allclose(a.z, b.z, rtol=1e-14)
    np.testing.assert_allclose(a.p, b.p, rtol=1e-12, atol=1e-40)
    assert a.alpha == pytest.approx(b.alpha, rel=1e-13)


def test_unknown_backend():
    with pytest.raises(ValueError):
        kernels.get_integrator("fortran")


def test_bunching_floor_both_backends():
    z = np.arange(16) * (0.5 * 796.1e-9 / 16)
    k = 2 * np.pi / 796.1e-9
    assert kernels._bunching_numpy(z, k) == 0
    kernels._compile()
    assert kernels._bunching_loop(z, k) == 0
