import pytest

from carlsim.dynamics import BackscatterModel, Scenario
from carlsim.params import CavityAtomParams, CavityGeometry, PumpConfig, load_species
from carlsim.pump import PumpProfile

RB87 = load_species("rb87")


def make_params(wavelength=796.1e-9, power=1.43, finesse=87000.0, waist=100e-6, profile=None, length=0.085):
    return CavityAtomParams(RB87, CavityGeometry(length, waist, finesse),
                            PumpConfig(wavelength, power, profile or PumpProfile()))


def make_scenario(n_real=1e6, us_over_kappa=0.0, phase=0.0, params=None, **kw):
    params = params or make_params()
    return Scenario(params, n_real, backscatter=BackscatterModel(us_over_kappa * params.kappa, phase), **kw)


def scenario_doc(**overrides):
    doc = {
        "cavity": {"length_m": 0.085, "waist_m": 100e-6, "finesse": 87000},
        "pump": {"wavelength_m": 796.1e-9, "power_w": 1.43},
        "atoms": {"n_real": 1e6},
        "run": {"duration_s": 20e-6},
    }
    for path, value in overrides.items():
        node = doc
        *parents, leaf = path.split(".")
        for p in parents:
            node = node.setdefault(p, {})
        node[leaf] = value
    return doc


@pytest.fixture
def rb87():
    return RB87
