"""Semiclassical simulation of collective atomic recoil lasing in a pumped ring cavity."""

from carlsim.params import (
    AtomSpecies,
    CavityAtomParams,
    CavityGeometry,
    ParameterError,
    PumpConfig,
    ZeroDetuningError,
    load_species,
)
from carlsim.gain import GainReport, CondensateGeometry, gain_report
from carlsim.dynamics import (
    BackscatterModel,
    EnsembleState,
    IntegrationDiverged,
    PumpProfile,
    Scenario,
    run,
    simulate,
)
from carlsim.observables import PeakSet, Trace, find_peaks
from carlsim.scenario_io import ScenarioError, load_scenario
from carlsim.sweep import FitResult, SweepResult, SweepSpec, fit_power_law, run_sweep
from carlsim.repro import reproduce_figure

__version__ = "0.1.0"

__all__ = [
    "AtomSpecies",
    "BackscatterModel",
    "CavityAtomParams",
    "CavityGeometry",
    "CondensateGeometry",
    "EnsembleState",
    "FitResult",
    "GainReport",
    "IntegrationDiverged",
    "ParameterError",
    "PeakSet",
    "PumpConfig",
    "PumpProfile",
    "Scenario",
    "ScenarioError",
    "SweepResult",
    "SweepSpec",
    "Trace",
    "ZeroDetuningError",
    "find_peaks",
    "fit_power_law",
    "gain_report",
    "load_scenario",
    "load_species",
    "reproduce_figure",
    "run",
    "run_sweep",
    "simulate",
]
