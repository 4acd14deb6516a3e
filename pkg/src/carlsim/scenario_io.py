"""Scenario documents: JSON <-> validated :class:`Scenario`.

Every leaf is SI. Unknown keys are rejected; missing optional keys take the
defaults in ``DEFAULTS``; keys marked ``REQUIRED`` must be present.
"""

from __future__ import annotations

import copy
import json
import numbers
from pathlib import Path

from carlsim.dynamics import BackscatterModel, Scenario
from carlsim.params import (
    AtomSpecies,
    CavityAtomParams,
    CavityGeometry,
    ParameterError,
    PumpConfig,
    load_species,
)
from carlsim.pump import PumpProfile, PumpProfileError


class ScenarioError(ValueError):
    """Invalid scenario document; ``key`` is the dotted path at fault, if any."""

    def __init__(self, message, key=None):
        super().__init__(f"{key}: {message}" if key else message)
        self.key = key


REQUIRED = object()

DEFAULTS = {
    "species": "rb87",
    "cavity": {"length_m": REQUIRED, "waist_m": 100e-6, "finesse": REQUIRED},
    "pump": {
        "wavelength_m": REQUIRED,
        "power_w": REQUIRED,
        "profile": {"kind": "step", "tau_s": 20e-6, "samples": []},
    },
    "atoms": {"n_real": REQUIRED, "n_sim": 100, "temperature_k": 0.0, "seed": 0, "jitter_eps": 1e-4},
    "backscatter": {"us_over_kappa": 0.0, "phase_rad": 0.0},
    "physics": {"radiation_pressure": True, "delta_c_rad_s": 0.0},
    "integrator": {"method": "euler", "dt_s": 2e-9},
    "run": {"duration_s": REQUIRED, "decimation": 10},
    "initial": {"alpha_minus_re": 0.0, "alpha_minus_im": 0.0},
}

# leaves that are free-form rather than scalar numbers
_SPECIAL = {"species", "pump.profile.kind", "pump.profile.samples", "integrator.method",
            "physics.radiation_pressure"}


def _merge(doc, defaults, prefix=""):
    if not isinstance(doc, dict):
        raise ScenarioError("expected an object", prefix or None)
    out = {}
    for key in doc:
        if key not in defaults:
            raise ScenarioError("unknown key", f"{prefix}{key}")
    for key, default in defaults.items():
        path = f"{prefix}{key}"
        if isinstance(default, dict):
            out[key] = _merge(doc.get(key, {}), default, path + ".")
        elif key in doc:
            out[key] = doc[key]
        elif default is REQUIRED:
            raise ScenarioError("missing required key", path)
        else:
            out[key] = copy.deepcopy(default)
        if path not in _SPECIAL and not isinstance(default, dict):
            val = out[key]
            if isinstance(val, bool) or not isinstance(val, numbers.Real):
                raise ScenarioError(f"expected a number, got {val!r}", path)
    return out


def normalize(doc):
    """Fill defaults and check structure; returns a new complete document."""
    return _merge(doc, DEFAULTS)


def _species(value):
    if isinstance(value, str):
        return load_species(value)
    if isinstance(value, dict):
        return AtomSpecies.from_dict(value)
    raise ScenarioError("species must be a fixture name or an object", "species")


def _profile(doc):
    kind = doc["kind"]
    samples = doc["samples"]
    try:
        if kind == "sampled":
            return PumpProfile("sampled", samples=tuple(tuple(s) for s in samples))
        return PumpProfile(kind, tau=float(doc["tau_s"]))
    except (PumpProfileError, TypeError, ValueError) as exc:
        raise ScenarioError(str(exc), "pump.profile") from None


def scenario_from_doc(doc):
    d = normalize(doc)
    try:
        species = _species(d["species"])
    except ParameterError as exc:
        raise ScenarioError(str(exc), "species") from None

    def build(key, fn):
        try:
            return fn()
        except (ParameterError, PumpProfileError) as exc:
            raise ScenarioError(str(exc), key) from None

    cav = d["cavity"]
    cavity = build("cavity", lambda: CavityGeometry(cav["length_m"], cav["waist_m"], cav["finesse"]))
    pump = build("pump", lambda: PumpConfig(d["pump"]["wavelength_m"], d["pump"]["power_w"],
                                            _profile(d["pump"]["profile"])))
    params = build("pump.wavelength_m", lambda: CavityAtomParams(species, cavity, pump))
    build("pump.wavelength_m", lambda: params.u0)

    at, bs, ph, it, run, ini = (d[k] for k in ("atoms", "backscatter", "physics", "integrator", "run", "initial"))
    if not isinstance(ph["radiation_pressure"], bool):
        raise ScenarioError("expected true/false", "physics.radiation_pressure")
    for key, val in (("atoms.n_sim", at["n_sim"]), ("atoms.seed", at["seed"]), ("run.decimation", run["decimation"])):
        if int(val) != val:
            raise ScenarioError("expected an integer", key)
    if it["dt_s"] <= 0:
        raise ScenarioError("must be > 0", "integrator.dt_s")
    if run["duration_s"] <= 0:
        raise ScenarioError("must be > 0", "run.duration_s")
    if bs["us_over_kappa"] < 0:
        raise ScenarioError("must be >= 0", "backscatter.us_over_kappa")

    backscatter = BackscatterModel(bs["us_over_kappa"] * params.kappa, bs["phase_rad"])
    return build("atoms", lambda: Scenario(
        params=params,
        n_real=at["n_real"],
        n_sim=int(at["n_sim"]),
        temperature=at["temperature_k"],
        seed=int(at["seed"]),
        backscatter=backscatter,
        radiation_pressure=ph["radiation_pressure"],
        delta_c=ph["delta_c_rad_s"],
        method=it["method"],
        dt=it["dt_s"],
        duration=run["duration_s"],
        initial_probe=complex(ini["alpha_minus_re"], ini["alpha_minus_im"]),
        decimation=int(run["decimation"]),
        jitter_eps=at["jitter_eps"],
    ))


def scenario_to_doc(scen, species_name=None):
    pr = scen.params
    prof = pr.pump.profile
    return {
        "species": species_name if species_name else pr.species.to_dict(),
        "cavity": {"length_m": pr.cavity.round_trip_length, "waist_m": pr.cavity.mode_waist,
                   "finesse": pr.cavity.finesse},
        "pump": {"wavelength_m": pr.pump.wavelength, "power_w": pr.pump.power,
                 "profile": {"kind": prof.kind, "tau_s": prof.tau, "samples": [list(s) for s in prof.samples]}},
        "atoms": {"n_real": scen.n_real, "n_sim": scen.n_sim, "temperature_k": scen.temperature,
                  "seed": scen.seed, "jitter_eps": scen.jitter_eps},
        "backscatter": {"us_over_kappa": scen.backscatter.rate / pr.kappa, "phase_rad": scen.backscatter.phase},
        "physics": {"radiation_pressure": scen.radiation_pressure, "delta_c_rad_s": scen.delta_c},
        "integrator": {"method": scen.method, "dt_s": scen.dt},
        "run": {"duration_s": scen.duration, "decimation": scen.decimation},
        "initial": {"alpha_minus_re": scen.initial_probe.real, "alpha_minus_im": scen.initial_probe.imag},
    }


def read_doc(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioError(f"cannot read {path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: JSON parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def load_scenario(path):
    return scenario_from_doc(read_doc(path))


def get_path(doc, dotted):
    node = doc
    for part in dotted.split("."):
        if not isinstance(node, dict) or part not in node:
            raise ScenarioError("parameter path does not resolve", dotted)
        node = node[part]
    return node


def set_path(doc, dotted, value):
    """Return a copy of ``doc`` with the numeric leaf at ``dotted`` replaced."""
    out = copy.deepcopy(doc)
    parts = dotted.split(".")
    node = out
    for part in parts[:-1]:
        if not isinstance(node, dict) or part not in node:
            raise ScenarioError("parameter path does not resolve", dotted)
        node = node[part]
    leaf = parts[-1]
    if not isinstance(node, dict) or leaf not in node:
        raise ScenarioError("parameter path does not resolve", dotted)
    if isinstance(node[leaf], bool) or not isinstance(node[leaf], numbers.Real):
        raise ScenarioError("parameter path must name a numeric leaf", dotted)
    node[leaf] = value
    return out
