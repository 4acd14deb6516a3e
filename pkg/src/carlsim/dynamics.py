"""Semiclassical macro-atom dynamics in the pumped ring cavity.

Coordinates follow the coupling Hamiltonian

    H = sum_j p_j^2/2m + hbar Delta_c |alpha_-|^2
        + hbar U0 alpha_+ sum_j (alpha_-^* e^{-2ikz_j} + c.c.)
        + hbar U_s alpha_+ (alpha_-^* e^{-2ikz_s} + c.c.)

with forces taken as -dH/dz_j, so that

    dp_j/dt = 4 hbar k U0 alpha_+ Im(alpha_- e^{2ikz_j})
    dalpha_-/dt = -(kappa + i Delta_c) alpha_- - i U0 alpha_+ sum_j e^{-2ikz_j}
                  - i U_s alpha_+ e^{-2ikz_s}

In these coordinates the pump travels toward -z: every photon scattered into
the probe kicks an atom by -2 hbar k, and radiation pressure pushes toward
-z. Reported mean momenta are projected on the pump direction
(``PUMP_AXIS``) so that recoil shows up as positive momentum.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.constants import hbar, k as k_B

from carlsim import kernels
from carlsim.observables import Trace, probe_power
from carlsim.params import CavityAtomParams, ParameterError
from carlsim.pump import PumpProfile, pump_power_at  # noqa: F401  (re-exported)

PUMP_AXIS = -1.0
# s in  s * sum_j (N/N_s) dp_j = 2 hbar k * (photons added to the probe or lost through the mirrors)
CONSERVATION_SIGN = -1.0
OVERFLOW_GUARD = 1e30

EULER = "euler"
RK4 = "rk4"
_METHODS = {EULER: kernels.EULER, RK4: kernels.RK4}


class IntegrationDiverged(RuntimeError):
    def __init__(self, t):
        super().__init__(f"integration diverged at t = {t:.6e} s")
        self.t = t


@dataclass(frozen=True)
class BackscatterModel:
    rate: float = 0.0     # U_s, rad/s
    phase: float = 0.0    # 2 k z_s, rad

    def __post_init__(self):
        if self.rate < 0:
            raise ParameterError("backscatter rate must be >= 0")

    @property
    def coupling(self):
        """U_s e^{-2ikz_s}."""
        return self.rate * complex(math.cos(self.phase), -math.sin(self.phase))


@dataclass(frozen=True, eq=False)
class EnsembleState:
    t: float
    z: np.ndarray
    p: np.ndarray
    alpha: complex

    def __post_init__(self):
        z = np.array(self.z, dtype=float)
        p = np.array(self.p, dtype=float)
        if z.ndim != 1 or z.shape != p.shape:
            raise ValueError("positions and momenta must be 1-D arrays of equal length")
        if z.size < 1:
            raise ValueError("ensemble needs at least one macro-atom")
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "alpha", complex(self.alpha))
        object.__setattr__(self, "t", float(self.t))

    @property
    def n_sim(self):
        return self.z.size

    def digest(self):
        h = hashlib.sha256()
        h.update(np.float64(self.t).tobytes())
        h.update(self.z.tobytes())
        h.update(self.p.tobytes())
        h.update(np.complex128(self.alpha).tobytes())
        return h.hexdigest()

    def __eq__(self, other):
        if not isinstance(other, EnsembleState):
            return NotImplemented
        return self.digest() == other.digest()

    def __hash__(self):
        return hash(self.digest())

    def to_dict(self):
        return {
            "t_s": self.t,
            "z_m": self.z.tolist(),
            "p_kg_m_per_s": self.p.tolist(),
            "alpha_minus_re": self.alpha.real,
            "alpha_minus_im": self.alpha.imag,
        }

    @classmethod
    def from_dict(cls, doc):
        return cls(
            t=doc["t_s"],
            z=doc["z_m"],
            p=doc["p_kg_m_per_s"],
            alpha=complex(doc.get("alpha_minus_re", 0.0), doc.get("alpha_minus_im", 0.0)),
        )


@dataclass(frozen=True)
class Scenario:
    """One fully specified simulation run."""

    params: CavityAtomParams
    n_real: float
    n_sim: int = 100
    temperature: float = 0.0
    seed: int = 0
    backscatter: BackscatterModel = field(default_factory=BackscatterModel)
    radiation_pressure: bool = True
    delta_c: float = 0.0
    method: str = EULER
    dt: float = 2e-9
    duration: float = 100e-6
    initial_probe: complex = 0j
    decimation: int = 10
    jitter_eps: float = 1e-4

    def __post_init__(self):
        if int(self.n_sim) != self.n_sim or self.n_sim < 2:
            raise ParameterError("n_sim must be an integer >= 2")
        # n_real == 0 is the empty cavity; otherwise each macro-atom carries >= 1 atom
        if self.n_real != 0 and self.n_real < self.n_sim:
            raise ParameterError("n_real must be 0 (empty cavity) or >= n_sim")
        if self.temperature < 0:
            raise ParameterError("temperature must be >= 0")
        if self.method not in _METHODS:
            raise ParameterError(f"integrator method must be one of {sorted(_METHODS)}")
        if not self.dt > 0:
            raise ParameterError("dt must be > 0")
        if not self.duration > 0:
            raise ParameterError("duration must be > 0")
        if int(self.decimation) != self.decimation or self.decimation < 1:
            raise ParameterError("decimation must be an integer >= 1")
        if self.jitter_eps < 0:
            raise ParameterError("jitter_eps must be >= 0")
        if not 0 <= int(self.seed) < 2**64:
            raise ParameterError("seed must fit in 64 bits")
        object.__setattr__(self, "n_sim", int(self.n_sim))
        object.__setattr__(self, "decimation", int(self.decimation))
        object.__setattr__(self, "initial_probe", complex(self.initial_probe))

    @property
    def weight(self):
        """Real atoms represented by one macro-atom."""
        return self.n_real / self.n_sim

    @property
    def nsteps(self):
        return int(round(self.duration / self.dt))

    def with_(self, **changes):
        return replace(self, **changes)


def init_ensemble(n_sim, temperature, wavelength, mass, seed=0, jitter_eps=0.0, alpha0=0j):
    """Equally spaced macro-atoms over lambda/2, thermal momenta, optional jitter."""
    if n_sim < 2:
        raise ParameterError("need at least two macro-atoms")
    if temperature < 0:
        raise ParameterError("temperature must be >= 0")
    rng = np.random.default_rng(seed)
    z = np.arange(n_sim) * (0.5 * wavelength / n_sim)
    if temperature > 0:
        p = rng.normal(0.0, math.sqrt(mass * k_B * temperature), size=n_sim)
    else:
        p = np.zeros(n_sim)
    if jitter_eps > 0:
        z = z + jitter_eps * wavelength * rng.uniform(-1.0, 1.0, size=n_sim)
    return EnsembleState(0.0, z, p, alpha0)


def initial_state(scen):
    pr = scen.params
    return init_ensemble(scen.n_sim, scen.temperature, pr.pump.wavelength, pr.species.mass,
                         scen.seed, scen.jitter_eps, scen.initial_probe)


def bunching(z, k):
    """b = N_s^-1 sum_j exp(-2ikz_j)."""
    z = np.asarray(z, dtype=float)
    return complex(np.exp(-2j * k * z).mean())


def pump_amplitude_at(scen, t):
    pr = scen.params
    power = pump_power_at(pr.pump.profile, t, pr.pump.power)
    return np.sqrt(power / (pr.photon_energy * pr.fsr))


def coefficients(scen):
    pr = scen.params
    coef = np.zeros(kernels.N_COEF)
    coef[kernels.COEF_MASS] = pr.species.mass
    coef[kernels.COEF_K] = pr.k
    coef[kernels.COEF_FORCE] = 4.0 * hbar * pr.k * pr.u0
    coef[kernels.COEF_U0_WEIGHT] = pr.u0 * scen.weight
    coef[kernels.COEF_KAPPA] = pr.kappa
    coef[kernels.COEF_DELTA_C] = scen.delta_c
    us = scen.backscatter.coupling
    coef[kernels.COEF_US_RE] = us.real
    coef[kernels.COEF_US_IM] = us.imag
    if scen.radiation_pressure:
        coef[kernels.COEF_RP_FORCE] = hbar * pr.k * pr.gamma0
        coef[kernels.COEF_RP_LOSS] = scen.n_real * pr.gamma0
    coef[kernels.COEF_OVERFLOW] = OVERFLOW_GUARD
    return coef


def derivatives(state, scen):
    """Time derivatives (dz/dt, dp/dt, dalpha_-/dt) at ``state``."""
    if not (np.all(np.isfinite(state.z)) and np.all(np.isfinite(state.p)) and np.isfinite(state.alpha)):
        raise IntegrationDiverged(state.t)
    ap = float(pump_amplitude_at(scen, state.t))
    return kernels._rhs_numpy(state.z, state.p, state.alpha, ap, coefficients(scen))


def _advance(state, scen, dt, nsteps, decim, backend):
    times = state.t + 0.5 * dt * np.arange(2 * nsteps + 1)
    apump = np.asarray(pump_amplitude_at(scen, times), dtype=float)
    nrec = nsteps // decim + 1
    rec_t = np.zeros(nrec)
    rec_alpha = np.zeros(nrec, dtype=complex)
    rec_b = np.zeros(nrec, dtype=complex)
    rec_p = np.zeros(nrec)
    z = state.z.copy()
    p = state.p.copy()
    integrate = kernels.get_integrator(backend)
    alpha, status = integrate(z, p, complex(state.alpha), float(state.t), float(dt), int(nsteps), int(decim),
                              apump, coefficients(scen), _METHODS[scen.method],
                              rec_t, rec_alpha, rec_b, rec_p)
    if status != kernels.OK:
        raise IntegrationDiverged(state.t + (status + 1) * dt)
    final = EnsembleState(state.t + nsteps * dt, z, p, alpha)
    return final, (rec_t, rec_alpha, rec_b, rec_p)


def step(state, scen, dt=None, backend=None):
    """Advance one step of the scenario's integrator."""
    dt = scen.dt if dt is None else dt
    if not dt > 0:
        raise ParameterError("dt must be > 0")
    final, _ = _advance(state, scen, dt, 1, 1, backend)
    return final


def run(scen, backend=None):
    """Integrate ``scen``; return (trace, final state, complex bunching on the trace grid)."""
    pr = scen.params
    state = initial_state(scen)
    final, (t, alpha, b, pmean) = _advance(state, scen, scen.dt, scen.nsteps, scen.decimation, backend)
    trace = Trace(
        t=t,
        p_plus=np.asarray(pump_power_at(pr.pump.profile, t, pr.pump.power), dtype=float),
        p_minus=probe_power(alpha, pr.photon_energy, pr.fsr),
        alpha=alpha,
        abs_b=np.abs(b),
        mean_p=PUMP_AXIS * pmean / (2.0 * hbar * pr.k),
    )
    return trace, final, b


def simulate(scen, backend=None, return_state=False):
    """Integrate ``scen`` from its initial ensemble and record a :class:`Trace`."""
    trace, final, _ = run(scen, backend)
    if return_state:
        return trace, final
    return trace


def adiabatic_probe(b, scen, alpha_plus):
    """Probe amplitude slaved to the bunching: the steady state of the field equation."""
    pr = scen.params
    drive = scen.n_real * pr.u0 * np.asarray(b) + scen.backscatter.coupling
    return -1j * drive * alpha_plus / (pr.kappa + 1j * scen.delta_c)


def along_pump(state):
    """Momenta projected on the pump propagation direction (kg m/s)."""
    return PUMP_AXIS * state.p


def bookkeeping_defect(trace, scen):
    """Momentum-photon defect C(t) on the trace grid (kg m/s).

    Atom recoil summed over the cloud against 2 hbar k times the photons
    that went into the probe, counting those that left through the mirrors
    (trapezoid rule on the recorded samples). Zero for U_s = 0 and no
    radiation pressure, up to integration error.
    """
    pr = scen.params
    two_hk = 2.0 * hbar * pr.k
    p_sum = scen.n_real * (trace.mean_p - trace.mean_p[0]) * two_hk * PUMP_AXIS
    photons = np.abs(trace.alpha) ** 2
    leaked = np.concatenate([[0.0], np.cumsum(0.5 * (photons[1:] + photons[:-1]) * np.diff(trace.t))])
    return CONSERVATION_SIGN * p_sum - two_hk * (photons - photons[0] + 2.0 * pr.kappa * leaked)
