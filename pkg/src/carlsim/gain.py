"""Small-signal gains, CARL parameter, and regime classification.

The bandwidth relations are order-of-magnitude statements, so
``gain_bandwidth`` uses proportionality constant 1 and is not continuous at
kappa_bar = 1.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.constants import c, pi

from carlsim.params import ParameterError, ZeroDetuningError, _require_positive

GOOD_CAVITY = "good-cavity"
BAD_CAVITY = "bad-cavity"
SEMICLASSICAL = "semiclassical"
QUANTUM = "quantum"

# far-detuning test for the Rayleigh-rate approximation
FAR_DETUNING_RATIO = 100.0


class FarDetuningWarning(UserWarning):
    pass


@dataclass(frozen=True)
class CondensateGeometry:
    long_axis_length: float
    radial_waist: float
    atom_number: float

    def __post_init__(self):
        _require_positive("condensate length", self.long_axis_length)
        _require_positive("condensate waist", self.radial_waist)
        if self.atom_number < 0:
            raise ParameterError("condensate atom number must be >= 0")

    @property
    def kappa_sr(self):
        """Light residence rate c/L of the condensate seen as a finesse-pi cavity."""
        return c / self.long_axis_length


def coupling_g(rabi_plus, rabi_minus, delta):
    if delta == 0:
        raise ZeroDetuningError("coupling undefined at zero detuning")
    return rabi_plus * rabi_minus / (2.0 * delta)


def carl_gain(n_atoms, n_plus, rabi1, delta, kappa):
    """CARL small-signal gain G_c = 2 g^2 N / kappa_c."""
    if delta == 0:
        raise ZeroDetuningError("CARL gain undefined at zero detuning")
    _require_positive("cavity decay rate", kappa)
    if n_atoms < 0:
        raise ParameterError("atom number must be >= 0")
    g = coupling_g(rabi1 * np.sqrt(n_plus), rabi1, delta)
    return 2.0 * g**2 * n_atoms / kappa


def carl_gain_light_shift_form(n_atoms, n_plus, rabi1, delta, kappa):
    """Same gain written as (Omega_+^2 / 2 Delta)(N / kappa_c)(Omega_-^2 / Delta)."""
    if delta == 0:
        raise ZeroDetuningError("CARL gain undefined at zero detuning")
    rabi_plus_sq = rabi1**2 * n_plus
    return rabi_plus_sq / (2.0 * delta) * (n_atoms / kappa) * (rabi1**2 / delta)


def rayleigh_rate(gamma, delta, rabi_plus):
    """Single-atom Rayleigh rate Gamma Omega_+^2 / (4 Delta^2 + 2 Omega_+^2 + Gamma^2)."""
    return gamma * rabi_plus**2 / (4.0 * delta**2 + 2.0 * rabi_plus**2 + gamma**2)


def is_far_detuned(gamma, delta, rabi_plus):
    return 4.0 * delta**2 > FAR_DETUNING_RATIO * (2.0 * rabi_plus**2 + gamma**2)


@dataclass(frozen=True)
class SuperradiantGain:
    gain: float
    cavity_form: float
    rayleigh_form: float
    kappa_sr: float
    far_detuned: bool


def superradiant_gain(geom, rabi_plus, delta, gamma, k):
    """Superradiant Rayleigh gain of an elongated condensate.

    ``gain`` is the far-detuned closed form; ``cavity_form`` rewrites it as a
    CARL gain with decay rate c/L and must agree with it. ``rayleigh_form``
    keeps the saturated Rayleigh rate and solid angle lambda^2/(pi w^2/4).
    Outside the far-detuned limit a :class:`FarDetuningWarning` is issued.
    """
    if delta == 0:
        raise ZeroDetuningError("superradiant gain undefined at zero detuning")
    n0, w, length = geom.atom_number, geom.radial_waist, geom.long_axis_length
    gain = rabi_plus**2 / delta**2 * n0 * 3.0 * gamma / (2.0 * k**2 * w**2)

    fsr = c / length
    kappa_sr = geom.kappa_sr
    rabi1_sq = 3.0 * gamma * fsr / (k**2 * w**2)
    cavity_form = rabi_plus**2 / (2.0 * delta) * (n0 / kappa_sr) * (rabi1_sq / delta)

    wavelength = 2.0 * pi / k
    solid_angle = wavelength**2 / (pi / 4.0 * w**2)
    rayleigh_form = rayleigh_rate(gamma, delta, rabi_plus) * n0 * solid_angle / (8.0 * pi / 3.0)

    far = is_far_detuned(gamma, delta, rabi_plus)
    if not far:
        warnings.warn("superradiant gain evaluated outside the far-detuned limit", FarDetuningWarning, stacklevel=2)
    return SuperradiantGain(gain, cavity_form, rayleigh_form, kappa_sr, far)


def carl_parameter(gain, kappa_decay, omega_r):
    """rho = (G kappa / omega_r^2)^(1/3)."""
    _require_positive("gain", gain)
    _require_positive("decay rate", kappa_decay)
    _require_positive("recoil frequency", omega_r)
    return np.cbrt(gain * kappa_decay / omega_r**2)


def scaled_decay(kappa_decay, omega_r, rho):
    """kappa_bar = kappa / (omega_r rho); < 1 is the good-cavity regime."""
    _require_positive("decay rate", kappa_decay)
    _require_positive("recoil frequency", omega_r)
    _require_positive("rho", rho)
    return kappa_decay / (omega_r * rho)


def gain_bandwidth(rho, omega_r, kappa_decay):
    """omega_r rho in the good cavity, kappa in the bad cavity."""
    if scaled_decay(kappa_decay, omega_r, rho) < 1.0:
        return omega_r * rho
    return kappa_decay


def classify_regime(rho, kappa_bar, omega_r, bandwidth):
    """Return ((cavity, quantumness), flags).

    kappa_bar exactly 1 is reported as bad-cavity with the ``kappa_bar_boundary`` flag.
    """
    flags = []
    if kappa_bar == 1.0:
        flags.append("kappa_bar_boundary")
    cavity = GOOD_CAVITY if kappa_bar < 1.0 else BAD_CAVITY
    quantumness = QUANTUM if bandwidth < omega_r else SEMICLASSICAL
    return (cavity, quantumness), flags


@dataclass(frozen=True)
class GainReport:
    g_c: float
    g_sr: float | None
    rho: float
    kappa_bar: float
    gain_bandwidth: float
    regime: tuple
    flags: list = field(default_factory=list)

    def to_dict(self):
        return {
            "G_c": self.g_c,
            "G_sr": self.g_sr,
            "rho": self.rho,
            "kappa_bar": self.kappa_bar,
            "gain_bandwidth": self.gain_bandwidth,
            "regime": list(self.regime),
            "flags": list(self.flags),
        }


def gain_report(params, n_atoms, condensate=None, use="cavity"):
    """Assemble a :class:`GainReport` for a cavity setup.

    ``use`` selects which gain feeds rho: ``"cavity"`` (G_c with kappa_c) or
    ``"condensate"`` (G_sr with c/L_cond). The latter needs ``condensate``.
    """
    flags = []
    g_c = carl_gain(n_atoms, params.n_plus, params.rabi1, params.delta, params.kappa)
    g_sr = None
    sr = None
    if condensate is not None:
        rabi_plus = params.rabi1 * np.sqrt(params.n_plus)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", FarDetuningWarning)
            sr = superradiant_gain(condensate, rabi_plus, params.delta, params.species.natural_linewidth, params.k)
        g_sr = sr.gain
        if not sr.far_detuned:
            flags.append("not_far_detuned")

    if use == "cavity":
        gain, decay = g_c, params.kappa
    elif use == "condensate":
        if sr is None:
            raise ParameterError("condensate geometry required when rho is taken from the superradiant gain")
        gain, decay = g_sr, sr.kappa_sr
    else:
        raise ParameterError(f"unknown gain source {use!r}")

    if gain <= 0:
        raise ParameterError("gain must be > 0 to define rho (no atoms or no pump)")
    rho = carl_parameter(gain, decay, params.omega_r)
    kbar = scaled_decay(decay, params.omega_r, rho)
    bw = gain_bandwidth(rho, params.omega_r, decay)
    regime, more = classify_regime(rho, kbar, params.omega_r, bw)
    return GainReport(g_c, g_sr, rho, kbar, bw, regime, flags + more)
