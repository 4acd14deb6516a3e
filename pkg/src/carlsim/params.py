"""Physical inputs and derived atom-cavity rates.

All quantities are SI; angular rates are in rad/s.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from importlib import resources
from pathlib import Path

import numpy as np
from scipy.constants import c, hbar, pi

from carlsim.pump import PumpProfile


class ParameterError(ValueError):
    """Raised when a physical input violates its domain."""


class ZeroDetuningError(ParameterError):
    """Pump exactly on an atomic line; the dispersive coupling diverges."""


def _require_positive(name, value):
    if not value > 0:
        raise ParameterError(f"{name} must be > 0, got {value!r}")


# ---------------------------------------------------------------------------
# single-quantity formulas
# ---------------------------------------------------------------------------

def free_spectral_range(length):
    """Free spectral range c/L (Hz) of a ring cavity with round-trip length L."""
    _require_positive("round-trip length", length)
    return c / length


def cavity_decay_rate(fsr, finesse):
    """Field decay rate kappa_c = pi * fsr / F (rad/s)."""
    _require_positive("free spectral range", fsr)
    _require_positive("finesse", finesse)
    return pi * fsr / finesse


def wavenumber(wavelength):
    _require_positive("wavelength", wavelength)
    return 2.0 * pi / wavelength


def recoil_frequency(wavelength, mass):
    """omega_r = 2 hbar k^2 / m, the frequency of a 2 hbar k momentum kick."""
    _require_positive("mass", mass)
    k = wavenumber(wavelength)
    return 2.0 * hbar * k**2 / mass


def detuning(wavelength, species):
    """Signed pump-atom detuning against the nearest reference line.

    Negative for red detuning (pump frequency below the line).
    """
    _require_positive("pump wavelength", wavelength)
    lines = np.asarray(species.reference_lines, dtype=float)
    nearest = lines[np.argmin(np.abs(lines - wavelength))]
    if nearest == wavelength:
        raise ZeroDetuningError(f"pump wavelength {wavelength!r} m sits on an atomic line")
    return 2.0 * pi * c * (nearest - wavelength) / (wavelength * nearest)


def single_photon_rabi(gamma, k, waist, length):
    """Omega_1 = sqrt(3 Gamma c / (k^2 w0^2 L))."""
    if gamma < 0:
        raise ParameterError(f"linewidth must be >= 0, got {gamma!r}")
    _require_positive("wavenumber", k)
    _require_positive("mode waist", waist)
    _require_positive("round-trip length", length)
    return np.sqrt(3.0 * gamma * c / (k**2 * waist**2 * length))


def light_shift(rabi1, delta):
    """Single-photon light shift U0 = Omega_1^2 / Delta; carries the sign of Delta."""
    if delta == 0:
        raise ZeroDetuningError("light shift undefined at zero detuning")
    return rabi1**2 / delta


def photon_energy(wavelength):
    return hbar * c * wavenumber(wavelength)


def photon_number(power, wavelength, fsr):
    """Circulating photon number n = P / (hbar omega fsr)."""
    if power < 0:
        raise ParameterError(f"power must be >= 0, got {power!r}")
    _require_positive("free spectral range", fsr)
    return power / (photon_energy(wavelength) * fsr)


def power_from_photons(n, wavelength, fsr):
    """Circulating power of n intracavity photons; inverse of :func:`photon_number`."""
    if n < 0:
        raise ParameterError(f"photon number must be >= 0, got {n!r}")
    return n * photon_energy(wavelength) * fsr


def pump_amplitude(alpha_in, fsr, kappa):
    """Intracavity pump amplitude alpha_+ = alpha_in * sqrt(fsr / kappa), taken real."""
    _require_positive("cavity decay rate", kappa)
    if alpha_in < 0:
        raise ParameterError("incident amplitude is real and non-negative by convention")
    return alpha_in * np.sqrt(fsr / kappa)


def rayleigh_loss_rate(gamma, u0, delta):
    """Single-photon Rayleigh scattering rate gamma_0 = Gamma U0 / Delta = Gamma Omega_1^2 / Delta^2."""
    if delta == 0:
        raise ZeroDetuningError("Rayleigh rate undefined at zero detuning")
    return gamma * u0 / delta


# ---------------------------------------------------------------------------
# parameter records
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AtomSpecies:
    mass: float
    natural_linewidth: float
    reference_lines: tuple
    label: str = ""

    def __post_init__(self):
        _require_positive("mass", self.mass)
        _require_positive("natural linewidth", self.natural_linewidth)
        lines = tuple(float(x) for x in self.reference_lines)
        if not lines:
            raise ParameterError("species needs at least one reference line")
        for x in lines:
            _require_positive("line wavelength", x)
        object.__setattr__(self, "reference_lines", lines)

    @classmethod
    def from_dict(cls, doc):
        try:
            return cls(
                mass=float(doc["mass_kg"]),
                natural_linewidth=float(doc["gamma_rad_per_s"]),
                reference_lines=tuple(doc["lines_m"]),
                label=str(doc.get("label", "")),
            )
        except KeyError as exc:
            raise ParameterError(f"species fixture missing key {exc.args[0]!r}") from None

    def to_dict(self):
        return {
            "label": self.label,
            "mass_kg": self.mass,
            "gamma_rad_per_s": self.natural_linewidth,
            "lines_m": list(self.reference_lines),
        }


def load_species(name_or_path="rb87"):
    """Load a species fixture by bundled name (``rb87``) or JSON path."""
    path = Path(name_or_path)
    if path.suffix == ".json" and path.exists():
        text = path.read_text()
    else:
        try:
            text = resources.files("carlsim.data").joinpath(f"{name_or_path}.json").read_text()
        except FileNotFoundError:
            raise ParameterError(f"unknown species fixture {name_or_path!r}") from None
    return AtomSpecies.from_dict(json.loads(text))


@dataclass(frozen=True)
class CavityGeometry:
    round_trip_length: float
    mode_waist: float
    finesse: float

    def __post_init__(self):
        _require_positive("round-trip length", self.round_trip_length)
        _require_positive("mode waist", self.mode_waist)
        if not self.finesse > 1:
            raise ParameterError(f"finesse must be > 1, got {self.finesse!r}")


@dataclass(frozen=True)
class PumpConfig:
    wavelength: float
    power: float
    profile: PumpProfile = field(default_factory=PumpProfile)

    def __post_init__(self):
        _require_positive("pump wavelength", self.wavelength)
        if self.power < 0:
            raise ParameterError(f"pump power must be >= 0, got {self.power!r}")


@dataclass(frozen=True)
class CavityAtomParams:
    """Inputs plus every derived rate the simulator consumes.

    Derived rates are computed lazily from the inputs only, so two equal
    records always produce bit-identical derived values.
    """

    species: AtomSpecies
    cavity: CavityGeometry
    pump: PumpConfig

    @cached_property
    def fsr(self):
        return free_spectral_range(self.cavity.round_trip_length)

    @cached_property
    def kappa(self):
        return cavity_decay_rate(self.fsr, self.cavity.finesse)

    @cached_property
    def k(self):
        return wavenumber(self.pump.wavelength)

    @cached_property
    def omega_r(self):
        return recoil_frequency(self.pump.wavelength, self.species.mass)

    @cached_property
    def delta(self):
        return detuning(self.pump.wavelength, self.species)

    @cached_property
    def rabi1(self):
        return single_photon_rabi(
            self.species.natural_linewidth, self.k, self.cavity.mode_waist, self.cavity.round_trip_length
        )

    @cached_property
    def u0(self):
        return light_shift(self.rabi1, self.delta)

    @cached_property
    def photon_energy(self):
        return photon_energy(self.pump.wavelength)

    @cached_property
    def n_plus(self):
        """Pump photon number at peak pump power."""
        return photon_number(self.pump.power, self.pump.wavelength, self.fsr)

    @cached_property
    def gamma0(self):
        return rayleigh_loss_rate(self.species.natural_linewidth, self.u0, self.delta)

    def photons(self, power):
        return photon_number(power, self.pump.wavelength, self.fsr)

    def power(self, n):
        return power_from_photons(n, self.pump.wavelength, self.fsr)

    def derived(self):
        return {
            "fsr_hz": self.fsr,
            "kappa_c": self.kappa,
            "k": self.k,
            "omega_r": self.omega_r,
            "delta": self.delta,
            "rabi1": self.rabi1,
            "u0": self.u0,
            "n_plus": self.n_plus,
            "photon_energy_j": self.photon_energy,
            "gamma0": self.gamma0,
        }
