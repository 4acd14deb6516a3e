"""Pump switch-on profiles."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

STEP = "step"
SERVO_RAMP = "servo_ramp"
SAMPLED = "sampled"

_KINDS = (STEP, SERVO_RAMP, SAMPLED)


class PumpProfileError(ValueError):
    pass


@dataclass(frozen=True)
class PumpProfile:
    """Relative pump power versus time, scaled by the peak power at evaluation.

    ``servo_ramp`` follows (1 - exp(-t/tau))**2, the power of a field that
    builds up exponentially with the servo time constant. ``sampled`` replays
    a (time, power) table in watts and ignores the peak power.
    """

    kind: str = STEP
    tau: float = 20e-6
    samples: tuple = ()

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise PumpProfileError(f"unknown pump profile kind {self.kind!r}; expected one of {_KINDS}")
        if self.kind == SERVO_RAMP and not self.tau > 0:
            raise PumpProfileError("servo ramp needs tau > 0")
        if self.kind == SAMPLED:
            if len(self.samples) == 0:
                raise PumpProfileError("sampled pump profile needs a non-empty table")
            table = tuple((float(t), float(p)) for t, p in self.samples)
            times = [t for t, _ in table]
            if any(b <= a for a, b in zip(times, times[1:])):
                raise PumpProfileError("sampled pump times must be strictly increasing")
            if any(p < 0 for _, p in table):
                raise PumpProfileError("sampled pump powers must be >= 0")
            object.__setattr__(self, "samples", table)


def pump_power_at(profile, t, peak=1.0):
    """Pump power (W) at time(s) ``t`` >= 0."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("pump power requested at negative time")
    if profile.kind == STEP:
        out = np.full_like(t, peak)
    elif profile.kind == SERVO_RAMP:
        out = peak * (-np.expm1(-t / profile.tau)) ** 2
    else:
        if len(profile.samples) == 0:
            raise PumpProfileError("sampled pump profile needs a non-empty table")
        ts, ps = np.asarray(profile.samples, dtype=float).T
        out = np.interp(t, ts, ps)
    return float(out) if out.ndim == 0 else out
