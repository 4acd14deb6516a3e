"""Measured quantities derived from traces and ensemble states."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.constants import hbar

TRACE_COLUMNS = ("t_s", "P_plus_W", "P_minus_W", "re_alpha_minus", "im_alpha_minus", "abs_b", "mean_p_recoil")

PUMP_ON_FRACTION = 0.01


def probe_power(alpha, photon_energy, fsr):
    """Circulating probe power |alpha_-|^2 hbar omega fsr (W)."""
    return np.abs(alpha) ** 2 * photon_energy * fsr


@dataclass(frozen=True, eq=False)
class Trace:
    """Uniformly sampled run record; ``mean_p`` is along the pump, in units of 2 hbar k."""

    t: np.ndarray
    p_plus: np.ndarray
    p_minus: np.ndarray
    alpha: np.ndarray
    abs_b: np.ndarray
    mean_p: np.ndarray

    def __post_init__(self):
        n = len(self.t)
        for name in ("p_plus", "p_minus", "alpha", "abs_b", "mean_p"):
            if len(getattr(self, name)) != n:
                raise ValueError(f"trace column {name} has length {len(getattr(self, name))}, expected {n}")
        if n > 1 and np.any(np.diff(self.t) <= 0):
            raise ValueError("trace times must be strictly increasing")

    def __len__(self):
        return len(self.t)

    def scaled(self, factor):
        """Copy with the probe power multiplied by a detection scale factor."""
        return Trace(self.t, self.p_plus, self.p_minus * factor, self.alpha, self.abs_b, self.mean_p)

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(TRACE_COLUMNS)
            for row in zip(self.t, self.p_plus, self.p_minus, self.alpha.real, self.alpha.imag,
                           self.abs_b, self.mean_p):
                w.writerow([repr(float(x)) for x in row])

    @classmethod
    def read_csv(cls, path):
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        header, body = rows[0], rows[1:]
        if tuple(header) != TRACE_COLUMNS:
            raise ValueError(f"unexpected trace header {header}")
        data = np.array([[float(x) for x in r] for r in body], dtype=float).reshape(-1, len(TRACE_COLUMNS))
        return cls(
            t=data[:, 0], p_plus=data[:, 1], p_minus=data[:, 2],
            alpha=data[:, 3] + 1j * data[:, 4], abs_b=data[:, 5], mean_p=data[:, 6],
        )


@dataclass(frozen=True)
class PeakSet:
    peaks: list = field(default_factory=list)   # (t_peak, P_peak)
    t_on: float | None = None

    @property
    def first_power(self):
        return self.peaks[0][1] if self.peaks else None

    @property
    def delay(self):
        if not self.peaks or self.t_on is None:
            return None
        return self.peaks[0][0] - self.t_on

    @property
    def spacing12(self):
        if len(self.peaks) < 2:
            return None
        return self.peaks[1][0] - self.peaks[0][0]

    def to_dict(self):
        return {
            "peaks": [{"t_s": t, "P_W": p} for t, p in self.peaks],
            "t_on_s": self.t_on,
            "P_minus_1_W": self.first_power,
            "delay_s": self.delay,
            "delay_12_s": self.spacing12,
        }


def moving_average(x, window):
    if window == 1:
        return np.asarray(x, dtype=float).copy()
    x = np.asarray(x, dtype=float)
    left = (window - 1) // 2
    right = window - 1 - left
    padded = np.concatenate([np.full(left, x[0]), x, np.full(right, x[-1])])
    kernel = np.full(window, 1.0 / window)
    return np.convolve(padded, kernel, mode="valid")


def pump_on_time(t, p_plus, fraction=PUMP_ON_FRACTION):
    p_plus = np.asarray(p_plus)
    top = p_plus.max() if p_plus.size else 0.0
    if top <= 0:
        return None
    return float(t[np.argmax(p_plus > fraction * top)])


def find_peaks(trace, window=5, rel_threshold=0.05):
    """Local maxima of the smoothed probe power above ``rel_threshold`` of its maximum.

    Peak powers are read from the raw trace (largest sample within the
    smoothing window around each smoothed maximum).
    """
    if len(trace) == 0:
        raise ValueError("empty trace")
    if window < 1:
        raise ValueError("smoothing window must be >= 1")
    if not 0 < rel_threshold < 1:
        raise ValueError("rel_threshold must lie in (0, 1)")
    t_on = pump_on_time(trace.t, trace.p_plus)
    raw = np.asarray(trace.p_minus, dtype=float)
    smooth = moving_average(raw, window)
    top = smooth.max()
    if not top > 0:
        return PeakSet([], t_on)
    mid = smooth[1:-1]
    idx = np.flatnonzero((mid > smooth[:-2]) & (mid > smooth[2:]) & (mid > rel_threshold * top)) + 1
    half = window // 2
    peaks = []
    for i in idx:
        lo, hi = max(i - half, 0), min(i + half + 1, raw.size)
        j = lo + int(np.argmax(raw[lo:hi]))
        peaks.append((float(trace.t[j]), float(raw[j])))
    return PeakSet(peaks, t_on)


def mean_momentum(p, k):
    """Mean of momenta ``p`` (kg m/s) in units of 2 hbar k."""
    p = np.asarray(p, dtype=float)
    return float(p.mean() / (2.0 * hbar * k))


def momentum_saturation(trace, window):
    """Mean d<p>/dt over ``window`` = (t0, t1) relative to its maximum over the run."""
    t = np.asarray(trace.t, dtype=float)
    rate = np.gradient(np.asarray(trace.mean_p, dtype=float), t)
    top = rate.max()
    if not top > 0:
        raise ValueError("mean momentum never increases")
    sel = (t >= window[0]) & (t <= window[1])
    if not sel.any():
        raise ValueError("saturation window lies outside the trace")
    return float(rate[sel].mean() / top)


@dataclass(frozen=True, eq=False)
class MomentumHistogram:
    orders: np.ndarray     # integer multiples n of 2 hbar k
    weights: np.ndarray    # real-atom counts

    def mean(self):
        total = self.weights.sum()
        return float((self.orders * self.weights).sum() / total) if total > 0 else 0.0

    def to_dict(self):
        return {"orders": self.orders.tolist(), "weights": self.weights.tolist()}


def nearest_order(p, k):
    """Nearest recoil order n of p/(2 hbar k); exact half-integers round toward zero."""
    x = np.asarray(p, dtype=float) / (2.0 * hbar * k)
    return (np.sign(x) * np.ceil(np.abs(x) - 0.5)).astype(int)


def momentum_histogram(p, k, n_real):
    """Bin macro-atom momenta on the 2 hbar k ladder, each weighted n_real/N_s."""
    p = np.asarray(p, dtype=float)
    orders = nearest_order(p, k)
    lo, hi = orders.min(), orders.max()
    counts = np.bincount(orders - lo, minlength=hi - lo + 1).astype(float)
    return MomentumHistogram(np.arange(lo, hi + 1), counts * (n_real / p.size))


@dataclass(frozen=True, eq=False)
class TofProfile:
    x: np.ndarray
    density: np.ndarray
    t_tof: float
    truncated: bool = False

    def to_dict(self):
        return {"x_m": self.x.tolist(), "density": self.density.tolist(), "t_tof_s": self.t_tof,
                "flags": ["grid_truncated"] if self.truncated else []}


def tof_profile(p, mass, n_real, t_tof, sigma_x=10e-6, grid=None):
    """Integrated density after ballistic flight: one Gaussian per macro-atom at p t/m.

    ``grid`` defaults to 2001 points spanning the displaced cloud +- 6 sigma_x.
    Each Gaussian is normalized to its weight, so the density integrates to n_real.
    """
    if not t_tof > 0:
        raise ValueError("t_tof must be > 0")
    if not sigma_x > 0:
        raise ValueError("sigma_x must be > 0")
    p = np.asarray(p, dtype=float)
    centers = p * t_tof / mass
    reach = np.abs(centers).max() + 5.0 * sigma_x
    if grid is None:
        span = np.abs(centers).max() + 6.0 * sigma_x
        grid = np.linspace(-span, span, 2001)
    grid = np.asarray(grid, dtype=float)
    steps = np.diff(grid)
    if grid.ndim != 1 or grid.size < 2 or not np.allclose(steps, steps[0], rtol=1e-9, atol=0):
        raise ValueError("TOF grid must be uniform")
    truncated = bool(grid[0] > -reach or grid[-1] < reach)
    w = n_real / p.size
    norm = w / (math.sqrt(2.0 * math.pi) * sigma_x)
    density = norm * np.exp(-0.5 * ((grid[:, None] - centers[None, :]) / sigma_x) ** 2).sum(axis=1)
    return TofProfile(grid, density, t_tof, truncated)
