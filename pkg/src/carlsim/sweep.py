"""Parameter sweeps over scenario documents and log-log exponent fits."""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import stats

from carlsim.dynamics import IntegrationDiverged, run
from carlsim.gain import gain_report
from carlsim.observables import find_peaks
from carlsim.params import ParameterError
from carlsim.scenario_io import ScenarioError, get_path, normalize, scenario_from_doc, set_path

FIXED = "fixed"
INCREMENTING = "incrementing"

# relative change of P_-,1 under dt -> dt/2 that still counts as converged
DT_TOLERANCE = 0.05

ROW_COLUMNS = ("index", "value", "P_minus_1_W", "delay_s", "delay_12_s", "mean_p_final",
               "regime", "converged_dt", "error")


class FitDomainError(ValueError):
    pass


@dataclass(frozen=True)
class SweepSpec:
    base: dict                 # scenario document
    path: str                  # dotted path to a numeric leaf
    values: tuple
    seed_policy: str = FIXED
    check_dt: bool = False
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "base", normalize(self.base))
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if len(self.values) < 2:
            raise ScenarioError("a sweep needs at least two values")
        if self.seed_policy not in (FIXED, INCREMENTING):
            raise ScenarioError(f"seed policy must be {FIXED!r} or {INCREMENTING!r}")
        if self.workers < 1:
            raise ScenarioError("workers must be >= 1")
        set_path(self.base, self.path, self.values[0])

    def point_doc(self, index):
        doc = set_path(self.base, self.path, self.values[index])
        if self.seed_policy == INCREMENTING and self.path != "atoms.seed":
            doc = set_path(doc, "atoms.seed", int(get_path(self.base, "atoms.seed")) + index)
        return doc


def analyze(trace, window=5, rel_threshold=0.05):
    """Summary numbers of one trace; also what ``carl analyze`` prints."""
    peaks = find_peaks(trace, window, rel_threshold)
    out = peaks.to_dict()
    out["mean_p_final"] = float(trace.mean_p[-1])
    return out


def _regime(scen):
    if scen.n_real <= 0:
        return None
    try:
        return "/".join(gain_report(scen.params, scen.n_real).regime)
    except ParameterError:
        return None


def run_point(doc, check_dt=False):
    """Simulate and analyze one scenario document. Failures end up in ``error``."""
    row = {"P_minus_1_W": None, "delay_s": None, "delay_12_s": None, "mean_p_final": None,
           "regime": None, "converged_dt": None, "error": None}
    trace = final = None
    try:
        scen = scenario_from_doc(doc)
        row["regime"] = _regime(scen)
        trace, final, _ = run(scen)
        summary = analyze(trace)
        row.update(P_minus_1_W=summary["P_minus_1_W"], delay_s=summary["delay_s"],
                   delay_12_s=summary["delay_12_s"], mean_p_final=summary["mean_p_final"])
        if check_dt:
            fine = scen.with_(dt=0.5 * scen.dt, decimation=2 * scen.decimation)
            p_fine = find_peaks(run(fine)[0]).first_power
            p = row["P_minus_1_W"]
            if p is None or p_fine is None:
                row["converged_dt"] = p is None and p_fine is None
            else:
                row["converged_dt"] = abs(p_fine - p) <= DT_TOLERANCE * abs(p)
    except (ScenarioError, ParameterError) as exc:
        row["error"] = f"invalid: {exc}"
    except IntegrationDiverged as exc:
        row["error"] = f"diverged: {exc}"
    return row, trace, final


def _point_task(args):
    index, doc, check_dt = args
    row, trace, final = run_point(doc, check_dt)
    return index, row, trace, final


@dataclass
class SweepResult:
    spec: SweepSpec
    rows: list
    traces: list = field(default_factory=list, repr=False)
    states: list = field(default_factory=list, repr=False)

    def column(self, name):
        return [r[name] for r in self.rows]

    def ok(self):
        return all(r["error"] is None for r in self.rows)

    def to_dict(self):
        return {"parameter": self.spec.path, "seed_policy": self.spec.seed_policy,
                "values": list(self.spec.values), "rows": self.rows}

    def write(self, outdir):
        """Point subdirectories plus summary.json / summary.csv."""
        outdir = Path(outdir)
        outdir.mkdir(parents=True, exist_ok=True)
        for i, row in enumerate(self.rows):
            pdir = outdir / f"point_{i:03d}"
            pdir.mkdir(exist_ok=True)
            (pdir / "scenario.json").write_text(json.dumps(self.spec.point_doc(i), indent=2) + "\n")
            if self.traces[i] is not None:
                self.traces[i].write_csv(pdir / "trace.csv")
                (pdir / "peaks.json").write_text(json.dumps(analyze(self.traces[i]), indent=2) + "\n")
            if self.states[i] is not None:
                (pdir / "final_state.json").write_text(json.dumps(self.states[i].to_dict()) + "\n")
        (outdir / "summary.json").write_text(json.dumps(self.to_dict(), indent=2) + "\n")
        write_rows_csv(self.rows, outdir / "summary.csv")


def _cell(x):
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def write_rows_csv(rows, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(ROW_COLUMNS)
        for r in rows:
            w.writerow([_cell(r[c]) for c in ROW_COLUMNS])


def run_sweep(spec, keep_traces=True):
    """One simulate + analyze per value, in input order."""
    tasks = [(i, spec.point_doc(i), spec.check_dt) for i in range(len(spec.values))]
    if spec.workers > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            results = list(pool.map(_point_task, tasks))
    else:
        results = [_point_task(t) for t in tasks]
    by_index = {i: (row, trace, final) for i, row, trace, final in results}
    rows, traces, states = [], [], []
    for i, value in enumerate(spec.values):
        row, trace, final = by_index[i]
        rows.append({"index": i, "value": value, **row})
        traces.append(trace if keep_traces else None)
        states.append(final if keep_traces else None)
    return SweepResult(spec, rows, traces, states)


@dataclass(frozen=True)
class FitResult:
    exponent: float
    prefactor: float
    r2: float
    fit_range: tuple
    n_points: int

    def to_dict(self):
        return {"exponent": self.exponent, "prefactor": self.prefactor, "r2": self.r2,
                "fit_range": list(self.fit_range), "n_points": self.n_points}


def fit_power_law(xs, ys, fit_range=None):
    """Least-squares line through (log x, log y); y = prefactor * x**exponent.

    ``fit_range`` = (lo, hi) keeps points with lo <= x <= hi.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.shape != ys.shape or xs.ndim != 1:
        raise FitDomainError("xs and ys must be 1-D and of equal length")
    if fit_range is not None:
        lo, hi = fit_range
        keep = (xs >= lo) & (xs <= hi)
        xs, ys = xs[keep], ys[keep]
    if xs.size < 3:
        raise FitDomainError(f"need at least 3 points in the fit range, got {xs.size}")
    if not (np.all(np.isfinite(xs)) and np.all(np.isfinite(ys))):
        raise FitDomainError("fit data must be finite")
    if np.any(xs <= 0) or np.any(ys <= 0):
        raise FitDomainError("power-law fit needs strictly positive data")
    lx, ly = np.log(xs), np.log(ys)
    if np.ptp(lx) == 0:
        raise FitDomainError("x values must not all coincide")
    res = stats.linregress(lx, ly)
    rng = (float(xs.min()), float(xs.max())) if fit_range is None else (float(fit_range[0]), float(fit_range[1]))
    r2 = 1.0 if np.ptp(ly) == 0 and res.slope == 0 else float(res.rvalue**2)
    return FitResult(float(res.slope), float(math.exp(res.intercept)), r2, rng, int(xs.size))


def upper_half_decade(xs):
    """Fit range covering the top half-decade of ``xs``."""
    top = float(np.max(xs))
    return (top / math.sqrt(10.0), top)
