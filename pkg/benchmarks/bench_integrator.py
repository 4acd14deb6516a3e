"""Wall time of the numba and pure-numpy integrators on the same scenario.

    python3 benchmarks/bench_integrator.py --n-sim 100 200 --duration 100e-6
"""

import argparse
import json
import time

import numpy as np

from carlsim import kernels
from carlsim.dynamics import BackscatterModel, Scenario, simulate
from carlsim.params import CavityAtomParams, CavityGeometry, PumpConfig, load_species


def scenario(n_sim, duration, method):
    params = CavityAtomParams(load_species(), CavityGeometry(0.085, 100e-6, 87000.0), PumpConfig(796.1e-9, 1.43))
    return Scenario(params, 1e6, n_sim=n_sim, duration=duration, method=method,
                    backscatter=BackscatterModel(0.02 * params.kappa))


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n-sim", type=int, nargs="+", default=[100, 400])
    ap.add_argument("--duration", type=float, default=100e-6)
    ap.add_argument("--method", choices=("euler", "rk4"), default="euler")
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--json", action="store_true", help="print rows as JSON")
    args = ap.parse_args()

    # the first call compiles, or loads numba's on-disk cache
    t0 = time.perf_counter()
    kernels.get_integrator("numba")
    simulate(scenario(args.n_sim[0], 1e-7, args.method), backend="numba")
    compile_s = time.perf_counter() - t0

    rows = []
    for n_sim in args.n_sim:
        scen = scenario(n_sim, args.duration, args.method)
        t_numba = best_of(lambda: simulate(scen, backend="numba"), args.repeat)
        t_numpy = best_of(lambda: simulate(scen, backend="numpy"), 1)
        short = scen.with_(duration=min(args.duration, 5e-6))
        a = simulate(short, backend="numba").p_minus
        b = simulate(short, backend="numpy").p_minus
        agree = float(np.max(np.abs(a - b)) / max(np.max(np.abs(b)), 1e-300))
        rows.append({"n_sim": n_sim, "steps": scen.nsteps, "numba_s": t_numba, "numpy_s": t_numpy,
                     "speedup": t_numpy / t_numba, "max_rel_diff_5us": agree})

    if args.json:
        print(json.dumps({"compile_s": compile_s, "rows": rows}, indent=2))
        return
    print(f"jit setup {compile_s:.2f} s, {args.method}, {args.duration * 1e6:g} us")
    print(f"{'N_s':>6} {'steps':>8} {'numba [s]':>10} {'numpy [s]':>10} {'speedup':>8} {'rel diff':>9}")
    for r in rows:
        print(f"{r['n_sim']:6d} {r['steps']:8d} {r['numba_s']:10.3f} {r['numpy_s']:10.3f} "
              f"{r['speedup']:8.1f} {r['max_rel_diff_5us']:9.1e}")


if __name__ == "__main__":
    main()
