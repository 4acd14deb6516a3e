"""Time-stepping kernels for the macro-atom/probe-field equations.

Two interchangeable implementations integrate the same right-hand side:
an explicit-loop version compiled with numba, and a vectorized pure-numpy
version. ``CARLSIM_BACKEND=numpy`` (or a missing numba) selects the latter.

State layout: positions ``z`` (m), momenta ``p`` (kg m/s), probe amplitude
``alpha`` (complex, sqrt(photons)). ``coef`` packs the model constants, see
``COEF_*`` indices. ``apump`` holds the real pump amplitude on the half-step
grid t0 + i*dt/2, i = 0..2*nsteps.
"""

from __future__ import annotations

import os

import numpy as np

COEF_MASS = 0
COEF_K = 1
COEF_FORCE = 2          # 4 hbar k U0
COEF_U0_WEIGHT = 3      # U0 * N / N_s
COEF_KAPPA = 4
COEF_DELTA_C = 5
COEF_US_RE = 6          # Re(U_s e^{-i phi_s})
COEF_US_IM = 7          # Im(U_s e^{-i phi_s})
COEF_RP_FORCE = 8       # hbar k gamma0, zero when radiation pressure is off
COEF_RP_LOSS = 9        # N gamma0, zero when radiation pressure is off
COEF_OVERFLOW = 10
N_COEF = 11

EULER = 0
RK4 = 1

# Sums of N_s unit phasors below this (per atom) are rounding residue of a
# symmetric configuration, not a physical seed.
BUNCHING_FLOOR = 1e-13

OK = -1


def _backend_from_env():
    choice = os.environ.get("CARLSIM_BACKEND", "numba").strip().lower()
    if choice not in ("numba", "numpy"):
        raise ValueError(f"CARLSIM_BACKEND must be 'numba' or 'numpy', got {choice!r}")
    if choice == "numba":
        try:
            import numba  # noqa: F401
        except ImportError:
            return "numpy"
    return choice


BACKEND = _backend_from_env()


# ---------------------------------------------------------------------------
# pure numpy
# ---------------------------------------------------------------------------

def _rhs_numpy(z, p, alpha, ap, coef):
    theta = 2.0 * coef[COEF_K] * z
    cos_t = np.cos(theta)
    sin_t = np.sin(theta)
    n_s = z.shape[0]
    s = complex(cos_t.sum(), -sin_t.sum())
    if abs(s) <= BUNCHING_FLOOR * n_s:
        s = 0j
    dz = p / coef[COEF_MASS]
    # Im(alpha e^{i theta})
    dp = coef[COEF_FORCE] * ap * (alpha.real * sin_t + alpha.imag * cos_t)
    us = complex(coef[COEF_US_RE], coef[COEF_US_IM])
    da = (-(coef[COEF_KAPPA] + 1j * coef[COEF_DELTA_C]) * alpha
          - 1j * coef[COEF_U0_WEIGHT] * ap * s
          - 1j * us * ap)
    if coef[COEF_RP_FORCE] != 0.0 or coef[COEF_RP_LOSS] != 0.0:
        dp = dp - coef[COEF_RP_FORCE] * (ap * ap - abs(alpha) ** 2)
        b = s / n_s
        da = da - coef[COEF_RP_LOSS] * (alpha + ap * b)
    return dz, dp, da


def _bunching_numpy(z, k):
    theta = 2.0 * k * z
    n_s = z.shape[0]
    s = complex(np.cos(theta).sum(), -np.sin(theta).sum())
    if abs(s) <= BUNCHING_FLOOR * n_s:
        s = 0j
    return s / n_s


def _diverged(z, p, alpha, limit):
    return not (np.isfinite(alpha) and abs(alpha) < limit
                and np.all(np.isfinite(p)) and np.all(np.abs(p) < limit)
                and np.all(np.isfinite(z)) and np.all(np.abs(z) < limit))


def integrate_numpy(z, p, alpha, t0, dt, nsteps, decim, apump, coef, method,
                    rec_t, rec_alpha, rec_b, rec_p):
    """Advance in place; fill the record arrays; return (alpha, status).

    status is ``OK`` or the index of the first step whose result diverged.
    """
    k = coef[COEF_K]
    limit = coef[COEF_OVERFLOW]
    inv_ns = 1.0 / z.shape[0]
    rec_t[0] = t0
    rec_alpha[0] = alpha
    rec_b[0] = _bunching_numpy(z, k)
    rec_p[0] = p.sum() * inv_ns
    r = 1
    for n in range(nsteps):
        ap0 = apump[2 * n]
        if method == EULER:
            dz, dp, da = _rhs_numpy(z, p, alpha, ap0, coef)
            z += dt * dz
            p += dt * dp
            alpha = alpha + dt * da
        else:
            aph = apump[2 * n + 1]
            ap1 = apump[2 * n + 2]
            h = 0.5 * dt
            k1z, k1p, k1a = _rhs_numpy(z, p, alpha, ap0, coef)
            k2z, k2p, k2a = _rhs_numpy(z + h * k1z, p + h * k1p, alpha + h * k1a, aph, coef)
            k3z, k3p, k3a = _rhs_numpy(z + h * k2z, p + h * k2p, alpha + h * k2a, aph, coef)
            k4z, k4p, k4a = _rhs_numpy(z + dt * k3z, p + dt * k3p, alpha + dt * k3a, ap1, coef)
            w = dt / 6.0
            z += w * (k1z + 2.0 * k2z + 2.0 * k3z + k4z)
            p += w * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)
            alpha = alpha + w * (k1a + 2.0 * k2a + 2.0 * k3a + k4a)
        if _diverged(z, p, alpha, limit):
            return alpha, n
        if (n + 1) % decim == 0:
            rec_t[r] = t0 + (n + 1) * dt
            rec_alpha[r] = alpha
            rec_b[r] = _bunching_numpy(z, k)
            rec_p[r] = p.sum() * inv_ns
            r += 1
    return alpha, OK


# ---------------------------------------------------------------------------
# numba
# ---------------------------------------------------------------------------

def _rhs_loop(z, p, alpha, ap, coef, dz, dp):
    mass = coef[COEF_MASS]
    two_k = 2.0 * coef[COEF_K]
    force = coef[COEF_FORCE] * ap
    ar = alpha.real
    ai = alpha.imag
    sr = 0.0
    si = 0.0
    n_s = z.shape[0]
    for j in range(n_s):
        th = two_k * z[j]
        ct = np.cos(th)
        st = np.sin(th)
        sr += ct
        si -= st
        dz[j] = p[j] / mass
        dp[j] = force * (ar * st + ai * ct)
    if np.sqrt(sr * sr + si * si) <= BUNCHING_FLOOR * n_s:
        sr = 0.0
        si = 0.0
    s = complex(sr, si)
    us = complex(coef[COEF_US_RE], coef[COEF_US_IM])
    da = (-(coef[COEF_KAPPA] + 1j * coef[COEF_DELTA_C]) * alpha
          - 1j * coef[COEF_U0_WEIGHT] * ap * s
          - 1j * us * ap)
    rp_force = coef[COEF_RP_FORCE]
    rp_loss = coef[COEF_RP_LOSS]
    if rp_force != 0.0 or rp_loss != 0.0:
        push = rp_force * (ap * ap - (ar * ar + ai * ai))
        for j in range(n_s):
            dp[j] -= push
        da -= rp_loss * (alpha + ap * s / n_s)
    return da


def _bunching_loop(z, k):
    sr = 0.0
    si = 0.0
    n_s = z.shape[0]
    for j in range(n_s):
        th = 2.0 * k * z[j]
        sr += np.cos(th)
        si -= np.sin(th)
    if np.sqrt(sr * sr + si * si) <= BUNCHING_FLOOR * n_s:
        return 0j
    return complex(sr, si) / n_s


def _diverged_loop(z, p, alpha, limit):
    if not (np.isfinite(alpha.real) and np.isfinite(alpha.imag)) or abs(alpha) >= limit:
        return True
    for j in range(z.shape[0]):
        if not (np.isfinite(z[j]) and np.isfinite(p[j])):
            return True
        if abs(z[j]) >= limit or abs(p[j]) >= limit:
            return True
    return False


def _mean(x):
    s = 0.0
    for j in range(x.shape[0]):
        s += x[j]
    return s / x.shape[0]


def integrate_loop(z, p, alpha, t0, dt, nsteps, decim, apump, coef, method,
                   rec_t, rec_alpha, rec_b, rec_p):
    k = coef[COEF_K]
    limit = coef[COEF_OVERFLOW]
    n_s = z.shape[0]
    dz1 = np.empty(n_s)
    dp1 = np.empty(n_s)
    dz2 = np.empty(n_s)
    dp2 = np.empty(n_s)
    dz3 = np.empty(n_s)
    dp3 = np.empty(n_s)
    dz4 = np.empty(n_s)
    dp4 = np.empty(n_s)
    zt = np.empty(n_s)
    pt = np.empty(n_s)
    rec_t[0] = t0
    rec_alpha[0] = alpha
    rec_b[0] = _bunching_loop(z, k)
    rec_p[0] = _mean(p)
    r = 1
    for n in range(nsteps):
        ap0 = apump[2 * n]
        if method == EULER:
            da = _rhs_loop(z, p, alpha, ap0, coef, dz1, dp1)
            for j in range(n_s):
                z[j] += dt * dz1[j]
                p[j] += dt * dp1[j]
            alpha = alpha + dt * da
        else:
            aph = apump[2 * n + 1]
            ap1 = apump[2 * n + 2]
            h = 0.5 * dt
            k1a = _rhs_loop(z, p, alpha, ap0, coef, dz1, dp1)
            for j in range(n_s):
                zt[j] = z[j] + h * dz1[j]
                pt[j] = p[j] + h * dp1[j]
            k2a = _rhs_loop(zt, pt, alpha + h * k1a, aph, coef, dz2, dp2)
            for j in range(n_s):
                zt[j] = z[j] + h * dz2[j]
                pt[j] = p[j] + h * dp2[j]
            k3a = _rhs_loop(zt, pt, alpha + h * k2a, aph, coef, dz3, dp3)
            for j in range(n_s):
                zt[j] = z[j] + dt * dz3[j]
                pt[j] = p[j] + dt * dp3[j]
            k4a = _rhs_loop(zt, pt, alpha + dt * k3a, ap1, coef, dz4, dp4)
            w = dt / 6.0
            for j in range(n_s):
                z[j] += w * (dz1[j] + 2.0 * dz2[j] + 2.0 * dz3[j] + dz4[j])
                p[j] += w * (dp1[j] + 2.0 * dp2[j] + 2.0 * dp3[j] + dp4[j])
            alpha = alpha + w * (k1a + 2.0 * k2a + 2.0 * k3a + k4a)
        if _diverged_loop(z, p, alpha, limit):
            return alpha, n
        if (n + 1) % decim == 0:
            rec_t[r] = t0 + (n + 1) * dt
            rec_alpha[r] = alpha
            rec_b[r] = _bunching_loop(z, k)
            rec_p[r] = _mean(p)
            r += 1
    return alpha, OK


_compiled = None


def _compile():
    """JIT-compile the loop kernels; the pure-Python originals stay importable."""
    global _compiled
    if _compiled is None:
        import numba

        jit = numba.njit(cache=True)
        g = globals()
        # integrate_loop resolves these names at compile time
        for name in ("_rhs_loop", "_bunching_loop", "_diverged_loop", "_mean"):
            g[name] = jit(g[name])
        _compiled = jit(integrate_loop)
    return _compiled


def numba_available():
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


def get_integrator(backend=None):
    """Return the integrator for ``backend`` ('numba' or 'numpy'; default from env)."""
    backend = backend or BACKEND
    if backend == "numba":
        if not numba_available():
            raise RuntimeError("numba backend requested but numba is not installed")
        return _compile()
    if backend == "numpy":
        return integrate_numpy
    raise ValueError(f"unknown backend {backend!r}")
