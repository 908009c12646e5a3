"""Hot inner loops: fixed-step RK4 and Crank-Nicolson time stepping.

The loops are numba-compiled when numba is importable. Setting
``MEMOSC_NO_NUMBA=1`` forces the plain NumPy/SciPy path; the script under
``benchmarks/`` compares the two. Both paths compute the same recurrences,
so results agree to roundoff.
"""

from __future__ import annotations

import os

import numpy as np

MODEL_NEW = 0
MODEL_CK = 1


def _rk4_damped_loop(kind, gamma, omega, t0, x0, v0, t_start, t_end, n_steps):
    """Fixed-step RK4 for xddot = -2*kappa(t)*xdot - omega^2*x.

    kind selects kappa: MODEL_NEW gives gamma*tanh(gamma*(t-t0)), MODEL_CK a
    constant gamma. Returns the final (x, v).
    """
    h = (t_end - t_start) / n_steps
    w2 = omega * omega
    x = x0
    v = v0
    for i in range(n_steps):
        t = t_start + i * h
        th = t + 0.5 * h
        tf = t + h

        if kind == MODEL_NEW:
            k_a = gamma * np.tanh(gamma * (t - t0))
            k_h = gamma * np.tanh(gamma * (th - t0))
            k_f = gamma * np.tanh(gamma * (tf - t0))
        else:
            k_a = gamma
            k_h = gamma
            k_f = gamma

        k1x = v
        k1v = -2.0 * k_a * v - w2 * x

        x2 = x + 0.5 * h * k1x
        v2 = v + 0.5 * h * k1v
        k2x = v2
        k2v = -2.0 * k_h * v2 - w2 * x2

        x3 = x + 0.5 * h * k2x
        v3 = v + 0.5 * h * k2v
        k3x = v3
        k3v = -2.0 * k_h * v3 - w2 * x3

        x4 = x + h * k3x
        v4 = v + h * k3v
        k4x = v4
        k4v = -2.0 * k_f * v4 - w2 * x4

        x = x + (h / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
        v = v + (h / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
    return x, v


def _cn_evolve_loop(psi0, x2, dx, dt, masses, omega, hbar):
    """Crank-Nicolson stepping with a per-step mass and potential m*omega^2*x^2/2.

    Tridiagonal Thomas solve per step; hard-wall boundaries. masses holds the
    midpoint mass of every step. Returns the final wavefunction.
    """
    n = psi0.shape[0]
    psi = psi0.copy()
    delta = np.empty(n, np.complex128)
    rhs = np.empty(n, np.complex128)
    cp = np.empty(n, np.complex128)
    dp = np.empty(n, np.complex128)
    half_w2 = 0.5 * omega * omega
    for k in range(masses.shape[0]):
        m = masses[k]
        beta = hbar * dt / (4.0 * m * dx * dx)
        off = -1j * beta
        for j in range(n):
            d = 2.0 * beta + dt * (half_w2 * m * x2[j]) / (2.0 * hbar)
            delta[j] = 1j * d
        for j in range(n):
            left = psi[j - 1] if j > 0 else 0.0 + 0.0j
            right = psi[j + 1] if j < n - 1 else 0.0 + 0.0j
            rhs[j] = (1.0 - delta[j]) * psi[j] + 1j * beta * (left + right)
        # Thomas sweep for the (off, 1 + delta, off) system
        b0 = 1.0 + delta[0]
        cp[0] = off / b0
        dp[0] = rhs[0] / b0
        for j in range(1, n):
            denom = (1.0 + delta[j]) - off * cp[j - 1]
            cp[j] = off / denom
            dp[j] = (rhs[j] - off * dp[j - 1]) / denom
        psi[n - 1] = dp[n - 1]
        for j in range(n - 2, -1, -1):
            psi[j] = dp[j] - cp[j] * psi[j + 1]
    return psi


def _cn_evolve_banded(psi0, x2, dx, dt, masses, omega, hbar):
    """Fallback Crank-Nicolson step loop using scipy's banded solver."""
    from scipy.linalg import solve_banded

    n = psi0.shape[0]
    psi = psi0.copy()
    half_w2 = 0.5 * omega * omega
    ab = np.zeros((3, n), dtype=np.complex128)
    for k in range(masses.shape[0]):
        m = masses[k]
        beta = hbar * dt / (4.0 * m * dx * dx)
        delta = 1j * (2.0 * beta + dt * (half_w2 * m * x2) / (2.0 * hbar))
        rhs = (1.0 - delta) * psi
        rhs[:-1] += 1j * beta * psi[1:]
        rhs[1:] += 1j * beta * psi[:-1]
        ab[0, 1:] = -1j * beta
        ab[1, :] = 1.0 + delta
        ab[2, :-1] = -1j * beta
        psi = solve_banded((1, 1), ab, rhs)
    return psi


def _numba_enabled() -> bool:
    if os.environ.get("MEMOSC_NO_NUMBA", "").strip().lower() in ("1", "true", "yes"):
        return False
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


rk4_damped_python = _rk4_damped_loop
cn_evolve_python = _cn_evolve_banded

if _numba_enabled():
    from numba import njit

    rk4_damped_numba = njit(cache=True)(_rk4_damped_loop)
    cn_evolve_numba = njit(cache=True)(_cn_evolve_loop)
    rk4_damped = rk4_damped_numba
    cn_evolve = cn_evolve_numba
    BACKEND = "numba"
else:
    rk4_damped_numba = None
    cn_evolve_numba = None
    rk4_damped = rk4_damped_python
    cn_evolve = cn_evolve_python
    BACKEND = "numpy"
