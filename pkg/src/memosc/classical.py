"""Exact classical phase-space evolution for both damping models.

The memory model carries a friction coefficient 2*gamma*tanh(gamma*(t-t0))
that remembers the initial instant t0; the Caldirola-Kanai model has constant
friction 2*gamma. Both are realized as time-dependent-mass Hamiltonian flows,
so every evolution matrix has unit determinant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import _kernels
from .core import (
    DomainError,
    EvolutionMatrix,
    ModelKind,
    OscillatorParams,
    PhaseState,
    derived_frequency,
)

# Step for the self-checking RK4 oracle, relative to the integration span.
RK4_REL_STEP = 1e-5
RK4_RICHARDSON_TOL = 1e-9


def mass_at(model: ModelKind, t: float, p: OscillatorParams) -> float:
    """Time-dependent mass m(t); equals m0 at the memory time for both models."""
    tau = t - p.t0
    if model is ModelKind.NONLOCAL_NEW:
        return p.m0 * math.cosh(p.gamma * tau) ** 2
    return p.m0 * math.exp(2.0 * p.gamma * tau)


@dataclass(frozen=True)
class MassFunction:
    """Mass profile of one model, anchored to the reference mass at the memory time."""

    model: ModelKind
    params: OscillatorParams

    @property
    def reference_mass(self) -> float:
        return self.params.m0

    def at(self, t: float) -> float:
        return mass_at(self.model, t, self.params)


def kappa(model: ModelKind, t: float, p: OscillatorParams) -> float:
    """Half the logarithmic mass derivative; the friction coefficient is 2*kappa."""
    if model is ModelKind.NONLOCAL_NEW:
        return p.gamma * math.tanh(p.gamma * (t - p.t0))
    return p.gamma


def kappa_rate(model: ModelKind, t: float, p: OscillatorParams) -> float:
    """Analytic time derivative of kappa."""
    if model is ModelKind.NONLOCAL_NEW:
        c = math.cosh(p.gamma * (t - p.t0))
        return (p.gamma / c) * (p.gamma / c)
    return 0.0


def verify_kappa_riccati(model: ModelKind, t: float, p: OscillatorParams) -> float:
    """Residual |kappa_dot + kappa^2 - gamma^2| of the friction Riccati identity."""
    k = kappa(model, t, p)
    return abs(kappa_rate(model, t, p) + k * k - p.gamma * p.gamma)


def newton_rhs(model: ModelKind, t: float, x: float, xdot: float, p: OscillatorParams) -> float:
    """Acceleration of the damped oscillator: -2*kappa(t)*xdot - omega^2*x."""
    return -2.0 * kappa(model, t, p) * xdot - p.omega * p.omega * x


def evolution_matrix(model: ModelKind, t: float, p: OscillatorParams) -> EvolutionMatrix:
    """Exact map from (x, p) at the memory time to (x, p) at t; det = 1."""
    tau = t - p.t0
    if tau < 0:
        raise DomainError(f"evolution is defined for t >= t0, got t - t0 = {tau}")
    big_omega = derived_frequency(p)
    g = p.gamma
    c = math.cos(big_omega * tau)
    s = math.sin(big_omega * tau)
    if model is ModelKind.NONLOCAL_NEW:
        ch = math.cosh(g * tau)
        sh = math.sinh(g * tau)
        # pp = m(t) * d/dt of the closed-form x(t); a variant with a leading
        # big_omega factor on the first term breaks det = 1.
        return EvolutionMatrix(
            xx=c / ch,
            xp=s / (p.m0 * big_omega * ch),
            px=-p.m0 * (big_omega * ch * s + g * sh * c),
            pp=ch * c - (g / big_omega) * sh * s,
        )
    e_minus = math.exp(-g * tau)
    e_plus = math.exp(g * tau)
    ratio = g / big_omega
    return EvolutionMatrix(
        xx=(c + ratio * s) * e_minus,
        xp=s * e_minus / (p.m0 * big_omega),
        px=-p.m0 * big_omega * (1.0 + ratio * ratio) * s * e_plus,
        pp=(c - ratio * s) * e_plus,
    )


def pure_damping_matrix(model: ModelKind, t: float, p: OscillatorParams) -> EvolutionMatrix:
    """Drift map of the omega = 0 dynamics: unit diagonal, friction-limited xp entry."""
    tau = t - p.t0
    if tau < 0:
        raise DomainError(f"evolution is defined for t >= t0, got t - t0 = {tau}")
    if p.gamma <= 0:
        raise DomainError(
            "pure damping needs gamma > 0; the gamma -> 0 limit is the free drift xp = (t - t0)/m0"
        )
    g = p.gamma
    if model is ModelKind.NONLOCAL_NEW:
        xp = math.tanh(g * tau) / (p.m0 * g)
    else:
        xp = math.sinh(g * tau) * math.exp(-g * tau) / (p.m0 * g)
    return EvolutionMatrix(1.0, xp, 0.0, 1.0)


def asymptotic_matrix(model: ModelKind, p: OscillatorParams) -> EvolutionMatrix:
    """Late-time limit of the pure-damping map."""
    if p.gamma <= 0:
        raise DomainError("asymptotic drift needs gamma > 0")
    if model is ModelKind.NONLOCAL_NEW:
        return EvolutionMatrix(1.0, 1.0 / (p.m0 * p.gamma), 0.0, 1.0)
    return EvolutionMatrix(1.0, 1.0 / (2.0 * p.m0 * p.gamma), 0.0, 1.0)


def asymptotic_state(model: ModelKind, s0: PhaseState, p: OscillatorParams) -> PhaseState:
    """Where the omega = 0 motion comes to rest; the two models drift differently."""
    return asymptotic_matrix(model, p).apply(s0)


def evolve_state(model: ModelKind, s0: PhaseState, t: float, p: OscillatorParams) -> PhaseState:
    """Apply the exact evolution map to an initial state posed at the memory time."""
    if p.omega == 0.0:
        return pure_damping_matrix(model, t, p).apply(s0)
    return evolution_matrix(model, t, p).apply(s0)


def _leg_matrix(model: ModelKind, t_start: float, t_end: float, p: OscillatorParams) -> EvolutionMatrix:
    if p.omega == 0.0:
        return pure_damping_matrix(model, t_end, replace(p, t0=t_start))
    return evolution_matrix(model, t_end, replace(p, t0=t_start))


@dataclass(frozen=True)
class CompositionDefect:
    """Deviation of a two-leg evolution from the direct one.

    The matrix holds the raw entry-wise difference; the norm is the max
    absolute entry after removing units from the off-diagonal entries.
    """

    matrix: np.ndarray
    norm: float


def composition_defect(
    model: ModelKind,
    t0: float,
    t1: float,
    t2: float,
    p: OscillatorParams,
    *,
    reset_mass: bool = True,
) -> CompositionDefect:
    """Compare the direct map over [t0, t2] with the restart at t1.

    The second leg restarts the memory time at t1. With reset_mass the leg
    also takes the physical mass m(t1) of the first leg as its reference
    mass; otherwise it keeps m0. The Caldirola-Kanai family composes exactly,
    the memory model does not.
    """
    if not (t0 <= t1 <= t2):
        raise DomainError(f"need t0 <= t1 <= t2, got ({t0}, {t1}, {t2})")
    base = replace(p, t0=t0)
    direct = _leg_matrix(model, t0, t2, base)
    first = _leg_matrix(model, t0, t1, base)
    mid_mass = mass_at(model, t1, base) if reset_mass else base.m0
    second = _leg_matrix(model, t1, t2, replace(base, m0=mid_mass))
    composed = second @ first
    diff = direct.as_array() - composed.as_array()
    if p.omega > p.gamma:
        freq = derived_frequency(p)
    elif p.gamma > 0 and p.omega == 0.0:
        freq = p.gamma
    else:
        raise DomainError("composition defect needs an underdamped or pure-damping configuration")
    scale = p.m0 * freq
    norm = float(
        max(abs(diff[0, 0]), abs(diff[0, 1]) * scale, abs(diff[1, 0]) / scale, abs(diff[1, 1]))
    )
    return CompositionDefect(matrix=diff, norm=norm)


def rk4_state(model: ModelKind, s0: PhaseState, t: float, p: OscillatorParams,
              rel_step: float = RK4_REL_STEP) -> PhaseState:
    """Integrate the Newton equation to t and return (x(t), m(t)*xdot(t)).

    Runs at the fixed relative step and once more at half the step; the two
    runs must agree to RK4_RICHARDSON_TOL or the oracle itself fails. The
    half-step result is returned.
    """
    tau = t - p.t0
    if tau < 0:
        raise DomainError(f"oracle integrates forward only, got t - t0 = {tau}")
    if tau == 0:
        return s0
    kind = _kernels.MODEL_NEW if model is ModelKind.NONLOCAL_NEW else _kernels.MODEL_CK
    n = max(2, int(round(1.0 / rel_step)))
    v0 = s0.p / p.m0
    x1, v1 = _kernels.rk4_damped(kind, p.gamma, p.omega, p.t0, s0.x, v0, p.t0, t, n)
    x2, v2 = _kernels.rk4_damped(kind, p.gamma, p.omega, p.t0, s0.x, v0, p.t0, t, 2 * n)
    scale = max(1.0, abs(x2), abs(v2))
    if max(abs(x1 - x2), abs(v1 - v2)) > RK4_RICHARDSON_TOL * scale:
        raise RuntimeError(
            f"RK4 oracle failed its own half-step check at t={t}: "
            f"|dx|={abs(x1 - x2):.3e}, |dv|={abs(v1 - v2):.3e}"
        )
    return PhaseState(x2, mass_at(model, t, p) * v2)
