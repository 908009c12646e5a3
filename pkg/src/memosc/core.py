"""Shared domain types, parameter validation, and derived quantities."""

from __future__ import annotations

import enum
import math
import os
from dataclasses import dataclass

import numpy as np

# Centralized tolerances: the tight one guards analytic identities, the looser
# one comparisons against numerical oracles. Individual tests may override.
ANALYTIC_TOL = 1e-10
ORACLE_TOL = 1e-6


def tol_scale() -> float:
    """Tolerance multiplier read from MEMOSC_TOL_SCALE (default 1)."""
    return float(os.environ.get("MEMOSC_TOL_SCALE", "1"))


class DomainError(ValueError):
    """An operation was requested outside its supported parameter or time domain."""


class ModelKind(enum.Enum):
    """Dynamics family: memory-damped oscillator or Caldirola-Kanai."""

    NONLOCAL_NEW = "new"
    CALDIROLA_KANAI = "ck"


class KernelKind(enum.Enum):
    """Propagator family handled by the quantum module."""

    NEW = "new"
    KOCHAN = "kochan"
    PURE_DAMPING = "pure-damping"
    CK = "ck"


@dataclass(frozen=True)
class OscillatorParams:
    """Physical constants of one oscillator configuration.

    Natural units by default (unit mass, unit action quantum). ``t0`` is the
    memory time: the instant where initial data are posed and where the
    nonlocal friction term vanishes.
    """

    gamma: float
    omega: float
    m0: float = 1.0
    hbar: float = 1.0
    t0: float = 0.0

    def __post_init__(self) -> None:
        for name in ("gamma", "omega", "m0", "hbar", "t0"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or not math.isfinite(value):
                raise DomainError(f"{name} must be a finite number, got {value!r}")
        if self.m0 <= 0:
            raise DomainError(f"m0 must be > 0, got {self.m0}")
        if self.hbar <= 0:
            raise DomainError(f"hbar must be > 0, got {self.hbar}")
        if self.gamma < 0:
            raise DomainError(f"gamma must be >= 0, got {self.gamma}")
        if self.omega < 0:
            raise DomainError(f"omega must be >= 0, got {self.omega}")

    @property
    def underdamped(self) -> bool:
        return self.omega > self.gamma


def validate_params(raw: OscillatorParams, *, require_underdamped: bool = False) -> OscillatorParams:
    """Re-check every field invariant and return the validated parameters.

    ``require_underdamped`` additionally demands omega > gamma, which callers
    must declare before asking for the damped frequency.
    """
    p = OscillatorParams(gamma=raw.gamma, omega=raw.omega, m0=raw.m0, hbar=raw.hbar, t0=raw.t0)
    if require_underdamped:
        derived_frequency(p)
    return p


def derived_frequency(p: OscillatorParams) -> float:
    """Damped oscillation frequency sqrt(omega^2 - gamma^2), shared by both models."""
    if p.omega <= p.gamma:
        raise DomainError(
            f"damped frequency needs omega > gamma, got omega={p.omega}, gamma={p.gamma}"
        )
    return math.sqrt((p.omega - p.gamma) * (p.omega + p.gamma))


@dataclass(frozen=True)
class PhaseState:
    """Classical phase-space point (position, momentum)."""

    x: float
    p: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.p)):
            raise DomainError(f"phase-space components must be finite, got ({self.x}, {self.p})")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.p], dtype=float)


@dataclass(frozen=True)
class EvolutionMatrix:
    """Real 2x2 linear map on (x, p); Hamiltonian flow makes it unit determinant."""

    xx: float
    xp: float
    px: float
    pp: float

    @classmethod
    def identity(cls) -> "EvolutionMatrix":
        return cls(1.0, 0.0, 0.0, 1.0)

    @property
    def det(self) -> float:
        return self.xx * self.pp - self.xp * self.px

    def apply(self, s: PhaseState) -> PhaseState:
        return PhaseState(self.xx * s.x + self.xp * s.p, self.px * s.x + self.pp * s.p)

    def __matmul__(self, other: "EvolutionMatrix") -> "EvolutionMatrix":
        return EvolutionMatrix(
            xx=self.xx * other.xx + self.xp * other.px,
            xp=self.xx * other.xp + self.xp * other.pp,
            px=self.px * other.xx + self.pp * other.px,
            pp=self.px * other.xp + self.pp * other.pp,
        )

    def as_array(self) -> np.ndarray:
        return np.array([[self.xx, self.xp], [self.px, self.pp]], dtype=float)
