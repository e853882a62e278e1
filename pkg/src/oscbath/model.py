"""Physical parameters, cavity geometry and the Bose-Einstein distribution.

Units are hbar = c = 1.  The particle has renormalized frequency
``omega_bar``; the ohmic bath couples with strength ``g``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict

import numpy as np

from .errors import DomainError, NonPositiveError, StrongCouplingError

# kappa^2 must clear this fraction of omega_bar^2 to count as weak coupling
_KAPPA_SQ_FLOOR = 4 * np.finfo(float).eps


@dataclass(frozen=True)
class ModelParams:
    omega_bar: float
    g: float
    beta: float
    n0_initial: float = 0.0
    kappa: float = field(init=False)

    def __post_init__(self):
        for name in ("omega_bar", "g", "beta", "n0_initial"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise NonPositiveError(f"{name} must be finite, got {v}")
        if self.omega_bar <= 0:
            raise NonPositiveError(f"omega_bar must be > 0, got {self.omega_bar}")
        if self.beta <= 0:
            raise NonPositiveError(f"beta must be > 0, got {self.beta}")
        if self.g < 0:
            raise NonPositiveError(f"g must be >= 0, got {self.g}")
        if self.n0_initial < 0:
            raise NonPositiveError(f"n0_initial must be >= 0, got {self.n0_initial}")
        k2 = self.omega_bar ** 2 - (math.pi * self.g) ** 2 / 4
        if k2 <= _KAPPA_SQ_FLOOR * self.omega_bar ** 2:
            raise StrongCouplingError(
                f"omega_bar^2 - pi^2 g^2/4 = {k2:.3g} <= 0 (omega_bar={self.omega_bar}, g={self.g})")
        object.__setattr__(self, "kappa", math.sqrt(k2))

    @property
    def gamma(self) -> float:
        """Amplitude decay rate pi g / 2."""
        return math.pi * self.g / 2

    def with_(self, **changes) -> "ModelParams":
        d = self.as_dict()
        d.update(changes)
        return ModelParams(**d)

    def as_dict(self) -> dict:
        d = asdict(self)
        d.pop("kappa")
        return d

    def spectral_denominator(self, w):
        """(w^2 - omega_bar^2)^2 + pi^2 g^2 w^2, the Lorentzian denominator."""
        w = np.asarray(w, dtype=float)
        return (w * w - self.omega_bar ** 2) ** 2 + (math.pi * self.g * w) ** 2


def validate_params(omega_bar: float, g: float, beta: float, n0_initial: float = 0.0) -> ModelParams:
    return ModelParams(float(omega_bar), float(g), float(beta), float(n0_initial))


def bose_occupation(omega, beta):
    """1 / (exp(beta omega) - 1), elementwise for array input."""
    w = np.asarray(omega, dtype=float)
    if np.any(~(w > 0)):
        raise DomainError("bose_occupation needs omega > 0")
    if np.any(~(np.asarray(beta) > 0)):
        raise NonPositiveError("bose_occupation needs beta > 0")
    with np.errstate(over="ignore"):
        out = 1.0 / np.expm1(beta * w)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class CavitySpec:
    R: float
    N: int

    def __post_init__(self):
        if not (math.isfinite(self.R) and self.R > 0):
            raise NonPositiveError(f"cavity radius must be > 0, got {self.R}")
        if int(self.N) != self.N or self.N < 1:
            raise NonPositiveError(f"N must be a positive integer, got {self.N}")
        object.__setattr__(self, "N", int(self.N))

    @property
    def delta_omega(self) -> float:
        return math.pi / self.R

    @property
    def omegas(self) -> np.ndarray:
        return np.arange(1, self.N + 1) * (math.pi / self.R)

    def eta(self, g: float) -> float:
        """Coupling constant sqrt(2 g delta_omega)."""
        return math.sqrt(2.0 * g * math.pi / self.R)

    def as_dict(self) -> dict:
        return {"R": self.R, "N": self.N}
