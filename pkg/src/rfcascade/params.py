"""Drive parameters of the laser-excited two-level atom and the package errors."""

from __future__ import annotations

import math
from dataclasses import dataclass


class CascadeError(Exception):
    """Base class for errors raised by rfcascade."""


class ParameterError(CascadeError, ValueError):
    """Invalid physical or numerical input."""


class DomainError(CascadeError, ValueError):
    """Evaluation requested at a pole or outside the domain of a formula."""


class DegenerateRootsError(CascadeError, ArithmeticError):
    """The correlation cubic has (nearly) repeated roots."""

    def __init__(self, message: str, params: "AtomDriveParams"):
        super().__init__(f"{message} (gamma={params.gamma!r}, omega={params.omega!r}, delta={params.delta!r})")
        self.params = params


class ConvergenceError(CascadeError, RuntimeError):
    """An iterative procedure failed to converge."""


@dataclass(frozen=True)
class AtomDriveParams:
    """Physical parameters of the driven atom, all as angular rates.

    Attributes
    ----------
    gamma : float
        Decay rate of the atomic coherence. The Einstein coefficient is ``2 * gamma``.
    omega : float
        Rabi frequency, ``>= 0``.
    delta : float
        Laser detuning ``omega_L - omega_A``, any sign.
    """

    gamma: float = 1.0
    omega: float = math.sqrt(2.0)
    delta: float = 0.0

    def __post_init__(self):
        for name in ("gamma", "omega", "delta"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                raise ParameterError(f"{name} must be a real number, got {value!r}")
            if not math.isfinite(value):
                raise ParameterError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, float(value))
        if self.gamma <= 0.0:
            raise ParameterError(f"gamma must be > 0, got {self.gamma!r}")
        if self.omega < 0.0:
            raise ParameterError(f"omega must be >= 0, got {self.omega!r}")

    @property
    def einstein_coefficient(self) -> float:
        return 2.0 * self.gamma

    def require_drive(self) -> None:
        """Raise unless the atom is actually driven (omega > 0)."""
        if self.omega == 0.0:
            raise ParameterError("omega must be > 0 here: statistics of an undriven atom diverge")

    def as_dict(self) -> dict:
        return {"gamma": self.gamma, "omega": self.omega, "delta": self.delta}
