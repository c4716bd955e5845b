"""
Step-size and sample-count schedules for the Frank-Wolfe drivers.

The bilevel driver uses an inner step delta_t, a tracking weight rho_t, a
Frank-Wolfe step eta_t and a Neumann sample count k_t. The compositional
driver uses delta_t, rho_t and eta_t only (k_t = 0). All three step sizes are
clamped to (0, 1].
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

from .errors import ConfigurationError


class Regime(Enum):
    """Which schedule family to emit."""
    SBFW_CONVEX = "sbfw_convex"
    SBFW_NONCONVEX = "sbfw_nonconvex"
    SCFW_CONVEX = "scfw_convex"
    SCFW_NONCONVEX = "scfw_nonconvex"

    @property
    def convex(self) -> bool:
        return self in (Regime.SBFW_CONVEX, Regime.SCFW_CONVEX)

    @property
    def bilevel(self) -> bool:
        return self in (Regime.SBFW_CONVEX, Regime.SBFW_NONCONVEX)


@dataclass(frozen=True)
class ScheduleSpec:
    """
    Constants the schedules depend on.

    Attributes:
        regime (Regime): Schedule family
        mu_g (float): Strong-convexity modulus of the inner problem
        L_g (float): Smoothness constant of the inner problem
        sigma_g_sq (float): Variance bound of the inner stochastic gradient
        horizon_T (int): Total iteration count (used by nonconvex constant steps)
    """
    regime: Regime
    mu_g: float = 1.0
    L_g: float = 1.0
    sigma_g_sq: float = 0.0
    horizon_T: int = 1

    def __post_init__(self):
        if not self.mu_g > 0:
            raise ConfigurationError(f"mu_g must be positive, got {self.mu_g}")
        if self.L_g < self.mu_g:
            raise ConfigurationError(f"L_g ({self.L_g}) must be >= mu_g ({self.mu_g})")
        if self.sigma_g_sq < 0:
            raise ConfigurationError("sigma_g_sq must be nonnegative")
        if int(self.horizon_T) < 1:
            raise ConfigurationError("horizon_T must be at least 1")

    @property
    def a0(self) -> float:
        """Inner step constant min{2/(3 mu_g), mu_g / (2 (1 + sigma_g^2) L_g^2)}."""
        return min(2.0 / (3.0 * self.mu_g),
                   self.mu_g / (2.0 * (1.0 + self.sigma_g_sq) * self.L_g ** 2))


class Schedule(NamedTuple):
    delta: float
    rho: float
    eta: float
    k: int


def _clamp(value: float) -> float:
    return min(1.0, value)


def schedule(spec: ScheduleSpec, t: int) -> Schedule:
    """
    Evaluate the schedule at iteration t.

    Args:
        spec (ScheduleSpec): Regime and problem constants
        t (int): Iteration index, t >= 1

    Returns:
        Schedule: (delta_t, rho_t, eta_t, k_t)

    Raises:
        ConfigurationError: If t < 1
    """
    if t < 1:
        raise ConfigurationError(f"iteration index must be >= 1, got {t}")
    T = spec.horizon_T
    ratio = spec.L_g / spec.mu_g
    if spec.regime is Regime.SBFW_CONVEX:
        delta = spec.a0 / t ** (2.0 / 3.0)
        rho = 2.0 / t ** (2.0 / 3.0)
        eta = 2.0 / (t + 1)
        k = max(1, math.ceil((2.0 * ratio / 3.0) * math.log(1 + t)))
    elif spec.regime is Regime.SBFW_NONCONVEX:
        delta = spec.a0 / math.sqrt(t)
        rho = 2.0 / math.sqrt(t)
        eta = 2.0 / (T + 1) ** 0.75
        k = max(1, math.ceil((ratio / 2.0) * math.log(1 + t)))
    elif spec.regime is Regime.SCFW_CONVEX:
        delta = rho = 2.0 / t
        eta = 2.0 / (t + 1)
        k = 0
    else:
        delta = rho = 2.0 / t ** (2.0 / 3.0)
        eta = 2.0 / (T + 1) ** (2.0 / 3.0)
        k = 0
    return Schedule(_clamp(delta), _clamp(rho), _clamp(eta), k)


def sfw_schedule(t: int) -> Schedule:
    """Momentum stochastic Frank-Wolfe parameters rho_t = 4/(t+8)^(2/3), eta_t = 2/(t+8)."""
    if t < 1:
        raise ConfigurationError(f"iteration index must be >= 1, got {t}")
    rho = 4.0 / (t + 8) ** (2.0 / 3.0)
    return Schedule(delta=1.0, rho=_clamp(rho), eta=_clamp(2.0 / (t + 8)), k=0)
