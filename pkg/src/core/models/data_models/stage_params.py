"""
Cascade geometry models for the Zeno vacuum-scissors simulator.

This module defines the parameters of an N-stage parametric/Kerr cascade and
the per-probe-photon-number amplitudes the cascade produces.
"""

import math
from dataclasses import dataclass

from pydantic import BaseModel, ConfigDict, Field

# Total parametric angle g*tau of the design cascade
DESIGN_TOTAL_ANGLE = math.pi / 2
DESIGN_ANGLE_TOLERANCE = 1e-12


class StageParams(BaseModel):
    """Geometry of the staged cascade."""

    model_config = ConfigDict(frozen=True)

    n: int = Field(..., ge=1, description="Target Fock number of the signal mode")
    N: int = Field(..., ge=1, description="Number of stages")
    kappa: float = Field(..., description="Kerr phase per photon pair per stage (radians)")
    theta: float = Field(..., description="Parametric angle per stage, g*dtau")

    @classmethod
    def design(cls, n: int, N: int, kappa: float) -> "StageParams":
        """Cascade whose stages add up to the full pi/2 parametric rotation."""
        return cls(n=n, N=N, kappa=kappa, theta=DESIGN_TOTAL_ANGLE / N)

    def with_stages(self, N: int) -> "StageParams":
        """Same n and kappa, N stages, theta re-derived as pi/(2N)."""
        return StageParams.design(self.n, N, self.kappa)

    @property
    def total_angle(self) -> float:
        return self.N * self.theta

    @property
    def is_design(self) -> bool:
        """True when N*theta equals pi/2."""
        return abs(self.total_angle - DESIGN_TOTAL_ANGLE) <= DESIGN_ANGLE_TOLERANCE

    def kerr_phase(self, m: int) -> float:
        """delta = kappa * n * m."""
        return self.kappa * self.n * m


@dataclass(frozen=True)
class BlockAmplitudes:
    """Amplitudes of |0>_a and |n>_a after the cascade, given m probe photons."""

    m: int
    v: complex
    w: complex
    delta: float
    eta: float

    @property
    def norm_squared(self) -> float:
        return abs(self.v) ** 2 + abs(self.w) ** 2
