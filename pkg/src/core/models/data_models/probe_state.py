"""
Probe-mode state models for the Zeno vacuum-scissors simulator.

This module defines the specification of the mode-b input state and the
photon-number statistics derived from its number-basis coefficients.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Tuple

from pydantic import BaseModel, Field

from src.core.utils.error_handling import ValidationError


class ProbeKind(str, Enum):
    """Enumeration of probe state families."""
    FOCK = "fock"
    COHERENT = "coherent"
    PHASE_SQUEEZED = "squeezed"
    CUSTOM = "custom"


@dataclass(frozen=True)
class ProbeStateSpec:
    """Specification of the probe-mode state |Phi>_b."""

    kind: ProbeKind
    cutoff: int
    fock_number: int = 0
    amplitude: complex = 0j
    squeezing: complex = 0j
    coefficients: Tuple[complex, ...] = field(default_factory=tuple)
    label: str = ""

    def __post_init__(self):
        if self.cutoff < 2:
            raise ValidationError("Probe cutoff must be at least 2", field="cutoff", value=self.cutoff)
        if self.kind == ProbeKind.FOCK:
            if self.fock_number < 0:
                raise ValidationError("Fock number must be nonnegative", field="fock_number",
                                      value=self.fock_number)
            if self.fock_number >= self.cutoff:
                raise ValidationError(
                    f"Fock number {self.fock_number} needs cutoff >= {self.fock_number + 1}",
                    field="cutoff", value=self.cutoff,
                )
        if self.kind == ProbeKind.CUSTOM and not self.coefficients:
            raise ValidationError("Custom probe needs at least one coefficient", field="coefficients")

    @classmethod
    def fock(cls, m: int, cutoff: int = 40) -> "ProbeStateSpec":
        return cls(kind=ProbeKind.FOCK, cutoff=cutoff, fock_number=m, label=f"fock:{m}")

    @classmethod
    def coherent(cls, amplitude: complex, cutoff: int = 40) -> "ProbeStateSpec":
        return cls(kind=ProbeKind.COHERENT, cutoff=cutoff, amplitude=complex(amplitude),
                   label=f"coherent:{_format_complex(amplitude)}")

    @classmethod
    def phase_squeezed(cls, squeezing: complex, amplitude: complex, cutoff: int = 40) -> "ProbeStateSpec":
        return cls(kind=ProbeKind.PHASE_SQUEEZED, cutoff=cutoff, squeezing=complex(squeezing),
                   amplitude=complex(amplitude),
                   label=f"squeezed:{_format_complex(squeezing)},{_format_complex(amplitude)}")

    @classmethod
    def custom(cls, coefficients, cutoff: Optional[int] = None, label: str = "custom") -> "ProbeStateSpec":
        coefficients = tuple(complex(c) for c in coefficients)
        return cls(kind=ProbeKind.CUSTOM, cutoff=cutoff or max(len(coefficients), 2),
                   coefficients=coefficients, label=label)


def _format_complex(value: complex) -> str:
    value = complex(value)
    if value.imag == 0:
        return repr(value.real)
    return f"{value.real!r},{value.imag!r}"


class PhotonStatistics(BaseModel):
    """Photon-number moments of a probe state."""

    mean: float = Field(..., ge=0, description="Mean photon number <m>")
    variance: float = Field(..., ge=0, description="Photon-number variance <dm^2>")
    mandel_q: Optional[float] = Field(None, ge=-1, description="Mandel Q; undefined for the vacuum")
    vacuum_weight: float = Field(..., ge=0, le=1, description="|alpha_0|^2")
