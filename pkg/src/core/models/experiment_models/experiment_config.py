"""
Experiment configuration models for the zeno-scissors command line.
"""

from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

from pydantic import BaseModel, Field, field_validator, model_validator


class ExperimentMode(str, Enum):
    """Enumeration of command-line modes."""
    SWEEP = "sweep"
    FIG2 = "fig2"
    VERIFY = "verify"
    TRUNCATE = "truncate"


class ExperimentConfig(BaseModel):
    """Resolved configuration of one command-line run."""

    mode: ExperimentMode = Field(..., description="Command to run")
    n: int = Field(2, ge=1, description="Target Fock number of the signal mode")
    kappa: float = Field(0.2, description="Kerr strength per stage")
    probe: str = Field("coherent:1.0", description="Probe mini-syntax")
    probes: List[str] = Field(default_factory=list, description="Probe list for the fig2 preset")
    n_range: Tuple[int, int, int] = Field((1, 200, 1), description="Inclusive stage-count range (start, stop, step)")
    a_cutoff: Optional[int] = Field(None, description="Signal-mode cutoff of the oracle path")
    b_cutoff: int = Field(40, ge=2, description="Probe-mode cutoff")
    output_path: Optional[str] = Field(None, description="CSV destination; stdout when absent")
    workers: int = Field(1, ge=1, description="Worker processes for row computation")
    kappa_perturbation: float = Field(0.0, description="Test hook: kappa offset applied to the oracle path")
    grid_overrides: Dict[str, Any] = Field(default_factory=dict, description="Verification grid entries set by flags")

    @field_validator("n_range")
    @classmethod
    def _check_range(cls, value: Tuple[int, int, int]) -> Tuple[int, int, int]:
        start, stop, step = value
        if step < 1:
            raise ValueError("N range step must be >= 1")
        if start < 1:
            raise ValueError("N range must start at N >= 1")
        if stop < start:
            raise ValueError("N range is empty")
        return value

    @model_validator(mode="after")
    def _check_cutoffs(self) -> "ExperimentConfig":
        minimum = 2 * self.n + 2
        if self.a_cutoff is not None and self.a_cutoff < minimum:
            raise ValueError(f"a_cutoff must be >= 2n+2 = {minimum}")
        return self

    @property
    def stage_counts(self) -> List[int]:
        start, stop, step = self.n_range
        return list(range(start, stop + 1, step))


def parse_n_range(text: str) -> Tuple[int, int, int]:
    """Parse ``A:B[:S]`` into an inclusive (start, stop, step) triple."""
    parts = text.split(":")
    if len(parts) not in (2, 3):
        raise ValueError(f"N range must look like A:B or A:B:S, got {text!r}")
    try:
        values = [int(p) for p in parts]
    except ValueError:
        raise ValueError(f"N range bounds must be integers, got {text!r}")
    if len(values) == 2:
        values.append(1)
    return values[0], values[1], values[2]
