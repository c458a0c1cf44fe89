"""
Cascade output models for the Zeno vacuum-scissors simulator.

This module defines the joint two-mode state and the summaries produced by a
cascade run and by sweeps over the stage count.
"""

from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from src.core.models.data_models.stage_params import BlockAmplitudes, StageParams


@dataclass(frozen=True)
class JointState:
    """Two-mode state with amplitudes c[j, m] for |j>_a |m>_b (a-index major)."""

    amplitudes: np.ndarray

    @classmethod
    def from_vector(cls, vector: np.ndarray, dims: Tuple[int, int]) -> "JointState":
        return cls(np.asarray(vector, dtype=complex).reshape(dims))

    @property
    def dims(self) -> Tuple[int, int]:
        return self.amplitudes.shape

    @property
    def vector(self) -> np.ndarray:
        return self.amplitudes.reshape(-1)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def a_marginal(self) -> np.ndarray:
        """Signal-mode photon-number distribution."""
        return np.sum(np.abs(self.amplitudes) ** 2, axis=1)

    def b_marginal(self) -> np.ndarray:
        """Probe-mode photon-number distribution."""
        return np.sum(np.abs(self.amplitudes) ** 2, axis=0)

    def leakage(self, n: int) -> float:
        """Population outside the signal indices {0, n}."""
        marginal = self.a_marginal()
        return float(marginal.sum() - marginal[0] - marginal[n])


@dataclass(frozen=True)
class CascadeResult:
    """Outcome of an N-stage cascade for one probe state."""

    params: StageParams
    blocks: List[BlockAmplitudes]
    probe: np.ndarray
    emission_probability: float
    postselect_vacuum_probability: float
    truncated_state: Optional[np.ndarray]
    truncation_fidelity: Optional[float]
    alpha0: complex
    limit_fidelity: float

    @property
    def no_outcome(self) -> bool:
        """Post-selection on |0>_a never succeeds."""
        return self.truncated_state is None


@dataclass(frozen=True)
class SweepRow:
    """One stage count of a sweep."""

    N: int
    emission_probability: float
    postselect_probability: float
    fidelity: Optional[float]
    limit_fidelity: float

    @classmethod
    def from_result(cls, result: CascadeResult) -> "SweepRow":
        return cls(
            N=result.params.N,
            emission_probability=result.emission_probability,
            postselect_probability=result.postselect_vacuum_probability,
            fidelity=result.truncation_fidelity,
            limit_fidelity=result.limit_fidelity,
        )

    @property
    def one_minus_fidelity(self) -> Optional[float]:
        if self.fidelity is None:
            return None
        return 1.0 - self.fidelity
