"""
Fock Space Service for the Zeno vacuum-scissors simulator.

This module implements the truncated Fock-space linear algebra the cascade is
built from:
- Ladder and number operators of a truncated mode
- Unitary propagators exp(+iHt) of Hermitian generators (spectral decomposition)
- The diagonal cross-Kerr unitary exp(i kappa a^dag a b^dag b)
- Tensor products, normalization, overlaps and fidelity

Joint two-mode vectors are ordered a-index major: index j * d_b + m holds
the amplitude of |j>_a |m>_b.
"""

import logging
from typing import Tuple

import numpy as np
from scipy import linalg

from src.core.models.data_models.mode_space import ModeSpace
from src.core.utils.error_handling import ValidationError

logger = logging.getLogger(__name__)

# Largest tolerated entry of H - H^dag for a generator to count as Hermitian
HERMITIAN_TOLERANCE = 1e-12
# Smallest norm accepted for a state vector
ZERO_NORM = 1e-300


class FockSpaceCalculator:
    """Calculator for truncated Fock-space operators and states."""

    def ladder_ops(self, space: ModeSpace) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """
        Build the annihilation, creation and number operators of a truncated mode.

        Args:
            space: Truncated mode

        Returns:
            (annihilation, creation, number) as dense complex matrices
        """
        annihilation = np.diag(np.sqrt(np.arange(1, space.cutoff, dtype=float)), k=1).astype(complex)
        creation = annihilation.conj().T
        number = np.diag(np.arange(space.cutoff, dtype=float)).astype(complex)
        return annihilation, creation, number

    def hermiticity_deviation(self, H: np.ndarray) -> float:
        """Largest entry of |H - H^dag|."""
        H = np.asarray(H)
        return float(np.max(np.abs(H - H.conj().T))) if H.size else 0.0

    def hermitian_propagator(self, H: np.ndarray, t: float,
                             tolerance: float = HERMITIAN_TOLERANCE) -> np.ndarray:
        """
        Compute exp(+iHt) from the eigendecomposition of a Hermitian generator.

        Args:
            H: Hermitian generator
            t: Evolution parameter (hbar = 1)
            tolerance: Maximum accepted entry of |H - H^dag|

        Returns:
            Unitary matrix V diag(exp(i lambda t)) V^dag
        """
        H = np.asarray(H, dtype=complex)
        if H.ndim != 2 or H.shape[0] != H.shape[1]:
            raise ValidationError("Generator must be a square matrix", field="H", value=H.shape)

        asymmetry = self.hermiticity_deviation(H)
        if asymmetry > tolerance:
            raise ValidationError(
                f"Generator is not Hermitian: max|H - H^dag| = {asymmetry:.3e} exceeds {tolerance:.1e}",
                field="H",
                value=asymmetry,
            )

        eigenvalues, eigenvectors = linalg.eigh(0.5 * (H + H.conj().T))
        phases = np.exp(1j * eigenvalues * t)
        return (eigenvectors * phases) @ eigenvectors.conj().T

    def kerr_phases(self, kappa: float, space_a: ModeSpace, space_b: ModeSpace) -> np.ndarray:
        """Phase grid exp(i kappa j m) indexed [j, m]."""
        j = np.arange(space_a.cutoff, dtype=float)[:, None]
        m = np.arange(space_b.cutoff, dtype=float)[None, :]
        return np.exp(1j * kappa * j * m)

    def kerr_unitary(self, kappa: float, space_a: ModeSpace, space_b: ModeSpace) -> np.ndarray:
        """Diagonal cross-Kerr unitary over the joint a-major basis."""
        return np.diag(self.kerr_phases(kappa, space_a, space_b).reshape(-1))

    def tensor(self, op_a: np.ndarray, op_b: np.ndarray) -> np.ndarray:
        """Kronecker product in the a-major joint ordering."""
        return np.kron(op_a, op_b)

    def embed_a(self, op_a: np.ndarray, space_b: ModeSpace) -> np.ndarray:
        """Lift a mode-a operator to op_a (x) I_b."""
        return np.kron(op_a, np.eye(space_b.cutoff, dtype=complex))

    def embed_b(self, op_b: np.ndarray, space_a: ModeSpace) -> np.ndarray:
        """Lift a mode-b operator to I_a (x) op_b."""
        return np.kron(np.eye(space_a.cutoff, dtype=complex), op_b)

    def norm(self, state: np.ndarray) -> float:
        return float(np.linalg.norm(state))

    def normalize(self, state: np.ndarray) -> np.ndarray:
        """Return the state scaled to unit norm."""
        state = np.asarray(state, dtype=complex)
        norm = self.norm(state)
        if norm < ZERO_NORM:
            raise ValidationError("Cannot normalize a zero-norm state", field="state", value=norm)
        return state / norm

    def overlap(self, u: np.ndarray, v: np.ndarray) -> complex:
        """Inner product <u|v>."""
        return complex(np.vdot(u, v))

    def fidelity(self, u: np.ndarray, v: np.ndarray) -> float:
        """
        Pure-state fidelity |<u|v>|^2.

        Inputs are expected normalized; the overlap is divided by both norms
        so roundoff in the norms does not push the result outside [0, 1].
        """
        norm_u = self.norm(u)
        norm_v = self.norm(v)
        if norm_u < ZERO_NORM or norm_v < ZERO_NORM:
            raise ValidationError("Fidelity is undefined for a zero-norm state", field="state",
                                  value=min(norm_u, norm_v))
        value = abs(self.overlap(u, v)) ** 2 / (norm_u ** 2 * norm_v ** 2)
        return float(min(max(value, 0.0), 1.0))

    def unitarity_deviation(self, U: np.ndarray) -> float:
        """Largest entry of |U^dag U - I|."""
        U = np.asarray(U)
        return float(np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0]))))

    def commutator_deviation(self, A: np.ndarray, B: np.ndarray) -> float:
        """Largest entry of |[A, B]|."""
        return float(np.max(np.abs(A @ B - B @ A)))


# Global calculator instance
fock_space_calculator = FockSpaceCalculator()


def ladder_ops(space: ModeSpace) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Annihilation, creation and number operators of a truncated mode."""
    return fock_space_calculator.ladder_ops(space)


def hermitian_propagator(H: np.ndarray, t: float, tolerance: float = HERMITIAN_TOLERANCE) -> np.ndarray:
    """exp(+iHt) for a Hermitian generator."""
    return fock_space_calculator.hermitian_propagator(H, t, tolerance)


def kerr_phases(kappa: float, space_a: ModeSpace, space_b: ModeSpace) -> np.ndarray:
    """Phase grid exp(i kappa j m)."""
    return fock_space_calculator.kerr_phases(kappa, space_a, space_b)


def kerr_unitary(kappa: float, space_a: ModeSpace, space_b: ModeSpace) -> np.ndarray:
    """Diagonal cross-Kerr unitary."""
    return fock_space_calculator.kerr_unitary(kappa, space_a, space_b)


def tensor(op_a: np.ndarray, op_b: np.ndarray) -> np.ndarray:
    return fock_space_calculator.tensor(op_a, op_b)


def normalize(state: np.ndarray) -> np.ndarray:
    return fock_space_calculator.normalize(state)


def fidelity(u: np.ndarray, v: np.ndarray) -> float:
    """|<u|v>|^2 of two states."""
    return fock_space_calculator.fidelity(u, v)


def unitarity_deviation(U: np.ndarray) -> float:
    return fock_space_calculator.unitarity_deviation(U)
