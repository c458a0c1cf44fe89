"""
Zeno Kernel Service for the Zeno vacuum-scissors simulator.

This module implements the analytic core of the staged cascade:
- The KH parametric Hamiltonian and its exact two-level rotation
- Closed-form N-stage amplitudes v(m), w(m) of |0>_a and |n>_a
- A brute-force 2x2 product and the full stage transfer matrix
- First-order large-N asymptotics and an order-of-error fit
- The projective-measurement survival reference and the oscillation period
"""

import logging
import math
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from src.core.models.data_models.mode_space import ModeSpace
from src.core.models.data_models.stage_params import BlockAmplitudes, StageParams
from src.core.services.calculation_services.fock_space import fock_space_calculator
from src.core.utils.error_handling import DegenerateCouplingError, ValidationError

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
# Kerr phases this close to a multiple of 2*pi count as degenerate
DEGENERACY_TOLERANCE = 1e-12
# Below this sin(eta) the ratio sin(N eta)/sin(eta) comes from the recurrence
RECURRENCE_BAND = 1e-3


@dataclass(frozen=True)
class AsymptoticErrorFit:
    """Envelope of |closed form - asymptotic| over N with fitted log-log slopes."""

    N_values: np.ndarray
    v_envelope: np.ndarray
    w_envelope: np.ndarray
    v_slope: float
    w_slope: float
    window: int


def reduced_phase(delta: float) -> float:
    """delta modulo 2*pi in [0, 2*pi)."""
    return float(np.mod(delta, TWO_PI))


def is_degenerate_phase(delta: float, tolerance: float = DEGENERACY_TOLERANCE) -> bool:
    """True when delta is an integer multiple of 2*pi."""
    delta0 = reduced_phase(delta)
    return delta0 <= tolerance or TWO_PI - delta0 <= tolerance


def chebyshev_ratio(N: int, x) -> np.ndarray:
    """
    Second-kind Chebyshev value U_{N-1}(x) = sin(N eta)/sin(eta), x = cos(eta).

    Evaluated with s_0 = 0, s_1 = 1, s_{k+1} = 2x s_k - s_{k-1}, so the
    eta -> 0 and eta -> pi limits (N and (-1)^(N-1) N) come out finite.
    """
    x = np.asarray(x, dtype=float)
    previous = np.zeros_like(x)
    current = np.ones_like(x)
    for _ in range(1, N):
        previous, current = current, 2.0 * x * current - previous
    return current


class ZenoKernelCalculator:
    """Calculator for the per-block dynamics of the staged cascade."""

    def kh_hamiltonian(self, n: int, g: float, space: ModeSpace) -> np.ndarray:
        """
        Build the n-photon KH interaction Hamiltonian on a truncated mode.

        H = g/sqrt(n!) [(a^n + a^dag^n) - (1/n)(a^dag a^(n+1) + a^dag^(n+1) a)]

        Args:
            n: Target Fock number
            g: Coupling strength
            space: Signal mode, cutoff >= 2n + 2

        Returns:
            Hermitian matrix; {|0>, |n>} is an invariant block with H|0> = g|n>
        """
        if n < 1:
            raise ValidationError("KH order n must be >= 1", field="n", value=n)
        minimum = 2 * n + 2
        if space.cutoff < minimum:
            raise ValidationError(
                f"KH Hamiltonian of order n={n} needs cutoff >= {minimum}, got {space.cutoff}",
                field="cutoff",
                value=space.cutoff,
            )

        a, a_dag, _ = fock_space_calculator.ladder_ops(space)
        lowering = np.linalg.matrix_power(a, n) - (1.0 / n) * np.linalg.matrix_power(a_dag, n + 1) @ a
        return (g / math.sqrt(math.factorial(n))) * (lowering + lowering.conj().T)

    def kh_block_rotation(self, theta: float) -> np.ndarray:
        """Exact KH rotation on the ordered basis (|0>_a, |n>_a)."""
        c, s = math.cos(theta), math.sin(theta)
        return np.array([[c, 1j * s], [1j * s, c]], dtype=complex)

    def kerr_block(self, delta: float) -> np.ndarray:
        """Kerr phase diag(1, exp(i delta)) on (|0>_a, |n>_a)."""
        return np.diag([1.0, np.exp(1j * delta)]).astype(complex)

    def stage_block(self, params: StageParams, m: int) -> np.ndarray:
        """One stage acting on the m-photon block: Kerr after KH."""
        return self.kerr_block(params.kerr_phase(m)) @ self.kh_block_rotation(params.theta)

    def kernel_arrays(self, params: StageParams,
                      m_values: Iterable[int]) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """
        Closed-form v, w over many probe photon numbers at once.

        Args:
            params: Cascade geometry
            m_values: Probe photon numbers

        Returns:
            (v, w, delta, eta) arrays aligned with m_values
        """
        m = np.asarray(list(m_values), dtype=float)
        N = params.N
        theta = params.theta
        delta = params.kappa * params.n * m

        cos_theta, sin_theta = math.cos(theta), math.sin(theta)
        half = 0.5 * delta
        x = cos_theta * np.cos(half)
        # sin(eta) written without the 1 - x^2 cancellation
        sin_eta = np.sqrt(sin_theta ** 2 + (cos_theta * np.sin(half)) ** 2)
        eta = np.arctan2(sin_eta, np.clip(x, -1.0, 1.0))

        ratio = np.empty_like(eta)
        near = sin_eta < RECURRENCE_BAND
        ratio[~near] = np.sin(N * eta[~near]) / sin_eta[~near]
        if np.any(near):
            ratio[near] = chebyshev_ratio(N, x[near])

        v = np.exp(0.5j * N * delta) * (-1j * cos_theta * np.sin(half) * ratio + np.cos(N * eta))
        w = 1j * np.exp(0.5j * (N + 1) * delta) * sin_theta * ratio
        return v, w, delta, eta

    def vw_closed_form(self, params: StageParams, m: int) -> BlockAmplitudes:
        """Closed-form amplitudes of |0>_a and |n>_a after N stages, m probe photons."""
        if m < 0:
            raise ValidationError("Probe photon number must be nonnegative", field="m", value=m)
        v, w, delta, eta = self.kernel_arrays(params, [m])
        return BlockAmplitudes(m=m, v=complex(v[0]), w=complex(w[0]), delta=float(delta[0]), eta=float(eta[0]))

    def vw_closed_form_blocks(self, params: StageParams, m_values: Sequence[int]) -> List[BlockAmplitudes]:
        """Vectorised closed form, one BlockAmplitudes per m."""
        v, w, delta, eta = self.kernel_arrays(params, m_values)
        return [
            BlockAmplitudes(m=int(m), v=complex(v[k]), w=complex(w[k]), delta=float(delta[k]), eta=float(eta[k]))
            for k, m in enumerate(m_values)
        ]

    def vw_block_product(self, params: StageParams, m: int) -> BlockAmplitudes:
        """Apply N explicit 2x2 stage matrices to (1, 0)."""
        stage = self.stage_block(params, m)
        state = np.array([1.0, 0.0], dtype=complex)
        for _ in range(params.N):
            state = stage @ state
        delta = params.kerr_phase(m)
        eta = math.acos(max(-1.0, min(1.0, math.cos(params.theta) * math.cos(0.5 * delta))))
        return BlockAmplitudes(m=m, v=complex(state[0]), w=complex(state[1]), delta=delta, eta=eta)

    def stage_transfer_matrix(self, params: StageParams, m: int) -> np.ndarray:
        """
        Full 2x2 transfer matrix of the N-stage cascade on the m-photon block.

        Each stage is exp(i delta/2) times an SU(2) matrix, so the product is
        exp(i N delta/2) [[A, B], [-B*, A*]] and (v, w) fixes A and B.
        """
        block = self.vw_closed_form(params, m)
        phase = np.exp(0.5j * params.N * block.delta)
        A = block.v / phase
        B = -np.conj(block.w / phase)
        return phase * np.array([[A, B], [-np.conj(B), np.conj(A)]], dtype=complex)

    def vw_asymptotic(self, params: StageParams, m: int) -> BlockAmplitudes:
        """
        First-order large-N amplitudes.

        v = 1 - i pi^2 / (8 tan(delta/2) N)
        w = i exp(i(N+1)delta/2) pi sin(N delta/2) / (2 sin(delta/2) N)
        """
        if m < 1:
            raise ValidationError("Asymptotic kernel needs m >= 1", field="m", value=m)
        delta = params.kerr_phase(m)
        if is_degenerate_phase(delta):
            raise DegenerateCouplingError(
                f"Kerr phase kappa*n*m = {delta:.6g} is a multiple of 2*pi; asymptotic kernel diverges",
                kappa=params.kappa, n=params.n, m=m,
            )

        N = params.N
        half = 0.5 * delta
        v = 1.0 - 1j * math.pi ** 2 / (8.0 * math.tan(half) * N)
        w = 1j * np.exp(0.5j * (N + 1) * delta) * math.pi * math.sin(N * half) / (2.0 * math.sin(half) * N)
        return BlockAmplitudes(m=m, v=complex(v), w=complex(w), delta=delta, eta=float("nan"))

    def asymptotic_error_envelope(self, params: StageParams, m: int, N_values: Sequence[int],
                                  window: Optional[int] = None) -> AsymptoticErrorFit:
        """
        Envelope of the closed-form / asymptotic mismatch and its order.

        The raw difference oscillates with N, so for every N the envelope is
        max over N' in [N, N + window) of N'^2 err(N'), divided by N^2.
        Design geometry theta = pi/(2N') is used at every N'.

        Args:
            params: Template supplying n and kappa
            m: Probe photon number
            N_values: Stage counts at which the envelope is sampled
            window: Envelope window; one period of exp(i N delta/2) by default

        Returns:
            AsymptoticErrorFit with per-N envelopes and fitted log-log slopes
        """
        delta0 = reduced_phase(params.kerr_phase(m))
        if is_degenerate_phase(delta0):
            raise DegenerateCouplingError(
                "Asymptotic kernel undefined for a degenerate Kerr phase",
                kappa=params.kappa, n=params.n, m=m,
            )
        if window is None:
            window = int(math.ceil(2.0 * TWO_PI / delta0))

        v_env, w_env = [], []
        for N in N_values:
            v_scaled, w_scaled = 0.0, 0.0
            for N_prime in range(N, N + window):
                geometry = params.with_stages(N_prime)
                exact = self.vw_closed_form(geometry, m)
                approx = self.vw_asymptotic(geometry, m)
                v_scaled = max(v_scaled, N_prime ** 2 * abs(exact.v - approx.v))
                w_scaled = max(w_scaled, N_prime ** 2 * abs(exact.w - approx.w))
            v_env.append(v_scaled / N ** 2)
            w_env.append(w_scaled / N ** 2)

        N_arr = np.asarray(N_values, dtype=float)
        v_env_arr = np.asarray(v_env)
        w_env_arr = np.asarray(w_env)
        v_slope = float(np.polyfit(np.log(N_arr), np.log(v_env_arr), 1)[0])
        w_slope = float(np.polyfit(np.log(N_arr), np.log(w_env_arr), 1)[0])
        logger.debug(f"Asymptotic error slopes for m={m}: v {v_slope:.3f}, w {w_slope:.3f} (window {window})")
        return AsymptoticErrorFit(N_arr, v_env_arr, w_env_arr, v_slope, w_slope, window)

    def projective_survival(self, N: int, theta: float) -> float:
        """Survival cos^(2N)(theta) under N ideal projective measurements."""
        if N < 1:
            raise ValidationError("Number of measurements must be >= 1", field="N", value=N)
        return math.cos(theta) ** (2 * N)

    def oscillation_period(self, params: StageParams, m: int) -> float:
        """Zeno / anti-Zeno oscillation period 2*pi/delta0 in stages."""
        delta = params.kerr_phase(m)
        if is_degenerate_phase(delta):
            raise DegenerateCouplingError(
                f"delta0 = 0 for kappa*n*m = {delta:.6g}: no oscillation, KH dynamics recovered",
                kappa=params.kappa, n=params.n, m=m,
            )
        return TWO_PI / reduced_phase(delta)


# Global calculator instance
zeno_kernel_calculator = ZenoKernelCalculator()


def kh_hamiltonian(n: int, g: float, space: ModeSpace) -> np.ndarray:
    """KH Hamiltonian of order n."""
    return zeno_kernel_calculator.kh_hamiltonian(n, g, space)


def kh_block_rotation(theta: float) -> np.ndarray:
    return zeno_kernel_calculator.kh_block_rotation(theta)


def vw_closed_form(params: StageParams, m: int) -> BlockAmplitudes:
    """Closed-form N-stage block amplitudes."""
    return zeno_kernel_calculator.vw_closed_form(params, m)


def vw_closed_form_blocks(params: StageParams, m_values: Sequence[int]) -> List[BlockAmplitudes]:
    return zeno_kernel_calculator.vw_closed_form_blocks(params, m_values)


def vw_block_product(params: StageParams, m: int) -> BlockAmplitudes:
    return zeno_kernel_calculator.vw_block_product(params, m)


def stage_transfer_matrix(params: StageParams, m: int) -> np.ndarray:
    return zeno_kernel_calculator.stage_transfer_matrix(params, m)


def vw_asymptotic(params: StageParams, m: int) -> BlockAmplitudes:
    """Large-N block amplitudes to first order in 1/N."""
    return zeno_kernel_calculator.vw_asymptotic(params, m)


def asymptotic_error_envelope(params: StageParams, m: int, N_values: Sequence[int],
                              window: Optional[int] = None) -> AsymptoticErrorFit:
    return zeno_kernel_calculator.asymptotic_error_envelope(params, m, N_values, window)


def projective_survival(N: int, theta: float) -> float:
    """cos^(2N)(theta)."""
    return zeno_kernel_calculator.projective_survival(N, theta)


def oscillation_period(params: StageParams, m: int) -> float:
    """2*pi/delta0."""
    return zeno_kernel_calculator.oscillation_period(params, m)
