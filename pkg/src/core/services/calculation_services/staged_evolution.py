"""
Staged Evolution Service for the Zeno vacuum-scissors simulator.

This module implements the N-stage KH/Kerr cascade along two independent paths:
- A full two-mode oracle applying Kerr x (KH (x) I) N times
- A per-probe-photon-number block path built on the closed-form kernel

and the analysis of its output:
- Emission probability P_n and vacuum post-selection on |0>_a
- Truncation fidelity against the vacuum-stripped probe
- The N -> infinity limit state and the fidelity against it
- Sweeps over the stage count, oscillation period and envelope estimates
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import signal

from src.core.models.data_models.cascade_result import CascadeResult, JointState, SweepRow
from src.core.models.data_models.mode_space import ModeSpace
from src.core.models.data_models.stage_params import BlockAmplitudes, StageParams
from src.core.services.calculation_services.fock_space import fock_space_calculator
from src.core.services.calculation_services.probe_states import probe_state_factory
from src.core.services.calculation_services.zeno_kernel import zeno_kernel_calculator
from src.core.utils.error_handling import LeakageError, NoOutcomeError, ValidationError, format_parameters

logger = logging.getLogger(__name__)

DEFAULT_LEAKAGE_TOLERANCE = 1e-9
DEFAULT_NO_OUTCOME_THRESHOLD = 1e-12
DEFAULT_A_CUTOFF_OFFSET = 2


def default_a_cutoff(n: int, offset: int = DEFAULT_A_CUTOFF_OFFSET) -> int:
    """Oracle signal cutoff 3n + offset; the reachable ladder is {0, n, 2n, ...}."""
    return 3 * n + offset


class StagedEvolutionEngine:
    """Engine running the staged cascade and its post-selection analysis."""

    def __init__(self, leakage_tolerance: float = DEFAULT_LEAKAGE_TOLERANCE,
                 no_outcome_threshold: float = DEFAULT_NO_OUTCOME_THRESHOLD):
        """Initialize the staged evolution engine."""
        self.leakage_tolerance = leakage_tolerance
        self.no_outcome_threshold = no_outcome_threshold

    def stage_unitary(self, params: StageParams, space_a: ModeSpace, space_b: ModeSpace) -> np.ndarray:
        """One full-space stage: kerr_unitary @ (exp(i H_n dtau) (x) I_b)."""
        H = zeno_kernel_calculator.kh_hamiltonian(params.n, 1.0, space_a)
        kh = fock_space_calculator.hermitian_propagator(H, params.theta)
        kerr = fock_space_calculator.kerr_unitary(params.kappa, space_a, space_b)
        return kerr @ fock_space_calculator.embed_a(kh, space_b)

    def run_oracle(self, params: StageParams, probe: np.ndarray,
                   a_cutoff: Optional[int] = None) -> JointState:
        """
        Brute-force cascade on the truncated two-mode space.

        Args:
            params: Cascade geometry
            probe: Normalized probe coefficients
            a_cutoff: Signal-mode cutoff, default 3n + 2

        Returns:
            Joint state after N stages
        """
        a_cutoff = a_cutoff if a_cutoff is not None else default_a_cutoff(params.n)
        if a_cutoff < 2 * params.n + 2:
            raise ValidationError(f"Oracle needs a_cutoff >= {2 * params.n + 2}", field="a_cutoff", value=a_cutoff)

        space_a = ModeSpace(a_cutoff)
        space_b = ModeSpace(len(probe))
        step = self.stage_unitary(params, space_a, space_b)

        initial = np.zeros((space_a.cutoff, space_b.cutoff), dtype=complex)
        initial[0, :] = probe
        vector = initial.reshape(-1)

        worst = 0.0
        for stage in range(1, params.N + 1):
            vector = step @ vector
            leakage = JointState.from_vector(vector, (space_a.cutoff, space_b.cutoff)).leakage(params.n)
            worst = max(worst, leakage)
            if leakage > self.leakage_tolerance:
                raise LeakageError(
                    f"Signal population left {{|0>, |{params.n}>}} at stage {stage}: {leakage:.3e} "
                    f"for (n, N, kappa, theta) = {format_parameters((params.n, params.N, params.kappa, params.theta))}",
                    leakage=leakage, tolerance=self.leakage_tolerance, params=params.model_dump(),
                )

        logger.debug(f"Oracle run n={params.n} N={params.N} kappa={params.kappa}: max leakage {worst:.3e}")
        return JointState.from_vector(vector, (space_a.cutoff, space_b.cutoff))

    def run_blocks(self, params: StageParams, probe: np.ndarray) -> CascadeResult:
        """
        Fast path: closed-form v(m), w(m) per probe photon number.

        Output = sum_m alpha_m [v(m)|0>_a + w(m)|n>_a] |m>_b. Post-selection
        projects on |0>_a; a branch probability at or below the no-outcome
        threshold leaves truncated_state and truncation_fidelity as None.

        Args:
            params: Cascade geometry
            probe: Normalized probe coefficients

        Returns:
            CascadeResult
        """
        probe = np.asarray(probe, dtype=complex)
        m_values = np.arange(len(probe))
        v, w, delta, eta = zeno_kernel_calculator.kernel_arrays(params, m_values)
        blocks = [
            BlockAmplitudes(m=int(m), v=complex(v[m]), w=complex(w[m]), delta=float(delta[m]), eta=float(eta[m]))
            for m in m_values
        ]

        weights = np.abs(probe) ** 2
        emission = float(np.dot(weights, np.abs(w) ** 2))
        postselect = float(np.dot(weights, np.abs(v) ** 2))

        stripped = probe_state_factory.strip_vacuum(probe)
        alpha0 = stripped.alpha0
        limit_overlap = -1j * abs(alpha0) ** 2 * w[0] + np.dot(weights[1:], v[1:])
        limit_fidelity = float(min(abs(limit_overlap) ** 2, 1.0))

        truncated_state = None
        truncation_fidelity = None
        if postselect > self.no_outcome_threshold:
            truncated_state = probe * v / math.sqrt(postselect)
            if not stripped.is_vacuum:
                truncation_fidelity = fock_space_calculator.fidelity(stripped.stripped, truncated_state)
        else:
            logger.debug(f"No post-selection outcome at N={params.N}: P0 = {postselect:.3e}")

        return CascadeResult(
            params=params,
            blocks=blocks,
            probe=probe,
            emission_probability=emission,
            postselect_vacuum_probability=postselect,
            truncated_state=truncated_state,
            truncation_fidelity=truncation_fidelity,
            alpha0=alpha0,
            limit_fidelity=limit_fidelity,
        )

    def blocks_to_joint_state(self, result: CascadeResult, a_cutoff: Optional[int] = None) -> JointState:
        """Fast-path amplitudes laid out on the oracle's joint grid."""
        n = result.params.n
        a_cutoff = a_cutoff if a_cutoff is not None else default_a_cutoff(n)
        amplitudes = np.zeros((a_cutoff, len(result.probe)), dtype=complex)
        amplitudes[0, :] = result.probe * np.array([b.v for b in result.blocks])
        amplitudes[n, :] = result.probe * np.array([b.w for b in result.blocks])
        return JointState(amplitudes)

    def limit_state(self, probe: np.ndarray, n: int, a_cutoff: Optional[int] = None) -> JointState:
        """N -> infinity output i alpha0 |n>_a|0>_b + |0>_a |Phi'>_b."""
        a_cutoff = a_cutoff if a_cutoff is not None else default_a_cutoff(n)
        stripped = probe_state_factory.strip_vacuum(probe)
        amplitudes = np.zeros((a_cutoff, len(probe)), dtype=complex)
        amplitudes[0, :] = stripped.stripped
        amplitudes[n, 0] = 1j * stripped.alpha0
        return JointState(amplitudes)

    def truncation_fidelity_sweep(self, params: StageParams, probe: np.ndarray, N_values: Sequence[int],
                                  workers: int = 1) -> List[SweepRow]:
        """
        Run the cascade at every N with theta = pi/(2N).

        Args:
            params: Template supplying n and kappa
            probe: Normalized probe coefficients
            N_values: Stage counts
            workers: Worker processes

        Returns:
            One SweepRow per N, in input order
        """
        if any(N < 1 for N in N_values):
            raise ValidationError("Stage counts must be >= 1", field="N_values", value=list(N_values))
        stripped = probe_state_factory.strip_vacuum(probe)
        if stripped.is_vacuum:
            raise NoOutcomeError("Vacuum probe: post-selection on |0>_a never succeeds at the design angle",
                                 probability=0.0)

        tasks = [(self, params.with_stages(N), probe) for N in N_values]
        return run_sweep_tasks(tasks, workers)


def _sweep_task(task: Tuple["StagedEvolutionEngine", StageParams, np.ndarray]) -> SweepRow:
    engine, params, probe = task
    return SweepRow.from_result(engine.run_blocks(params, probe))


def run_sweep_tasks(tasks: Sequence[Tuple[StagedEvolutionEngine, StageParams, np.ndarray]],
                    workers: int = 1) -> List[SweepRow]:
    """Evaluate (engine, params, probe) tasks; results keep task order."""
    if workers <= 1 or len(tasks) < 2:
        return [_sweep_task(task) for task in tasks]
    chunksize = max(1, len(tasks) // (4 * workers))
    with ProcessPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(_sweep_task, tasks, chunksize=chunksize))


def estimate_oscillation_period(N_values: Sequence[int], P_values: Sequence[float], min_N: int = 10) -> float:
    """Mean spacing of the local maxima of P_n(N) for N >= min_N."""
    N_arr = np.asarray(N_values)
    P_arr = np.asarray(P_values, dtype=float)
    mask = N_arr >= min_N
    peaks, _ = signal.find_peaks(P_arr[mask])
    if len(peaks) < 2:
        raise ValidationError("Fewer than two peaks; extend the N range", field="N_values", value=len(peaks))
    spacing = float(np.mean(np.diff(N_arr[mask][peaks])))
    logger.debug(f"Detected {len(peaks)} peaks, mean spacing {spacing:.3f}")
    return spacing


def oscillation_envelope(N_values: Sequence[int], P_values: Sequence[float], period: float,
                         start: Optional[int] = None) -> np.ndarray:
    """Maximum of P_n(N) over each complete period window from start."""
    N_arr = np.asarray(N_values, dtype=float)
    P_arr = np.asarray(P_values, dtype=float)
    start = N_arr.min() if start is None else start
    windows = np.floor((N_arr - start) / period).astype(int)
    complete = int(np.floor((N_arr.max() + 1 - start) / period))
    return np.array([P_arr[windows == k].max() for k in range(complete) if np.any(windows == k)])


def peak_to_trough(N_values: Sequence[int], P_values: Sequence[float], start: int, period: float) -> float:
    """max - min of P_n(N) over N in [start, start + ceil(period))."""
    N_arr = np.asarray(N_values)
    P_arr = np.asarray(P_values, dtype=float)
    mask = (N_arr >= start) & (N_arr < start + math.ceil(period))
    if not np.any(mask):
        raise ValidationError("Amplitude window holds no samples", field="start", value=start)
    return float(P_arr[mask].max() - P_arr[mask].min())


# Global engine instance
staged_evolution_engine = StagedEvolutionEngine()


def run_oracle(params: StageParams, probe: np.ndarray, a_cutoff: Optional[int] = None) -> JointState:
    """Full two-mode cascade."""
    return staged_evolution_engine.run_oracle(params, probe, a_cutoff)


def run_blocks(params: StageParams, probe: np.ndarray) -> CascadeResult:
    """Closed-form cascade with post-selection analysis."""
    return staged_evolution_engine.run_blocks(params, probe)


def blocks_to_joint_state(result: CascadeResult, a_cutoff: Optional[int] = None) -> JointState:
    return staged_evolution_engine.blocks_to_joint_state(result, a_cutoff)


def limit_state(probe: np.ndarray, n: int, a_cutoff: Optional[int] = None) -> JointState:
    return staged_evolution_engine.limit_state(probe, n, a_cutoff)


def truncation_fidelity_sweep(params: StageParams, probe: np.ndarray, N_values: Sequence[int],
                              workers: int = 1) -> List[SweepRow]:
    """SweepRow per N at the design angle."""
    return staged_evolution_engine.truncation_fidelity_sweep(params, probe, N_values, workers)
