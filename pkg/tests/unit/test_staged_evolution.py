"""
Unit tests for the staged cascade engine.
"""

import math

import numpy as np
import pytest

from src.core.models.data_models.mode_space import ModeSpace
from src.core.models.data_models.probe_state import ProbeStateSpec
from src.core.models.data_models.stage_params import StageParams
from src.core.services.calculation_services.fock_space import fock_space_calculator
from src.core.services.calculation_services.probe_states import build_state
from src.core.services.calculation_services.staged_evolution import (
    StagedEvolutionEngine,
    blocks_to_joint_state,
    default_a_cutoff,
    estimate_oscillation_period,
    limit_state,
    oscillation_envelope,
    peak_to_trough,
    run_blocks,
    run_oracle,
    run_sweep_tasks,
    truncation_fidelity_sweep,
)
from src.core.services.calculation_services.zeno_kernel import vw_closed_form
from src.core.utils.error_handling import LeakageError, NoOutcomeError, ValidationError


class TestOracle:
    def test_default_cutoff(self):
        assert default_a_cutoff(2) == 8

    def test_stage_unitary_is_unitary(self, engine, design_params):
        step = engine.stage_unitary(design_params, ModeSpace(8), ModeSpace(6))
        assert fock_space_calculator.unitarity_deviation(step) <= 1e-10

    def test_oracle_block_amplitudes(self, small_coherent_probe):
        params = StageParams.design(2, 10, 0.2)
        joint = run_oracle(params, small_coherent_probe)
        block = vw_closed_form(params, 1)
        alpha1 = small_coherent_probe[1]
        assert joint.amplitudes[0, 1] / alpha1 == pytest.approx(block.v, abs=1e-10)
        assert joint.amplitudes[2, 1] / alpha1 == pytest.approx(block.w, abs=1e-10)

    @pytest.mark.parametrize("n,N,kappa", [(1, 4, 1.0), (2, 8, 0.2), (3, 16, 1.0)])
    def test_matches_block_path(self, n, N, kappa, small_coherent_probe):
        params = StageParams.design(n, N, kappa)
        oracle = run_oracle(params, small_coherent_probe)
        fast = blocks_to_joint_state(run_blocks(params, small_coherent_probe))
        assert np.max(np.abs(oracle.amplitudes - fast.amplitudes)) <= 1e-9
        assert oracle.leakage(n) <= 1e-9
        assert oracle.norm() == pytest.approx(1.0, abs=1e-10)

    def test_probe_marginal_is_conserved(self, small_coherent_probe):
        oracle = run_oracle(StageParams.design(2, 16, 1.0), small_coherent_probe)
        np.testing.assert_allclose(oracle.b_marginal(), np.abs(small_coherent_probe) ** 2, atol=1e-10)

    def test_cutoff_below_minimum(self, fock1_probe):
        with pytest.raises(ValidationError):
            run_oracle(StageParams.design(2, 4, 0.2), fock1_probe, a_cutoff=5)

    def test_leakage_tolerance_enforced(self, fock1_probe):
        strict = StagedEvolutionEngine(leakage_tolerance=-1.0)
        with pytest.raises(LeakageError) as exc_info:
            strict.run_oracle(StageParams.design(1, 2, 0.2), fock1_probe[:6])
        assert "(1, 2, 0.2" in exc_info.value.message


class TestOffDesign:
    @pytest.mark.parametrize("n,N,theta", [(1, 5, 0.3), (2, 7, 0.9), (3, 3, 1.1)])
    def test_oracle_matches_block_path(self, n, N, theta, small_coherent_probe):
        params = StageParams(n=n, N=N, kappa=0.2, theta=theta)
        oracle = run_oracle(params, small_coherent_probe)
        fast = blocks_to_joint_state(run_blocks(params, small_coherent_probe))
        assert np.max(np.abs(oracle.amplitudes - fast.amplitudes)) <= 1e-9
        assert oracle.leakage(n) <= 1e-9

    @pytest.mark.parametrize("n,N,theta", [(1, 5, 0.3), (2, 7, 0.9)])
    def test_probabilities_come_from_full_output(self, n, N, theta, small_coherent_probe):
        params = StageParams(n=n, N=N, kappa=0.2, theta=theta)
        oracle = run_oracle(params, small_coherent_probe)
        result = run_blocks(params, small_coherent_probe)
        assert result.emission_probability == pytest.approx(np.sum(np.abs(oracle.amplitudes[n]) ** 2), abs=1e-10)
        assert result.postselect_vacuum_probability == pytest.approx(
            np.sum(np.abs(oracle.amplitudes[0]) ** 2), abs=1e-10
        )
        assert result.emission_probability + result.postselect_vacuum_probability == pytest.approx(1.0, abs=1e-10)

    def test_vacuum_branch_interferes_off_design(self, small_coherent_probe):
        params = StageParams(n=2, N=7, kappa=0.2, theta=0.9)
        result = run_blocks(params, small_coherent_probe)
        weights = np.abs(small_coherent_probe) ** 2
        design_formula = weights[0] + sum(weights[m] * abs(result.blocks[m].w) ** 2 for m in range(1, len(weights)))
        vacuum_shortfall = weights[0] * math.cos(params.total_angle) ** 2
        assert vacuum_shortfall > 1e-3
        assert result.emission_probability == pytest.approx(design_formula - vacuum_shortfall, abs=1e-12)


class TestBlocks:
    def test_probability_closure(self, design_params, squeezed_probe):
        result = run_blocks(design_params, squeezed_probe)
        assert result.emission_probability + result.postselect_vacuum_probability == pytest.approx(1.0, abs=1e-10)

    @pytest.mark.parametrize("N", [1, 4, 16, 200])
    def test_emission_is_vacuum_weight_plus_converted_photons(self, N, coherent_probe, squeezed_probe):
        params = StageParams.design(2, N, 0.2)
        for probe in (coherent_probe, squeezed_probe):
            weights = np.abs(probe) ** 2
            expected = weights[0] + sum(weights[m] * abs(vw_closed_form(params, m).w) ** 2
                                        for m in range(1, len(probe)))
            result = run_blocks(params, probe)
            assert result.emission_probability == pytest.approx(expected, abs=1e-12)
            assert result.emission_probability >= weights[0] - 1e-12

    def test_fock_probe_keeps_its_photon(self, fock1_probe):
        result = run_blocks(StageParams.design(2, 40, 0.2), fock1_probe)
        assert result.truncation_fidelity == pytest.approx(1.0, abs=1e-12)
        assert result.emission_probability == pytest.approx(abs(vw_closed_form(result.params, 1).w) ** 2)

    def test_vacuum_probe_has_no_outcome(self, vacuum_probe):
        result = run_blocks(StageParams.design(2, 30, 0.2), vacuum_probe)
        assert result.no_outcome
        assert result.truncated_state is None
        assert result.truncation_fidelity is None
        assert result.emission_probability == pytest.approx(1.0, abs=1e-12)

    def test_coherent_emission_approaches_vacuum_weight(self, coherent_probe):
        result = run_blocks(StageParams.design(2, 2000, 0.2), coherent_probe)
        assert result.emission_probability == pytest.approx(math.exp(-1.0), abs=1e-3)
        assert result.limit_fidelity == pytest.approx(1.0, abs=1e-3)

    def test_truncated_state_is_normalized(self, design_params, coherent_probe):
        result = run_blocks(design_params, coherent_probe)
        assert np.linalg.norm(result.truncated_state) == pytest.approx(1.0, abs=1e-12)
        assert 0.0 < result.truncation_fidelity <= 1.0

    def test_limit_state(self, coherent_probe):
        joint = limit_state(coherent_probe, 2)
        assert joint.amplitudes[2, 0] == pytest.approx(1j * coherent_probe[0])
        assert joint.amplitudes[0, 0] == 0
        assert joint.norm() == pytest.approx(1.0, abs=1e-12)


class TestSweeps:
    def test_truncation_fidelity_converges(self, coherent_probe):
        template = StageParams.design(2, 1, 0.2)
        rows = truncation_fidelity_sweep(template, coherent_probe, [100, 200, 400, 800])
        assert [row.N for row in rows] == [100, 200, 400, 800]
        final = rows[-1]
        assert final.fidelity >= 0.999
        assert 1e-6 < final.one_minus_fidelity < 2e-5
        assert final.postselect_probability == pytest.approx(1.0 - math.exp(-1.0), abs=0.01)

        infidelity = np.array([row.one_minus_fidelity for row in rows])
        slope = np.polyfit(np.log([100, 200, 400, 800]), np.log(infidelity), 1)[0]
        assert slope == pytest.approx(-2.0, abs=0.2)

    def test_vacuum_probe_rejected(self, vacuum_probe):
        with pytest.raises(NoOutcomeError):
            truncation_fidelity_sweep(StageParams.design(2, 1, 0.2), vacuum_probe, [10, 20])

    def test_stage_counts_validated(self, coherent_probe):
        with pytest.raises(ValidationError):
            truncation_fidelity_sweep(StageParams.design(2, 1, 0.2), coherent_probe, [0, 10])

    def test_worker_pool_preserves_order(self, engine, coherent_probe):
        tasks = [(engine, StageParams.design(2, N, 0.2), coherent_probe) for N in range(1, 13)]
        serial = run_sweep_tasks(tasks, workers=1)
        parallel = run_sweep_tasks(tasks, workers=2)
        assert serial == parallel


class TestOscillations:
    @pytest.fixture
    def fock_curves(self):
        N_values = np.arange(1, 201)
        curves = {}
        for m in (1, 2):
            probe = build_state(ProbeStateSpec.fock(m, cutoff=10))
            curves[m] = np.array([run_blocks(StageParams.design(2, N, 0.2), probe).emission_probability
                                  for N in N_values])
        return N_values, curves

    def test_period_estimate(self, fock_curves):
        N_values, curves = fock_curves
        assert estimate_oscillation_period(N_values, curves[1]) == pytest.approx(2 * math.pi / 0.4, abs=0.3)
        assert estimate_oscillation_period(N_values, curves[2]) == pytest.approx(2 * math.pi / 0.8, abs=0.3)

    def test_zeno_bound(self, fock_curves):
        N_values, curves = fock_curves
        bound = (math.pi / (2 * math.sin(0.2))) ** 2
        assert bound == pytest.approx(62.5, abs=0.1)
        assert np.max(curves[1] * N_values ** 2) <= 70.0

    def test_envelope_decreases(self, fock_curves):
        N_values, curves = fock_curves
        envelope = oscillation_envelope(N_values, curves[1], 2 * math.pi / 0.4)
        assert len(envelope) == 12
        assert np.all(np.diff(envelope[2:]) <= 1e-12)

    def test_peak_to_trough(self, fock_curves):
        N_values, curves = fock_curves
        assert peak_to_trough(N_values, curves[1], 40, 2 * math.pi / 0.4) > 0.02

    def test_too_few_peaks(self):
        with pytest.raises(ValidationError):
            estimate_oscillation_period(np.arange(1, 20), np.linspace(0, 1, 19))

    def test_empty_amplitude_window(self):
        with pytest.raises(ValidationError):
            peak_to_trough(np.arange(1, 10), np.zeros(9), 50, 10.0)
