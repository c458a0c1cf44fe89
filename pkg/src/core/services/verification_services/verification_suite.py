"""
Verification Suite for the Zeno vacuum-scissors simulator.

This module provides the checks run by ``zeno-scissors verify``:
- Oracle / closed-form path equivalence on every joint amplitude
- Unitarity of the stage propagators and norm conservation
- Probe photon-number marginal invariance (QND property)
- Per-block unitarity |v|^2 + |w|^2 = 1 and 2x2 product equivalence
- Transfer-matrix composition and probability closure P_n + P_0 = 1
- The KH design check exp(i H_n pi/2)|0> = i|n>
"""

import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from src.core.models.data_models.mode_space import ModeSpace
from src.core.models.data_models.stage_params import StageParams
from src.core.services.calculation_services.fock_space import fock_space_calculator
from src.core.services.calculation_services.probe_states import (
    DEFAULT_PROBE_CUTOFF,
    parse_probe_spec,
    probe_state_factory,
)
from src.core.services.calculation_services.staged_evolution import (
    StagedEvolutionEngine,
    default_a_cutoff,
    staged_evolution_engine,
)
from src.core.services.calculation_services.zeno_kernel import zeno_kernel_calculator
from src.core.utils.error_handling import LeakageError, VerificationFailure, format_parameters

logger = logging.getLogger(__name__)

DEFAULT_TOLERANCES = {
    "path_tolerance": 1e-9,
    "unitarity_tolerance": 1e-10,
    "norm_tolerance": 1e-10,
    "marginal_tolerance": 1e-10,
    "block_unitarity_tolerance": 1e-12,
    "block_product_tolerance": 1e-12,
    "composition_tolerance": 1e-12,
    "closure_tolerance": 1e-10,
    "kh_design_tolerance": 1e-10,
    "leakage_tolerance": 1e-9,
}


@dataclass
class CheckResult:
    """Worst deviation of one check over its parameter grid."""

    name: str
    tolerance: float
    max_deviation: float = 0.0
    worst_params: Tuple = ()
    parameter_names: Tuple[str, ...] = ()
    evaluations: int = 0

    def record(self, deviation: float, params: Tuple) -> None:
        if self.evaluations == 0 or deviation > self.max_deviation:
            self.max_deviation = float(deviation)
            self.worst_params = params
        self.evaluations += 1

    @property
    def passed(self) -> bool:
        return self.max_deviation <= self.tolerance


@dataclass
class VerificationReport:
    """Collection of check results."""

    checks: List[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    @property
    def failures(self) -> List[CheckResult]:
        return [check for check in self.checks if not check.passed]

    def raise_for_failure(self) -> None:
        """Raise VerificationFailure for the first failing check."""
        for check in self.failures:
            labelled = dict(zip(check.parameter_names, check.worst_params))
            raise VerificationFailure(
                f"Check '{check.name}' failed: deviation {check.max_deviation:.3e} exceeds "
                f"{check.tolerance:.1e} at {format_parameters(check.worst_params)}",
                check=check.name,
                deviation=check.max_deviation,
                tolerance=check.tolerance,
                params=labelled,
            )

    def as_rows(self) -> List[Dict[str, Any]]:
        return [
            {
                "check": check.name,
                "max_deviation": check.max_deviation,
                "tolerance": check.tolerance,
                "status": "pass" if check.passed else "FAIL",
                "worst_params": format_parameters(check.worst_params),
            }
            for check in self.checks
        ]


class VerificationSuite:
    """Runs the oracle-equivalence grid and the invariant checks."""

    def __init__(self, verify_config: Optional[Dict[str, Any]] = None,
                 engine: Optional[StagedEvolutionEngine] = None,
                 probe_cutoff: int = DEFAULT_PROBE_CUTOFF, a_cutoff: Optional[int] = None):
        """Initialize the verification suite from the ``verify`` config section."""
        config = verify_config or {}
        self.n_values: List[int] = list(config.get("n_values", [1, 2, 3]))
        self.stage_counts: List[int] = list(config.get("stage_counts", [1, 2, 4, 8, 16, 32]))
        self.kappas: List[float] = list(config.get("kappas", [0.2, 1.0]))
        self.probes: List[str] = list(config.get("probes", ["fock:1", "fock:3", "coherent:1.0"]))
        self.block_n_max: int = int(config.get("block_n_max", 4))
        self.block_N_max: int = int(config.get("block_N_max", 64))
        self.block_kappas: List[float] = list(config.get("block_kappas", [0.1, 0.2, 1.0, 2.5]))
        self.block_m_max: int = int(config.get("block_m_max", 10))
        self.tolerances = {key: float(config.get(key, value)) for key, value in DEFAULT_TOLERANCES.items()}
        self.engine = engine or staged_evolution_engine
        self.probe_cutoff = probe_cutoff
        self.a_cutoff = a_cutoff

    def run(self, kappa_perturbation: float = 0.0) -> VerificationReport:
        """
        Run every check.

        Args:
            kappa_perturbation: Offset added to kappa on the oracle path only;
                a nonzero value is a negative control and must fail

        Returns:
            VerificationReport
        """
        report = VerificationReport()
        report.checks.extend(self.check_paths(kappa_perturbation))
        report.checks.append(self.check_block_unitarity())
        report.checks.append(self.check_block_product())
        report.checks.append(self.check_composition())
        report.checks.append(self.check_kh_design())

        for check in report.checks:
            level = logging.INFO if check.passed else logging.ERROR
            logger.log(level, f"{check.name}: max deviation {check.max_deviation:.3e} "
                              f"(tolerance {check.tolerance:.1e}, {check.evaluations} evaluations)")
        return report

    def check_paths(self, kappa_perturbation: float = 0.0) -> List[CheckResult]:
        """Oracle vs fast path over (n, N, kappa, probe), with the conservation laws of both."""
        names = ("n", "N", "kappa", "probe")
        path = CheckResult("path_equivalence", self.tolerances["path_tolerance"], parameter_names=names)
        unitarity = CheckResult("stage_unitarity", self.tolerances["unitarity_tolerance"], parameter_names=names)
        norm = CheckResult("norm_conservation", self.tolerances["norm_tolerance"], parameter_names=names)
        marginal = CheckResult("probe_marginal", self.tolerances["marginal_tolerance"], parameter_names=names)
        closure = CheckResult("probability_closure", self.tolerances["closure_tolerance"], parameter_names=names)
        leakage = CheckResult("leakage", self.tolerances["leakage_tolerance"], parameter_names=names)

        probe_states = {spec: probe_state_factory.build_state(parse_probe_spec(spec, self.probe_cutoff))
                        for spec in self.probes}
        for n, N, kappa, spec in itertools.product(self.n_values, self.stage_counts, self.kappas, self.probes):
            probe = probe_states[spec]
            tag = (n, N, kappa, spec)
            params = StageParams.design(n, N, kappa)
            oracle_params = StageParams.design(n, N, kappa + kappa_perturbation)
            a_cutoff = self.a_cutoff if self.a_cutoff is not None else default_a_cutoff(n)

            try:
                oracle = self.engine.run_oracle(oracle_params, probe, a_cutoff)
            except LeakageError as e:
                leakage.record(e.leakage, tag)
                path.record(math.inf, tag)
                continue
            result = self.engine.run_blocks(params, probe)
            fast = self.engine.blocks_to_joint_state(result, a_cutoff)

            path.record(float(np.max(np.abs(oracle.amplitudes - fast.amplitudes))), tag)
            leakage.record(max(oracle.leakage(n), 0.0), tag)
            norm.record(max(abs(oracle.norm() - 1.0), abs(fast.norm() - 1.0)), tag)
            weights = np.abs(probe) ** 2
            marginal.record(max(float(np.max(np.abs(oracle.b_marginal() - weights))),
                                float(np.max(np.abs(fast.b_marginal() - weights)))), tag)
            closure.record(abs(result.emission_probability + result.postselect_vacuum_probability - 1.0), tag)

            step = self.engine.stage_unitary(oracle_params, ModeSpace(a_cutoff), ModeSpace(len(probe)))
            unitarity.record(fock_space_calculator.unitarity_deviation(step), tag)

        return [path, leakage, unitarity, norm, marginal, closure]

    def _block_grid(self):
        return itertools.product(range(1, self.block_n_max + 1), range(1, self.block_N_max + 1), self.block_kappas)

    def _path_grid(self):
        return itertools.product(self.n_values, self.stage_counts, self.kappas)

    def check_block_unitarity(self) -> CheckResult:
        """|v|^2 + |w|^2 = 1 over every N up to block_N_max."""
        check = CheckResult("block_unitarity", self.tolerances["block_unitarity_tolerance"],
                            parameter_names=("n", "N", "kappa", "m"))
        m_values = np.arange(self.block_m_max + 1)
        for n, N, kappa in self._block_grid():
            v, w, _, _ = zeno_kernel_calculator.kernel_arrays(StageParams.design(n, N, kappa), m_values)
            deviation = np.abs(np.abs(v) ** 2 + np.abs(w) ** 2 - 1.0)
            worst = int(np.argmax(deviation))
            check.record(float(deviation[worst]), (n, N, kappa, worst))
        return check

    def check_block_product(self) -> CheckResult:
        """Closed form vs explicit 2x2 stage product."""
        check = CheckResult("block_product", self.tolerances["block_product_tolerance"],
                            parameter_names=("n", "N", "kappa", "m"))
        for n, N, kappa in self._path_grid():
            params = StageParams.design(n, N, kappa)
            for m in range(self.block_m_max + 1):
                exact = zeno_kernel_calculator.vw_closed_form(params, m)
                product = zeno_kernel_calculator.vw_block_product(params, m)
                check.record(max(abs(exact.v - product.v), abs(exact.w - product.w)), (n, N, kappa, m))
        return check

    def check_composition(self) -> CheckResult:
        """T(N) = T(N/2) T(N/2) for even N at fixed theta."""
        check = CheckResult("transfer_composition", self.tolerances["composition_tolerance"],
                            parameter_names=("n", "N", "kappa", "m"))
        for n, N, kappa in self._path_grid():
            if N % 2:
                continue
            params = StageParams.design(n, N, kappa)
            half = StageParams(n=n, N=N // 2, kappa=kappa, theta=params.theta)
            for m in range(self.block_m_max + 1):
                full = zeno_kernel_calculator.stage_transfer_matrix(params, m)
                halves = zeno_kernel_calculator.stage_transfer_matrix(half, m)
                check.record(float(np.max(np.abs(full - halves @ halves))), (n, N, kappa, m))
        return check

    def check_kh_design(self) -> CheckResult:
        """exp(i H_n pi/2)|0> = i|n> at cutoff 3n + 2."""
        check = CheckResult("kh_design", self.tolerances["kh_design_tolerance"], parameter_names=("n", "cutoff"))
        for n in self.n_values:
            space = ModeSpace(default_a_cutoff(n))
            U = fock_space_calculator.hermitian_propagator(
                zeno_kernel_calculator.kh_hamiltonian(n, 1.0, space), math.pi / 2
            )
            target = 1j * space.basis_state(n)
            check.record(float(np.max(np.abs(U[:, 0] - target))), (n, space.cutoff))
        return check
