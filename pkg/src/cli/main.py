"""
Command-line entry point for the Zeno vacuum-scissors simulator.

    zeno-scissors <fig2|sweep|verify|truncate> [--n INT] [--kappa REAL]
        [--probe SPEC] [--N-range A:B[:S]] [--a-cutoff INT] [--b-cutoff INT]
        [--out PATH] [--config PATH]

Exit statuses: 0 success, 1 check failure, 2 usage error.
"""

import argparse
import logging
import sys
import time
from typing import Any, Dict, List, Optional, Sequence, Tuple

import pydantic

from src.core.models.data_models.cascade_result import SweepRow
from src.core.models.data_models.stage_params import StageParams
from src.core.models.experiment_models.experiment_config import ExperimentConfig, ExperimentMode, parse_n_range
from src.core.services.calculation_services.probe_states import ProbeStateFactory, parse_probe_spec
from src.core.services.calculation_services.staged_evolution import (
    StagedEvolutionEngine,
    run_sweep_tasks,
)
from src.core.services.data_services.config_service import (
    get_execution_config,
    get_fig2_config,
    get_simulation_config,
    get_sweep_config,
    get_truncate_config,
    get_verify_config,
    get_version,
    load_config,
    reload_config,
    setup_logging,
)
from src.core.services.monitoring.performance_monitor import performance_monitor
from src.core.services.reporting_services.reporting_engine import ReportType, fit_loglog_slope, reporting_engine
from src.core.services.verification_services.verification_suite import VerificationSuite
from src.core.utils.error_handling import (
    ConfigurationError,
    SimulationError,
    ValidationError,
    error_handler,
)

logger = logging.getLogger(__name__)

PROG = "zeno-scissors"
FIG2_NOTE = ("every integer N in range is sampled; asymptotes, oscillation period "
             "and amplitude ordering are the checked features")

SECTION_GETTERS = {
    ExperimentMode.FIG2: get_fig2_config,
    ExperimentMode.SWEEP: get_sweep_config,
    ExperimentMode.TRUNCATE: get_truncate_config,
    ExperimentMode.VERIFY: get_verify_config,
}


def build_parser() -> argparse.ArgumentParser:
    """Argument parser shared by all subcommands."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", type=int, help="target Fock number of the signal mode")
    common.add_argument("--kappa", type=float, help="Kerr strength per stage (radians)")
    common.add_argument("--probe", help="probe state: fock:<m> | coherent:<re>[,<im>] | "
                                        "squeezed:<eps>,<alpha> | custom:@<file>")
    common.add_argument("--N-range", dest="n_range", metavar="A:B[:S]", help="inclusive stage-count range")
    common.add_argument("--a-cutoff", type=int, help="signal-mode cutoff of the oracle path (default 3n+2)")
    common.add_argument("--b-cutoff", type=int, help="probe-mode Fock cutoff")
    common.add_argument("--out", dest="output_path", metavar="PATH", help="CSV destination (default stdout)")
    common.add_argument("--config", metavar="PATH", help="YAML file merged over the shipped defaults")
    common.add_argument("--workers", type=int, help="worker processes for row computation")
    common.add_argument("--log-level", choices=["DEBUG", "INFO", "WARNING", "ERROR"], help="root log level")

    parser = argparse.ArgumentParser(prog=PROG, description="Zeno-effect vacuum truncation simulator")
    subparsers = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    fig2 = subparsers.add_parser("fig2", parents=[common], help="emission probability versus N for the preset probes")
    fig2.add_argument("--n-max", type=int, help="largest stage count when --N-range is not given")
    subparsers.add_parser("sweep", parents=[common], help="single-probe sweep over N")
    verify = subparsers.add_parser("verify", parents=[common], help="oracle equivalence and invariant checks")
    verify.add_argument("--corrupt-kappa", type=float, default=0.0, metavar="DELTA",
                        help="test hook: add DELTA to kappa on the oracle path only")
    subparsers.add_parser("truncate", parents=[common], help="truncation fidelity sweep")
    return parser


def _pick(flag: Any, configured: Any) -> Any:
    """Flags win over configuration."""
    return configured if flag is None else flag


def _stage_counts(text: str) -> List[int]:
    try:
        start, stop, step = parse_n_range(text)
    except ValueError as e:
        raise ValidationError(str(e), field="n_range", value=text)
    return list(range(start, stop + 1, step))


def resolve_experiment(args: argparse.Namespace, config: Dict[str, Any]) -> ExperimentConfig:
    """
    Merge shipped defaults, the --config file and command-line flags.

    Args:
        args: Parsed command line
        config: Merged configuration mapping

    Returns:
        Validated ExperimentConfig
    """
    mode = ExperimentMode(args.command)
    simulation = get_simulation_config(config)
    section = SECTION_GETTERS[mode](config)

    values: Dict[str, Any] = {
        "mode": mode,
        "n": _pick(args.n, section.get("n", 2)),
        "kappa": _pick(args.kappa, section.get("kappa", 0.2)),
        "a_cutoff": args.a_cutoff,
        "b_cutoff": _pick(args.b_cutoff, simulation.get("probe_cutoff", 40)),
        "output_path": args.output_path,
        "workers": _pick(args.workers, get_execution_config(config).get("workers", 1)),
        "kappa_perturbation": getattr(args, "corrupt_kappa", 0.0),
    }

    if mode == ExperimentMode.FIG2:
        values["probes"] = [args.probe] if args.probe else list(section.get("probes", []))
        n_max = _pick(getattr(args, "n_max", None), section.get("n_max", 200))
        range_text = _pick(args.n_range, f"1:{n_max}")
    elif mode == ExperimentMode.VERIFY:
        values["probes"] = [args.probe] if args.probe else list(section.get("probes", []))
        overrides: Dict[str, Any] = {}
        if args.n is not None:
            overrides["n_values"] = [args.n]
        if args.kappa is not None:
            overrides["kappas"] = [args.kappa]
        if args.n_range:
            overrides["stage_counts"] = _stage_counts(args.n_range)
        values["grid_overrides"] = overrides
        range_text = args.n_range or "1:1"
    else:
        values["probe"] = _pick(args.probe, section.get("probe", "coherent:1.0"))
        range_text = _pick(args.n_range, section.get("n_range", "1:200"))

    try:
        values["n_range"] = parse_n_range(str(range_text))
        return ExperimentConfig(**values)
    except pydantic.ValidationError as e:
        first = e.errors()[0]
        location = ".".join(str(part) for part in first.get("loc", ())) or "config"
        raise ValidationError(f"Invalid {location}: {first.get('msg')}", field=location)
    except ValueError as e:
        raise ValidationError(str(e), field="n_range", value=range_text)


def _factory(config: Dict[str, Any]) -> ProbeStateFactory:
    simulation = get_simulation_config(config)
    return ProbeStateFactory(
        tail_tolerance=float(simulation.get("tail_tolerance", 1e-10)),
        squeeze_padding=int(simulation.get("squeeze_padding", 40)),
        custom_norm_warning=float(simulation.get("custom_norm_warning", 1e-6)),
    )


def _engine(config: Dict[str, Any]) -> StagedEvolutionEngine:
    simulation = get_simulation_config(config)
    return StagedEvolutionEngine(
        leakage_tolerance=float(simulation.get("leakage_tolerance", 1e-9)),
        no_outcome_threshold=float(simulation.get("no_outcome_threshold", 1e-12)),
    )


def _design_geometry(n: int, N: int, kappa: float) -> StageParams:
    geometry = StageParams.design(n, N, kappa)
    if not geometry.is_design:
        raise ValidationError(f"Stage geometry N*theta = {geometry.total_angle!r} is not pi/2", field="theta")
    return geometry


def _probe_metadata(factory: ProbeStateFactory, labels: Sequence[str], states) -> Dict[str, Any]:
    metadata: Dict[str, Any] = {}
    for label, state in zip(labels, states):
        stats = factory.photon_statistics(state)
        q = "undefined" if stats.mandel_q is None else f"{stats.mandel_q:.6f}"
        metadata[f"probe {label}"] = f"mean={stats.mean:.6f} mandel_q={q} vacuum_weight={stats.vacuum_weight:.6f}"
    return metadata


def _header(experiment: ExperimentConfig, **extra: Any) -> Dict[str, Any]:
    start, stop, step = experiment.n_range
    header: Dict[str, Any] = {
        PROG: get_version(),
        "command": experiment.mode.value,
        "n": experiment.n,
        "kappa": experiment.kappa,
        "N_range": f"{start}:{stop}:{step}",
        "b_cutoff": experiment.b_cutoff,
        "theta": "pi/(2N)",
    }
    header.update(extra)
    return header


def _sweep_rows(experiment: ExperimentConfig, config: Dict[str, Any],
                labels: Sequence[str]) -> Tuple[List[Tuple[str, SweepRow]], Dict[str, Any]]:
    """Rows ordered N-major, then by probe."""
    factory = _factory(config)
    engine = _engine(config)
    states = [factory.build_state(parse_probe_spec(label, experiment.b_cutoff)) for label in labels]

    tasks, tags = [], []
    for N in experiment.stage_counts:
        geometry = _design_geometry(experiment.n, N, experiment.kappa)
        for label, state in zip(labels, states):
            tasks.append((engine, geometry, state))
            tags.append(label)

    with performance_monitor.track("cascade_rows", command=experiment.mode.value, workers=experiment.workers):
        rows = run_sweep_tasks(tasks, experiment.workers)
    return list(zip(tags, rows)), _probe_metadata(factory, labels, states)


def cmd_fig2(experiment: ExperimentConfig, config: Dict[str, Any]) -> int:
    """Emission probability P_n versus N for the preset probes."""
    if not experiment.probes:
        raise ConfigurationError("fig2 needs at least one probe", key="fig2.probes")
    rows, probe_metadata = _sweep_rows(experiment, config, experiment.probes)
    frame = reporting_engine.build_dataset(ReportType.FIG2, rows)
    metadata = _header(experiment, probes=experiment.probes, **probe_metadata)
    metadata["note"] = FIG2_NOTE
    reporting_engine.write(reporting_engine.render(frame, metadata), experiment.output_path)
    return len(frame)


def cmd_sweep(experiment: ExperimentConfig, config: Dict[str, Any]) -> int:
    """Single-probe sweep with the limit-state fidelity."""
    rows, probe_metadata = _sweep_rows(experiment, config, [experiment.probe])
    frame = reporting_engine.build_dataset(ReportType.SWEEP, rows)
    metadata = _header(experiment, probe=experiment.probe, **probe_metadata)
    reporting_engine.write(reporting_engine.render(frame, metadata), experiment.output_path)
    return len(frame)


def cmd_truncate(experiment: ExperimentConfig, config: Dict[str, Any]) -> int:
    """Truncation fidelity against the vacuum-stripped probe, with the fitted 1 - F slope."""
    factory = _factory(config)
    engine = _engine(config)
    state = factory.build_state(parse_probe_spec(experiment.probe, experiment.b_cutoff))
    template = _design_geometry(experiment.n, 1, experiment.kappa)

    with performance_monitor.track("cascade_rows", command=experiment.mode.value, workers=experiment.workers):
        rows = engine.truncation_fidelity_sweep(template, state, experiment.stage_counts, experiment.workers)
    frame = reporting_engine.build_dataset(ReportType.TRUNCATE, [(experiment.probe, row) for row in rows])

    slope = fit_loglog_slope(frame["N"], frame["one_minus_F"])
    footer = {"slope log(1-F) vs log(N)": "undefined" if slope is None else f"{slope:.6f}"}
    logger.debug(f"Truncation infidelity slope: {footer}")
    metadata = _header(experiment, probe=experiment.probe,
                       **_probe_metadata(factory, [experiment.probe], [state]))
    reporting_engine.write(reporting_engine.render(frame, metadata, footer), experiment.output_path)
    return len(frame)


def cmd_verify(experiment: ExperimentConfig, config: Dict[str, Any]) -> int:
    """Cross-path equivalence grid and invariant checks; fails on any deviation beyond tolerance."""
    verify_config = dict(get_verify_config(config))
    if experiment.probes:
        verify_config["probes"] = experiment.probes
    verify_config.update(experiment.grid_overrides)

    suite = VerificationSuite(verify_config, engine=_engine(config), probe_cutoff=experiment.b_cutoff,
                              a_cutoff=experiment.a_cutoff)
    with performance_monitor.track("verification_grid", command=experiment.mode.value):
        report = suite.run(kappa_perturbation=experiment.kappa_perturbation)

    frame = reporting_engine.build_verification_table(report.as_rows())
    metadata = {
        PROG: get_version(),
        "command": experiment.mode.value,
        "n_values": suite.n_values,
        "stage_counts": suite.stage_counts,
        "kappas": suite.kappas,
        "probes": suite.probes,
        "kappa_perturbation": experiment.kappa_perturbation,
        "result": "pass" if report.passed else "FAIL",
    }
    reporting_engine.write(reporting_engine.render(frame, metadata), experiment.output_path)
    report.raise_for_failure()
    return len(frame)


COMMANDS = {
    ExperimentMode.FIG2: cmd_fig2,
    ExperimentMode.SWEEP: cmd_sweep,
    ExperimentMode.VERIFY: cmd_verify,
    ExperimentMode.TRUNCATE: cmd_truncate,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run the command line and return its exit status."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if e.code is not None else error_handler.EXIT_USAGE

    try:
        reload_config()
        config = load_config(args.config)
        setup_logging(args.log_level, config)
        experiment = resolve_experiment(args, config)

        logger.info(f"Running {experiment.mode.value} (n={experiment.n}, kappa={experiment.kappa}, "
                    f"N={experiment.n_range}, workers={experiment.workers})")
        started = time.perf_counter()
        rows = COMMANDS[experiment.mode](experiment, config)
        performance_monitor.track_command(experiment.mode.value, time.perf_counter() - started, rows)
        logger.debug(f"Run metrics: {performance_monitor.get_metrics_summary()}")
        return error_handler.EXIT_SUCCESS
    except SimulationError as e:
        report = error_handler.handle_error(e, {"command": args.command})
        print(f"{PROG}: error: {e.message}", file=sys.stderr)
        for suggestion in report["suggestions"]:
            print(f"{PROG}: hint: {suggestion}", file=sys.stderr)
        return error_handler.exit_code(e)


def run() -> None:
    """Console-script wrapper."""
    sys.exit(main())


if __name__ == "__main__":
    run()
