"""
Integration tests for the zeno-scissors command line.
"""

import io

import pandas as pd
import pytest

from src.cli.main import build_parser, main, resolve_experiment
from src.core.models.experiment_models.experiment_config import ExperimentMode
from src.core.services.data_services.config_service import load_config
from src.core.services.monitoring.performance_monitor import performance_monitor
from src.core.utils.error_handling import ValidationError


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def read_dataset(text):
    return pd.read_csv(io.StringIO(text), comment="#", na_values=["no_outcome"])


def header(text):
    return dict(line[2:].split(": ", 1) for line in text.splitlines() if line.startswith("# "))


class TestResolveExperiment:
    def test_flags_win_over_config(self, user_config_file):
        args = build_parser().parse_args(["truncate", "--kappa", "0.3", "--config", str(user_config_file)])
        experiment = resolve_experiment(args, load_config(args.config))
        assert experiment.mode == ExperimentMode.TRUNCATE
        assert experiment.n == 1
        assert experiment.kappa == 0.3
        assert experiment.stage_counts == [10, 20, 30]

    def test_fig2_preset(self):
        args = build_parser().parse_args(["fig2", "--n-max", "50"])
        experiment = resolve_experiment(args, load_config())
        assert experiment.probes == ["fock:1", "coherent:1.0", "squeezed:-0.5,0.853498"]
        assert experiment.n_range == (1, 50, 1)

    def test_verify_flags_narrow_grid(self):
        args = build_parser().parse_args(["verify", "--n", "1", "--N-range", "1:4:3"])
        experiment = resolve_experiment(args, load_config())
        assert experiment.grid_overrides == {"n_values": [1], "stage_counts": [1, 4]}

    def test_bad_range(self):
        args = build_parser().parse_args(["sweep", "--N-range", "9:3"])
        with pytest.raises(ValidationError):
            resolve_experiment(args, load_config())


class TestTruncate:
    def test_csv_layout(self, capsys):
        code, out, _ = run_cli(capsys, "truncate", "--N-range", "100:300:100")
        assert code == 0
        meta = header(out)
        assert meta["command"] == "truncate"
        assert meta["n"] == "2"
        assert meta["kappa"] == "0.2"
        assert "slope log(1-F) vs log(N)" in meta
        frame = read_dataset(out)
        assert list(frame.columns) == ["N", "P_postselect", "fidelity", "one_minus_F"]
        assert frame["N"].tolist() == [100, 200, 300]
        assert ((frame["fidelity"] > 0) & (frame["fidelity"] <= 1)).all()

    def test_fock_probe_is_untouched(self, capsys):
        code, out, _ = run_cli(capsys, "truncate", "--probe", "fock:1", "--N-range", "10:50:10")
        assert code == 0
        assert (read_dataset(out)["fidelity"] - 1.0).abs().max() < 1e-12

    def test_vacuum_probe_has_no_outcome(self, capsys):
        code, out, err = run_cli(capsys, "truncate", "--probe", "fock:0", "--N-range", "10:20")
        assert code == 1
        assert out == ""
        assert "zeno-scissors: error:" in err
        assert "Vacuum probe" in err

    def test_phases_are_timed(self, capsys):
        code, _, _ = run_cli(capsys, "truncate", "--N-range", "10:20:10", "--workers", "1")
        assert code == 0
        assert performance_monitor.samples["cascade_rows"][-1].tags == {"command": "truncate", "workers": "1"}
        assert performance_monitor.samples["command_duration"][-1].tags == {"command": "truncate"}

    def test_config_file(self, capsys, user_config_file):
        code, out, _ = run_cli(capsys, "truncate", "--config", str(user_config_file))
        assert code == 0
        meta = header(out)
        assert (meta["n"], meta["kappa"], meta["N_range"]) == ("1", "0.4", "10:30:10")


class TestSweepAndFig2:
    def test_sweep_to_file(self, capsys, tmp_path):
        path = tmp_path / "sweep.csv"
        code, out, _ = run_cli(capsys, "sweep", "--probe", "coherent:0.8", "--N-range", "1:30", "--out", str(path))
        assert code == 0
        assert out == ""
        frame = read_dataset(path.read_text())
        assert list(frame.columns) == ["N", "probe", "P_n", "P_postselect", "fidelity", "limit_fidelity"]
        assert len(frame) == 30
        assert ((frame["P_n"] + frame["P_postselect"]) - 1.0).abs().max() <= 1e-9

    def test_fig2_rows_are_n_major(self, capsys):
        code, out, _ = run_cli(capsys, "fig2", "--N-range", "1:20")
        assert code == 0
        frame = read_dataset(out)
        assert list(frame.columns) == ["N", "probe", "P_n", "P_postselect", "fidelity"]
        assert len(frame) == 60
        assert frame["probe"].tolist()[:3] == ["fock:1", "coherent:1.0", "squeezed:-0.5,0.853498"]
        assert frame["N"].is_monotonic_increasing
        assert frame["P_n"].between(0, 1).all()
        meta = header(out)
        assert meta["n"] == "2" and meta["kappa"] == "0.2"
        assert "mean=1.000000" in meta["probe coherent:1.0"]
        assert "mandel_q=1.6707" in meta["probe squeezed:-0.5,0.853498"]

    def test_output_is_deterministic(self, capsys):
        _, first, _ = run_cli(capsys, "fig2", "--N-range", "1:15")
        _, second, _ = run_cli(capsys, "fig2", "--N-range", "1:15", "--workers", "2")
        assert first == second


class TestVerify:
    def test_reduced_grid_passes(self, capsys):
        code, out, _ = run_cli(capsys, "verify", "--n", "1", "--N-range", "1:4", "--kappa", "0.2")
        assert code == 0
        frame = pd.read_csv(io.StringIO(out), comment="#")
        assert list(frame.columns) == ["check", "max_deviation", "tolerance", "status", "worst_params"]
        assert (frame["status"] == "pass").all()
        assert header(out)["result"] == "pass"
        assert performance_monitor.samples["verification_grid"][-1].tags == {"command": "verify"}

    def test_corrupted_kappa_fails(self, capsys):
        code, out, err = run_cli(capsys, "verify", "--n", "1", "--N-range", "1:2", "--corrupt-kappa", "0.01")
        assert code == 1
        assert header(out)["result"] == "FAIL"
        assert "path_equivalence" in err


class TestUsageErrors:
    @pytest.mark.parametrize("argv", [
        ["sweep", "--probe", "laser:1"],
        ["sweep", "--N-range", "5:1"],
        ["sweep", "--n", "0"],
        ["sweep", "--a-cutoff", "3"],
        ["sweep", "--b-cutoff", "1"],
    ])
    def test_invalid_arguments(self, capsys, argv):
        code, out, err = run_cli(capsys, *argv)
        assert code == 2
        assert out == ""
        assert "error" in err

    def test_unknown_command(self, capsys):
        code, _, _ = run_cli(capsys, "plot")
        assert code == 2

    def test_probe_error_cites_grammar(self, capsys):
        _, _, err = run_cli(capsys, "sweep", "--probe", "fock:x")
        assert "fock:<m> | coherent:<re>[,<im>] | squeezed:<eps>,<alpha> | custom:@<file>" in err

    def test_output_directory_missing(self, capsys, tmp_path):
        target = tmp_path / "missing" / "out.csv"
        code, _, err = run_cli(capsys, "sweep", "--N-range", "1:3", "--out", str(target))
        assert code == 2
        assert str(target) in err

    def test_truncation_hint(self, capsys):
        code, _, err = run_cli(capsys, "sweep", "--probe", "coherent:4.0", "--b-cutoff", "20", "--N-range", "1:3")
        assert code == 2
        assert "--b-cutoff" in err
