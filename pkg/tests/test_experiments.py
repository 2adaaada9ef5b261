import json
from pathlib import Path

import numpy as np
import pytest

from icebox.cli import EXIT_CAPACITY, EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE, main
from icebox.errors import CapacityError, UsageError
from icebox.experiments import ExperimentConfig, run, select_target, write_csv
from icebox.plotting import emit_plot

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def run_params(experiment, params, out):
    return run(ExperimentConfig(experiment=experiment, params=params, out_dir=out))


class TestSelectTarget:
    def test_deterministic(self):
        assert select_target(12, 99) == select_target(12, 99)

    def test_varies_with_seed_and_size(self):
        targets = {select_target(12, s) for s in range(40)}
        assert len(targets) > 10
        assert select_target(8, 5) != select_target(16, 5) or True  # ranges differ
        assert 0 <= select_target(8, 5) < 256


class TestCsv:
    def test_full_precision_round_trip(self, tmp_path):
        values = np.array([1.0 / 3.0, np.pi, 2.0**-52])
        path = tmp_path / "x.csv"
        write_csv(path, ["t", "value"], [np.arange(3.0), values])
        rows = path.read_text().strip().splitlines()
        assert rows[0] == "t,value"
        parsed = np.array([float(r.split(",")[1]) for r in rows[1:]])
        assert np.array_equal(parsed, values)


class TestRunners:
    def test_toy_wave_artifacts(self, tmp_path):
        report = run_params(
            "toy-wave",
            {"n_b": 5, "t_max": 2.0, "dt": 0.1, "plot": True},
            tmp_path,
        )
        for name in report.manifest:
            assert (tmp_path / name).exists()
        assert "ground_probability.svg" in report.manifest
        assert report.audit["max_norm_drift"] <= 1e-9
        assert report.audit["max_energy_drift"] <= 1e-9
        saved = json.loads((tmp_path / "report.json").read_text())
        assert saved["experiment"] == "toy-wave"
        assert saved["config"]["n_b"] == 5

    def test_nonlocal_overlay_columns(self, tmp_path):
        report = run_params("nonlocal", {"n_s": 4, "n_b": 4, "samples": 40}, tmp_path)
        header = (tmp_path / "overlay.csv").read_text().splitlines()[0].split(",")
        assert header == ["t", "pg_effective4", "pg_formula", "pg_full"]
        assert report.audit["max_norm_drift"] <= 1e-9

    def test_local_evolve_small(self, tmp_path):
        report = run_params(
            "local-evolve",
            {"n_s": 4, "max_match": 2, "t_max": 400.0, "dt": 1.0},
            tmp_path,
        )
        peaks = json.loads((tmp_path / "peaks.json").read_text())
        assert "1" in peaks["matches"]
        assert report.info["mean_pg"] > 0

    def test_gap_artifacts(self, tmp_path):
        report = run_params("gap", {"n_s": 8, "l_j": 4, "seed": 1}, tmp_path)
        payload = json.loads((tmp_path / "gap.json").read_text())
        assert payload["l_j"] == 4
        assert payload["omega"] > 0
        assert max(payload["residuals"]) < 1e-7
        assert report.info["omega"] == payload["omega"]

    def test_gap_seed_only_relabels(self, tmp_path):
        a = run_params("gap", {"n_s": 10, "l_j": 5, "seed": 1}, tmp_path / "a")
        b = run_params("gap", {"n_s": 10, "l_j": 5, "seed": 2}, tmp_path / "b")
        assert a.info["g_s"] != b.info["g_s"]
        assert a.info["omega"] == pytest.approx(b.info["omega"], abs=1e-9)

    def test_scaling_fit_payload(self, tmp_path):
        report = run_params("scaling", {"n_min": 8, "n_max": 11, "plot": True}, tmp_path)
        payload = json.loads((tmp_path / "scaling.json").read_text())
        assert len(payload["points"]) == 4
        assert payload["reference_slopes"] == [-0.5, -1.0]
        assert (tmp_path / "scaling.svg").exists()
        assert report.info["slope"] == payload["slope"]

    def test_wavepacket_payload(self, tmp_path):
        run_params("wavepacket", {"n_s": 12, "orders": [1, 2, 3]}, tmp_path)
        payload = json.loads((tmp_path / "wavepacket.json").read_text())
        assert payload["orders"]["3"]["energy"] <= payload["orders"]["1"]["energy"]
        header = (tmp_path / "amplitudes.csv").read_text().splitlines()[0]
        assert header == "h,a_exact,a_order1,a_order2,a_order3"

    def test_grover_check_payload(self, tmp_path):
        report = run_params("grover-check", {"n": 6, "steps": 6, "seed": 2}, tmp_path)
        rows = (tmp_path / "grover.csv").read_text().splitlines()
        assert rows[0] == "step,fidelity,success_unitary,success_hamiltonian"
        assert len(rows) == 8
        assert report.info["best_success_unitary"] >= 0.9

    def test_unknown_parameter_rejected(self, tmp_path):
        with pytest.raises(UsageError):
            run_params("toy-wave", {"n_b": 5, "bogus": 1}, tmp_path)

    def test_capacity_guard(self, tmp_path):
        with pytest.raises(CapacityError):
            run_params("toy-wave", {"n_b": 40, "t_max": 1.0}, tmp_path)

    def test_reproducible_bytes(self, tmp_path):
        params = {"n_s": 4, "n_b": 4, "samples": 30, "seed": 3}
        run_params("nonlocal", params, tmp_path / "one")
        run_params("nonlocal", params, tmp_path / "two")
        a = (tmp_path / "one" / "overlay.csv").read_bytes()
        b = (tmp_path / "two" / "overlay.csv").read_bytes()
        assert a == b


class TestPresetConfigs:
    @pytest.mark.parametrize(
        "experiment,preset",
        [
            ("toy-wave", "toy_wave.toml"),
            ("nonlocal", "nonlocal_small.toml"),
            ("local-evolve", "local_evolve.toml"),
            ("gap", "gap.toml"),
            ("scaling", "scaling.toml"),
            ("wavepacket", "wavepacket.toml"),
            ("grover-check", "grover_check.toml"),
        ],
    )
    def test_presets_parse_and_validate(self, experiment, preset):
        try:
            import tomllib
        except ModuleNotFoundError:
            import tomli as tomllib

        params = tomllib.loads((CONFIGS / preset).read_text())
        # dry validation: constructing the config must not raise
        ExperimentConfig(experiment=experiment, params=params, out_dir=Path("unused"))


class TestCli:
    def test_happy_path(self, tmp_path, capsys):
        code = main(
            [
                "grover-check",
                "--config",
                str(CONFIGS / "grover_check.toml"),
                "--set",
                "steps=4",
                "--out",
                str(tmp_path),
            ]
        )
        assert code == EXIT_OK
        assert (tmp_path / "grover.csv").exists()
        rows = (tmp_path / "grover.csv").read_text().splitlines()
        assert len(rows) == 6  # header + steps 0..4
        assert "report.json" in capsys.readouterr().out

    def test_override_parsing_types(self, tmp_path):
        code = main(
            [
                "wavepacket",
                "--config",
                str(CONFIGS / "wavepacket.toml"),
                "--set",
                "n_s=10",
                "--set",
                "orders=[1, 2]",
                "--out",
                str(tmp_path),
            ]
        )
        assert code == EXIT_OK
        payload = json.loads((tmp_path / "wavepacket.json").read_text())
        assert payload["n_s"] == 10
        assert set(payload["orders"]) == {"1", "2"}

    def test_missing_config_is_usage_error(self, tmp_path):
        code = main(
            ["gap", "--config", str(tmp_path / "nope.toml"), "--out", str(tmp_path)]
        )
        assert code == EXIT_USAGE

    def test_bad_parameter_is_usage_error(self, tmp_path):
        code = main(
            [
                "gap",
                "--config",
                str(CONFIGS / "gap.toml"),
                "--set",
                "l_j=99",
                "--out",
                str(tmp_path),
            ]
        )
        assert code == EXIT_USAGE

    def test_capacity_exit_code(self, tmp_path):
        code = main(
            [
                "toy-wave",
                "--config",
                str(CONFIGS / "toy_wave.toml"),
                "--set",
                "n_b=40",
                "--out",
                str(tmp_path),
            ]
        )
        assert code == EXIT_CAPACITY

    def test_numerical_exit_code(self, tmp_path):
        code = main(
            [
                "gap",
                "--config",
                str(CONFIGS / "gap.toml"),
                "--set",
                "n_s=10",
                "--set",
                "tolerance=1e-300",
                "--set",
                "maxiter=2",
                "--out",
                str(tmp_path),
            ]
        )
        assert code == EXIT_NUMERICAL

    def test_unknown_experiment_is_usage_error(self, capsys):
        code = main(["frobnicate", "--config", "x", "--out", "y"])
        assert code == EXIT_USAGE


class TestEmitPlot:
    def test_line_plot_from_csv(self, tmp_path):
        write_csv(tmp_path / "d.csv", ["t", "value"], [np.arange(5.0), np.arange(5.0) ** 2])
        out = emit_plot(
            tmp_path,
            {"kind": "line", "file": "d.csv", "x": "t", "y": ["value"], "out": "d.svg"},
        )
        assert out.exists()
        assert out.read_text().lstrip().startswith("<?xml")

    def test_missing_column_is_usage_error(self, tmp_path):
        write_csv(tmp_path / "d.csv", ["t", "value"], [np.arange(5.0), np.arange(5.0)])
        with pytest.raises(UsageError):
            emit_plot(
                tmp_path,
                {"kind": "line", "file": "d.csv", "x": "t", "y": ["nope"], "out": "d.svg"},
            )

    def test_missing_file_is_usage_error(self, tmp_path):
        with pytest.raises(UsageError):
            emit_plot(
                tmp_path,
                {"kind": "line", "file": "ghost.csv", "x": "t", "y": ["v"], "out": "d.svg"},
            )
