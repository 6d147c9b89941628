import copy
import json
import os

import pytest

from andersonlab.cli import main as cli_main
from andersonlab.ensemble import (
    EnsembleReport,
    _atomic_write,
    aggregate,
    parse_config,
    run_experiment,
    validate_config,
)
from andersonlab.errors import ConfigError

MINIMAL_LIFSHITZ = {
    "kind": "lifshitz",
    "seed": 7,
    "trials": 12,
    "hamiltonian": {"n": 1, "d": 1, "field": {"base": "uniform", "a": 1.0}},
    "params": {"L_values": [4, 8], "C": 1.0},
}


def lifshitz_raw(**overrides):
    raw = copy.deepcopy(MINIMAL_LIFSHITZ)
    raw.update(overrides)
    return raw


class TestConfigValidation:
    def test_minimal_config_parses(self):
        cfg = parse_config(lifshitz_raw())
        assert cfg.kind == "lifshitz"
        assert cfg.trials == 12
        assert cfg.field_spec.d == 1

    def test_unknown_key_rejected(self):
        raw = lifshitz_raw()
        raw["gamma_override"] = 1.0
        with pytest.raises(ConfigError, match="unknown key 'gamma_override'"):
            parse_config(raw)

    def test_unknown_param_rejected(self):
        raw = lifshitz_raw()
        raw["params"]["bogus"] = 3
        with pytest.raises(ConfigError, match="bogus"):
            parse_config(raw)

    def test_zero_trials_rejected(self):
        with pytest.raises(ConfigError, match="trials"):
            parse_config(lifshitz_raw(trials=0))

    def test_bad_alpha_rejected(self):
        raw = {
            "kind": "msa-initial",
            "trials": 5,
            "hamiltonian": {"n": 1, "d": 1},
            "msa": {"N": 1, "p": 1.0, "L0_values": [8], "alpha": 0.9},
        }
        with pytest.raises(ConfigError, match="alpha > 1 required"):
            parse_config(raw)

    def test_all_problems_collected(self):
        raw = lifshitz_raw(trials=0)
        raw["unknown_top"] = 1
        raw["params"]["bogus"] = 2
        with pytest.raises(ConfigError) as err:
            parse_config(raw)
        assert len(err.value.problems) >= 3

    def test_validate_config_file(self, tmp_path):
        path = tmp_path / "cfg.toml"
        path.write_text(
            'kind = "lifshitz"\nseed = 1\ntrials = 5\n'
            "[hamiltonian]\nn = 1\nd = 1\n"
            "[params]\nL_values = [4]\n"
        )
        cfg = validate_config(path)
        assert cfg.trials == 5

    def test_msa_table_only_for_msa_kind(self):
        raw = lifshitz_raw()
        raw["msa"] = {"N": 1, "p": 1.0, "L0_values": [8]}
        with pytest.raises(ConfigError, match="only applies"):
            parse_config(raw)


class TestDeterminism:
    def test_records_identical_across_worker_counts(self):
        cfg1 = parse_config(lifshitz_raw(workers=1))
        cfg3 = parse_config(lifshitz_raw(workers=3))
        rep1 = run_experiment(cfg1)
        rep3 = run_experiment(cfg3)
        assert rep1.csv_text() == rep3.csv_text()
        assert rep1.scales_csv_text() == rep3.scales_csv_text()

    def test_reruns_identical(self):
        cfg = parse_config(lifshitz_raw())
        assert run_experiment(cfg).csv_text() == run_experiment(cfg).csv_text()

    def test_seed_changes_records(self):
        a = run_experiment(parse_config(lifshitz_raw(seed=7))).csv_text()
        b = run_experiment(parse_config(lifshitz_raw(seed=8))).csv_text()
        assert a != b


class TestAggregation:
    def test_recomputable_and_order_independent(self):
        cfg = parse_config(lifshitz_raw())
        report = run_experiment(cfg)
        again = aggregate(cfg.kind, report.records, cfg)
        assert again == report.aggregates
        shuffled = list(reversed(report.records))
        assert aggregate(cfg.kind, shuffled, cfg) == report.aggregates

    def test_merge_associativity(self):
        cfg = parse_config(lifshitz_raw())
        records = run_experiment(cfg).records
        third = len(records) // 3
        merged_a = records[:third] + records[third:]
        merged_b = records[2 * third :] + records[: 2 * third]
        assert aggregate(cfg.kind, merged_a, cfg) == aggregate(cfg.kind, merged_b, cfg)


class TestOutputs:
    def test_atomic_write_content(self, tmp_path):
        path = tmp_path / "x.csv"
        _atomic_write(str(path), "hello\n")
        assert path.read_text() == "hello\n"
        assert not [p for p in os.listdir(tmp_path) if p.endswith(".part")]

    def test_interrupted_write_leaves_no_final_file(self, tmp_path, monkeypatch):
        target = tmp_path / "y.csv"

        def boom(src, dst):
            raise OSError("interrupted")

        monkeypatch.setattr(os, "replace", boom)
        with pytest.raises(OSError):
            _atomic_write(str(target), "partial")
        assert not target.exists()
        assert not [p for p in os.listdir(tmp_path) if p.endswith(".part")]

    def test_report_files(self, tmp_path):
        cfg = parse_config(lifshitz_raw(out=str(tmp_path)))
        report = run_experiment(cfg)
        paths = report.write(cfg.out, basename="demo")
        names = {os.path.basename(p) for p in paths}
        assert names == {"demo.csv", "demo-scales.csv", "demo.json"}
        payload = json.loads((tmp_path / "demo.json").read_text())
        assert payload["schema_version"] == 1
        assert payload["kind"] == "lifshitz"
        first = (tmp_path / "demo.csv").read_text().splitlines()[0]
        assert first.startswith("# andersonlab-csv v1 lifshitz")


class TestMsaInitialRun:
    def test_emits_target_column(self):
        raw = {
            "kind": "msa-initial",
            "seed": 3,
            "trials": 4,
            "hamiltonian": {"n": 2, "d": 1, "field": {"base": "uniform", "a": 1.0}},
            "msa": {"N": 2, "p": 0.5, "L0_values": [16], "grid_points": 200},
        }
        report = run_experiment(parse_config(raw))
        row = report.aggregates["scales"][0]
        assert row["target"] == pytest.approx(16.0 ** (-2 * 0.5 * 4.0**0))
        text = report.scales_csv_text()
        header = text.splitlines()[1].split(",")
        assert header == [
            "n",
            "L",
            "trials",
            "singular_count",
            "estimate",
            "ci_low",
            "ci_high",
            "shortcut_rate",
            "target",
        ]


class TestOtherKindsSmoke:
    def test_ct_check(self):
        raw = {
            "kind": "ct-check",
            "seed": 5,
            "trials": 6,
            "hamiltonian": {"n": 1, "d": 1, "field": {"base": "uniform", "a": 2.0}},
            "params": {"sizes": [[1, 1, 4], [2, 1, 2]]},
        }
        report = run_experiment(parse_config(raw))
        assert len(report.records) == 6
        assert report.aggregates["max_ratio"] <= 1.0 + 1e-12

    def test_spectral_edge(self):
        raw = {
            "kind": "spectral-edge",
            "seed": 5,
            "trials": 5,
            "hamiltonian": {"n": 1, "d": 1, "field": {"base": "uniform", "a": 1.0}},
            "params": {"L_values": [4]},
        }
        report = run_experiment(parse_config(raw))
        assert report.aggregates["scales"][0]["min_e0"] > 0

    def test_large_deviation(self):
        raw = {
            "kind": "large-deviation",
            "seed": 5,
            "trials": 4000,
            "hamiltonian": {"n": 1, "d": 1, "field": {"base": "uniform", "a": 1.0}},
            "params": {"E": 0.3, "beta": 0.6, "c": 3.0},
        }
        report = run_experiment(parse_config(raw))
        assert 0.0 <= report.aggregates["estimate"] <= 0.2

    def test_eigen_decay(self):
        raw = {
            "kind": "eigen-decay",
            "seed": 5,
            "trials": 3,
            "hamiltonian": {"n": 1, "d": 1, "field": {"base": "uniform", "a": 5.0}},
            "params": {"L": 10, "window_width": 0.2},
        }
        report = run_experiment(parse_config(raw))
        assert report.aggregates["pairs"] >= 1
        assert report.aggregates["median_rate"] > 0

    def test_dynloc(self):
        raw = {
            "kind": "dynloc",
            "seed": 5,
            "trials": 2,
            "hamiltonian": {"n": 1, "d": 1, "field": {"base": "uniform", "a": 2.0}},
            "params": {"L": 6, "s": 1.0, "K_radius": 1, "times": [0.0, 1.0, 10.0]},
        }
        report = run_experiment(parse_config(raw))
        assert report.aggregates["sup_moment"] <= report.aggregates["max_bound"] + 1e-10

    def test_field_certify(self):
        raw = {
            "kind": "field-certify",
            "seed": 5,
            "trials": 2000,
            "hamiltonian": {
                "n": 1,
                "d": 1,
                "field": {
                    "base": "uniform",
                    "a": 1.0,
                    "kernel": [
                        {"offset": [0], "weight": 1.0},
                        {"offset": [1], "weight": 0.5},
                    ],
                },
            },
            "params": {"mixing_distances": [1, 3], "eps_values": [0.02]},
        }
        report = run_experiment(parse_config(raw))
        probes = {(r["probe"], r["param"]) for r in report.records}
        assert ("mixing", 1.0) in probes and ("continuity", 0.02) in probes


class TestCli:
    def write_config(self, tmp_path, text):
        path = tmp_path / "cfg.toml"
        path.write_text(text)
        return str(path)

    def test_validate_ok(self, tmp_path, capsys):
        path = self.write_config(
            tmp_path,
            'kind = "lifshitz"\ntrials = 3\n[hamiltonian]\nn = 1\nd = 1\n'
            "[params]\nL_values = [4]\n",
        )
        assert cli_main(["validate", "--config", path]) == 0
        assert "config ok" in capsys.readouterr().out

    def test_validate_bad_exit_2(self, tmp_path, capsys):
        path = self.write_config(tmp_path, 'kind = "lifshitz"\ntrials = 0\n')
        assert cli_main(["validate", "--config", path]) == 2
        assert "config error" in capsys.readouterr().err

    def test_missing_file_exit_2(self):
        assert cli_main(["validate", "--config", "/nonexistent.toml"]) == 2

    def test_kind_mismatch_exit_2(self, tmp_path, capsys):
        path = self.write_config(
            tmp_path,
            'kind = "lifshitz"\ntrials = 3\n[hamiltonian]\nn = 1\nd = 1\n'
            "[params]\nL_values = [4]\n",
        )
        assert cli_main(["spectral-edge", "--config", path]) == 2

    def test_run_writes_outputs(self, tmp_path, capsys):
        path = self.write_config(
            tmp_path,
            'kind = "lifshitz"\ntrials = 4\n[hamiltonian]\nn = 1\nd = 1\n'
            "[params]\nL_values = [4]\n",
        )
        out = tmp_path / "results"
        code = cli_main(
            ["lifshitz", "--config", path, "--out", str(out), "--seed", "11"]
        )
        assert code == 0
        files = os.listdir(out)
        assert any(f.endswith(".csv") for f in files)
        assert any(f.endswith(".json") for f in files)

    def test_estar_override_flows_through(self, tmp_path):
        path = self.write_config(
            tmp_path,
            'kind = "msa-initial"\ntrials = 2\n'
            "[hamiltonian]\nn = 1\nd = 1\n"
            '[hamiltonian.field]\nbase = "constant"\nvalue = 3000.0\n'
            "[msa]\nN = 1\np = 1.0\nL0_values = [8]\ngrid_points = 100\n",
        )
        out = tmp_path / "res"
        code = cli_main(
            [
                "msa-initial",
                "--config",
                path,
                "--out",
                str(out),
                "--estar-override",
                "5.0",
                "--quiet",
            ]
        )
        assert code == 0
        json_file = next(f for f in os.listdir(out) if f.endswith(".json"))
        payload = json.loads((out / json_file).read_text())
        assert payload["config"]["msa"]["estar_override"] == 5.0
        assert payload["aggregates"]["scales"][0]["shortcut_rate"] == 1.0
