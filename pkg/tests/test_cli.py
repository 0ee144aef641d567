import json

import numpy as np
import pytest

from lisim import cli
from lisim.chain import Algorithm
from lisim.channel import ScenarioConfig, build_scenario
from lisim.cli import PanelProfile, SweepAxis, SweepSpec
from lisim.errors import ConfigError, NumericalDomainError

#: Desk-scale geometry: 5 small panels (P=5, Mp=16, M=80), 4 users.
TINY_SCENARIO = {
    "lis_width_m": 1.0,
    "lis_height_m": 0.2,
    "users_k": 4,
}


def tiny_cfg(**extra):
    return ScenarioConfig(**{**TINY_SCENARIO, **extra})


def tiny_spec(**overrides):
    base = dict(axis=SweepAxis.NP_PER_PANEL, values=(1, 2),
                algorithms=(Algorithm.IIC, Algorithm.RMF),
                panel_profiles=(PanelProfile.SMALL,), trials=3, seed=7,
                rho=1.0, passes=1)
    base.update(overrides)
    return SweepSpec(**base)


class TestProfiles:
    def test_geometry_constants(self):
        assert PanelProfile.SMALL.panel_side_m == 0.2
        assert PanelProfile.SMALL.antennas_per_panel == 16
        assert PanelProfile.LARGE.panel_side_m == 1.0
        assert PanelProfile.LARGE.antennas_per_panel == 400


class TestResolveValues:
    def test_np_axis_passthrough(self):
        pairs = cli._resolve_values(tiny_spec(values=(1, 4)),
                                    PanelProfile.SMALL, p_count=5, mp=16)
        assert pairs == [(1, 5), (4, 20)]

    def test_total_axis_divides_by_panel_count(self):
        spec = tiny_spec(axis=SweepAxis.TOTAL_N, values=(500,))
        pairs = cli._resolve_values(spec, PanelProfile.SMALL, 250, 16)
        assert pairs == [(2, 500)]

    def test_total_axis_rejects_indivisible(self):
        spec = tiny_spec(axis=SweepAxis.TOTAL_N, values=(501,))
        with pytest.raises(ConfigError):
            cli._resolve_values(spec, PanelProfile.SMALL, 250, 16)

    def test_np_axis_rejects_more_than_antennas(self):
        with pytest.raises(ConfigError):
            cli._resolve_values(tiny_spec(values=(17,)), PanelProfile.SMALL,
                                250, 16)

    def test_default_values_per_profile(self):
        spec = tiny_spec(values=None)
        pairs = cli._resolve_values(spec, PanelProfile.LARGE, 10, 400)
        assert [p[0] for p in pairs] == [1, 2, 4, 8, 12, 16, 20]
        spec_n = tiny_spec(values=None, axis=SweepAxis.TOTAL_N)
        pairs_n = cli._resolve_values(spec_n, PanelProfile.LARGE, 10, 400)
        assert [p[1] for p in pairs_n] == [10, 20, 40, 80, 120, 160, 200]


class TestRunTrial:
    def test_deterministic(self):
        cfg = tiny_cfg()
        scenario = build_scenario(cfg, 16)
        a = cli.run_trial(scenario, cfg, Algorithm.IIC, 2, trial_index=3)
        b = cli.run_trial(scenario, cfg, Algorithm.IIC, 2, trial_index=3)
        assert a[0].sum_rate_bits == b[0].sum_rate_bits
        np.testing.assert_array_equal(a[0].per_panel_cumulative,
                                      b[0].per_panel_cumulative)

    def test_trials_differ(self):
        cfg = tiny_cfg()
        scenario = build_scenario(cfg, 16)
        a = cli.run_trial(scenario, cfg, Algorithm.RMF, 2, trial_index=0)
        b = cli.run_trial(scenario, cfg, Algorithm.RMF, 2, trial_index=1)
        assert a[0].sum_rate_bits != b[0].sum_rate_bits

    @pytest.mark.parametrize("algorithm", [Algorithm.IIC, Algorithm.RMF])
    def test_full_width_filters_reach_capacity(self, algorithm):
        cfg = tiny_cfg()
        scenario = build_scenario(cfg, 16)
        report, _ = cli.run_trial(scenario, cfg, algorithm, 16, trial_index=0)
        assert report.sum_rate_bits == pytest.approx(
            report.channel_capacity_bits, rel=1e-6)


class TestRunSweep:
    def test_row_cardinality_and_order(self):
        rows = cli.run_sweep(tiny_spec(), tiny_cfg())
        assert len(rows) == 4  # 2 algorithms x 2 values
        assert [(r.algorithm, r.np) for r in rows] == [
            ("iic", 1), ("iic", 2), ("rmf", 1), ("rmf", 2)]
        for row in rows:
            assert row.profile == "small"
            assert row.n_total == row.np * 5
            assert row.trials == 3 and row.seed == 7

    def test_one_row_per_algorithm_and_value(self):
        spec = tiny_spec(values=tuple(range(1, 17)), trials=1)
        rows = cli.run_sweep(spec, tiny_cfg())
        for algorithm in ("iic", "rmf"):
            assert sum(r.algorithm == algorithm for r in rows) == 16

    def test_rows_respect_capacity_ceiling(self):
        rows = cli.run_sweep(tiny_spec(), tiny_cfg())
        for row in rows:
            assert row.mean_sum_rate_bits <= row.mean_channel_capacity_bits + 1e-6

    def test_chain_scalars_accounting(self):
        rows = cli.run_sweep(tiny_spec(), tiny_cfg())
        k = TINY_SCENARIO["users_k"]
        for row in rows:
            expected = (5 - 1) * k * k if row.algorithm == "iic" else 0
            assert row.chain_scalars == expected

    def test_matches_run_trial_realizations(self):
        cfg = tiny_cfg()
        spec = tiny_spec(trials=2, values=(2,), algorithms=(Algorithm.IIC,))
        rows = cli.run_sweep(spec, cfg)
        scenario = build_scenario(tiny_cfg(seed=spec.seed), 16)
        reports = [cli.run_trial(scenario, tiny_cfg(seed=spec.seed),
                                 Algorithm.IIC, 2, t)[0] for t in range(2)]
        want = np.mean([r.sum_rate_bits for r in reports])
        assert rows[0].mean_sum_rate_bits == pytest.approx(want, rel=1e-12)

    def test_single_trial_zero_std(self):
        rows = cli.run_sweep(tiny_spec(trials=1, values=(1,)), tiny_cfg())
        assert rows[0].std_sum_rate_bits == 0.0


class TestEmitCsv:
    def test_empty_rows_header_only(self, tmp_path):
        path = tmp_path / "empty.csv"
        cli.emit_csv([], path)
        assert path.read_text(encoding="utf-8") == ",".join(cli.CSV_FIELDS) + "\n"

    def test_one_row_two_lines(self, tmp_path):
        rows = cli.run_sweep(tiny_spec(trials=1, values=(1,),
                                       algorithms=(Algorithm.RMF,)), tiny_cfg())
        path = tmp_path / "one.csv"
        cli.emit_csv(rows, path)
        lines = path.read_text(encoding="utf-8").splitlines()
        assert len(lines) == 2
        assert lines[0].startswith("profile,algorithm,np,n_total,rho,trials")
        assert lines[1].startswith("small,rmf,1,5,1,1,")

    def test_rerun_byte_identical(self, tmp_path):
        paths = []
        for name in ("a.csv", "b.csv"):
            rows = cli.run_sweep(tiny_spec(), tiny_cfg())
            path = tmp_path / name
            cli.emit_csv(rows, path)
            paths.append(path)
        assert paths[0].read_bytes() == paths[1].read_bytes()


class TestConfigIngestion:
    def test_round_trip(self, tmp_path):
        path = tmp_path / "cfg.json"
        payload = dict(TINY_SCENARIO, seed=9, trials=2, axis="np",
                       values=[1, 2], algorithms="iic",
                       panel_profiles=["small"], rho=2.0)
        path.write_text(json.dumps(payload), encoding="utf-8")
        data = cli.load_config_file(path)
        cfg = cli.scenario_config_from_mapping(data)
        spec = cli.sweep_spec_from_mapping(data)
        assert cfg.users_k == 4 and cfg.seed == 9
        assert spec.trials == 2 and spec.rho == 2.0
        assert spec.algorithms == (Algorithm.IIC,)
        assert spec.panel_profiles == (PanelProfile.SMALL,)
        assert spec.values == (1, 2)

    def test_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({"users": 4}), encoding="utf-8")
        with pytest.raises(ConfigError):
            cli.load_config_file(path)

    def test_invalid_json_rejected(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text("{not json", encoding="utf-8")
        with pytest.raises(ConfigError):
            cli.load_config_file(path)

    def test_missing_file_rejected(self, tmp_path):
        with pytest.raises(ConfigError):
            cli.load_config_file(tmp_path / "missing.json")

    def test_bad_axis_rejected(self):
        with pytest.raises(ConfigError):
            cli.sweep_spec_from_mapping({"axis": "sideways"})

    def test_non_integer_values_rejected(self):
        with pytest.raises(ConfigError):
            cli.sweep_spec_from_mapping({"values": [1.5]})


class TestMain:
    def _write_config(self, tmp_path, **extra):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({**TINY_SCENARIO, **extra}),
                        encoding="utf-8")
        return path

    def test_sweep_end_to_end(self, tmp_path, capsys):
        cfg = self._write_config(tmp_path)
        out = tmp_path / "rows.csv"
        code = cli.main(["sweep", "--config", str(cfg), "--trials", "2",
                         "--values", "1,2", "--profiles", "small",
                         "--algos", "iic,rmf", "--seed", "3",
                         "--out", str(out)])
        assert code == 0
        lines = out.read_text(encoding="utf-8").splitlines()
        assert len(lines) == 5  # header + 2 algos x 2 values
        assert "wrote 4 rows" in capsys.readouterr().out

    def test_trial_prints_key_value_report(self, tmp_path, capsys):
        cfg = self._write_config(tmp_path)
        code = cli.main(["trial", "--config", str(cfg), "--algo", "iic",
                         "--np", "2", "--seed", "5"])
        assert code == 0
        report = dict(line.split("=", 1)
                      for line in capsys.readouterr().out.splitlines())
        assert report["profile"] == "small"
        assert report["algorithm"] == "iic"
        assert report["np"] == "2"
        assert float(report["sum_rate_bits"]) > 0
        assert (float(report["sum_rate_bits"])
                <= float(report["channel_capacity_bits"]) + 1e-6)
        assert report["chain_complex_scalars"] == str(4 * 16)

    def test_bad_config_exits_2(self, tmp_path, capsys):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({"panel_side_m": 0.3}), encoding="utf-8")
        out = tmp_path / "rows.csv"
        code = cli.main(["sweep", "--config", str(path), "--out", str(out)])
        assert code == 2
        assert "config error" in capsys.readouterr().err

    def test_unwritable_output_exits_4(self, tmp_path):
        cfg = self._write_config(tmp_path)
        out = tmp_path / "no" / "such" / "dir" / "rows.csv"
        code = cli.main(["sweep", "--config", str(cfg), "--trials", "1",
                         "--values", "1", "--profiles", "small",
                         "--algos", "rmf", "--out", str(out)])
        assert code == 4

    def test_numerical_error_exits_3(self, tmp_path, monkeypatch):
        cfg = self._write_config(tmp_path)

        def boom(*args, **kwargs):
            raise NumericalDomainError("synthetic failure")

        monkeypatch.setattr(cli, "run_sweep", boom)
        code = cli.main(["sweep", "--config", str(cfg), "--out",
                         str(tmp_path / "rows.csv")])
        assert code == 3

    def test_trial_rejects_oversized_np(self, tmp_path):
        cfg = self._write_config(tmp_path)
        code = cli.main(["trial", "--config", str(cfg), "--algo", "iic",
                         "--np", "17"])
        assert code == 2

    def test_missing_required_flag_exits_2(self):
        with pytest.raises(SystemExit) as exc:
            cli.main(["sweep"])
        assert exc.value.code == 2
