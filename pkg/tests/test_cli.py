import csv
import json

import numpy as np
import pytest

from specshift.cli import (
    CampaignConfig,
    emit_shift_samples,
    main,
    run_campaign,
    run_diagnose,
)
from specshift.report import CSV_COLUMNS


class TestConfig:
    def test_zero_trials_rejected(self):
        cfg = CampaignConfig(trials=0)
        with pytest.raises(ValueError):
            cfg.validate()

    def test_unknown_kind_rejected(self):
        cfg = CampaignConfig(kind="bogus")
        with pytest.raises(ValueError):
            cfg.validate()

    def test_nonpositive_tolerance_rejected(self):
        cfg = CampaignConfig()
        cfg.tolerances.trace_formula = 0.0
        with pytest.raises(ValueError):
            cfg.validate()

    def test_flags_override_file(self, tmp_path):
        cfg_file = tmp_path / "cfg.json"
        cfg_file.write_text(json.dumps({"kind": "mult", "trials": 3, "seed": 9}))
        import argparse

        args = argparse.Namespace(config=str(cfg_file), kind=None, seed=11, trials=None,
                                  grid=None, out=None, workers=None, dims=None,
                                  degrees=None, zero_direction=False)
        cfg = CampaignConfig.from_sources(args)
        assert cfg.kind == "mult" and cfg.trials == 3 and cfg.seed == 11

    def test_unknown_config_key_rejected(self, tmp_path):
        cfg_file = tmp_path / "cfg.json"
        cfg_file.write_text(json.dumps({"bogus": 1}))
        import argparse

        args = argparse.Namespace(config=str(cfg_file))
        with pytest.raises(ValueError):
            CampaignConfig.from_sources(args)


class TestExitCodes:
    def test_invalid_config_exits_two(self, tmp_path):
        code = main(["verify", "--kind", "linear", "--trials", "0",
                     "--out", str(tmp_path / "o")])
        assert code == 2

    def test_passing_campaign_exits_zero(self, tmp_path):
        code = main(["verify", "--kind", "linear", "--trials", "3",
                     "--seed", "4", "--out", str(tmp_path / "o")])
        assert code == 0

    def test_failing_campaign_exits_one(self, tmp_path):
        cfg_file = tmp_path / "cfg.json"
        cfg_file.write_text(json.dumps({
            "kind": "linear", "trials": 3, "seed": 4,
            "tolerances": {"trace_formula": 1e-30},
            "out": str(tmp_path / "o"),
        }))
        code = main(["verify", "--config", str(cfg_file)])
        assert code == 1

    def test_report_missing_directory(self, tmp_path):
        code = main(["report", "--out", str(tmp_path / "nothing")])
        assert code == 2


class TestCampaigns:
    def test_zero_direction_fixture_all_residuals_zero(self, tmp_path):
        cfg = CampaignConfig(kind="linear", trials=5, seed=3,
                             out=str(tmp_path / "o"), zero_direction=True)
        status, reports = run_campaign(cfg)
        assert status == 0
        assert all(r.residual <= 1e-14 for r in reports)

    def test_same_seed_byte_identical_csv(self, tmp_path):
        for sub in ("a", "b"):
            cfg = CampaignConfig(kind="mult", trials=4, seed=77, out=str(tmp_path / sub))
            run_campaign(cfg)
        a = (tmp_path / "a" / "summary.csv").read_bytes()
        b = (tmp_path / "b" / "summary.csv").read_bytes()
        assert a == b

    def test_csv_schema(self, tmp_path):
        cfg = CampaignConfig(kind="dilation", trials=3, seed=5, out=str(tmp_path / "o"))
        run_campaign(cfg)
        with open(tmp_path / "o" / "summary.csv", newline="") as fh:
            rows = list(csv.reader(fh))
        assert tuple(rows[0]) == CSV_COLUMNS
        assert len(rows) == 4
        assert all(row[-1] in ("pass", "fail") for row in rows[1:])

    def test_reports_json_written(self, tmp_path):
        cfg = CampaignConfig(kind="truncate", trials=2, seed=6, out=str(tmp_path / "o"))
        run_campaign(cfg)
        entries = json.loads((tmp_path / "o" / "reports.json").read_text())
        assert len(entries) == 2
        assert {"kind", "lhs", "rhs", "residual", "verdict", "runtime"} <= set(entries[0])

    @pytest.mark.parametrize("kind", ["cayley_sa", "cayley_diss"])
    def test_transform_campaigns(self, kind, tmp_path):
        cfg = CampaignConfig(kind=kind, trials=2, seed=8, grid=512,
                             dims=[2, 3], out=str(tmp_path / "o"))
        status, reports = run_campaign(cfg)
        assert status == 0 and all(r.passed for r in reports)


class TestEmission:
    def test_row_count_contract(self, tmp_path):
        cfg = CampaignConfig(kind="linear", seed=1, grid=512, out=str(tmp_path / "o"))
        path = emit_shift_samples(cfg)
        lines = path.read_text().strip().split("\n")
        assert lines[0] == "t,re_eta,im_eta"
        assert len(lines) == 513  # header + grid rows

    def test_endpoints_present_and_zero(self, tmp_path):
        cfg = CampaignConfig(kind="linear", seed=2, grid=512, out=str(tmp_path / "o"))
        path = emit_shift_samples(cfg)
        rows = path.read_text().strip().split("\n")[1:]
        first = [float(x) for x in rows[0].split(",")]
        last = [float(x) for x in rows[-1].split(",")]
        assert first[0] == 0.0
        assert last[0] == pytest.approx(2 * np.pi)
        assert abs(complex(first[1], first[2])) < 1e-8
        assert abs(complex(last[1], last[2])) < 1e-8

    def test_zero_direction_all_zero_columns(self, tmp_path):
        cfg = CampaignConfig(kind="mult", seed=3, grid=512,
                             out=str(tmp_path / "o"), zero_direction=True)
        path = emit_shift_samples(cfg)
        data = np.loadtxt(path, delimiter=",", skiprows=1)
        assert np.abs(data[:, 1:]).max() == 0.0

    @pytest.mark.parametrize("kind", ["cayley_sa", "cayley_diss"])
    def test_xi_emission(self, kind, tmp_path):
        cfg = CampaignConfig(kind=kind, seed=4, grid=512,
                             dims=[2], out=str(tmp_path / "o"))
        path = emit_shift_samples(cfg)
        lines = path.read_text().strip().split("\n")
        assert lines[0] == "lambda,re_xi,im_xi"
        assert len(lines) == 513


class TestDiagnose:
    def test_table_written_one_row_per_rank(self, tmp_path):
        cfg = CampaignConfig(kind="truncate", seed=5, dims=[6], out=str(tmp_path / "o"))
        table = run_diagnose(cfg)
        lines = table.read_text().strip().split("\n")
        header = lines[0].split(",")
        assert header[0] == "rank" and header[-1] == "gap"
        ranks = [float(line.split(",")[0]) for line in lines[1:]]
        assert ranks == sorted(ranks)
        assert ranks[-1] == 6.0


class TestReportCommand:
    def test_aggregates_and_round_trips(self, tmp_path, capsys):
        out = tmp_path / "o"
        cfg = CampaignConfig(kind="linear", trials=4, seed=12, out=str(out))
        run_campaign(cfg)
        code = main(["report", "--out", str(out)])
        assert code == 0
        printed = capsys.readouterr().out
        assert "linear" in printed
        summary = json.loads((out / "summary.json").read_text())
        assert summary["kinds"]["linear"]["failed"] == 0
