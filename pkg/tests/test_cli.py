import csv
import json
import math

import pytest

from squint.cli import main


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def write_config(tmp_path, payload, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


class TestSweep:
    def test_preset_visibility_printed(self, tmp_path, capsys):
        assert main(["sweep", "--preset", "fig3", "--out", str(tmp_path)]) == 0
        out = capsys.readouterr().out
        vis = float(out.split("visibility:")[1].strip())
        assert abs(vis - 0.966) < 2e-3
        rows = read_csv(tmp_path / "sweep.csv")
        assert len(rows) == 361
        assert set(rows[0]) == {"phi", "p00", "p01", "p10", "p11"}

    def test_ideal_default_has_unit_visibility(self, tmp_path, capsys):
        assert main(["sweep", "--out", str(tmp_path)]) == 0
        vis = float(capsys.readouterr().out.split("visibility:")[1].strip())
        assert vis == pytest.approx(1.0, abs=1e-6)

    def test_single_point_grid_rejected(self, tmp_path, capsys):
        assert main(["sweep", "--out", str(tmp_path), "--phi-steps", "1"]) == 2

    def test_json_format(self, tmp_path, capsys):
        assert main(["sweep", "--out", str(tmp_path), "--format", "json"]) == 0
        data = json.loads((tmp_path / "sweep.json").read_text())
        assert data["columns"] == ["phi", "p00", "p01", "p10", "p11"]
        assert len(data["rows"]) == 361


class TestFisher:
    def test_ideal_benchmark_printed(self, tmp_path, capsys):
        assert main(["fisher", "--out", str(tmp_path), "--phi-steps", "41"]) == 0
        out = capsys.readouterr().out
        value = float(out.split("max Fisher per photon:")[1].split("rad")[0])
        assert value == pytest.approx(11.1233, abs=0.02)
        assert "5-photon NOON baseline: 10.0000" in out

    def test_below_threshold_config(self, tmp_path, capsys):
        cfg = write_config(
            tmp_path,
            {"interferometer": {"r1": 0.59, "r2": 0.59, "eta_h": 0.05, "eta_v": 0.05}},
        )
        assert main(["fisher", "--config", cfg, "--out", str(tmp_path), "--phi-steps", "41"]) == 0
        out = capsys.readouterr().out
        value = float(out.split("max Fisher per photon:")[1].split("rad")[0])
        assert value < 2.0

    def test_fig1b_preset(self, tmp_path, capsys):
        assert main(["fisher", "--preset", "fig1b", "--out", str(tmp_path)]) == 0
        rows = read_csv(tmp_path / "fisher_fig1b.csv")
        assert len(rows) == 100
        first = rows[0]
        assert float(first["dphi_tm"]) < float(first["dphi_snl"])

    def test_fig3c_preset_increasing(self, tmp_path, capsys):
        assert main(["fisher", "--preset", "fig3c", "--out", str(tmp_path)]) == 0
        rows = read_csv(tmp_path / "fisher_fig3c.csv")
        vals = [float(r["max_fisher_per_photon"]) for r in rows]
        assert vals[0] == pytest.approx(2 * 4 + 4 * 2 * math.sinh(0.11) ** 2, rel=2e-3)
        assert all(a < b for a, b in zip(vals, vals[1:]))
        assert vals[-1] > 10.0  # exceeds the 5-NOON line at r = 0.59

    def test_double_pass_accounting(self, tmp_path, capsys):
        assert main(
            [
                "fisher", "--out", str(tmp_path), "--phi-steps", "11",
                "--accounting", "double-pass",
            ]
        ) == 0
        out = capsys.readouterr().out
        value = float(out.split("max Fisher per photon:")[1].split("rad")[0])
        assert value == pytest.approx(11.1233 / 2, abs=0.02)


class TestThresholds:
    def test_tables(self, tmp_path, capsys):
        assert main(
            [
                "thresholds", "--preset", "fig1c", "--out", str(tmp_path),
                "--nbar", "0.78", "--noon-max", "6",
            ]
        ) == 0
        tm = read_csv(tmp_path / "thresholds_tm.csv")
        assert len(tm) == 1
        closed = float(tm[0]["eta_tm"])
        numeric = float(tm[0]["eta_tm_numeric"])
        assert closed == pytest.approx(0.094382, abs=1e-5)
        assert abs(numeric - closed) < 1e-3
        noon = read_csv(tmp_path / "thresholds_noon.csv")
        assert [int(r["n_photons"]) for r in noon] == [1, 2, 3, 4, 5, 6]
        assert float(noon[4]["eta_noon"]) == pytest.approx(0.72478, abs=1e-4)

    def test_skip_numeric_column(self, tmp_path, capsys):
        assert main(
            [
                "thresholds", "--out", str(tmp_path), "--nbar", "0.5",
                "--skip-numeric", "--noon-max", "3",
            ]
        ) == 0
        tm = read_csv(tmp_path / "thresholds_tm.csv")
        assert tm[0]["eta_tm_numeric"] == "nan"


@pytest.fixture(scope="module")
def track_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("track")
    payload = {
        "interferometer": {"r1": 0.43, "r2": 0.43, "eta_h": 0.75, "eta_v": 0.75, "overlap": 0.986},
        "scenario": {
            "phase_schedule": [[0.5, 0.4], [0.8, 0.2], [1.1, 0.2]],
            "window": 0.2,
            "repetition_rate": 5e4,
            "repeats": 4,
            "seed": 9,
        },
    }
    cfg = write_config(out, payload)
    assert main(["track", "--config", cfg, "--seed", "9", "--out", str(out)]) == 0
    return out


class TestTrackAndEstimate:
    def test_track_outputs(self, track_dir):
        rows = read_csv(track_dir / "tracking.csv")
        assert len(rows) == 16
        summary = json.loads((track_dir / "tracking_summary.json").read_text())
        assert summary["schema"] == "squint-tracking/1"
        assert summary["trials_per_window"] == 10000
        sens = json.loads((track_dir / "sensitivity.json").read_text())
        assert len(sens["rows"]) == 3
        assert (track_dir / "calibration.json").exists()

    def test_estimate_round_trip(self, track_dir, tmp_path):
        summary = json.loads((track_dir / "tracking_summary.json").read_text())
        lo, hi = summary["branch"]
        assert main(
            [
                "estimate",
                "--counts", str(track_dir / "tracking.csv"),
                "--calibration", str(track_dir / "calibration.json"),
                "--branch-lo", str(lo), "--branch-hi", str(hi),
                "--out", str(tmp_path),
            ]
        ) == 0
        track_rows = read_csv(track_dir / "tracking.csv")
        est_rows = read_csv(tmp_path / "estimates.csv")
        assert len(est_rows) == len(track_rows)
        for t, e in zip(track_rows, est_rows):
            assert t["phi_est"] == e["phi_est"]

    def test_track_needs_scenario(self, tmp_path):
        cfg = write_config(tmp_path, {"interferometer": {"r1": 0.3, "r2": 0.3}})
        assert main(["track", "--config", cfg, "--out", str(tmp_path)]) == 2


class TestValidate:
    def test_quick_pass(self, tmp_path, capsys):
        code = main(
            [
                "validate", "--out", str(tmp_path), "--phi-steps", "5",
                "--budget", "1e-4", "--tol", "1e-3",
            ]
        )
        assert code == 0
        out = capsys.readouterr().out
        assert "overall max |delta p|" in out
        rows = read_csv(tmp_path / "validate.csv")
        assert len(rows) == 4

    def test_tolerance_violation_exits_3(self, tmp_path, capsys):
        code = main(
            [
                "validate", "--out", str(tmp_path), "--phi-steps", "3",
                "--budget", "1e-4", "--tol", "1e-18",
            ]
        )
        assert code == 3


class TestConfigHandling:
    def test_unknown_key_rejected(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {"interferometer": {"r1": 0.3, "r2": 0.3, "gain": 2}})
        assert main(["sweep", "--config", cfg, "--out", str(tmp_path)]) == 2

    def test_unknown_section_rejected(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {"laser": {}})
        assert main(["sweep", "--config", cfg, "--out", str(tmp_path)]) == 2

    def test_missing_file_rejected(self, tmp_path, capsys):
        assert main(["sweep", "--config", str(tmp_path / "nope.json"), "--out", str(tmp_path)]) == 2

    def test_preset_and_config_conflict(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {"interferometer": {"r1": 0.3, "r2": 0.3}})
        assert main(["sweep", "--preset", "fig3", "--config", cfg, "--out", str(tmp_path)]) == 2

    def test_invalid_parameter_rejected(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {"interferometer": {"r1": -0.3, "r2": 0.3}})
        assert main(["sweep", "--config", cfg, "--out", str(tmp_path)]) == 2

    def test_unknown_preset_rejected(self, tmp_path, capsys):
        assert main(["sweep", "--preset", "fig9", "--out", str(tmp_path)]) == 2

    def test_numerical_failure_exit_code(self, tmp_path, capsys):
        # branch wider than the half period trips the estimator's validation
        (tmp_path / "cal.json").write_text("{}")
        code = main(
            [
                "estimate", "--counts", str(tmp_path / "missing.csv"),
                "--calibration", str(tmp_path / "cal.json"),
                "--branch-lo", "0", "--branch-hi", "2.0",
                "--out", str(tmp_path),
            ]
        )
        assert code == 4
