import json

import numpy as np
import pytest

from ringpairs import detect_dips, load_spectrum, write_counts_csv
from ringpairs.cli import main
from ringpairs.fixtures import demo_coincidence_counts, reference_device_spec

SMALL_DEVICE = dict(wl_start_nm=1542.0, wl_stop_nm=1559.0, step_pm=0.2)


@pytest.fixture(scope="module")
def small_pipeline(tmp_path_factory):
    """synth -> analyze -> dispersion -> jsi on a 17-nm reference device."""
    root = tmp_path_factory.mktemp("pipeline")
    spec = reference_device_spec(**SMALL_DEVICE)
    spec_path = root / "device.json"
    spec_path.write_text(spec.to_json())
    out = root / "out"
    assert main(["synth", "--input", str(spec_path), "--output-dir", str(out)]) == 0
    assert (
        main(["analyze", "--input", str(out / "spectrum.csv"), "--output-dir", str(out)])
        == 0
    )
    assert (
        main(
            [
                "dispersion",
                "--input", str(out / "resonances.json"),
                "--output-dir", str(out),
                "--pump-nm", "1550.63",
                "--linewidth-hz", "132e6",
            ]
        )
        == 0
    )
    assert (
        main(["jsi", "--input", str(out / "dispersion.json"), "--output-dir", str(out)])
        == 0
    )
    return spec, out


class TestSynth:
    def test_planted_dips_detectable_downstream(self, tmp_path):
        spec = reference_device_spec(n_modes=94, step_pm=0.25)
        spec_path = tmp_path / "device.json"
        spec_path.write_text(spec.to_json())
        assert len(spec.resonances) == 94
        code = main(["synth", "--input", str(spec_path), "--output-dir", str(tmp_path)])
        assert code == 0
        trace = load_spectrum(tmp_path / "spectrum.csv")
        windows = detect_dips(trace, min_depth=0.2, min_separation_pm=300.0)
        assert len(windows) == 94

    def test_empty_resonance_list_gives_flat_csv(self, tmp_path):
        spec_path = tmp_path / "flat.json"
        spec_path.write_text(
            json.dumps(
                {
                    "resonances": [],
                    "baseline": 0.9,
                    "noise_sigma": 0.0,
                    "grid": [1550.0, 1551.0, 101],
                    "seed": 0,
                }
            )
        )
        assert main(["synth", "--input", str(spec_path), "--output-dir", str(tmp_path)]) == 0
        trace = load_spectrum(tmp_path / "spectrum.csv")
        assert np.all(trace.transmission == 0.9)

    def test_invalid_depth_exits_2(self, tmp_path, capsys):
        spec_path = tmp_path / "bad.json"
        spec_path.write_text(
            json.dumps(
                {
                    "resonances": [[1550.5, 1.0, 1.5]],
                    "grid": [1550.0, 1551.0, 101],
                    "seed": 0,
                }
            )
        )
        assert main(["synth", "--input", str(spec_path), "--output-dir", str(tmp_path)]) == 2
        assert "depth" in capsys.readouterr().err


class TestAnalyze:
    def test_mean_q_within_2_percent_of_planted(self, small_pipeline):
        spec, out = small_pipeline
        doc = json.loads((out / "resonances.json").read_text())
        assert len(doc["dips"]) == len(spec.resonances)
        planted_mean_q = np.mean([c * 1e3 / w for c, w, _ in spec.resonances])
        assert doc["q_summary"]["mean"] == pytest.approx(planted_mean_q, rel=0.02)
        assert (out / "transmission.svg").exists()

    def test_no_dips_gives_empty_report_exit_0(self, tmp_path):
        flat = tmp_path / "flat.csv"
        wl = np.linspace(1550.0, 1551.0, 2001)
        flat.write_text(
            "wavelength_nm,transmission\n"
            + "".join(f"{w!r},1.0\n" for w in wl.tolist())
        )
        assert main(["analyze", "--input", str(flat), "--output-dir", str(tmp_path)]) == 0
        doc = json.loads((tmp_path / "resonances.json").read_text())
        assert doc["dips"] == []

    def test_unreadable_file_exits_2(self, tmp_path):
        assert (
            main(["analyze", "--input", str(tmp_path / "nope.csv"),
                  "--output-dir", str(tmp_path)])
            == 2
        )

    def test_reference_division(self, tmp_path):
        spec = reference_device_spec(
            wl_start_nm=1550.0, wl_stop_nm=1552.0, step_pm=0.2, baseline=0.8
        )
        spec_path = tmp_path / "d.json"
        spec_path.write_text(spec.to_json())
        main(["synth", "--input", str(spec_path), "--output-dir", str(tmp_path)])
        wl = np.linspace(1550.0, 1552.0, int(round(2.0 / 0.2e-3)) + 1)
        ref = tmp_path / "ref.csv"
        ref.write_text(
            "wavelength_nm,transmission\n"
            + "".join(f"{w!r},0.8\n" for w in wl.tolist())
        )
        code = main(
            ["analyze", "--input", str(tmp_path / "spectrum.csv"),
             "--output-dir", str(tmp_path), "--reference", str(ref)]
        )
        assert code == 0
        doc = json.loads((tmp_path / "resonances.json").read_text())
        assert doc["dips"]  # dips found on the re-normalized trace


class TestDispersion:
    def test_reference_fsr_recovered(self, small_pipeline):
        _, out = small_pipeline
        doc = json.loads((out / "dispersion.json").read_text())
        assert doc["d1_hz"] == pytest.approx(145e9, rel=1e-4)
        assert doc["pump"]["mode_wavelength_nm"] == pytest.approx(1550.63, abs=0.01)
        assert doc["dint"][0]["mu"] == doc["mode_range"][0]
        assert "linewidth_crossover_mu" in doc
        assert (out / "dispersion.svg").exists()

    def test_missing_pump_flag_is_error(self, small_pipeline, tmp_path):
        _, out = small_pipeline
        with pytest.raises(SystemExit):
            main(["dispersion", "--input", str(out / "resonances.json"),
                  "--output-dir", str(tmp_path)])


class TestJsi:
    def test_report_fields_and_map(self, small_pipeline):
        _, out = small_pipeline
        doc = json.loads((out / "jsi.json").read_text())
        assert doc["modes"]
        for row in doc["modes"]:
            for key in ("mu", "c_raw", "c_normalized", "sinc_sq", "overlap",
                        "delta_phi_rad"):
                assert key in row
        peak = max(row["c_normalized"] for row in doc["modes"])
        assert peak == 1.0
        matrix = np.loadtxt(out / "jsi_map.csv", delimiter=",")
        n = len(doc["modes"])
        assert matrix.shape == (n, n)
        assert (out / "jsi_diagonal.svg").exists()
        assert (out / "jsi_map.svg").exists()


class TestReport:
    def test_reference_scenario(self, small_pipeline, tmp_path):
        # ladder spanning mu +-47 comes from the full-band device
        spec = reference_device_spec(step_pm=0.25)
        spec_path = tmp_path / "full.json"
        spec_path.write_text(spec.to_json())
        out = tmp_path / "full_out"
        assert main(["synth", "--input", str(spec_path), "--output-dir", str(out)]) == 0
        assert main(["analyze", "--input", str(out / "spectrum.csv"),
                     "--output-dir", str(out)]) == 0
        assert main(["dispersion", "--input", str(out / "resonances.json"),
                     "--output-dir", str(out), "--pump-nm", "1550.63"]) == 0
        counts_path = tmp_path / "counts.csv"
        write_counts_csv(demo_coincidence_counts(), counts_path)
        code = main(
            ["report", "--counts", str(counts_path),
             "--ladder", str(out / "dispersion.json"),
             "--output-dir", str(out),
             "--threshold-cps", "5.61", "--threshold-band-cps", "1.85",
             "--loss-facet-db", "-3.0", "--loss-filter-db", "-7.0",
             "--det-eff", "0.5"]
        )
        assert code == 0
        doc = json.loads((out / "report.json").read_text())
        assert doc["total_pairs"] == 42
        assert doc["longest_continuous_run"] == 37
        assert doc["signal_bandwidth_nm"] == pytest.approx(51.9, abs=0.3)
        assert doc["full_bandwidth_nm"] == pytest.approx(107.1, abs=0.3)
        assert doc["loss_budget"]["total_db"] == pytest.approx(-13.0, abs=0.02)
        assert doc["mean_acc_cps"] == pytest.approx(10.5, rel=1e-6)

    def test_empty_counts_exits_2(self, small_pipeline, tmp_path):
        _, out = small_pipeline
        counts_path = tmp_path / "empty.csv"
        counts_path.write_text("mu,cc_cps,ns_cps,ni_cps\n")
        code = main(
            ["report", "--counts", str(counts_path),
             "--ladder", str(out / "dispersion.json"),
             "--output-dir", str(tmp_path), "--threshold-cps", "5.61"]
        )
        assert code == 2

    def test_ladder_missing_modes_exits_3(self, small_pipeline, tmp_path):
        _, out = small_pipeline  # small ladder does not reach mu=47
        counts_path = tmp_path / "counts.csv"
        write_counts_csv(demo_coincidence_counts(), counts_path)
        code = main(
            ["report", "--counts", str(counts_path),
             "--ladder", str(out / "dispersion.json"),
             "--output-dir", str(tmp_path), "--threshold-cps", "5.61"]
        )
        assert code == 3


class TestDeterminism:
    def test_analyze_twice_byte_identical(self, small_pipeline, tmp_path):
        _, out = small_pipeline
        rerun = tmp_path / "rerun"
        assert main(["analyze", "--input", str(out / "spectrum.csv"),
                     "--output-dir", str(rerun)]) == 0
        a = (out / "resonances.json").read_bytes()
        b = (rerun / "resonances.json").read_bytes()
        assert a == b
