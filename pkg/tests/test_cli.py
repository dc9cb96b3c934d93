import json
import textwrap

import numpy as np
import pytest

from jtcqed.cli import main
from jtcqed.presets import PRESETS


def write_config(path, body):
    path.write_text(textwrap.dedent(body))
    return str(path)


EIGENSCAN_CONFIG = """
    [run]
    task = eigenscan

    [model]
    k = 0.0707106781186547
    delta_grid = -0.5:0.5:11
    fock_dims = 2, 2

    [output]
    path = {out}
"""


class TestPresetListing:
    def test_inventory_size(self, capsys):
        assert main(["presets"]) == 0
        out = capsys.readouterr().out.strip().splitlines()
        assert len(out) == 9

    def test_known_rows(self, capsys):
        main(["presets"])
        out = capsys.readouterr().out
        fig2a = next(line for line in out.splitlines() if line.startswith("fig2a"))
        assert "0.05/sqrt(2)" in fig2a
        assert "{0, 0.5}" in fig2a
        fig3b = next(line for line in out.splitlines() if line.startswith("fig3b"))
        assert "0.5/sqrt(2)" in fig3b

    def test_preset_names(self):
        assert sorted(PRESETS) == [
            "fig1a", "fig1b", "fig2a", "fig2b", "fig3a",
            "fig3b", "fig4a", "fig4b", "fig4c",
        ]


class TestEigenscanRun:
    def test_writes_csv_and_manifest(self, tmp_path, capsys):
        out = tmp_path / "scan.csv"
        cfg = write_config(tmp_path / "run.ini", EIGENSCAN_CONFIG.format(out=out))
        assert main(["run", cfg]) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "delta,E1,E2,E3,E4,E5"
        assert len(lines) == 12
        manifest = json.loads((tmp_path / "scan.manifest.json").read_text())
        assert manifest["config"]["task"] == "eigenscan"
        assert manifest["notes"]["grid_points"] == 11
        assert "library_version" in manifest

    def test_byte_identical_reruns(self, tmp_path):
        out = tmp_path / "scan.csv"
        cfg = write_config(tmp_path / "run.ini", EIGENSCAN_CONFIG.format(out=out))
        main(["run", cfg])
        first = out.read_bytes()
        main(["run", cfg])
        assert out.read_bytes() == first

    def test_parallel_matches_serial(self, tmp_path, monkeypatch):
        out = tmp_path / "scan.csv"
        cfg = write_config(tmp_path / "run.ini", EIGENSCAN_CONFIG.format(out=out))
        main(["run", cfg])
        serial = out.read_bytes()
        monkeypatch.setenv("JTCQED_WORKERS", "2")
        main(["run", cfg])
        assert out.read_bytes() == serial

    def test_rows_sorted_by_delta(self, tmp_path):
        out = tmp_path / "scan.csv"
        cfg = write_config(
            tmp_path / "run.ini",
            """
            [run]
            task = eigenscan

            [model]
            k = 0.1
            delta_grid = 0.4, -0.4, 0.0
            fock_dims = 2, 2

            [output]
            path = {out}
            """.format(out=out),
        )
        assert main(["run", cfg]) == 0
        deltas = [float(line.split(",")[0]) for line in out.read_text().splitlines()[1:]]
        assert deltas == sorted(deltas)


class TestConfigErrors:
    def test_missing_grid_is_usage_error(self, tmp_path, capsys):
        cfg = write_config(
            tmp_path / "bad.ini",
            """
            [run]
            task = eigenscan

            [model]
            k = 0.1
            fock_dims = 2, 2

            [output]
            path = out.csv
            """,
        )
        assert main(["run", cfg]) == 2
        report = json.loads(capsys.readouterr().err)
        assert report["error"] == "config"
        assert not (tmp_path / "out.csv").exists()

    def test_empty_grid_is_usage_error(self, tmp_path, capsys):
        cfg = write_config(
            tmp_path / "bad.ini",
            """
            [run]
            task = eigenscan

            [model]
            k = 0.1
            delta_grid = 0:1:0
            fock_dims = 2, 2

            [output]
            path = out.csv
            """,
        )
        assert main(["run", cfg]) == 2

    def test_unknown_key_rejected(self, tmp_path):
        cfg = write_config(
            tmp_path / "bad.ini",
            """
            [run]
            task = eigenscan

            [model]
            k = 0.1
            delta_grid = -1:1:5
            fock_dims = 2, 2
            frobnicate = yes

            [output]
            path = out.csv
            """,
        )
        assert main(["run", cfg]) == 2

    def test_grid_and_scalar_mutually_exclusive(self, tmp_path):
        cfg = write_config(
            tmp_path / "bad.ini",
            """
            [run]
            task = eigenscan

            [model]
            k = 0.1
            delta = 0.0
            delta_grid = -1:1:5
            fock_dims = 2, 2

            [output]
            path = out.csv
            """,
        )
        assert main(["run", cfg]) == 2

    def test_missing_file(self, capsys):
        assert main(["run", "/nonexistent/config.ini"]) == 2

    def test_unknown_preset(self, capsys):
        assert main(["preset", "fig9z"]) == 2


class TestTaskRuns:
    def test_imbalance_run(self, tmp_path):
        out = tmp_path / "imb.csv"
        cfg = write_config(
            tmp_path / "run.ini",
            f"""
            [run]
            task = imbalance

            [model]
            k = 0.1
            delta = 0.2
            fock_dims = 2, 2

            [numerics]
            times = 0:20:6
            initial_state = 1,0,e

            [output]
            path = {out}
            """,
        )
        assert main(["run", cfg]) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "t,n1,n2,z"
        first = [float(v) for v in lines[1].split(",")]
        assert first[1] == pytest.approx(1.0, abs=1e-8)
        assert first[3] == pytest.approx(1.0, abs=1e-8)
        manifest = json.loads((tmp_path / "imb.manifest.json").read_text())
        assert "z_long_mean" in manifest["notes"]

    def test_imbalance_missing_values_are_empty_fields(self, tmp_path):
        out = tmp_path / "imb.csv"
        cfg = write_config(
            tmp_path / "run.ini",
            f"""
            [run]
            task = imbalance

            [model]
            k = 0.0
            delta = 0.0
            fock_dims = 2, 2

            [dissipation]
            kappa1 = 0.05
            kappa2 = 0.05
            gamma = 0.0
            gamma_phi = 0.0
            n_th = 0.0

            [numerics]
            times = 0:10:3
            initial_state = 0,0,g

            [output]
            path = {out}
            """,
        )
        assert main(["run", cfg]) == 0
        lines = out.read_text().splitlines()
        assert lines[1].endswith(",")  # z column empty, not zero

    def test_g2_run(self, tmp_path):
        out = tmp_path / "g2.csv"
        cfg = write_config(
            tmp_path / "run.ini",
            f"""
            [run]
            task = g2

            [model]
            k = 0.1
            delta = 0.2
            fock_dims = 2, 2

            [numerics]
            times = 0:50:11
            initial_state = 1,0,e

            [output]
            path = {out}
            """,
        )
        assert main(["run", cfg]) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "tau,g2_resonator,g2_qubit"
        first = [v for v in lines[1].split(",")]
        assert float(first[1]) == pytest.approx(0.0, abs=1e-10)
        manifest = json.loads((tmp_path / "g2.manifest.json").read_text())
        assert manifest["notes"]["t_star"] == 0.0
        assert manifest["notes"]["reference_policy"] == "initial_state"

    def test_g2_undefined_coherence_is_numerical_error(self, tmp_path, capsys):
        cfg = write_config(
            tmp_path / "run.ini",
            f"""
            [run]
            task = g2

            [model]
            k = 0.0
            delta = 0.0
            fock_dims = 2, 2

            [dissipation]
            kappa1 = 0.01
            kappa2 = 0.01
            gamma = 0.01
            gamma_phi = 0.0
            n_th = 0.0

            [numerics]
            times = 0:10:3
            initial_state = 0,0,g

            [output]
            path = {tmp_path / "g2.csv"}
            """,
        )
        assert main(["run", cfg]) == 3
        report = json.loads(capsys.readouterr().err)
        assert report["error"] == "UndefinedCoherenceError"

    def test_spectrum_run(self, tmp_path):
        out = tmp_path / "spec.csv"
        cfg = write_config(
            tmp_path / "run.ini",
            f"""
            [run]
            task = spectrum

            [model]
            k = 0.05
            delta = 0.0
            fock_dims = 3, 3

            [dissipation]
            kappa1 = 0.05
            kappa2 = 0.05
            gamma = 0.05
            gamma_phi = 0.01
            n_th = 0.15

            [numerics]
            tau_max = 1000
            n_samples = 2048

            [output]
            path = {out}
            """,
        )
        assert main(["run", cfg]) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "omega,power"
        assert len(lines) == 2049
        manifest = json.loads((tmp_path / "spec.manifest.json").read_text())
        assert manifest["notes"]["peaks"]
        omegas = np.array([float(line.split(",")[0]) for line in lines[1:]])
        assert np.all(np.diff(omegas) > 0)

    def test_preset_fig1a(self, tmp_path, capsys):
        assert main(["preset", "fig1a", "--out", str(tmp_path)]) == 0
        csv = tmp_path / "fig1a.csv"
        assert csv.exists()
        lines = csv.read_text().splitlines()
        assert lines[0] == "delta,E1,E2,E3,E4,E5"
        assert len(lines) == 202
        manifest = json.loads((tmp_path / "fig1a.manifest.json").read_text())
        assert manifest["config"]["model"]["fock_dims"] == [2, 2]
