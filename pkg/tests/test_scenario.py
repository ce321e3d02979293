"""Scenario parsing, run outputs, and CLI behavior."""

import subprocess
import sys
from dataclasses import replace

import numpy as np
import pytest

from se3shell.cli import main as cli_main
from se3shell.outputs import run_scenario
from se3shell.scenario import (
    ScenarioError,
    bundled_dir,
    list_bundled,
    load_bundled,
    parse_scenario,
    with_overrides,
)

EXPECTED_BENCHMARKS = {
    "end_shear", "rollup_2pi", "rollup_4pi", "rollup_6pi",
    "drilling_2pi", "drilling_4pi", "torsion_pi", "torsion_2pi", "torsion_3pi",
    "arch_tangent", "arch_transverse", "arch_rollup",
    "magnetic_cantilever_lh41", "magnetic_cantilever_lh20p5",
    "magnetic_cantilever_lh17p5", "magnetic_cantilever_lh10",
    "magnetic_plate_A", "magnetic_plate_B", "antiparallel",
}


class TestParsing:
    def test_rollup_values(self):
        cfg = load_bundled("rollup_2pi")
        assert cfg.material.e == 12e6
        assert cfg.length == 10.0
        assert cfg.width == 1.0
        assert cfg.material.h == 0.1
        assert cfg.nx == 150 and cfg.ny == 1
        assert cfg.loads[0].kind == "end_moment"
        assert cfg.loads[0].magnitude == pytest.approx(2 * np.pi * 12e6 * (0.1**3 / 12) / 10)

    def test_arch_values(self):
        cfg = load_bundled("arch_tangent")
        assert cfg.geometry_kind == "arch"
        assert cfg.radius == 0.5
        assert cfg.material.e == 7.2e10

    def test_lame_conversion(self):
        cfg = load_bundled("magnetic_cantilever_lh41")
        assert cfg.material.e == pytest.approx(303e3 * (3 * 7.3e6 + 2 * 303e3) / (7.3e6 + 303e3))
        assert cfg.material.nu == pytest.approx(7.3e6 / (2 * (7.3e6 + 303e3)))
        assert cfg.magnetic.b_r[0] == pytest.approx(0.143)
        assert cfg.magnetic.b_a[2] == pytest.approx(0.05)

    def test_missing_key_names_it(self, tmp_path):
        bad = tmp_path / "bad.cfg"
        bad.write_text("[geometry]\nkind = flat\nlength = 1\nwidth = 1\n"
                       "[material]\nnu = 0.3\nh = 0.1\n[mesh]\nnx = 2\n")
        with pytest.raises(ScenarioError, match="'e'"):
            parse_scenario(bad)

    def test_unknown_key_rejected(self, tmp_path):
        bad = tmp_path / "bad.cfg"
        bad.write_text("[geometry]\nkind = flat\nlength = 1\nwidth = 1\nbogus = 2\n")
        with pytest.raises(ScenarioError, match="bogus"):
            parse_scenario(bad)

    def test_inconsistent_magnetic_rotation(self, tmp_path):
        bad = tmp_path / "bad.cfg"
        bad.write_text(
            "[geometry]\nkind = flat\nlength = 1\nwidth = 1\n"
            "[material]\ne = 1e6\nnu = 0.0\nh = 0.01\n[mesh]\nnx = 2\nny = 1\n"
            "[magnetic]\nb_r = 0.1 0 0\nb_a = -0.05 0 0\nb_a_start = 0 0 0.08\n")
        with pytest.raises(ScenarioError, match="magnitude"):
            parse_scenario(bad)

    def test_all_benchmarks_bundled(self):
        names = set(list_bundled())
        assert EXPECTED_BENCHMARKS <= names

    def test_per_volume_thickness_scaling(self):
        from se3shell.scenario import build_model

        cfg = load_bundled("magnetic_cantilever_lh41")
        model = build_model(cfg)
        assert model.mesh.b_r[0, 0] == pytest.approx(0.143 * cfg.material.h)


@pytest.fixture(scope="module")
def small_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("run")
    cfg = with_overrides(load_bundled("end_shear"), steps=4)
    cfg = replace(cfg, nx=6)
    report, model = run_scenario(cfg, out, quiet=True)
    return out, cfg, report, model


class TestRunOutputs:
    def test_csv_row_count(self, small_run):
        out, cfg, report, _ = small_run
        assert report.converged
        lines = (out / cfg.csv_name).read_text().strip().splitlines()
        assert len(lines) == cfg.solver.load_steps + 2  # header + zero + steps

    def test_csv_monotone_load(self, small_run):
        out, cfg, _, _ = small_run
        rows = (out / cfg.csv_name).read_text().strip().splitlines()[1:]
        mags = [float(r.split(",")[2]) for r in rows]
        assert all(b >= a for a, b in zip(mags, mags[1:]))
        assert mags[-1] == pytest.approx(cfg.loads[0].magnitude)

    def test_zero_row_is_zero(self, small_run):
        out, cfg, _, _ = small_run
        first = (out / cfg.csv_name).read_text().strip().splitlines()[1].split(",")
        assert float(first[1]) == 0.0
        assert all(abs(float(v)) < 1e-15 for v in first[3:6])

    def test_mesh_dumps_exist(self, small_run):
        out, cfg, _, model = small_run
        dumps = sorted(out.glob("mesh_step_*.txt"))
        assert len(dumps) == cfg.solver.load_steps + 1
        tris = sorted(out.glob("mesh_step_*.tri"))
        assert len(tris) == len(dumps)
        # row/element counts match the mesh
        lines = dumps[0].read_text().strip().splitlines()
        assert lines[0] == f"# nodes {model.mesh.n_nodes}"
        node_lines = lines[1:1 + model.mesh.n_nodes]
        assert all(abs(float(l.split()[5])) < 1e-15 for l in node_lines)  # flat: pz = 0

    def test_report_file(self, small_run):
        out, _, _, _ = small_run
        text = (out / "solve_report.txt").read_text()
        assert "converged: True" in text
        # per-iteration log lines: step iter residual
        log_line = [l for l in text.splitlines() if l.startswith("1 1 ")]
        assert log_line

    def test_determinism(self, tmp_path):
        cfg = with_overrides(load_bundled("end_shear"), steps=2)
        cfg = replace(cfg, nx=4)
        r1, _ = run_scenario(cfg, tmp_path / "a", quiet=True)
        r2, _ = run_scenario(cfg, tmp_path / "b", quiet=True)
        csv1 = (tmp_path / "a" / cfg.csv_name).read_bytes()
        csv2 = (tmp_path / "b" / cfg.csv_name).read_bytes()
        assert csv1 == csv2


class TestCli:
    def test_list(self, capsys):
        assert cli_main(["list"]) == 0
        out = capsys.readouterr().out
        assert "rollup_2pi" in out

    def test_parse_error_exit_code(self, tmp_path, capsys):
        bad = tmp_path / "bad.cfg"
        bad.write_text("[geometry]\nkind = hexagon\n")
        assert cli_main(["run", str(bad), "--out", str(tmp_path)]) == 2

    def test_unknown_bench_exit_code(self, tmp_path):
        assert cli_main(["bench", "nope", "--out", str(tmp_path)]) == 2

    def test_run_converges_exit_zero(self, tmp_path, capsys):
        cfg_text = (bundled_dir() / "end_shear.cfg").read_text()
        cfg_text = cfg_text.replace("nx = 20", "nx = 4")
        custom = tmp_path / "small.cfg"
        custom.write_text(cfg_text)
        code = cli_main(["run", str(custom), "--out", str(tmp_path / "o"),
                         "--steps", "2", "--quiet"])
        assert code == 0
        assert (tmp_path / "o" / "small" / "load_deflection.csv").exists()

    def test_non_convergence_exit_code(self, tmp_path):
        text = (bundled_dir() / "end_shear.cfg").read_text()
        text = text.replace("nx = 20", "nx = 4")
        text = text.replace("magnitude = 33333.3333333333", "magnitude = 1e9")
        custom = tmp_path / "hopeless.cfg"
        custom.write_text(text)
        code = cli_main(["run", str(custom), "--out", str(tmp_path / "o"),
                         "--steps", "1", "--max-iter", "2", "--quiet"])
        assert code == 3

    def test_console_entry_point(self, tmp_path):
        proc = subprocess.run([sys.executable, "-m", "se3shell.cli", "list"],
                              capture_output=True, text=True)
        assert proc.returncode == 0
        assert "antiparallel" in proc.stdout
