"""Tests for the command line interface: parsing, precedence, outputs, budget."""

import subprocess
import sys

import pytest

from conelab.cli import main, parse_config_file
from conelab.measures import load_config, load_measure


class TestConfigFile:
    def test_parses_all_key_kinds(self, tmp_path):
        cfg = tmp_path / "run.conf"
        cfg.write_text(
            "# comment line\n"
            "\n"
            "R = 16, 32\n"
            "delta=0.03125\n"
            "kind=light_tube,wolff_radii\n"
            "seed=0,1,2\n"
            "n=24\n"
            "gamma=sqrt\n"
            "eps=0.1\n"
            "q=2\n"
            "workers=2\n"
            "out=runs/x\n"
            "force=true\n")
        values = parse_config_file(cfg)
        assert values["R"] == (16, 32)
        assert values["delta"] == (0.03125,)
        assert values["kind"] == ("light_tube", "wolff_radii")
        assert values["seed"] == (0, 1, 2)
        assert values["n"] == 24 and values["gamma"] == "sqrt"
        assert values["eps"] == 0.1 and values["q"] == 2.0
        assert values["workers"] == 2 and values["out"] == "runs/x"
        assert values["force"] is True

    def test_unknown_key_rejected(self, tmp_path):
        cfg = tmp_path / "bad.conf"
        cfg.write_text("radius=5\n")
        with pytest.raises(ValueError, match="unknown key"):
            parse_config_file(cfg)

    def test_missing_equals_rejected(self, tmp_path):
        cfg = tmp_path / "bad.conf"
        cfg.write_text("just a line\n")
        with pytest.raises(ValueError, match="key=value"):
            parse_config_file(cfg)

    def test_config_overrides_flags(self, tmp_path, capsys):
        cfg = tmp_path / "run.conf"
        cfg.write_text("kind=vertical_tube\n")
        code = main(["gen", "--R", "16", "--kind", "light_tube",
                     "--config", str(cfg), "--out", str(tmp_path)])
        assert code == 0
        out = capsys.readouterr().out.strip()
        assert out.endswith("vertical_tube_R16_s0.cubes")
        assert (tmp_path / "vertical_tube_R16_s0.cubes").exists()
        assert not (tmp_path / "light_tube_R16_s0.cubes").exists()


class TestGen:
    def test_cube_measure_file(self, tmp_path, capsys):
        code = main(["gen", "--R", "16", "--kind", "light_tube",
                     "--seed", "3", "--out", str(tmp_path)])
        assert code == 0
        path = tmp_path / "light_tube_R16_s3.cubes"
        assert str(path) in capsys.readouterr().out
        nu = load_measure(path)
        assert nu.R == 16 and nu.mass == 4

    def test_circle_config_file(self, tmp_path):
        code = main(["gen", "--delta", "0.03125", "--kind", "wolff_radii",
                     "--n", "16", "--out", str(tmp_path)])
        assert code == 0
        cfgs = list(tmp_path.glob("wolff_radii_d*.circles"))
        assert len(cfgs) == 1
        config = load_config(cfgs[0])
        assert config.delta == 0.03125 and len(config.circles) == 16

    def test_needs_scale_argument(self, tmp_path, capsys):
        code = main(["gen", "--out", str(tmp_path)])
        assert code == 2
        assert "--R" in capsys.readouterr().err

    def test_bad_kind_exits_2(self, tmp_path, capsys):
        code = main(["gen", "--R", "16", "--kind", "litetube", "--out", str(tmp_path)])
        assert code == 2
        assert "litetube" in capsys.readouterr().err


class TestPipelines:
    def run_pairs(self, out, seed="0"):
        return main(["pairs", "--delta", "0.03125", "--n", "16",
                     "--kind", "wolff_radii", "--seed", seed, "--out", str(out)])

    def test_pairs_outputs(self, tmp_path, capsys):
        code = self.run_pairs(tmp_path)
        assert code == 0
        out = capsys.readouterr().out
        assert "pairs: wrote" in out
        d = tmp_path / "pairs"
        assert (d / "pair_counts.csv").exists()
        assert (d / "pair_counts.svg").exists()
        assert (d / "manifest.txt").exists()

    def test_manifest_keys(self, tmp_path):
        self.run_pairs(tmp_path)
        text = (tmp_path / "pairs" / "manifest.txt").read_text()
        lines = dict(l.split("=", 1) for l in text.splitlines() if "=" in l)
        assert lines["experiment"] == "pairs"
        assert lines["delta"] == "0.03125"
        assert lines["kinds"] == "wolff_radii"
        assert lines["seeds"] == "0"
        assert lines["n"] == "16"
        assert lines["force"] == "false"
        assert "python" in lines and "numpy" in lines and "scipy" in lines
        assert "wall_seconds_pairs" in lines
        assert text.count("file=") == 2

    def test_deterministic_reruns(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        assert self.run_pairs(a) == 0
        assert self.run_pairs(b) == 0
        for name in ("pair_counts.csv", "pair_counts.svg"):
            assert (a / "pairs" / name).read_bytes() == (b / "pairs" / name).read_bytes()

    def test_unknown_kind_exits_2(self, tmp_path, capsys):
        code = main(["pairs", "--delta", "0.03125", "--kind", "nope",
                     "--out", str(tmp_path)])
        assert code == 2
        assert "nope" in capsys.readouterr().err

    def test_invalid_r_exits_2(self, tmp_path, capsys):
        code = main(["decay", "--R", "17", "--out", str(tmp_path)])
        assert code == 2
        assert "power of two" in capsys.readouterr().err

    def test_budget_refusal_exits_2(self, tmp_path, capsys):
        code = main(["pairs", "--delta", "0.000001", "--out", str(tmp_path)])
        assert code == 2
        err = capsys.readouterr().err
        assert "budget" in err and "force" in err
        assert not (tmp_path / "pairs").exists()


class TestEntryPoint:
    def test_console_script(self, tmp_path):
        res = subprocess.run(
            [sys.executable, "-m", "conelab.cli", "gen", "--R", "16",
             "--kind", "light_tube", "--out", str(tmp_path)],
            capture_output=True, text=True)
        assert res.returncode == 0, res.stderr
        assert (tmp_path / "light_tube_R16_s0.cubes").exists()

    def test_requires_subcommand(self):
        with pytest.raises(SystemExit) as err:
            main([])
        assert err.value.code == 2
