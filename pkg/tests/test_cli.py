import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from ibnaming.cli import main

from conftest import FIXTURES


@pytest.fixture
def runner():
    return CliRunner()


def run_ok(runner, args):
    result = runner.invoke(main, args, catch_exceptions=False)
    assert result.exit_code == 0, result.output
    return result


def build_container_pipeline(runner, root: Path, num_betas: int = 60,
                             beta_max: float = 32.0) -> dict[str, Path]:
    paths = {
        "space": root / "space.csv",
        "prior": root / "prior.csv",
        "front": root / "front",
    }
    run_ok(runner, ["make-space", "--similarity", str(FIXTURES / "similarity.csv"),
                    "--out", str(paths["space"])])
    run_ok(runner, ["make-prior",
                    "--naming", str(FIXTURES / "naming_a.tsv"),
                    "--naming", str(FIXTURES / "naming_b.tsv"),
                    "--space", str(paths["space"]), "--out", str(paths["prior"])])
    run_ok(runner, ["frontier", "--space", str(paths["space"]),
                    "--need", str(paths["prior"]),
                    "--beta-max", str(beta_max), "--num-betas", str(num_betas),
                    "--out", str(paths["front"])])
    return paths


class TestPipelineComposability:
    def test_make_space_feeds_frontier(self, runner, tmp_path):
        paths = build_container_pipeline(runner, tmp_path, num_betas=40)
        front_csv = paths["front"] / "frontier.csv"
        assert front_csv.exists()
        assert len(front_csv.read_text().splitlines()) == 41  # header + points
        meta = json.loads((paths["front"] / "frontier_meta.json").read_text())
        assert meta["num_points"] == 40
        assert (paths["front"] / "manifest.json").exists()
        assert len(list((paths["front"] / "encoders").glob("*.csv"))) == 40

    def test_eval_and_baseline(self, runner, tmp_path):
        paths = build_container_pipeline(runner, tmp_path, num_betas=40)
        out = tmp_path / "eval.json"
        result = run_ok(runner, ["eval", "--system", str(FIXTURES / "naming_a.tsv"),
                                 "--space", str(paths["space"]),
                                 "--need", str(paths["prior"]),
                                 "--frontier", str(paths["front"]),
                                 "--out", str(out)])
        assert "beta_l=" in result.output
        payload = json.loads(out.read_text())
        assert payload["inefficiency_bits"] >= -1e-6
        assert (tmp_path / "eval.json.manifest.json").exists()

        bout = tmp_path / "base.json"
        run_ok(runner, ["baseline", "--system", str(FIXTURES / "naming_a.tsv"),
                        "--space", str(paths["space"]), "--need", str(paths["prior"]),
                        "--frontier", str(paths["front"]),
                        "--samples", "10", "--seed", "7", "--out", str(bout)])
        summary = json.loads(bout.read_text())
        assert summary["num_samples"] == 10
        assert summary["seed"] == 7

    def test_gnid_and_mixture(self, runner, tmp_path):
        out = tmp_path / "g.json"
        result = run_ok(runner, ["gnid",
                                 "--system-a", str(FIXTURES / "naming_a.tsv"),
                                 "--system-b", str(FIXTURES / "naming_b.tsv"),
                                 "--need", "uniform", "--out", str(out)])
        value = json.loads(out.read_text())["gnid"]
        assert 0.0 <= value <= 1.0
        assert repr(value) in result.output

        result = run_ok(runner, ["mixture",
                                 "--system-a", str(FIXTURES / "naming_a.tsv"),
                                 "--system-b", str(FIXTURES / "naming_b.tsv"),
                                 "--need", "uniform", "--weight", "0.5"])
        assert "mixture_complexity_bits" in result.output

    def test_hierarchy(self, runner, tmp_path):
        space = tmp_path / "aspace.csv"
        need = tmp_path / "aneed.csv"
        front = tmp_path / "afront"
        run_ok(runner, ["make-space", "--features", str(FIXTURES / "features.csv"),
                        "--familiarity", str(FIXTURES / "familiarity.csv"),
                        "--out", str(space), "--need-out", str(need)])
        run_ok(runner, ["frontier", "--space", str(space), "--need", str(need),
                        "--beta-max", "512", "--num-betas", "80",
                        "--out", str(front)])
        hout = tmp_path / "h.json"
        result = run_ok(runner, ["hierarchy", "--frontier", str(front),
                                 "--space", str(space), "--need", str(need),
                                 "--k", "1,2,3", "--out-json", str(hout)])
        assert "k=1" in result.output and "k=3" in result.output
        payload = json.loads(hout.read_text())
        assert [layer["k"] for layer in payload["layers"]] == [1, 2, 3]


class TestExitCodes:
    def test_fingerprint_mismatch_exits_one(self, runner, tmp_path):
        paths = build_container_pipeline(runner, tmp_path, num_betas=25)
        other_space = tmp_path / "other_space.csv"
        run_ok(runner, ["make-space", "--similarity", str(FIXTURES / "similarity.csv"),
                        "--gamma", "0.5", "--out", str(other_space)])
        result = runner.invoke(main, ["eval", "--system", str(FIXTURES / "naming_a.tsv"),
                                      "--space", str(other_space),
                                      "--need", str(paths["prior"]),
                                      "--frontier", str(paths["front"])])
        assert result.exit_code == 1
        assert "different meaning space" in result.output

    def test_baseline_requires_seed(self, runner, tmp_path):
        result = runner.invoke(main, ["baseline", "--system", "x", "--space", "y",
                                      "--need", "uniform", "--frontier", "z",
                                      "--samples", "5"])
        assert result.exit_code == 2

    def test_randomized_frontier_requires_seed(self, runner, tmp_path):
        result = runner.invoke(main, ["frontier", "--space",
                                      str(FIXTURES / "similarity.csv"),
                                      "--need", "uniform", "--restarts", "2",
                                      "--out", str(tmp_path / "f")])
        assert result.exit_code == 2
        assert "--seed" in result.output

    def test_validation_error_exits_one(self, runner, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("meaning,u0,u1\nm0,0.9,0.3\n")
        result = runner.invoke(main, ["frontier", "--space", str(bad),
                                      "--need", "uniform", "--num-betas", "5",
                                      "--beta-max", "4",
                                      "--out", str(tmp_path / "f")])
        assert result.exit_code == 1
        assert "sums to" in result.output

    def test_unknown_subcommand_exits_two(self, runner):
        result = runner.invoke(main, ["transmogrify"])
        assert result.exit_code == 2


class TestDeterminism:
    def read_tree(self, root: Path) -> dict[str, bytes]:
        return {
            str(p.relative_to(root)): p.read_bytes()
            for p in sorted(root.rglob("*"))
            if p.is_file() and "manifest" not in p.name
        }

    def test_frontier_byte_identical(self, runner, tmp_path):
        paths = build_container_pipeline(runner, tmp_path, num_betas=30)
        args = ["frontier", "--space", str(paths["space"]),
                "--need", str(paths["prior"]), "--beta-max", "32",
                "--num-betas", "30", "--restarts", "1", "--seed", "5"]
        run_ok(runner, args + ["--out", str(tmp_path / "f1")])
        run_ok(runner, args + ["--out", str(tmp_path / "f2")])
        assert self.read_tree(tmp_path / "f1") == self.read_tree(tmp_path / "f2")

    def test_baseline_byte_identical(self, runner, tmp_path):
        paths = build_container_pipeline(runner, tmp_path, num_betas=30)
        args = ["baseline", "--system", str(FIXTURES / "naming_a.tsv"),
                "--space", str(paths["space"]), "--need", str(paths["prior"]),
                "--frontier", str(paths["front"]), "--samples", "12", "--seed", "3"]
        run_ok(runner, args + ["--out", str(tmp_path / "b1.json")])
        run_ok(runner, args + ["--out", str(tmp_path / "b2.json")])
        assert (tmp_path / "b1.json").read_bytes() == (tmp_path / "b2.json").read_bytes()


class TestConfigFile:
    def test_config_supplies_defaults_flags_win(self, runner, tmp_path):
        paths = build_container_pipeline(runner, tmp_path, num_betas=25)
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"beta-max": 16.0, "num-betas": 12}))
        out1 = tmp_path / "cfg_front"
        run_ok(runner, ["--config", str(cfg), "frontier",
                        "--space", str(paths["space"]), "--need", str(paths["prior"]),
                        "--out", str(out1)])
        meta = json.loads((out1 / "frontier_meta.json").read_text())
        assert meta["num_points"] == 12
        assert meta["config"]["beta_grid"][-1] == pytest.approx(16.0)

        out2 = tmp_path / "cfg_front2"
        run_ok(runner, ["--config", str(cfg), "frontier",
                        "--space", str(paths["space"]), "--need", str(paths["prior"]),
                        "--num-betas", "8", "--out", str(out2)])
        meta2 = json.loads((out2 / "frontier_meta.json").read_text())
        assert meta2["num_points"] == 8
