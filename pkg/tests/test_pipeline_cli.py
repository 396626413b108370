import json

import numpy as np
import pytest
from click.testing import CliRunner

from conftest import hue_rotated, lowfreq_color_image
from refcolor import color, metrics, pipeline
from refcolor.cli import main
from refcolor.pipeline import PipelineConfig, PipelineError, run_pipeline


@pytest.fixture
def scene(tmp_path):
    """Gray input whose colorization has a known ground truth."""
    g = lowfreq_color_image(96, 96, seed=7)
    cands = tmp_path / "cands"
    cands.mkdir()
    color.write_rgb(cands / "a_truth.png", g)
    for k in range(3):
        color.write_rgb(cands / f"d{k}.png", hue_rotated(g, k))
    color.write_gray(tmp_path / "in.png", color.luminance_of(g))
    return {"truth": g, "cands": cands, "input": tmp_path / "in.png", "dir": tmp_path}


class TestConfigDefaults:
    def test_default_operating_point(self):
        cfg = PipelineConfig()
        assert cfg.n_candidates == 8
        assert cfg.n_segments == 10
        assert cfg.hint_cap == 10
        assert cfg.condition == "canny"

    def test_validation(self):
        with pytest.raises(ValueError):
            PipelineConfig(n_candidates=0)
        with pytest.raises(ValueError):
            PipelineConfig(cell_size=1)
        with pytest.raises(ValueError):
            PipelineConfig(provider="ftp")


class TestRunPipeline:
    def test_recovers_known_colors(self, scene):
        cfg = PipelineConfig(candidates_dir=str(scene["cands"]))
        out = scene["dir"] / "out"
        result = run_pipeline(scene["input"], cfg, out)
        assert metrics.psnr(result.output, scene["truth"]) >= 25.0
        assert all(c == 0 for c in result.reference.assignment.choices)
        for name in ("reference.png", "result.png", "assignment.json",
                     "hints.json", "run.json", "segments.json"):
            assert (out / name).exists()
        run_doc = json.loads((out / "run.json").read_text())
        assert run_doc["config"]["n_candidates"] == 8
        assert "residual" in run_doc["solver"]

    def test_neutral_candidate_gives_zero_cf(self, tmp_path):
        g = lowfreq_color_image(64, 64, seed=3)
        gray = color.luminance_of(g)
        cands = tmp_path / "cands"
        cands.mkdir()
        neutral = color.lab_to_rgb(color.gray_to_lab(gray))
        color.write_rgb(cands / "neutral.png", neutral)
        color.write_gray(tmp_path / "in.png", gray)
        cfg = PipelineConfig(candidates_dir=str(cands))
        result = run_pipeline(tmp_path / "in.png", cfg, tmp_path / "out")
        assert result.colorfulness < 1.5

    def test_missing_input_stage_tagged(self, tmp_path):
        cfg = PipelineConfig(candidates_dir=str(tmp_path))
        with pytest.raises(PipelineError) as ei:
            run_pipeline(tmp_path / "absent.png", cfg, tmp_path / "out")
        assert ei.value.stage == "input"
        assert not (tmp_path / "out").exists()  # partial outputs removed

    def test_deterministic(self, scene):
        cfg = PipelineConfig(candidates_dir=str(scene["cands"]))
        r1 = run_pipeline(scene["input"], cfg, scene["dir"] / "o1")
        r2 = run_pipeline(scene["input"], cfg, scene["dir"] / "o2")
        assert (scene["dir"] / "o1" / "result.png").read_bytes() == \
            (scene["dir"] / "o2" / "result.png").read_bytes()
        assert r1.reference.assignment.choices == r2.reference.assignment.choices


class TestCli:
    def test_colorize_command(self, scene):
        out = scene["dir"] / "cli_out"
        result = CliRunner().invoke(main, [
            "colorize", str(scene["input"]),
            "--candidates", str(scene["cands"]), "-o", str(out),
        ])
        assert result.exit_code == 0, result.output
        assert (out / "result.png").exists()

    def test_compose_command(self, scene):
        out = scene["dir"] / "compose_out"
        result = CliRunner().invoke(main, [
            "compose", str(scene["input"]),
            "--candidates", str(scene["cands"]), "-o", str(out),
        ])
        assert result.exit_code == 0, result.output
        assert (out / "reference.png").exists()
        assert (out / "assignment.json").exists()
        assert not (out / "result.png").exists()

    def test_hints_command(self, scene):
        out = scene["dir"] / "hints_out"
        result = CliRunner().invoke(main, [
            "hints", str(scene["input"]),
            "--candidates", str(scene["cands"]), "-o", str(out),
        ])
        assert result.exit_code == 0, result.output
        doc = json.loads((out / "hints.json").read_text())
        assert doc["cell_size"] == 16
        assert len(doc["hints"]) > 0

    def test_metrics_command(self, scene, tmp_path):
        pred = tmp_path / "pred"
        gt = tmp_path / "gt"
        pred.mkdir()
        gt.mkdir()
        color.write_rgb(pred / "x.png", scene["truth"])
        color.write_rgb(gt / "x.png", scene["truth"])
        out = tmp_path / "metrics.json"
        result = CliRunner().invoke(main, [
            "metrics", "--pred", str(pred), "--gt", str(gt), "-o", str(out),
        ])
        assert result.exit_code == 0, result.output
        doc = json.loads(out.read_text())
        assert doc["per_image"][0]["psnr"] == "inf"

    def test_conflicting_providers_exit_2(self, scene):
        result = CliRunner().invoke(main, [
            "colorize", str(scene["input"]),
            "--candidates", str(scene["cands"]),
            "--endpoint", "http://x/generate",
            "-o", str(scene["dir"] / "o"),
        ])
        assert result.exit_code == 2

    def test_missing_input_exit_2(self, scene):
        result = CliRunner().invoke(main, [
            "colorize", str(scene["dir"] / "nope.png"),
            "--candidates", str(scene["cands"]), "-o", str(scene["dir"] / "o"),
        ])
        assert result.exit_code == 2

    def test_unknown_flag_exit_2(self):
        result = CliRunner().invoke(main, ["colorize", "--frobnicate"])
        assert result.exit_code == 2

    def test_toml_config(self, scene, tmp_path):
        cfg_file = tmp_path / "cfg.toml"
        cfg_file.write_text('n_segments = 4\ncell_size = 8\n')
        out = scene["dir"] / "toml_out"
        result = CliRunner().invoke(main, [
            "hints", str(scene["input"]),
            "--candidates", str(scene["cands"]),
            "--config", str(cfg_file), "-o", str(out),
        ])
        assert result.exit_code == 0, result.output
        assert json.loads((out / "hints.json").read_text())["cell_size"] == 8

    def test_toml_unknown_key_exit_2(self, scene, tmp_path):
        cfg_file = tmp_path / "cfg.toml"
        cfg_file.write_text('frobnicate = 1\n')
        result = CliRunner().invoke(main, [
            "colorize", str(scene["input"]),
            "--candidates", str(scene["cands"]),
            "--config", str(cfg_file), "-o", str(scene["dir"] / "o"),
        ])
        assert result.exit_code == 2
