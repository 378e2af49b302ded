import json
from pathlib import Path

import jsonschema
import numpy as np
import pytest

import patdet
from patdet.cli import main
from patdet.data import read_video

EVAL_REPORT_SCHEMA = {
    "type": "object",
    "required": ["schema", "fdr", "vdr", "auc", "confusion", "threshold",
                 "per_video", "config", "timings"],
    "properties": {
        "schema": {"const": 1},
        "fdr": {"type": "number", "minimum": 0, "maximum": 1},
        "vdr": {"type": "number", "minimum": 0, "maximum": 1},
        "auc": {"type": "number", "minimum": 0, "maximum": 1},
        "threshold": {"type": "integer", "minimum": 1},
        "confusion": {
            "type": "object",
            "required": ["true_positive", "false_positive", "true_negative",
                         "false_negative"],
            "additionalProperties": {"type": "integer", "minimum": 0},
        },
        "per_video": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id", "kind", "verdict", "truth", "flagged",
                             "frames", "max_score", "elapsed_seconds"],
            },
        },
        "timings": {
            "type": "object",
            "required": ["total_seconds", "mean_video_seconds"],
            "additionalProperties": {"type": "number", "minimum": 0},
        },
    },
}

DETECT_REPORT_SCHEMA = {
    "type": "object",
    "required": ["schema", "video", "scores", "flags", "verdict", "threshold",
                 "elapsed_seconds"],
    "properties": {
        "schema": {"const": 1},
        "scores": {"type": "array", "items": {"type": "number", "minimum": 0, "maximum": 1}},
        "flags": {"type": "array", "items": {"enum": [0, 1]}},
        "verdict": {"enum": [0, 1]},
        "threshold": {"type": "integer", "minimum": 1},
        "elapsed_seconds": {"type": "number", "minimum": 0},
    },
}


def synth_args(out, videos=4, frames=8, size="16x16", objects=2, seed=7):
    return ["synth", "--out", str(out), "--videos", str(videos),
            "--frames", str(frames), "--size", size, "--objects", str(objects),
            "--velocity", "0.5:1.5", "--seed", str(seed)]


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    """One synth + train pipeline shared by the CLI tests."""
    root = tmp_path_factory.mktemp("cli")
    clean = root / "clean"
    assert main(synth_args(clean)) == 0
    model = root / "model.patm"
    assert main([
        "train", "--clean", str(clean), "--out", str(model),
        "--epochs", "2", "--batch-size", "8", "--seed", "3",
        "--sigma-mode", "varying:0.0001:0.05",
    ]) == 0
    return root, clean, model


class TestSynthCommand:
    def test_writes_files_and_manifest(self, tmp_path):
        out = tmp_path / "videos"
        assert main(synth_args(out, videos=3)) == 0
        files = sorted(out.glob("*.vseq"))
        assert len(files) == 3
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["schema"] == 1
        assert len(manifest["ids"]) == 3
        video = read_video(files[0])
        assert video.data.shape == (8, 16, 16, 3)

    def test_rerun_identical(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        assert main(synth_args(a)) == 0
        assert main(synth_args(b)) == 0
        for fa in sorted(a.glob("*.vseq")):
            assert fa.read_bytes() == (b / fa.name).read_bytes()

    def test_min_size_enforced(self, tmp_path):
        assert main(synth_args(tmp_path / "x", size="7x7")) == 2

    def test_bad_size_string(self, tmp_path):
        assert main(synth_args(tmp_path / "x", size="64")) == 2


class TestAttackCommand:
    def test_sparse_paper_fraction(self, tmp_path):
        clean = tmp_path / "clean"
        assert main(synth_args(clean, videos=2, frames=40)) == 0
        adv = tmp_path / "adv"
        assert main(["attack", "--in", str(clean), "--out", str(adv),
                     "--mode", "sparse", "--rho", "0.225", "--sigma", "0.03",
                     "--seed", "1"]) == 0
        for label_file in sorted(adv.glob("*.labels.json")):
            payload = json.loads(label_file.read_text())
            assert payload["schema"] == 1
            assert sum(payload["labels"]) == 9  # 22.5% of 40 frames

    def test_dense_all_adversarial(self, workspace, tmp_path):
        _, clean, _ = workspace
        adv = tmp_path / "adv"
        assert main(["attack", "--in", str(clean), "--out", str(adv),
                     "--mode", "dense", "--eps", "0.03", "--seed", "1"]) == 0
        payload = json.loads(sorted(adv.glob("*.labels.json"))[0].read_text())
        assert payload["labels"] == [1] * 8

    def test_invalid_params(self, workspace, tmp_path):
        _, clean, _ = workspace
        out = str(tmp_path / "x")
        assert main(["attack", "--in", str(clean), "--out", out,
                     "--mode", "sparse", "--rho", "0", "--sigma", "0.03"]) == 2
        assert main(["attack", "--in", str(clean), "--out", out,
                     "--mode", "sparse", "--rho", "0.2"]) == 2
        assert main(["attack", "--in", str(clean), "--out", out,
                     "--mode", "dense"]) == 2

    def test_missing_input_dir(self, tmp_path):
        assert main(["attack", "--in", str(tmp_path / "nope"), "--out",
                     str(tmp_path / "o"), "--mode", "dense", "--eps", "0.1"]) == 3


class TestTrainCommand:
    def test_writes_model_and_history(self, workspace):
        root, _, model = workspace
        assert model.exists()
        history = json.loads(Path(f"{model}.history.json").read_text())
        assert history["schema"] == 1
        assert len(history["loss"]) == 2
        assert len(history["accuracy"]) == 2
        loaded = patdet.load_model(model)
        assert loaded.trained

    def test_deterministic_across_runs(self, workspace, tmp_path):
        _, clean, model = workspace
        again = tmp_path / "again.patm"
        assert main([
            "train", "--clean", str(clean), "--out", str(again),
            "--epochs", "2", "--batch-size", "8", "--seed", "3",
            "--sigma-mode", "varying:0.0001:0.05",
        ]) == 0
        assert again.read_bytes() == model.read_bytes()

    def test_fixed_sigma_and_original_mode(self, workspace, tmp_path):
        _, clean, _ = workspace
        out = tmp_path / "orig.patm"
        assert main([
            "train", "--clean", str(clean), "--out", str(out),
            "--epochs", "1", "--batch-size", "8", "--seed", "3",
            "--sigma-mode", "fixed:0.01", "--input-mode", "original",
        ]) == 0
        assert patdet.load_model(out).input_mode == patdet.InputMode.ORIGINAL

    def test_bad_sigma_mode(self, workspace, tmp_path):
        _, clean, _ = workspace
        assert main(["train", "--clean", str(clean), "--out",
                     str(tmp_path / "m.patm"), "--sigma-mode", "sometimes:1"]) == 2

    def test_empty_corpus(self, tmp_path):
        empty = tmp_path / "empty"
        empty.mkdir()
        assert main(["train", "--clean", str(empty), "--out",
                     str(tmp_path / "m.patm")]) == 3


class TestDetectCommand:
    def test_json_report(self, workspace, capsys):
        _, clean, model = workspace
        video = sorted(clean.glob("*.vseq"))[0]
        assert main(["detect", "--model", str(model), "--video", str(video),
                     "--threshold", "3", "--json"]) == 0
        payload = json.loads(capsys.readouterr().out)
        jsonschema.validate(payload, DETECT_REPORT_SCHEMA)
        assert len(payload["scores"]) == 8
        assert payload["flags"] == [1 if s >= 0.5 else 0 for s in payload["scores"]]

    def test_human_output(self, workspace, capsys):
        _, clean, model = workspace
        video = sorted(clean.glob("*.vseq"))[0]
        assert main(["detect", "--model", str(model), "--video", str(video)]) == 0
        out = capsys.readouterr().out
        assert "CLEAN" in out or "ADVERSARIAL" in out

    def test_threshold_validation(self, workspace):
        _, clean, model = workspace
        video = sorted(clean.glob("*.vseq"))[0]
        assert main(["detect", "--model", str(model), "--video", str(video),
                     "--threshold", "0"]) == 2

    def test_missing_files(self, workspace, tmp_path):
        _, clean, model = workspace
        video = sorted(clean.glob("*.vseq"))[0]
        assert main(["detect", "--model", str(tmp_path / "no.patm"),
                     "--video", str(video)]) == 3
        assert main(["detect", "--model", str(model),
                     "--video", str(tmp_path / "no.vseq")]) == 3

    def test_shape_mismatch_is_config_error(self, workspace, tmp_path):
        _, _, model = workspace
        other = tmp_path / "other"
        assert main(synth_args(other, videos=1, size="32x32")) == 0
        video = sorted(other.glob("*.vseq"))[0]
        assert main(["detect", "--model", str(model), "--video", str(video)]) == 2


class TestEvalCommand:
    def test_report_structure_and_roundtrip(self, workspace, tmp_path):
        root, clean, model = workspace
        adv = tmp_path / "adv"
        assert main(["attack", "--in", str(clean), "--out", str(adv),
                     "--mode", "sparse", "--rho", "0.25", "--sigma", "0.2",
                     "--seed", "5"]) == 0
        report_path = tmp_path / "report.json"
        assert main(["eval", "--model", str(model), "--clean", str(clean),
                     "--adv", str(adv), "--threshold", "2",
                     "--report", str(report_path)]) == 0
        report = json.loads(report_path.read_text())
        jsonschema.validate(report, EVAL_REPORT_SCHEMA)
        assert report["confusion"]["true_positive"] + report["confusion"]["false_negative"] == 4
        assert len(report["per_video"]) == 8
        # round-trip: re-serialize and parse again
        assert json.loads(json.dumps(report)) == report

    def test_missing_labels(self, workspace, tmp_path):
        _, clean, model = workspace
        assert main(["eval", "--model", str(model), "--clean", str(clean),
                     "--adv", str(clean), "--labels", str(tmp_path),
                     "--report", str(tmp_path / "r.json")]) == 3

    def test_bad_threshold(self, workspace):
        _, clean, model = workspace
        assert main(["eval", "--model", str(model), "--clean", str(clean),
                     "--adv", str(clean), "--threshold", "0"]) == 2
