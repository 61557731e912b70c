import json
import math

import numpy as np
import pytest

from sosid.cli import main
from sosid.frontend import load_features_csv, save_wav
from sosid.synthetic import SynthCorpusConfig, write_corpus


@pytest.fixture()
def corpus_dir(tmp_path):
    cfg = SynthCorpusConfig(
        n_speakers=3,
        dim=6,
        separation=6.0,
        frames_per_speaker=2600,
        sentence_len_frames=260,
        seed=21,
    )
    write_corpus(cfg, tmp_path / "corpus")
    return tmp_path / "corpus"


class TestSynthCorpus:
    def test_writes_manifest_and_data(self, tmp_path, capsys):
        out = tmp_path / "c"
        code = main(
            [
                "synth-corpus",
                "--out", str(out),
                "--seed", "5",
                "--speakers", "2",
                "--dim", "4",
                "--frames-per-speaker", "400",
                "--sentence-frames", "200",
            ]
        )
        assert code == 0
        assert (out / "manifest.json").exists()
        printed = capsys.readouterr().out.strip()
        assert printed.endswith("manifest.json")
        doc = json.loads((out / "manifest.json").read_text())
        assert doc["seed"] == 5
        assert len(doc["speakers"]) == 2


class TestExtract:
    def test_wav_to_csv(self, tmp_path):
        t = np.arange(16000)
        tone = (3000 * np.sin(2 * np.pi * 440 * t / 16000)).astype(np.int16)
        wav = tmp_path / "tone.wav"
        save_wav(wav, tone, 16000)
        out = tmp_path / "tone.csv"
        assert main(["extract", str(wav), "--out", str(out)]) == 0
        feats = load_features_csv(out)
        assert feats.vectors.shape == (97, 24)
        assert np.all(feats.vectors >= math.log(1e-10))

    def test_missing_wav_is_data_error(self, tmp_path):
        code = main(["extract", str(tmp_path / "nope.wav"), "--out", str(tmp_path / "x.csv")])
        assert code == 2

    def test_missing_out_is_usage_error(self, tmp_path):
        assert main(["extract", str(tmp_path / "nope.wav")]) == 1


class TestTrainAndIdentify:
    def test_round_trip_identifies_own_speakers(self, corpus_dir, tmp_path):
        store = tmp_path / "store"
        code = main(
            [
                "train",
                "--manifest", str(corpus_dir / "manifest.json"),
                "--train-seconds", "15",
                "--out", str(store),
            ]
        )
        assert code == 0
        assert sorted(p.name for p in store.glob("*.json")) == [
            "spk000.json", "spk001.json", "spk002.json",
        ]
        # identify each speaker's own feature file
        features = [str(corpus_dir / f"spk{i:03d}" / "s005.csv") for i in range(3)]
        out = tmp_path / "scores.csv"
        code = main(
            ["identify", "--store", str(store), "--measure", "mu_g", "--out", str(out)]
            + features
        )
        assert code == 0
        lines = out.read_text().strip().split("\n")
        assert lines[0] == "test_id,decision,spk000,spk001,spk002"
        decisions = [line.split(",")[1] for line in lines[1:]]
        assert decisions == ["spk000", "spk001", "spk002"]

    def test_identify_to_stdout(self, corpus_dir, tmp_path, capsys):
        store = tmp_path / "store"
        main(["train", "--manifest", str(corpus_dir / "manifest.json"), "--out", str(store)])
        code = main(
            ["identify", "--store", str(store), str(corpus_dir / "spk000" / "s000.csv")]
        )
        assert code == 0
        assert capsys.readouterr().out.startswith("test_id,decision,")


class TestEvalCommands:
    def test_eval_duration_csv(self, corpus_dir, tmp_path):
        out = tmp_path / "report.csv"
        config = tmp_path / "proto.json"
        config.write_text(
            json.dumps({"train_durations": [15, 2], "test_durations": [3, 1]})
        )
        code = main(
            [
                "eval-duration",
                "--manifest", str(corpus_dir / "manifest.json"),
                "--config", str(config),
                "--out", str(out),
            ]
        )
        assert code == 0
        text = out.read_text()
        assert text.startswith("# protocol: duration")
        assert "15,3,mu_g," in text

    def test_eval_duration_deterministic_bytes(self, corpus_dir, tmp_path):
        config = tmp_path / "proto.json"
        config.write_text(
            json.dumps({"train_durations": [6], "test_durations": [1]})
        )
        args = [
            "eval-duration",
            "--manifest", str(corpus_dir / "manifest.json"),
            "--config", str(config),
        ]
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(args + ["--out", str(a)]) == 0
        assert main(args + ["--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_eval_phonetic_markdown(self, corpus_dir, tmp_path):
        out = tmp_path / "phonetic.md"
        code = main(
            [
                "eval-phonetic",
                "--manifest", str(corpus_dir / "manifest.json"),
                "--selectors", "All,Vowels,NasalConsonants",
                "--min-tests", "5",
                "--format", "markdown",
                "--out", str(out),
            ]
        )
        assert code == 0
        text = out.read_text()
        assert "| All | mu_g |" in text

    def test_seed_override_changes_report(self, corpus_dir, tmp_path):
        config = tmp_path / "proto.json"
        config.write_text(json.dumps({"train_durations": [6], "test_durations": [1]}))
        base = [
            "eval-duration",
            "--manifest", str(corpus_dir / "manifest.json"),
            "--config", str(config),
        ]
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(base + ["--out", str(a)]) == 0
        assert main(base + ["--seed", "99", "--out", str(b)]) == 0
        assert "# seed: 21" in a.read_text()
        assert "# seed: 99" in b.read_text()

    def test_single_measure_flag(self, corpus_dir, tmp_path):
        config = tmp_path / "proto.json"
        config.write_text(json.dumps({"train_durations": [6], "test_durations": [1]}))
        out = tmp_path / "one.csv"
        code = main(
            [
                "eval-duration",
                "--manifest", str(corpus_dir / "manifest.json"),
                "--config", str(config),
                "--measure", "mu_sc",
                "--out", str(out),
            ]
        )
        assert code == 0
        text = out.read_text()
        assert "mu_sc" in text and "mu_gc" not in text


class TestExitCodes:
    def test_unknown_command_is_usage_error(self):
        assert main(["frobnicate"]) == 1

    def test_bad_measure_choice_is_usage_error(self, tmp_path):
        assert main(["identify", "--store", str(tmp_path), "--measure", "nope", "x.csv"]) == 1

    def test_missing_manifest_is_data_error(self, tmp_path):
        assert main(["eval-duration", "--manifest", str(tmp_path / "m.json")]) == 2

    def test_corrupt_manifest_is_data_error(self, tmp_path):
        path = tmp_path / "m.json"
        path.write_text("{not json")
        assert main(["eval-duration", "--manifest", str(path)]) == 2

    def test_insufficient_material_is_data_error(self, tmp_path):
        cfg = SynthCorpusConfig(
            n_speakers=2, dim=4, frames_per_speaker=300, sentence_len_frames=150, seed=1
        )
        manifest = write_corpus(cfg, tmp_path / "tiny")
        assert main(["eval-duration", "--manifest", str(manifest)]) == 2

    def test_unknown_protocol_config_key_is_data_error(self, corpus_dir, tmp_path):
        config = tmp_path / "bad.json"
        config.write_text(json.dumps({"trains": [5]}))
        code = main(
            [
                "eval-duration",
                "--manifest", str(corpus_dir / "manifest.json"),
                "--config", str(config),
            ]
        )
        assert code == 2

    def test_unknown_frontend_config_key_is_data_error(self, tmp_path):
        config = tmp_path / "fc.json"
        config.write_text(json.dumps({"frame_length": 512}))
        wav = tmp_path / "x.wav"
        save_wav(wav, np.zeros(16000, dtype=np.int16), 16000)
        code = main(
            ["extract", str(wav), "--config", str(config), "--out", str(tmp_path / "o.csv")]
        )
        assert code == 2
