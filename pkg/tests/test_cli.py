from __future__ import annotations

import json

import pytest

from sketchsum.cli import main

SAMSUM_STYLE = [
    {
        "id": "13862856",
        "dialogue": "Hannah: Hey, do you have Betty's number?\nAmanda: Lemme check\nAmanda: Sorry, can't find it.\nAmanda: Ask Larry\nAmanda: He called her last time we were at the park together\nHannah: I don't know him well\nHannah: Dont be shy, he's very nice\nAmanda: If you say so..\nHannah: I'd rather you texted him\nAmanda: Just text him \U0001F642\nHannah: Urgh.. Alright\nHannah: Bye\nAmanda: Bye bye",
        "summary": "Hannah needs Betty's number but Amanda does not have it. She needs to contact Larry.",
    },
    {
        "id": "13729565",
        "dialogue": "Eric: MACHINE!\nRob: That's so gr8! #cool\nEric: I know! And shows how Americans see Russian ;)\nRob: And it really works?\nEric: Yeah, see http://example.com/demo\nRob: Ahahahaha",
        "summary": "Eric and Rob are going to watch a stand-up on youtube.",
    },
    {
        "id": "13680171",
        "dialogue": "Will: hey babe, what do you want for dinner tonight?\nEmma: gah, don't even worry about it tonight\nWill: what do you mean? everything ok?\nEmma: not really, but it's ok, don't worry about cooking anything\nWill: Well what time will you be home?\nEmma: soon, hopefully\nWill: you sure? Maybe you want me to pick you up?\nEmma: no no it's alright. I'll be home soon.",
        "summary": "Emma will be home soon and she will let Will know.",
    },
]


def write_raw(tmp_path):
    path = tmp_path / "raw.jsonl"
    path.write_text(
        "\n".join(json.dumps(rec, ensure_ascii=False) for rec in SAMSUM_STYLE) + "\n",
        encoding="utf-8",
    )
    return path


def read_jsonl(path):
    return [json.loads(line) for line in path.read_text().splitlines() if line.strip()]


@pytest.fixture
def corpus_path(tmp_path):
    raw = write_raw(tmp_path)
    out = tmp_path / "corpus.jsonl"
    assert main(["--quiet", "preprocess", str(raw), str(out)]) == 0
    return out


class TestPreprocess:
    def test_converts_and_cleans(self, tmp_path, capsys):
        raw = write_raw(tmp_path)
        out = tmp_path / "corpus.jsonl"
        assert main(["preprocess", str(raw), str(out)]) == 0
        records = read_jsonl(out)
        assert len(records) == 3
        eric = records[1]
        text = json.dumps(eric)
        assert "#cool" not in text
        assert "http://" not in text
        # Adjacent same-speaker turns were merged.
        hannah = records[0]
        speakers = [t["speaker"] for t in hannah["dialogue"]]
        assert all(a != b for a, b in zip(speakers, speakers[1:]))
        assert "records: 3" in capsys.readouterr().out

    def test_empty_file(self, tmp_path, capsys):
        raw = tmp_path / "empty.jsonl"
        raw.write_text("")
        out = tmp_path / "out.jsonl"
        assert main(["preprocess", str(raw), str(out)]) == 0
        assert "records: 0" in capsys.readouterr().out

    def test_unreadable_path_fails(self, tmp_path, capsys):
        assert main(["preprocess", str(tmp_path / "missing.jsonl"), str(tmp_path / "o")]) == 1
        assert "error" in capsys.readouterr().err

    def test_malformed_line_reports_line_number(self, tmp_path, capsys):
        raw = tmp_path / "bad.jsonl"
        raw.write_text('{"id": "a", "dialogue": [{"speaker": "A", "text": "hi"}]}\n{oops\n')
        assert main(["preprocess", str(raw), str(tmp_path / "o")]) == 1
        assert "line 2" in capsys.readouterr().err


class TestSketchCommand:
    def test_writes_one_sketch_per_sample(self, corpus_path, tmp_path):
        out = tmp_path / "sketches.jsonl"
        assert main(["--quiet", "sketch", str(corpus_path), str(out)]) == 0
        records = read_jsonl(out)
        assert len(records) == 3
        assert all(rec["sketch"].endswith("TL;DR") for rec in records)

    def test_deterministic_rerun(self, corpus_path, tmp_path):
        out1 = tmp_path / "s1.jsonl"
        out2 = tmp_path / "s2.jsonl"
        main(["--quiet", "sketch", str(corpus_path), str(out1)])
        main(["--quiet", "sketch", str(corpus_path), str(out2)])
        assert out1.read_text() == out2.read_text()

    def test_hash_style(self, corpus_path, tmp_path):
        out = tmp_path / "sketches.jsonl"
        assert main(["--quiet", "sketch", str(corpus_path), str(out), "--style", "hash"]) == 0
        text = out.read_text()
        assert "#" in text

    def test_trees_sidecar(self, corpus_path, tmp_path):
        trees = tmp_path / "trees.jsonl"
        # Wrong leaves: command warns and falls back per turn.
        trees.write_text(json.dumps({"id": "13862856", "turn": 1, "tree": "(S (NP x))"}) + "\n")
        out = tmp_path / "sketches.jsonl"
        assert main(["--quiet", "sketch", str(corpus_path), str(out), "--trees", str(trees)]) == 0
        assert len(read_jsonl(out)) == 3


class TestSegmentCommand:
    def test_emits_pseudo_labels(self, corpus_path, tmp_path):
        out = tmp_path / "cuts.jsonl"
        assert main(["--quiet", "segment", str(corpus_path), str(out)]) == 0
        records = read_jsonl(out)
        assert len(records) == 3
        for rec in records:
            assert set(rec) == {"id", "cuts", "n_turns"}
            assert all(1 <= c < rec["n_turns"] for c in rec["cuts"])


class TestTrainPredictCommands:
    def test_train_then_predict(self, corpus_path, tmp_path):
        cuts = tmp_path / "cuts.jsonl"
        model = tmp_path / "model.json"
        probs = tmp_path / "probs.jsonl"
        assert main(["--quiet", "segment", str(corpus_path), str(cuts)]) == 0
        assert main(
            ["--quiet", "train-cutter", str(corpus_path), str(cuts), str(model), "--epochs", "50"]
        ) == 0
        payload = json.loads(model.read_text())
        assert set(payload) == {"feature_names", "weights", "bias"}
        assert main(["--quiet", "predict-cuts", str(corpus_path), str(model), str(probs)]) == 0
        records = read_jsonl(probs)
        assert len(records) == 3
        assert all(0.0 < p < 1.0 for rec in records for p in rec["probs"])


class TestEmitTrainingCommand:
    def test_pairs_have_wire_shape(self, corpus_path, tmp_path):
        out = tmp_path / "pairs.jsonl"
        assert main(["--quiet", "emit-training", str(corpus_path), str(out)]) == 0
        records = read_jsonl(out)
        assert records
        for rec in records:
            assert set(rec) == {"id", "segment", "source", "target"}
            assert rec["source"].count("<hl>") == 2
            assert rec["target"].count("TL;DR") == 1

    def test_full_scope_flag(self, corpus_path, tmp_path):
        out = tmp_path / "pairs.jsonl"
        assert main(
            ["--quiet", "emit-training", str(corpus_path), str(out), "--sketch-scope", "full"]
        ) == 0
        by_id = {}
        for rec in read_jsonl(out):
            by_id.setdefault(rec["id"], []).append(rec["target"].split(" TL;DR ")[0])
        for targets in by_id.values():
            assert len(set(targets)) == 1


class TestSummarizeCommand:
    def test_echo_auto_with_model(self, corpus_path, tmp_path):
        cuts = tmp_path / "cuts.jsonl"
        model = tmp_path / "model.json"
        out = tmp_path / "pred.jsonl"
        main(["--quiet", "segment", str(corpus_path), str(cuts)])
        main(["--quiet", "train-cutter", str(corpus_path), str(cuts), str(model), "--epochs", "50"])
        assert main(
            [
                "--quiet",
                "summarize",
                str(corpus_path),
                str(out),
                "--mode",
                "auto",
                "--generator",
                "echo",
                "--model",
                str(model),
            ]
        ) == 0
        records = read_jsonl(out)
        assert len(records) == 3
        for rec in records:
            assert set(rec) == {"id", "summary", "cuts", "mode"}
            assert rec["summary"]

    def test_probs_injection_bypasses_model(self, corpus_path, tmp_path):
        corpus_records = read_jsonl(corpus_path)
        probs = tmp_path / "probs.jsonl"
        probs.write_text(
            "\n".join(
                json.dumps({"id": rec["id"], "probs": [0.9] * len(rec["dialogue"])})
                for rec in corpus_records
            )
            + "\n"
        )
        out = tmp_path / "pred.jsonl"
        assert main(
            [
                "--quiet",
                "summarize",
                str(corpus_path),
                str(out),
                "--mode",
                "auto",
                "--generator",
                "echo",
                "--probs",
                str(probs),
            ]
        ) == 0
        for rec in read_jsonl(out):
            n_turns = len(next(c["dialogue"] for c in corpus_records if c["id"] == rec["id"]))
            assert rec["cuts"] == list(range(1, n_turns))

    def test_mode_one_single_sentence(self, corpus_path, tmp_path):
        out = tmp_path / "pred.jsonl"
        assert main(
            ["--quiet", "summarize", str(corpus_path), str(out), "--mode", "one", "--generator", "echo"]
        ) == 0
        for rec in read_jsonl(out):
            assert rec["cuts"] == []

    def test_longest_generator(self, corpus_path, tmp_path):
        out = tmp_path / "pred.jsonl"
        assert main(
            ["--quiet", "summarize", str(corpus_path), str(out), "--mode", "k=3", "--generator", "longest"]
        ) == 0
        for rec in read_jsonl(out):
            assert "said" in rec["summary"]

    def test_unknown_generator_fails(self, corpus_path, tmp_path):
        code = main(
            ["--quiet", "summarize", str(corpus_path), str(tmp_path / "p"), "--generator", "wat"]
        )
        assert code == 1


class TestEvaluateCommand:
    def test_scores_predictions(self, corpus_path, tmp_path, capsys):
        pred = tmp_path / "pred.jsonl"
        main(["--quiet", "summarize", str(corpus_path), str(pred), "--mode", "one", "--generator", "longest"])
        report_path = tmp_path / "report.json"
        assert main(
            ["evaluate", str(pred), str(corpus_path), "--out", str(report_path)]
        ) == 0
        out = capsys.readouterr().out
        assert "rouge1" in out
        report = json.loads(report_path.read_text())
        assert set(report) == {"rouge1", "rouge2", "rougeL", "length_ratio"}
        assert 0.0 <= report["rouge1"] <= 1.0

    def test_perfect_predictions_score_one(self, corpus_path, tmp_path, capsys):
        refs = read_jsonl(corpus_path)
        pred = tmp_path / "pred.jsonl"
        pred.write_text(
            "\n".join(json.dumps({"id": r["id"], "summary": r["summary"]}) for r in refs) + "\n"
        )
        report_path = tmp_path / "report.json"
        assert main(["--quiet", "evaluate", str(pred), str(corpus_path), "--out", str(report_path)]) == 0
        report = json.loads(report_path.read_text())
        assert report["rouge1"] == pytest.approx(1.0)
        assert report["rougeL"] == pytest.approx(1.0)


class TestConfigFile:
    def test_unknown_keys_rejected(self, corpus_path, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"mode": "one", "bogus_key": 1}))
        code = main(
            ["--config", str(cfg), "summarize", str(corpus_path), str(tmp_path / "p"), "--generator", "echo"]
        )
        assert code == 1
        assert "unknown keys" in capsys.readouterr().err

    def test_flags_override_config(self, corpus_path, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"mode": "one", "generator": "echo"}))
        probs = tmp_path / "probs.jsonl"
        probs.write_text(
            "\n".join(
                json.dumps({"id": rec["id"], "probs": [0.5] * len(rec["dialogue"])})
                for rec in read_jsonl(corpus_path)
            )
            + "\n"
        )
        out = tmp_path / "pred.jsonl"
        assert main(
            [
                "--quiet",
                "--config",
                str(cfg),
                "summarize",
                str(corpus_path),
                str(out),
                "--mode",
                "k=2",
                "--probs",
                str(probs),
            ]
        ) == 0
        for rec in read_jsonl(out):
            assert rec["mode"] == "k=2"
            assert len(rec["cuts"]) == 1

    def test_config_supplies_generator(self, corpus_path, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"generator": "longest", "mode": "one"}))
        out = tmp_path / "pred.jsonl"
        assert main(
            ["--quiet", "--config", str(cfg), "summarize", str(corpus_path), str(out)]
        ) == 0
        assert all("said" in rec["summary"] for rec in read_jsonl(out))
