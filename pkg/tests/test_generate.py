from __future__ import annotations

import json
import random
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer

import pytest

from sketchsum.corpus import split_summary_sentences
from sketchsum.cutmodel import zero_model
from sketchsum.generate import (
    GeneratorProtocolError,
    GeneratorRequest,
    GeneratorResponse,
    GeneratorUnavailableError,
    TrainingPair,
    emit_training_pairs,
    longest_k_baseline,
    make_echo_generator,
    make_remote_generator,
    remote_generate,
    summarize,
)
from sketchsum.intent import default_rules, label_dialogue
from sketchsum.phrase import extract_key_phrases
from sketchsum.segment import align_segments, strip_highlights
from sketchsum.sketch import build_sketch, split_generated
from tests.conftest import make_dialogue, random_dialogue


def intents_for(dialogue):
    return label_dialogue(dialogue, default_rules())


def counting(generator):
    calls = []

    def wrapped(request):
        calls.append(request)
        return generator(request)

    return wrapped, calls


class TestSummarize:
    def test_mode_one_single_call_whole_dialogue(self):
        dialogue = make_dialogue(["first words", "middle part", "last words"])
        gen, calls = counting(make_echo_generator(dialogue, intents_for(dialogue)))
        result = summarize(dialogue, gen, mode="one")
        assert len(calls) == 1
        assert calls[0].highlighted_text.startswith("<hl> ")
        assert calls[0].highlighted_text.endswith(" <hl>")
        assert result.segmentation.n_segments == 1

    def test_auto_below_threshold_gives_one_sentence(self):
        dialogue = make_dialogue(["alpha", "bravo", "charlie"])
        gen, calls = counting(make_echo_generator(dialogue, intents_for(dialogue)))
        result = summarize(dialogue, gen, mode="auto", probs=[0.2, 0.4, 0.1])
        assert len(calls) == 1
        assert len(split_summary_sentences(result.summary)) == 1

    def test_fixed_k_calls_generator_k_times(self):
        dialogue = make_dialogue([f"turn number {i}" for i in range(9)])
        gen, calls = counting(make_echo_generator(dialogue, intents_for(dialogue)))
        probs = [0.1, 0.9, 0.3, 0.8, 0.2, 0.7, 0.4, 0.6, 0.5]
        result = summarize(dialogue, gen, mode="fixed", k=3, probs=probs)
        assert len(calls) == 3
        assert result.segmentation.n_segments == 3
        assert len(split_summary_sentences(result.summary)) == 3

    def test_auto_uses_model_when_no_probs(self):
        dialogue = make_dialogue(["plain turn", "other turn"])
        gen, calls = counting(make_echo_generator(dialogue, intents_for(dialogue)))
        result = summarize(dialogue, gen, mode="auto", model=zero_model())
        # All probabilities are 0.5, strictly above-threshold test fails: one segment.
        assert len(calls) == 1
        assert result.segmentation.cuts == ()

    def test_needs_model_or_probs(self):
        dialogue = make_dialogue(["a", "b"])
        gen = make_echo_generator(dialogue, intents_for(dialogue))
        with pytest.raises(ValueError, match="model or injected"):
            summarize(dialogue, gen, mode="auto")

    def test_generator_failure_carries_segment_index(self):
        dialogue = make_dialogue(["a", "b"])

        def broken(request):
            raise RuntimeError("boom")

        from sketchsum.generate import GeneratorError

        with pytest.raises(GeneratorError, match="segment 1") as err:
            summarize(dialogue, broken, mode="one")
        assert err.value.segment_index == 1

    def test_empty_sentence_skipped_with_warning(self):
        dialogue = make_dialogue(["a", "b"])

        def empty_summary(request):
            return GeneratorResponse("1 abstain TL;DR")

        result = summarize(dialogue, empty_summary, mode="one")
        assert result.summary == ""
        assert any("empty summary" in w for w in result.warnings)

    def test_missing_marker_warns_and_keeps_text(self):
        dialogue = make_dialogue(["a", "b"])

        def no_marker(request):
            return GeneratorResponse("just a sentence.")

        result = summarize(dialogue, no_marker, mode="one")
        assert result.summary == "just a sentence."
        assert any("no TL;DR" in w for w in result.warnings)

    def test_deterministic_end_to_end(self, fig1_sample):
        dialogue = fig1_sample.dialogue
        intents = intents_for(dialogue)
        keyphrases = {
            t.index: extract_key_phrases(t, None, fig1_sample.summary)
            for t in dialogue.turns
        }
        gen = make_echo_generator(dialogue, intents, keyphrases)
        first = summarize(dialogue, gen, mode="fixed", k=3, probs=[0.5] * 9)
        second = summarize(dialogue, gen, mode="fixed", k=3, probs=[0.5] * 9)
        assert first == second


class TestLongestKBaseline:
    def test_rent_dialogue_longest_turn(self, rent_dialogue):
        assert longest_k_baseline(rent_dialogue, 1) == (
            "John said I'm really sorry I'll have to go to the bank tomorrow "
            "and ask if they can re-send it to the right account."
        )

    def test_k_equals_n_renders_everything(self):
        dialogue = make_dialogue(["one", "two", "three"])
        out = longest_k_baseline(dialogue, 3)
        assert out == "A said one B said two A said three"

    def test_ties_take_earlier_turn(self):
        dialogue = make_dialogue(["aa bb cc", "dd", "ee ff gg"])
        assert longest_k_baseline(dialogue, 1) == "A said aa bb cc"

    def test_k_clamped_to_n(self):
        dialogue = make_dialogue(["one", "two"])
        assert longest_k_baseline(dialogue, 10) == "A said one B said two"

    def test_k_must_be_positive(self):
        with pytest.raises(ValueError):
            longest_k_baseline(make_dialogue(["x"]), 0)


class TestEchoGenerator:
    def test_phrases_become_the_sentence(self, fig1_sample):
        dialogue = fig1_sample.dialogue
        intents = intents_for(dialogue)
        keyphrases = {
            t.index: extract_key_phrases(t, None, fig1_sample.summary)
            for t in dialogue.turns
        }
        gen = make_echo_generator(dialogue, intents, keyphrases)
        from sketchsum.segment import insert_highlights

        response = gen(GeneratorRequest(insert_highlights(dialogue, (1, 4)).text))
        parts = split_generated(response.text)
        assert parts.found_marker
        assert parts.sketch.startswith("1 what")
        assert parts.summary.endswith(".")

    def test_no_phrases_falls_back_to_first_turn(self):
        dialogue = make_dialogue(["opening line", "closing line"])
        gen = make_echo_generator(dialogue, intents_for(dialogue))
        from sketchsum.segment import insert_highlights

        response = gen(GeneratorRequest(insert_highlights(dialogue, (2, 2)).text))
        assert split_generated(response.text).summary == "closing line."

    def test_output_always_splits_cleanly(self):
        rng = random.Random(4)
        for _ in range(10):
            dialogue = random_dialogue(rng, rng.randint(2, 6))
            gen = make_echo_generator(dialogue, intents_for(dialogue))
            from sketchsum.segment import insert_highlights

            response = gen(GeneratorRequest(insert_highlights(dialogue, (1, dialogue.n_turns)).text))
            assert split_generated(response.text).found_marker


class _StubHandler(BaseHTTPRequestHandler):
    behavior = "echo"
    requests_seen: list[dict] = []

    def do_POST(self):
        body = json.loads(self.rfile.read(int(self.headers["Content-Length"])))
        type(self).requests_seen.append(body)
        if self.behavior == "echo":
            payload = json.dumps({"text": f"sketch TL;DR echoed {body['text'][:10]}"})
            self.send_response(200)
            self.send_header("Content-Type", "application/json")
            self.end_headers()
            self.wfile.write(payload.encode())
        elif self.behavior == "error500":
            self.send_response(500)
            self.end_headers()
        elif self.behavior == "missing-field":
            self.send_response(200)
            self.send_header("Content-Type", "application/json")
            self.end_headers()
            self.wfile.write(json.dumps({"output": "wrong key"}).encode())
        elif self.behavior == "not-json":
            self.send_response(200)
            self.end_headers()
            self.wfile.write(b"plain text")

    def log_message(self, *args):
        pass


@pytest.fixture
def stub_server():
    server = HTTPServer(("127.0.0.1", 0), _StubHandler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    _StubHandler.requests_seen = []
    yield f"http://127.0.0.1:{server.server_port}/generate"
    server.shutdown()
    thread.join(timeout=2)


class TestRemoteGenerator:
    def request(self):
        return GeneratorRequest("<hl> A: hi <hl>", max_tokens=32)

    def test_round_trip(self, stub_server):
        _StubHandler.behavior = "echo"
        response = remote_generate(stub_server, self.request(), backoff=0.0)
        assert "echoed" in response.text
        assert _StubHandler.requests_seen[0]["max_tokens"] == 32

    def test_three_failures_then_error(self, stub_server):
        _StubHandler.behavior = "error500"
        with pytest.raises(GeneratorUnavailableError, match="3 attempts"):
            remote_generate(stub_server, self.request(), retries=3, backoff=0.0)
        assert len(_StubHandler.requests_seen) == 3

    def test_missing_text_field_is_protocol_error(self, stub_server):
        _StubHandler.behavior = "missing-field"
        with pytest.raises(GeneratorProtocolError, match="text"):
            remote_generate(stub_server, self.request(), backoff=0.0)

    def test_non_json_is_protocol_error(self, stub_server):
        _StubHandler.behavior = "not-json"
        with pytest.raises(GeneratorProtocolError, match="JSON"):
            remote_generate(stub_server, self.request(), backoff=0.0)

    def test_unreachable_endpoint(self):
        with pytest.raises(GeneratorUnavailableError):
            remote_generate(
                "http://127.0.0.1:1/generate", self.request(), retries=2, backoff=0.0, timeout=0.2
            )

    def test_factory_wraps_endpoint(self, stub_server):
        _StubHandler.behavior = "echo"
        gen = make_remote_generator(stub_server, backoff=0.0)
        assert "echoed" in gen(self.request()).text


class TestEmitTrainingPairs:
    def build(self, sample, scope="segment"):
        dialogue = sample.dialogue
        intents = intents_for(dialogue)
        keyphrases = {
            t.index: extract_key_phrases(t, None, sample.summary) for t in dialogue.turns
        }
        sketch = build_sketch(dialogue, intents, keyphrases)
        segmentation = align_segments(dialogue, sample.summary)
        return emit_training_pairs(sample, segmentation, sketch, scope)

    def test_fig1_first_pair(self, fig1_sample):
        pairs = self.build(fig1_sample)
        assert len(pairs) == 3
        first = pairs[0]
        lines = first.source.split("\n")
        assert lines[0].startswith("<hl> ")
        assert lines[3].endswith(" <hl>")
        assert first.target.startswith("1 what")
        assert "TL;DR Suzanne is at work" in first.target

    def test_single_sentence_summary(self):
        from sketchsum.corpus import DialogueSample, ReferenceSummary

        dialogue = make_dialogue(["alpha bravo", "charlie delta"])
        sample = DialogueSample(dialogue, ReferenceSummary(("alpha bravo charlie.",)))
        pairs = self.build(sample)
        assert len(pairs) == 1
        assert pairs[0].source.startswith("<hl> ")
        assert pairs[0].source.endswith(" <hl>")

    def test_pair_count_matches_sentences(self, fig1_sample):
        assert len(self.build(fig1_sample)) == len(fig1_sample.summary.sentences)

    def test_sources_identical_after_stripping(self, fig1_sample):
        pairs = self.build(fig1_sample)
        stripped = {strip_highlights(p.source) for p in pairs}
        assert len(stripped) == 1

    def test_full_scope_repeats_whole_sketch(self, fig1_sample):
        pairs = self.build(fig1_sample, scope="full")
        for pair in pairs:
            assert pair.target.startswith("1 what")

    def test_missing_summary_rejected(self):
        from sketchsum.corpus import DialogueSample

        dialogue = make_dialogue(["a", "b"])
        sample = DialogueSample(dialogue, None)
        from sketchsum.segment import Segmentation
        from sketchsum.sketch import Sketch, SketchEntry
        from sketchsum.intent import IntentLabel

        sketch = Sketch(
            entries=tuple(SketchEntry(i, IntentLabel.ABSTAIN) for i in (1, 2))
        )
        with pytest.raises(ValueError, match="no reference summary"):
            emit_training_pairs(sample, Segmentation((), 2), sketch)


class TestRequestResponseInvariants:
    def test_request_needs_one_hl_pair(self):
        with pytest.raises(ValueError):
            GeneratorRequest("no highlights")
        with pytest.raises(ValueError):
            GeneratorRequest("<hl> a <hl> b <hl>")

    def test_response_nonempty(self):
        with pytest.raises(ValueError):
            GeneratorResponse("")

    def test_training_pair_invariants(self):
        with pytest.raises(ValueError):
            TrainingPair("d", 1, "no markers", "sketch TL;DR text")
        with pytest.raises(ValueError):
            TrainingPair("d", 1, "<hl> a <hl>", "no marker")
