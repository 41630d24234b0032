"""Optional real-model checks (GPT-2 small). Skipped when weights are absent.

Run them by caching the model first (network required once):

    python -c "from transformers import AutoModelForCausalLM as M; M.from_pretrained('gpt2')"
    pytest server/tests/test_real_model.py -v
"""

import os
import threading
import urllib.request

import numpy as np
import pytest

from regexlm.harness import UnderstandingConfig, run_language_understanding
from regexlm.scorers import RemoteScorer, logsumexp
from regexlm.vocab import parse_vocabulary

from scorer_server import ServerConfig, make_server

os.environ.setdefault("HF_HUB_OFFLINE", "1")  # fail fast when not cached


def _load_gpt2():
    from scorer_server.backends import HFBackend

    return HFBackend("gpt2")


gpt2_backend = None
try:
    gpt2_backend = _load_gpt2()
except Exception:  # no cached weights, no network
    pass

requires_gpt2 = pytest.mark.skipif(
    gpt2_backend is None, reason="GPT-2 small weights not available offline"
)


@pytest.fixture(scope="module")
def gpt2_url():
    config = ServerConfig(backend_spec="hf:gpt2", port=0)
    server = make_server(config)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    server.install_backend(gpt2_backend)
    yield f"http://127.0.0.1:{server.server_port}"
    server.shutdown()


@requires_gpt2
class TestGpt2Protocol:
    def test_served_vocab_size_50257(self, gpt2_url):
        with urllib.request.urlopen(gpt2_url + "/v1/vocab", timeout=60) as resp:
            vocab = parse_vocabulary(resp.read().decode("utf-8"))
        assert vocab.size == 50257
        assert vocab.entries[vocab.eos_id] == b""

    def test_logprobs_normalized(self, gpt2_url):
        scorer = RemoteScorer(gpt2_url, timeout_s=120.0)
        vec = scorer.next_logprobs([])
        assert vec.shape == (50257,)
        assert abs(logsumexp(vec)) < 1e-12

    def test_https_prefix_argmax_is_url_like(self, gpt2_url):
        # Pin after the first verified run: the argmax continuation of
        # "https://" should start a plausible URL (letters or "www").
        scorer = RemoteScorer(gpt2_url, timeout_s=120.0)
        vocab = scorer.vocabulary()
        prefix = gpt2_backend.tokenizer.encode("https://")
        vec = scorer.next_logprobs(prefix)
        top = vocab.entries[int(np.argmax(vec))].decode("utf-8", "replace")
        assert top.strip("/").isprintable() and top not in ("", " ")

    def test_lambada_style_accuracy_band(self, gpt2_url):
        # Last-word accuracy on the first 100 rows; requires a LAMBADA
        # JSON-lines file ({"context", "target"}) pointed to by env var.
        dataset_path = os.environ.get("LAMBADA_JSONL")
        if not dataset_path or not os.path.exists(dataset_path):
            pytest.skip("set LAMBADA_JSONL to a dataset file to run this check")
        from regexlm.harness import load_dataset

        scorer = RemoteScorer(gpt2_url, timeout_s=600.0)
        vocab = scorer.vocabulary()
        rows = load_dataset(dataset_path)[:100]
        report = run_language_understanding(
            scorer, vocab, rows, UnderstandingConfig(max_examples=100)
        )
        # Expected GPT-2-small accuracy bands (+/- 10 percentage points).
        assert abs(report.accuracies["baseline"] - 0.35) <= 0.10
        assert abs(report.accuracies["word"] - 0.45) <= 0.10
        assert abs(report.accuracies["terminated"] - 0.43) <= 0.10
        assert abs(report.accuracies["no_stop"] - 0.48) <= 0.10
        assert report.accuracies["no_stop"] > report.accuracies["baseline"]
