"""Shared fixtures: the toy split-word vocabulary and its staged scorer."""

from __future__ import annotations

import pytest

from regexlm import FixtureScorer, Vocabulary, build_trie, compile_regex, transduce

# Toy vocabulary where "The" tokenizes four ways: [The], [T,he], [Th,e], [T,h,e].
TOY_TOKENS = ["T", "h", "e", "Th", "he", "The"]
T, H, E, TH, HE, THE = range(6)
TOY_EOS = 6


@pytest.fixture
def toy_vocab() -> Vocabulary:
    return Vocabulary.from_strings(TOY_TOKENS)


@pytest.fixture
def toy_trie(toy_vocab):
    return build_trie(toy_vocab)


@pytest.fixture
def toy_automaton(toy_vocab, toy_trie):
    return transduce(compile_regex("The"), toy_vocab, toy_trie)


@pytest.fixture
def toy_automaton_terminated(toy_vocab, toy_trie):
    return transduce(compile_regex("The"), toy_vocab, toy_trie, terminated=True)


def staged_toy_scorer() -> FixtureScorer:
    """Per-prefix probabilities for the toy automaton.

    Designed so the four tokenizations have distinct path probabilities:
      [The] = 0.40
      [T,he] = 0.30 * 0.60 = 0.18
      [Th,e] = 0.20 * 0.90 = 0.18  (cost differs from [T,he] in float)
      [T,h,e] = 0.30 * 0.30 * 0.80 = 0.072
    and, under top-k=2 against the full vocabulary, "Th" falls outside the
    top 2 at the root, making [Th,e] unreachable while everything else stays.
    """
    scorer = FixtureScorer(vocab_size=7)
    #                      T     h      e      Th    he     The   EOS
    scorer.set_probs((), [0.30, 0.025, 0.025, 0.20, 0.025, 0.40, 0.025])
    scorer.set_probs((T,), [0.02, 0.30, 0.02, 0.02, 0.60, 0.02, 0.02])
    scorer.set_probs((TH,), [0.02, 0.02, 0.90, 0.02, 0.01, 0.02, 0.01])
    scorer.set_probs((T, H), [0.04, 0.04, 0.80, 0.04, 0.04, 0.02, 0.02])
    return scorer


@pytest.fixture
def toy_scorer() -> FixtureScorer:
    return staged_toy_scorer()
