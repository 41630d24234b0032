"""Desk-scale experiment fixtures shared by harness and acceptance tests."""

from __future__ import annotations

from dataclasses import dataclass

from regexlm.harness import MockValidator
from regexlm.scorers import FixtureScorer, NGramModel, train_ngram
from regexlm.vocab import Vocabulary, build_trie, greedy_tokenize

# --- memorization: synthetic URL world --------------------------------------

SITES = [
    ("pinterest", 10),
    ("youtube", 8),
    ("facebook", 7),
    ("twitter", 5),
    ("github", 4),
    ("reddit", 4),
    ("wikipedia", 3),
    ("amazon", 3),
    ("google", 2),
    ("instagram", 2),
    ("tripadvisor", 1),
    ("netflix", 1),
]

PATHS = ["", "/", "/watch", "/pin", "/new"]

PROSE_TOKENS = [" is", " a", " site", " for", " videos", "."]

# Trailing prose attached to a URL mention in the training text; an
# unconstrained sampler overruns into these, producing malformed "URLs".
PROSE_SUFFIXES = [
    [" is", " a", " site"],
    [" for", " videos", "."],
    [" is", " a", " site", " for", " videos", "."],
]


@dataclass
class UrlWorld:
    vocab: Vocabulary
    scorer: NGramModel
    corpus_urls: list[str]          # 50 training URLs (with repetition)
    real_urls: set[str]             # every site x path combination: resolves
    validator: MockValidator


def build_url_world(
    *, alpha: float = 0.005, order: int = 2, timeout_latency_s: float = 10.0
) -> UrlWorld:
    """A small web: 12 sites x 7 paths resolve with status 200, everything
    else times out. The scorer is an n-gram trained on 50 weighted URL
    mentions, two in five of which continue into prose, so unconstrained
    sampling regularly overruns the URL while every site/path combination
    still carries real probability mass."""
    tokens = ["https://", "www.", ".com"]
    tokens += [site for site, _ in SITES]
    tokens += [p for p in PATHS if p]
    tokens += PROSE_TOKENS
    vocab = Vocabulary.from_strings(tokens)
    trie = build_trie(vocab)

    corpus_urls: list[str] = []
    path_pool = ["", "/", "", "/watch", "", "/", "/pin", "", "/new", "/"]
    i = 0
    for site, weight in SITES:
        for _ in range(weight):
            corpus_urls.append(f"https://www.{site}.com{path_pool[i % len(path_pool)]}")
            i += 1
    assert len(corpus_urls) == 50

    token_of = {t: i for i, t in enumerate(tokens)}
    sequences = []
    for i, url in enumerate(corpus_urls):
        seq = greedy_tokenize(vocab, trie, url.encode())
        # Period 3 is coprime to the path cycle, so every path kind gets a
        # mix of end-of-text and prose continuations.
        if i % 3 == 1:
            seq += [token_of[t] for t in PROSE_SUFFIXES[i % len(PROSE_SUFFIXES)]]
        sequences.append(seq + [vocab.eos_id])
    scorer = train_ngram(sequences, order=order, alpha=alpha, vocab_size=vocab.size)

    real_urls = {
        f"https://www.{site}.com{path}" for site, _ in SITES for path in PATHS
    }
    validator = MockValidator(
        table={url: 200 for url in real_urls},
        default="timeout",
        ok_latency_s=0.05,
        timeout_latency_s=timeout_latency_s,
    )
    return UrlWorld(
        vocab=vocab,
        scorer=scorer,
        corpus_urls=corpus_urls,
        real_urls=real_urls,
        validator=validator,
    )


# --- language understanding: rigged 20-example fixture ----------------------

DISTRACTOR = "pizza"  # never appears in any context


@dataclass
class LambadaWorld:
    vocab: Vocabulary
    scorer: FixtureScorer
    dataset: list[tuple[str, str]]   # (context, target)
    distracted: list[int]            # example indices where baseline misses


def _spread(probs: list[float], assignments: dict[int, float]) -> list[float]:
    """Fill `assignments` and spread the leftover mass over the zero entries."""
    for j, p in assignments.items():
        probs[j] = p
    rest = [j for j, p in enumerate(probs) if p == 0.0]
    leftover = 1.0 - sum(probs)
    for j in rest:
        probs[j] = leftover / len(rest)
    return probs


def build_lambada_world() -> LambadaWorld:
    """Twenty passages rigged so the target is always the most probable
    context word. On every fourth example the vocabulary-wide argmax is the
    out-of-context word "pizza", which only the unconstrained baseline can
    produce; the constrained queries stay perfect while baseline misses."""
    nouns = [
        "dog", "cat", "ship", "tree", "song", "door", "fish", "star", "road",
        "book", "rain", "wolf", "king", "bird", "rock", "lamp", "wind", "leaf",
        "moon", "bell",
    ]
    verbs = ["saw", "fed", "found", "heard"]

    word_tokens = [" " + w for w in nouns + verbs]
    word_tokens += [" " + DISTRACTOR, " the", " near", " it", " boy", "A", "."]
    chars = sorted({c for w in word_tokens for c in w} - set(word_tokens))
    vocab = Vocabulary.from_strings(word_tokens + chars)
    trie = build_trie(vocab)
    tid = {entry.decode(): i for i, entry in enumerate(vocab.entries[:-1])}
    scorer = FixtureScorer(vocab_size=vocab.size)

    dataset: list[tuple[str, str]] = []
    distracted: list[int] = []
    for i, noun in enumerate(nouns):
        verb = verbs[i % len(verbs)]
        other = nouns[(i + 1) % len(nouns)]
        context = f"A boy {verb} the {noun} near it. A boy {verb} the"
        dataset.append((context, noun))
        ctx_tokens = tuple(greedy_tokenize(vocab, trie, context.encode()))
        if i % 4 == 0:
            distracted.append(i)
            assignments = {
                tid[" " + DISTRACTOR]: 0.55,
                tid[" " + noun]: 0.30,
                tid[" " + other]: 0.02,
            }
        else:
            assignments = {tid[" " + noun]: 0.60, tid[" " + other]: 0.05}
        scorer.set_probs(ctx_tokens, _spread([0.0] * vocab.size, assignments))
        # After the target word, end-of-sequence dominates.
        after = ctx_tokens + (tid[" " + noun],)
        scorer.set_probs(
            after, _spread([0.0] * vocab.size, {vocab.eos_id: 0.9})
        )
    return LambadaWorld(
        vocab=vocab, scorer=scorer, dataset=dataset, distracted=distracted
    )


def build_stopword_example():
    """A passage whose argmax context word is the stop word "it": the word
    query predicts "it" (miss) while no_stop predicts the target "dog"."""
    world = build_lambada_world()
    vocab, scorer = world.vocab, world.scorer
    trie = build_trie(vocab)
    tid = {entry.decode(): i for i, entry in enumerate(vocab.entries[:-1])}
    context = "A boy saw the dog near it. A boy saw"
    target = "dog"
    ctx_tokens = tuple(greedy_tokenize(vocab, trie, context.encode()))
    scorer.set_probs(
        ctx_tokens,
        _spread([0.0] * vocab.size, {tid[" it"]: 0.55, tid[" dog"]: 0.30}),
    )
    for word in (" it", " dog"):
        after = ctx_tokens + (tid[word],)
        scorer.set_probs(after, _spread([0.0] * vocab.size, {vocab.eos_id: 0.9}))
    return vocab, scorer, context, target


# --- bias: hand-built joint over genders x professions ----------------------

PROFESSIONS = ("medicine", "engineering", "art")


@dataclass
class BiasWorld:
    vocab: Vocabulary
    scorer: FixtureScorer
    genders: tuple[str, str]
    professions: tuple[str, ...]
    gender_probs: dict[str, float]
    profession_probs: dict[str, dict[str, float]]


def build_bias_world(symmetric: bool = False) -> BiasWorld:
    """Joint distribution: P(gender) x P(profession | gender) staged into a
    fixture scorer over one-token-per-segment paths."""
    genders = ("man", "woman")
    gender_probs = {"man": 0.7, "woman": 0.3}
    if symmetric:
        profession_probs = {
            "man": {"medicine": 0.5, "engineering": 0.3, "art": 0.2},
            "woman": {"medicine": 0.5, "engineering": 0.3, "art": 0.2},
        }
    else:
        profession_probs = {
            "man": {"medicine": 0.2, "engineering": 0.6, "art": 0.2},
            "woman": {"medicine": 0.6, "engineering": 0.1, "art": 0.3},
        }

    tokens = ["The ", "man", "woman", " was trained in "] + list(PROFESSIONS)
    vocab = Vocabulary.from_strings(tokens)
    tid = {t: i for i, t in enumerate(tokens)}
    scorer = FixtureScorer(vocab_size=vocab.size)

    def vector(assignments: dict[int, float]) -> list[float]:
        probs = [0.0] * vocab.size
        assigned = sum(assignments.values())
        rest = [j for j in range(vocab.size) if j not in assignments]
        for j, p in assignments.items():
            probs[j] = p
        for j in rest:
            probs[j] = (1.0 - assigned) / len(rest)
        return probs

    scorer.set_probs((), vector({tid["The "]: 0.95}))
    scorer.set_probs(
        (tid["The "],),
        vector(
            {
                tid["man"]: gender_probs["man"] * 0.98,
                tid["woman"]: gender_probs["woman"] * 0.98,
            }
        ),
    )
    for g in genders:
        stem = (tid["The "], tid[g])
        scorer.set_probs(stem, vector({tid[" was trained in "]: 0.97}))
        ctx = stem + (tid[" was trained in "],)
        scorer.set_probs(
            ctx,
            vector(
                {tid[p]: profession_probs[g][p] * 0.96 for p in PROFESSIONS}
            ),
        )
    return BiasWorld(
        vocab=vocab,
        scorer=scorer,
        genders=genders,
        professions=PROFESSIONS,
        gender_probs=gender_probs,
        profession_probs=profession_probs,
    )
