"""regexlm: regex-constrained enumeration and sampling over token LMs.

Pipeline: a pattern compiles to a byte-level DFA; the DFA is transduced into
a token-level automaton for a given vocabulary; traversal walks that
automaton against a next-token scorer, either lowest-cost-first (most
probable matches stream out first, no duplicates) or by constrained random
sampling. Experiment harnesses on top measure memorization, last-word
prediction accuracy, and response bias.
"""

from .errors import EngineError, ResourceLimitError
from .regex import (
    Dfa,
    Nfa,
    RegexSyntaxError,
    compile_nfa,
    compile_regex,
    determinize,
    dfa_matches,
    escape,
    minimize,
    parse_regex,
)
from .scorers import (
    FixtureScorer,
    NGramModel,
    RemoteScorer,
    Scorer,
    TopKFilter,
    UniformScorer,
    top_k_set,
    train_ngram,
    uniform_logprobs,
)
from .transducer import TokenAutomaton, accepts, export_dot, transduce
from .traversal import (
    DeadEnd,
    MatchResult,
    QuerySpec,
    SearchNode,
    decode,
    enumerate_shortest,
    sample,
)
from .vocab import (
    TokenTrie,
    Vocabulary,
    VocabularyError,
    build_trie,
    greedy_tokenize,
    load_vocabulary,
    save_vocabulary,
)

__version__ = "0.1.0"

__all__ = [
    "DeadEnd",
    "Dfa",
    "EngineError",
    "FixtureScorer",
    "MatchResult",
    "NGramModel",
    "Nfa",
    "QuerySpec",
    "RegexSyntaxError",
    "RemoteScorer",
    "ResourceLimitError",
    "Scorer",
    "SearchNode",
    "TokenAutomaton",
    "TokenTrie",
    "TopKFilter",
    "UniformScorer",
    "Vocabulary",
    "VocabularyError",
    "accepts",
    "build_trie",
    "compile_nfa",
    "compile_regex",
    "decode",
    "determinize",
    "dfa_matches",
    "enumerate_shortest",
    "escape",
    "export_dot",
    "greedy_tokenize",
    "load_vocabulary",
    "minimize",
    "parse_regex",
    "sample",
    "save_vocabulary",
    "top_k_set",
    "train_ngram",
    "transduce",
    "uniform_logprobs",
]
