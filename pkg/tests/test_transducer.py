"""Token-automaton transduction: correctness against brute-force enumeration."""

import random

import pytest

from regexlm.errors import EngineError, ResourceLimitError
from regexlm.regex import compile_nfa, determinize, dfa_matches, minimize
from regexlm.transducer import accepts, automaton_to_text, export_dot, transduce
from regexlm.vocab import Vocabulary, build_trie

from .conftest import E, H, HE, T, TH, THE, TOY_EOS
from .oracles import automaton_accepted, brute_force_accepted, random_ast, random_vocabulary


class TestToyWord:
    def test_four_tokenizations(self, toy_automaton, toy_vocab):
        found = automaton_accepted(toy_automaton, max_len=4)
        assert found == {(THE,), (T, HE), (TH, E), (T, H, E)}
        for seq in found:
            assert toy_vocab.decode(seq) == b"The"

    def test_terminated_suffixes_eos(self, toy_automaton_terminated):
        found = automaton_accepted(toy_automaton_terminated, max_len=5)
        assert found == {
            (THE, TOY_EOS),
            (T, HE, TOY_EOS),
            (TH, E, TOY_EOS),
            (T, H, E, TOY_EOS),
        }

    def test_terminated_adds_exactly_one_state(
        self, toy_automaton, toy_automaton_terminated
    ):
        assert toy_automaton_terminated.num_states == toy_automaton.num_states + 1


class TestAccepts:
    def test_single_token_match(self, toy_automaton):
        assert accepts(toy_automaton, [THE])

    def test_incomplete_match(self, toy_automaton):
        assert not accepts(toy_automaton, [TH])

    def test_eos_semantics(self, toy_automaton, toy_automaton_terminated):
        assert accepts(toy_automaton_terminated, [T, H, E, TOY_EOS])
        assert not accepts(toy_automaton, [T, H, E, TOY_EOS])
        # EOS mid-sequence never matches.
        assert not accepts(toy_automaton_terminated, [TOY_EOS, THE, TOY_EOS])

    def test_unknown_id_fails_quietly(self, toy_automaton):
        assert not accepts(toy_automaton, [99])


class TestOracleEquivalence:
    @pytest.mark.parametrize("seed", [7, 8])
    def test_random_instances_match_brute_force(self, seed):
        rng = random.Random(seed)
        for _ in range(25):
            ast = random_ast(rng, depth=3)
            dfa = minimize(determinize(compile_nfa(ast)))
            vocab = random_vocabulary(rng)
            trie = build_trie(vocab)
            ta = transduce(dfa, vocab, trie)
            assert automaton_accepted(ta, 4) == brute_force_accepted(
                dfa_matches, dfa, vocab, 4
            ), (ast, vocab.entries)

    def test_deny_list_removes_tokens(self, toy_vocab, toy_trie):
        dfa = minimize(determinize(compile_nfa(random_ast(random.Random(0), 0))))
        from regexlm.regex import compile_regex

        dfa = compile_regex("The")
        ta = transduce(dfa, toy_vocab, toy_trie, deny_list={THE})
        found = automaton_accepted(ta, 4)
        assert (THE,) not in found
        assert found == {(T, HE), (TH, E), (T, H, E)}

    def test_denying_eos_when_terminated_is_error(self, toy_vocab, toy_trie):
        from regexlm.regex import compile_regex

        dfa = compile_regex("The")
        with pytest.raises(EngineError):
            transduce(dfa, toy_vocab, toy_trie, terminated=True, deny_list={TOY_EOS})

    def test_duplicate_string_tokens_get_parallel_edges(self):
        from regexlm.regex import compile_regex

        vocab = Vocabulary.from_strings(["ab", "ab"])
        trie = build_trie(vocab)
        ta = transduce(compile_regex("ab"), vocab, trie)
        assert automaton_accepted(ta, 2) == {(0,), (1,)}
        # Parallel edges share a successor.
        assert ta.edges[ta.start][0] == ta.edges[ta.start][1]


class TestPruning:
    def test_co_reachability_every_state_reaches_accept(self):
        from regexlm.regex import compile_regex

        rng = random.Random(5)
        for _ in range(25):
            ast = random_ast(rng, depth=3)
            dfa = minimize(determinize(compile_nfa(ast)))
            vocab = random_vocabulary(rng)
            ta = transduce(dfa, vocab, build_trie(vocab))
            if not ta.accepts:
                assert ta.num_states == 1  # start survives pruning
                continue
            # Reverse reachability from accepts must cover every state.
            reverse = {q: set() for q in range(ta.num_states)}
            for q, out in enumerate(ta.edges):
                for t in out.values():
                    reverse[t].add(q)
            live = set(ta.accepts)
            stack = list(ta.accepts)
            while stack:
                q = stack.pop()
                for p in reverse[q]:
                    if p not in live:
                        live.add(p)
                        stack.append(p)
            # Only the start state may survive without a path to an accept.
            assert set(range(ta.num_states)) - live <= {ta.start}

    def test_empty_language_automaton_is_start_only(self, toy_vocab, toy_trie):
        from regexlm.regex import compile_regex

        # 'q' is not spellable with the toy vocabulary.
        ta = transduce(compile_regex("q"), toy_vocab, toy_trie)
        assert ta.num_states == 1
        assert not ta.accepts
        assert not ta.edges[0]

    def test_state_cap(self, toy_vocab, toy_trie):
        from regexlm.regex import compile_regex

        with pytest.raises(ResourceLimitError):
            transduce(compile_regex("The"), toy_vocab, toy_trie, max_states=1)


class TestSerialization:
    def test_transduction_is_deterministic(self, toy_vocab, toy_trie):
        from regexlm.regex import compile_regex

        one = automaton_to_text(transduce(compile_regex("The"), toy_vocab, toy_trie))
        two = automaton_to_text(transduce(compile_regex("The"), toy_vocab, toy_trie))
        assert one == two

    def test_dfa_state_tags_present(self, toy_automaton_terminated):
        text = automaton_to_text(toy_automaton_terminated)
        assert "dfa=sink accept" in text


class TestDotExport:
    def test_toy_dot_has_four_accepting_paths(self, toy_automaton, toy_vocab):
        dot = export_dot(toy_automaton, toy_vocab)
        edges = _parse_dot_edges(dot)
        # Count root-to-accept paths in the rendered graph.
        accept_nodes = {f"t{q}" for q in toy_automaton.accepts}

        def count_paths(node):
            if node in accept_nodes:
                return 1
            return sum(count_paths(dst) for dst in edges.get(node, []))

        assert count_paths(f"t{toy_automaton.start}") == 4

    def test_empty_language_dot_start_only(self, toy_vocab, toy_trie):
        from regexlm.regex import compile_regex

        ta = transduce(compile_regex("q"), toy_vocab, toy_trie)
        dot = export_dot(ta, toy_vocab)
        node_lines = [l for l in dot.splitlines() if "shape=circle" in l]
        assert len(node_lines) == 1
        assert _parse_dot_edges(dot) == {}

    def test_node_edge_counts_round_trip(self, toy_automaton_terminated, toy_vocab):
        ta = toy_automaton_terminated
        dot = export_dot(ta, toy_vocab)
        node_lines = [
            l
            for l in dot.splitlines()
            if ("shape=circle" in l or "shape=doublecircle" in l)
        ]
        assert len(node_lines) == ta.num_states
        edges = _parse_dot_edges(dot)
        assert sum(len(v) for v in edges.values()) == ta.num_edges

    def test_edge_labels_carry_id_and_bytes(self, toy_automaton, toy_vocab):
        dot = export_dot(toy_automaton, toy_vocab)
        assert 'label="5:The"' in dot


def _parse_dot_edges(dot: str) -> dict[str, list[str]]:
    """Edges of the emitted graph, ignoring the start-marker arrow."""
    out: dict[str, list[str]] = {}
    for line in dot.splitlines():
        line = line.strip()
        if "->" not in line or line.startswith("start"):
            continue
        src, rest = line.split("->")
        dst = rest.split("[")[0].strip().rstrip(";")
        out.setdefault(src.strip(), []).append(dst)
    return out


class TestEdgeCap:
    def test_edge_cap_enforced(self, toy_vocab, toy_trie):
        from regexlm.regex import compile_regex

        with pytest.raises(ResourceLimitError):
            transduce(compile_regex("The"), toy_vocab, toy_trie, max_edges=2)


class TestTerminatedOracleEquivalence:
    def test_terminated_accepts_exactly_eos_suffixed_matches(self):
        from regexlm.regex import compile_nfa, determinize, minimize

        rng = random.Random(21)
        for _ in range(25):
            ast = random_ast(rng, depth=3)
            dfa = minimize(determinize(compile_nfa(ast)))
            vocab = random_vocabulary(rng)
            trie = build_trie(vocab)
            ta = transduce(dfa, vocab, trie, terminated=True)
            got = automaton_accepted(ta, 5)
            base = brute_force_accepted(dfa_matches, dfa, vocab, 4)
            expected = {seq + (vocab.eos_id,) for seq in base}
            assert got == expected, (ast, vocab.entries)

    def test_deny_list_oracle_equivalence(self):
        from regexlm.regex import compile_nfa, determinize, minimize
        from regexlm.vocab import Vocabulary

        rng = random.Random(22)
        for _ in range(25):
            ast = random_ast(rng, depth=3)
            dfa = minimize(determinize(compile_nfa(ast)))
            vocab = random_vocabulary(rng)
            trie = build_trie(vocab)
            denied = {
                t
                for t in range(vocab.size)
                if t != vocab.eos_id and rng.random() < 0.3
            }
            ta = transduce(dfa, vocab, trie, deny_list=denied)
            # Oracle: same enumeration over the vocabulary with denied ids
            # masked out (empty bytes cannot appear, so rebuild without them).
            kept = [t for t in range(vocab.size) if t not in denied]
            remap = {old: new for new, old in enumerate(kept)}
            small = Vocabulary(
                entries=tuple(vocab.entries[t] for t in kept),
                eos_id=remap[vocab.eos_id],
            )
            expected_small = brute_force_accepted(dfa_matches, dfa, small, 4)
            inverse = {new: old for old, new in remap.items()}
            expected = {
                tuple(inverse[t] for t in seq) for seq in expected_small
            }
            assert automaton_accepted(ta, 4) == expected, (ast, denied)
