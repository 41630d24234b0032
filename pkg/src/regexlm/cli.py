"""Command-line interface.

Subcommands: compile, enumerate, sample, eval-mem, eval-lambada, eval-bias.
Data goes to stdout (JSON-lines for result streams), diagnostics to stderr.
Exit codes: 0 success, 1 usage or config error, 2 runtime error.

Scorer specs are flat strings so configs stay portable:

    uniform
    ngram:<corpus.jsonl>:<order>:<alpha>     corpus lines are JSON id arrays
    fixture:<table.json>
    remote:<http://host:port>
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

from .errors import EngineError
from .harness import (
    BiasConfig,
    LiveValidator,
    MemorizationConfig,
    MockValidator,
    UnderstandingConfig,
    ValidationConfig,
    load_dataset,
    run_bias,
    run_language_understanding,
    run_memorization,
    throughput_report,
    validate_urls,
)
from .regex import compile_regex, dfa_to_dot
from .scorers import FixtureScorer, RemoteScorer, Scorer, UniformScorer, train_ngram
from .transducer import automaton_to_text, export_dot, transduce
from .traversal import QuerySpec, enumerate_shortest, sample
from .vocab import Vocabulary, build_trie, load_vocabulary


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # exit 1, not argparse's 2
        raise _UsageError(message)


def build_scorer(spec: str, vocab: Vocabulary | None) -> Scorer:
    kind, _, rest = spec.partition(":")
    if kind == "uniform":
        if vocab is None:
            raise _UsageError("uniform scorer needs --vocab")
        return UniformScorer(vocab.size)
    if kind == "ngram":
        try:
            path, order, alpha = rest.rsplit(":", 2)
        except ValueError as exc:
            raise _UsageError(f"bad ngram spec {spec!r}: expected ngram:<path>:<order>:<alpha>") from exc
        if vocab is None:
            raise _UsageError("ngram scorer needs --vocab")
        corpus = []
        for line_no, line in enumerate(Path(path).read_text("utf-8").splitlines(), 1):
            if not line.strip():
                continue
            row = json.loads(line)
            if not isinstance(row, list):
                raise EngineError(f"{path} line {line_no}: expected a JSON array")
            corpus.append([int(t) for t in row])
        return train_ngram(corpus, order=int(order), alpha=float(alpha), vocab_size=vocab.size)
    if kind == "fixture":
        scorer = FixtureScorer.from_file(rest)
        if vocab is not None and scorer.vocab_size != vocab.size:
            raise _UsageError(
                f"fixture vocab_size {scorer.vocab_size} != vocabulary size {vocab.size}"
            )
        return scorer
    if kind == "remote":
        return RemoteScorer(rest)
    raise _UsageError(f"unknown scorer spec {spec!r}")


def _parse_id_list(text: str) -> tuple[int, ...]:
    text = text.strip()
    if not text:
        return ()
    return tuple(int(part) for part in text.split(","))


def _build_automaton(args, vocab: Vocabulary):
    trie = build_trie(vocab)
    dfa = compile_regex(args.pattern, max_repeat=args.max_repeat)
    return dfa, transduce(
        dfa,
        vocab,
        trie,
        terminated=args.terminated,
        deny_list=frozenset(args.deny_id or ()),
    )


def cmd_compile(args) -> int:
    vocab = load_vocabulary(args.vocab)
    dfa, automaton = _build_automaton(args, vocab)
    if args.out:
        Path(args.out).write_text(automaton_to_text(automaton), encoding="utf-8")
    if args.dot:
        Path(args.dot).write_text(export_dot(automaton, vocab), encoding="utf-8")
    if args.dfa_dot:
        Path(args.dfa_dot).write_text(dfa_to_dot(dfa), encoding="utf-8")
    print(f"states={automaton.num_states} edges={automaton.num_edges}")
    return 0


def cmd_enumerate(args) -> int:
    vocab = load_vocabulary(args.vocab)
    scorer = build_scorer(args.scorer, vocab)
    _, automaton = _build_automaton(args, vocab)
    spec = QuerySpec(
        automaton=automaton,
        prompt=_parse_id_list(args.prompt_tokens),
        top_k=args.top_k,
        topk_scope=args.topk_scope,
        max_match_tokens=args.max_tokens,
    )
    for result in enumerate_shortest(spec, scorer, vocab, limit=args.limit):
        print(result.to_json_line())
    return 0


def cmd_sample(args) -> int:
    vocab = load_vocabulary(args.vocab)
    scorer = build_scorer(args.scorer, vocab)
    _, automaton = _build_automaton(args, vocab)
    if args.prompt_choice:
        prompt = [list(_parse_id_list(c)) for c in args.prompt_choice]
    else:
        prompt = list(_parse_id_list(args.prompt_tokens))
    spec = QuerySpec(
        automaton=automaton,
        prompt=prompt,
        top_k=args.top_k,
        topk_scope=args.topk_scope,
        max_match_tokens=args.max_tokens,
        mode="sample",
        seed=args.seed,
    )
    outcomes = sample(spec, scorer, vocab, args.num_samples, retry_budget=args.retry_budget)
    for outcome in outcomes:
        if hasattr(outcome, "to_json_line"):
            print(outcome.to_json_line())
        else:
            print(json.dumps({"dead_end": True, "attempts": outcome.attempts}))
    return 0


def _load_config(path: str) -> tuple[dict, str]:
    raw = Path(path).read_bytes()
    try:
        obj = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise _UsageError(f"config {path}: invalid JSON ({exc.msg})") from exc
    if not isinstance(obj, dict):
        raise _UsageError(f"config {path}: expected a JSON object")
    return obj, hashlib.sha256(raw).hexdigest()


def _require(obj: dict, key: str, path: str):
    if key not in obj:
        raise _UsageError(f"config {path}: missing required key '{key}'")
    return obj[key]


def _write_manifest(outdir: Path, command: str, seed, config_hash: str,
                    outputs: list[str], summary: dict) -> None:
    manifest = {
        "command": command,
        "seed": seed,
        "config_sha256": config_hash,
        "outputs": sorted(outputs),
        "summary": summary,
    }
    (outdir / "manifest.json").write_text(
        json.dumps(manifest, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )


def _build_validation(obj: dict, path: str) -> ValidationConfig:
    mode = obj.get("mode", "mock")
    timeout_s = float(obj.get("timeout_s", 10.0))
    max_concurrency = int(obj.get("max_concurrency", 32))
    if mode == "mock":
        validator = MockValidator(
            table=obj.get("table", {}),
            default=obj.get("default", 404),
            ok_latency_s=float(obj.get("ok_latency_s", 0.05)),
            fail_latency_s=float(obj.get("fail_latency_s", 0.25)),
            timeout_latency_s=float(obj.get("timeout_latency_s", timeout_s)),
        )
    elif mode == "live":
        validator = LiveValidator(
            timeout_s=timeout_s,
            user_agent=obj.get("user_agent", LiveValidator.user_agent),
        )
    else:
        raise _UsageError(f"config {path}: validation.mode must be 'mock' or 'live'")
    return ValidationConfig(
        validator=validator, timeout_s=timeout_s, max_concurrency=max_concurrency
    )


def cmd_eval_mem(args) -> int:
    obj, config_hash = _load_config(args.config)
    vocab = load_vocabulary(_require(obj, "vocab", args.config))
    scorer = build_scorer(_require(obj, "scorer", args.config), vocab)
    validation = _build_validation(obj.get("validation", {}), args.config)
    config = MemorizationConfig.from_dict(
        {
            k: v
            for k, v in obj.items()
            if k not in ("vocab", "scorer", "validation")
        }
    )
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)

    records = run_memorization(scorer, vocab, config)
    validate_urls(records, validation)
    report = throughput_report(records)

    (outdir / "throughput.csv").write_text(report.to_csv(), encoding="utf-8")
    with (outdir / "records.jsonl").open("w", encoding="utf-8") as fh:
        for r in records:
            fh.write(
                json.dumps(
                    {
                        "url": r.url,
                        "source": r.source,
                        "emission_index": r.emission_index,
                        "emitted_at": r.emitted_at,
                        "status": r.status,
                        "valid": r.valid,
                        "duplicate": r.duplicate,
                        "validated_at": r.validated_at,
                    }
                )
                + "\n"
            )
    summary = {
        s.arm: {
            "unique_valid": s.unique_valid,
            "urls_per_s": round(s.urls_per_s, 6),
            "ratio_vs_best_baseline": (
                None
                if s.ratio_vs_best_baseline is None
                else round(s.ratio_vs_best_baseline, 6)
            ),
        }
        for s in report.summaries
    }
    _write_manifest(
        outdir, "eval-mem", config.seed, config_hash,
        ["throughput.csv", "records.jsonl", "manifest.json"], summary,
    )
    print(f"eval-mem: {len(records)} records -> {outdir}")
    return 0


def cmd_eval_lambada(args) -> int:
    obj, config_hash = _load_config(args.config)
    vocab = load_vocabulary(_require(obj, "vocab", args.config))
    scorer = build_scorer(_require(obj, "scorer", args.config), vocab)
    dataset = load_dataset(_require(obj, "dataset", args.config))
    config = UnderstandingConfig.from_dict(
        {k: v for k, v in obj.items() if k not in ("vocab", "scorer", "dataset")}
    )
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)

    report = run_language_understanding(scorer, vocab, dataset, config)
    (outdir / "accuracy.csv").write_text(report.to_csv(), encoding="utf-8")
    with (outdir / "examples.jsonl").open("w", encoding="utf-8") as fh:
        for ex in report.examples:
            fh.write(
                json.dumps(
                    {
                        "context": ex.context,
                        "target": ex.target_word,
                        "predictions": ex.predictions,
                    }
                )
                + "\n"
            )
    _write_manifest(
        outdir, "eval-lambada", None, config_hash,
        ["accuracy.csv", "examples.jsonl", "manifest.json"],
        {k: round(v, 6) for k, v in report.accuracies.items()},
    )
    print(
        "eval-lambada: "
        + " ".join(f"{k}={v:.2%}" for k, v in report.accuracies.items())
        + f" -> {outdir}"
    )
    return 0


def cmd_eval_bias(args) -> int:
    obj, config_hash = _load_config(args.config)
    vocab = load_vocabulary(_require(obj, "vocab", args.config))
    scorer = build_scorer(_require(obj, "scorer", args.config), vocab)
    config = BiasConfig.from_dict(
        {k: v for k, v in obj.items() if k not in ("vocab", "scorer")}
    )
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)

    estimate = run_bias(scorer, vocab, config)
    (outdir / "bias.csv").write_text(estimate.to_csv(), encoding="utf-8")
    _write_manifest(
        outdir, "eval-bias", config.seed, config_hash,
        ["bias.csv", "manifest.json"],
        {
            "dead_end_rate": estimate.dead_end_rate,
            "gender_marginals": {
                g: round(m, 6) for g, m in estimate.gender_marginals().items()
            },
        },
    )
    print(f"eval-bias: dead_end_rate={estimate.dead_end_rate:.4f} -> {outdir}")
    return 0


def _add_automaton_args(p: _Parser) -> None:
    p.add_argument("pattern", help="regex pattern (anchored full match)")
    p.add_argument("--vocab", required=True, help="vocabulary file path")
    p.add_argument("--terminated", action="store_true",
                   help="require end-of-sequence after the match")
    p.add_argument("--deny-id", type=int, action="append",
                   help="token id to exclude from transduction (repeatable)")
    p.add_argument("--max-repeat", type=int, default=256,
                   help="cap for {m,n} repeat bounds")


def _add_traversal_args(p: _Parser) -> None:
    p.add_argument("--scorer", required=True, help="scorer spec string")
    p.add_argument("--top-k", type=int, default=None)
    p.add_argument("--topk-scope", choices=["full_vocab", "allowed_only"],
                   default="full_vocab")
    p.add_argument("--max-tokens", type=int, default=64,
                   help="match-length budget in tokens")
    p.add_argument("--prompt-tokens", default="",
                   help="comma-separated prompt token ids")


def make_parser() -> _Parser:
    parser = _Parser(prog="regexlm", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("compile", help="compile a pattern to a token automaton")
    _add_automaton_args(p)
    p.add_argument("--out", help="write canonical automaton serialization here")
    p.add_argument("--dot", help="write token-automaton DOT here")
    p.add_argument("--dfa-dot", help="write byte-DFA DOT here")
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("enumerate", help="stream matches most-probable-first")
    _add_automaton_args(p)
    _add_traversal_args(p)
    p.add_argument("--limit", type=int, default=None)
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("sample", help="draw constrained random samples")
    _add_automaton_args(p)
    _add_traversal_args(p)
    p.add_argument("--num-samples", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--retry-budget", type=int, default=100)
    p.add_argument("--prompt-choice", action="append",
                   help="prompt variant (comma-separated ids); repeat for a "
                        "uniform choice set")
    p.set_defaults(func=cmd_sample)

    for name, func in [
        ("eval-mem", cmd_eval_mem),
        ("eval-lambada", cmd_eval_lambada),
        ("eval-bias", cmd_eval_bias),
    ]:
        p = sub.add_parser(name, help=f"run the {name[5:]} experiment")
        p.add_argument("config", help="experiment config JSON path")
        p.add_argument("--out", required=True, help="output directory")
        p.set_defaults(func=func)

    return parser


def main(argv=None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"regexlm: {exc}", file=sys.stderr)
        return 1
    try:
        return args.func(args)
    except _UsageError as exc:
        print(f"regexlm: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:  # pattern syntax, bad parameter values
        print(f"regexlm: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except EngineError as exc:
        print(f"regexlm: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"regexlm: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
