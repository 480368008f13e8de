"""Command-line entry point: ``mdqa {prepare,evaluate,filter,merge,ensemble,embed}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any

from . import __version__
from .config import RunConfig, resolve
from .corpus import (
    Split,
    assemble_prompt,
    dumps_jsonl,
    get_template,
    load_jsonl,
    load_predictions,
    merge_pseudo_labels,
)
from .docfilter import apply_filter, score_corpus
from .embedding import embed_texts
from .ensemble import ensemble_predictions, sweep_candidates
from .errors import ConfigError, MdqaError, SchemaViolation
from .metrics import evaluate_corpus

log = logging.getLogger("mdqa")

EXIT_CODES = """\
exit codes:
  0   success
  1   I/O error (missing or unreadable input, unwritable output)
  2   schema error (malformed JSONL, missing field, duplicate sample_id,
      missing gold answer, scorecard mismatch)
  3   sample-id mismatch (missing/unknown hypothesis, missing prediction,
      prediction files covering different ids)
  4   test split rejected by merge (use --allow-test to override)
  5   embedding provider failure (HTTP error after retries, dimension mismatch)
  6   invalid configuration (bad thresholds, unknown template, bad config file)
  64  command-line usage error
"""


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        self.exit(64, f"{self.prog}: error: {message}\n")


def _common_parent() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    g = p.add_argument_group("global options")
    g.add_argument("--config", help="JSON config file (flags > env > config > defaults)")
    g.add_argument("--workers", type=int, help="parallel workers for per-sample work (default: CPU count)")
    g.add_argument("--beta", type=float, help="ROUGE-L F-measure beta (default: 1.0)")
    g.add_argument("--template", help="prompt template id or path to a template JSON (default: plain)")
    g.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    return p


def _provider_parent() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    g = p.add_argument_group("embedding provider")
    g.add_argument("--provider", choices=["local", "http"], help="embedding provider (default: local)")
    g.add_argument("--embed-dim", type=int, help="local hash embedding dimension (default: 1024)")
    g.add_argument("--embed-url", help="base URL of an OpenAI-style embeddings service")
    g.add_argument("--embed-model", help="model name sent to the embeddings service")
    g.add_argument("--embed-batch-size", type=int, help="texts per HTTP request (default: 32)")
    g.add_argument("--embed-retries", type=int, help="HTTP retries with exponential backoff (default: 3)")
    g.add_argument("--embed-timeout", type=float, help="HTTP timeout in seconds (default: 30)")
    g.add_argument("--api-key-env", help="env var holding the API key (default: EMBED_API_KEY)")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common_parent()
    provider = _provider_parent()
    fmt = argparse.RawDescriptionHelpFormatter
    parser = _Parser(
        prog="mdqa",
        description="Conversational multi-doc QA pipeline tools.",
        epilog=EXIT_CODES + "\nenvironment: EMBED_API_KEY, MDQA_BETA, MDQA_TEMPLATE, MDQA_WORKERS, "
        "MDQA_PROVIDER, MDQA_EMBED_URL, MDQA_EMBED_MODEL, MDQA_EMBED_DIM",
        formatter_class=fmt,
        parents=[common],
    )
    parser.add_argument("--version", action="version", version=f"mdqa {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name: str, help_: str, parents: list) -> argparse.ArgumentParser:
        return sub.add_parser(name, help=help_, description=help_, epilog=EXIT_CODES, formatter_class=fmt, parents=parents)

    p = add("prepare", "assemble prompts with answer spans (loss-mask regions)", [common])
    p.add_argument("--input", required=True, help="samples JSONL")
    p.add_argument("--split", choices=[s.value for s in Split], default="train", help="split of the input (default: train)")
    p.add_argument("--mode", choices=["single", "multi"], default=argparse.SUPPRESS,
                   help="mask only the final answer (single) or every answer (multi; default)")
    p.add_argument("--out", required=True, help="PromptRecord JSONL output")

    p = add("evaluate", "score predictions with W-ROUGE-L, C-ROUGE-L and keywords recall", [common])
    p.add_argument("--refs", required=True, help="gold samples JSONL (answers required)")
    p.add_argument("--hyps", required=True, help="predictions JSONL {sample_id, answer}")
    p.add_argument("--refs-split", choices=[s.value for s in Split], default="eval", help="split of the refs (default: eval)")
    p.add_argument("--word-boundary", action="store_true", default=argparse.SUPPRESS,
                   help="keywords must match whole word tokens instead of substrings")
    p.add_argument("--strict", action="store_true", default=argparse.SUPPRESS, help="skip NFKC and case folding")
    p.add_argument("--out", required=True, help="MetricReport JSON output")

    p = add("filter", "flag (and optionally drop) noisy reference documents", [common, provider])
    p.add_argument("--input", required=True, help="samples JSONL")
    p.add_argument("--split", choices=[s.value for s in Split], default="eval", help="split of the input (default: eval)")
    p.add_argument("--action", choices=["report", "drop"], default=argparse.SUPPRESS,
                   help="report flagged documents only (default) or drop them")
    p.add_argument("--report", required=True, help="FilterReport JSON output")
    p.add_argument("--out", help="filtered samples JSONL output (never the input file)")
    for ind, label in (("cos", "embedding cosine"), ("wrl", "word ROUGE-L"), ("crl", "char ROUGE-L")):
        p.add_argument(f"--{ind}-high", type=float, default=argparse.SUPPRESS, help=f"{label} high threshold")
        p.add_argument(f"--{ind}-low", type=float, default=argparse.SUPPRESS, help=f"{label} low threshold (0 disables)")
    p.add_argument("--embed-with-history", action="store_true", default=argparse.SUPPRESS,
                   help="cosine indicator uses history + question instead of the question")
    p.add_argument("--lexical-with-history", action="store_true", default=argparse.SUPPRESS,
                   help="ROUGE indicators use history + question as reference")

    p = add("merge", "add pseudo-labelled eval samples to the training set", [common])
    p.add_argument("--train", required=True, help="train samples JSONL")
    p.add_argument("--eval", required=True, help="unlabelled samples JSONL")
    p.add_argument("--eval-split", choices=["eval", "test"], default="eval", help="split of --eval (default: eval)")
    p.add_argument("--predictions", required=True, help="predictions JSONL for the --eval samples")
    p.add_argument("--allow-test", action="store_true", help="permit test-split samples")
    p.add_argument("--out", required=True, help="merged samples JSONL output")

    p = add("ensemble", "select one answer per sample by candidate consensus", [common, provider])
    p.add_argument("--inputs", nargs="+", required=True, help="prediction JSONL files, one per model; first wins ties")
    p.add_argument("--quantizer", choices=["emb_a_s", "word_a_f", "char_a_f"], default=argparse.SUPPRESS,
                   help="pairwise similarity (default: emb_a_s)")
    p.add_argument("--samples", help="samples JSONL supplying questions for --with-question")
    p.add_argument("--with-question", action="store_true", default=argparse.SUPPRESS,
                   help="emb_a_s embeds question + candidate (requires --samples)")
    p.add_argument("--out", required=True, help="selected predictions JSONL output")
    p.add_argument("--decisions", help="decisions sidecar JSONL (default: <out>.decisions.jsonl)")
    p.add_argument("--sweep-dir", help="also write ensembles of the first M inputs for every M into this directory")

    p = add("embed", "embed texts with the configured provider", [common, provider])
    p.add_argument("--input", required=True, help='JSONL of {"id": str?, "text": str}')
    p.add_argument("--out", required=True, help='JSONL of {"id", "provider_id", "embedding"}')
    return parser


def _flag_tree(args: argparse.Namespace) -> dict[str, Any]:
    a = vars(args)
    tree: dict[str, Any] = {}
    for key in ("workers", "beta", "template", "mode", "strict", "word_boundary"):
        if key in a:
            tree[key] = a[key]
    prov = {
        "provider": "kind",
        "embed_dim": "dimension",
        "embed_url": "base_url",
        "embed_model": "model_name",
        "embed_batch_size": "batch_size",
        "embed_retries": "max_retries",
        "embed_timeout": "timeout",
        "api_key_env": "api_key_env",
    }
    p = {dst: a[src] for src, dst in prov.items() if src in a}
    if p:
        tree["provider"] = p
    f: dict[str, Any] = {}
    for key in ("action", "embed_with_history", "lexical_with_history"):
        if key in a:
            f[key] = a[key]
    thresholds: dict[str, list] = {}
    for ind in ("cos", "wrl", "crl"):
        hi, lo = a.get(f"{ind}_high"), a.get(f"{ind}_low")
        if hi is not None or lo is not None:
            thresholds[ind] = [hi, lo]
    if thresholds:
        f["thresholds"] = thresholds
    if f:
        tree["filter"] = f
    e = {k: a[k] for k in ("quantizer", "with_question") if k in a}
    if e:
        tree["ensemble"] = e
    return tree


def _fill_thresholds(tree: dict[str, Any], cfg_tree: dict[str, Any]) -> None:
    # a single --cos-high leaves the other half at its resolved value
    for ind, pair in tree.get("filter", {}).get("thresholds", {}).items():
        base = cfg_tree["filter"]["thresholds"][ind]
        pair[0] = base[0] if pair[0] is None else pair[0]
        pair[1] = base[1] if pair[1] is None else pair[1]


def _resolve(args: argparse.Namespace) -> RunConfig:
    flags = _flag_tree(args)
    if flags.get("filter", {}).get("thresholds"):
        base = resolve(None, getattr(args, "config", None)).resolved
        _fill_thresholds(flags, base)
    return resolve(flags, getattr(args, "config", None))


def _meta(command: str, cfg: RunConfig, inputs: dict[str, Any]) -> dict[str, Any]:
    return {"tool": "mdqa", "version": __version__, "command": command, "inputs": inputs, "config": cfg.echo()}


def _write_text(path: str | Path, text: str) -> None:
    Path(path).write_text(text, encoding="utf-8")


def _write_json(path: str | Path, obj: Any) -> None:
    _write_text(path, json.dumps(obj, ensure_ascii=False, indent=2) + "\n")


def _write_jsonl(path: str | Path, records: Any, meta: dict[str, Any]) -> None:
    _write_text(path, dumps_jsonl(records))
    _write_json(f"{path}.meta.json", meta)


def _guard_inputs(out: str | None, *inputs: str) -> None:
    if out is None:
        return
    target = Path(out).resolve()
    for src in inputs:
        if Path(src).resolve() == target:
            raise ConfigError(f"refusing to overwrite input file {src}")


def cmd_prepare(args: argparse.Namespace, cfg: RunConfig) -> int:
    _guard_inputs(args.out, args.input)
    try:
        template = get_template(cfg.template)
    except (KeyError, TypeError) as exc:
        raise ConfigError(str(exc)) from None
    samples = load_jsonl(args.input, args.split)
    records = [assemble_prompt(s, cfg.mode, template) for s in samples]
    _write_jsonl(args.out, records, _meta("prepare", cfg, {"input": args.input, "split": args.split}))
    print(f"wrote {len(records)} prompt records ({cfg.mode.value}-turn masks) to {args.out}")
    return 0


def cmd_evaluate(args: argparse.Namespace, cfg: RunConfig) -> int:
    _guard_inputs(args.out, args.refs, args.hyps)
    refs = load_jsonl(args.refs, args.refs_split)
    hyps = load_predictions(args.hyps)
    report = evaluate_corpus(refs, hyps, cfg.beta, cfg.workers, cfg.word_boundary, cfg.strict)
    out = {"meta": _meta("evaluate", cfg, {"refs": args.refs, "hyps": args.hyps}), **report.to_dict()}
    _write_json(args.out, out)
    kr = "n/a" if report.kr is None else f"{report.kr:.5f}"
    print(f"W-ROUGE-L {report.w_rouge_l_f:.5f}  C-ROUGE-L {report.c_rouge_l_f:.5f}  KR {kr}  (n={report.n_samples})")
    return 0


def cmd_filter(args: argparse.Namespace, cfg: RunConfig) -> int:
    _guard_inputs(args.out, args.input)
    _guard_inputs(args.report, args.input)
    samples = load_jsonl(args.input, args.split)
    cards = score_corpus(samples, cfg.filter, cfg.provider, cfg.workers)
    result = apply_filter(samples, cards, cfg.filter)
    meta = _meta("filter", cfg, {"input": args.input, "split": args.split})
    _write_json(args.report, {"meta": meta, **result.report.to_dict()})
    if args.out:
        _write_jsonl(args.out, result.kept, meta)
    print(
        f"flagged {result.report.n_flagged} documents, dropped {result.report.n_dropped} "
        f"(action={cfg.filter.action.value})"
    )
    return 0


def cmd_merge(args: argparse.Namespace, cfg: RunConfig) -> int:
    _guard_inputs(args.out, args.train, args.eval, args.predictions)
    train = load_jsonl(args.train, Split.TRAIN)
    eval_samples = load_jsonl(args.eval, args.eval_split)
    preds = load_predictions(args.predictions)
    merged = merge_pseudo_labels(train, eval_samples, preds, allow_test=args.allow_test)
    meta = _meta(
        "merge",
        cfg,
        {"train": args.train, "eval": args.eval, "eval_split": args.eval_split,
         "predictions": args.predictions, "allow_test": args.allow_test},
    )
    _write_jsonl(args.out, merged, meta)
    print(f"wrote {len(merged)} samples ({len(merged) - len(train)} pseudo-labelled) to {args.out}")
    return 0


def cmd_ensemble(args: argparse.Namespace, cfg: RunConfig) -> int:
    _guard_inputs(args.out, *args.inputs)
    runs = [load_predictions(f) for f in args.inputs]
    contexts = None
    if cfg.ensemble_with_question:
        if not args.samples:
            raise ConfigError("--with-question requires --samples")
        contexts = {s.sample_id: s.question for s in load_jsonl(args.samples, Split.EVAL)}
    chosen, decisions = ensemble_predictions(runs, cfg.quantizer, cfg.provider, contexts, args.inputs, cfg.workers)
    meta = _meta("ensemble", cfg, {"inputs": list(args.inputs), "samples": args.samples})
    _write_jsonl(args.out, chosen, meta)
    _write_text(args.decisions or f"{args.out}.decisions.jsonl", dumps_jsonl(decisions))
    if args.sweep_dir:
        sweep = Path(args.sweep_dir)
        sweep.mkdir(parents=True, exist_ok=True)
        for m, preds in sweep_candidates(runs, cfg.quantizer, cfg.provider, contexts, cfg.workers).items():
            _write_text(sweep / f"ensemble_m{m}.jsonl", dumps_jsonl(preds))
    print(f"selected {len(chosen)} answers from {len(runs)} candidates each ({cfg.quantizer.value})")
    return 0


def cmd_embed(args: argparse.Namespace, cfg: RunConfig) -> int:
    _guard_inputs(args.out, args.input)
    ids, texts = [], []
    with open(args.input, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            if not raw.strip():
                continue
            try:
                obj = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise SchemaViolation(lineno, "<json>", f"malformed JSON: {exc.msg}") from None
            if not isinstance(obj, dict) or not isinstance(obj.get("text"), str):
                raise SchemaViolation(lineno, "text", "required string")
            ids.append(str(obj.get("id", lineno)))
            texts.append(obj["text"])
    vectors = embed_texts(texts, cfg.provider)
    rows = [
        {"id": i, "provider_id": v.provider_id, "embedding": v.values.tolist()}
        for i, v in zip(ids, vectors)
    ]
    _write_jsonl(args.out, rows, _meta("embed", cfg, {"input": args.input}))
    print(f"embedded {len(rows)} texts with {cfg.provider.provider_id}")
    return 0


COMMANDS = {
    "prepare": cmd_prepare,
    "evaluate": cmd_evaluate,
    "filter": cmd_filter,
    "merge": cmd_merge,
    "ensemble": cmd_ensemble,
    "embed": cmd_embed,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if getattr(args, "verbose", False) else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        cfg = _resolve(args)
        return COMMANDS[args.command](args, cfg)
    except MdqaError as exc:
        print(f"mdqa {args.command}: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"mdqa {args.command}: I/O error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
