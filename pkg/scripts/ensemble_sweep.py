"""Score the ensemble for every candidate-set prefix M = 1..N against gold answers.

Each prediction file is one run (JSONL rows of sample_id/answer). The output
table has one row per (quantizer, M) with corpus ROUGE-L F at word and char
level and keywords recall.

    python3 scripts/ensemble_sweep.py --refs eval.jsonl --runs r1.jsonl r2.jsonl r3.jsonl
"""

from __future__ import annotations

import argparse
import json

from mdqa.corpus import load_jsonl, load_predictions
from mdqa.ensemble import Quantizer, sweep_candidates
from mdqa.metrics import evaluate_corpus


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--refs", required=True)
    ap.add_argument("--runs", nargs="+", required=True)
    ap.add_argument("--quantizers", nargs="+", default=[q.value for q in Quantizer])
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--json", action="store_true", help="emit JSON lines instead of a table")
    args = ap.parse_args()

    refs = load_jsonl(args.refs, "eval")
    runs = [load_predictions(p) for p in args.runs]
    if not args.json:
        print(f"{'quantizer':<10} {'M':>3} {'w-rl-f':>8} {'c-rl-f':>8} {'kr':>8}")
    for name in args.quantizers:
        for m, preds in sweep_candidates(runs, name, workers=args.workers).items():
            rep = evaluate_corpus(refs, preds, workers=args.workers)
            row = {"quantizer": name, "M": m, **rep.aggregate}
            if args.json:
                print(json.dumps(row))
            else:
                kr = "-" if rep.kr is None else f"{rep.kr:.5f}"
                print(f"{name:<10} {m:>3} {rep.w_rouge_l_f:>8.5f} {rep.c_rouge_l_f:>8.5f} {kr:>8}")


if __name__ == "__main__":
    main()
