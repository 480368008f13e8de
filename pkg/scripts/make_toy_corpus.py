"""Write a small synthetic train/eval corpus and a few noisy prediction runs.

    python3 scripts/make_toy_corpus.py --out toy/
"""

from __future__ import annotations

import argparse
import json
import random
from pathlib import Path

TOPICS = ["billing", "login", "refund", "shipping", "warranty", "account", "invoice", "delivery"]
FILLER = "please check the settings page and contact support if the issue remains".split()


def answer_for(rng: random.Random, topic: str) -> str:
    words = rng.sample(FILLER, rng.randint(4, 9))
    words.insert(rng.randrange(len(words) + 1), topic)
    return " ".join(words)


def sample(rng: random.Random, sid: str, with_keywords: bool) -> tuple[dict, str]:
    topic = rng.choice(TOPICS)
    history = [
        {"question": f"what about {rng.choice(TOPICS)}?", "answer": answer_for(rng, rng.choice(TOPICS))}
        for _ in range(rng.randint(0, 2))
    ]
    question = f"how do I fix my {topic} problem?"
    docs = [f"{topic} guide: " + " ".join(rng.sample(FILLER, 6)) for _ in range(rng.randint(1, 3))]
    docs.append(question)
    docs.append(" ".join(rng.sample(TOPICS, 3)))
    rng.shuffle(docs)
    gold = answer_for(rng, topic)
    rec = {"sample_id": sid, "history": history, "documents": docs, "question": question, "answer": gold}
    if with_keywords:
        rec["keywords"] = [topic, "support"]
    return rec, gold


def perturb(rng: random.Random, text: str, rate: float) -> str:
    words = text.split()
    out = [w if rng.random() > rate else rng.choice(FILLER + TOPICS) for w in words]
    if rng.random() < rate:
        out = out[: max(1, len(out) - 2)]
    return " ".join(out)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="toy")
    ap.add_argument("--train", type=int, default=50)
    ap.add_argument("--eval", type=int, default=30)
    ap.add_argument("--runs", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = random.Random(args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    def dump(name: str, rows: list[dict]) -> None:
        with open(out / name, "w", encoding="utf-8") as fh:
            fh.writelines(json.dumps(r, ensure_ascii=False) + "\n" for r in rows)

    dump("train.jsonl", [sample(rng, f"t{i}", False)[0] for i in range(args.train)])
    ev = [sample(rng, f"e{i}", True) for i in range(args.eval)]
    dump("eval.jsonl", [r for r, _ in ev])
    for k in range(args.runs):
        rate = 0.1 + 0.1 * k
        dump(f"run{k + 1}.jsonl", [{"sample_id": r["sample_id"], "answer": perturb(rng, g, rate)} for r, g in ev])
    print(f"wrote {args.train} train, {args.eval} eval samples and {args.runs} runs to {out}/")


if __name__ == "__main__":
    main()
