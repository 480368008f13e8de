"""Dual-threshold screening of reference documents for noise.

Each document is scored against its question with one embedding indicator
(cosine) and two lexical ones (word and char ROUGE-L F, document as
hypothesis, question as reference). A score at or above an indicator's high
threshold, or at or below its low threshold, flags the document. A low
threshold of 0 disables low flagging for that indicator.
"""

from __future__ import annotations

import enum
from collections import Counter
from collections.abc import Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Any

from .corpus import Sample
from .embedding import ProviderConfig, cosine, embed_texts
from .errors import CardMismatch, ConfigError
from .metrics import rouge_l
from .textproc import Level, normalize, tokenize

INDICATORS = ("cos", "wrl", "crl")

DEFAULT_THRESHOLDS: dict[str, tuple[float, float]] = {
    "cos": (0.95, 0.05),
    "wrl": (0.9, 0.0),
    "crl": (0.9, 0.0),
}


class Action(str, enum.Enum):
    REPORT = "report"
    DROP = "drop"


@dataclass(frozen=True)
class FilterConfig:
    thresholds: dict[str, tuple[float, float]] = field(default_factory=lambda: dict(DEFAULT_THRESHOLDS))
    embed_with_history: bool = False
    lexical_with_history: bool = False
    action: Action = Action.REPORT
    beta: float = 1.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "action", Action(self.action))
        merged = dict(DEFAULT_THRESHOLDS)
        for name, pair in self.thresholds.items():
            if name not in INDICATORS:
                raise ConfigError(f"unknown indicator {name!r}; expected one of {INDICATORS}")
            merged[name] = (float(pair[0]), float(pair[1]))
        for name, (high, low) in merged.items():
            if not 0.0 <= low < high <= 1.0:
                raise ConfigError(f"{name}: thresholds must satisfy 0 <= low < high <= 1, got high={high} low={low}")
        object.__setattr__(self, "thresholds", merged)

    def to_dict(self) -> dict[str, Any]:
        return {
            "thresholds": {k: {"high": h, "low": l} for k, (h, l) in self.thresholds.items()},
            "embed_with_history": self.embed_with_history,
            "lexical_with_history": self.lexical_with_history,
            "action": self.action.value,
            "beta": self.beta,
        }


@dataclass(frozen=True)
class DocScorecard:
    sample_id: str
    doc_index: int
    cos_q: float
    cos_qh: float
    wrl_q: float
    crl_q: float
    flags: frozenset[str] = frozenset()

    def indicator_scores(self, cfg: FilterConfig) -> dict[str, tuple[str, float]]:
        cos_name = "cos_qh" if cfg.embed_with_history else "cos_q"
        return {
            "cos": (cos_name, getattr(self, cos_name)),
            "wrl": ("wrl_q", self.wrl_q),
            "crl": ("crl_q", self.crl_q),
        }

    def reflag(self, cfg: FilterConfig) -> DocScorecard:
        return replace(self, flags=compute_flags(self, cfg))

    def to_dict(self) -> dict[str, Any]:
        return {
            "sample_id": self.sample_id,
            "doc_index": self.doc_index,
            "scores": {"cos_q": self.cos_q, "cos_qh": self.cos_qh, "wrl_q": self.wrl_q, "crl_q": self.crl_q},
            "flags": sorted(self.flags),
        }


def compute_flags(card: DocScorecard, cfg: FilterConfig) -> frozenset[str]:
    flags = set()
    for indicator, (field_name, score) in card.indicator_scores(cfg).items():
        high, low = cfg.thresholds[indicator]
        if score >= high:
            flags.add(f"high:{field_name}")
        if low > 0 and score <= low:
            flags.add(f"low:{field_name}")
    return frozenset(flags)


def _with_history(sample: Sample) -> str:
    parts = []
    for turn in sample.history:
        parts.extend((turn.question, turn.answer))
    parts.append(sample.question)
    return " ".join(parts)


def score_documents(sample: Sample, cfg: FilterConfig, provider: ProviderConfig | None = None) -> list[DocScorecard]:
    """One scorecard per document, in document order."""
    if not sample.documents:
        return []
    provider = provider or ProviderConfig()
    q_text = sample.question
    qh_text = _with_history(sample)
    vectors = embed_texts([q_text, qh_text, *sample.documents], provider)
    q_vec, qh_vec, doc_vecs = vectors[0], vectors[1], vectors[2:]

    lex_ref = normalize(qh_text if cfg.lexical_with_history else q_text)
    ref_w = tokenize(lex_ref, Level.WORD)
    ref_c = tokenize(lex_ref, Level.CHAR)

    cards = []
    for i, (doc, vec) in enumerate(zip(sample.documents, doc_vecs)):
        d = normalize(doc)
        card = DocScorecard(
            sample_id=sample.sample_id,
            doc_index=i,
            cos_q=cosine(q_vec, vec),
            cos_qh=cosine(qh_vec, vec),
            wrl_q=rouge_l(ref_w, tokenize(d, Level.WORD), cfg.beta).f,
            crl_q=rouge_l(ref_c, tokenize(d, Level.CHAR), cfg.beta).f,
        )
        cards.append(card.reflag(cfg))
    return cards


def _score_job(job: tuple) -> list[DocScorecard]:
    return score_documents(*job)


def score_corpus(
    samples: Sequence[Sample],
    cfg: FilterConfig,
    provider: ProviderConfig | None = None,
    workers: int = 1,
) -> list[DocScorecard]:
    jobs = [(s, cfg, provider) for s in samples]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            per_sample = list(pool.map(_score_job, jobs, chunksize=max(1, len(jobs) // (workers * 4))))
    else:
        per_sample = [_score_job(j) for j in jobs]
    return [c for cards in per_sample for c in cards]


@dataclass(frozen=True)
class FilterReport:
    flagged: tuple[DocScorecard, ...]
    n_dropped: int
    by_flag: dict[str, int]

    @property
    def n_flagged(self) -> int:
        return len(self.flagged)

    def to_dict(self) -> dict[str, Any]:
        return {
            "flagged": [c.to_dict() for c in self.flagged],
            "n_flagged": self.n_flagged,
            "n_dropped": self.n_dropped,
            "by_flag": dict(sorted(self.by_flag.items())),
        }


@dataclass(frozen=True)
class FilterResult:
    kept: list[Sample]
    report: FilterReport


def apply_filter(samples: Sequence[Sample], cards: Sequence[DocScorecard], cfg: FilterConfig) -> FilterResult:
    """Report or drop flagged documents. Surviving documents keep their order.

    Flags are recomputed from the card scores under ``cfg``.
    """
    expected = {(s.sample_id, i) for s in samples for i in range(len(s.documents))}
    got: dict[tuple[str, int], DocScorecard] = {}
    for card in cards:
        key = (card.sample_id, card.doc_index)
        if key not in expected or key in got:
            raise CardMismatch(f"unexpected or duplicate scorecard for sample {key[0]!r} doc {key[1]}")
        got[key] = card.reflag(cfg)
    if len(got) != len(expected):
        missing = sorted(expected - got.keys())[:10]
        raise CardMismatch(f"scorecards missing for {len(expected) - len(got)} documents, e.g. {missing}")

    flagged: list[DocScorecard] = []
    by_flag: Counter[str] = Counter()
    kept: list[Sample] = []
    n_dropped = 0
    for s in samples:
        survivors = []
        for i, doc in enumerate(s.documents):
            card = got[(s.sample_id, i)]
            if card.flags:
                flagged.append(card)
                by_flag.update(card.flags)
                if cfg.action is Action.DROP:
                    n_dropped += 1
                    continue
            survivors.append(doc)
        if cfg.action is Action.DROP and len(survivors) != len(s.documents):
            kept.append(replace(s, documents=tuple(survivors)))
        else:
            kept.append(s)
    return FilterResult(kept, FilterReport(tuple(flagged), n_dropped, dict(by_flag)))
