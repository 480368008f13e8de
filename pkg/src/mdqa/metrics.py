"""ROUGE-L (word and character level), keywords recall, corpus aggregation."""

from __future__ import annotations

import math
from collections.abc import Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Any

from .errors import (
    DuplicateSampleId,
    EmptyKeywordList,
    MissingGoldAnswer,
    MissingHypothesis,
    UnknownSampleId,
)
from .lcs import lcs_len
from .textproc import Level, TokenSeq, normalize, tokenize, tokenize_words


@dataclass(frozen=True)
class RougeScore:
    recall: float
    precision: float
    f: float
    beta: float
    degenerate: bool = False

    def to_dict(self) -> dict[str, Any]:
        return {
            "recall": self.recall,
            "precision": self.precision,
            "f": self.f,
            "beta": self.beta,
            "degenerate": self.degenerate,
        }


@dataclass(frozen=True)
class KRScore:
    matched: int
    total: int

    @property
    def value(self) -> float:
        return self.matched / self.total

    def to_dict(self) -> dict[str, Any]:
        return {"matched": self.matched, "total": self.total, "value": self.value}


@dataclass(frozen=True)
class SampleScores:
    sample_id: str
    w_rouge_l: RougeScore
    c_rouge_l: RougeScore
    kr: KRScore | None

    def to_dict(self) -> dict[str, Any]:
        return {
            "sample_id": self.sample_id,
            "w_rouge_l": self.w_rouge_l.to_dict(),
            "c_rouge_l": self.c_rouge_l.to_dict(),
            "kr": None if self.kr is None else self.kr.to_dict(),
        }


@dataclass(frozen=True)
class MetricReport:
    per_sample: tuple[SampleScores, ...]
    w_rouge_l_f: float
    c_rouge_l_f: float
    kr: float | None
    n_samples: int
    n_kr_samples: int

    @property
    def aggregate(self) -> dict[str, float | None]:
        return {"w_rouge_l_f": self.w_rouge_l_f, "c_rouge_l_f": self.c_rouge_l_f, "kr": self.kr}

    def to_dict(self) -> dict[str, Any]:
        return {
            "aggregate": self.aggregate,
            "n_samples": self.n_samples,
            "n_kr_samples": self.n_kr_samples,
            "per_sample": [s.to_dict() for s in self.per_sample],
        }


def f_measure(recall: float, precision: float, beta: float) -> float:
    b2 = beta * beta
    denom = recall + b2 * precision
    if denom <= 0:
        return 0.0
    return (1 + b2) * recall * precision / denom


def rouge_l(x: TokenSeq, y: TokenSeq, beta: float = 1.0, method: str = "auto") -> RougeScore:
    """LCS-based recall/precision/F of hypothesis ``y`` against reference ``x``.

    Recall divides by the reference length, precision by the hypothesis length.
    Either side empty gives an all-zero score flagged as degenerate.
    """
    if not beta > 0:
        raise ValueError(f"beta must be positive, got {beta}")
    m, n = len(x), len(y)
    if m == 0 or n == 0:
        return RougeScore(0.0, 0.0, 0.0, beta, degenerate=True)
    common = lcs_len(x, y, method=method)
    recall = common / m
    precision = common / n
    return RougeScore(recall, precision, f_measure(recall, precision, beta), beta)


def rouge_l_text(reference: str, hypothesis: str, level: Level, beta: float = 1.0, strict: bool = False) -> RougeScore:
    ref = tokenize(normalize(reference, strict), level)
    hyp = tokenize(normalize(hypothesis, strict), level)
    return rouge_l(ref, hyp, beta)


def _contains_words(needle: tuple[str, ...], hay: tuple[str, ...]) -> bool:
    k = len(needle)
    return any(hay[i : i + k] == needle for i in range(len(hay) - k + 1))


def keywords_recall(
    keywords: Sequence[str],
    answer: str,
    word_boundary: bool = False,
    strict: bool = False,
) -> KRScore:
    """Fraction of keywords that occur in the answer after normalization.

    Default matching is substring containment. ``word_boundary`` instead
    requires the keyword's word tokens to appear as a contiguous token run.
    Keywords that normalize to nothing never match.
    """
    if not keywords:
        raise EmptyKeywordList("keyword list is empty; exclude the sample from KR")
    hay = normalize(answer, strict)
    hay_words = tokenize_words(hay).tokens if word_boundary else ()
    matched = 0
    for kw in keywords:
        needle = normalize(kw, strict)
        if not needle.normalized:
            continue
        if word_boundary:
            hit = _contains_words(tokenize_words(needle).tokens, hay_words)
        else:
            hit = needle.normalized in hay.normalized
        matched += hit
    return KRScore(matched, len(keywords))


def score_sample(
    sample_id: str,
    reference: str,
    hypothesis: str,
    keywords: Sequence[str] | None,
    beta: float = 1.0,
    word_boundary: bool = False,
    strict: bool = False,
) -> SampleScores:
    ref = normalize(reference, strict)
    hyp = normalize(hypothesis, strict)
    w = rouge_l(tokenize(ref, Level.WORD), tokenize(hyp, Level.WORD), beta)
    c = rouge_l(tokenize(ref, Level.CHAR), tokenize(hyp, Level.CHAR), beta)
    kr = keywords_recall(keywords, hypothesis, word_boundary, strict) if keywords else None
    return SampleScores(sample_id, w, c, kr)


def _score_job(job: tuple) -> SampleScores:
    return score_sample(*job)


def _mean(values: list[float]) -> float:
    return math.fsum(values) / len(values)


def evaluate_corpus(
    refs: Sequence,
    hyps: Sequence,
    beta: float = 1.0,
    workers: int = 1,
    word_boundary: bool = False,
    strict: bool = False,
) -> MetricReport:
    """Score predictions against gold samples and macro-average in ``refs`` order.

    ``refs`` are :class:`mdqa.corpus.Sample`; ``hyps`` are objects with
    ``sample_id`` and ``answer``. The report does not depend on ``workers``.
    """
    if not beta > 0:
        raise ValueError(f"beta must be positive, got {beta}")
    ref_ids = set()
    for ref in refs:
        if ref.sample_id in ref_ids:
            raise DuplicateSampleId(ref.sample_id)
        ref_ids.add(ref.sample_id)
        if ref.answer is None:
            raise MissingGoldAnswer(ref.sample_id)
    by_id: dict[str, str] = {}
    for hyp in hyps:
        if hyp.sample_id not in ref_ids:
            raise UnknownSampleId(hyp.sample_id)
        if hyp.sample_id in by_id:
            raise DuplicateSampleId(hyp.sample_id)
        by_id[hyp.sample_id] = hyp.answer
    jobs = []
    for ref in refs:
        if ref.sample_id not in by_id:
            raise MissingHypothesis(ref.sample_id)
        jobs.append(
            (ref.sample_id, ref.answer, by_id[ref.sample_id], ref.keywords, beta, word_boundary, strict)
        )

    if workers > 1 and len(jobs) > 1:
        chunk = max(1, len(jobs) // (workers * 4))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            scores = list(pool.map(_score_job, jobs, chunksize=chunk))
    else:
        scores = [_score_job(j) for j in jobs]

    kr_values = [s.kr.value for s in scores if s.kr is not None]
    n = len(scores)
    return MetricReport(
        per_sample=tuple(scores),
        w_rouge_l_f=_mean([s.w_rouge_l.f for s in scores]) if n else 0.0,
        c_rouge_l_f=_mean([s.c_rouge_l.f for s in scores]) if n else 0.0,
        kr=_mean(kr_values) if kr_values else None,
        n_samples=n,
        n_kr_samples=len(kr_values),
    )
