"""Consensus selection among candidate answers from several models.

Each candidate's quality is the sum of its similarity to every other
candidate; the candidate with the highest quality wins, lowest index on ties.
"""

from __future__ import annotations

import enum
import math
from collections.abc import Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from .corpus import Prediction, load_predictions
from .embedding import ProviderConfig, cosine, embed_texts
from .errors import EmptyCandidateSet, SampleIdMismatch
from .metrics import rouge_l
from .textproc import Level, normalize, tokenize


class Quantizer(str, enum.Enum):
    EMB_AS = "emb_a_s"
    WORD_AF = "word_a_f"
    CHAR_AF = "char_a_f"


@dataclass(frozen=True)
class CandidateSet:
    sample_id: str
    candidates: tuple[str, ...]
    source_ids: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if not self.source_ids:
            object.__setattr__(self, "source_ids", tuple(str(i) for i in range(len(self.candidates))))
        if len(self.source_ids) != len(self.candidates):
            raise ValueError("candidates and source_ids differ in length")


@dataclass(frozen=True)
class EnsembleDecision:
    sample_id: str
    quality: tuple[float, ...]
    chosen_index: int
    quantizer: Quantizer

    def to_dict(self) -> dict[str, Any]:
        return {
            "sample_id": self.sample_id,
            "quality": list(self.quality),
            "chosen_index": self.chosen_index,
            "quantizer": self.quantizer.value,
        }


def pairwise_scores(
    cands: CandidateSet,
    quantizer: Quantizer | str,
    provider: ProviderConfig | None = None,
    context: str | None = None,
) -> list[list[float]]:
    """Symmetric M x M similarity matrix with a zero diagonal.

    ROUGE quantizers use the beta=1 F-measure. For ``emb_a_s`` each candidate
    is embedded once; ``context`` (e.g. the question) is prepended if given.
    """
    quantizer = Quantizer(quantizer)
    texts = cands.candidates
    m = len(texts)
    s = [[0.0] * m for _ in range(m)]
    if quantizer is Quantizer.EMB_AS:
        if provider is None:
            raise ValueError("emb_a_s requires an embedding provider")
        inputs = [f"{context} {t}" if context else t for t in texts]
        vecs = embed_texts(inputs, provider) if m > 1 else []
        sim = lambda i, j: cosine(vecs[i], vecs[j])  # noqa: E731
    else:
        level = Level.WORD if quantizer is Quantizer.WORD_AF else Level.CHAR
        toks = [tokenize(normalize(t), level) for t in texts]
        sim = lambda i, j: rouge_l(toks[i], toks[j], 1.0).f  # noqa: E731
    for i in range(m):
        for j in range(i + 1, m):
            s[i][j] = s[j][i] = sim(i, j)
    return s


def quality_scores(matrix: Sequence[Sequence[float]]) -> list[float]:
    return [math.fsum(v for j, v in enumerate(row) if j != i) for i, row in enumerate(matrix)]


def argmax_first(values: Sequence[float]) -> int:
    best = 0
    for i, v in enumerate(values):
        if v > values[best]:
            best = i
    return best


def select_best(
    cands: CandidateSet,
    quantizer: Quantizer | str = Quantizer.EMB_AS,
    provider: ProviderConfig | None = None,
    context: str | None = None,
) -> EnsembleDecision:
    quantizer = Quantizer(quantizer)
    if not cands.candidates:
        raise EmptyCandidateSet(f"sample {cands.sample_id!r} has no candidates")
    if quantizer is Quantizer.EMB_AS and provider is None:
        provider = ProviderConfig()
    quality = quality_scores(pairwise_scores(cands, quantizer, provider, context))
    return EnsembleDecision(cands.sample_id, tuple(quality), argmax_first(quality), quantizer)


def _decide(job: tuple) -> EnsembleDecision:
    return select_best(*job)


def align_predictions(runs: Sequence[Sequence[Prediction]], names: Sequence[str] | None = None) -> list[CandidateSet]:
    """Group per-model predictions into candidate sets, in the first run's order."""
    if not runs:
        raise EmptyCandidateSet("no prediction files given")
    names = list(names) if names is not None else [str(i) for i in range(len(runs))]
    maps = [{p.sample_id: p.answer for p in run} for run in runs]
    order = [p.sample_id for p in runs[0]]
    base = set(order)
    for name, mp in zip(names[1:], maps[1:]):
        keys = set(mp)
        if keys != base:
            raise SampleIdMismatch(name, sorted(base - keys), sorted(keys - base))
    return [CandidateSet(sid, tuple(mp[sid] for mp in maps), tuple(names)) for sid in order]


def ensemble_predictions(
    runs: Sequence[Sequence[Prediction]],
    quantizer: Quantizer | str = Quantizer.EMB_AS,
    provider: ProviderConfig | None = None,
    contexts: dict[str, str] | None = None,
    names: Sequence[str] | None = None,
    workers: int = 1,
) -> tuple[list[Prediction], list[EnsembleDecision]]:
    quantizer = Quantizer(quantizer)
    sets = align_predictions(runs, names)
    jobs = [(cs, quantizer, provider, (contexts or {}).get(cs.sample_id)) for cs in sets]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            decisions = list(pool.map(_decide, jobs, chunksize=max(1, len(jobs) // (workers * 4))))
    else:
        decisions = [_decide(j) for j in jobs]
    chosen = [Prediction(cs.sample_id, cs.candidates[d.chosen_index]) for cs, d in zip(sets, decisions)]
    return chosen, decisions


def ensemble_corpus(
    files: Sequence[str | Path],
    quantizer: Quantizer | str = Quantizer.EMB_AS,
    provider: ProviderConfig | None = None,
    contexts: dict[str, str] | None = None,
    workers: int = 1,
) -> tuple[list[Prediction], list[EnsembleDecision]]:
    """Ensemble prediction files; the first file fixes the output order and wins ties."""
    runs = [load_predictions(f) for f in files]
    return ensemble_predictions(runs, quantizer, provider, contexts, [str(f) for f in files], workers)


def sweep_candidates(
    runs: Sequence[Sequence[Prediction]],
    quantizer: Quantizer | str = Quantizer.EMB_AS,
    provider: ProviderConfig | None = None,
    contexts: dict[str, str] | None = None,
    workers: int = 1,
) -> dict[int, list[Prediction]]:
    """Ensemble the first M runs for every M from 1 to len(runs)."""
    return {
        m: ensemble_predictions(runs[:m], quantizer, provider, contexts, workers=workers)[0]
        for m in range(1, len(runs) + 1)
    }
