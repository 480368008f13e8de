"""Dialogue samples, JSONL I/O, prompt assembly with answer spans, pseudo-label merging."""

from __future__ import annotations

import enum
import json
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any

from .errors import DuplicateSampleId, MissingPrediction, SchemaViolation, TestSplitRejected


class Split(str, enum.Enum):
    TRAIN = "train"
    EVAL = "eval"
    TEST = "test"


class Mode(str, enum.Enum):
    SINGLE = "single"
    MULTI = "multi"


@dataclass(frozen=True)
class Turn:
    question: str
    answer: str


@dataclass(frozen=True)
class Sample:
    sample_id: str
    question: str
    history: tuple[Turn, ...] = ()
    documents: tuple[str, ...] = ()
    answer: str | None = None
    keywords: tuple[str, ...] | None = None
    split: Split = Split.TRAIN
    pseudo: bool = False

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "sample_id": self.sample_id,
            "history": [{"question": t.question, "answer": t.answer} for t in self.history],
            "documents": list(self.documents),
            "question": self.question,
        }
        if self.answer is not None:
            out["answer"] = self.answer
        if self.keywords is not None:
            out["keywords"] = list(self.keywords)
        if self.pseudo:
            out["pseudo"] = True
        return out


@dataclass(frozen=True)
class Prediction:
    sample_id: str
    answer: str

    def to_dict(self) -> dict[str, str]:
        return {"sample_id": self.sample_id, "answer": self.answer}


# ---------------------------------------------------------------------------
# JSONL


def _is_str_list(value: Any) -> bool:
    return isinstance(value, list) and all(isinstance(v, str) for v in value)


def parse_sample(obj: Any, line: int, split: Split) -> Sample:
    if not isinstance(obj, dict):
        raise SchemaViolation(line, "<root>", "expected a JSON object")

    question = obj.get("question")
    if not isinstance(question, str) or not question:
        raise SchemaViolation(line, "question", "required non-empty string")

    history = []
    raw_history = obj.get("history", [])
    if not isinstance(raw_history, list):
        raise SchemaViolation(line, "history", "expected a list of turns")
    for i, turn in enumerate(raw_history):
        if not isinstance(turn, dict):
            raise SchemaViolation(line, f"history[{i}]", "expected an object")
        q, a = turn.get("question"), turn.get("answer")
        if not isinstance(q, str) or not q:
            raise SchemaViolation(line, f"history[{i}].question", "required non-empty string")
        if not isinstance(a, str):
            raise SchemaViolation(line, f"history[{i}].answer", "required string")
        history.append(Turn(q, a))

    documents = obj.get("documents", [])
    if not _is_str_list(documents):
        raise SchemaViolation(line, "documents", "expected a list of strings")

    answer = obj.get("answer")
    if answer is not None and not isinstance(answer, str):
        raise SchemaViolation(line, "answer", "expected a string or null")
    if split is Split.TRAIN and answer is None:
        raise SchemaViolation(line, "answer", "train samples require an answer")

    keywords = obj.get("keywords")
    if keywords is not None:
        if not _is_str_list(keywords):
            raise SchemaViolation(line, "keywords", "expected a list of strings")
        if split is Split.TRAIN:
            raise SchemaViolation(line, "keywords", "keywords are only allowed in eval/test data")

    sample_id = obj.get("sample_id")
    if sample_id is None:
        sample_id = f"{split.value}-{line}"
    elif not isinstance(sample_id, str) or not sample_id:
        raise SchemaViolation(line, "sample_id", "expected a non-empty string")

    pseudo = obj.get("pseudo", False)
    if not isinstance(pseudo, bool):
        raise SchemaViolation(line, "pseudo", "expected a boolean")

    return Sample(
        sample_id=sample_id,
        question=question,
        history=tuple(history),
        documents=tuple(documents),
        answer=answer,
        keywords=None if keywords is None else tuple(keywords),
        split=split,
        pseudo=pseudo,
    )


def _iter_json_lines(path: str | Path) -> Iterable[tuple[int, Any]]:
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            if not raw.strip():
                continue
            try:
                yield lineno, json.loads(raw)
            except json.JSONDecodeError as exc:
                raise SchemaViolation(lineno, "<json>", f"malformed JSON: {exc.msg}") from None


def load_jsonl(path: str | Path, split: Split | str = Split.TRAIN) -> list[Sample]:
    """Read samples in file order.

    Missing ``sample_id`` values become ``"<split>-<line number>"``.
    """
    split = Split(split)
    samples: list[Sample] = []
    seen: set[str] = set()
    for lineno, obj in _iter_json_lines(path):
        sample = parse_sample(obj, lineno, split)
        if sample.sample_id in seen:
            raise DuplicateSampleId(sample.sample_id, lineno)
        seen.add(sample.sample_id)
        samples.append(sample)
    return samples


def dumps_jsonl(records: Iterable[Any]) -> str:
    parts = []
    for rec in records:
        obj = rec.to_dict() if hasattr(rec, "to_dict") else rec
        parts.append(json.dumps(obj, ensure_ascii=False, sort_keys=False) + "\n")
    return "".join(parts)


def write_jsonl(path: str | Path, records: Iterable[Any]) -> None:
    Path(path).write_text(dumps_jsonl(records), encoding="utf-8")


def load_predictions(path: str | Path) -> list[Prediction]:
    preds: list[Prediction] = []
    seen: set[str] = set()
    for lineno, obj in _iter_json_lines(path):
        if not isinstance(obj, dict):
            raise SchemaViolation(lineno, "<root>", "expected a JSON object")
        sid, answer = obj.get("sample_id"), obj.get("answer")
        if not isinstance(sid, str) or not sid:
            raise SchemaViolation(lineno, "sample_id", "required non-empty string")
        if not isinstance(answer, str):
            raise SchemaViolation(lineno, "answer", "required string")
        if sid in seen:
            raise DuplicateSampleId(sid, lineno)
        seen.add(sid)
        preds.append(Prediction(sid, answer))
    return preds


# ---------------------------------------------------------------------------
# Prompt assembly


@dataclass(frozen=True)
class PromptTemplate:
    """Segment decoration for the assembled prompt.

    Every segment (history question, history answer, final question, each
    document, final answer) is wrapped in its prefix/suffix and segments are
    joined with ``separator``. Answer spans cover only the answer text, never
    its prefix or suffix.
    """

    template_id: str
    separator: str = " "
    system: str = ""
    user_prefix: str = ""
    user_suffix: str = ""
    assistant_prefix: str = ""
    assistant_suffix: str = ""
    doc_prefix: str = ""
    doc_suffix: str = ""

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> PromptTemplate:
        return cls(**data)


PLAIN = PromptTemplate("plain")
INST = PromptTemplate(
    "inst",
    separator="\n",
    user_prefix="[INST] ",
    user_suffix=" [/INST]",
    assistant_prefix="",
    assistant_suffix="</s>",
    doc_prefix="<doc> ",
    doc_suffix=" </doc>",
)
TEMPLATES: dict[str, PromptTemplate] = {t.template_id: t for t in (PLAIN, INST)}


def get_template(name: str) -> PromptTemplate:
    """Look up a built-in template, or load one from a JSON file path."""
    if name in TEMPLATES:
        return TEMPLATES[name]
    path = Path(name)
    if path.suffix == ".json" and path.is_file():
        return PromptTemplate.from_dict(json.loads(path.read_text(encoding="utf-8")))
    raise KeyError(f"unknown template {name!r}; built-ins: {sorted(TEMPLATES)}")


@dataclass(frozen=True)
class PromptRecord:
    sample_id: str
    assembled: str
    target_spans: tuple[tuple[int, int], ...]
    mode: Mode
    template_id: str

    def span_texts(self) -> list[str]:
        return [self.assembled[s:e] for s, e in self.target_spans]

    def to_dict(self) -> dict[str, Any]:
        return {
            "sample_id": self.sample_id,
            "text": self.assembled,
            "target_spans": [list(s) for s in self.target_spans],
            "mode": self.mode.value,
            "template_id": self.template_id,
        }


def assemble_prompt(sample: Sample, mode: Mode | str = Mode.MULTI, template: PromptTemplate = PLAIN) -> PromptRecord:
    """Concatenate history q/a pairs, final question, documents, final answer.

    Without a final answer the record ends at the answer insertion point and
    the last span is empty there.
    """
    mode = Mode(mode)
    t = template
    parts: list[str] = []
    spans: list[tuple[int, int]] = []
    pos = 0

    def emit(text: str) -> None:
        nonlocal pos
        if parts:
            parts.append(t.separator)
            pos += len(t.separator)
        parts.append(text)
        pos += len(text)

    def emit_answer(answer: str, masked: bool, closed: bool) -> None:
        nonlocal pos
        if parts:
            parts.append(t.separator)
            pos += len(t.separator)
        parts.append(t.assistant_prefix)
        pos += len(t.assistant_prefix)
        if masked:
            spans.append((pos, pos + len(answer)))
        parts.append(answer)
        pos += len(answer)
        if closed:
            parts.append(t.assistant_suffix)
            pos += len(t.assistant_suffix)

    if t.system:
        emit(t.system)
    for turn in sample.history:
        emit(t.user_prefix + turn.question + t.user_suffix)
        emit_answer(turn.answer, masked=mode is Mode.MULTI, closed=True)
    emit(t.user_prefix + sample.question + t.user_suffix)
    for doc in sample.documents:
        emit(t.doc_prefix + doc + t.doc_suffix)
    final = sample.answer if sample.answer is not None else ""
    emit_answer(final, masked=True, closed=sample.answer is not None)

    return PromptRecord(sample.sample_id, "".join(parts), tuple(spans), mode, t.template_id)


# ---------------------------------------------------------------------------
# Hybrid training


def merge_pseudo_labels(
    train: Sequence[Sample],
    eval_samples: Sequence[Sample],
    predictions: Sequence[Prediction],
    allow_test: bool = False,
) -> list[Sample]:
    """Append eval samples, answered by model predictions, to the training set.

    Only the final answer is replaced; history answers stay as annotated.
    Pseudo-labelled samples become train samples and drop their keywords.
    Predictions for ids outside ``eval_samples`` are ignored.
    """
    if not allow_test:
        for s in (*train, *eval_samples):
            if s.split is Split.TEST:
                raise TestSplitRejected(s.sample_id)
    by_id = {p.sample_id: p.answer for p in predictions}
    seen = {s.sample_id for s in train}
    merged = list(train)
    for s in eval_samples:
        if s.sample_id not in by_id:
            raise MissingPrediction(s.sample_id)
        if s.sample_id in seen:
            raise DuplicateSampleId(s.sample_id)
        seen.add(s.sample_id)
        merged.append(replace(s, answer=by_id[s.sample_id], pseudo=True, split=Split.TRAIN, keywords=None))
    return merged
