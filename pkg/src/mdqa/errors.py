"""Exception hierarchy. Each class carries the CLI exit code it maps to."""

from __future__ import annotations


class MdqaError(Exception):
    exit_code = 1


class ConfigError(MdqaError, ValueError):
    exit_code = 6


class SchemaViolation(MdqaError, ValueError):
    exit_code = 2

    def __init__(self, line: int, field: str, message: str = "invalid value"):
        self.line = line
        self.field = field
        super().__init__(f"line {line}: field {field!r}: {message}")


class DuplicateSampleId(MdqaError, ValueError):
    exit_code = 2

    def __init__(self, sample_id: str, line: int | None = None):
        self.sample_id = sample_id
        self.line = line
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}duplicate sample_id {sample_id!r}")


class MissingGoldAnswer(MdqaError, ValueError):
    exit_code = 2

    def __init__(self, sample_id: str):
        self.sample_id = sample_id
        super().__init__(f"reference sample {sample_id!r} has no gold answer")


class EmptyKeywordList(MdqaError, ValueError):
    exit_code = 2


class MissingHypothesis(MdqaError, KeyError):
    exit_code = 3

    def __init__(self, sample_id: str):
        self.sample_id = sample_id
        super().__init__(f"no hypothesis for sample {sample_id!r}")

    def __str__(self) -> str:
        return self.args[0]


class UnknownSampleId(MdqaError, KeyError):
    exit_code = 3

    def __init__(self, sample_id: str):
        self.sample_id = sample_id
        super().__init__(f"hypothesis {sample_id!r} matches no reference sample")

    def __str__(self) -> str:
        return self.args[0]


class MissingPrediction(MdqaError, KeyError):
    exit_code = 3

    def __init__(self, sample_id: str):
        self.sample_id = sample_id
        super().__init__(f"no prediction for eval sample {sample_id!r}")

    def __str__(self) -> str:
        return self.args[0]


class SampleIdMismatch(MdqaError, ValueError):
    exit_code = 3

    def __init__(self, path: str, missing: list[str], extra: list[str]):
        self.path = path
        self.missing = missing
        self.extra = extra
        super().__init__(
            f"{path}: sample ids differ from the first file "
            f"(missing {missing[:10]}, extra {extra[:10]})"
        )


class TestSplitRejected(MdqaError, ValueError):
    __test__ = False  # not a pytest class
    exit_code = 4

    def __init__(self, sample_id: str):
        self.sample_id = sample_id
        super().__init__(
            f"sample {sample_id!r} is from the test split; pass allow_test=True to override"
        )


class HttpError(MdqaError):
    exit_code = 5

    def __init__(self, status: int | None, attempt: int, detail: str = ""):
        self.status = status
        self.attempt = attempt
        super().__init__(f"embedding request failed (status={status}, attempt={attempt}) {detail}".rstrip())


class DimensionMismatch(MdqaError, ValueError):
    exit_code = 5


class CardMismatch(MdqaError, ValueError):
    exit_code = 2


class EmptyCandidateSet(MdqaError, ValueError):
    exit_code = 2
