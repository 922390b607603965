"""Exception taxonomy shared across the toolkit."""

from __future__ import annotations


class SseqError(Exception):
    """Base class for all toolkit errors."""


# ---------- algebra ----------

class UnknownGenerator(SseqError):
    pass


class DegreeMismatch(SseqError):
    pass


class OutOfRange(SseqError):
    pass


class NonConfluent(SseqError):
    """Rewriting exceeded its iteration bound or stabilized off-basis."""


class ModuleTimesModule(SseqError):
    pass


class MissingImage(SseqError):
    """A generator id is absent from a map table (image undetermined)."""


# ---------- file formats ----------

class FormatError(SseqError):
    """Parse error carrying file/line context when known."""

    def __init__(self, message: str, *, path: str | None = None,
                 line: int | None = None, column: int | None = None):
        self.path = path
        self.line = line
        self.column = column
        where = ""
        if path is not None:
            where = f"{path}:"
            if line is not None:
                where += f"{line}:"
                if column is not None:
                    where += f"{column}:"
            where += " "
        super().__init__(where + message)


class MalformedInteger(FormatError):
    pass


class ArityMismatch(FormatError):
    pass


class DuplicateIndex(FormatError):
    pass


class SchemaError(FormatError):
    pass


class MissingFile(FormatError):
    pass


class CrossValidation(FormatError):
    pass


class NonMonotoneIds(FormatError):
    pass


# ---------- naming grammar ----------

class NameError_(SseqError):
    """Base for naming-grammar errors (trailing underscore avoids the builtin)."""


class Malformed(NameError_):
    pass


class UnknownKeyword(NameError_):
    pass


class AmbiguousParse(NameError_):
    def __init__(self, message: str, candidates=()):
        self.candidates = tuple(candidates)
        super().__init__(message)


class InconsistentCells(NameError_):
    pass


class KeywordDegreeError(NameError_):
    pass


class Unsupported(NameError_):
    pass


# ---------- spectral sequence engine ----------

class SentinelConflict(SseqError):
    pass


class ShiftMismatch(SseqError):
    pass


class Contradiction(SseqError):
    """A differential/extension insertion conflicts with the recorded state.

    `reason` is a short machine tag; str(err) is the human line in the
    Table-of-Proofs style, e.g. "Csigma (115,14) [1,2] is not in B_2".
    """

    def __init__(self, message: str, reason: str = "coset"):
        self.reason = reason
        super().__init__(message)


# ---------- deduction ----------

class NotASurvivor(SseqError):
    pass


class BudgetExhausted(SseqError):
    """Propagation ran out of budget: inconclusive, not a contradiction."""


# ---------- proofs ----------

class MalformedNesting(SseqError):
    pass


# ---------- CLI ----------

class NotFound(SseqError):
    pass


class RangeEmpty(SseqError):
    pass
