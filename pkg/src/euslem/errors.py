"""Exception hierarchy shared by all euslem modules."""

from __future__ import annotations


class EuslemError(Exception):
    """Base class for every error raised by the toolkit."""


class DataError(EuslemError):
    """A data file could not be parsed or failed validation.

    ``line`` and ``column`` are 1-based and may be ``None`` when the problem
    is not tied to a position (for example a missing root sublexicon).
    """

    def __init__(self, message: str, line: int | None = None,
                 column: int | None = None, source: str | None = None):
        self.message = message
        self.line = line
        self.column = column
        self.source = source
        super().__init__(self._format())

    def _format(self) -> str:
        where = self.source or ""
        if self.line is not None:
            where += f":{self.line}" if where else f"line {self.line}"
            if self.column is not None:
                where += f":{self.column}"
        return f"{where}: {self.message}" if where else self.message


class RuleSyntaxError(DataError):
    pass


class RuleCompileError(DataError):
    pass


class LexiconError(DataError):
    pass


class TagsetError(DataError):
    pass


class ConstraintSyntaxError(DataError):
    pass


class CorpusFormatError(DataError):
    pass


class ModelFormatError(DataError):
    pass


class NoAlignment(EuslemError):
    """No NULL-padded alignment of the two strings exists over the feasible pairs."""


class UnanalyzableWord(EuslemError):
    """The word contains symbols outside the surface alphabet."""


class TrainingError(EuslemError):
    pass


class AlignmentMismatch(EuslemError):
    """Gold and system corpora do not share the same token stream."""

    def __init__(self, message: str, position: tuple[int, int]):
        self.position = position
        super().__init__(message)


class UnknownLemma(EuslemError):
    """The lemma has no entry in the lexicon."""
