"""Exception types raised across the package."""

from __future__ import annotations

import typing as t


class DomainError(ValueError):
    """An argument lies outside the domain of a function."""


class FitError(RuntimeError):
    """A numerical fit failed; ``best`` carries the best iterate reached, if any."""

    def __init__(self, message: str, best: t.Any = None):
        super().__init__(message)
        self.best = best


class InsufficientData(ValueError):
    """Too few observations for the requested estimate."""

    def __init__(self, message: str, count: int | None = None):
        super().__init__(message)
        self.count = count


class ConfigError(ValueError):
    """Invalid pipeline configuration."""


class StageError(RuntimeError):
    """A pipeline stage failed; the partial report is kept on the exception."""

    def __init__(self, stage: str, cause: BaseException, partial: dict | None = None):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause
        self.partial = partial or {}


class IngestError(ValueError):
    """Malformed input file; ``line`` is the 1-based line number when known."""

    def __init__(self, message: str, line: int | None = None):
        super().__init__(f"line {line}: {message}" if line is not None else message)
        self.line = line
