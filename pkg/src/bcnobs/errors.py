"""Shared exception types for the toolkit."""

from __future__ import annotations

from dataclasses import dataclass


class BcnError(Exception):
    """Base class for all toolkit errors."""


class ModelError(BcnError):
    """Malformed model, or a vector that does not fit the model it is used with."""


class ArityCapError(BcnError):
    """An update mentions more distinct variables than the configured cap.

    Essentiality testing enumerates every assignment of an update's
    arguments, so above the cap the toolkit refuses instead of silently
    skipping the check.
    """

    def __init__(self, arity: int, cap: int, update_index: int | None = None):
        self.arity = arity
        self.cap = cap
        self.update_index = update_index
        where = f" in update {update_index}" if update_index is not None else ""
        super().__init__(f"{arity} distinct variables{where} exceed the arity cap of {cap}")


@dataclass(frozen=True)
class Diagnostic:
    """A located source-file message (1-based line and column)."""

    line: int
    column: int
    message: str

    def __str__(self) -> str:
        return f"{self.line}:{self.column}: {self.message}"


class ParseError(BcnError):
    """Source text rejected; carries every diagnostic that was found."""

    def __init__(self, diagnostics):
        self.diagnostics = tuple(diagnostics)
        super().__init__("\n".join(str(d) for d in self.diagnostics))


class TraceError(BcnError):
    """Trace file rejected (column set, width, time index, or bit value)."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(message if line is None else f"line {line}: {message}")


class HorizonError(BcnError):
    """Observation sequence shorter than the reconstruction needs."""

    def __init__(self, required: int, provided: int):
        self.required = required
        self.provided = provided
        super().__init__(f"need {required} output samples, got {provided}")


class ObservabilityUnknownError(BcnError):
    """Observer requested for a model the sufficient condition does not cover."""

    def __init__(self, verdict):
        self.verdict = verdict
        super().__init__("sufficient condition not met; cannot build a path observer")


class OracleCapError(BcnError):
    """Exact analysis refused because the instance exceeds the configured caps."""
