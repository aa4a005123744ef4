"""Domain error types shared by every layer of the package.

Each error carries a stable machine ``code`` so the HTTP facade and the CLI
can map failures without string matching on messages.
"""

from __future__ import annotations


class CodingSupportError(Exception):
    """Base class for all domain errors."""

    code = "Error"

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message


class NotFound(CodingSupportError):
    """A code, section or session id does not exist."""

    code = "NotFound"


class EmptyQuery(CodingSupportError):
    """A search or autocomplete query is empty after normalization."""

    code = "EmptyQuery"


class ParseError(CodingSupportError):
    """A source file line cannot be parsed."""

    code = "ParseError"

    def __init__(self, file: str, line: int, reason: str):
        super().__init__(f"{file}:{line}: {reason}")
        self.file = file
        self.line = line
        self.reason = reason


class CountMismatch(CodingSupportError):
    """A source's declared record count differs from the parsed count."""

    code = "CountMismatch"

    def __init__(self, source: str, declared: int, actual: int):
        super().__init__(f"{source}: declared {declared} records, parsed {actual}")
        self.source = source
        self.declared = declared
        self.actual = actual


class InconsistentHierarchy(CodingSupportError):
    """The loaded classification violates a structural invariant."""

    code = "InconsistentHierarchy"

    def __init__(self, reports: list):
        lines = "; ".join(str(r) for r in reports[:5])
        more = f" (+{len(reports) - 5} more)" if len(reports) > 5 else ""
        super().__init__(f"{len(reports)} hierarchy defect(s): {lines}{more}")
        self.reports = reports


class EmptyConditionList(CodingSupportError):
    """A session was started without any pathological condition."""

    code = "EmptyConditionList"


class UnknownCode(CodingSupportError):
    """A supplied code does not exist in the expected section."""

    code = "UnknownCode"


class UnclassifiedProcedure(CodingSupportError):
    """A procedure code has no entry in the procedure-set table."""

    code = "UnclassifiedProcedure"


class StaleNode(CodingSupportError):
    """An answer referenced a node that is not the session's current node."""

    code = "StaleNode"


class InvalidAnswer(CodingSupportError):
    """An answer is not among the allowed answers of the current node."""

    code = "InvalidAnswer"


class SessionFinished(CodingSupportError):
    """The session already reached a terminal state."""

    code = "SessionFinished"
