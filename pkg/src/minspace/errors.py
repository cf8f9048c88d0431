"""Exception hierarchy with machine-readable error codes.

ParseError means the input text itself is malformed (CLI exit 2, HTTP 422).
DomainError and its subclasses mean the input is well-formed but the
requested computation is not applicable (CLI exit 1, HTTP 400).
"""
from __future__ import annotations


class MinspaceError(Exception):
    code = "error"

    def as_dict(self) -> dict:
        return {"code": self.code, "message": str(self)}


class ParseError(MinspaceError):
    code = "parse-error"

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)
        self.line = line
        self.column = column


class DomainError(MinspaceError):
    code = "domain-error"


class SignatureMismatch(DomainError):
    code = "signature-mismatch"


class NotLocallyFinite(DomainError):
    code = "not-locally-finite"


class LocallyFinite(DomainError):
    code = "locally-finite"


class BudgetExceeded(DomainError):
    code = "budget-exceeded"


class InconsistentLiterals(DomainError):
    code = "inconsistent-literals"


class NotMinimal(DomainError):
    code = "not-minimal"
