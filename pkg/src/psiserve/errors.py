"""Error taxonomy shared by the protocol layer and the schema machinery.

Each error class carries the HTTP status it maps to on the wire, so the
request handlers can translate any raised PsiError into an error body
without per-site switch statements.
"""

from __future__ import annotations


class PsiError(Exception):
    status = 500

    def __init__(self, message: str, detail: str | None = None):
        super().__init__(message)
        self.message = message
        self.detail = detail


class BadRequest(PsiError):
    status = 400


class Forbidden(PsiError):
    status = 403


class NotFound(PsiError):
    status = 404


class MethodNotAllowed(PsiError):
    status = 405


class ServerError(PsiError):
    status = 500


class NotImplementedByService(PsiError):
    status = 501


class SchemaError(BadRequest):
    """A schema is malformed: illegal constraint key, bad constraint
    argument, empty rich type, and the like."""


class UnresolvedReference(SchemaError):
    """A local reference address has no binding."""


class ReferenceCycle(SchemaError):
    """Reference resolution revisited an address in one chain."""


class ResolutionIOError(BadRequest):
    """Fetching a globally addressed schema or resource failed."""
