"""Fetching JSON representations and schemas from other services.

The router lets several in-process services (and their schema
resolution) reach each other without sockets, falling back to real HTTP
for foreign URIs. One fetcher instance backs both schema resolution and
resource dereferencing, so the two behave identically.
"""

from __future__ import annotations

from typing import Callable, Optional, Protocol

from .errors import PsiError, ResolutionIOError
from .values import Value, encode_query, parse_json, serialize_json


def params_to_query(params: dict) -> dict[str, str]:
    """Render reference parameters as query arguments: strings go as-is,
    anything else as JSON text (the receiving side JSON-parses args that
    look like JSON, which inverts this exactly)."""
    return {k: v if isinstance(v, str) else serialize_json(v)
            for k, v in params.items()}


class Fetcher(Protocol):
    def get_json(self, uri: str, params: Optional[dict] = None) -> Value: ...


class HttpFetcher:
    def __init__(self, timeout: float = 5.0):
        self._timeout = timeout

    def get_json(self, uri: str, params: Optional[dict] = None) -> Value:
        import httpx

        if params:
            sep = "&" if "?" in uri else "?"
            uri = uri + sep + encode_query(params_to_query(params))
        try:
            response = httpx.get(uri, timeout=self._timeout)
        except httpx.HTTPError as exc:
            raise ResolutionIOError(f"GET {uri} failed: {exc}") from None
        if response.status_code >= 400:
            raise ResolutionIOError(f"GET {uri} returned {response.status_code}")
        try:
            return parse_json(response.content)
        except PsiError as exc:
            raise ResolutionIOError(f"GET {uri} returned bad JSON: {exc.message}") from None


class Router:
    """Dispatches URIs with a registered base to an in-process handler
    and everything else to a fallback fetcher (or an error when there is
    none, which keeps tests network-free by construction)."""

    def __init__(self, fallback: Optional[Fetcher] = None):
        self._handlers: dict[str, Callable[[str, Optional[dict]], Value]] = {}
        self._fallback = fallback

    def mount(self, base_uri: str,
              handler: Callable[[str, Optional[dict]], Value]) -> None:
        self._handlers[base_uri.rstrip("/")] = handler

    def get_json(self, uri: str, params: Optional[dict] = None) -> Value:
        for base, handler in self._handlers.items():
            if uri == base or uri.startswith(base + "/") or uri.startswith(base + "?"):
                return handler(uri, params)
        if self._fallback is not None:
            return self._fallback.get_json(uri, params)
        raise ResolutionIOError(f"no route to {uri}")


class SchemaFetcherAdapter:
    """Presents a Fetcher as a schema fetcher for reference resolution."""

    def __init__(self, fetcher: Fetcher):
        self._fetcher = fetcher

    def fetch_schema(self, address: str, params: Optional[dict] = None) -> Value:
        return self._fetcher.get_json(address, params)
