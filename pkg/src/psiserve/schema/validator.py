"""Validation of values against compiled schemas, including rich values.

The compiled vocabulary is: type, minimum, maximum, enum, allOf, oneOf,
minItems, maxItems, items, properties, required, additionalProperties.
``format``, ``mediaType``, ``default``, ``title`` and ``description``
are annotations and never fail a value on their own; ``mediaType`` is
the hook through which rich-value checking is routed when a media-type
resolver is supplied.

Type checks follow JSON number semantics: an int satisfies "number" and
a float with zero fractional part satisfies "integer". Booleans satisfy
only "boolean".
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Protocol
from urllib.parse import urlsplit

from ..errors import PsiError
from ..values import (Value, is_integer_valued, is_number, json_equal,
                      parse_data_uri)
from .compiler import ResolutionContext, compile_schema

MAX_DEPTH = 64

Violation = tuple[str, str, str]  # (path into the value, keyword, message)


@dataclass
class ValidationOutcome:
    valid: bool
    violations: list[Violation] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.valid

    def message(self) -> str:
        if self.valid:
            return "valid"
        return "; ".join(f"{path or '<root>'}: {msg}" for path, _, msg in self.violations)


class MediaTypeResolver(Protocol):
    """Reports the Content-Type an HTTP URI serves; raises PsiError
    when the URI cannot be reached."""

    def content_type(self, uri: str) -> str: ...


RichChecker = Callable[[Value, str, str], list[Violation]]


def _type_name(v: Value) -> str:
    if isinstance(v, bool):
        return "boolean"
    if isinstance(v, int):
        return "integer"
    if isinstance(v, float):
        return "number"
    if isinstance(v, str):
        return "string"
    if isinstance(v, list):
        return "array"
    return "object"


def _satisfies_type(v: Value, t: str) -> bool:
    if t == "integer":
        return is_integer_valued(v)
    if t == "number":
        return is_number(v)
    return _type_name(v) == t


def validate(value: Value, schema: Value,
             rich_checker: Optional[RichChecker] = None) -> ValidationOutcome:
    """Validate a value against a compiled schema.

    Schemas that are atoms or empty objects state no constraints and
    accept everything. A schema that is an array is positional: the
    value must be an array of the same length with each item valid
    against the schema at its position.
    """
    violations: list[Violation] = []
    _validate(value, schema, "", violations, rich_checker, 0)
    return ValidationOutcome(valid=not violations, violations=violations)


def _validate(value: Value, schema: Value, path: str,
              out: list[Violation], rich: Optional[RichChecker], depth: int) -> None:
    if depth > MAX_DEPTH:
        out.append((path, "depth", f"nesting deeper than {MAX_DEPTH}"))
        return
    if isinstance(schema, list):
        _positional_items(value, schema, path, out, rich, depth)
        return
    if not isinstance(schema, dict):
        return  # an atom states no constraints

    t = schema.get("type")
    if t is not None:
        options = t if isinstance(t, list) else [t]
        if not any(_satisfies_type(value, o) for o in options):
            out.append((path, "type",
                        f"expected {' or '.join(options)}, got {_type_name(value)}"))

    if is_number(value):
        lo = schema.get("minimum")
        if lo is not None and value < lo:
            out.append((path, "minimum", f"{value} is below minimum {lo}"))
        hi = schema.get("maximum")
        if hi is not None and value > hi:
            out.append((path, "maximum", f"{value} is above maximum {hi}"))

    enum = schema.get("enum")
    if enum is not None and not any(json_equal(value, member) for member in enum):
        out.append((path, "enum", f"{value!r} is not one of the permitted values"))

    for sub in schema.get("allOf", []):
        _validate(value, sub, path, out, rich, depth + 1)

    one_of = schema.get("oneOf")
    if one_of is not None:
        matches = sum(
            1 for sub in one_of
            if validate(value, sub, rich_checker=rich).valid)
        if matches != 1:
            out.append((path, "oneOf", f"matched {matches} of {len(one_of)} schemas"))

    if isinstance(value, list):
        lo = schema.get("minItems")
        if lo is not None and len(value) < lo:
            out.append((path, "minItems", f"{len(value)} items, need at least {lo}"))
        hi = schema.get("maxItems")
        if hi is not None and len(value) > hi:
            out.append((path, "maxItems", f"{len(value)} items, allowed at most {hi}"))
        items = schema.get("items")
        if isinstance(items, list):
            _positional_items(value, items, path, out, rich, depth)
        elif items is not None:
            for i, item in enumerate(value):
                _validate(item, items, f"{path}/{i}", out, rich, depth + 1)

    if isinstance(value, dict):
        props = schema.get("properties", {})
        for name, sub in props.items():
            if name in value:
                _validate(value[name], sub, f"{path}/{name}", out, rich, depth + 1)
        for name in schema.get("required", []):
            if name not in value:
                out.append((path, "required", f"missing required property {name!r}"))
        extra = schema.get("additionalProperties")
        if extra is not None:
            for name, item in value.items():
                if name in props:
                    continue
                if extra is False:
                    out.append((f"{path}/{name}", "additionalProperties",
                                "additional property not allowed"))
                elif extra is not True:
                    _validate(item, extra, f"{path}/{name}", out, rich, depth + 1)

    media_type = schema.get("mediaType")
    if media_type is not None and rich is not None and isinstance(value, str):
        out.extend(rich(value, media_type, path))


def _positional_items(value: Value, schemas: list, path: str,
                      out: list[Violation], rich: Optional[RichChecker],
                      depth: int) -> None:
    if not isinstance(value, list):
        out.append((path, "items", f"expected array, got {_type_name(value)}"))
        return
    if len(value) != len(schemas):
        out.append((path, "items",
                    f"expected {len(schemas)} items, got {len(value)}"))
        return
    for i, (item, sub) in enumerate(zip(value, schemas)):
        _validate(item, sub, f"{path}/{i}", out, rich, depth + 1)


# --- rich values -------------------------------------------------------------


def normalize_media_type(raw: str) -> str:
    """Strip parameters such as charset and lowercase the type/subtype."""
    return raw.split(";", 1)[0].strip().lower()


def validate_rich(value: Value, media_type: str,
                  resolver: Optional[MediaTypeResolver]) -> ValidationOutcome:
    """Check that a value is a URI resolving to the given media type.

    http/https URIs ask the resolver for the served Content-Type; data
    URIs carry their media type inline. Payload bytes are never read.
    """
    violations = _check_rich(value, media_type, "", resolver)
    return ValidationOutcome(valid=not violations, violations=violations)


def _check_rich(value: Value, media_type: str, path: str,
                resolver: Optional[MediaTypeResolver]) -> list[Violation]:
    if not isinstance(value, str):
        return [(path, "mediaType", "rich value must be a URI string")]
    scheme = urlsplit(value).scheme.lower()
    want = normalize_media_type(media_type)
    if scheme == "data":
        try:
            got = normalize_media_type(parse_data_uri(value).media_type)
        except PsiError as exc:
            return [(path, "mediaType", f"bad data URI: {exc.message}")]
        if got != want:
            return [(path, "mediaType",
                     f"data URI carries {got}, schema requires {want}")]
        return []
    if scheme in ("http", "https"):
        if resolver is None:
            return [(path, "mediaType", "no resolver available for HTTP URI")]
        try:
            got = normalize_media_type(resolver.content_type(value))
        except PsiError as exc:
            return [(path, "mediaType", f"could not verify {value!r}: {exc.message}")]
        except Exception as exc:  # resolver I/O failures make the value unverifiable
            return [(path, "mediaType", f"could not verify {value!r}: {exc}")]
        if got != want:
            return [(path, "mediaType", f"URI serves {got}, schema requires {want}")]
        return []
    return [(path, "mediaType", f"unsupported URI scheme {scheme or '<none>'!r}")]


def rich_checker_for(resolver: Optional[MediaTypeResolver]) -> RichChecker:
    def check(value: Value, media_type: str, path: str) -> list[Violation]:
        return _check_rich(value, media_type, path, resolver)
    return check


def validate_psi(value: Value, schema: Value, ctx: ResolutionContext,
                 resolver: Optional[MediaTypeResolver] = None,
                 rich: bool = False) -> ValidationOutcome:
    """Compile a shorthand schema and validate against it. With
    ``rich=True`` (or a resolver supplied), media-typed subtrees are
    checked as rich values."""
    compiled = compile_schema(schema, ctx)
    checker = rich_checker_for(resolver) if (rich or resolver is not None) else None
    return validate(value, compiled, rich_checker=checker)


class HttpMediaTypeResolver:
    """Resolves Content-Type with a HEAD request, falling back to GET.
    Only response headers are consumed."""

    def __init__(self, timeout: float = 3.0):
        self._timeout = timeout

    def content_type(self, uri: str) -> str:
        import httpx

        with httpx.Client(timeout=self._timeout, follow_redirects=True) as client:
            try:
                response = client.head(uri)
                if response.status_code < 400 and "content-type" in response.headers:
                    return response.headers["content-type"]
            except httpx.HTTPError:
                pass
            with client.stream("GET", uri) as response:
                if response.status_code >= 400:
                    raise PsiError(f"GET {uri} returned {response.status_code}")
                content_type = response.headers.get("content-type")
        if not content_type:
            raise PsiError(f"{uri} served no Content-Type")
        return content_type
