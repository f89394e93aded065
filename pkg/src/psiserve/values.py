"""The JSON value universe and its text encodings.

Every request and response body in the service protocol is a ``Value``:
an integer, a float, a string, a boolean, a list of values, or a dict
with string keys. ``None`` is deliberately outside the universe; the
schema language has no null type, so a JSON ``null`` anywhere in a
message is a protocol error. Integers and floats are distinct variants
even when numerically equal (``11`` is an integer, ``11.0`` is a
number), which matters both for schema validation and for emitting
deterministic message bytes.
"""

from __future__ import annotations

import base64
import json
import re
from dataclasses import dataclass, field
from typing import Union

from .errors import BadRequest

Value = Union[int, float, str, bool, list, dict]

ATOM_TYPES = (bool, int, float, str)


class ValueDecodeError(BadRequest):
    """Malformed JSON text, duplicate object keys, or a null value."""


def _reject_duplicates(pairs: list[tuple[str, Value]]) -> dict:
    obj: dict = {}
    for key, val in pairs:
        if key in obj:
            raise ValueDecodeError(f"duplicate object key {key!r}")
        obj[key] = val
    return obj


def _reject_null(v) -> None:
    if v is None:
        raise ValueDecodeError("null is not a legal value")
    if isinstance(v, list):
        for item in v:
            _reject_null(item)
    elif isinstance(v, dict):
        for item in v.values():
            _reject_null(item)


def parse_json(text: Union[str, bytes]) -> Value:
    """Parse JSON text into a Value.

    Integers without a fraction or exponent parse as int; all other
    numbers parse as float. Duplicate object keys and nulls are
    rejected. Raises ValueDecodeError with the byte offset on bad
    syntax.
    """
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ValueDecodeError(f"body is not UTF-8: {exc}") from None
    try:
        parsed = json.loads(text, object_pairs_hook=_reject_duplicates)
    except json.JSONDecodeError as exc:
        raise ValueDecodeError(f"bad JSON at offset {exc.pos}: {exc.msg}") from None
    _reject_null(parsed)
    return parsed


def serialize_json(v: Value, indent: int | None = None) -> str:
    """Serialize a Value deterministically.

    Object keys keep their insertion order and floats use the shortest
    round-tripping decimal form, so equal values always produce equal
    bytes and ``parse_json(serialize_json(v)) == v``.
    """
    return json.dumps(v, ensure_ascii=False, allow_nan=False, indent=indent,
                      separators=(",", ": ") if indent else (",", ":"))


def is_integer_valued(v: Value) -> bool:
    """True for ints and for floats with zero fractional part (not bools)."""
    if isinstance(v, bool):
        return False
    if isinstance(v, int):
        return True
    return isinstance(v, float) and v.is_integer()


def is_number(v: Value) -> bool:
    return not isinstance(v, bool) and isinstance(v, (int, float))


def strict_equal(a: Value, b: Value) -> bool:
    """Variant-distinguishing equality: 2 != 2.0, True != 1.

    Mapping key order is compared too, so this doubles as a check that
    serialization round-trips preserve insertion order.
    """
    if isinstance(a, bool) or isinstance(b, bool):
        return isinstance(a, bool) and isinstance(b, bool) and a == b
    if isinstance(a, (int, float)):
        return type(a) is type(b) and a == b
    if isinstance(a, list):
        return (isinstance(b, list) and len(a) == len(b)
                and all(strict_equal(x, y) for x, y in zip(a, b)))
    if isinstance(a, dict):
        return (isinstance(b, dict) and list(a.keys()) == list(b.keys())
                and all(strict_equal(a[k], b[k]) for k in a))
    return type(a) is type(b) and a == b


def json_equal(a: Value, b: Value) -> bool:
    """JSON-semantics equality: 2 == 2.0 but True != 1; key order ignored."""
    if isinstance(a, bool) or isinstance(b, bool):
        return isinstance(a, bool) and isinstance(b, bool) and a == b
    if is_number(a) and is_number(b):
        return a == b
    if isinstance(a, list):
        return (isinstance(b, list) and len(a) == len(b)
                and all(json_equal(x, y) for x, y in zip(a, b)))
    if isinstance(a, dict):
        return (isinstance(b, dict) and set(a.keys()) == set(b.keys())
                and all(json_equal(a[k], b[k]) for k in a))
    return type(a) is type(b) and a == b


# --- data URIs -------------------------------------------------------------

_DATA_PREFIX = re.compile(r"^data:(//)?", re.IGNORECASE)


class DataUriError(BadRequest):
    """Not a well-formed data URI."""


@dataclass(frozen=True)
class DataUri:
    """A parsed ``data:`` URI. The payload is kept verbatim, never decoded;
    media-type checks are all the validator needs."""

    media_type: str = "text/plain"
    parameters: tuple[str, ...] = ()
    is_base64: bool = False
    payload: str = ""

    def render(self) -> str:
        parts = [self.media_type] + list(self.parameters)
        if self.is_base64:
            parts.append("base64")
        return "data:" + ";".join(parts) + "," + self.payload


def parse_data_uri(text: str) -> DataUri:
    """Parse a data URI far enough to know its media type.

    ``data://`` is tolerated as an alias for ``data:``. The part before
    the first comma is the media type plus parameters; an absent media
    type defaults to text/plain.
    """
    m = _DATA_PREFIX.match(text)
    if not m:
        raise DataUriError("not a data URI")
    rest = text[m.end():]
    if "," not in rest:
        raise DataUriError("data URI has no comma separator")
    head, payload = rest.split(",", 1)
    segments = head.split(";") if head else []
    is_base64 = False
    if segments and segments[-1].lower() == "base64":
        is_base64 = True
        segments = segments[:-1]
    media_type = "text/plain"
    params: list[str] = []
    if segments:
        if segments[0] and "/" in segments[0]:
            media_type = segments[0]
            params = [s for s in segments[1:] if s]
        else:
            params = [s for s in segments if s]
    return DataUri(media_type=media_type, parameters=tuple(params),
                   is_base64=is_base64, payload=payload)


def decode_data_payload(uri: DataUri) -> bytes:
    if uri.is_base64:
        return base64.b64decode(uri.payload)
    return unquote_strict(uri.payload).encode("utf-8")


# --- query strings ---------------------------------------------------------

_SAFE = frozenset("ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789-._~")
_HEX = "0123456789ABCDEF"
_PCT = re.compile(r"%([0-9A-Fa-f]{2})")


class QueryDecodeError(BadRequest):
    """Invalid percent-encoding in a query string."""


def quote(text: str) -> str:
    out = []
    for byte in text.encode("utf-8"):
        ch = chr(byte)
        if ch in _SAFE:
            out.append(ch)
        else:
            out.append("%" + _HEX[byte >> 4] + _HEX[byte & 0xF])
    return "".join(out)


def unquote_strict(text: str) -> str:
    """Percent-decode, rejecting bare or malformed % sequences."""
    pieces: list[bytes] = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "%":
            m = _PCT.match(text, i)
            if not m:
                raise QueryDecodeError(f"invalid percent escape at offset {i}")
            pieces.append(bytes([int(m.group(1), 16)]))
            i += 3
        else:
            pieces.append(ch.replace("+", " ").encode("utf-8"))
            i += 1
    try:
        return b"".join(pieces).decode("utf-8")
    except UnicodeDecodeError:
        raise QueryDecodeError("percent escapes decode to invalid UTF-8") from None


def encode_query(pairs: dict[str, str]) -> str:
    return "&".join(f"{quote(k)}={quote(v)}" for k, v in pairs.items())


def decode_query(query: str) -> dict[str, str]:
    """Decode a query string into an ordered key -> value dict.

    Splits each pair on the first ``=``; later duplicates of a key are
    rejected so handlers never see ambiguous arguments.
    """
    out: dict[str, str] = {}
    if not query:
        return out
    for chunk in query.split("&"):
        if not chunk:
            continue
        key, _, val = chunk.partition("=")
        key = unquote_strict(key)
        if key in out:
            raise QueryDecodeError(f"duplicate query argument {key!r}")
        out[key] = unquote_strict(val)
    return out
