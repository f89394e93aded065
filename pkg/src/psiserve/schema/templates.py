"""Schema templates: parameterised schema bodies with ``%arg`` slots.

Instantiation rules:

* a property whose value is the string ``%name`` takes the supplied
  argument of that name (the same placeholder may appear under several
  properties, like the array template's ``%size``); failing that, an
  argument matching the property's own key fills it (so ``minItems``
  can be set directly even though the template parameterises it as
  ``%size``); with neither, the property is dropped;
* properties with fixed values are immutable: arguments matching them
  are ignored;
* supplied arguments that name neither a placeholder nor an existing
  key of the template body are added as new root properties;
* arguments arriving as query strings are JSON-parsed when they look
  like JSON, otherwise kept as text.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import SchemaError
from ..values import Value, parse_json


def _placeholder(v: Value) -> str | None:
    if isinstance(v, str) and v.startswith("%") and len(v) > 1:
        return v[1:]
    return None


def _collect_args(body: Value, found: set[str]) -> None:
    if isinstance(body, dict):
        for key, val in body.items():
            if _placeholder(key) is not None:
                raise SchemaError(f"placeholder {key!r} used as a key")
            name = _placeholder(val)
            if name is not None:
                found.add(name)
            else:
                _collect_args(val, found)
    elif isinstance(body, list):
        for item in body:
            _collect_args(item, found)


@dataclass(frozen=True)
class SchemaTemplate:
    body: Value
    known_args: frozenset[str] = field(default_factory=frozenset)

    @classmethod
    def of(cls, body: Value) -> "SchemaTemplate":
        found: set[str] = set()
        _collect_args(body, found)
        return cls(body=body, known_args=frozenset(found))


def coerce_argument(raw: Value) -> Value:
    """Turn a query-string argument into a value: JSON if it parses,
    text otherwise. Non-string arguments pass through unchanged."""
    if not isinstance(raw, str):
        return raw
    try:
        return parse_json(raw)
    except Exception:
        return raw


def _substitute(body: Value, args: dict[str, Value]) -> Value:
    if isinstance(body, dict):
        out: dict = {}
        for key, val in body.items():
            name = _placeholder(val)
            if name is not None:
                if name in args:
                    out[key] = args[name]
                elif key in args:
                    out[key] = args[key]
                # otherwise the whole property is dropped
            else:
                out[key] = _substitute(val, args)
        return out
    if isinstance(body, list):
        return [_substitute(item, args) for item in body]
    name = _placeholder(body)
    if name is not None:
        raise SchemaError(f"placeholder %{name} outside an object property")
    return body


def instantiate(template: SchemaTemplate, args: dict[str, Value] | None = None,
                coerce: bool = False) -> Value:
    args = dict(args or {})
    if coerce:
        args = {k: coerce_argument(v) for k, v in args.items()}
    result = _substitute(template.body, args)
    if isinstance(result, dict) and isinstance(template.body, dict):
        for name, val in args.items():
            if name not in template.known_args and name not in template.body:
                result[name] = val
    return result
