"""Reference resolution and compilation of the schema shorthand.

Compilation rewrites a shorthand schema into a self-contained JSON
Schema (draft-04 subset): references are resolved and inlined, rich
types become uri-string schemas annotated with a media type, property
constraints (``/K``, ``?K``, ``/K=``, ``?K=``, ``/*``) become
``properties``/``required``/``additionalProperties`` entries, and plain
keywords pass through. The output never contains shorthand-specific
keys.
"""

from __future__ import annotations

import logging
import re
from typing import Callable, Optional, Protocol

from ..errors import (ReferenceCycle, ResolutionIOError, SchemaError,
                      UnresolvedReference)
from ..values import Value
from .builtin import BUILTIN_TEMPLATES
from .keys import KeyKind, classify_key, parse_rich_type
from .templates import SchemaTemplate, instantiate

logger = logging.getLogger(__name__)

DRAFT4_HYPER = "http://json-schema.org/draft-04/hyper-schema#"

_SCHEME = re.compile(r"^[A-Za-z][A-Za-z0-9+.\-]*:")

_JSON_TYPES = ("integer", "number", "string", "boolean", "array", "object")


class SchemaFetcher(Protocol):
    """Resolves a globally addressed schema; raises ResolutionIOError
    on failure. Implementations must be safe for concurrent use."""

    def fetch_schema(self, address: str, params: Optional[dict] = None) -> Value: ...


def is_global_address(address: str) -> bool:
    return bool(_SCHEME.match(address))


class ResolutionContext:
    """Maps local reference addresses to schema templates or global
    addresses. Child contexts add local definitions that shadow their
    parents and vanish when the enclosing object scope is left."""

    def __init__(self, fetcher: Optional[SchemaFetcher] = None,
                 bindings: Optional[dict] = None,
                 parent: Optional["ResolutionContext"] = None):
        if parent is not None:
            self._fetcher = parent._fetcher
            self._chain = parent._chain
        else:
            self._fetcher = fetcher
            self._chain: list[str] = []
        self._bindings: dict[str, object] = {}
        self._parent = parent
        if parent is None:
            for name, body in BUILTIN_TEMPLATES.items():
                self._bindings[name] = SchemaTemplate.of(body)
        if bindings:
            for name, value in bindings.items():
                self.bind(name, value)

    def bind(self, name: str, value: Value | str | SchemaTemplate) -> None:
        if isinstance(value, SchemaTemplate):
            self._bindings[name] = value
        elif isinstance(value, str) and is_global_address(value):
            self._bindings[name] = value
        else:
            self._bindings[name] = SchemaTemplate.of(value)

    def child(self) -> "ResolutionContext":
        return ResolutionContext(parent=self)

    def lookup(self, name: str):
        ctx: Optional[ResolutionContext] = self
        while ctx is not None:
            if name in ctx._bindings:
                return ctx._bindings[name]
            ctx = ctx._parent
        return None

    def resolve(self, address: str, params: Optional[dict] = None) -> Value:
        """Resolve a reference address to a schema. The result may
        itself contain references; callers compile it."""
        if address in self._chain:
            raise ReferenceCycle(f"reference cycle through {address!r}")
        if is_global_address(address):
            if self._fetcher is None:
                raise ResolutionIOError(
                    f"no fetcher available for global address {address!r}")
            return self._fetcher.fetch_schema(address, params)
        entry = self.lookup(address)
        if entry is None:
            raise UnresolvedReference(f"unresolved reference ${address}")
        if isinstance(entry, str):
            return self.resolve(entry, params)
        return instantiate(entry, params)

    def _entered(self, address: str) -> "_ChainGuard":
        return _ChainGuard(self._chain, address)


class _ChainGuard:
    def __init__(self, chain: list[str], address: str):
        self._chain = chain
        self._address = address

    def __enter__(self):
        self._chain.append(self._address)

    def __exit__(self, *exc):
        self._chain.pop()


def _check_name(name: str) -> str:
    if not name:
        raise SchemaError("property constraint with empty name")
    if name.endswith("*") or name.endswith("="):
        raise SchemaError(f"illegal constraint name {name!r}")
    return name


def _check_keyword(key: str, compiled: Value) -> None:
    if key in ("minItems", "maxItems"):
        if isinstance(compiled, bool) or not isinstance(compiled, int) or compiled < 0:
            raise SchemaError(f"{key} must be a non-negative integer")
    elif key in ("minimum", "maximum"):
        if isinstance(compiled, bool) or not isinstance(compiled, (int, float)):
            raise SchemaError(f"{key} must be numeric")
    elif key in ("enum", "allOf", "oneOf"):
        if not isinstance(compiled, list):
            raise SchemaError(f"{key} must be an array")
    elif key == "type":
        options = compiled if isinstance(compiled, list) else [compiled]
        if not isinstance(compiled, (str, list)) or any(
                t not in _JSON_TYPES for t in options):
            raise SchemaError(f"type must name JSON types, got {compiled!r}")


def compile_schema(schema: Value, ctx: ResolutionContext) -> Value:
    """Compile a shorthand schema to its JSON Schema form. Object
    results are stamped with the draft-04 hyper-schema marker at the
    root."""
    compiled = _compile(schema, ctx)
    if isinstance(compiled, dict):
        return {"$schema": DRAFT4_HYPER, **compiled}
    return compiled


def _compile(schema: Value, ctx: ResolutionContext) -> Value:
    if isinstance(schema, (bool, int, float)):
        return schema
    if isinstance(schema, str):
        if schema.startswith("$") and schema not in ("$ref", "$schema"):
            address = schema[1:]
            resolved = ctx.resolve(address)
            with ctx._entered(address):
                return _compile(resolved, ctx)
        if schema.startswith("@"):
            media_type = parse_rich_type(schema)
            return {"type": "string", "format": "uri", "mediaType": media_type}
        return schema
    if isinstance(schema, list):
        return [_compile(item, ctx) for item in schema]
    if isinstance(schema, dict):
        return _compile_object(schema, ctx)
    raise SchemaError(f"not a schema value: {type(schema).__name__}")


def _compile_object(schema: dict, ctx: ResolutionContext) -> Value:
    scope = ctx.child()
    ref_key = None
    for key in schema:
        kind = classify_key(key).kind
        if kind is KeyKind.LOCAL_DEF:
            scope.bind(_check_name(classify_key(key).name), schema[key])
        elif kind is KeyKind.REFERENCE and ref_key is None:
            ref_key = key

    if ref_key is not None:
        params = schema[ref_key]
        if not isinstance(params, dict):
            raise SchemaError(
                f"parameterised reference {ref_key!r} needs an object value")
        discarded = [k for k in schema
                     if k != ref_key and classify_key(k).kind is not KeyKind.LOCAL_DEF]
        if discarded:
            logger.warning("properties %s discarded next to reference %s",
                           discarded, ref_key)
        address = classify_key(ref_key).name
        resolved = scope.resolve(address, params)
        with scope._entered(address):
            return _compile(resolved, scope)

    out: dict = {}
    properties: dict = {}
    required: list[str] = []
    implies_object = False
    for key, val in schema.items():
        ck = classify_key(key)
        if ck.kind is KeyKind.LOCAL_DEF:
            continue
        if ck.kind is KeyKind.ADDITIONAL_PROPS:
            out["additionalProperties"] = _compile(val, scope)
            implies_object = True
        elif ck.kind in (KeyKind.MANDATORY, KeyKind.OPTIONAL,
                         KeyKind.MANDATORY_VALUE, KeyKind.OPTIONAL_VALUE):
            name = _check_name(ck.name)
            if name in properties:
                raise SchemaError(f"conflicting constraints for property {name!r}")
            if ck.kind in (KeyKind.MANDATORY_VALUE, KeyKind.OPTIONAL_VALUE):
                properties[name] = {"enum": [val]}
            else:
                properties[name] = _compile(val, scope)
            if ck.kind in (KeyKind.MANDATORY, KeyKind.MANDATORY_VALUE):
                required.append(name)
            implies_object = True
        elif ck.kind is KeyKind.KEYWORD:
            if key == "allItems":
                if "items" in schema:
                    raise SchemaError("allItems and items on the same schema")
                out["items"] = _compile(val, scope)
            else:
                compiled = _compile(val, scope)
                _check_keyword(key, compiled)
                out[key] = compiled
        else:
            raise SchemaError(f"misplaced constraint key {key!r}")
    if properties:
        out["properties"] = properties
    if required:
        out["required"] = required
    if implies_object and "type" not in out:
        out["type"] = "object"
    return out


def shorthand_keys_left(compiled: Value) -> list[str]:
    """Return any shorthand-style keys remaining in schema positions of
    a compiled schema; tests assert this is empty. Keys inside ``enum``
    and ``default`` are verbatim data and exempt."""
    bad: list[str] = []

    def is_shorthand(key: str) -> bool:
        if key == "$schema":
            return False
        return key[:1] in "/?#$%@" or key.endswith("=")

    def walk_schema(node: Value) -> None:
        if isinstance(node, list):
            for item in node:
                walk_schema(item)
            return
        if not isinstance(node, dict):
            return
        for key, val in node.items():
            if is_shorthand(key):
                bad.append(key)
            if key == "properties" and isinstance(val, dict):
                for sub in val.values():
                    walk_schema(sub)
            elif key in ("enum", "default"):
                continue
            else:
                walk_schema(val)

    walk_schema(compiled)
    return bad
