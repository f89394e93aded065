"""Constraint-key grammar of the schema shorthand.

A schema object's keys fall into a small set of shapes: mandatory and
optional property constraints (``/K``, ``?K``), their fixed-value forms
(``/K=``, ``?K=``), the additional-properties wildcard (``/*``), local
definitions (``#K``), parameterised references (``$R``), and everything
else, which is a plain keyword passed through to the compiled output.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from ..errors import SchemaError


class KeyKind(Enum):
    MANDATORY = "mandatory"
    OPTIONAL = "optional"
    MANDATORY_VALUE = "mandatory-value"
    OPTIONAL_VALUE = "optional-value"
    ADDITIONAL_PROPS = "additional-props"
    LOCAL_DEF = "local-def"
    REFERENCE = "reference"
    KEYWORD = "keyword"


@dataclass(frozen=True)
class ConstraintKey:
    kind: KeyKind
    name: str


# $ref and $schema keep their JSON-Schema meaning and are never treated
# as references.
_EXEMPT = {"$ref", "$schema"}


def classify_key(key: str) -> ConstraintKey:
    """Classify a schema object key. Total: unrecognized plain strings
    are keywords; structural legality (for example an empty name) is
    enforced at compile time."""
    if key == "/*":
        return ConstraintKey(KeyKind.ADDITIONAL_PROPS, "*")
    if key.startswith("/"):
        if key.endswith("="):
            return ConstraintKey(KeyKind.MANDATORY_VALUE, key[1:-1])
        return ConstraintKey(KeyKind.MANDATORY, key[1:])
    if key.startswith("?"):
        if key.endswith("="):
            return ConstraintKey(KeyKind.OPTIONAL_VALUE, key[1:-1])
        return ConstraintKey(KeyKind.OPTIONAL, key[1:])
    if key.startswith("#"):
        return ConstraintKey(KeyKind.LOCAL_DEF, key[1:])
    if key.startswith("$") and key not in _EXEMPT:
        return ConstraintKey(KeyKind.REFERENCE, key[1:])
    return ConstraintKey(KeyKind.KEYWORD, key)


def parse_rich_type(s: str) -> str:
    """Extract the media type from a rich-type string like ``@image/jpeg``."""
    if not s.startswith("@"):
        raise SchemaError(f"not a rich type: {s!r}")
    media_type = s[1:]
    if not media_type:
        raise SchemaError("rich type with empty media type")
    return media_type


def compose_array(schemas: list) -> dict:
    """Array composition: values are arrays whose i-th item matches the
    i-th schema."""
    return {"type": "array", "items": list(schemas)}


def compose_object(keys: list[str], schemas: list) -> dict:
    """Object composition: values are objects carrying each key with a
    value matching the paired schema."""
    if len(keys) != len(schemas):
        raise SchemaError("object composition needs one key per schema")
    out: dict = {}
    for key, schema in zip(keys, schemas):
        if "/" + key in out:
            raise SchemaError(f"duplicate composition key {key!r}")
        out["/" + key] = schema
    return out
