"""Domain entities behind the resource kinds, fold selection, and the
schema-compatibility check used by joins.

Entities store server-relative keys; representations are rendered
against the service base URI at request time so the same registry can
be served from any address.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

from .errors import BadRequest
from .values import Value, json_equal

Instance = dict
Extractor = Callable[[Instance], Value]

FOLD_QUERY_SCHEMA: dict = {
    "description": "Select subset 'fold' of 'numfolds' total subsets of "
                   "instances. Use 'invert=true' to select every other fold.",
    "/fold": {"$integer": {"min": 1, "title": "Fold number",
                           "description": "<= number of folds"}},
    "/numfolds": {"$integer": {"min": 1, "title": "Total folds"}},
    "?invert": {"$boolean": {"title": "Invert selection"}},
}


@dataclass(frozen=True)
class FoldQuery:
    fold: int
    numfolds: int
    invert: bool = False

    def suffix(self) -> str:
        extra = "&invert=true" if self.invert else ""
        return f"?fold={self.fold}&numfolds={self.numfolds}{extra}"


def select_fold(n: int, q: FoldQuery) -> list[int]:
    """1-based indices of fold ``q.fold`` of ``q.numfolds`` over n
    instances: the arithmetic progression fold, fold+k, fold+2k, ...
    Inverting selects the ascending complement."""
    if not (1 <= q.fold <= q.numfolds <= max(n, 1)):
        raise BadRequest(
            f"fold selection needs 1 <= fold <= numfolds <= {n}, "
            f"got fold={q.fold} numfolds={q.numfolds}")
    chosen = set(range(q.fold, n + 1, q.numfolds))
    if q.invert:
        return [i for i in range(1, n + 1) if i not in chosen]
    return sorted(chosen)


def parse_fold_query(args: dict[str, Value]) -> Optional[FoldQuery]:
    """Extract a fold query from coerced query arguments; None when no
    fold arguments are present."""
    if not any(k in args for k in ("fold", "numfolds", "invert")):
        return None
    fold = args.get("fold")
    numfolds = args.get("numfolds")
    invert = args.get("invert", False)
    if not isinstance(fold, int) or isinstance(fold, bool):
        raise BadRequest("fold must be an integer")
    if not isinstance(numfolds, int) or isinstance(numfolds, bool):
        raise BadRequest("numfolds must be an integer")
    if not isinstance(invert, bool):
        raise BadRequest("invert must be a boolean")
    return FoldQuery(fold=fold, numfolds=numfolds, invert=invert)


# --- entities ----------------------------------------------------------------


@dataclass
class Relation:
    key: str
    description: str
    instances: list[Instance]
    attribute_keys: list[str] = field(default_factory=list)
    default_attribute: str = ""
    query_schema: Optional[Value] = None

    @property
    def size(self) -> int:
        return len(self.instances)


@dataclass
class Attribute:
    key: str
    relation_key: str
    emits: Value
    extractor: Extractor
    description: Optional[str] = None
    subattributes: Optional[Value] = None  # list of keys or name -> key map
    deletable: bool = False
    chain: list[str] = field(default_factory=list)  # transformer URIs applied after


@dataclass
class Training:
    learner_key: str
    status: str
    ready_at: float  # time.monotonic deadline

    def done(self) -> bool:
        return time.monotonic() >= self.ready_at


@dataclass
class Transformer:
    key: str
    accepts: Value
    emits: Value
    fn: Optional[Callable[[Value], Value]] = None
    description: Optional[str] = None
    provenance: Optional[dict] = None
    chain: list[str] = field(default_factory=list)  # applied after fn
    update_key: Optional[str] = None
    update_schema: Optional[Value] = None
    apply_update: Optional[Callable[[Value], None]] = None
    clone: Optional[Callable[[], "Transformer"]] = None  # for immutable updates
    training: Optional[Training] = None


@dataclass
class UpdateEndpoint:
    key: str
    predictor_key: str


@dataclass
class SchemaResource:
    key: str
    name: str
    template_body: Value


@dataclass
class Learner:
    key: str
    description: str
    task_schema: Value
    train: Optional[Callable] = None  # None: listed but not implemented (501)


# --- compatibility ------------------------------------------------------------

_CONSTRAINTS = ("type", "minimum", "maximum", "enum", "allOf", "oneOf",
                "minItems", "maxItems", "items", "properties", "required",
                "additionalProperties", "mediaType")


def _vacuous(schema: Value) -> bool:
    if not isinstance(schema, dict):
        return not isinstance(schema, list)
    return not any(k in schema for k in _CONSTRAINTS)


def _strip(schema: Value) -> Value:
    if isinstance(schema, dict):
        return {k: v for k, v in schema.items() if k != "$schema"}
    return schema


def _types_of(schema: dict) -> Optional[list[str]]:
    t = schema.get("type")
    if t is None:
        return None
    return t if isinstance(t, list) else [t]


def _type_fits(emit_type: str, accept_types: list[str]) -> bool:
    for a in accept_types:
        if emit_type == a or (emit_type == "integer" and a == "number"):
            return True
    return False


def subsumes(emit: Value, accept: Value) -> bool:
    """Conservative structural proof that every value valid for ``emit``
    is valid for ``accept`` (both compiled). False means "could not
    prove", not necessarily a counterexample."""
    from .schema.validator import validate

    emit, accept = _strip(emit), _strip(accept)
    if _vacuous(accept):
        return True
    if json_equal(emit, accept):
        return True
    if isinstance(emit, list):
        emit = {"type": "array", "items": emit}
    if isinstance(accept, list):
        accept = {"type": "array", "items": accept}
    if not isinstance(emit, dict):
        return False  # emit is unconstrained but accept is not

    enum = emit.get("enum")
    if enum is not None:
        return all(validate(member, accept).valid for member in enum)

    if "allOf" in emit:
        residue = {k: v for k, v in emit.items() if k != "allOf"}
        branches = list(emit["allOf"]) + ([residue] if not _vacuous(residue) else [])
        return any(subsumes(branch, accept) for branch in branches)
    if "oneOf" in emit:
        residue = {k: v for k, v in emit.items() if k != "oneOf"}
        return all(subsumes(_merge(branch, residue), accept)
                   for branch in emit["oneOf"])

    if "allOf" in accept:
        residue = {k: v for k, v in accept.items() if k != "allOf"}
        return (all(subsumes(emit, branch) for branch in accept["allOf"])
                and subsumes(emit, residue))
    if "oneOf" in accept or "enum" in accept:
        return False  # only provable through emit enumeration, handled above

    emit_types = _types_of(emit)
    accept_types = _types_of(accept)
    if accept_types is not None:
        if emit_types is None:
            return False
        if not all(_type_fits(e, accept_types) for e in emit_types):
            return False

    if not _range_within(emit, accept):
        return False
    if not _items_within(emit, accept):
        return False
    if not _object_within(emit, accept):
        return False
    if "mediaType" in accept:
        from .schema.validator import normalize_media_type
        if "mediaType" not in emit:
            return False
        if normalize_media_type(emit["mediaType"]) != normalize_media_type(
                accept["mediaType"]):
            return False
    return True


def _merge(branch: Value, residue: dict) -> Value:
    if not residue:
        return branch
    if isinstance(branch, dict):
        return {"allOf": [branch, residue]}
    return residue


def _range_within(emit: dict, accept: dict) -> bool:
    if "minimum" in accept:
        if "minimum" not in emit or emit["minimum"] < accept["minimum"]:
            return False
    if "maximum" in accept:
        if "maximum" not in emit or emit["maximum"] > accept["maximum"]:
            return False
    return True


def _items_within(emit: dict, accept: dict) -> bool:
    a_items = accept.get("items")
    e_items = emit.get("items")
    e_len = len(e_items) if isinstance(e_items, list) else None
    if a_items is not None:
        if isinstance(a_items, list):
            if not isinstance(e_items, list) or len(e_items) != len(a_items):
                return False
            if not all(subsumes(e, a) for e, a in zip(e_items, a_items)):
                return False
        else:
            if e_items is None:
                return False
            candidates = e_items if isinstance(e_items, list) else [e_items]
            if not all(subsumes(e, a_items) for e in candidates):
                return False
    if "minItems" in accept:
        bound = e_len if e_len is not None else emit.get("minItems")
        if bound is None or bound < accept["minItems"]:
            return False
    if "maxItems" in accept:
        bound = e_len if e_len is not None else emit.get("maxItems")
        if bound is None or bound > accept["maxItems"]:
            return False
    return True


def _object_within(emit: dict, accept: dict) -> bool:
    if "additionalProperties" in accept:
        return False  # cannot bound the emitter's extra properties
    a_required = accept.get("required", [])
    e_required = emit.get("required", [])
    if not set(a_required) <= set(e_required):
        return False
    e_props = emit.get("properties", {})
    for name, sub in accept.get("properties", {}).items():
        if _vacuous(sub):
            continue
        if name not in e_props:
            return False
        if not subsumes(e_props[name], sub):
            return False
    return True


def check_compatibility(emits_compiled: Value, accepts_compiled: Value) -> bool:
    return subsumes(emits_compiled, accepts_compiled)
