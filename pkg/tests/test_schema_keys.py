import pytest
from hypothesis import given, strategies as st

from psiserve.errors import SchemaError
from psiserve.schema import (KeyKind, ResolutionContext, classify_key,
                             compile_schema, compose_array, compose_object,
                             parse_rich_type, validate)


@pytest.mark.parametrize("key,kind,name", [
    ("/sepal", KeyKind.MANDATORY, "sepal"),
    ("?invert", KeyKind.OPTIONAL, "invert"),
    ("/psiType=", KeyKind.MANDATORY_VALUE, "psiType"),
    ("?version=", KeyKind.OPTIONAL_VALUE, "version"),
    ("/*", KeyKind.ADDITIONAL_PROPS, "*"),
    ("#addr", KeyKind.LOCAL_DEF, "addr"),
    ("$integer", KeyKind.REFERENCE, "integer"),
    ("$http://example.org/s", KeyKind.REFERENCE, "http://example.org/s"),
    ("$ref", KeyKind.KEYWORD, "$ref"),
    ("$schema", KeyKind.KEYWORD, "$schema"),
    ("type", KeyKind.KEYWORD, "type"),
    ("minItems", KeyKind.KEYWORD, "minItems"),
])
def test_classification(key, kind, name):
    ck = classify_key(key)
    assert ck.kind is kind
    assert ck.name == name


@given(st.text(min_size=1, max_size=12))
def test_classification_is_total(key):
    ck = classify_key(key)
    assert ck.kind in KeyKind


def test_rich_type():
    assert parse_rich_type("@image/jpeg") == "image/jpeg"
    assert parse_rich_type("@text/plain") == "text/plain"
    with pytest.raises(SchemaError):
        parse_rich_type("@")


def test_compose_array_shape():
    composed = compose_array([{"/age": "$integer"}, "$boolean"])
    assert composed == {"type": "array",
                        "items": [{"/age": "$integer"}, "$boolean"]}
    assert compose_array([]) == {"type": "array", "items": []}


def test_compose_object_shape():
    composed = compose_object(["stats", "alive"],
                              [{"/age": "$integer"}, "$boolean"])
    assert composed == {"/stats": {"/age": "$integer"}, "/alive": "$boolean"}
    assert compose_object([], []) == {}
    assert compose_object(["length", "width"], ["$number", "$number"]) == \
        {"/length": "$number", "/width": "$number"}


def test_compose_object_duplicate_keys():
    with pytest.raises(SchemaError):
        compose_object(["a", "a"], ["$number", "$number"])


SMALL_VALUES = [0, 1, 7, 2.5, "a", "setosa", True, False, [], [1], [1, "a"],
                [{"age": 3}, True], {"age": 12}, {"age": "x"}, {}]


def test_array_composition_semantics_by_enumeration(ctx):
    parts = [{"/age": "$integer"}, "$boolean"]
    compiled = compile_schema(compose_array(parts), ctx)
    compiled_parts = [compile_schema(p, ctx) for p in parts]
    for value in SMALL_VALUES + [[{"age": 12}, True], [{"age": 12}], [True, {"age": 12}]]:
        expected = (isinstance(value, list) and len(value) == len(parts)
                    and all(validate(v, s).valid
                            for v, s in zip(value, compiled_parts)))
        assert validate(value, compiled).valid == expected, value


def test_object_composition_semantics_by_enumeration(ctx):
    keys = ["stats", "alive"]
    parts = [{"/age": "$integer"}, "$boolean"]
    compiled = compile_schema(compose_object(keys, parts), ctx)
    compiled_parts = [compile_schema(p, ctx) for p in parts]
    candidates = SMALL_VALUES + [
        {"stats": {"age": 321}, "alive": False},
        {"stats": {"age": 321}},
        {"alive": True},
        {"stats": True, "alive": False},
        {"stats": {"age": 1}, "alive": False, "extra": 1},
    ]
    for value in candidates:
        expected = (isinstance(value, dict)
                    and all(k in value for k in keys)
                    and all(validate(value[k], s).valid
                            for k, s in zip(keys, compiled_parts)))
        assert validate(value, compiled).valid == expected, value
