import random

import pytest
from hypothesis import given, strategies as st

from psiserve.errors import PsiError
from psiserve.schema import (ResolutionContext, compile_schema, validate,
                             validate_psi, validate_rich)
from psiserve.schema.validator import MAX_DEPTH

from naive_validator import gen_pair, naive_valid


class StubResolver:
    """Media-type resolver serving canned Content-Type headers."""

    def __init__(self, table=None, fail=None):
        self.table = table or {}
        self.fail = fail
        self.calls = []

    def content_type(self, uri):
        self.calls.append(uri)
        if self.fail:
            raise PsiError(self.fail)
        if uri in self.table:
            return self.table[uri]
        raise PsiError(f"unknown uri {uri}")


class TestWorkedExamples:
    def test_bounded_integer_array(self):
        schema = {"type": "array",
                  "items": {"type": "integer", "minimum": 0, "maximum": 10}}
        assert validate([2, 3, 7], schema).valid
        assert not validate([0, -2, 11], schema).valid

    def test_nested_document_with_stubbed_address_schema(self):
        class Fetcher:
            def fetch_schema(self, address, params=None):
                assert address == "http://example.org/schema/address"
                return {"/number": "$integer", "/street": "$string",
                        "/suburb": "$string"}

        ctx = ResolutionContext(fetcher=Fetcher())
        schema = {
            "/version=": 2,
            "/id": "$integer",
            "/name": {"?first": "$string", "/last": "$string"},
            "/addresses": {"$array": {
                "items": "$http://example.org/schema/address",
                "minItems": 1}},
        }
        compiled = compile_schema(schema, ctx)
        good = {
            "version": 2,
            "id": 231,
            "name": {"first": "Amy", "last": "Jones"},
            "addresses": [{"number": 14, "street": "Bird St.",
                           "suburb": "Epping"}],
        }
        assert validate(good, compiled).valid
        assert not validate({**good, "version": 3}, compiled).valid
        assert not validate({**good, "addresses": []}, compiled).valid
        no_last = {**good, "name": {"first": "Amy"}}
        assert not validate(no_last, compiled).valid

    def test_enum_membership(self):
        schema = {"enum": ["setosa", "versicolor", "virginica"]}
        assert validate("setosa", schema).valid
        assert not validate("rose", schema).valid


class TestTypeSemantics:
    def test_whole_float_passes_integer(self):
        assert validate(16.0, {"type": "integer"}).valid
        assert not validate(16.5, {"type": "integer"}).valid

    def test_int_passes_number(self):
        assert validate(4, {"type": "number"}).valid

    def test_bool_is_only_boolean(self):
        assert not validate(True, {"type": "integer"}).valid
        assert not validate(True, {"type": "number"}).valid
        assert validate(True, {"type": "boolean"}).valid
        assert not validate(1, {"type": "boolean"}).valid

    def test_type_disjunction(self):
        schema = {"type": ["integer", "string"]}
        assert validate(1, schema).valid
        assert validate("a", schema).valid
        assert not validate(True, schema).valid

    def test_enum_numeric_equality(self):
        assert validate(2.0, {"enum": [2]}).valid
        assert not validate(True, {"enum": [1]}).valid


class TestStructures:
    def test_positional_items_require_same_length(self):
        schema = {"type": "array", "items": [{"type": "integer"},
                                             {"type": "string"}]}
        assert validate([1, "a"], schema).valid
        assert not validate([1], schema).valid
        assert not validate([1, "a", 2], schema).valid

    def test_bare_array_schema_is_positional(self):
        assert validate([1, "a"], [{"type": "integer"}, {"type": "string"}]).valid
        assert not validate([1, 2], [{"type": "integer"}, {"type": "string"}]).valid

    def test_additional_properties(self):
        schema = {"type": "object", "properties": {"a": {"type": "integer"}},
                  "additionalProperties": {"type": "string"}}
        assert validate({"a": 1, "b": "x"}, schema).valid
        assert not validate({"a": 1, "b": 2}, schema).valid
        closed = {"type": "object", "properties": {"a": {}},
                  "additionalProperties": False}
        assert validate({"a": 1}, closed).valid
        assert not validate({"a": 1, "b": 2}, closed).valid

    def test_annotations_are_ignored(self):
        schema = {"type": "string", "format": "uri",
                  "mediaType": "image/jpeg", "title": "x", "default": "y",
                  "description": "z"}
        assert validate("not a uri at all", schema).valid

    def test_violation_paths(self):
        schema = {"type": "object",
                  "properties": {"a": {"type": "array",
                                       "items": {"type": "integer"}}}}
        outcome = validate({"a": [1, "x"]}, schema)
        assert not outcome.valid
        assert outcome.violations[0][0] == "/a/1"

    def test_depth_limit(self):
        value = 1
        schema = {"type": "integer"}
        for _ in range(MAX_DEPTH + 2):
            value = [value]
            schema = {"type": "array", "items": [schema]}
        outcome = validate(value, schema)
        assert not outcome.valid
        assert any(kw == "depth" for _, kw, _ in outcome.violations)


class TestCombinators:
    @given(st.integers(min_value=-20, max_value=20))
    def test_all_of_monotonicity(self, value):
        a = {"type": "integer", "minimum": -5}
        b = {"maximum": 10}
        both = {"allOf": [a, b]}
        if validate(value, both).valid:
            assert validate(value, a).valid
            assert validate(value, b).valid

    def test_one_of_exclusivity(self):
        schema = {"oneOf": [{"type": "integer", "minimum": 0},
                            {"type": "integer", "maximum": 10}]}
        assert validate(-3, schema).valid   # only the maximum branch
        assert validate(99, schema).valid   # only the minimum branch
        assert not validate(5, schema).valid  # both branches


class TestValidatePsi:
    def test_number_reference(self, ctx):
        assert validate_psi(16.0, "$number", ctx).valid
        assert not validate_psi("abc", "$integer", ctx).valid

    def test_learner_parameter_minimum(self, ctx):
        schema = {"?k": {"$integer": {"default": 1, "min": 1}}}
        assert validate_psi({"k": 3}, schema, ctx).valid
        assert not validate_psi({"k": 0}, schema, ctx).valid
        assert validate_psi({}, schema, ctx).valid


class TestRichValues:
    def test_data_uri_match(self):
        outcome = validate_rich("data:image/jpeg;base64,/9j/4AAQ", "image/jpeg",
                                resolver=None)
        assert outcome.valid

    def test_data_uri_mismatch(self):
        assert not validate_rich("data:text/plain,x", "image/jpeg", None).valid

    def test_http_uri_with_stub(self):
        uri = ("http://upload.wikimedia.org/wikipedia/commons/5/56/"
               "Kosaciec_szczecinkowaty_Iris_setosa.jpg")
        resolver = StubResolver({uri: "image/jpeg"})
        assert validate_rich(uri, "image/jpeg", resolver).valid
        assert resolver.calls == [uri]

    def test_content_type_parameters_stripped(self):
        resolver = StubResolver({"http://x/i.jpg": "IMAGE/JPEG; charset=binary"})
        assert validate_rich("http://x/i.jpg", "image/jpeg", resolver).valid

    def test_http_mismatch(self):
        resolver = StubResolver({"http://x/i.png": "image/png"})
        assert not validate_rich("http://x/i.png", "image/jpeg", resolver).valid

    def test_resolver_failure_is_a_distinct_violation(self):
        resolver = StubResolver(fail="connection refused")
        outcome = validate_rich("http://x/i.jpg", "image/jpeg", resolver)
        assert not outcome.valid
        assert "could not verify" in outcome.violations[0][2]

    def test_unsupported_scheme(self):
        assert not validate_rich("ftp://x/i.jpg", "image/jpeg", None).valid
        assert not validate_rich(42, "image/jpeg", None).valid

    def test_data_uri_never_reads_payload(self):
        # the payload is not even legal base64; only the media type matters
        assert validate_rich("data:image/jpeg;base64,!!!not-base64!!!",
                             "image/jpeg", None).valid

    def test_rich_subtree_through_validate_psi(self, ctx):
        resolver = StubResolver({"http://x/i.jpg": "image/jpeg"})
        schema = {"/image": "@image/jpeg"}
        good = {"image": "http://x/i.jpg"}
        assert validate_psi(good, schema, ctx, resolver=resolver).valid
        bad = {"image": "data:text/plain,x"}
        assert not validate_psi(bad, schema, ctx, resolver=resolver).valid


def test_oracle_equivalence_sample():
    rng = random.Random(42)
    for _ in range(300):
        value, schema = gen_pair(rng)
        assert validate(value, schema).valid == naive_valid(value, schema), \
            (value, schema)
