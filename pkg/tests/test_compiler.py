import random

import pytest

from psiserve.errors import (ReferenceCycle, ResolutionIOError, SchemaError,
                             UnresolvedReference)
from psiserve.schema import (DRAFT4_HYPER, ResolutionContext, SchemaTemplate,
                             coerce_argument, compile_schema, instantiate,
                             shorthand_keys_left, validate)
from psiserve.schema.builtin import BUILTIN_TEMPLATES

from naive_validator import gen_schema


def strip_marker(compiled):
    if isinstance(compiled, dict):
        return {k: v for k, v in compiled.items() if k != "$schema"}
    return compiled


class TestTemplates:
    def test_zero_arg_drops_placeholders(self, ctx):
        assert ctx.resolve("integer") == {"type": "integer"}
        assert ctx.resolve("boolean") == {"type": "boolean"}

    def test_number_with_min(self, ctx):
        assert ctx.resolve("number", {"min": 10}) == \
            {"type": "number", "minimum": 10}

    def test_integer_with_min_and_extras(self, ctx):
        assert ctx.resolve("integer", {"min": 1, "title": "Fold number"}) == \
            {"type": "integer", "minimum": 1, "title": "Fold number"}

    def test_array_size_fills_both_bounds(self, ctx):
        assert ctx.resolve("array", {"items": ["$number", "$number"], "size": 2}) == \
            {"type": "array", "items": ["$number", "$number"],
             "minItems": 2, "maxItems": 2}

    def test_unknown_args_become_properties(self, ctx):
        assert ctx.resolve("string", {"enum": ["a", "b"]}) == \
            {"type": "string", "enum": ["a", "b"]}

    def test_arg_matching_existing_key_is_ignored(self, ctx):
        # "type" is a fixed key of the number template, not an argument
        assert ctx.resolve("number", {"type": "string"}) == {"type": "number"}

    def test_rich_value_schema_instantiation(self, ctx):
        assert ctx.resolve("richValueSchema", {"mediaType": "image/jpeg"}) == \
            {"/type=": "string", "/format=": "uri", "/mediaType=": "image/jpeg"}

    def test_nested_placeholder_drop(self, ctx):
        # the unfilled %allItems is nested inside the $array argument object
        body = ctx.resolve("arrayAttribute")
        assert body["/emits"]["/items"] == {"$array": {}}

    def test_string_coercion(self):
        template = SchemaTemplate.of({"minimum": "%min", "enum": "%values"})
        out = instantiate(template, {"min": "10", "values": '["a","b"]'},
                          coerce=True)
        assert out == {"minimum": 10, "enum": ["a", "b"]}
        assert coerce_argument("abc") == "abc"
        assert coerce_argument("true") is True

    def test_placeholder_as_key_rejected(self):
        with pytest.raises(SchemaError):
            SchemaTemplate.of({"%arg": 1})


class TestCompile:
    def test_atoms_pass_through(self, ctx):
        assert compile_schema(True, ctx) is True
        assert compile_schema(3, ctx) == 3
        assert compile_schema(-1.5, ctx) == -1.5
        assert compile_schema("integer", ctx) == "integer"

    def test_rich_type(self, ctx):
        compiled = compile_schema("@image/jpeg", ctx)
        assert strip_marker(compiled) == \
            {"type": "string", "format": "uri", "mediaType": "image/jpeg"}

    def test_object_constraints(self, ctx):
        compiled = compile_schema({"/length": "$number", "/width": "$number"}, ctx)
        assert compiled == {
            "$schema": DRAFT4_HYPER,
            "properties": {"length": {"type": "number"},
                           "width": {"type": "number"}},
            "required": ["length", "width"],
            "type": "object",
        }

    def test_value_form_becomes_single_enum(self, ctx):
        compiled = strip_marker(compile_schema({"/version=": 2}, ctx))
        assert compiled == {"properties": {"version": {"enum": [2]}},
                            "required": ["version"], "type": "object"}

    def test_optional_keys_not_required(self, ctx):
        compiled = strip_marker(compile_schema(
            {"?first": "$string", "/last": "$string"}, ctx))
        assert compiled["required"] == ["last"]
        assert set(compiled["properties"]) == {"first", "last"}

    def test_additional_properties(self, ctx):
        compiled = strip_marker(compile_schema({"/*": "$uri"}, ctx))
        assert compiled["additionalProperties"] == {"type": "string",
                                                    "format": "uri"}
        assert compiled["type"] == "object"

    def test_all_items(self, ctx):
        compiled = strip_marker(compile_schema(
            {"type": "array", "allItems": "$number"}, ctx))
        assert compiled == {"type": "array", "items": {"type": "number"}}

    def test_array_sugar_equivalent_to_composition(self, ctx):
        parts = ["$number"] * 4
        sugar = compile_schema({"$array": {"items": parts}}, ctx)
        composed = compile_schema({"type": "array", "items": parts}, ctx)
        assert sugar == composed

    def test_parameterised_reference_key(self, ctx):
        compiled = compile_schema({"$number": {"min": 10}}, ctx)
        assert strip_marker(compiled) == {"type": "number", "minimum": 10}

    def test_parameterised_reference_discards_siblings(self, ctx):
        compiled = compile_schema({"$number": {"min": 1}, "maximum": 9}, ctx)
        assert "maximum" not in strip_marker(compiled)

    def test_parameterised_reference_needs_object(self, ctx):
        with pytest.raises(SchemaError):
            compile_schema({"$number": 3}, ctx)

    def test_unresolved_reference(self, ctx):
        with pytest.raises(UnresolvedReference):
            compile_schema("$nosuch", ctx)

    def test_global_reference_without_fetcher(self, ctx):
        with pytest.raises(ResolutionIOError):
            compile_schema("$http://example.org/schema/x", ctx)

    def test_empty_rich_type(self, ctx):
        with pytest.raises(SchemaError):
            compile_schema("@", ctx)

    def test_empty_constraint_name(self, ctx):
        with pytest.raises(SchemaError):
            compile_schema({"/": 1}, ctx)
        with pytest.raises(SchemaError):
            compile_schema({"?": "$number"}, ctx)

    def test_bad_keyword_arguments(self, ctx):
        with pytest.raises(SchemaError):
            compile_schema({"minItems": "two"}, ctx)
        with pytest.raises(SchemaError):
            compile_schema({"type": "frog"}, ctx)
        with pytest.raises(SchemaError):
            compile_schema({"minimum": "low"}, ctx)

    def test_allitems_conflicts_with_items(self, ctx):
        with pytest.raises(SchemaError):
            compile_schema({"allItems": "$number", "items": ["$number"]}, ctx)


class TestLocalDefinitions:
    def test_definition_used_by_sibling(self, ctx):
        compiled = strip_marker(compile_schema(
            {"#len": {"type": "integer", "minimum": 0}, "/size": "$len"}, ctx))
        assert compiled["properties"]["size"] == {"type": "integer", "minimum": 0}

    def test_definition_visible_to_descendants(self, ctx):
        compiled = strip_marker(compile_schema(
            {"#len": "$integer", "/outer": {"/inner": "$len"}}, ctx))
        assert compiled["properties"]["outer"]["properties"]["inner"] == \
            {"type": "integer"}

    def test_definition_not_visible_outside_scope(self, ctx):
        with pytest.raises(UnresolvedReference):
            compile_schema({"/a": {"#len": "$integer"}, "/b": "$len"}, ctx)

    def test_definition_shadows_builtin(self, ctx):
        compiled = strip_marker(compile_schema(
            {"#integer": {"type": "string"}, "/id": "$integer"}, ctx))
        assert compiled["properties"]["id"] == {"type": "string"}

    def test_definitions_resolve_lazily_in_inner_scope(self, ctx):
        compiled = strip_marker(compile_schema(
            {"#a": "$b", "#b": {"type": "boolean"}, "/x": "$a"}, ctx))
        assert compiled["properties"]["x"] == {"type": "boolean"}

    def test_cycle_detected(self, ctx):
        with pytest.raises(ReferenceCycle):
            compile_schema({"#a": "$a", "/x": "$a"}, ctx)
        with pytest.raises(ReferenceCycle):
            compile_schema({"#a": "$b", "#b": "$a", "/x": "$a"}, ctx)

    def test_repeated_sibling_references_are_not_a_cycle(self, ctx):
        compiled = strip_marker(compile_schema(
            {"allOf": ["$integer", "$integer"]}, ctx))
        assert compiled == {"allOf": [{"type": "integer"}, {"type": "integer"}]}


class TestCompiledOutput:
    def test_marker_only_at_object_root(self, ctx):
        compiled = compile_schema({"/a": {"/b": "$number"}}, ctx)
        assert compiled["$schema"] == DRAFT4_HYPER
        assert "$schema" not in compiled["properties"]["a"]

    def test_no_shorthand_keys_in_builtin_compilations(self, ctx):
        for name in BUILTIN_TEMPLATES:
            compiled = compile_schema(ctx.resolve(name), ctx)
            assert shorthand_keys_left(compiled) == [], name

    def test_idempotent_on_compiled_output(self, ctx):
        rng = random.Random(3)
        samples = [gen_schema(rng) for _ in range(40)]
        samples += [ctx.resolve(n) for n in ("integer", "number", "uri",
                                             "atomicValue")]
        for schema in samples:
            once = compile_schema(schema, ctx)
            twice = compile_schema(once, ctx)
            assert twice == once, schema

    def test_byte_stable(self, ctx):
        from psiserve.values import serialize_json
        schema = {"/a": "$number", "?b": {"$array": {"items": ["$string"]}}}
        first = serialize_json(compile_schema(schema, ctx))
        second = serialize_json(compile_schema(schema, ResolutionContext()))
        assert first == second


# one conforming and one non-conforming value per builtin schema,
# against the zero-argument instantiation
BUILTIN_SPOT_VALUES = {
    "integer": (11, "x"),
    "number": (-36.6, "x"),
    "boolean": (True, 0),
    "string": ("setosa", 1),
    "object": ({"a": 1}, [1]),
    "array": ([1, "a"], {"a": 1}),
    "atomicValue": (3.5, [1]),
    "atomicValueSchema": ({"type": "number"}, {"type": "array"}),
    "numberSchema": ({"type": "integer"}, {"type": "string"}),
    "nominalValueSchema": ({"enum": ["a", "b"]}, {"enum": [1]}),
    "uri": ("http://example.org", 7),
    "richValueSchema": ({"type": "string", "format": "uri",
                         "mediaType": "image/jpeg"},
                        {"type": "string"}),
    "relation": ({"psiType": "relation", "uri": "$uri", "size": "$integer",
                  "defaultAttribute": "$uri",
                  "attributes": {"$array": {"items": "$uri"}}},
                 {"psiType": "relation"}),
    "attribute": ({"psiType": "attribute", "uri": "$uri", "emits": "$object"},
                  {"psiType": "transformer", "uri": "$uri", "emits": "$object"}),
    "arrayAttribute": ({"emits": {"type": "array", "items": []}},
                       {"emits": {"type": "string"}}),
    "numberAttribute": ({"emits": {"type": "number"}},
                        {"emits": {"type": "array"}}),
    # zero-arg drops the %values constraint, so only the emits key remains
    "fixedAttribute": ({"emits": {"enum": [-1, 1]}}, {"uri": "x"}),
    "nominalAttribute": ({"emits": {"enum": ["a"]}}, {"emits": {"enum": 1}}),
    "atomicAttribute": ({"emits": {"type": "boolean"}},
                        {"emits": {"type": "object"}}),
    "richValueAttribute": ({"emits": {"type": "string", "format": "uri",
                                      "mediaType": "text/csv"}},
                           {"emits": {"type": "number"}}),
}


def test_every_builtin_accepts_and_rejects(ctx):
    assert set(BUILTIN_SPOT_VALUES) == set(BUILTIN_TEMPLATES)
    for name, (good, bad) in BUILTIN_SPOT_VALUES.items():
        args = {"mediaType": "image/jpeg"} if name == "richValueSchema" else {}
        compiled = compile_schema(ctx.resolve(name, args or None), ctx)
        assert validate(good, compiled).valid, name
        assert not validate(bad, compiled).valid, name
