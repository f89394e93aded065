"""An independent, deliberately naive interpreter of the compiled
constraint vocabulary, used as the oracle for the real validator. Kept
structurally different on purpose: one recursive function, booleans
only, keywords handled in a fixed order."""

from __future__ import annotations

import random


def _is_num(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _eq(a, b) -> bool:
    if isinstance(a, bool) or isinstance(b, bool):
        return isinstance(a, bool) and isinstance(b, bool) and a == b
    if _is_num(a) and _is_num(b):
        return a == b
    if isinstance(a, list) and isinstance(b, list):
        return len(a) == len(b) and all(_eq(x, y) for x, y in zip(a, b))
    if isinstance(a, dict) and isinstance(b, dict):
        return a.keys() == b.keys() and all(_eq(a[k], b[k]) for k in a)
    return type(a) is type(b) and a == b


def _has_type(v, name) -> bool:
    if name == "integer":
        return (_is_num(v) and (isinstance(v, int) or float(v).is_integer()))
    if name == "number":
        return _is_num(v)
    if name == "string":
        return isinstance(v, str)
    if name == "boolean":
        return isinstance(v, bool)
    if name == "array":
        return isinstance(v, list)
    if name == "object":
        return isinstance(v, dict)
    return False


def naive_valid(value, schema) -> bool:
    if isinstance(schema, list):
        if not isinstance(value, list) or len(value) != len(schema):
            return False
        return all(naive_valid(v, s) for v, s in zip(value, schema))
    if not isinstance(schema, dict):
        return True

    if "type" in schema:
        types = schema["type"]
        if isinstance(types, str):
            types = [types]
        if not any(_has_type(value, t) for t in types):
            return False
    if "minimum" in schema and _is_num(value) and value < schema["minimum"]:
        return False
    if "maximum" in schema and _is_num(value) and value > schema["maximum"]:
        return False
    if "enum" in schema and not any(_eq(value, m) for m in schema["enum"]):
        return False
    if "allOf" in schema:
        if not all(naive_valid(value, s) for s in schema["allOf"]):
            return False
    if "oneOf" in schema:
        if sum(1 for s in schema["oneOf"] if naive_valid(value, s)) != 1:
            return False
    if isinstance(value, list):
        if "minItems" in schema and len(value) < schema["minItems"]:
            return False
        if "maxItems" in schema and len(value) > schema["maxItems"]:
            return False
        if "items" in schema:
            items = schema["items"]
            if isinstance(items, list):
                if len(value) != len(items):
                    return False
                if not all(naive_valid(v, s) for v, s in zip(value, items)):
                    return False
            else:
                if not all(naive_valid(v, items) for v in value):
                    return False
    if isinstance(value, dict):
        props = schema.get("properties", {})
        for name, sub in props.items():
            if name in value and not naive_valid(value[name], sub):
                return False
        for name in schema.get("required", []):
            if name not in value:
                return False
        if "additionalProperties" in schema:
            extra = schema["additionalProperties"]
            for name, v in value.items():
                if name in props:
                    continue
                if extra is False:
                    return False
                if extra is not True and not naive_valid(v, extra):
                    return False
    return True


# --- generators for (value, schema) pairs --------------------------------------

_ATOMS = [0, 1, -2, 7, 11, 2.0, -36.6, 0.5, "", "a", "setosa", "x y",
          True, False]


def gen_value(rng: random.Random, depth: int = 3):
    roll = rng.random()
    if depth <= 0 or roll < 0.55:
        return rng.choice(_ATOMS)
    if roll < 0.8:
        return [gen_value(rng, depth - 1) for _ in range(rng.randrange(0, 4))]
    return {rng.choice("abcde"): gen_value(rng, depth - 1)
            for _ in range(rng.randrange(0, 4))}


def gen_schema(rng: random.Random, depth: int = 3) -> dict:
    kind = rng.randrange(0, 8 if depth > 0 else 5)
    if kind == 0:
        return {"type": rng.choice(["integer", "number", "string", "boolean",
                                    "array", "object"])}
    if kind == 1:
        lo, hi = sorted(rng.sample(range(-10, 11), 2))
        schema = {"type": rng.choice(["integer", "number"])}
        if rng.random() < 0.8:
            schema["minimum"] = lo
        if rng.random() < 0.8:
            schema["maximum"] = hi
        return schema
    if kind == 2:
        return {"enum": [gen_value(rng, 1) for _ in range(rng.randrange(1, 4))]}
    if kind == 3:
        return {"type": ["integer", "string"]}
    if kind == 4:
        return {}
    if kind == 5:
        schema = {"type": "array"}
        if rng.random() < 0.5:
            schema["items"] = [gen_schema(rng, depth - 1)
                               for _ in range(rng.randrange(0, 3))]
        else:
            schema["items"] = gen_schema(rng, depth - 1)
            if rng.random() < 0.5:
                schema["minItems"] = rng.randrange(0, 3)
            if rng.random() < 0.5:
                schema["maxItems"] = rng.randrange(0, 4)
        return schema
    if kind == 6:
        names = rng.sample("abcde", rng.randrange(1, 3))
        schema = {"type": "object",
                  "properties": {n: gen_schema(rng, depth - 1) for n in names}}
        if rng.random() < 0.6:
            schema["required"] = [n for n in names if rng.random() < 0.6]
        if rng.random() < 0.3:
            schema["additionalProperties"] = (
                False if rng.random() < 0.5 else gen_schema(rng, depth - 1))
        return schema
    combinator = rng.choice(["allOf", "oneOf"])
    return {combinator: [gen_schema(rng, depth - 1)
                         for _ in range(rng.randrange(1, 3))]}


def gen_value_for(rng: random.Random, schema: dict, depth: int = 3):
    """Best-effort generator of a value aimed at (but not guaranteed)
    satisfying the schema; keeps the oracle comparison interesting."""
    if "enum" in schema:
        return rng.choice(schema["enum"])
    types = schema.get("type")
    if isinstance(types, list):
        types = rng.choice(types)
    if types == "integer":
        lo = schema.get("minimum", -10)
        hi = schema.get("maximum", 10)
        return rng.randrange(int(lo), int(hi) + 1) if lo <= hi else int(lo)
    if types == "number":
        lo = schema.get("minimum", -10)
        hi = schema.get("maximum", 10)
        return lo + (hi - lo) * rng.random() if lo <= hi else float(lo)
    if types == "string":
        return rng.choice(["", "a", "setosa"])
    if types == "boolean":
        return rng.random() < 0.5
    if types == "array":
        items = schema.get("items")
        if isinstance(items, list):
            return [gen_value_for(rng, s, depth - 1) if isinstance(s, dict)
                    else gen_value(rng, 1) for s in items]
        lo = schema.get("minItems", 0)
        hi = max(schema.get("maxItems", 3), lo)
        length = rng.randrange(lo, hi + 1)
        if isinstance(items, dict):
            return [gen_value_for(rng, items, depth - 1) for _ in range(length)]
        return [gen_value(rng, 1) for _ in range(length)]
    if types == "object":
        out = {}
        for name, sub in schema.get("properties", {}).items():
            if name in schema.get("required", []) or rng.random() < 0.7:
                out[name] = (gen_value_for(rng, sub, depth - 1)
                             if isinstance(sub, dict) else gen_value(rng, 1))
        return out
    for combinator in ("allOf", "oneOf"):
        if combinator in schema and schema[combinator]:
            branch = schema[combinator][0]
            if isinstance(branch, dict):
                return gen_value_for(rng, branch, depth - 1)
    return gen_value(rng, depth)


def gen_pair(rng: random.Random):
    """A (value, schema) pair; half aimed at validity, half adversarial,
    some mutated near-misses."""
    schema = gen_schema(rng)
    roll = rng.random()
    if roll < 0.45:
        value = gen_value_for(rng, schema)
    elif roll < 0.6:
        value = gen_value_for(rng, schema)
        value = _mutate(rng, value)
    else:
        value = gen_value(rng)
    return value, schema


def _mutate(rng: random.Random, value):
    roll = rng.random()
    if isinstance(value, list) and value and roll < 0.5:
        copy = list(value)
        copy[rng.randrange(len(copy))] = gen_value(rng, 1)
        return copy
    if isinstance(value, dict) and value and roll < 0.5:
        copy = dict(value)
        victim = rng.choice(list(copy))
        del copy[victim]
        return copy
    return gen_value(rng, 1)
