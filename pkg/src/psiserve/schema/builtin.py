"""Standard schema bundled with every service.

Every deployment publishes this fixed collection under its schema root;
reference resolution is pre-populated with all of these names. Each
entry is a template whose ``%arg`` placeholders are filled from query
arguments (or from the argument object of a parameterised reference).
"""

from __future__ import annotations

# Value schema: describe plain values.
VALUE_TEMPLATES: dict[str, dict] = {
    "integer": {
        "type": "integer",
        "minimum": "%min",
        "maximum": "%max",
        "default": "%default",
    },
    "number": {
        "type": "number",
        "minimum": "%min",
        "maximum": "%max",
        "default": "%default",
    },
    "boolean": {
        "type": "boolean",
        "default": "%default",
    },
    "string": {
        "type": "string",
        "default": "%default",
    },
    "object": {
        "type": "object",
        "default": "%default",
    },
    "array": {
        "type": "array",
        "items": "%items",
        "minItems": "%size",
        "maxItems": "%size",
    },
    "atomicValue": {
        "type": ["integer", "number", "boolean", "string"],
    },
    "atomicValueSchema": {
        "/type": {"enum": ["integer", "number", "boolean", "string"]},
    },
    "numberSchema": {
        "/type": {"enum": ["integer", "number"]},
    },
    "nominalValueSchema": {
        "/enum": {"$array": {"allItems": "$string"}},
    },
    "uri": {
        "type": "string",
        "format": "uri",
    },
    "richValueSchema": {
        "/type=": "string",
        "/format=": "uri",
        "/mediaType=": "%mediaType",
    },
}

# Resource schema: describe the representations resources return.
RESOURCE_TEMPLATES: dict[str, dict] = {
    "relation": {
        "/psiType=": "relation",
        "/uri=": "$uri",
        "?description=": "$string",
        "/size=": "$integer",
        "/defaultAttribute=": "$uri",
        "/attributes=": {"$array": {"items": "$uri"}},
        "?querySchema=": "$object",
    },
    "attribute": {
        "/psiType=": "attribute",
        "/uri=": "$uri",
        "?description=": "$string",
        "/emits=": "$object",
        "?relation=": "$uri",
        "?subattributes=": {
            "oneOf": [
                {"$array": {"allItems": "$uri"}},
                {"/*": "$uri"},
            ]
        },
        "?querySchema=": "$object",
    },
    "arrayAttribute": {
        "allof": ["$attribute"],
        "/emits": {
            "/type": "array",
            "/items": {"$array": {"allItems": "%allItems"}},
        },
    },
    "numberAttribute": {
        "allof": ["$attribute"],
        "/emits": {
            "/type": {"enum": ["integer", "number"]},
        },
    },
    "fixedAttribute": {
        "allof": ["$attribute"],
        "/emits": {
            "/enum": "%values",
        },
    },
    "nominalAttribute": {
        "allof": ["$attribute"],
        "/emits": {
            "/enum": {"$array": {"allItems": "%allItems"}},
        },
    },
    "atomicAttribute": {
        "allof": ["$attribute"],
        "/emits": {
            "/type": {"enum": ["integer", "number", "boolean", "string"]},
        },
    },
    "richValueAttribute": {
        "allof": ["$attribute"],
        "/emits": {"$richValueSchema": {"mediaType": "%mediaType"}},
    },
}

BUILTIN_TEMPLATES: dict[str, dict] = {**VALUE_TEMPLATES, **RESOURCE_TEMPLATES}
