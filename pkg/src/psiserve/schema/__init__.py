from .builtin import BUILTIN_TEMPLATES
from .compiler import (DRAFT4_HYPER, ResolutionContext, SchemaFetcher,
                       compile_schema, is_global_address, shorthand_keys_left)
from .keys import (ConstraintKey, KeyKind, classify_key, compose_array,
                   compose_object, parse_rich_type)
from .templates import SchemaTemplate, coerce_argument, instantiate
from .validator import (HttpMediaTypeResolver, MediaTypeResolver,
                        ValidationOutcome, normalize_media_type, validate,
                        validate_psi, validate_rich)

__all__ = [
    "BUILTIN_TEMPLATES", "DRAFT4_HYPER", "ResolutionContext", "SchemaFetcher",
    "compile_schema", "is_global_address", "shorthand_keys_left",
    "ConstraintKey", "KeyKind", "classify_key", "compose_array",
    "compose_object", "parse_rich_type", "SchemaTemplate", "coerce_argument",
    "instantiate", "HttpMediaTypeResolver", "MediaTypeResolver",
    "ValidationOutcome", "normalize_media_type", "validate", "validate_psi",
    "validate_rich",
]
