"""CSV ingestion driven by a relation manifest.

A manifest names a CSV file, types its columns, and describes how
columns group into structured attributes. Ingestion registers the
relation, one leaf attribute per column used by an attribute tree (at a
path mirroring its place in the tree), the structured attributes
themselves, and any rich attributes whose column holds URI strings.

Manifest shape::

    {
      "name": "iris",
      "description": "...",
      "csv": "iris.csv",                       # relative to the manifest
      "columns": [
        {"name": "sepal_length", "type": "number"},
        {"name": "species", "type": "string",
         "enum": ["setosa", "versicolor", "virginica"]}
      ],
      "attributes": [
        {"name": "flower", "default": true,
         "structure": {"sepal": {"length": "sepal_length", ...}, ...}},
        {"name": "features", "structure": ["sepal_length", ...]}
      ],
      "richAttributes": [
        {"name": "image", "column": "image", "mediaType": "image/jpeg"}
      ]
    }

Structure leaves are column names; nested arrays and objects compose.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass, field
from typing import Optional

from .core import ServiceCore
from .errors import BadRequest
from .registry import ResourceRecord
from .resources import FOLD_QUERY_SCHEMA, Attribute, Relation
from .values import Value, parse_json

COLUMN_TYPES = ("number", "integer", "string", "boolean")


class ManifestError(BadRequest):
    """The manifest is inconsistent or the CSV does not satisfy it."""


@dataclass
class ColumnSpec:
    name: str
    type: str
    enum: Optional[list] = None

    def parse(self, raw: str, where: str) -> Value:
        try:
            if self.type == "number":
                return float(raw)
            if self.type == "integer":
                return int(raw)
            if self.type == "boolean":
                if raw in ("true", "false"):
                    return raw == "true"
                raise ValueError(raw)
        except ValueError:
            raise ManifestError(
                f"{where}: {raw!r} is not a {self.type}") from None
        return raw

    def emits(self) -> Value:
        base = {"number": "$number", "integer": "$integer",
                "boolean": "$boolean", "string": "$string"}[self.type]
        if self.enum is not None:
            return {base: {"enum": list(self.enum)}}
        return base


@dataclass
class AttributeSpec:
    name: str
    structure: Value  # nested lists/dicts with column-name leaves
    default: bool = False


@dataclass
class RichAttributeSpec:
    name: str
    column: str
    media_type: str


@dataclass
class RelationManifest:
    name: str
    description: str
    csv_path: str
    columns: list[ColumnSpec]
    attributes: list[AttributeSpec]
    rich_attributes: list[RichAttributeSpec] = field(default_factory=list)

    @classmethod
    def load(cls, path: str) -> "RelationManifest":
        with open(path, encoding="utf-8") as f:
            raw = parse_json(f.read())
        return cls.from_value(raw, base_dir=os.path.dirname(os.path.abspath(path)))

    @classmethod
    def from_value(cls, raw: Value, base_dir: str = ".") -> "RelationManifest":
        if not isinstance(raw, dict):
            raise ManifestError("manifest must be an object")
        try:
            columns = [ColumnSpec(name=c["name"], type=c["type"],
                                  enum=c.get("enum"))
                       for c in raw["columns"]]
            attributes = [AttributeSpec(name=a["name"], structure=a["structure"],
                                        default=a.get("default", False))
                          for a in raw["attributes"]]
            rich = [RichAttributeSpec(name=r["name"], column=r["column"],
                                      media_type=r["mediaType"])
                    for r in raw.get("richAttributes", [])]
            manifest = cls(name=raw["name"],
                           description=raw.get("description", raw["name"]),
                           csv_path=os.path.join(base_dir, raw["csv"]),
                           columns=columns, attributes=attributes,
                           rich_attributes=rich)
        except KeyError as exc:
            raise ManifestError(f"manifest is missing {exc.args[0]!r}") from None
        manifest.check()
        return manifest

    def check(self) -> None:
        names = [c.name for c in self.columns]
        if len(set(names)) != len(names):
            raise ManifestError("duplicate column names")
        known = set(names)
        for spec in self.columns:
            if spec.type not in COLUMN_TYPES:
                raise ManifestError(
                    f"column {spec.name!r} has unknown type {spec.type!r}")
        for attr in self.attributes:
            for leaf in _leaves(attr.structure):
                if leaf not in known:
                    raise ManifestError(
                        f"attribute {attr.name!r} references unknown column "
                        f"{leaf!r}")
        for rich in self.rich_attributes:
            if rich.column not in known:
                raise ManifestError(
                    f"rich attribute {rich.name!r} references unknown column "
                    f"{rich.column!r}")
        if sum(1 for a in self.attributes if a.default) != 1:
            raise ManifestError("exactly one attribute must be the default")

    def read_rows(self) -> list[dict]:
        specs = {c.name: c for c in self.columns}
        rows: list[dict] = []
        with open(self.csv_path, newline="", encoding="utf-8") as f:
            reader = csv.DictReader(f)
            if reader.fieldnames is None:
                raise ManifestError(f"{self.csv_path}: missing header row")
            missing = set(specs) - set(reader.fieldnames)
            if missing:
                raise ManifestError(
                    f"{self.csv_path}: missing columns {sorted(missing)}")
            for lineno, raw in enumerate(reader, start=2):
                row: dict = {}
                for name, spec in specs.items():
                    where = f"{self.csv_path}:{lineno} column {name!r}"
                    if raw.get(name) is None:
                        raise ManifestError(f"{where}: missing value")
                    value = spec.parse(raw[name], where)
                    if spec.enum is not None and value not in spec.enum:
                        raise ManifestError(
                            f"{where}: {value!r} is not in the declared enum")
                    row[name] = value
                rows.append(row)
        return rows


def _leaves(structure: Value):
    if isinstance(structure, str):
        yield structure
    elif isinstance(structure, list):
        for item in structure:
            yield from _leaves(item)
    elif isinstance(structure, dict):
        for item in structure.values():
            yield from _leaves(item)
    else:
        raise ManifestError(f"bad structure leaf: {structure!r}")


def ingest(core: ServiceCore, manifest: RelationManifest) -> str:
    """Register the manifest's relation and attributes; returns the
    relation's registry key."""
    rows = manifest.read_rows()
    specs = {c.name: c for c in manifest.columns}
    relation_key = f"{core.roots['relations']}/{manifest.name}"
    relation = Relation(key=relation_key, description=manifest.description,
                        instances=rows, query_schema=FOLD_QUERY_SCHEMA)
    core.registry.add(ResourceRecord(key=relation_key, kind="relation",
                                     collection="relations", entity=relation))

    for attr in manifest.attributes:
        key = f"{relation_key}/{attr.name}"
        _register_tree(core, relation_key, key, attr.structure, specs,
                       description_for(manifest, attr))
        relation.attribute_keys.append(key)
        if attr.default:
            relation.default_attribute = key

    for rich in manifest.rich_attributes:
        key = f"{relation_key}/{rich.name}"
        column = rich.column
        entity = Attribute(
            key=key, relation_key=relation_key, emits=f"@{rich.media_type}",
            extractor=lambda row, c=column: row[c], deletable=False)
        core.registry.add(ResourceRecord(key=key, kind="attribute", entity=entity))
        relation.attribute_keys.append(key)
    return relation_key


def description_for(manifest: RelationManifest, attr: AttributeSpec) -> Optional[str]:
    if attr.default:
        return f"A structured attribute for presenting {manifest.name} instances"
    return None


def _register_tree(core: ServiceCore, relation_key: str, key: str,
                   structure: Value, specs: dict[str, ColumnSpec],
                   description: Optional[str] = None) -> Attribute:
    if isinstance(structure, str):
        spec = specs[structure]
        entity = Attribute(key=key, relation_key=relation_key,
                           emits=spec.emits(),
                           extractor=lambda row, c=structure: row[c],
                           description=description, deletable=False)
    elif isinstance(structure, list):
        children = [
            _register_tree(core, relation_key, f"{key}/{i}", item, specs)
            for i, item in enumerate(structure, start=1)]
        entity = Attribute(
            key=key, relation_key=relation_key,
            emits={"$array": {"items": [c.emits for c in children]}},
            extractor=_array_extractor([c.extractor for c in children]),
            description=description,
            subattributes=[c.key for c in children], deletable=False)
    else:
        children = {name: _register_tree(core, relation_key, f"{key}/{name}",
                                         item, specs)
                    for name, item in structure.items()}
        entity = Attribute(
            key=key, relation_key=relation_key,
            emits={"/" + name: c.emits for name, c in children.items()},
            extractor=_object_extractor({n: c.extractor
                                         for n, c in children.items()}),
            description=description,
            subattributes={n: c.key for n, c in children.items()},
            deletable=False)
    core.registry.add(ResourceRecord(key=key, kind="attribute", entity=entity))
    return entity


def _array_extractor(extractors: list):
    def extract(row):
        return [fn(row) for fn in extractors]
    return extract


def _object_extractor(extractors: dict):
    def extract(row):
        return {name: fn(row) for name, fn in extractors.items()}
    return extract
