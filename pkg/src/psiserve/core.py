"""Service core: the registry plus the behaviour of every resource kind.

The core is wire-agnostic. It exposes the operations the protocol layer
dispatches to (describe, list, apply, join, create, process, update,
delete) and raises PsiError subclasses that carry their HTTP status.
Records store server-relative keys; self-addressed URIs are routed back
in-process through the service's router, so dereferencing a task
resource or joining against a local transformer never touches a socket.
"""

from __future__ import annotations

import base64
import re
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Callable, Optional

from .errors import (BadRequest, Forbidden, MethodNotAllowed, NotFound,
                     NotImplementedByService, PsiError, ResolutionIOError,
                     ServerError)
from .fetch import Fetcher, HttpFetcher, Router, SchemaFetcherAdapter
from .registry import COLLECTION_KINDS, Journal, Registry, ResourceRecord
from .resources import (FOLD_QUERY_SCHEMA, Attribute, FoldQuery, Learner,
                        Relation, SchemaResource, Training, Transformer,
                        UpdateEndpoint, check_compatibility, parse_fold_query,
                        select_fold)
from .schema import (BUILTIN_TEMPLATES, ResolutionContext, SchemaTemplate,
                     coerce_argument, compile_schema, instantiate, validate)
from .schema.validator import ValidationOutcome
from .values import Value, serialize_json

DEFAULT_ROOTS = {
    "relations": "/data",
    "schema": "/schema",
    "learners": "/learn",
    "predictors": "/infer",
    "transformers": "/transform",
}

# representation fields holding schemas; compiled before task validation
_SCHEMA_FIELDS = ("emits", "accepts", "querySchema", "taskSchema")


def timestamp_minutes(dt: datetime) -> str:
    return dt.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%MZ")


@dataclass
class TaskInput:
    parameters: dict
    resources: dict[str, tuple[Optional[str], Value]]  # name -> (ref URI, representation)
    raw_task: Value
    predictor_key: str
    update_key: str
    stamp: str


@dataclass
class TrainOutcome:
    transformer: Transformer
    delay: float = 0.0


class ServiceCore:
    def __init__(self, base_uri: str = "http://localhost:8080",
                 roots: Optional[dict[str, str]] = None,
                 collections: Optional[set[str]] = None,
                 fetcher: Optional[Fetcher] = None,
                 clock: Optional[Callable[[], datetime]] = None,
                 journal_path: Optional[str] = None,
                 update_mode: str = "mutable",
                 related_services: Optional[list] = None):
        self.base_uri = base_uri.rstrip("/")
        self.roots = dict(roots or DEFAULT_ROOTS)
        self.exposed = set(collections if collections is not None else COLLECTION_KINDS)
        self.registry = Registry()
        self.clock = clock or (lambda: datetime.now(timezone.utc))
        self.update_mode = update_mode
        self.related_services = related_services or []
        self.journal = Journal(journal_path) if journal_path else None
        self._replaying = False
        self._counters: dict[str, int] = {}
        self._created_defs: dict[str, str] = {}  # canonical definition -> key

        if fetcher is None:
            router = Router(fallback=HttpFetcher())
            fetcher = router
        self.fetcher = fetcher
        if isinstance(fetcher, Router):
            fetcher.mount(self.base_uri, self._inproc_fetch)
        # set by the protocol layer; answers in-process GET requests
        self.inproc_get: Optional[Callable[[str, Optional[dict]], Value]] = None
        self.schema_context = ResolutionContext(
            fetcher=SchemaFetcherAdapter(self.fetcher))

        for name, body in BUILTIN_TEMPLATES.items():
            key = f"{self.roots['schema']}/{name}"
            self.registry.add(ResourceRecord(
                key=key, kind="schema", collection="schema",
                entity=SchemaResource(key=key, name=name, template_body=body)))

    # --- addressing -----------------------------------------------------------

    def absolutize(self, key: str) -> str:
        return self.base_uri + key if key else self.base_uri

    def localize(self, uri: str) -> Optional[str]:
        """Map an absolute URI of this service to a registry key (path
        plus any ?t= suffix); None for foreign URIs."""
        if uri == self.base_uri:
            return ""
        if not uri.startswith(self.base_uri + "/"):
            return None
        rest = uri[len(self.base_uri):]
        path, _, query = rest.partition("?")
        if query:
            from .values import decode_query
            args = decode_query(query)
            token = args.get("t")
            if token is not None:
                return f"{path}?t={token}"
        return path

    def _inproc_fetch(self, uri: str, params: Optional[dict] = None) -> Value:
        if self.inproc_get is None:
            raise ResolutionIOError(f"service at {self.base_uri} is not routable yet")
        return self.inproc_get(uri, params)

    def stamp(self) -> str:
        return timestamp_minutes(self.clock())

    def next_key(self, prefix: str, pinned: Optional[str] = None) -> str:
        if pinned is not None:
            m = re.match(re.escape(prefix) + r"(\d+)$", pinned)
            if m:
                n = int(m.group(1))
                self._counters[prefix] = max(self._counters.get(prefix, 0), n)
            return pinned
        while True:
            n = self._counters.get(prefix, 0) + 1
            self._counters[prefix] = n
            key = f"{prefix}{n}"
            if not self.registry.contains(key):
                return key

    def _journal(self, event: dict) -> None:
        if self.journal is not None and not self._replaying:
            self.journal.append(event)

    # --- compilation helpers ---------------------------------------------------

    def compile(self, schema: Value) -> Value:
        return compile_schema(schema, self.schema_context)

    def check_value(self, value: Value, schema: Value) -> ValidationOutcome:
        return validate(value, self.compile(schema))

    # --- discovery --------------------------------------------------------------

    def describe_service(self) -> dict:
        rep: dict = {"psiType": "service", "uri": self.absolutize("")}
        for name in COLLECTION_KINDS:
            if name in self.exposed:
                rep[name] = self.absolutize(self.roots[name])
        if self.related_services:
            rep["relatedServices"] = self.related_services
        return rep

    def collection_for_path(self, path: str) -> Optional[str]:
        for name, root in self.roots.items():
            if path == root:
                return name
        return None

    def list_collection(self, name: str) -> dict:
        if name not in self.exposed:
            raise NotFound(f"no collection at {self.roots.get(name, name)}")
        return {
            "psiType": "resource-list",
            "uri": self.absolutize(self.roots[name]),
            "resources": [self.absolutize(k) for k in self.registry.members(name)],
        }

    def is_exposed(self, record: ResourceRecord) -> bool:
        if record.kind == "attribute":
            return "relations" in self.exposed
        if record.kind == "update":
            return "predictors" in self.exposed
        if record.collection:
            return record.collection in self.exposed
        return True

    def lookup(self, key: str) -> ResourceRecord:
        record = self.registry.get(key)
        if record is None or not self.is_exposed(record):
            raise NotFound(f"no resource at {key or '/'}")
        return record

    # --- schema resources --------------------------------------------------------

    def schema_body(self, record: ResourceRecord, args: dict[str, str],
                    template: bool = False) -> Value:
        entity: SchemaResource = record.entity
        if template:
            return entity.template_body
        coerced = {k: coerce_argument(v) for k, v in args.items()}
        return instantiate(SchemaTemplate.of(entity.template_body), coerced)

    # --- representations -----------------------------------------------------------

    def representation(self, record: ResourceRecord,
                       fold: Optional[FoldQuery] = None) -> dict:
        if record.kind == "relation":
            return self.relation_representation(record, fold)
        if record.kind == "attribute":
            return self.attribute_representation(record, fold)
        if record.kind == "transformer":
            return self.transformer_representation(record)
        if record.kind == "learner":
            entity: Learner = record.entity
            return {"psiType": "learner", "uri": self.absolutize(record.key),
                    "description": entity.description,
                    "taskSchema": entity.task_schema}
        if record.kind == "update":
            predictor = self.registry.require(record.entity.predictor_key)
            return predictor.entity.update_schema
        if record.kind == "schema":
            return self.schema_body(record, {})
        raise ServerError(f"unrepresentable kind {record.kind}")

    def relation_representation(self, record: ResourceRecord,
                                fold: Optional[FoldQuery]) -> dict:
        relation: Relation = record.entity
        suffix = fold.suffix() if fold else ""
        size = len(select_fold(relation.size, fold)) if fold else relation.size
        description = relation.description
        if fold:
            inverted = ", inverted" if fold.invert else ""
            description = f"{description} (fold {fold.fold} of {fold.numfolds}{inverted})"
        rep = {
            "psiType": "relation",
            "uri": self.absolutize(record.key) + suffix,
            "description": description,
            "size": size,
            "defaultAttribute": self.absolutize(relation.default_attribute) + suffix,
            "attributes": [self.absolutize(k) + suffix for k in relation.attribute_keys],
        }
        if relation.query_schema is not None:
            rep["querySchema"] = relation.query_schema
        return rep

    def attribute_representation(self, record: ResourceRecord,
                                 fold: Optional[FoldQuery]) -> dict:
        attribute: Attribute = record.entity
        suffix = fold.suffix() if fold else ""
        rep: dict = {
            "psiType": "attribute",
            "uri": self.absolutize(record.key) + suffix,
        }
        if attribute.description:
            rep["description"] = attribute.description
        rep["relation"] = self.absolutize(attribute.relation_key)
        rep["emits"] = attribute.emits
        if attribute.subattributes is not None:
            if isinstance(attribute.subattributes, list):
                rep["subattributes"] = [self.absolutize(k) + suffix
                                        for k in attribute.subattributes]
            else:
                rep["subattributes"] = {name: self.absolutize(k) + suffix
                                        for name, k in attribute.subattributes.items()}
        relation: Relation = self.registry.require(attribute.relation_key).entity
        if relation.query_schema is not None:
            rep["querySchema"] = relation.query_schema
        return rep

    def transformer_representation(self, record: ResourceRecord) -> dict:
        entity: Transformer = self._settle_training(record)
        if entity.training is not None:
            learner_uri = self.absolutize(entity.training.learner_key)
            return {"psiType": "training-status",
                    "uri": self.absolutize(record.key),
                    "learner": learner_uri,
                    "status": entity.training.status}
        rep: dict = {"psiType": "transformer", "uri": self.absolutize(record.key)}
        if entity.description:
            rep["description"] = entity.description
        rep["accepts"] = entity.accepts
        rep["emits"] = entity.emits
        if entity.provenance:
            rep["provenance"] = entity.provenance
        if entity.update_key:
            rep["update"] = self.absolutize(entity.update_key)
        return rep

    def _settle_training(self, record: ResourceRecord) -> Transformer:
        entity: Transformer = record.entity
        if entity.training is not None and entity.training.done():
            with self.registry.lock:
                if entity.training is not None and entity.training.done():
                    entity.training = None
        return entity

    def ensure_ready(self, record: ResourceRecord) -> Transformer:
        entity = self._settle_training(record)
        if entity.training is not None:
            raise Forbidden("predictor is still being trained")
        return entity

    # --- transformers -------------------------------------------------------------

    def apply_transformer(self, record: ResourceRecord, value: Value) -> dict:
        entity = self.ensure_ready(record)
        outcome = self.check_value(value, entity.accepts)
        if not outcome.valid:
            raise BadRequest(f"value does not conform to the accepts schema: "
                             f"{outcome.message()}")
        result = entity.fn(value) if entity.fn is not None else value
        result = self.run_chain(result, entity.chain)
        return {"psiType": "value", "value": result}

    def run_chain(self, value: Value, chain: list[str]) -> Value:
        for ref in chain:
            value = self.apply_ref(ref, value)
        return value

    def apply_ref(self, ref: str, value: Value) -> Value:
        key = ref if ref.startswith("/") else self.localize(ref)
        if key is not None and self.registry.contains(key):
            record = self.registry.require(key)
            if record.kind != "transformer":
                raise BadRequest(f"{ref} is not a transformer")
            return self.apply_transformer(record, value)["value"]
        if ref.startswith("/"):
            raise ResolutionIOError(f"transformer at {ref} no longer exists")
        response = self.fetcher.get_json(ref, {"value": value})
        if not isinstance(response, dict) or "value" not in response:
            raise ResolutionIOError(f"{ref} did not return a value message")
        return response["value"]

    def _resolve_join_target(self, join_uri: str,
                             snapshot: Optional[dict] = None) -> tuple[str, dict]:
        """Resolve the transformer being joined. Returns (chain ref,
        representation); local targets keep their registry key as ref."""
        key = self.localize(join_uri)
        if key is not None:
            record = self.lookup(key)
            if record.kind != "transformer":
                raise BadRequest(f"{join_uri} is not a transformer")
            return key, self.transformer_representation(record)
        rep = snapshot if snapshot is not None else self.fetcher.get_json(join_uri)
        if not isinstance(rep, dict) or rep.get("psiType") != "transformer":
            raise BadRequest(f"{join_uri} is not a transformer resource")
        return join_uri, rep

    def _check_join(self, emits: Value, target_rep: dict, join_uri: str) -> None:
        if target_rep.get("psiType") == "training-status":
            raise Forbidden("cannot join a predictor that is still being trained")
        accepts = target_rep.get("accepts")
        if accepts is None:
            raise BadRequest(f"{join_uri} has no accepts schema")
        if not check_compatibility(self.compile(emits), self.compile(accepts)):
            raise BadRequest(
                "emits schema of the base resource is not compatible with the "
                f"accepts schema of {join_uri}")

    @staticmethod
    def _chain_token(chain: list[str]) -> str:
        raw = serialize_json(chain).encode("utf-8")
        return base64.urlsafe_b64encode(raw).decode("ascii").rstrip("=")

    def join_transformer(self, record: ResourceRecord, join_uri: str,
                         description: Optional[str] = None,
                         snapshot: Optional[dict] = None) -> tuple[bool, str]:
        base = self.ensure_ready(record)
        ref, target_rep = self._resolve_join_target(join_uri, snapshot)
        self._check_join(base.emits, target_rep, join_uri)
        chain = [record.key, ref]
        path = record.key.partition("?")[0]
        key = f"{path}?t={self._chain_token(chain)}"
        if self.registry.contains(key):
            return False, key
        entity = Transformer(
            key=key, accepts=base.accepts, emits=target_rep["emits"], fn=None,
            chain=chain,
            description=description or f"Joined transformer via {join_uri}",
            provenance={"created": self.stamp()})
        self.registry.add(ResourceRecord(key=key, kind="transformer",
                                         collection="transformers", entity=entity))
        self._journal({"op": "join-transformer", "base": record.key,
                       "join": join_uri, "description": description,
                       "key": key,
                       "target_rep": None if ref.startswith("/") else target_rep})
        return True, key

    def join_attribute(self, record: ResourceRecord, join_uri: str,
                       description: Optional[str] = None,
                       snapshot: Optional[dict] = None) -> tuple[bool, str]:
        base: Attribute = record.entity
        ref, target_rep = self._resolve_join_target(join_uri, snapshot)
        self._check_join(base.emits, target_rep, join_uri)
        chain = base.chain + [ref]
        path = record.key.partition("?")[0]
        key = f"{path}?t={self._chain_token(chain)}"
        if self.registry.contains(key):
            return False, key
        entity = Attribute(
            key=key, relation_key=base.relation_key, emits=target_rep["emits"],
            extractor=base.extractor, chain=chain,
            description=description or f"Joined attribute via {join_uri}",
            deletable=True)
        self.registry.add(ResourceRecord(key=key, kind="attribute", entity=entity))
        self._journal({"op": "join-attribute", "base": record.key,
                       "join": join_uri, "description": description,
                       "key": key,
                       "target_rep": None if ref.startswith("/") else target_rep})
        return True, key

    # --- relations and attributes ----------------------------------------------------

    def relation_fold(self, relation: Relation, fold: Optional[FoldQuery]) -> list[int]:
        if fold is None:
            return list(range(1, relation.size + 1))
        if relation.query_schema is None:
            raise BadRequest("this relation does not support query arguments")
        return select_fold(relation.size, fold)

    def validate_query_args(self, relation: Relation, args: dict[str, Value]) -> Optional[FoldQuery]:
        if not args:
            return None
        if relation.query_schema is None:
            raise BadRequest("this resource does not support query arguments")
        unknown = set(args) - {"fold", "numfolds", "invert"}
        if unknown:
            raise BadRequest(f"unknown query arguments: {sorted(unknown)}")
        outcome = self.check_value(args, relation.query_schema)
        if not outcome.valid:
            raise BadRequest(f"bad query arguments: {outcome.message()}")
        return parse_fold_query(args)

    def apply_attribute(self, record: ResourceRecord, selector: Value,
                        fold: Optional[FoldQuery]) -> dict:
        attribute: Attribute = record.entity
        relation: Relation = self.registry.require(attribute.relation_key).entity
        indices = self.relation_fold(relation, fold)

        def run(i: int) -> Value:
            value = attribute.extractor(relation.instances[i - 1])
            return self.run_chain(value, attribute.chain)

        if selector == "all":
            return {"psiType": "value", "valueList": [run(i) for i in indices]}
        if isinstance(selector, int) and not isinstance(selector, bool):
            if not 1 <= selector <= len(indices):
                raise BadRequest(
                    f"instance index {selector} out of range 1-{len(indices)}")
            return {"psiType": "value", "value": run(indices[selector - 1])}
        raise BadRequest("instance must be a positive integer or 'all'")

    def create_attribute(self, record: ResourceRecord, definition: Value,
                         description: Optional[str] = None,
                         pinned_key: Optional[str] = None) -> tuple[bool, str]:
        relation: Relation = record.entity
        canon = serialize_json([definition, description or ""])
        existing = self._created_defs.get(record.key + "\n" + canon)
        if existing is not None and self.registry.contains(existing):
            return False, existing

        resolved = self._resolve_definition(record.key, relation, definition)
        key = self._register_composed(record.key, resolved, description, pinned_key)
        relation.attribute_keys.append(key)
        self._created_defs[record.key + "\n" + canon] = key
        self._journal({"op": "create-attribute", "relation": record.key,
                       "definition": definition, "description": description,
                       "key": key})
        return True, key

    def _resolve_definition(self, relation_key: str, relation: Relation,
                            definition: Value):
        if isinstance(definition, str):
            key = self.localize(definition)
            if key is None:
                raise BadRequest(
                    f"{definition} does not name an attribute of this service")
            leaf = self.registry.get(key)
            if leaf is None or leaf.kind != "attribute":
                raise BadRequest(f"{definition} is not an attribute")
            if leaf.entity.relation_key != relation_key:
                raise BadRequest(
                    f"{definition} belongs to a different relation")
            return leaf.entity
        if isinstance(definition, list):
            if not definition:
                raise BadRequest("attribute definition array is empty")
            return [self._resolve_definition(relation_key, relation, item)
                    for item in definition]
        if isinstance(definition, dict):
            if not definition:
                raise BadRequest("attribute definition object is empty")
            return {name: self._resolve_definition(relation_key, relation, item)
                    for name, item in definition.items()}
        raise BadRequest("attribute definition leaves must be attribute URIs")

    def _register_composed(self, relation_key: str, resolved,
                           description: Optional[str],
                           pinned_key: Optional[str] = None) -> str:
        if isinstance(resolved, Attribute):
            return resolved.key

        if isinstance(resolved, list):
            child_keys = [self._register_composed(relation_key, item, None)
                          for item in resolved]
            sub: Value = child_keys
            entities = [self.registry.require(k).entity for k in child_keys]
            emits: Value = {"$array": {"items": [e.emits for e in entities]}}
            extractors = [self._runner(e) for e in entities]

            def extractor(row, fns=tuple(extractors)):
                return [fn(row) for fn in fns]
        else:
            child_keys = {name: self._register_composed(relation_key, item, None)
                          for name, item in resolved.items()}
            sub = dict(child_keys)
            entities = {n: self.registry.require(k).entity
                        for n, k in child_keys.items()}
            emits = {"/" + n: e.emits for n, e in entities.items()}
            named = {n: self._runner(e) for n, e in entities.items()}

            def extractor(row, fns=named):
                return {n: fn(row) for n, fn in fns.items()}

        key = self.next_key(f"{relation_key}/derived/", pinned_key)
        entity = Attribute(key=key, relation_key=relation_key, emits=emits,
                           extractor=extractor, description=description,
                           subattributes=sub, deletable=True)
        self.registry.add(ResourceRecord(key=key, kind="attribute", entity=entity))
        return key

    def _runner(self, attribute: Attribute) -> Callable:
        if not attribute.chain:
            return attribute.extractor
        chain = list(attribute.chain)
        extract = attribute.extractor

        def run(row):
            return self.run_chain(extract(row), chain)
        return run

    def delete_attribute(self, record: ResourceRecord) -> None:
        attribute: Attribute = record.entity
        if not attribute.deletable:
            raise Forbidden("this attribute was defined by the service and "
                            "may not be deleted")
        relation_record = self.registry.get(attribute.relation_key)
        self.registry.remove(record.key)
        if relation_record is not None:
            relation: Relation = relation_record.entity
            if record.key in relation.attribute_keys:
                relation.attribute_keys.remove(record.key)
        self._journal({"op": "delete", "key": record.key})

    # --- learners and predictors -------------------------------------------------------

    def fetch_representation(self, uri: str) -> Value:
        try:
            return self.fetcher.get_json(uri)
        except PsiError:
            raise
        except Exception as exc:
            raise ResolutionIOError(f"could not dereference {uri}: {exc}") from None

    def _normalize_representation(self, rep: Value) -> Value:
        if not isinstance(rep, dict):
            return rep
        out = dict(rep)
        for name in _SCHEMA_FIELDS:
            if name in out:
                try:
                    out[name] = self.compile(out[name])
                except PsiError as exc:
                    raise BadRequest(
                        f"schema field {name!r} of a task resource does not "
                        f"compile: {exc.message}") from None
        return out

    def process_task(self, record: ResourceRecord, task: Value,
                     pinned_key: Optional[str] = None,
                     pinned_stamp: Optional[str] = None,
                     resource_snapshots: Optional[dict] = None,
                     force_sync: bool = False) -> tuple[bool, str]:
        learner: Learner = record.entity
        if learner.train is None:
            raise NotImplementedByService(
                f"learner {record.key} is listed but not implemented")
        if not isinstance(task, dict):
            raise BadRequest("task must be an object")

        dereferenced: dict[str, tuple[Optional[str], Value]] = {}
        resources = task.get("resources")
        if isinstance(resources, dict):
            for name, val in resources.items():
                if isinstance(val, str) and val.startswith("$"):
                    uri = val[1:]
                    if resource_snapshots and name in resource_snapshots:
                        rep = resource_snapshots[name]
                    else:
                        rep = self.fetch_representation(uri)
                    dereferenced[name] = (uri, rep)
                else:
                    dereferenced[name] = (None, val)

        assembled = dict(task)
        if dereferenced:
            assembled["resources"] = {
                name: self._normalize_representation(rep)
                for name, (_, rep) in dereferenced.items()}
        compiled = self.compile(learner.task_schema)
        outcome = validate(assembled, compiled)
        if not outcome.valid:
            raise BadRequest(f"task does not conform to the task schema: "
                             f"{outcome.message()}")

        parameters = {k: v for k, v in task.items() if k != "resources"}
        _fill_defaults(parameters, compiled)

        learner_name = record.key.rsplit("/", 1)[-1]
        prefix = f"{self.roots['predictors']}/{learner_name}_"
        key = self.next_key(prefix, pinned_key)
        stamp = pinned_stamp or self.stamp()
        task_input = TaskInput(parameters=parameters, resources=dereferenced,
                               raw_task=task, predictor_key=key,
                               update_key=key + "/update", stamp=stamp)
        result = learner.train(self, task_input)
        predictor = result.transformer
        predictor.key = key
        if predictor.provenance is None:
            predictor.provenance = {}
        predictor.provenance.setdefault("learner", self.absolutize(record.key))
        predictor.provenance.setdefault("task", task)
        predictor.provenance.setdefault("created", stamp)
        delay = 0.0 if (self._replaying or force_sync) else result.delay
        if delay > 0:
            predictor.training = Training(learner_key=record.key,
                                          status="training in progress",
                                          ready_at=time.monotonic() + delay)
        with self.registry.lock:
            self.registry.add(ResourceRecord(key=key, kind="transformer",
                                             collection="predictors",
                                             entity=predictor))
            if predictor.update_schema is not None:
                predictor.update_key = key + "/update"
                self.registry.add(ResourceRecord(
                    key=predictor.update_key, kind="update",
                    entity=UpdateEndpoint(key=predictor.update_key,
                                          predictor_key=key)))
        self._journal({"op": "task", "learner": record.key, "task": task,
                       "key": key, "stamp": stamp,
                       "resources_snapshot": {
                           name: rep for name, (ref, rep) in dereferenced.items()
                           if ref is not None and self.localize(ref) is None}})
        return delay <= 0, key

    def update_predictor(self, record: ResourceRecord, body: dict,
                         pinned_stamp: Optional[str] = None) -> tuple[int, str]:
        endpoint: UpdateEndpoint = record.entity
        predictor_record = self.registry.require(endpoint.predictor_key)
        predictor = self.ensure_ready(predictor_record)
        has_value = "value" in body
        has_list = "valueList" in body
        if has_value == has_list:
            raise BadRequest("exactly one of value and valueList is required")
        updates = [body["value"]] if has_value else body["valueList"]
        if not isinstance(updates, list):
            raise BadRequest("valueList must be an array")
        compiled = self.compile(predictor.update_schema)
        for i, update in enumerate(updates):
            outcome = validate(update, compiled)
            if not outcome.valid:
                raise BadRequest(f"update value {i} does not conform to the "
                                 f"update schema: {outcome.message()}")
        stamp = pinned_stamp or self.stamp()
        if self.update_mode == "immutable":
            if predictor.clone is None:
                raise ServerError("this predictor cannot be updated immutably")
            successor = predictor.clone()
            key = self.next_key(endpoint.predictor_key + "_v")
            successor.key = key
            with self.registry.lock:
                for update in updates:
                    successor.apply_update(update)
                if successor.provenance is not None:
                    successor.provenance["updated"] = stamp
                successor.update_key = key + "/update"
                self.registry.add(ResourceRecord(key=key, kind="transformer",
                                                 collection="predictors",
                                                 entity=successor))
                self.registry.add(ResourceRecord(
                    key=successor.update_key, kind="update",
                    entity=UpdateEndpoint(key=successor.update_key,
                                          predictor_key=key)))
            self._journal({"op": "update", "update": record.key, "body": body,
                           "stamp": stamp})
            return 201, key
        with self.registry.lock:
            for update in updates:
                predictor.apply_update(update)
            if predictor.provenance is not None:
                predictor.provenance["updated"] = stamp
        self._journal({"op": "update", "update": record.key, "body": body,
                       "stamp": stamp})
        return 303, endpoint.predictor_key

    def delete_predictor(self, record: ResourceRecord) -> None:
        predictor = self.ensure_ready(record)
        with self.registry.lock:
            self.registry.remove(record.key)
            if predictor.update_key and self.registry.contains(predictor.update_key):
                self.registry.remove(predictor.update_key)
        self._journal({"op": "delete", "key": record.key})

    # --- journal replay -------------------------------------------------------------

    def replay_journal(self) -> int:
        if self.journal is None:
            return 0
        events = self.journal.events()
        self._replaying = True
        try:
            for event in events:
                self._replay_event(event)
        finally:
            self._replaying = False
        return len(events)

    def _replay_event(self, event: dict) -> None:
        op = event["op"]
        if op == "create-attribute":
            record = self.registry.require(event["relation"])
            self.create_attribute(record, event["definition"],
                                  event.get("description"),
                                  pinned_key=event["key"])
        elif op in ("join-transformer", "join-attribute"):
            base = self.registry.require(event["base"])
            join = (self.join_transformer if op == "join-transformer"
                    else self.join_attribute)
            join(base, event["join"], event.get("description"),
                 snapshot=event.get("target_rep"))
        elif op == "task":
            record = self.registry.require(event["learner"])
            self.process_task(record, event["task"], pinned_key=event["key"],
                              pinned_stamp=event.get("stamp"),
                              resource_snapshots=event.get("resources_snapshot"))
        elif op == "update":
            record = self.registry.require(event["update"])
            self.update_predictor(record, event["body"],
                                  pinned_stamp=event.get("stamp"))
        elif op == "delete":
            record = self.registry.get(event["key"])
            if record is not None:
                if record.kind == "attribute":
                    self.delete_attribute(record)
                else:
                    self.delete_predictor(record)


def _fill_defaults(params: dict, compiled: Value) -> None:
    """Fill absent optional properties that declare a default."""
    if not isinstance(compiled, dict):
        return
    for name, sub in compiled.get("properties", {}).items():
        if name == "resources":
            continue
        if not isinstance(sub, dict):
            continue
        if name not in params and "default" in sub:
            params[name] = sub["default"]
        elif name in params and isinstance(params[name], dict):
            _fill_defaults(params[name], sub)
