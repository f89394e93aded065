"""Conformance harness: replays the canonical Iris walkthrough against a
live service entry URI.

The harness knows only the entry URI; every other URI is discovered
from responses. It checks statuses and psiTypes exactly and numeric
payloads to a 1e-9 tolerance, validates each fetched representation
against the table contracts, and drives a second, in-process "stock"
service to exercise a cross-service predictor join. The run needs no
network beyond the entry URI itself.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Optional

from .errors import PsiError
from .fetch import Router, encode_query, params_to_query
from .models import check_representation
from .values import Value, json_equal, parse_data_uri, parse_json, serialize_json

TOLERANCE = 1e-9

HttpCallable = Callable[..., tuple[int, dict, Optional[Value]]]
# http(method, uri, query=None, body=None) -> (status, headers, body)

STOCK_BASE = "http://stock.invalid"

GOLDEN_INSTANCE_1 = {
    "sepal": {"length": 5.1, "width": 3.5},
    "petal": {"length": 1.4, "width": 0.2},
    "species": "setosa",
}
GOLDEN_FOLDED_SEPAL = {"length": 4.9, "width": 3.0}
GOLDEN_SQUARED_PREFIX = [26.01, 24.01, 22.09]
GOLDEN_SQUARED_SUFFIX = [38.44, 34.81]
GOLDEN_PROBE = [6.1, 2.1, 4.1, 1.7]
GOLDEN_PREDICTION = "versicolor"
GOLDEN_UPDATE = {"target": "virginica", "source": [6.4, 3.1, 6.5, 2.1]}


def values_close(a: Value, b: Value, tol: float = TOLERANCE) -> bool:
    """Structural equality with numeric tolerance."""
    if isinstance(a, bool) or isinstance(b, bool):
        return a is b
    if isinstance(a, (int, float)) and isinstance(b, (int, float)):
        return abs(a - b) <= tol
    if isinstance(a, list) and isinstance(b, list):
        return len(a) == len(b) and all(values_close(x, y, tol)
                                        for x, y in zip(a, b))
    if isinstance(a, dict) and isinstance(b, dict):
        return set(a) == set(b) and all(values_close(a[k], b[k], tol) for k in a)
    return a == b


@dataclass
class Step:
    name: str
    request: str
    expected: str
    actual: str
    passed: bool


@dataclass
class ConformanceReport:
    steps: list[Step] = field(default_factory=list)

    @property
    def passed(self) -> int:
        return sum(1 for s in self.steps if s.passed)

    @property
    def failed(self) -> int:
        return sum(1 for s in self.steps if not s.passed)

    def ok(self) -> bool:
        return self.failed == 0

    def lines(self) -> list[str]:
        out = []
        for step in self.steps:
            mark = "PASS" if step.passed else "FAIL"
            line = f"[{mark}] {step.name}: {step.request}"
            if not step.passed:
                line += f"\n       expected {step.expected}\n       actual   {step.actual}"
            out.append(line)
        out.append(f"{self.passed} passed, {self.failed} failed")
        return out


class StepFailure(Exception):
    def __init__(self, expected: str, actual: str):
        super().__init__(f"expected {expected}, got {actual}")
        self.expected = expected
        self.actual = actual


def default_http(timeout: float = 10.0) -> HttpCallable:
    import httpx

    client = httpx.Client(timeout=timeout)

    def http(method: str, uri: str, query: Optional[dict] = None,
             body: Optional[Value] = None):
        if query:
            sep = "&" if "?" in uri else "?"
            uri = uri + sep + encode_query(params_to_query(query))
        content = serialize_json(body).encode() if body is not None else None
        response = client.request(method, uri, content=content)
        parsed: Optional[Value] = None
        if response.content:
            try:
                parsed = parse_json(response.content)
            except PsiError:
                parsed = None
        return response.status_code, dict(response.headers), parsed

    return http


class ConformanceRunner:
    def __init__(self, entry_uri: str, http: Optional[HttpCallable] = None):
        self.entry = entry_uri.rstrip("/")
        self.http = http or default_http()
        self.report = ConformanceReport()
        self._notes: dict[str, Any] = {}

    # --- plumbing ------------------------------------------------------------

    def _step(self, name: str, request: str, fn: Callable[[], str]) -> bool:
        try:
            summary = fn()
            self.report.steps.append(Step(name, request, summary, summary, True))
            return True
        except StepFailure as exc:
            self.report.steps.append(Step(name, request, exc.expected,
                                          exc.actual, False))
        except Exception as exc:
            self.report.steps.append(Step(name, request, "no error",
                                          f"{type(exc).__name__}: {exc}", False))
        return False

    def _get(self, uri: str, query: Optional[dict] = None,
             expect_status: int = 200, check: bool = True):
        status, headers, body = self.http("GET", uri, query)
        if status != expect_status:
            raise StepFailure(f"status {expect_status}",
                              f"status {status}: {body}")
        if check and isinstance(body, dict) and "psiType" in body:
            check_representation(body)
        return headers, body

    def _post(self, uri: str, body: Value, expect_status: int):
        status, headers, response = self.http("POST", uri, None, body)
        if status != expect_status:
            raise StepFailure(f"status {expect_status}",
                              f"status {status}: {response}")
        return headers, response

    @staticmethod
    def _require(condition: bool, expected: str, actual: Any) -> None:
        if not condition:
            raise StepFailure(expected, repr(actual))

    def _close(self, actual: Value, expected: Value, what: str) -> str:
        self._require(values_close(actual, expected),
                      f"{what} = {expected!r}", actual)
        return f"{what} = {expected!r}"

    # --- the walkthrough -------------------------------------------------------

    def run(self) -> ConformanceReport:
        steps: list[tuple[str, str, Callable[[], str]]] = [
            ("discovery", f"GET {self.entry}", self.step_discovery),
            ("relation-list", "GET relations collection", self.step_relations),
            ("relation", "GET the iris relation", self.step_relation),
            ("default-attribute", "GET the default attribute", self.step_default_attribute),
            ("sub-attribute", "GET the petal sub-attribute", self.step_petal),
            ("instance-1", "GET default attribute, instance 1", self.step_instance_1),
            ("species-all", "GET species for all instances", self.step_species_all),
            ("fold-size", "GET relation with fold=2&numfolds=5", self.step_fold),
            ("fold-instance-1", "GET folded attribute, instance 1", self.step_fold_instance),
            ("find-square", "GET transformers, probe for the square", self.step_find_square),
            ("square-apply", "GET square with value=4", self.step_square_apply),
            ("attribute-join", "POST composition to sepal length", self.step_attribute_join),
            ("squared-prefix", "GET joined attribute, all instances", self.step_squared_values),
            ("rejoin-found", "POST the same composition again", self.step_rejoin),
            ("find-learner", "GET learners, find the nearest-neighbour one", self.step_find_learner),
            ("create-attribute", "POST attribute-definition to the relation", self.step_create_attribute),
            ("train", "POST task to the learner", self.step_train),
            ("predictor", "GET the predictor", self.step_predictor),
            ("predict", f"GET predictor with value={GOLDEN_PROBE}", self.step_predict),
            ("update-schema", "GET the update resource", self.step_update_schema),
            ("update", "POST an update value", self.step_update),
            ("predict-after-update", "GET predictor with the original probe", self.step_predict_after_update),
            ("update-probe-k1", "train with default k, update, probe", self.step_k1_update_probe),
            ("cross-service-join", "join a second service's attribute to the predictor", self.step_cross_service),
            ("rich-value", "fetch a rich value and check its media type", self.step_rich_value),
        ]
        for name, request, fn in steps:
            self._step(name, request, fn)
        return self.report

    def step_discovery(self) -> str:
        _, body = self._get(self.entry)
        self._require(body.get("psiType") == "service", "psiType service", body)
        for key in ("relations", "learners", "transformers", "predictors", "schema"):
            self._require(isinstance(body.get(key), str), f"{key} URI", body.get(key))
        for ldo in body.get("relatedServices", []):
            self._require("rel" in ldo and "href" in ldo,
                          "LDO with rel and href", ldo)
        self._notes["service"] = body
        return "service description with collection URIs"

    def step_relations(self) -> str:
        _, body = self._get(self._notes["service"]["relations"])
        self._require(body.get("psiType") == "resource-list", "resource-list", body)
        self._require(len(body.get("resources", [])) >= 1, ">= 1 relation", body)
        self._notes["relation_uri"] = body["resources"][0]
        return "resource list with at least one relation"

    def step_relation(self) -> str:
        _, body = self._get(self._notes["relation_uri"])
        self._require(body.get("psiType") == "relation", "psiType relation", body)
        self._close(body.get("size"), 150, "size")
        self._require("querySchema" in body, "querySchema present", body.keys())
        self._notes["relation"] = body
        return "relation with size 150 and a query schema"

    def step_default_attribute(self) -> str:
        _, body = self._get(self._notes["relation"]["defaultAttribute"])
        self._require(body.get("psiType") == "attribute", "psiType attribute", body)
        subs = body.get("subattributes")
        self._require(isinstance(subs, dict) and
                      {"sepal", "petal", "species"} <= set(subs),
                      "subattributes sepal/petal/species", subs)
        self._notes["default_attribute"] = body
        return "structured default attribute with named sub-attributes"

    def step_petal(self) -> str:
        subs = self._notes["default_attribute"]["subattributes"]
        _, body = self._get(subs["petal"])
        self._require(json_equal(body.get("emits"),
                                 {"/length": "$number", "/width": "$number"}),
                      "petal emits two numbers", body.get("emits"))
        return "petal sub-attribute emits length and width numbers"

    def step_instance_1(self) -> str:
        uri = self._notes["default_attribute"]["uri"]
        _, body = self._get(uri, {"instance": 1})
        return self._close(body.get("value"), GOLDEN_INSTANCE_1, "instance 1")

    def step_species_all(self) -> str:
        species_uri = self._notes["default_attribute"]["subattributes"]["species"]
        self._notes["species_uri"] = species_uri
        _, body = self._get(species_uri, {"instance": "all"})
        values = body.get("valueList")
        self._require(isinstance(values, list) and len(values) == 150,
                      "150 species values", len(values or []))
        self._close(values[:2], ["setosa", "setosa"], "first two")
        self._close(values[-2:], ["virginica", "virginica"], "last two")
        return "150 species labels from setosa to virginica"

    def step_fold(self) -> str:
        _, body = self._get(self._notes["relation_uri"],
                            {"fold": 2, "numfolds": 5})
        self._close(body.get("size"), 30, "folded size")
        for uri in body.get("attributes", []):
            self._require("fold=2" in uri and "numfolds=5" in uri,
                          "attribute URIs carry the query", uri)
        self._notes["folded_default"] = body["defaultAttribute"]
        return "fold 2 of 5 has size 30 and query-suffixed attribute URIs"

    def step_fold_instance(self) -> str:
        uri, _, query = self._notes["folded_default"].partition("?")
        args = dict(pair.split("=") for pair in query.split("&"))
        args["instance"] = 1
        _, body = self._get(uri, args)
        return self._close(body["value"]["sepal"], GOLDEN_FOLDED_SEPAL,
                           "folded instance 1 sepal")

    def step_find_square(self) -> str:
        _, listing = self._get(self._notes["service"]["transformers"])
        square = None
        for uri in listing.get("resources", []):
            _, rep = self._get(uri)
            if rep.get("accepts") != "$number":
                continue
            status, _, probe = self.http("GET", uri, {"value": 4})
            if status == 200 and values_close(probe.get("value"), 16.0):
                square = uri
                break
        self._require(square is not None, "a numeric squaring transformer",
                      listing.get("resources"))
        self._notes["square"] = square
        return "found the square transformer by probing"

    def step_square_apply(self) -> str:
        _, body = self._get(self._notes["square"], {"value": 4})
        self._require(body.get("psiType") == "value", "psiType value", body)
        return self._close(body.get("value"), 16.0, "square(4)")

    def step_attribute_join(self) -> str:
        sepal_uri = self._notes["default_attribute"]["subattributes"]["sepal"]
        _, sepal = self._get(sepal_uri)
        length_uri = sepal["subattributes"]["length"]
        self._notes["sepal_length"] = length_uri
        headers, _ = self._post(length_uri,
                                {"psiType": "composition",
                                 "join": self._notes["square"]}, 201)
        location = headers.get("location") or headers.get("Location")
        self._require(bool(location), "Location header", headers)
        self._notes["squared_attribute"] = location
        return "join created with a Location header"

    def step_squared_values(self) -> str:
        uri, _, query = self._notes["squared_attribute"].partition("?")
        args = dict(pair.split("=", 1) for pair in query.split("&")) if query else {}
        args["instance"] = "all"
        _, body = self._get(uri, args)
        values = body.get("valueList")
        self._require(isinstance(values, list) and len(values) == 150,
                      "150 squared values", len(values or []))
        self._close(values[:3], GOLDEN_SQUARED_PREFIX, "squared prefix")
        self._close(values[-2:], GOLDEN_SQUARED_SUFFIX, "squared suffix")
        return "squared sepal lengths match fore and aft"

    def step_rejoin(self) -> str:
        headers, _ = self._post(self._notes["sepal_length"],
                                {"psiType": "composition",
                                 "join": self._notes["square"]}, 302)
        location = headers.get("location") or headers.get("Location")
        self._require(location == self._notes["squared_attribute"],
                      "same Location as the first join", location)
        return "repeated join found the existing attribute"

    def step_find_learner(self) -> str:
        _, listing = self._get(self._notes["service"]["learners"])
        self._require(len(listing.get("resources", [])) >= 4,
                      ">= 4 learners listed", listing.get("resources"))
        knn = None
        for uri in listing["resources"]:
            _, rep = self._get(uri)
            schema = rep.get("taskSchema", {})
            if isinstance(schema, dict) and "?k" in schema and "/resources" in schema:
                knn = uri
                break
        self._require(knn is not None, "a learner taking a k parameter",
                      listing["resources"])
        self._notes["knn"] = knn
        return "found the nearest-neighbour learner"

    def step_create_attribute(self) -> str:
        flower = self._notes["default_attribute"]["subattributes"]
        _, sepal = self._get(flower["sepal"])
        _, petal = self._get(flower["petal"])
        parts = [sepal["subattributes"]["length"], sepal["subattributes"]["width"],
                 petal["subattributes"]["length"], petal["subattributes"]["width"]]
        headers, _ = self._post(
            self._notes["relation_uri"],
            {"psiType": "attribute-definition",
             "description": "A feature vector representation of iris dimensions",
             "attribute": parts}, 201)
        location = headers.get("location") or headers.get("Location")
        self._require(bool(location), "Location header", headers)
        _, rep = self._get(location)
        self._require(json_equal(rep.get("subattributes"), parts),
                      "subattributes echo the definition", rep.get("subattributes"))
        self._notes["array_attribute"] = rep
        return "created the feature-vector attribute"

    def step_train(self) -> str:
        task = {"k": 3, "resources": {
            "source": "$" + self._notes["array_attribute"]["uri"],
            "target": "$" + self._notes["species_uri"]}}
        headers, _ = self._post(self._notes["knn"],
                                {"psiType": "task", "task": task}, 201)
        location = headers.get("location") or headers.get("Location")
        self._require(bool(location), "Location header", headers)
        self._notes["task"] = task
        self._notes["predictor"] = location
        return "trained synchronously with 201 and a Location"

    def step_predictor(self) -> str:
        _, body = self._get(self._notes["predictor"])
        self._require(body.get("psiType") == "transformer",
                      "psiType transformer", body)
        self._require(json_equal(body.get("accepts"),
                                 self._notes["array_attribute"]["emits"]),
                      "accepts equals the source attribute's emits",
                      body.get("accepts"))
        emits = body.get("emits")
        self._require(json_equal(emits, {"$string": {"enum": [
            "setosa", "versicolor", "virginica"]}}),
                      "emits the three species", emits)
        self._require(json_equal(body.get("provenance", {}).get("task"),
                                 self._notes["task"]),
                      "provenance echoes the task", body.get("provenance"))
        self._require(isinstance(body.get("update"), str), "update URI", body)
        self._notes["update_uri"] = body["update"]
        return "predictor representation checks out"

    def step_predict(self) -> str:
        _, body = self._get(self._notes["predictor"],
                            {"value": GOLDEN_PROBE})
        return self._close(body.get("value"), GOLDEN_PREDICTION, "prediction")

    def step_update_schema(self) -> str:
        _, body = self._get(self._notes["update_uri"], check=False)
        self._require(isinstance(body, dict) and "/target" in body
                      and "/source" in body,
                      "update schema with /target and /source", body)
        return "update schema lists target and source"

    def step_update(self) -> str:
        headers, _ = self._post(self._notes["update_uri"],
                                {"psiType": "value", "value": GOLDEN_UPDATE}, 303)
        location = headers.get("location") or headers.get("Location")
        self._require(location == self._notes["predictor"],
                      "Location is the predictor URI", location)
        _, body = self._get(self._notes["predictor"])
        self._require("updated" in body.get("provenance", {}),
                      "provenance gains an updated stamp", body.get("provenance"))
        return "update accepted with 303 back to the predictor"

    def step_predict_after_update(self) -> str:
        _, body = self._get(self._notes["predictor"], {"value": GOLDEN_PROBE})
        return self._close(body.get("value"), GOLDEN_PREDICTION,
                           "prediction after update")

    def step_k1_update_probe(self) -> str:
        task = {"resources": dict(self._notes["task"]["resources"])}
        headers, _ = self._post(self._notes["knn"],
                                {"psiType": "task", "task": task}, 201)
        predictor = headers.get("location") or headers.get("Location")
        _, rep = self._get(predictor)
        headers, _ = self._post(rep["update"],
                                {"psiType": "value", "value": GOLDEN_UPDATE}, 303)
        _, body = self._get(predictor, {"value": GOLDEN_UPDATE["source"]})
        return self._close(body.get("value"), "virginica",
                           "default-k prediction at the updated point")

    def step_cross_service(self) -> str:
        stock = self._build_stock_service()
        status, _, relation = stock("GET", f"{STOCK_BASE}/data/irises",
                                    None, None)
        self._require(status == 200, "stock relation", status)
        dimensions_uri = relation["defaultAttribute"]
        status, headers, _ = stock("POST", dimensions_uri, None,
                                   {"psiType": "composition",
                                    "join": self._notes["predictor"],
                                    "description": "Predicted species"})
        self._require(status == 201, "join created (201)", status)
        joined = headers.get("Location") or headers.get("location")
        status, _, rep = stock("GET", joined, None, None)
        self._require(status == 200 and json_equal(
            rep.get("emits"),
            {"$string": {"enum": ["setosa", "versicolor", "virginica"]}}),
            "joined attribute emits the species enum", rep)
        status, _, predicted = stock("GET", joined, {"instance": "all"}, None)
        self._require(status == 200, "apply over all instances", status)
        labels = predicted.get("valueList")
        status, _, vectors = stock("GET", dimensions_uri,
                                   {"instance": "all"}, None)
        expected = []
        for vector in vectors["valueList"]:
            _, direct = self._get(self._notes["predictor"], {"value": vector})
            expected.append(direct["value"])
        self._require(labels == expected,
                      "joined values equal pointwise predictions", labels)
        return "cross-service predictive attribute agrees with the predictor"

    def _build_stock_service(self):
        """An in-process data-only peer whose outbound calls reach the
        main service through this runner's HTTP callable."""
        from .service import PsiService, ServiceConfig, build_service, bundled_path

        class _CallableFetcher:
            def __init__(self, http: HttpCallable):
                self._http = http

            def get_json(self, uri: str, params: Optional[dict] = None) -> Value:
                status, _, body = self._http("GET", uri, params, None)
                if status >= 400:
                    raise PsiError(f"GET {uri} returned {status}")
                return body

        router = Router(fallback=_CallableFetcher(self.http))
        config = ServiceConfig(base_uri=STOCK_BASE,
                               relations=[bundled_path("flowers.json")],
                               builtin_transformers=False,
                               builtin_learners=False)
        service = build_service(config, fetcher=router)

        def stock(method: str, uri: str, query: Optional[dict], body):
            path = uri[len(STOCK_BASE):] or "/"
            args = {k: v if isinstance(v, str) else serialize_json(v)
                    for k, v in (query or {}).items()}
            path, _, inline = path.partition("?")
            if inline:
                from .values import decode_query
                args = {**decode_query(inline), **args}
            response = service.handle(
                method, path, args,
                serialize_json(body) if body is not None else None)
            return response.status, response.headers, response.body

        return stock

    def step_rich_value(self) -> str:
        rich_uri = None
        for uri in self._notes["relation"]["attributes"]:
            _, rep = self._get(uri)
            if rep.get("emits") == "@image/jpeg":
                rich_uri = uri
                break
        self._require(rich_uri is not None, "an attribute emitting @image/jpeg",
                      self._notes["relation"]["attributes"])
        _, body = self._get(rich_uri, {"instance": 1})
        value = body.get("value")
        self._require(isinstance(value, str) and value.startswith("data:"),
                      "a data URI value", value)
        media_type = parse_data_uri(value).media_type
        self._require(media_type == "image/jpeg", "media type image/jpeg",
                      media_type)
        return "rich value carried as a data URI with the right media type"


def run_conformance(entry_uri: str,
                    http: Optional[HttpCallable] = None) -> ConformanceReport:
    return ConformanceRunner(entry_uri, http).run()
