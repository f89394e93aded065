"""Reference learners and transformers.

The k-nearest-neighbour classifier memorises (feature vector, label)
pairs and predicts by plurality vote among the nearest stored points
under squared Euclidean distance; non-numeric atomic features
contribute 0 when equal and 1 when different. Ties at the k-th distance
widen the vote set to every point at that distance; a tied vote falls
to the label whose voting point has the lowest stored index.

Also here: the square and average transformers, a configurable-delay
learner for exercising the deferred-training path, and stub learners
that are listed but answer process requests with 501.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, replace
from typing import Optional

from .core import ServiceCore, TaskInput, TrainOutcome
from .errors import BadRequest, NotImplementedByService, ServerError
from .resources import Learner, Transformer
from .values import Value, is_number

KNN_TASK_SCHEMA: dict = {
    "?k": {"$integer": {"default": 1, "min": 1,
                        "description": "The number of nearest neighbours to examine"}},
    "/resources": {
        "/target": {"$nominalAttribute": {"allItems": "$string"}},
        "/source": {"$arrayAttribute": {"allItems": "$atomicValueSchema"}},
    },
}

DELAYED_TASK_SCHEMA: dict = {
    "?delay": {"$number": {"default": 0, "min": 0,
                           "description": "Seconds the training phase lasts"}},
}

IMAGECLASS_TASK_SCHEMA: dict = {
    "/resources": {
        "/target": {"$nominalAttribute": {"allItems": "$string"}},
        "/source": {"$richValueAttribute": {"mediaType": "image/jpeg"}},
    },
}

# for the listed-but-unimplemented learners; deliberately k-free
STUB_TASK_SCHEMA: dict = {
    "/resources": {
        "/target": {"$nominalAttribute": {"allItems": "$string"}},
        "/source": {"$arrayAttribute": {"allItems": "$atomicValueSchema"}},
    },
}


@dataclass(frozen=True)
class KnnModel:
    k: int
    points: tuple[tuple[tuple, str], ...]  # ((feature, ...), label)
    arity: int
    labels: tuple[str, ...]  # distinct labels, fixed at training

    def with_point(self, vector: list, label: str) -> "KnnModel":
        return replace(self, points=self.points + ((tuple(vector), label),))


def feature_distance(a: Value, b: Value) -> float:
    if is_number(a) and is_number(b):
        diff = a - b
        return diff * diff
    return 0.0 if (type(a) is type(b) and a == b) else 1.0


def knn_predict(model: KnnModel, vector: list) -> str:
    if len(vector) != model.arity:
        raise BadRequest(
            f"expected a vector of {model.arity} features, got {len(vector)}")
    distances = [sum(feature_distance(a, b) for a, b in zip(point, vector))
                 for point, _ in model.points]
    order = sorted(range(len(distances)), key=lambda i: (distances[i], i))
    k = min(model.k, len(order))
    threshold = distances[order[k - 1]]
    voters = [i for i in order if distances[i] <= threshold]
    counts: dict[str, int] = {}
    for i in voters:
        label = model.points[i][1]
        counts[label] = counts.get(label, 0) + 1
    best = max(counts.values())
    tied = [label for label, n in counts.items() if n == best]
    if len(tied) == 1:
        return tied[0]
    first_index = {label: min(i for i in voters if model.points[i][1] == label)
                   for label in tied}
    return min(tied, key=lambda label: first_index[label])


def _fetch_value_list(core: ServiceCore, uri: str) -> list:
    sep = "&" if "?" in uri else "?"
    response = core.fetcher.get_json(uri + sep + "instance=all")
    if not isinstance(response, dict) or "valueList" not in response:
        raise ServerError(f"{uri} did not return a value list")
    return response["valueList"]


def train_knn(core: ServiceCore, task: TaskInput) -> TrainOutcome:
    source_ref, source_rep = task.resources["source"]
    target_ref, target_rep = task.resources["target"]
    if not isinstance(source_rep, dict) or not isinstance(target_rep, dict):
        raise BadRequest("source and target must be attribute representations")
    if source_rep.get("relation") != target_rep.get("relation"):
        raise BadRequest("source and target attributes must belong to the "
                         "same relation")
    vectors = _fetch_value_list(core, source_rep["uri"])
    labels = _fetch_value_list(core, target_rep["uri"])
    if len(vectors) != len(labels):
        raise ServerError(f"source returned {len(vectors)} values but target "
                          f"returned {len(labels)}")
    if not vectors:
        raise BadRequest("cannot train on an empty relation")
    arity = len(vectors[0]) if isinstance(vectors[0], list) else -1
    points = []
    for vector, label in zip(vectors, labels):
        if not isinstance(vector, list) or len(vector) != arity:
            raise BadRequest("source attribute must emit fixed-length arrays")
        if any(not isinstance(x, (int, float, str, bool)) for x in vector):
            raise BadRequest("source features must be atomic values")
        if not isinstance(label, str):
            raise BadRequest("target attribute must emit strings")
        points.append((tuple(vector), label))
    k = task.parameters.get("k", 1)
    model = KnnModel(k=k, points=tuple(points), arity=arity,
                     labels=tuple(sorted({label for _, label in points})))
    return TrainOutcome(transformer=_knn_predictor(model, task, source_rep))


def _knn_predictor(model: KnnModel, task: TaskInput, source_rep: dict) -> Transformer:
    holder = [model]
    lock = threading.Lock()
    accepts = source_rep.get("emits")
    emits = {"$string": {"enum": list(model.labels)}}
    update_schema = {"/target": {"$string": {"enum": list(model.labels)}},
                     "/source": accepts}

    def predict(value: Value) -> str:
        return knn_predict(holder[0], value)

    def apply_update(update: Value) -> None:
        with lock:
            holder[0] = holder[0].with_point(update["source"], update["target"])

    def clone() -> Transformer:
        snapshot = _knn_predictor(holder[0], task, source_rep)
        snapshot.provenance = dict(entity.provenance or {})
        return snapshot

    relation = source_rep.get("relation", "")
    trained_on = relation.rsplit("/", 1)[-1] if isinstance(relation, str) else ""
    entity = Transformer(
        key=task.predictor_key, accepts=accepts, emits=emits, fn=predict,
        description=f"kNN trained predictor (trained on {trained_on})",
        update_schema=update_schema, apply_update=apply_update, clone=clone)
    return entity


def train_delayed(core: ServiceCore, task: TaskInput) -> TrainOutcome:
    delay = task.parameters.get("delay", 0)

    def identity(value: Value) -> Value:
        return value

    entity = Transformer(key=task.predictor_key, accepts="$number",
                         emits="$number", fn=identity,
                         description="Identity predictor from the slow learner")
    return TrainOutcome(transformer=entity, delay=float(delay))


def square_transformer(key: str) -> Transformer:
    return Transformer(
        key=key, accepts="$number", emits="$number",
        fn=lambda v: float(v) ** 2,
        description="Calculates the square of a number",
        provenance={"created": "2013-08-15T09:00Z", "createdBy": "system"})


def average_transformer(key: str) -> Transformer:
    return Transformer(
        key=key,
        accepts={"$array": {"allItems": "$number", "minItems": 1}},
        emits="$number",
        fn=lambda v: sum(v) / len(v),
        description="Calculates the arithmetic mean of an array of numbers",
        provenance={"created": "2013-08-15T09:00Z", "createdBy": "system"})


def builtin_learners(roots_learn: str, include_slow: bool = False) -> list[Learner]:
    """The learner line-up: knn is real, the rest are listed stubs. The
    slow learner (deferred-training path) is added on request; it is
    mainly useful for exercising clients."""
    learners = [
        Learner(key=f"{roots_learn}/c45",
                description="A decision-tree learner (not implemented here)",
                task_schema=STUB_TASK_SCHEMA, train=None),
        Learner(key=f"{roots_learn}/imageclass",
                description="Supervised classifier of JPEG images using colour "
                            "and shape information (not implemented here)",
                task_schema=IMAGECLASS_TASK_SCHEMA, train=None),
        Learner(key=f"{roots_learn}/knn",
                description="A k-nearest neighbour algorithm that takes feature "
                            "vectors as input",
                task_schema=KNN_TASK_SCHEMA, train=train_knn),
        Learner(key=f"{roots_learn}/naivebayes",
                description="A naive Bayes classifier (not implemented here)",
                task_schema=STUB_TASK_SCHEMA, train=None),
    ]
    if include_slow:
        learners.append(Learner(
            key=f"{roots_learn}/slow",
            description="Returns an identity predictor after a configurable "
                        "training delay",
            task_schema=DELAYED_TASK_SCHEMA, train=train_delayed))
    return learners
