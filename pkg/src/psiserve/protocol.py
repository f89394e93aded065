"""Maps wire requests (method, path, query, body) onto core operations.

This layer is framework-free: the FastAPI adapter, the in-process
router used for self-addressed fetches, and the journal replay all go
through ``Protocol.handle``. Status codes follow the resource tables;
every error becomes a ``{"psiType": "error", ...}`` body with the
status carried by the raised PsiError.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from typing import Optional, Union

import pydantic

from .core import ServiceCore
from .errors import (BadRequest, MethodNotAllowed, NotFound, PsiError,
                     ResolutionIOError)
from .models import (AttributeDefinitionRequest, CompositionRequest,
                     ProcessRequest, UpdateRequest)
from .schema import coerce_argument
from .values import Value, decode_query, parse_json, serialize_json

logger = logging.getLogger(__name__)

_INT = re.compile(r"^-?\d+$")


@dataclass
class Response:
    status: int
    body: Optional[Value] = None
    headers: dict[str, str] = field(default_factory=dict)


def parse_request_value(raw: str) -> Value:
    """The ``value`` argument is JSON; bare strings that do not parse
    (media URIs, labels) count as text."""
    try:
        return parse_json(raw)
    except PsiError:
        return raw


class Protocol:
    def __init__(self, core: ServiceCore):
        self.core = core
        core.inproc_get = self.inproc_get

    # --- entry points ---------------------------------------------------------

    def handle(self, method: str, path: str,
               query: Union[str, dict[str, str], None] = None,
               body: Union[bytes, str, Value, None] = None) -> Response:
        try:
            args = decode_query(query) if isinstance(query, str) else dict(query or {})
            return self._dispatch(method.upper(), path, args, body)
        except PsiError as exc:
            return self._error(exc)
        except pydantic.ValidationError as exc:
            first = exc.errors()[0]
            message = f"bad request body: {first['msg']}"
            return self._error(BadRequest(message))
        except Exception:
            logger.exception("unhandled error for %s %s", method, path)
            return self._error(PsiError("internal error"))

    def inproc_get(self, uri: str, params: Optional[dict] = None) -> Value:
        """GET against this service without a socket; used for schema
        resolution and resource dereferencing of self-addressed URIs."""
        from .fetch import params_to_query

        if not uri.startswith(self.core.base_uri):
            raise ResolutionIOError(f"{uri} is not served here")
        rest = uri[len(self.core.base_uri):]
        path, _, query = rest.partition("?")
        args = decode_query(query)
        if params:
            args.update(params_to_query(params))
        response = self.handle("GET", path or "/", args)
        if response.status >= 400:
            message = ""
            if isinstance(response.body, dict):
                message = response.body.get("message", "")
            raise ResolutionIOError(
                f"GET {uri} returned {response.status}: {message}")
        return response.body

    # --- dispatch ----------------------------------------------------------------

    def _error(self, exc: PsiError) -> Response:
        body = {"psiType": "error", "message": exc.message}
        if exc.detail:
            body["detail"] = exc.detail
        return Response(status=exc.status, body=body)

    def _dispatch(self, method: str, path: str, args: dict[str, str],
                  body) -> Response:
        if method not in ("GET", "POST", "DELETE", "HEAD"):
            raise MethodNotAllowed(f"{method} is not supported")
        if method == "HEAD":
            method = "GET"  # the wire adapter drops the body
        path = self._normalize(path)

        if path == "":
            if method != "GET":
                raise MethodNotAllowed("the service root only answers GET")
            return Response(200, self.core.describe_service())

        collection = self.core.collection_for_path(path)
        if collection is not None:
            if method != "GET":
                raise MethodNotAllowed("collections only answer GET")
            return Response(200, self.core.list_collection(collection))

        key = path
        token = args.pop("t", None)
        if token is not None:
            key = f"{path}?t={token}"
        record = self.core.lookup(key)

        if method == "GET":
            return self._get(record, args)
        if method == "POST":
            return self._post(record, body)
        return self._delete(record)

    @staticmethod
    def _normalize(path: str) -> str:
        if not path.startswith("/"):
            path = "/" + path
        if path != "/" and path.endswith("/"):
            path = path.rstrip("/")
        return "" if path == "/" else path

    # --- GET -----------------------------------------------------------------------

    def _get(self, record, args: dict[str, str]) -> Response:
        kind = record.kind
        if kind == "schema":
            template = coerce_argument(args.pop("template", "false")) is True
            return Response(200, self.core.schema_body(record, args, template))
        if kind == "transformer":
            raw = args.pop("value", None)
            self._no_extra_args(args)
            if raw is None:
                return Response(200, self.core.transformer_representation(record))
            return Response(200, self.core.apply_transformer(
                record, parse_request_value(raw)))
        if kind == "relation":
            fold = self._fold_args(record.entity, args)
            return Response(200, self.core.relation_representation(record, fold))
        if kind == "attribute":
            selector = args.pop("instance", None)
            relation = self.core.registry.require(record.entity.relation_key).entity
            fold = self._fold_args(relation, args)
            if selector is None:
                return Response(200, self.core.attribute_representation(record, fold))
            return Response(200, self.core.apply_attribute(
                record, self._instance(selector), fold))
        if kind == "learner":
            return Response(200, self.core.representation(record))
        if kind == "update":
            predictor = self.core.registry.require(record.entity.predictor_key)
            self.core.ensure_ready(predictor)
            return Response(200, self.core.representation(record))
        raise NotFound(f"no resource at {record.key}")

    @staticmethod
    def _instance(raw: str) -> Value:
        if raw == "all":
            return "all"
        if _INT.match(raw):
            return int(raw)
        raise BadRequest("instance must be a positive integer or 'all'")

    def _fold_args(self, relation, args: dict[str, str]):
        coerced = {k: coerce_argument(v) for k, v in args.items()}
        return self.core.validate_query_args(relation, coerced)

    @staticmethod
    def _no_extra_args(args: dict[str, str]) -> None:
        if args:
            raise BadRequest(f"unknown query arguments: {sorted(args)}")

    # --- POST ------------------------------------------------------------------------

    def _post(self, record, body) -> Response:
        parsed = self._parse_body(body)
        psi_type = parsed.get("psiType")
        kind = record.kind

        if kind == "transformer":
            request = self._expect(CompositionRequest, parsed, "composition")
            created, key = self.core.join_transformer(record, request.join,
                                                      request.description)
            return self._created_or_found(created, key)
        if kind == "attribute":
            request = self._expect(CompositionRequest, parsed, "composition")
            created, key = self.core.join_attribute(record, request.join,
                                                    request.description)
            return self._created_or_found(created, key)
        if kind == "relation":
            request = self._expect(AttributeDefinitionRequest, parsed,
                                   "attribute-definition")
            _, key = self.core.create_attribute(record, request.attribute,
                                                request.description)
            return Response(201, headers={"Location": self.core.absolutize(key)})
        if kind == "learner":
            request = self._expect(ProcessRequest, parsed, "task")
            created, key = self.core.process_task(record, request.task)
            return Response(201 if created else 202,
                            headers={"Location": self.core.absolutize(key)})
        if kind == "update":
            self._expect(UpdateRequest, parsed, "value")
            status, key = self.core.update_predictor(record, parsed)
            return Response(status, headers={"Location": self.core.absolutize(key)})
        raise MethodNotAllowed(f"POST is not supported at {record.key} "
                               f"(psiType {psi_type!r})")

    @staticmethod
    def _parse_body(body) -> dict:
        if body is None or body == b"" or body == "":
            raise BadRequest("a JSON request body is required")
        parsed = parse_json(body) if isinstance(body, (bytes, str)) else body
        if not isinstance(parsed, dict) or not isinstance(parsed.get("psiType"), str):
            raise BadRequest("request body must be an object with a psiType")
        return parsed

    @staticmethod
    def _expect(model, parsed: dict, psi_type: str):
        if parsed.get("psiType") != psi_type:
            raise BadRequest(
                f"this resource expects psiType {psi_type!r}, "
                f"got {parsed.get('psiType')!r}")
        return model.model_validate(parsed)

    def _created_or_found(self, created: bool, key: str) -> Response:
        location = self.core.absolutize(key)
        return Response(201 if created else 302, headers={"Location": location})

    # --- DELETE -----------------------------------------------------------------------

    def _delete(self, record) -> Response:
        if record.kind == "attribute":
            self.core.delete_attribute(record)
            return Response(200)
        if record.kind == "transformer" and record.collection == "predictors":
            self.core.delete_predictor(record)
            return Response(200)
        raise MethodNotAllowed(f"DELETE is not supported at {record.key}")


def render_body(body: Optional[Value]) -> bytes:
    if body is None:
        return b""
    return serialize_json(body).encode("utf-8")
