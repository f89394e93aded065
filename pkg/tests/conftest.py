from __future__ import annotations

from datetime import datetime, timezone

import pytest

from psiserve.schema import ResolutionContext
from psiserve.service import PsiService, ServiceConfig, build_service, bundled_path
from psiserve.values import decode_query, serialize_json

BASE = "http://unit.invalid"


def fixed_clock():
    return datetime(2013, 8, 2, 8, 7, tzinfo=timezone.utc)


def make_service(**overrides) -> PsiService:
    kwargs = dict(base_uri=BASE, relations=[bundled_path("iris.json")],
                  related_services=[{"rel": "help", "href": "/schema"}])
    kwargs.update(overrides)
    return build_service(ServiceConfig(**kwargs), clock=fixed_clock)


def http_for(service: PsiService):
    """Adapt a service into the conformance harness's HTTP callable."""
    base = service.core.base_uri

    def http(method, uri, query=None, body=None):
        assert uri.startswith(base), f"request escaped the service: {uri}"
        rest = uri[len(base):] or "/"
        path, _, inline = rest.partition("?")
        args = dict(decode_query(inline))
        for k, v in (query or {}).items():
            args[k] = v if isinstance(v, str) else serialize_json(v)
        response = service.handle(
            method, path, args,
            serialize_json(body) if body is not None else None)
        return response.status, response.headers, response.body

    return http


@pytest.fixture
def ctx() -> ResolutionContext:
    return ResolutionContext()


@pytest.fixture
def service() -> PsiService:
    return make_service()


@pytest.fixture
def iris(service):
    """(service, handle) with the iris relation loaded."""
    return service, service.handle
