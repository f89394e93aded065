"""Service assembly: configuration, boot sequence, and the FastAPI app.

A config names the address, the deployment profile (which resource
collections are public), the relation manifests to ingest, and any
tasks to run at boot (so a predictor-only deployment can train its
predictors from private data before hiding everything else).
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from datetime import datetime
from importlib import resources as importlib_resources
from typing import Callable, Optional

from fastapi import FastAPI, Request
from fastapi.responses import Response as HttpResponse

from .core import DEFAULT_ROOTS, ServiceCore
from .errors import BadRequest
from .fetch import Fetcher, HttpFetcher, Router
from .ingest import RelationManifest, ingest
from .learners import average_transformer, builtin_learners, square_transformer
from .protocol import Protocol, Response, render_body
from .registry import COLLECTION_KINDS, ResourceRecord
from .values import Value, parse_json

PROFILES: dict[str, set[str]] = {
    "full": set(COLLECTION_KINDS),
    "predictor-only": {"predictors"},
    "data-only": {"relations"},
}


@dataclass
class ServiceConfig:
    address: str = "127.0.0.1:8080"
    base_uri: Optional[str] = None
    profile: str = "full"
    roots: dict = field(default_factory=lambda: dict(DEFAULT_ROOTS))
    relations: list = field(default_factory=list)  # manifest paths or objects
    builtin_transformers: bool = True
    builtin_learners: bool = True
    include_slow_learner: bool = False
    pretrain: list = field(default_factory=list)   # {"learner": name, "task": {...}}
    persistence: Optional[str] = None
    related_services: list = field(default_factory=list)
    update_mode: str = "mutable"

    @classmethod
    def load(cls, path: str) -> "ServiceConfig":
        with open(path, encoding="utf-8") as f:
            raw = parse_json(f.read())
        if not isinstance(raw, dict):
            raise BadRequest("config must be a JSON object")
        base_dir = os.path.dirname(os.path.abspath(path))
        config = cls(
            address=raw.get("address", "127.0.0.1:8080"),
            base_uri=raw.get("baseUri"),
            profile=raw.get("profile", "full"),
            roots={**DEFAULT_ROOTS, **raw.get("roots", {})},
            relations=[os.path.join(base_dir, m) if isinstance(m, str) else m
                       for m in raw.get("relations", [])],
            builtin_transformers=raw.get("builtinTransformers", True),
            builtin_learners=raw.get("builtinLearners", True),
            include_slow_learner=raw.get("includeSlowLearner", False),
            pretrain=raw.get("pretrain", []),
            persistence=(os.path.join(base_dir, raw["persistence"])
                         if raw.get("persistence") else None),
            related_services=raw.get("relatedServices", []),
            update_mode=raw.get("updateMode", "mutable"),
        )
        if config.profile not in PROFILES:
            raise BadRequest(f"unknown profile {config.profile!r}")
        return config

    def resolved_base_uri(self) -> str:
        if self.base_uri:
            return self.base_uri.rstrip("/")
        return f"http://{self.address}"


class PsiService:
    """A core plus its protocol adapter; the unit the FastAPI app, the
    CLI, and in-process peers all talk to."""

    def __init__(self, core: ServiceCore, protocol: Protocol,
                 config: ServiceConfig):
        self.core = core
        self.protocol = protocol
        self.config = config

    def handle(self, method: str, path: str, query=None, body=None) -> Response:
        return self.protocol.handle(method, path, query, body)


def bundled_path(name: str) -> str:
    return str(importlib_resources.files("psiserve").joinpath("data", name))


def default_config() -> ServiceConfig:
    return ServiceConfig.load(bundled_path("config.json"))


def build_service(config: Optional[ServiceConfig] = None,
                  fetcher: Optional[Fetcher] = None,
                  clock: Optional[Callable[[], datetime]] = None) -> PsiService:
    config = config or default_config()
    base = config.resolved_base_uri()
    related = [dict(ldo, href=base + ldo["href"])
               if isinstance(ldo.get("href"), str) and ldo["href"].startswith("/")
               else ldo
               for ldo in config.related_services]
    if fetcher is None:
        fetcher = Router(fallback=HttpFetcher())
    core = ServiceCore(base_uri=base, roots=config.roots,
                       collections=set(COLLECTION_KINDS), fetcher=fetcher,
                       clock=clock, journal_path=config.persistence,
                       update_mode=config.update_mode, related_services=related)
    protocol = Protocol(core)

    for manifest_ref in config.relations:
        if isinstance(manifest_ref, str):
            manifest = RelationManifest.load(manifest_ref)
        else:
            manifest = RelationManifest.from_value(manifest_ref)
        ingest(core, manifest)

    if config.builtin_transformers:
        for entity in (square_transformer(f"{core.roots['transformers']}/square"),
                       average_transformer(f"{core.roots['transformers']}/average")):
            core.registry.add(ResourceRecord(key=entity.key, kind="transformer",
                                             collection="transformers",
                                             entity=entity))
    if config.builtin_learners:
        for learner in builtin_learners(core.roots["learners"],
                                        include_slow=config.include_slow_learner):
            core.registry.add(ResourceRecord(key=learner.key, kind="learner",
                                             collection="learners",
                                             entity=learner))

    core.replay_journal()
    _run_pretrain(core, config)
    core.exposed = set(PROFILES[config.profile])
    return PsiService(core=core, protocol=protocol, config=config)


def _run_pretrain(core: ServiceCore, config: ServiceConfig) -> None:
    """Boot-time training; runs synchronously, without journaling, and
    with $-references to server-relative paths absolutized."""
    if not config.pretrain:
        return
    core._replaying = True
    try:
        for item in config.pretrain:
            learner_key = f"{core.roots['learners']}/{item['learner']}"
            task = _absolutize_refs(item["task"], core.base_uri)
            core.process_task(core.registry.require(learner_key), task,
                              force_sync=True)
    finally:
        core._replaying = False


def _absolutize_refs(value: Value, base: str) -> Value:
    if isinstance(value, str) and value.startswith("$/"):
        return "$" + base + value[1:]
    if isinstance(value, list):
        return [_absolutize_refs(v, base) for v in value]
    if isinstance(value, dict):
        return {k: _absolutize_refs(v, base) for k, v in value.items()}
    return value


def create_app(service: PsiService) -> FastAPI:
    """Wrap a service in a FastAPI app: one catch-all route per method,
    bodies parsed and rendered by the protocol layer."""
    app = FastAPI(title="psiserve", docs_url=None, redoc_url=None,
                  openapi_url=None)

    @app.api_route("/{rest:path}",
                   methods=["GET", "POST", "PUT", "DELETE", "HEAD"])
    async def entry(rest: str, request: Request) -> HttpResponse:
        body = await request.body()
        result = service.handle(request.method, "/" + rest,
                                request.url.query, body or None)
        content = render_body(result.body)
        headers = dict(result.headers)
        if request.method == "HEAD":
            headers["Content-Length"] = str(len(content))
            content = b""
        return HttpResponse(content=content, status_code=result.status,
                            headers=headers, media_type="application/json")

    return app


def serve(config: ServiceConfig, host: Optional[str] = None,
          port: Optional[int] = None) -> None:
    address = os.environ.get("PSI_ADDR", config.address)
    config.address = address
    if host is None or port is None:
        parts = address.rsplit(":", 1)
        host = host or parts[0]
        port = port or (int(parts[1]) if len(parts) > 1 else 8080)
    service = build_service(config)
    app = create_app(service)
    import uvicorn

    uvicorn.run(app, host=host, port=port, log_level="warning")
