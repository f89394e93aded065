"""Pydantic models for the wire messages.

Request models validate POST bodies after psiType dispatch. Response
models pin down the representation tables; the service builds
representations as plain values for flexibility, and these models are
the executable contract the tests (and the conformance harness) hold
them to. ``extra`` is forbidden on responses so undocumented fields
never leak out, and ignored on requests so clients may decorate.
"""

from __future__ import annotations

from typing import Any, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator


class _Request(BaseModel):
    model_config = ConfigDict(extra="ignore")


class CompositionRequest(_Request):
    psiType: Literal["composition"]
    join: str
    description: Optional[str] = None


class AttributeDefinitionRequest(_Request):
    psiType: Literal["attribute-definition"]
    attribute: Union[list, dict]
    description: Optional[str] = None


class ProcessRequest(_Request):
    psiType: Literal["task"]
    task: dict


class UpdateRequest(_Request):
    psiType: Literal["value"]
    value: Any = None
    valueList: Optional[list] = None

    @model_validator(mode="after")
    def _exactly_one(self) -> "UpdateRequest":
        present = [n for n in ("value", "valueList") if n in self.model_fields_set]
        if len(present) != 1:
            raise ValueError("exactly one of value and valueList is required")
        return self


class _Response(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ErrorBody(_Response):
    psiType: Literal["error"]
    message: str
    detail: Optional[str] = None


class ServiceDescription(_Response):
    psiType: Literal["service"]
    uri: str
    relations: Optional[str] = None
    schema_: Optional[str] = Field(default=None, alias="schema")
    learners: Optional[str] = None
    predictors: Optional[str] = None
    transformers: Optional[str] = None
    relatedServices: Optional[list] = None


class ResourceList(_Response):
    psiType: Literal["resource-list"]
    uri: str
    resources: list[str]
    relatedServices: Optional[list] = None


class RelationRepresentation(_Response):
    psiType: Literal["relation"]
    uri: str
    description: Optional[str] = None
    size: int
    defaultAttribute: str
    attributes: list[str]
    querySchema: Optional[dict] = None
    relatedServices: Optional[list] = None


class AttributeRepresentation(_Response):
    psiType: Literal["attribute"]
    uri: str
    description: Optional[str] = None
    emits: Any
    relation: str
    subattributes: Optional[Union[list, dict]] = None
    querySchema: Optional[dict] = None
    relatedServices: Optional[list] = None


class TransformerRepresentation(_Response):
    psiType: Literal["transformer"]
    uri: str
    description: Optional[str] = None
    accepts: Any
    emits: Any
    provenance: Optional[dict] = None
    update: Optional[str] = None
    relatedServices: Optional[list] = None


class LearnerRepresentation(_Response):
    psiType: Literal["learner"]
    uri: str
    description: str
    taskSchema: Any
    relatedServices: Optional[list] = None


class TrainingStatus(_Response):
    psiType: Literal["training-status"]
    uri: str
    learner: str
    status: str
    relatedServices: Optional[list] = None


class ValueResponse(_Response):
    psiType: Literal["value"]
    value: Any = None
    valueList: Optional[list] = None
    relatedServices: Optional[list] = None

    @model_validator(mode="after")
    def _exactly_one(self) -> "ValueResponse":
        present = [n for n in ("value", "valueList") if n in self.model_fields_set]
        if len(present) != 1:
            raise ValueError("exactly one of value and valueList is required")
        return self


REPRESENTATION_MODELS: dict[str, type[BaseModel]] = {
    "service": ServiceDescription,
    "resource-list": ResourceList,
    "relation": RelationRepresentation,
    "attribute": AttributeRepresentation,
    "transformer": TransformerRepresentation,
    "learner": LearnerRepresentation,
    "training-status": TrainingStatus,
    "value": ValueResponse,
    "error": ErrorBody,
}


def check_representation(rep: Any) -> None:
    """Validate a representation against its psiType's table contract;
    raises pydantic.ValidationError on any deviation."""
    if not isinstance(rep, dict) or "psiType" not in rep:
        raise ValueError("representation has no psiType")
    model = REPRESENTATION_MODELS.get(rep["psiType"])
    if model is None:
        raise ValueError(f"unknown psiType {rep['psiType']!r}")
    model.model_validate(rep)
