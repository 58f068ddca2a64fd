"""Request bodies for the HTTP API.

``mapping`` and ``characterization`` stay untyped dicts on purpose: the
core modules own their validation and raise precise errors (missing
characterization aspect, bad column role) that the API maps to status
codes. Typed models here would mask those behind generic 422s.
"""

from __future__ import annotations

from pydantic import BaseModel, Field


class DatasetRequest(BaseModel):
    csv: str
    mapping: dict
    characterization: dict


class DashboardRequest(BaseModel):
    id: str | None = None
    title: str | None = None
    visualizations: list[dict] = Field(default_factory=list)


class QueryRequest(BaseModel):
    viz_id: str
    filters: list[dict] = Field(default_factory=list)


class SelectionRequest(BaseModel):
    selection: dict | None = None
