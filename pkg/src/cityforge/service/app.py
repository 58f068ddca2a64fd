"""HTTP facade over a Workspace.

Error bodies are always {"error": <exception class name>, "detail": <str>}
so clients can branch on the class without parsing prose.
"""

from __future__ import annotations

import os
from pathlib import Path

from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from ..ccsv import CcsvError
from ..dashboard import (
    NonNumericCellError,
    UnknownColumnError,
    UnresolvableBindingError,
)
from ..ingest import IncompleteCharacterizationError, IngestError, InvalidTimeFrameError
from ..rdf import TurtleSyntaxError
from ..serializer import EmptyKgError, SerializationError
from ..vocab import MalformedIndicatorError
from .core import (
    NotFoundError,
    StateError,
    Workspace,
    dashboard_to_dict,
    filter_from_dict,
    result_to_dict,
)
from .schemas import DashboardRequest, DatasetRequest, QueryRequest, SelectionRequest

# First match in MRO order wins, so subclasses come before their bases.
_STATUS: list[tuple[type[Exception], int]] = [
    (IncompleteCharacterizationError, 422),
    (InvalidTimeFrameError, 422),
    (EmptyKgError, 409),
    (StateError, 409),
    (NotFoundError, 404),
    (CcsvError, 400),
    (IngestError, 400),
    (SerializationError, 400),
    (MalformedIndicatorError, 400),
    (UnresolvableBindingError, 400),
    (UnknownColumnError, 400),
    (NonNumericCellError, 400),
    (TurtleSyntaxError, 400),
    (ValueError, 400),
]


def _status_for(exc: Exception) -> int:
    for cls, code in _STATUS:
        if isinstance(exc, cls):
            return code
    return 500


def create_app(data_dir: str | Path) -> FastAPI:
    app = FastAPI(title="cityforge", version="0.1.0")
    workspace = Workspace(data_dir)
    app.state.workspace = workspace

    async def _handle(request: Request, exc: Exception) -> JSONResponse:
        return JSONResponse(
            status_code=_status_for(exc),
            content={"error": type(exc).__name__, "detail": str(exc)},
        )

    for cls, _ in _STATUS:
        app.add_exception_handler(cls, _handle)

    @app.get("/healthz")
    def healthz() -> dict:
        return {"status": "ok"}

    @app.post("/datasets", status_code=201)
    def create_dataset(body: DatasetRequest) -> dict:
        return workspace.ingest_dataset(body.csv, body.mapping, body.characterization)

    @app.get("/datasets")
    def list_datasets() -> list[dict]:
        return workspace.list_datasets()

    @app.post("/kg/serialize")
    def serialize() -> Response:
        # Raw bytes: repeated calls must return byte-identical manifests.
        return Response(content=workspace.serialize(), media_type="application/json")

    @app.get("/kg/manifest")
    def manifest() -> Response:
        return Response(content=workspace.manifest(), media_type="application/json")

    @app.get("/indicators/discovered")
    def discovered() -> dict:
        return workspace.discovered_payload()

    @app.get("/dashboards/preview")
    def preview() -> dict:
        return dashboard_to_dict(workspace.preview_dashboard())

    @app.post("/dashboards", status_code=201)
    def create_dashboard(body: DashboardRequest) -> dict:
        return dashboard_to_dict(workspace.create_dashboard(body.model_dump()))

    @app.get("/dashboards/{dashboard_id}")
    def get_dashboard(dashboard_id: str) -> dict:
        return dashboard_to_dict(workspace.get_dashboard(dashboard_id))

    @app.post("/dashboards/{dashboard_id}/query")
    def query(dashboard_id: str, body: QueryRequest) -> dict:
        filters = [filter_from_dict(f) for f in body.filters]
        return result_to_dict(workspace.query(dashboard_id, body.viz_id, filters))

    @app.post("/dashboards/{dashboard_id}/selection")
    def selection(dashboard_id: str, body: SelectionRequest) -> dict:
        expr = filter_from_dict(body.selection) if body.selection else None
        results = workspace.selection(dashboard_id, expr)
        return {viz_id: result_to_dict(r) for viz_id, r in results.items()}

    ui_dir = os.environ.get("FORGE_UI_DIR")
    if ui_dir and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
