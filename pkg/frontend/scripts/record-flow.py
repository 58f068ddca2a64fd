#!/usr/bin/env python3
"""Record the HTTP exchanges the dashboard UI tests replay.

Drives the real service end to end and captures every request/response
pair verbatim, so the UI test suite can run against genuine service
output without a running server. Regenerate after changing the service:

    python3 scripts/record-flow.py

Sections of the output file:

    setup    the calls that populate the workspace (not replayed)
    session  the exact calls the UI makes, in order
    errors   failure responses the client tests assert against
"""

from __future__ import annotations

import json
import tempfile
from pathlib import Path

import yaml
from fastapi.testclient import TestClient

from cityforge.service.app import create_app

REPO = Path(__file__).resolve().parents[2]
FIXTURES = REPO / "tests" / "fixtures"
OUT = Path(__file__).resolve().parents[1] / "fixtures" / "recorded-flow.json"


class Recorder:
    def __init__(self, client: TestClient):
        self.client = client
        self.exchanges: list[dict] = []

    def call(self, method: str, path: str, body: dict | None = None, expect: int = 200):
        kwargs = {"json": body} if body is not None else {}
        r = self.client.request(method, path, **kwargs)
        assert r.status_code == expect, f"{method} {path}: {r.status_code} {r.text}"
        response = r.json()
        self.exchanges.append(
            {
                "method": method,
                "path": path,
                "request": body,
                "status": r.status_code,
                "response": response,
            }
        )
        return response


def dataset_body(csv_name: str, config_name: str) -> dict:
    config = yaml.safe_load((FIXTURES / config_name).read_text(encoding="utf-8"))
    return {
        "csv": (FIXTURES / csv_name).read_text(encoding="utf-8"),
        "mapping": config["mapping"],
        "characterization": config["characterization"],
    }


def record_session(client: TestClient) -> list[dict]:
    """The call sequence the UI performs, mirrored step for step."""
    rec = Recorder(client)

    manifest = rec.call("GET", "/kg/manifest")
    assert [d["rows"] for d in manifest["documents"]] == [3, 5]

    preview = rec.call("GET", "/dashboards/preview")

    # The added number card copies the measure binding of the first
    # previewed chart, exactly as DashboardBuilder.addNumberCard does.
    measure = dict(preview["visualizations"][0]["measure_binding"])
    card = {
        "id": "total-trips",
        "title": "total trips",
        "chart_type": "number",
        "measure_binding": measure,
        "dimension_binding": None,
        "join_path": None,
    }
    db = rec.call("POST", "/dashboards", {"visualizations": [card]}, expect=201)

    departure = next(
        v
        for v in db["visualizations"]
        if v["join_path"] and v["join_path"]["reference_column"] == "origin_station_id"
    )
    sel_path = f"/dashboards/{db['id']}/selection"

    initial = rec.call("POST", sel_path, {"selection": None})
    assert initial[departure["id"]]["groups"] == [["s1", 3], ["s2", 1], ["s3", 1]]
    assert initial["total-trips"]["groups"] == [[None, 5]]

    selection = {
        "target": {
            "document": departure["measure_binding"]["document"],
            "column": departure["join_path"]["reference_column"],
        },
        "op": "eq",
        "values": ["s1"],
    }
    selected = rec.call("POST", sel_path, {"selection": selection})
    assert selected["total-trips"]["groups"] == [[None, 3]]

    cleared = rec.call("POST", sel_path, {"selection": None})
    assert cleared == initial

    return rec.exchanges


def record_errors(populated: TestClient) -> list[dict]:
    rec = Recorder(populated)
    bad_card = {
        "id": "broken",
        "title": "broken",
        "chart_type": "number",
        "measure_binding": {
            "document": "qoe-m:Bicycle-Share_Trip",
            "column": "ghost",
            "function": "count",
        },
        "dimension_binding": None,
        "join_path": None,
    }
    rec.call("POST", "/dashboards", {"visualizations": [bad_card]}, expect=400)

    with tempfile.TemporaryDirectory() as td:
        empty = TestClient(create_app(Path(td) / "data"), raise_server_exceptions=False)
        fresh = Recorder(empty)
        fresh.call("GET", "/kg/manifest", expect=404)
        fresh.call("GET", "/dashboards/ghost", expect=404)
    return rec.exchanges + fresh.exchanges


def main() -> None:
    with tempfile.TemporaryDirectory() as td:
        client = TestClient(create_app(Path(td) / "data"), raise_server_exceptions=False)

        setup = Recorder(client)
        setup.call("POST", "/datasets", dataset_body("stations.csv", "stations-config.yaml"), expect=201)
        setup.call("POST", "/datasets", dataset_body("trips.csv", "trips-config.yaml"), expect=201)
        setup.call("POST", "/kg/serialize")

        session = record_session(client)
        errors = record_errors(client)

    out = {"setup": setup.exchanges, "session": session, "errors": errors}
    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps(out, indent=2) + "\n", encoding="utf-8")
    print(f"wrote {OUT} ({len(session)} session exchanges)")


if __name__ == "__main__":
    main()
