"""Command line entry points.

Thin wrappers around the service Workspace: every command loads the
workspace from --data-dir (or FORGE_DATA_DIR), calls one operation, and
prints the result. State between invocations lives in the data
directory, so `forge ingest` twice then `forge serialize` behaves the
same as the equivalent HTTP calls against a running server.
"""

from __future__ import annotations

import json
import shutil
import sys
from pathlib import Path

import click
import yaml

from .service.core import Workspace, dashboard_to_dict


def _fail(exc: Exception) -> None:
    click.echo(f"{type(exc).__name__}: {exc}", err=True)
    sys.exit(1)


def _load_config(path: Path) -> dict:
    text = path.read_text(encoding="utf-8")
    if path.suffix in (".yaml", ".yml"):
        return yaml.safe_load(text)
    return json.loads(text)


def _copy_into(files: tuple[str, ...], target: Path) -> None:
    if not files:
        return
    target.mkdir(parents=True, exist_ok=True)
    for f in files:
        shutil.copy(f, target / Path(f).name)


@click.group()
@click.option(
    "--data-dir",
    envvar="FORGE_DATA_DIR",
    default="forge-data",
    show_default=True,
    help="Directory holding all workspace state.",
)
@click.pass_context
def main(ctx: click.Context, data_dir: str) -> None:
    """Ingest city CSVs, serialize the knowledge graph, build dashboards."""
    ctx.ensure_object(dict)
    ctx.obj["data_dir"] = Path(data_dir)


@main.command()
@click.argument("csv_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--config", "config_file", required=True, type=click.Path(exists=True, dir_okay=False),
              help="YAML or JSON file with 'mapping' and 'characterization' sections.")
@click.option("--ontology", "ontologies", multiple=True, type=click.Path(exists=True, dir_okay=False),
              help="Extra ontology Turtle file, copied into the workspace. Repeatable.")
@click.pass_context
def ingest(ctx: click.Context, csv_file: str, config_file: str, ontologies: tuple[str, ...]) -> None:
    """Load one CSV dataset into the knowledge graph."""
    data_dir: Path = ctx.obj["data_dir"]
    _copy_into(ontologies, data_dir / "ontology")
    config = _load_config(Path(config_file))
    try:
        workspace = Workspace(data_dir)
        result = workspace.ingest_dataset(
            Path(csv_file).read_text(encoding="utf-8"),
            config.get("mapping") or {},
            config.get("characterization") or {},
        )
    except Exception as exc:  # noqa: BLE001 - every error maps to exit 1
        _fail(exc)
    click.echo(json.dumps(result, indent=2))


@main.command()
@click.option("--catalog", "catalogs", multiple=True, type=click.Path(exists=True, dir_okay=False),
              help="Indicator catalog Turtle file, copied into the workspace. Repeatable.")
@click.option("--out", "out_dir", type=click.Path(file_okay=False),
              help="Also copy the emitted bundle into this directory.")
@click.pass_context
def serialize(ctx: click.Context, catalogs: tuple[str, ...], out_dir: str | None) -> None:
    """Project the knowledge graph into a bundle of .ccsv documents."""
    data_dir: Path = ctx.obj["data_dir"]
    _copy_into(catalogs, data_dir / "catalogs")
    try:
        workspace = Workspace(data_dir)
        manifest = workspace.serialize()
    except Exception as exc:  # noqa: BLE001
        _fail(exc)
    if out_dir:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for p in sorted((data_dir / "bundle").iterdir()):
            shutil.copy(p, out / p.name)
    click.echo(manifest.decode("utf-8"), nl=False)


@main.command()
@click.pass_context
def discover(ctx: click.Context) -> None:
    """Print the computable indicators as Turtle."""
    try:
        workspace = Workspace(ctx.obj["data_dir"])
        if workspace.discovered is None:
            workspace.serialize()
        payload = workspace.discovered_payload()
    except Exception as exc:  # noqa: BLE001
        _fail(exc)
    click.echo(payload["turtle"], nl=False)


@main.command()
@click.pass_context
def dashboard(ctx: click.Context) -> None:
    """Print the generated dashboard spec as JSON."""
    try:
        workspace = Workspace(ctx.obj["data_dir"])
        if workspace.bundle is None:
            workspace.serialize()
        spec = workspace.preview_dashboard()
    except Exception as exc:  # noqa: BLE001
        _fail(exc)
    click.echo(json.dumps(dashboard_to_dict(spec), indent=2))


@main.command()
@click.option("--port", default=8000, show_default=True, type=int)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.pass_context
def serve(ctx: click.Context, port: int, host: str) -> None:
    """Run the HTTP API."""
    import uvicorn

    from .service.app import create_app

    uvicorn.run(create_app(ctx.obj["data_dir"]), host=host, port=port)


if __name__ == "__main__":
    main()
