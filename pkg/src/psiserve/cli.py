"""Command line: serve a configured service, compile and validate
schemas locally, dry-run an ingestion manifest, and replay the
conformance walkthrough against a running service."""

from __future__ import annotations

import sys

import click

from .errors import PsiError
from .ingest import RelationManifest
from .schema import ResolutionContext, compile_schema, validate
from .values import parse_json, serialize_json


def _read_json(path: str):
    with open(path, encoding="utf-8") as f:
        return parse_json(f.read())


@click.group()
def main() -> None:
    """Serve and exercise machine-learning web resources."""


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True),
              help="Service config JSON; defaults to the bundled Iris service.")
@click.option("--host", default=None, help="Override the listen host.")
@click.option("--port", default=None, type=int, help="Override the listen port.")
def serve(config_path, host, port) -> None:
    """Start the HTTP service (PSI_ADDR overrides the configured address)."""
    from .service import ServiceConfig, default_config, serve as run_serve

    config = ServiceConfig.load(config_path) if config_path else default_config()
    run_serve(config, host=host, port=port)


@main.group()
def schema() -> None:
    """Work with schemas locally."""


@schema.command("compile")
@click.argument("schema_file", type=click.Path(exists=True))
def schema_compile(schema_file) -> None:
    """Compile a shorthand schema file and print the result."""
    try:
        compiled = compile_schema(_read_json(schema_file), ResolutionContext())
    except PsiError as exc:
        raise click.ClickException(exc.message)
    click.echo(serialize_json(compiled, indent=2))


@schema.command("validate")
@click.argument("schema_file", type=click.Path(exists=True))
@click.argument("value_file", type=click.Path(exists=True))
def schema_validate(schema_file, value_file) -> None:
    """Validate a JSON value file against a shorthand schema file;
    exits 1 with a violation listing when invalid."""
    try:
        compiled = compile_schema(_read_json(schema_file), ResolutionContext())
        outcome = validate(_read_json(value_file), compiled)
    except PsiError as exc:
        raise click.ClickException(exc.message)
    if outcome.valid:
        click.echo("valid")
        return
    for path, keyword, message in outcome.violations:
        click.echo(f"{path or '<root>'} [{keyword}]: {message}")
    sys.exit(1)


@main.command()
@click.option("--manifest", "manifest_path", required=True,
              type=click.Path(exists=True))
@click.option("--check", is_flag=True, default=False,
              help="Dry-run: parse the manifest and CSV, report, change nothing.")
def ingest(manifest_path, check) -> None:
    """Validate an ingestion manifest against its CSV."""
    try:
        manifest = RelationManifest.load(manifest_path)
        rows = manifest.read_rows()
    except PsiError as exc:
        raise click.ClickException(exc.message)
    click.echo(f"relation {manifest.name!r}: {len(rows)} instances, "
               f"{len(manifest.columns)} columns, "
               f"{len(manifest.attributes)} attributes, "
               f"{len(manifest.rich_attributes)} rich attributes")
    if check:
        click.echo("manifest and CSV are consistent")


@main.command()
@click.argument("entry_uri")
def conformance(entry_uri) -> None:
    """Replay the Iris walkthrough against a live service and report
    each step; exits 1 on any failure."""
    from .conformance import run_conformance

    report = run_conformance(entry_uri)
    for line in report.lines():
        click.echo(line)
    if not report.ok():
        sys.exit(1)


if __name__ == "__main__":
    main()
