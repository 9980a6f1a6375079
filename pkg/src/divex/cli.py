"""Command line entry points: offline ingestion and the query service."""
from __future__ import annotations

from dataclasses import replace

import click

from .errors import DivexError
from .pipeline import ingest as run_ingest
from .pipeline import load_catalog, load_precomputed_featuremaps
from .service import ServiceConfig
from .service import serve as run_serve


@click.group()
def main():
    """Video exploration engine: ingest a corpus, then serve it."""


@main.command()
@click.option("--manifest", required=True, help="manifest.jsonl describing the corpus")
@click.option(
    "--concepts",
    "concept_paths",
    multiple=True,
    help="concept score CSV, repeatable (videoId,tSec,source,conceptId,score)",
)
@click.option("--out", "out_dir", required=True, help="catalog output directory")
@click.option("--seed", default=0, show_default=True, envvar="DIVEX_SOM_SEED", help="featuremap training seed")
@click.option("--precompute-maps", is_flag=True, help="also write featuremaps.jsonl")
def ingest(manifest: str, concept_paths: tuple[str, ...], out_dir: str, seed: int, precompute_maps: bool):
    """Build a catalog directory from a video manifest and score files."""
    try:
        summary = run_ingest(manifest, list(concept_paths), out_dir, seed=seed, precompute_maps=precompute_maps)
    except DivexError as exc:
        raise click.ClickException(str(exc))
    for line in summary.lines():
        click.echo(line)


@main.command()
@click.option("--catalog", "catalog_dir", required=True, envvar="DIVEX_CATALOG", help="catalog directory to serve")
@click.option("--bind", default="127.0.0.1:8080", show_default=True, envvar="DIVEX_BIND", help="host:port")
def serve(catalog_dir: str, bind: str):
    """Serve a catalog over HTTP until interrupted."""
    config = replace(ServiceConfig.from_env(ServiceConfig()), catalog_dir=catalog_dir, bind=bind)
    try:
        config.host_port()
    except ValueError as exc:
        raise click.ClickException(str(exc))
    try:
        snapshot = load_catalog(config.catalog_dir)
        maps = load_precomputed_featuremaps(config.catalog_dir)
    except DivexError as exc:
        raise click.ClickException(str(exc))
    run_serve(snapshot, config, maps)


if __name__ == "__main__":
    main()
