"""Command line front end.

``ingest`` checks a build, ``search`` queries it, ``wizard`` runs the
decision flow in the terminal, ``serve`` starts the HTTP service and
``fixture`` writes the demonstration corpus. ``--json`` output is
line-delimited and schema-identical to the HTTP response bodies, so the
same golden files cover both front ends.

Exit codes: 0 success, 1 validation or defect, 2 usage or IO error.
"""

from __future__ import annotations

import sys
from pathlib import Path

import click

from . import serialize
from .engine import DecisionEngine, canonical_json
from .errors import CodingSupportError
from .fixture import build_fixture, packaged_manifest
from .index import SearchIndex
from .ingestion import load_bundle
from .model import parse_section
from .tree import parse_tree_file, validate_tree


def _load(manifest: str | None, tree: str | None = None):
    path = Path(manifest) if manifest else packaged_manifest()
    bundle = load_bundle(path)
    if tree is not None:
        bundle.tree = parse_tree_file(tree)
    return bundle


def _fail(exc: CodingSupportError) -> None:
    click.echo(f"error: {exc.message}", err=True)
    sys.exit(1)


def _split_codes(values: tuple[str, ...]) -> list[str]:
    out: list[str] = []
    for value in values:
        out.extend(item.strip() for item in value.split(",") if item.strip())
    return out


manifest_option = click.option(
    "--manifest",
    default=None,
    metavar="PATH",
    envvar="SDOCODER_MANIFEST",
    help="Source manifest to load (defaults to the packaged demonstration corpus).",
)
tree_option = click.option(
    "--tree",
    default=None,
    metavar="PATH",
    envvar="SDOCODER_TREE",
    help="Decision tree file overriding the one listed in the manifest.",
)


@click.group()
def main() -> None:
    """Clinical coding support tools."""


@main.command()
@manifest_option
@tree_option
def ingest(manifest: str | None, tree: str | None) -> None:
    """Load a build, validate the hierarchy and the decision tree."""
    try:
        bundle = _load(manifest, tree)
    except CodingSupportError as exc:
        _fail(exc)
    for kind, count in sorted(bundle.counts.items()):
        click.echo(f"{kind}\t{count}")
    click.echo(f"total terms\t{bundle.kb.total_terms()}")
    if bundle.tree is not None:
        defects = validate_tree(bundle.tree)
        click.echo(f"tree nodes\t{len(bundle.tree.records)}")
        if defects:
            for defect in defects:
                click.echo(f"error: {defect}", err=True)
            sys.exit(1)


@main.command()
@click.argument("section")
@click.argument("query", nargs=-1, required=True)
@manifest_option
@click.option("--limit", default=50, show_default=True, help="Maximum results.")
@click.option("--json", "as_json", is_flag=True, help="Print the API response body.")
def search(section: str, query: tuple[str, ...], manifest: str | None, limit: int, as_json: bool) -> None:
    """Weighted search for QUERY in SECTION (diagnoses or procedures)."""
    try:
        bundle = _load(manifest)
        target = parse_section(section)
        index = SearchIndex(bundle.kb)
        payload = serialize.search_payload(
            bundle.kb, index, target, " ".join(query), limit=limit
        )
    except CodingSupportError as exc:
        _fail(exc)
    if as_json:
        click.echo(canonical_json(payload))
        return
    for result in payload["results"]:
        click.echo(f"{result['code']}\t{result['score']:g}\t{result['title']}")
    related = ", ".join(term["token"] for term in payload["related_terms"][:10])
    if related:
        click.echo(f"related: {related}")


def _parse_scripted(line: str, kind: str):
    if kind == "ask_multicode":
        return [item.strip() for item in line.split(",") if item.strip()]
    return line.strip()


def _prompt(kind: str, allowed: list[str]) -> object:
    if kind == "ask_binary":
        return click.prompt("answer (YES/NO)", type=str).strip()
    if kind == "ask_single_code":
        return click.prompt(f"answer (one of {', '.join(allowed)})", type=str).strip()
    raw = click.prompt(f"answer (comma separated, from {', '.join(allowed)})", type=str)
    return [item.strip() for item in raw.split(",") if item.strip()]


@main.command()
@click.option(
    "--pc",
    multiple=True,
    required=True,
    metavar="CODES",
    help="Pathological conditions, comma separated.",
)
@click.option("--pi", multiple=True, metavar="CODES", help="Procedures, comma separated.")
@manifest_option
@tree_option
@click.option(
    "--answers-file",
    type=click.Path(exists=True, dir_okay=False),
    default=None,
    help="Scripted answers, one per line; comma separated for multi-code questions.",
)
@click.option("--session-id", default=None, help="Fixed session id (for reproducible output).")
def wizard(pc, pi, manifest, tree, answers_file, session_id) -> None:
    """Identify the main condition of an episode interactively.

    Prints one JSON line per interaction; with --answers-file the whole
    transcript is reproducible byte for byte.
    """
    try:
        bundle = _load(manifest, tree)
        if bundle.tree is None:
            raise CodingSupportError("the manifest lists no decision tree")
        engine = DecisionEngine(bundle.kb, bundle.tree, bundle.procedure_sets)
        session, interaction = engine.start_session(
            _split_codes(pc), _split_codes(pi), session_id=session_id
        )
    except CodingSupportError as exc:
        _fail(exc)

    scripted: list[str] | None = None
    if answers_file is not None:
        lines = Path(answers_file).read_text(encoding="utf-8").splitlines()
        scripted = [l.strip() for l in lines if l.strip() and not l.lstrip().startswith("#")]

    step = 0
    while True:
        click.echo(interaction.to_json())
        if interaction.type == "result":
            return
        step += 1
        kind = interaction.type
        if scripted is not None:
            if step > len(scripted):
                click.echo(f"error: no scripted answer for step {step}", err=True)
                sys.exit(1)
            answer = _parse_scripted(scripted[step - 1], kind)
        else:
            allowed = list(interaction.allowed_answers or ())
            answer = _prompt(kind, allowed)
        try:
            session, interaction = engine.answer(session, interaction.state, answer)
        except CodingSupportError as exc:
            if scripted is None:
                click.echo(f"error: {exc.message}", err=True)
                continue
            click.echo(f"error: step {step}: {exc.message}", err=True)
            sys.exit(1)


@main.command()
@manifest_option
@tree_option
@click.option("--host", default="127.0.0.1", show_default=True, envvar="SDOCODER_HOST")
@click.option("--port", default=8000, show_default=True, envvar="SDOCODER_PORT")
@click.option(
    "--session-ttl",
    default=86400.0,
    show_default=True,
    envvar="SDOCODER_SESSION_TTL",
    help="Idle session TTL in seconds.",
)
@click.option(
    "--journal",
    default=None,
    metavar="PATH",
    envvar="SDOCODER_JOURNAL",
    help="Append session events to this JSONL file and replay it on startup.",
)
def serve(manifest, tree, host, port, session_ttl, journal) -> None:
    """Run the HTTP service."""
    import uvicorn

    from .service import create_app

    try:
        bundle = _load(manifest, tree)
        app = create_app(bundle=bundle, session_ttl=session_ttl, journal=journal)
    except CodingSupportError as exc:
        _fail(exc)
    uvicorn.run(app, host=host, port=port)


@main.command()
@click.argument("directory", type=click.Path(file_okay=False))
def fixture(directory: str) -> None:
    """Write the demonstration corpus into DIRECTORY."""
    manifest = build_fixture(directory)
    click.echo(str(manifest))


if __name__ == "__main__":
    main()
