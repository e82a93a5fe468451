"""Command-line interface over every pipeline stage.

Exit codes: 0 success, 1 invalid input rows, 2 usage error, 3 I/O error,
4 disconnected endpoints. Outputs are deterministic for a fixed seed; the
``traverse`` JSON schema matches POST /api/traverse byte for byte.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import dataset as dataset_io
from . import traversal as tv
from .grammar import (
    DEFAULT_T_MAX,
    GrammarError,
    derive as derive_rules,
    load_default_grammar,
    load_grammar,
    parse as parse_smiles,
)
from .latent import (
    DEFAULT_DECODER_SEED,
    DEFAULT_ENCODER_SEED,
    DEFAULT_LATENT_DIM,
    GrammarLogitDecoder,
    ProjectionEncoder,
)
from .molecule import activity_class
from .traversal import (
    DisconnectedError,
    Endpoint,
    HeuristicWeights,
    RequestError,
    TraversalRequest,
    round_floats,
)

EXIT_INVALID = 1
EXIT_IO = 3
EXIT_DISCONNECTED = 4


def _grammar(grammar_path: str | None):
    if grammar_path is None:
        return load_default_grammar()
    try:
        return load_grammar(Path(grammar_path).read_text("utf-8"))
    except OSError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_IO)


@click.group()
def main():
    """Grammar-based molecule parsing and latent-space manifold traversal."""


@main.command("parse")
@click.argument("smiles")
@click.option("--grammar", "grammar_path", default=None, help="Grammar file (default: bundled).")
def parse_cmd(smiles: str, grammar_path: str | None):
    """Parse SMILES into production-rule ids."""
    grammar = _grammar(grammar_path)
    try:
        rules = parse_smiles(smiles, grammar)
    except GrammarError as exc:
        click.echo(f"invalid: {exc}", err=True)
        sys.exit(EXIT_INVALID)
    click.echo(" ".join(str(r) for r in rules.rule_ids))
    click.echo(f"complete: {rules.complete}")


@main.command("derive")
@click.argument("rule_ids", nargs=-1, type=int, required=True)
@click.option("--grammar", "grammar_path", default=None)
def derive_cmd(rule_ids: tuple[int, ...], grammar_path: str | None):
    """Derive the string for a sequence of production-rule ids."""
    grammar = _grammar(grammar_path)
    try:
        result = derive_rules(rule_ids, grammar)
    except GrammarError as exc:
        click.echo(f"invalid: {exc}", err=True)
        sys.exit(EXIT_INVALID)
    click.echo(result.text)
    if not result.complete:
        click.echo("complete: False")
        sys.exit(EXIT_INVALID)


@main.command("validate")
@click.argument("data_file", type=click.Path(exists=True))
@click.option("--grammar", "grammar_path", default=None)
def validate_cmd(data_file: str, grammar_path: str | None):
    """Validate every row of a dataset CSV; exit 1 if any row is invalid."""
    grammar = _grammar(grammar_path)
    try:
        result = dataset_io.load_dataset(data_file, grammar)
    except (dataset_io.FormatError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_IO)
    for issue in result.rejected:
        click.echo(f"row {issue.row}: REJECTED: {issue.reason}")
    for issue in result.deduplicated:
        click.echo(f"row {issue.row}: duplicate: {issue.reason}")
    click.echo(
        f"{len(result.records)} valid, {len(result.rejected)} rejected, "
        f"{len(result.deduplicated)} duplicates"
    )
    if result.rejected:
        sys.exit(EXIT_INVALID)


@main.command("build-index")
@click.option("--data", "data_file", required=True, type=click.Path(exists=True))
@click.option("--out", "out_file", required=True, type=click.Path())
@click.option("--seed", default=DEFAULT_ENCODER_SEED, show_default=True, help="Encoder seed.")
@click.option("--d", "latent_dim", default=DEFAULT_LATENT_DIM, show_default=True)
@click.option("--grammar", "grammar_path", default=None)
def build_index_cmd(data_file, out_file, seed, latent_dim, grammar_path):
    """Encode a dataset CSV into a latent index file."""
    grammar = _grammar(grammar_path)
    try:
        loaded = dataset_io.load_dataset(data_file, grammar)
    except (dataset_io.FormatError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_IO)
    if loaded.rejected:
        for issue in loaded.rejected:
            click.echo(f"row {issue.row}: REJECTED: {issue.reason}", err=True)
        sys.exit(EXIT_INVALID)
    encoder = ProjectionEncoder(grammar, latent_dim=latent_dim, seed=seed)
    index = tv.build_index(loaded.records, encoder)
    try:
        dataset_io.save_index(index, out_file)
    except OSError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_IO)
    click.echo(f"indexed {index.size} compounds (d={index.dim}) -> {out_file}")


def _endpoint_from_flags(name, label, rec_id, coords_json) -> Endpoint:
    given = [x for x in (label, rec_id, coords_json) if x is not None]
    if len(given) != 1:
        raise click.UsageError(
            f"specify exactly one of --{name}-label, --{name}-id, --{name}-coords"
        )
    if coords_json is not None:
        try:
            coords = tuple(float(x) for x in json.loads(coords_json))
        except (ValueError, TypeError) as exc:
            raise click.UsageError(f"--{name}-coords must be a JSON array: {exc}")
        return Endpoint(coords=coords)
    return Endpoint(label=label, id=rec_id)


@main.command("traverse")
@click.option("--index", "index_file", required=True, type=click.Path(exists=True))
@click.option("--source-label", default=None)
@click.option("--source-id", default=None)
@click.option("--source-coords", default=None, help="JSON array of floats.")
@click.option("--dest-label", default=None)
@click.option("--dest-id", default=None)
@click.option("--dest-coords", default=None, help="JSON array of floats.")
@click.option("--m", default=100, show_default=True, help="Points per path.")
@click.option("--n", default=8, show_default=True, help="Nearest neighbours per node.")
@click.option("--k", "k_paths", default=4, show_default=True, help="Number of paths.")
@click.option("--w-fp", default=1.0, show_default=True, help="Fingerprint-distance weight.")
@click.option("--w-sa", default=0.0, show_default=True, help="SA-distance weight.")
@click.option("--w-dl", default=0.0, show_default=True, help="Drug-likeness-distance weight.")
@click.option("--w-act", default=0.0, show_default=True, help="Activity-distance weight.")
@click.option("--mode", default="perturb", show_default=True,
              type=click.Choice(["yen", "perturb", "vary_m"]))
@click.option("--sigma", default=0.1, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", "out_file", default=None, type=click.Path())
@click.option("--decoder-weights", default=None, type=click.Path(exists=True))
@click.option("--decoder-seed", default=DEFAULT_DECODER_SEED, show_default=True)
@click.option("--t-max", default=DEFAULT_T_MAX, show_default=True)
@click.option("--grammar", "grammar_path", default=None)
@click.option("--max-rows", default=50, show_default=True, help="Summary table row cap.")
def traverse_cmd(index_file, source_label, source_id, source_coords,
                 dest_label, dest_id, dest_coords, m, n, k_paths,
                 w_fp, w_sa, w_dl, w_act, mode, sigma, seed, out_file,
                 decoder_weights, decoder_seed, t_max, grammar_path, max_rows):
    """Run a manifold traversal between two endpoints of a built index."""
    if m < 2:
        raise click.UsageError("--m must be >= 2")
    if n < 1:
        raise click.UsageError("--n must be >= 1")
    if k_paths < 1:
        raise click.UsageError("--k must be >= 1")
    grammar = _grammar(grammar_path)
    try:
        index = dataset_io.load_index(index_file, grammar)
    except (dataset_io.FormatError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_IO)
    if decoder_weights:
        decoder = dataset_io.load_decoder_weights(decoder_weights, grammar)
    else:
        decoder = GrammarLogitDecoder(grammar, latent_dim=index.dim, t_max=t_max, seed=decoder_seed)
    request = TraversalRequest(
        source=_endpoint_from_flags("source", source_label, source_id, source_coords),
        destination=_endpoint_from_flags("dest", dest_label, dest_id, dest_coords),
        m=m, n=n, k_paths=k_paths,
        weights=HeuristicWeights(w_fp, w_sa, w_dl, w_act),
        mode=mode, sigma=sigma, seed=seed,
    )
    try:
        result = tv.traverse(request, index, decoder)
    except DisconnectedError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_DISCONNECTED)
    except RequestError as exc:
        raise click.UsageError(str(exc))

    payload = round_floats(tv.result_to_dict(result))
    text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    if out_file:
        try:
            Path(out_file).write_text(text, encoding="utf-8")
        except OSError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_IO)
    else:
        click.echo(text, nl=False)

    _print_summary(result, max_rows)


def _print_summary(result, max_rows: int) -> None:
    stats = result.stats
    click.echo(
        f"paths: {len(result.paths)}  points: {stats.points}  "
        f"valid: {stats.valid}  novel: {stats.novel}  "
        f"unique novel valid: {stats.unique_novel_valid}"
    )
    rows = []
    seen: set[str] = set()
    for path in result.paths:
        for c in path.compounds:
            if not (c.complete and c.valid and c.novel) or c.smiles in seen:
                continue
            seen.add(c.smiles)
            rows.append(
                (
                    c.smiles,
                    c.activity_class or "-",
                    f"{c.sa:.3f}" if c.sa is not None else "-",
                    f"{c.mw:.2f}" if c.mw is not None else "-",
                    c.potential_label or "-",
                )
            )
    if not rows:
        click.echo("no novel valid compounds generated")
        return
    header = ("Generated compound", "Activity", "SAS", "MW", "Potential label")
    widths = [
        max(len(header[i]), *(len(r[i]) for r in rows[:max_rows])) for i in range(5)
    ]
    fmt = "  ".join(f"{{:<{w}}}" for w in widths)
    click.echo(fmt.format(*header))
    click.echo("  ".join("-" * w for w in widths))
    for row in rows[:max_rows]:
        click.echo(fmt.format(*row))
    if len(rows) > max_rows:
        click.echo(f"... and {len(rows) - max_rows} more")


@main.command("compound-info")
@click.argument("smiles")
@click.option("--grammar", "grammar_path", default=None)
@click.option("--activity", default=None, type=float)
def compound_info_cmd(smiles, grammar_path, activity):
    """Print properties of a single compound (validity, MW, drug-likeness)."""
    from . import molecule

    grammar = _grammar(grammar_path)
    report = molecule.validate_smiles(smiles, grammar)
    if not report.valid:
        for reason in report.reasons:
            click.echo(f"invalid: {reason}", err=True)
        sys.exit(EXIT_INVALID)
    mol = molecule.to_molgraph(smiles, grammar)
    click.echo(f"atoms: {mol.n_atoms}  bonds: {len(mol.bonds)}")
    click.echo(f"mw: {molecule.molecular_weight(mol):.3f}")
    click.echo(f"drug_likeness: {molecule.drug_likeness(mol):.4f}")
    if activity is not None:
        click.echo(f"activity_class: {activity_class(activity).label}")


@main.command("serve")
@click.option("--port", envvar="PORT", default=8080, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--index", "index_path", envvar="INDEX_PATH", default=None,
              help="Index file (default: build from the bundled corpus).")
@click.option("--grammar", "grammar_path", envvar="GRAMMAR_PATH", default=None)
@click.option("--weights", "weights_path", envvar="WEIGHTS_PATH", default=None,
              help="Decoder weight file (default: seeded stand-in).")
@click.option("--encoder-seed", default=DEFAULT_ENCODER_SEED, show_default=True)
@click.option("--static-dir", default=None, help="Optional UI bundle to serve at /.")
def serve_cmd(port, host, index_path, grammar_path, weights_path, encoder_seed, static_dir):
    """Serve the HTTP API (and optionally the web UI)."""
    import uvicorn

    from .service import build_session, create_app

    try:
        session = build_session(index_path, grammar_path, weights_path, encoder_seed)
    except (dataset_io.FormatError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_IO)
    app = create_app(session, static_dir)
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
