"""Command-line entry points.

All subcommands share one --config option pointing at a TOML file; with
no config they run fully offline against the mock gateway, which is
enough to exercise every path end to end.
"""

from __future__ import annotations

import json
import logging
import sys
from pathlib import Path

import click

from . import __version__
from .config import AppConfig, load_config
from .errors import ClaimcheckError
from .evaluation import (
    SWEEP_THRESHOLDS,
    Judge,
    run_eval,
    sweep_table,
    sweep_threshold,
    synthesize_fixtures,
)
from .service import Runtime


def _runtime(config: AppConfig) -> Runtime:
    return Runtime(config)


def _judge_identity(config: AppConfig) -> str:
    if config.gateway.type == "http" and "judge" in config.gateway.roles:
        return config.gateway.roles["judge"].model
    return "mock"


@click.group()
@click.version_option(version=__version__, prog_name="claimcheck")
@click.option(
    "--config",
    "config_path",
    type=click.Path(exists=True, dir_okay=False),
    default=None,
    help="TOML configuration file (defaults work offline).",
)
@click.option("--verbose", is_flag=True, help="Log at DEBUG level.")
@click.pass_context
def main(ctx: click.Context, config_path: str | None, verbose: bool) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        ctx.obj = load_config(config_path)
    except ClaimcheckError as exc:
        raise click.ClickException(exc.message)


@main.command()
@click.argument("corpus_file", type=click.Path(exists=True, dir_okay=False))
@click.pass_obj
def ingest(config: AppConfig, corpus_file: str) -> None:
    """Add documents from a JSONL corpus file."""
    try:
        summary = _runtime(config).ingest_file(corpus_file)
    except ClaimcheckError as exc:
        raise click.ClickException(exc.message)
    click.echo(
        "inserted %d, skipped %d duplicates, rejected %d"
        % (summary.inserted, summary.skipped, len(summary.rejected))
    )
    for lineno, reason in summary.rejected:
        click.echo("  line %d: %s" % (lineno, reason), err=True)


@main.command()
@click.argument("claim")
@click.option("--top-k", type=int, default=None, help="References to keep.")
@click.option(
    "--similarity-threshold", type=float, default=None, help="Re-rank cutoff."
)
@click.option("--n-keyword-docs", type=int, default=None)
@click.option("--n-vector-chunks", type=int, default=None)
@click.option("--json", "as_json", is_flag=True, help="Print the raw result JSON.")
@click.pass_obj
def detect(
    config: AppConfig,
    claim: str,
    top_k: int | None,
    similarity_threshold: float | None,
    n_keyword_docs: int | None,
    n_vector_chunks: int | None,
    as_json: bool,
) -> None:
    """Verify one claim and print the verdict."""
    overrides = {
        key: value
        for key, value in {
            "top_k": top_k,
            "similarity_threshold": similarity_threshold,
            "n_keyword_docs": n_keyword_docs,
            "n_vector_chunks": n_vector_chunks,
        }.items()
        if value is not None
    }
    try:
        result = _runtime(config).detector.detect(claim, overrides or None)
    except ClaimcheckError as exc:
        raise click.ClickException(exc.message)
    if as_json:
        click.echo(json.dumps(result.as_dict(), indent=2, ensure_ascii=False))
        return
    verdict = result.verdict
    click.echo("label: %s" % (verdict.label.value if verdict.label else "(unparsed)"))
    click.echo("valid: %s" % verdict.valid)
    click.echo("used references: %s" % result.used_references)
    if verdict.analysis:
        click.echo("analysis:\n%s" % verdict.analysis)
    if not verdict.valid:
        click.echo("raw completion:\n%s" % verdict.raw_completion)
    for ref in verdict.references:
        click.echo(
            "  [%d] %s (%s)%s"
            % (ref.number, ref.title, ref.source_name, " " + ref.url if ref.url else "")
        )
    for note in result.degraded:
        click.echo("degraded: %s" % note, err=True)
    timings = result.timings
    click.echo(
        "timings ms: recall %.1f, hypothesis %.1f, rerank %.1f, generation %.1f"
        % (
            timings.recall_ms,
            timings.hypothesis_ms,
            timings.rerank_ms,
            timings.generation_ms,
        )
    )


@main.command()
@click.option("--host", default=None, help="Bind address (overrides config).")
@click.option("--port", type=int, default=None, help="Port (overrides config).")
@click.pass_obj
def serve(config: AppConfig, host: str | None, port: int | None) -> None:
    """Run the HTTP API."""
    from .api import serve as run_server

    run_server(_runtime(config), host=host, port=port)


@main.command("eval")
@click.argument("dataset", type=click.Path(exists=True, dir_okay=False))
@click.option("--judge/--no-judge", "use_judge", default=None, help="Model-graded metrics.")
@click.option("--parallelism", type=int, default=None)
@click.option(
    "--report",
    "report_path",
    type=click.Path(dir_okay=False),
    default=None,
    help="Write the full report JSON here.",
)
@click.pass_obj
def eval_command(
    config: AppConfig,
    dataset: str,
    use_judge: bool | None,
    parallelism: int | None,
    report_path: str | None,
) -> None:
    """Evaluate the pipeline over a labeled dataset."""
    runtime = _runtime(config)
    judge_enabled = config.eval.judge if use_judge is None else use_judge
    judge = (
        Judge(
            runtime.gateway,
            templates_dir=config.paths.templates_dir,
            identity=_judge_identity(config),
        )
        if judge_enabled
        else None
    )
    try:
        report = run_eval(
            runtime.detector,
            dataset,
            judge=judge,
            parallelism=parallelism or config.eval.parallelism,
        )
    except ClaimcheckError as exc:
        raise click.ClickException(exc.message)
    click.echo(report.table())
    if report.judge_identity:
        click.echo("judge: %s" % report.judge_identity)
    if report_path:
        Path(report_path).write_text(
            json.dumps(report.as_dict(), indent=2, ensure_ascii=False),
            encoding="utf-8",
        )
        click.echo("report written to %s" % report_path)


@main.command("sweep-threshold")
@click.argument("dataset", type=click.Path(exists=True, dir_okay=False))
@click.option(
    "--thresholds",
    default=None,
    help="Comma-separated cutoffs (default %s)."
    % ",".join(str(t) for t in SWEEP_THRESHOLDS),
)
@click.option("--parallelism", type=int, default=None)
@click.option(
    "--out",
    "out_dir",
    type=click.Path(file_okay=False),
    default=None,
    help="Directory for per-threshold reports.",
)
@click.pass_obj
def sweep_command(
    config: AppConfig,
    dataset: str,
    thresholds: str | None,
    parallelism: int | None,
    out_dir: str | None,
) -> None:
    """Evaluate once per similarity threshold and tabulate."""
    runtime = _runtime(config)
    cutoffs = (
        tuple(float(part) for part in thresholds.split(","))
        if thresholds
        else SWEEP_THRESHOLDS
    )
    try:
        reports = sweep_threshold(
            runtime.detector,
            dataset,
            thresholds=cutoffs,
            parallelism=parallelism or config.eval.parallelism,
            out_dir=out_dir,
        )
    except ClaimcheckError as exc:
        raise click.ClickException(exc.message)
    click.echo(sweep_table(reports))
    if out_dir:
        click.echo("reports written to %s" % out_dir)


@main.command()
@click.argument("seeds_file", type=click.Path(exists=True, dir_okay=False))
@click.option("-n", "limit", type=int, default=None, help="Use only the first N seeds.")
@click.option(
    "--out",
    "out_path",
    type=click.Path(dir_okay=False),
    default=None,
    help="Write records as JSONL here.",
)
@click.pass_obj
def synthesize(
    config: AppConfig, seeds_file: str, limit: int | None, out_path: str | None
) -> None:
    """Generate synthetic rumor records from seed questions."""
    runtime = _runtime(config)
    seeds = [
        line.strip()
        for line in Path(seeds_file).read_text(encoding="utf-8").splitlines()
        if line.strip()
    ]
    if limit is not None:
        seeds = seeds[:limit]
    identity = (
        config.gateway.roles["generator"].model
        if config.gateway.type == "http" and "generator" in config.gateway.roles
        else "mock"
    )
    records, skipped = synthesize_fixtures(
        runtime.gateway,
        seeds,
        out_path=out_path,
        templates_dir=config.paths.templates_dir,
        generator_identity=identity,
    )
    click.echo("synthesized %d record(s), skipped %d seed(s)" % (len(records), len(skipped)))
    for position, reason in skipped:
        click.echo("  seed %d: %s" % (position, reason), err=True)
    if not out_path:
        for record in records:
            click.echo(json.dumps(record, ensure_ascii=False))


@main.command()
@click.pass_obj
def reindex(config: AppConfig) -> None:
    """Re-embed every chunk and rewrite the vector snapshot."""
    runtime = _runtime(config)
    try:
        total = runtime.reindex_vectors()
    except ClaimcheckError as exc:
        raise click.ClickException(exc.message)
    click.echo("reindexed %d chunk embeddings" % total)


if __name__ == "__main__":
    sys.exit(main())
