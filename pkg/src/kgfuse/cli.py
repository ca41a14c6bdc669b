"""Command-line surface: validate inputs, run both fusion models, rank next
steps, and serve the HTTP gateway.

Exit codes: 0 success, 1 domain/validation failure, 2 input parse failure.
"""

from __future__ import annotations

import functools
import json
import sys
from pathlib import Path

import click

from . import demo
from .bayes import load_bn, validate_bn
from .config import load_config
from .errors import FormatError, GateFailedError, KgFuseError, UnknownNodeError
from .graph import canonical_json, dumps_graph, load_graph, validate_dag
from .merging import fuse_many
from .recommend import recommend_next, start_session
from .weighting import GATE_REQUIREMENTS, apply_bindings, load_bindings

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_PARSE = 2


def _fail(message: str, code: int):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def handle_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except FormatError as exc:
            _fail(str(exc), EXIT_PARSE)
        except FileNotFoundError as exc:
            _fail(str(exc), EXIT_PARSE)
        except GateFailedError as exc:
            click.echo(_gate_table(exc.report), err=True)
            _fail(str(exc), EXIT_INVALID)
        except KgFuseError as exc:
            _fail(f"[{exc.code}] {exc}", EXIT_INVALID)

    return wrapper


def _gate_table(report) -> str:
    lines = ["requirement  verdict  reason"]
    for name in GATE_REQUIREMENTS:
        verdict = report.requirements[name]
        lines.append(f"{name:<12} {'pass' if verdict.passed else 'FAIL':<8} {verdict.reason}")
    return "\n".join(lines)


@click.group()
def main():
    """Treatment-pathway knowledge graph fusion and recommendation."""


# ---------------------------------------------------------------------------
# validate
# ---------------------------------------------------------------------------

def _sniff_kind(path: Path) -> str:
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON: {exc.msg} (line {exc.lineno})", line=exc.lineno) from None
    if isinstance(doc, dict) and "variables" in doc:
        return "bn"
    return "graph"


@main.command()
@click.argument("file", type=click.Path(exists=True, path_type=Path))
@click.option("--kind", type=click.Choice(["auto", "graph", "bn"]), default="auto")
@click.option("--json", "as_json", is_flag=True, help="Print the report as canonical JSON.")
@handle_errors
def validate(file: Path, kind: str, as_json: bool):
    """Validate a graph or network file; exit 1 on any violation."""
    if kind == "auto":
        kind = _sniff_kind(file)
    if kind == "bn":
        bn = load_bn(file)
        report = validate_bn(bn)
        if as_json:
            click.echo(canonical_json(report.to_dict()), nl=False)
        else:
            click.echo("valid" if report.valid else "invalid")
            for violation in report.violations:
                click.echo(f"  {violation.kind}: {violation.message}")
        sys.exit(EXIT_OK if report.valid else EXIT_INVALID)
    graph = load_graph(file, allow_cycles=True)
    ok, cycle = validate_dag(graph)
    report_doc = {"valid": ok, "cycle": cycle}
    if as_json:
        click.echo(canonical_json(report_doc), nl=False)
    else:
        click.echo("valid" if ok else f"invalid\n  cycle: {' -> '.join(cycle)}")
    sys.exit(EXIT_OK if ok else EXIT_INVALID)


# ---------------------------------------------------------------------------
# fuse-weights
# ---------------------------------------------------------------------------

@main.command("fuse-weights")
@click.option("--graph", "graph_path", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--bn", "bn_path", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--bindings", "bindings_path", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--out", "out_path", required=True, type=click.Path(path_type=Path))
@click.option("--report", "report_path", type=click.Path(path_type=Path))
@click.option("--config", "config_path", type=click.Path(exists=True, path_type=Path),
              help="Configuration file (supplies the domain alias table).")
@click.option("--timestamp", help="Pin the provenance timestamp (RFC 3339) for reproducible audits.")
@handle_errors
def fuse_weights(graph_path, bn_path, bindings_path, out_path, report_path, config_path, timestamp):
    """Gate-check a network, then stamp its posteriors onto graph edges."""
    graph = load_graph(graph_path)
    bn = load_bn(bn_path)
    bindings = load_bindings(bindings_path)
    aliases = load_config(config_path).domain_aliases if config_path else None
    weighted, applications = apply_bindings(graph, bn, bindings,
                                            domain_aliases=aliases, ingested_at=timestamp)
    out_path.write_text(dumps_graph(weighted), encoding="utf-8")
    report_doc = [a.to_doc() for a in applications]
    if report_path:
        report_path.write_text(canonical_json(report_doc), encoding="utf-8")
    click.echo(f"weighted {len(applications)} edge(s) -> {out_path}")


# ---------------------------------------------------------------------------
# fuse-merge
# ---------------------------------------------------------------------------

@main.command("fuse-merge")
@click.option("--main", "main_path", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--sources", "source_paths", multiple=True,
              type=click.Path(exists=True, path_type=Path),
              help="External graph files; repeatable, may be omitted entirely.")
@click.option("--out", "out_path", required=True, type=click.Path(path_type=Path))
@click.option("--report", "report_path", type=click.Path(path_type=Path))
@click.option("--threshold", type=float, help="Label similarity threshold override.")
@click.option("--timestamp", help="Pin the provenance timestamp (RFC 3339).")
@handle_errors
def fuse_merge(main_path, source_paths, out_path, report_path, threshold, timestamp):
    """Contextually merge external treatment graphs into the main graph.

    A source that fails (e.g. would introduce a cycle) is skipped with a
    warning and recorded in the report; later sources still apply.
    """
    from .merging import AlignmentConfig

    main_graph = load_graph(main_path)
    sources = [load_graph(p) for p in source_paths]
    config = AlignmentConfig()
    if threshold is not None:
        config.label_similarity_threshold = threshold
    fused, reports = fuse_many(main_graph, sources, config, ingested_at=timestamp)
    out_path.write_text(dumps_graph(fused), encoding="utf-8")
    report_doc = [r.to_dict() for r in reports]
    if report_path:
        report_path.write_text(canonical_json(report_doc), encoding="utf-8")
    for report in reports:
        if report.status == "skipped":
            click.echo(f"warning: source {report.source_id!r} skipped: {report.error}", err=True)
        else:
            click.echo(
                f"merged {report.source_id!r}: +{len(report.added_nodes)} node(s),"
                f" +{len(report.added_edges)} edge(s),"
                f" {len(report.skipped_duplicates)} duplicate(s) skipped"
            )
    click.echo(f"fused graph -> {out_path}")


# ---------------------------------------------------------------------------
# recommend
# ---------------------------------------------------------------------------

def _parse_evidence(pairs: tuple[str, ...]) -> dict[str, str]:
    evidence: dict[str, str] = {}
    for pair in pairs:
        if "=" not in pair:
            raise FormatError(f"evidence must look like VAR=STATE, got {pair!r}")
        var, _, state = pair.partition("=")
        evidence[var] = state
    return evidence


@main.command()
@click.option("--graph", "graph_path", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--bn", "bn_path", type=click.Path(exists=True, path_type=Path))
@click.option("--start", "start_node", required=True)
@click.option("--evidence", "evidence_pairs", multiple=True, help="VAR=STATE, repeatable.")
@click.option("--json", "as_json", is_flag=True, help="Print the ranking as canonical JSON.")
@handle_errors
def recommend(graph_path, bn_path, start_node, evidence_pairs, as_json):
    """Rank the next treatment steps from a start node."""
    graph = load_graph(graph_path)
    bn = load_bn(bn_path) if bn_path else None
    if not evidence_pairs:
        evidence = {}
    elif bn is None:
        raise UnknownNodeError("--evidence requires --bn")
    else:
        evidence = _parse_evidence(evidence_pairs)
    bn_id = bn.source.source_id if bn is not None and bn.source else None
    session = start_session("cli", graph, start_node, bn=bn, bn_id=bn_id)
    from .recommend import add_evidence

    for var, state in evidence.items():
        add_evidence(session, var, state)
    steps = recommend_next(session, log_event=False)
    if as_json:
        click.echo(canonical_json([s.to_doc() for s in steps]), nl=False)
        return
    if not steps:
        click.echo("no outgoing steps")
        return
    click.echo(f"{'rank':<5} {'weight':<8} {'edge':<20} {'target':<28} source")
    for step in steps:
        source = step.explanation.get("kind", "stored")
        if step.assumed:
            source = "assumed"
        flag = f" [error: {step.error}]" if step.error else ""
        click.echo(
            f"{step.rank:<5} {step.effective_weight:<8.4f} {step.edge_id:<20}"
            f" {step.target_label:<28} {source}{flag}"
        )


# ---------------------------------------------------------------------------
# serve / demo data
# ---------------------------------------------------------------------------

@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True, path_type=Path))
@handle_errors
def serve(config_path):
    """Run the HTTP gateway."""
    from .service import run

    config = load_config(config_path)
    click.echo(f"serving on {config.host}:{config.port} (data: {config.data_dir})")
    run(config)


@main.command("init-demo")
@click.argument("directory", type=click.Path(path_type=Path))
@handle_errors
def init_demo(directory: Path):
    """Write the bundled demo dataset (graphs, network, bindings) to a
    directory laid out for the gateway."""
    (directory / "graphs").mkdir(parents=True, exist_ok=True)
    (directory / "bns").mkdir(parents=True, exist_ok=True)
    mapping = {
        "acs_main.json": directory / "graphs" / "acs_main.json",
        "acs_weighted.json": directory / "graphs" / "acs_weighted.json",
        "acs_infused.json": directory / "graphs" / "acs_infused.json",
        "golden_fused_acs.json": directory / "graphs" / "golden_fused_acs.json",
        "acs_bn.json": directory / "bns" / "acs_bn.json",
        "acs_bindings.json": directory / "acs_bindings.json",
    }
    for name, target in mapping.items():
        target.write_text(demo.data_path(name).read_text(encoding="utf-8"), encoding="utf-8")
        click.echo(f"wrote {target}")


if __name__ == "__main__":
    main()
