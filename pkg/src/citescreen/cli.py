"""Command-line interface.

One binary with a subcommand per pipeline stage plus an end-to-end
``pipeline`` command.  Exit codes: 0 on success, 1 on validation or
configuration errors, 2 on transport errors.
"""

from __future__ import annotations

import functools
import json
import sys

import click

from citescreen import corpus, pipeline, retrieve
from citescreen.corpus import Citation, ClinicalTopic
from citescreen.errors import CitescreenError, StatusError, TransportError
from citescreen.extract import build_concept_set, extract_population
from citescreen.pipeline import Resources
from citescreen.rank import rank_citations
from citescreen.tree import parse_bracketed_tree, parse_phrase_tree

# Usage errors are validation errors, not transport errors.
click.UsageError.exit_code = 1


def _handle_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (TransportError, StatusError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(2)
        except (CitescreenError, ValueError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(1)
    return wrapper


def _resources(ctx) -> Resources:
    opts = ctx.obj
    res = (
        pipeline.load_config(opts["config"]) if opts["config"]
        else Resources.bundled()
    )
    if opts["fixture_dir"]:
        res.endpoint.fixture_dir = opts["fixture_dir"]
    return res


def _emit(ctx, tsv_text: str, json_text: str):
    click.echo(json_text if ctx.obj["output"] == "json" else tsv_text, nl=False)
    if ctx.obj["output"] == "json" and not json_text.endswith("\n"):
        click.echo()


def _load_citations_jsonl(path: str) -> list[Citation]:
    citations = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                citations.append(Citation.from_dict(json.loads(line)))
    return citations


@click.group()
@click.option("--config", type=click.Path(exists=True), default=None,
              help="JSON config with weights, paths and endpoint settings.")
@click.option("--fixture-dir", type=click.Path(), default=None,
              help="Directory of citation XML files to query hermetically.")
@click.option("--top-k", type=int, default=None,
              help="Keep only the top K ranked citations.")
@click.option("--gold-k", type=int, default=None,
              help="Also report precision at this cutoff during eval.")
@click.option("--output", type=click.Choice(["tsv", "json"]), default="tsv",
              help="Output format.")
@click.pass_context
def main(ctx, config, fixture_dir, top_k, gold_k, output):
    """Citation retrieval, screening and ranking for clinical questions."""
    ctx.obj = {
        "config": config,
        "fixture_dir": fixture_dir,
        "top_k": top_k,
        "gold_k": gold_k,
        "output": output,
    }


@main.command()
@click.argument("xml_files", nargs=-1, required=True,
                type=click.Path(exists=True))
@click.option("--out", type=click.Path(), default=None,
              help="Write citations as JSON lines here instead of stdout.")
@click.pass_context
@_handle_errors
def ingest(ctx, xml_files, out):
    """Parse citation XML files into one JSON record per line."""
    citations: list[Citation] = []
    for path in xml_files:
        with open(path, encoding="utf-8") as fh:
            citations.extend(corpus.parse_citation_xml(fh.read()))
    lines = "".join(c.to_json() + "\n" for c in citations)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(lines)
        click.echo(f"wrote {len(citations)} citations to {out}")
    else:
        click.echo(lines, nl=False)


@main.command()
@click.option("--text", default=None, help="Sentence or title to analyse.")
@click.option("--tree", "tree_text", default=None,
              help="Bracketed phrase tree; population patterns only.")
@click.pass_context
@_handle_errors
def extract(ctx, text, tree_text):
    """Extract population, intervention and disease concepts."""
    if (text is None) == (tree_text is None):
        raise click.UsageError("provide exactly one of --text or --tree")
    res = _resources(ctx)
    if tree_text is not None:
        tree = parse_bracketed_tree(tree_text)
        sentence = " ".join(tree.tokens())
        mentions = extract_population(tree, sentence, res.lexicon)
        rows = [("population", m.surface) for m in mentions]
    else:
        concepts = build_concept_set([text], res.lexicon, res.drugs, res.synonyms)
        rows = [
            (category, value)
            for category in ("population", "intervention", "disease")
            for value in getattr(concepts, category)
        ]
    tsv = "category\tconcept\n" + "".join(f"{c}\t{v}\n" for c, v in rows)
    payload = json.dumps(
        [{"category": c, "concept": v} for c, v in rows], indent=2
    )
    _emit(ctx, tsv, payload)


@main.command()
@click.option("--title", required=True, help="Clinical question title.")
@click.option("--topic-id", default="topic", help="Identifier for messages.")
@click.pass_context
@_handle_errors
def query(ctx, title, topic_id):
    """Build and print the Boolean retrieval query for a question."""
    res = _resources(ctx)
    topic = ClinicalTopic(topic_id, title)
    concepts = pipeline.topic_concepts(topic, res)
    _, query_string = retrieve.build_query(
        topic, concepts, res.hyponyms, res.journal_whitelist,
        min_year=res.min_year,
    )
    click.echo(query_string)


@main.command()
@click.argument("query_string")
@click.option("--out", type=click.Path(), default=None,
              help="Write matching citations as JSON lines here.")
@click.pass_context
@_handle_errors
def fetch(ctx, query_string, out):
    """Run a Boolean query against the endpoint or fixture corpus."""
    res = _resources(ctx)
    result = retrieve.fetch_citations(query_string, res.endpoint)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.writelines(c.to_json() + "\n" for c in result.citations)
    tsv = "pmid\n" + "".join(f"{p}\n" for p in result.pmids)
    _emit(ctx, tsv, json.dumps({"source": result.source,
                                "pmids": result.pmids}, indent=2))


@main.command()
@click.option("--title", required=True, help="Clinical question title.")
@click.argument("citations_jsonl", type=click.Path(exists=True))
@click.pass_context
@_handle_errors
def screen(ctx, title, citations_jsonl):
    """Apply the four screening constraints; one JSON decision per line."""
    res = _resources(ctx)
    query_concepts = pipeline.topic_concepts(ClinicalTopic("topic", title), res)
    from citescreen.screen import screen_citation

    for citation in _load_citations_jsonl(citations_jsonl):
        concepts = pipeline.citation_concepts(citation, res)
        decision = screen_citation(
            query_concepts, citation, concepts, res.drugs,
            res.qualifier_whitelist,
        )
        click.echo(decision.to_json())


@main.command()
@click.option("--title", required=True, help="Clinical question title.")
@click.argument("citations_jsonl", type=click.Path(exists=True))
@click.pass_context
@_handle_errors
def rank(ctx, title, citations_jsonl):
    """Rank screened citations by weighted concept-vector similarity."""
    res = _resources(ctx)
    query_concepts = pipeline.topic_concepts(ClinicalTopic("topic", title), res)
    per_citation = {}
    for citation in _load_citations_jsonl(citations_jsonl):
        concepts = pipeline.citation_concepts(citation, res)
        merged = pipeline.ConceptSet()
        for cs in [concepts.title, *concepts.sentences]:
            merged.population.extend(cs.population)
            merged.intervention.extend(cs.intervention)
            merged.disease.extend(cs.disease)
        per_citation[citation.pmid] = merged
    ranked = rank_citations(
        sorted(per_citation), query_concepts, per_citation, res.weights
    )
    if ctx.obj["top_k"]:
        ranked = ranked[:ctx.obj["top_k"]]
    _emit(ctx, pipeline.ranked_tsv(ranked), pipeline.ranked_json(ranked))


def _read_ranked_pmids(path: str) -> list[int]:
    pmids = []
    with open(path, encoding="utf-8") as fh:
        header = fh.readline()
        if not header.startswith("rank\t"):
            raise ValueError(f"{path}: expected a ranked TSV header")
        for line in fh:
            if line.strip():
                pmids.append(int(line.split("\t")[1]))
    return pmids


@main.command("eval")
@click.argument("gold_tsv", type=click.Path(exists=True))
@click.argument("ranked_dir", type=click.Path(exists=True))
@click.pass_context
@_handle_errors
def eval_cmd(ctx, gold_tsv, ranked_dir):
    """Score per-topic ranked lists (<topic_id>.tsv) against a gold table."""
    import os

    from citescreen.evaluate import confusion

    topics = corpus.load_gold_standard(gold_tsv)
    per_topic = {}
    gold_k_counts = {}
    for topic in topics:
        path = os.path.join(ranked_dir, f"{topic.topic_id}.tsv")
        pmids = _read_ranked_pmids(path) if os.path.exists(path) else []
        if ctx.obj["top_k"]:
            pmids = pmids[:ctx.obj["top_k"]]
        per_topic[topic.topic_id] = confusion(pmids, set(topic.gold_pmids))
        if ctx.obj["gold_k"]:
            gold_k_counts[topic.topic_id] = confusion(
                pmids[:ctx.obj["gold_k"]], set(topic.gold_pmids)
            )
    report = pipeline.metric_report(per_topic, gold_k_counts or None)
    _emit(ctx, _report_tsv(report), json.dumps(report, indent=2))


def _report_tsv(report: dict) -> str:
    lines = ["topic\tprecision\trecall\tf_score"]
    for topic_id, entry in report["topics"].items():
        lines.append(
            f"{topic_id}\t{entry['precision']}\t{entry['recall']}"
            f"\t{entry['f_score']}"
        )
    for key in ("overall_micro", "overall_macro"):
        entry = report[key]
        lines.append(
            f"{key}\t{entry['precision']}\t{entry['recall']}"
            f"\t{entry['f_score']}"
        )
    return "\n".join(lines) + "\n"


@main.command("pipeline")
@click.argument("gold_tsv", type=click.Path(exists=True))
@click.option("--out-dir", type=click.Path(), default=None,
              help="Write per-topic ranked TSVs here.")
@click.pass_context
@_handle_errors
def pipeline_cmd(ctx, gold_tsv, out_dir):
    """Run query, fetch, screen and rank for every topic, then score."""
    import os

    res = _resources(ctx)
    per_topic = {}
    gold_k_counts = {}
    for topic in corpus.load_gold_standard(gold_tsv):
        run = pipeline.run_topic(topic, res)
        ranked = run.ranked
        if ctx.obj["top_k"]:
            ranked = ranked[:ctx.obj["top_k"]]
        if out_dir:
            os.makedirs(out_dir, exist_ok=True)
            path = os.path.join(out_dir, f"{topic.topic_id}.tsv")
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(pipeline.ranked_tsv(ranked))
        pmids = [r.pmid for r in ranked]
        from citescreen.evaluate import confusion

        per_topic[topic.topic_id] = confusion(pmids, set(topic.gold_pmids))
        if ctx.obj["gold_k"]:
            gold_k_counts[topic.topic_id] = confusion(
                pmids[:ctx.obj["gold_k"]], set(topic.gold_pmids)
            )
    report = pipeline.metric_report(per_topic, gold_k_counts or None)
    _emit(ctx, _report_tsv(report), json.dumps(report, indent=2))


if __name__ == "__main__":
    main()
