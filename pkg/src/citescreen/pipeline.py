"""End-to-end orchestration: resources, per-topic runs, and reports."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from citescreen import corpus, preprocess
from citescreen.corpus import (
    Citation,
    ClinicalTopic,
    ConceptLexicon,
    DrugDictionary,
    HyponymTable,
)
from citescreen.errors import ConfigError
from citescreen.extract import ConceptSet, build_concept_set
from citescreen.evaluate import ConfusionCounts, confusion, precision_at_k, prf
from citescreen.rank import RankedResult, WeightConfig, rank_citations
from citescreen.retrieve import EndpointConfig, build_query, fetch_citations
from citescreen.screen import (
    QUALIFIER_WHITELIST,
    CitationConcepts,
    ScreeningDecision,
    screen_citation,
)


@dataclass
class Resources:
    """Dictionaries, weights and endpoint settings shared by all stages."""

    lexicon: ConceptLexicon
    drugs: DrugDictionary
    hyponyms: HyponymTable
    synonyms: dict[str, str]
    journal_whitelist: list[str]
    weights: WeightConfig = WeightConfig()
    endpoint: EndpointConfig = field(default_factory=EndpointConfig)
    min_year: int = 1974
    qualifier_whitelist: frozenset[str] = QUALIFIER_WHITELIST

    @classmethod
    def bundled(cls, **overrides) -> "Resources":
        return cls(
            lexicon=corpus.default_lexicon(),
            drugs=corpus.default_drug_dictionary(),
            hyponyms=corpus.default_hyponym_table(),
            synonyms=corpus.default_synonym_table(),
            journal_whitelist=corpus.default_journal_whitelist(),
            **overrides,
        )


def load_config(path: str) -> Resources:
    """Build Resources from a JSON config file; absent keys use bundles."""
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc

    paths = raw.get("paths", {})
    res = Resources(
        lexicon=(
            corpus.load_lexicon(paths["lexicon"]) if "lexicon" in paths
            else corpus.default_lexicon()
        ),
        drugs=(
            corpus.load_drug_dictionary(paths["drug_hierarchy"])
            if "drug_hierarchy" in paths else corpus.default_drug_dictionary()
        ),
        hyponyms=(
            corpus.load_hyponym_table(paths["hyponyms"])
            if "hyponyms" in paths else corpus.default_hyponym_table()
        ),
        synonyms=(
            corpus.load_synonym_table(paths["synonyms"])
            if "synonyms" in paths else corpus.default_synonym_table()
        ),
        journal_whitelist=(
            [l.strip() for l in open(paths["journals"], encoding="utf-8")
             if l.strip()] if "journals" in paths
            else corpus.default_journal_whitelist()
        ),
    )
    if "weights" in raw:
        w = raw["weights"]
        res.weights = WeightConfig(w["w1"], w["w2"], w["w3"])
    if "endpoint" in raw:
        res.endpoint = EndpointConfig(**raw["endpoint"])
    if "fixture_dir" in raw:
        res.endpoint.fixture_dir = raw["fixture_dir"]
    if "min_year" in raw:
        res.min_year = int(raw["min_year"])
    if "qualifier_whitelist" in raw:
        res.qualifier_whitelist = frozenset(
            q.lower() for q in raw["qualifier_whitelist"]
        )
    return res


def preprocess_citation(citation: Citation) -> list[str]:
    """Abbreviation-expanded abstract sentences."""
    expanded, _ = preprocess.expand_abbreviations(list(citation.abstract))
    return expanded


def citation_concepts(citation: Citation, res: Resources) -> CitationConcepts:
    sentences = preprocess_citation(citation)
    return CitationConcepts(
        title=build_concept_set(
            [citation.title] if citation.title else [],
            res.lexicon, res.drugs, res.synonyms,
        ),
        sentences=[
            build_concept_set([s], res.lexicon, res.drugs, res.synonyms)
            for s in sentences
        ],
    )


def topic_concepts(topic: ClinicalTopic, res: Resources) -> ConceptSet:
    return build_concept_set([topic.title], res.lexicon, res.drugs, res.synonyms)


@dataclass
class TopicRun:
    topic: ClinicalTopic
    query_concepts: ConceptSet
    query_string: str
    fetched_pmids: list[int]
    decisions: list[ScreeningDecision]
    ranked: list[RankedResult]

    def counts(self) -> ConfusionCounts:
        return confusion([r.pmid for r in self.ranked], set(self.topic.gold_pmids))

    def gold_k_counts(self) -> ConfusionCounts:
        k = len(self.topic.gold_pmids)
        if k == 0:
            return ConfusionCounts()
        return precision_at_k(self.ranked, set(self.topic.gold_pmids), k)


def run_topic(topic: ClinicalTopic, res: Resources) -> TopicRun:
    """The full per-topic pipeline: query, fetch, screen, rank."""
    query_concepts = topic_concepts(topic, res)
    _, query_string = build_query(
        topic, query_concepts, res.hyponyms, res.journal_whitelist,
        min_year=res.min_year,
    )
    result = fetch_citations(query_string, res.endpoint)

    decisions: list[ScreeningDecision] = []
    per_citation: dict[int, ConceptSet] = {}
    for citation in result.citations:
        concepts = citation_concepts(citation, res)
        decision = screen_citation(
            query_concepts, citation, concepts, res.drugs,
            res.qualifier_whitelist,
        )
        decisions.append(decision)
        if decision.accepted:
            merged = ConceptSet()
            for cs in [concepts.title, *concepts.sentences]:
                merged.population.extend(cs.population)
                merged.intervention.extend(cs.intervention)
                merged.disease.extend(cs.disease)
            per_citation[citation.pmid] = merged

    ranked = rank_citations(
        sorted(per_citation), query_concepts, per_citation, res.weights
    )
    return TopicRun(
        topic=topic,
        query_concepts=query_concepts,
        query_string=query_string,
        fetched_pmids=result.pmids,
        decisions=decisions,
        ranked=ranked,
    )


def ranked_tsv(ranked: list[RankedResult]) -> str:
    lines = ["rank\tpmid\tpop_sim\tint_sim\tdis_sim\tvsm_score"]
    for i, r in enumerate(ranked, start=1):
        lines.append(
            f"{i}\t{r.pmid}\t{r.pop_sim:.6f}\t{r.int_sim:.6f}"
            f"\t{r.dis_sim:.6f}\t{r.vsm_score:.6f}"
        )
    return "\n".join(lines) + "\n"


def ranked_json(ranked: list[RankedResult]) -> str:
    return json.dumps(
        [
            {
                "rank": i,
                "pmid": r.pmid,
                "pop_sim": round(r.pop_sim, 6),
                "int_sim": round(r.int_sim, 6),
                "dis_sim": round(r.dis_sim, 6),
                "vsm_score": round(r.vsm_score, 6),
            }
            for i, r in enumerate(ranked, start=1)
        ],
        indent=2,
    )


def metric_report(
    per_topic: dict[str, ConfusionCounts],
    gold_k: dict[str, ConfusionCounts] | None = None,
) -> dict:
    from citescreen.evaluate import aggregate_topics, macro_average

    topics = {}
    for topic_id, counts in sorted(per_topic.items()):
        p, r, f = prf(counts)
        entry = {
            "tp": counts.tp, "fp": counts.fp, "fn": counts.fn,
            "precision": round(100 * p, 1),
            "recall": round(100 * r, 1),
            "f_score": round(100 * f, 1),
        }
        if gold_k and topic_id in gold_k:
            gp, gr, gf = prf(gold_k[topic_id])
            entry["gold_k"] = {
                "precision": round(100 * gp, 1),
                "recall": round(100 * gr, 1),
                "f_score": round(100 * gf, 1),
            }
        topics[topic_id] = entry
    micro = prf(sum(per_topic.values(), ConfusionCounts()))
    macro = macro_average(list(per_topic.values()))
    report = {
        "topics": topics,
        "overall_micro": {
            "precision": round(100 * micro[0], 1),
            "recall": round(100 * micro[1], 1),
            "f_score": round(100 * micro[2], 1),
        },
        "overall_macro": {
            "precision": round(100 * macro[0], 1),
            "recall": round(100 * macro[1], 1),
            "f_score": round(100 * macro[2], 1),
        },
    }
    if gold_k:
        gk = prf(sum(gold_k.values(), ConfusionCounts()))
        report["overall_gold_k_micro"] = {
            "precision": round(100 * gk[0], 1),
            "recall": round(100 * gk[1], 1),
            "f_score": round(100 * gk[2], 1),
        }
    return report
