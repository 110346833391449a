"""Boolean query construction and citation fetching.

Queries are rendered as Boolean strings over MeSH-tagged concept terms,
journal names, a publication-year floor, and allowed publication types.
Fetching runs either against an E-Utilities-compatible HTTP endpoint or
hermetically against a local XML fixture directory, where the same
Boolean string is evaluated citation by citation.
"""

from __future__ import annotations

import glob
import logging
import os
import re
import time
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field

from citescreen import preprocess
from citescreen.corpus import (
    Citation,
    ClinicalTopic,
    HyponymTable,
    parse_citation_xml,
)
from citescreen.errors import (
    ConfigError,
    QueryBuildError,
    QueryParseError,
    StatusError,
    TransportError,
)
from citescreen.extract import ConceptSet

log = logging.getLogger(__name__)

#: The eleven publication-type categories retained by the query.
PUBLICATION_TYPES = (
    "systematic review",
    "randomized controlled trial",
    "multiple time series",
    "nonrandomized trial",
    "cohort",
    "case-control",
    "time series",
    "cross-sectional",
    "case studies",
    "practice guideline",
    "editorial",
)

#: Phrases scanned for in title/abstract when no index carries the type.
_TYPE_PHRASES = (
    ("randomized controlled trial", "randomized controlled trial"),
    ("systematic review", "systematic review"),
    ("multiple time series", "multiple time series"),
    ("nonrandomized trial", "nonrandomized trial"),
    ("time series", "time series"),
    ("cohort", "cohort"),
    ("case-control", "case control"),
    ("cross-sectional", "cross sectional"),
    ("practice guideline", "practice guideline"),
    ("editorial", "editorial"),
    ("case studies", "case studies"),
    ("case studies", "case study"),
)


@dataclass
class QuerySpec:
    mesh_disease_terms: list[str] = field(default_factory=list)
    mesh_intervention_terms: list[str] = field(default_factory=list)
    hyponym_terms: list[str] = field(default_factory=list)
    journal_whitelist: list[str] = field(default_factory=list)
    min_year: int = 1974
    allowed_pub_types: list[str] = field(
        default_factory=lambda: list(PUBLICATION_TYPES)
    )

    def __post_init__(self):
        if self.min_year < 1900:
            raise QueryBuildError("min_year must be >= 1900")
        if not self.allowed_pub_types:
            raise QueryBuildError("allowed_pub_types must be non-empty")


@dataclass
class FetchResult:
    pmids: list[int]
    citations: list[Citation]
    source: str  # "live" or "fixture"


def _dedupe(terms) -> list[str]:
    seen = []
    for t in terms:
        norm = preprocess.normalize_token(t)
        if norm and norm not in seen:
            seen.append(norm)
    return seen


def build_query(
    topic: ClinicalTopic,
    concepts: ConceptSet,
    hyponyms: HyponymTable,
    journal_whitelist: list[str],
    min_year: int = 1974,
    allowed_pub_types: list[str] | None = None,
) -> tuple[QuerySpec, str]:
    """Build the Boolean query for a topic from its extracted concepts.

    Disease terms are expanded with hyponyms; an empty intervention bag
    drops that conjunct.  A query with neither diseases nor
    interventions would be unbounded and is an error.
    """
    diseases = _dedupe(concepts.disease)
    interventions = _dedupe(concepts.intervention)
    if not diseases and not interventions:
        raise QueryBuildError(
            f"topic {topic.topic_id!r}: no disease or intervention concepts"
        )
    hyponym_terms = []
    for d in diseases:
        for h in hyponyms.hyponyms(d):
            if h not in diseases and h not in hyponym_terms:
                hyponym_terms.append(h)
    spec = QuerySpec(
        mesh_disease_terms=diseases,
        mesh_intervention_terms=interventions,
        hyponym_terms=hyponym_terms,
        journal_whitelist=list(journal_whitelist),
        min_year=min_year,
        allowed_pub_types=(
            list(allowed_pub_types) if allowed_pub_types else list(PUBLICATION_TYPES)
        ),
    )
    return spec, render_query(spec)


def render_query(spec: QuerySpec) -> str:
    def group(terms, tag):
        return "(" + " OR ".join(f'"{t}"[{tag}]' for t in terms) + ")"

    conjuncts = []
    disease_terms = spec.mesh_disease_terms + spec.hyponym_terms
    if disease_terms:
        conjuncts.append(group(disease_terms, "MeSH"))
    if spec.mesh_intervention_terms:
        conjuncts.append(group(spec.mesh_intervention_terms, "MeSH"))
    if spec.journal_whitelist:
        conjuncts.append(group(spec.journal_whitelist, "Journal"))
    conjuncts.append(f"{spec.min_year}:[Year]")
    conjuncts.append(group(spec.allowed_pub_types, "PubType"))
    return " AND ".join(conjuncts)


# ---------------------------------------------------------------------------
# Boolean query parsing and fixture evaluation
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r'\s*(\(|\)|AND\b|OR\b|"[^"]*"\[\w+\]|\d{4}:\[Year\])'
)
_TERM_RE = re.compile(r'"([^"]*)"\[(\w+)\]')
_YEAR_RE = re.compile(r"(\d{4}):\[Year\]")


class _Node:
    pass


@dataclass
class _Term(_Node):
    value: str
    fieldname: str


@dataclass
class _Bool(_Node):
    op: str
    operands: list


def parse_query(query: str) -> _Node:
    """Parse a rendered Boolean string back into an expression tree."""
    tokens = []
    pos = 0
    while pos < len(query):
        m = _TOKEN_RE.match(query, pos)
        if m is None:
            if query[pos:].strip():
                raise QueryParseError(f"unparseable query near: {query[pos:pos+40]!r}")
            break
        tokens.append(m.group(1))
        pos = m.end()
    if not tokens:
        raise QueryParseError("empty query")

    idx = 0

    def peek():
        return tokens[idx] if idx < len(tokens) else None

    def parse_atom() -> _Node:
        nonlocal idx
        tok = peek()
        if tok == "(":
            idx += 1
            node = parse_or()
            if peek() != ")":
                raise QueryParseError("missing closing parenthesis")
            idx += 1
            return node
        if tok is None or tok in (")", "AND", "OR"):
            raise QueryParseError(f"unexpected token {tok!r}")
        idx += 1
        ym = _YEAR_RE.fullmatch(tok)
        if ym:
            return _Term(ym.group(1), "Year")
        tm = _TERM_RE.fullmatch(tok)
        if tm:
            return _Term(tm.group(1), tm.group(2))
        raise QueryParseError(f"bad term {tok!r}")

    def parse_and() -> _Node:
        nonlocal idx
        operands = [parse_atom()]
        while peek() == "AND":
            idx += 1
            operands.append(parse_atom())
        return operands[0] if len(operands) == 1 else _Bool("AND", operands)

    def parse_or() -> _Node:
        nonlocal idx
        operands = [parse_and()]
        while peek() == "OR":
            idx += 1
            operands.append(parse_and())
        return operands[0] if len(operands) == 1 else _Bool("OR", operands)

    root = parse_or()
    if idx != len(tokens):
        raise QueryParseError("trailing tokens in query")
    return root


def _norm_contains(haystack: str, needle: str) -> bool:
    hay = preprocess.normalize_token(haystack)
    return f" {needle} " in f" {hay} "


def _eval_term(term: _Term, citation: Citation) -> bool:
    value = preprocess.normalize_token(term.value)
    fieldname = term.fieldname.lower()
    if fieldname == "mesh":
        if any(
            preprocess.normalize_token(m.descriptor) == value
            for m in citation.mesh_terms
        ):
            return True
        return _norm_contains(citation.title, value)
    if fieldname == "journal":
        return preprocess.normalize_token(citation.journal) == value
    if fieldname == "year":
        return citation.year >= int(term.value)
    if fieldname == "pubtype":
        return value in (
            preprocess.normalize_token(t) for t in infer_publication_type(citation)
        )
    raise QueryParseError(f"unknown field {term.fieldname!r}")


def evaluate_query(node: _Node, citation: Citation) -> bool:
    if isinstance(node, _Term):
        return _eval_term(node, citation)
    if node.op == "AND":
        return all(evaluate_query(o, citation) for o in node.operands)
    return any(evaluate_query(o, citation) for o in node.operands)


def infer_publication_type(citation: Citation) -> list[str]:
    """Publication-type labels, inferred tier by tier.

    Tier 1 is the publication-type index, tier 2 the MeSH descriptors,
    tier 3 a phrase scan over title then abstract.  An empty result
    marks the citation excludable (likely non-clinical or not
    peer-reviewed).
    """
    whitelist = {preprocess.normalize_token(t): t for t in PUBLICATION_TYPES}

    def from_labels(labels):
        found = []
        for label in labels:
            norm = preprocess.normalize_token(label)
            if norm in whitelist and whitelist[norm] not in found:
                found.append(whitelist[norm])
        return found

    hits = from_labels(citation.publication_types)
    if hits:
        return hits
    hits = from_labels(m.descriptor for m in citation.mesh_terms)
    if hits:
        return hits
    for text in (citation.title, " ".join(citation.abstract)):
        norm_text = f" {preprocess.normalize_token(text)} "
        found = []
        for canonical, phrase in _TYPE_PHRASES:
            if f" {phrase} " in norm_text and canonical not in found:
                found.append(canonical)
                # consume the span so shorter phrases cannot re-match it
                norm_text = norm_text.replace(f" {phrase} ", " * ")
        if found:
            return found
    return []


# ---------------------------------------------------------------------------
# Fetching
# ---------------------------------------------------------------------------

@dataclass
class EndpointConfig:
    endpoint_base_url: str | None = None
    fixture_dir: str | None = None
    rate_limit_ms: int = 350
    max_retries: int = 3
    page_size: int = 100
    api_key: str | None = None
    timeout_s: float = 30.0


class _RateLimiter:
    def __init__(self, interval_ms: int):
        self.interval = interval_ms / 1000.0
        self._last = 0.0

    def wait(self):
        now = time.monotonic()
        delta = now - self._last
        if delta < self.interval:
            time.sleep(self.interval - delta)
        self._last = time.monotonic()


def _request_with_retries(url: str, params: dict, config: EndpointConfig,
                          limiter: _RateLimiter) -> str:
    import requests

    last_exc: Exception | None = None
    for attempt in range(config.max_retries + 1):
        limiter.wait()
        try:
            resp = requests.get(url, params=params, timeout=config.timeout_s)
        except requests.RequestException as exc:
            last_exc = exc
            log.warning("request failed (attempt %d): %s", attempt + 1, exc)
            continue
        if resp.status_code >= 500:
            last_exc = StatusError(resp.status_code, resp.text)
            log.warning("server error %d (attempt %d)", resp.status_code, attempt + 1)
            continue
        if resp.status_code != 200:
            raise StatusError(resp.status_code, resp.text)
        return resp.text
    if isinstance(last_exc, StatusError):
        raise last_exc
    raise TransportError(f"request failed after retries: {last_exc}")


def _fetch_live(query: str, config: EndpointConfig) -> FetchResult:
    base = (config.endpoint_base_url or "").rstrip("/")
    if not base.startswith(("http://", "https://")):
        raise ConfigError(f"malformed endpoint URL: {config.endpoint_base_url!r}")
    limiter = _RateLimiter(config.rate_limit_ms)
    common = {"db": "pubmed"}
    if config.api_key:
        common["api_key"] = config.api_key

    ids: list[int] = []
    retstart = 0
    while True:
        text = _request_with_retries(
            f"{base}/esearch.fcgi",
            {**common, "term": query, "retmax": config.page_size,
             "retstart": retstart},
            config, limiter,
        )
        try:
            root = ET.fromstring(text)
        except ET.ParseError as exc:
            raise TransportError(f"unparseable search response: {exc}") from exc
        count = int(root.findtext("Count", "0"))
        page = [int(e.text) for e in root.findall(".//Id") if e.text]
        ids.extend(page)
        retstart += config.page_size
        if retstart >= count or not page:
            break

    if not ids:
        return FetchResult([], [], source="live")

    citations: list[Citation] = []
    for start in range(0, len(ids), config.page_size):
        chunk = ids[start:start + config.page_size]
        text = _request_with_retries(
            f"{base}/efetch.fcgi",
            {**common, "id": ",".join(map(str, chunk)), "retmode": "xml"},
            config, limiter,
        )
        citations.extend(parse_citation_xml(text))
    by_pmid = {c.pmid: c for c in citations}
    present = [p for p in ids if p in by_pmid]
    return FetchResult(present, [by_pmid[p] for p in present], source="live")


def load_fixture_corpus(fixture_dir: str) -> list[Citation]:
    if not os.path.isdir(fixture_dir):
        raise ConfigError(f"fixture directory not found: {fixture_dir}")
    citations: list[Citation] = []
    for path in sorted(glob.glob(os.path.join(fixture_dir, "*.xml"))):
        with open(path, encoding="utf-8") as fh:
            citations.extend(parse_citation_xml(fh.read()))
    return citations


def _fetch_fixture(query: str, config: EndpointConfig) -> FetchResult:
    corpus = load_fixture_corpus(config.fixture_dir)
    tree = parse_query(query)
    matched = sorted(
        (c for c in corpus if evaluate_query(tree, c)), key=lambda c: c.pmid
    )
    return FetchResult([c.pmid for c in matched], matched, source="fixture")


def fetch_citations(query: str, config: EndpointConfig) -> FetchResult:
    """Run the query live or against the local fixture corpus."""
    if config.fixture_dir:
        return _fetch_fixture(query, config)
    return _fetch_live(query, config)
