"""Data model for citations, topics, and dictionary resources.

Loaders accept the documented file formats (a MEDLINE XML subset,
TSV lexicons, a tab-indented drug hierarchy) and produce immutable
objects that are safe to share across pipeline workers.
"""

from __future__ import annotations

import json
import logging
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from importlib import resources

from citescreen import preprocess
from citescreen.errors import FormatError

log = logging.getLogger(__name__)

SEMANTIC_GROUPS = frozenset(
    {"disorder", "chemical", "procedure", "device", "population"}
)


@dataclass(frozen=True)
class MeshTerm:
    descriptor: str
    qualifier: str | None = None
    is_major_topic: bool = False

    def __post_init__(self):
        if not self.descriptor:
            raise ValueError("MeSH descriptor must be non-empty")


@dataclass(frozen=True)
class Citation:
    """One MEDLINE record; the abstract is stored as segmented sentences."""

    pmid: int
    title: str
    abstract: tuple[str, ...] = ()
    abstract_is_structured: bool = False
    section_labels: dict[int, str] | None = None
    mesh_terms: tuple[MeshTerm, ...] = ()
    publication_types: tuple[str, ...] = ()
    journal: str = ""
    year: int = 0

    def __post_init__(self):
        if self.pmid <= 0:
            raise ValueError("pmid must be a positive integer")
        if self.section_labels:
            bad = [i for i in self.section_labels if not 0 <= i < len(self.abstract)]
            if bad:
                raise ValueError(f"section label index out of range: {bad}")

    def to_dict(self) -> dict:
        return {
            "pmid": self.pmid,
            "title": self.title,
            "abstract": list(self.abstract),
            "abstract_is_structured": self.abstract_is_structured,
            "section_labels": (
                {str(k): v for k, v in self.section_labels.items()}
                if self.section_labels is not None
                else None
            ),
            "mesh_terms": [
                {
                    "descriptor": m.descriptor,
                    "qualifier": m.qualifier,
                    "is_major_topic": m.is_major_topic,
                }
                for m in self.mesh_terms
            ],
            "publication_types": list(self.publication_types),
            "journal": self.journal,
            "year": self.year,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Citation":
        return cls(
            pmid=int(d["pmid"]),
            title=d["title"],
            abstract=tuple(d.get("abstract", ())),
            abstract_is_structured=bool(d.get("abstract_is_structured", False)),
            section_labels=(
                {int(k): v for k, v in d["section_labels"].items()}
                if d.get("section_labels") is not None
                else None
            ),
            mesh_terms=tuple(
                MeshTerm(m["descriptor"], m.get("qualifier"), m.get("is_major_topic", False))
                for m in d.get("mesh_terms", ())
            ),
            publication_types=tuple(d.get("publication_types", ())),
            journal=d.get("journal", ""),
            year=int(d.get("year", 0)),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "Citation":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class ClinicalTopic:
    topic_id: str
    title: str
    gold_pmids: frozenset[int] = frozenset()


@dataclass(frozen=True)
class LexiconEntry:
    surface: str           # normalized at load time
    canonical_id: str
    group: str


class ConceptLexicon:
    """Surface-form lookup table over the five semantic groups."""

    def __init__(self, entries: list[LexiconEntry]):
        self.entries = list(entries)
        self._by_surface: dict[str, list[LexiconEntry]] = {}
        for e in self.entries:
            self._by_surface.setdefault(e.surface, []).append(e)
        self.max_tokens = max(
            (len(e.surface.split()) for e in self.entries), default=0
        )

    def lookup(self, surface: str) -> list[LexiconEntry]:
        return self._by_surface.get(preprocess.normalize_token(surface), [])

    def surfaces(self, group: str | None = None) -> list[str]:
        if group is None:
            return list(self._by_surface)
        return [e.surface for e in self.entries if e.group == group]

    def __len__(self) -> int:
        return len(self.entries)


class DrugDictionary:
    """Three-level hierarchy of drug classes with drugs under leaf classes.

    Level 1 is the broadest class, level 3 the most specific class, and
    drugs hang off level-3 classes.  ``hierarchy(name)`` walks from the
    given name up to the level-1 root.
    """

    DRUG_LEVEL = 4

    def __init__(self, parents: dict[str, str | None], levels: dict[str, int],
                 names: dict[str, str]):
        self._parents = parents   # normalized name -> normalized parent
        self._levels = levels     # normalized name -> 1..4 (4 = drug)
        self._names = names       # normalized name -> display name

    def __contains__(self, name: str) -> bool:
        return preprocess.normalize_token(name) in self._levels

    def level(self, name: str) -> int | None:
        return self._levels.get(preprocess.normalize_token(name))

    def canonical_name(self, name: str) -> str | None:
        return self._names.get(preprocess.normalize_token(name))

    def names(self, level: int | None = None) -> list[str]:
        return [
            self._names[k]
            for k, lv in self._levels.items()
            if level is None or lv == level
        ]

    def hierarchy(self, name: str) -> list[str]:
        """Name plus its class ancestors, leaf-to-root; [] if unknown."""
        key = preprocess.normalize_token(name)
        if key not in self._levels:
            return []
        chain = [self._names[key]]
        while self._parents.get(key) is not None:
            key = self._parents[key]
            chain.append(self._names[key])
        return chain

    def ancestors(self, name: str) -> list[str]:
        return self.hierarchy(name)[1:]

    def is_drug(self, name: str) -> bool:
        return self.level(name) == self.DRUG_LEVEL


class HyponymTable:
    """Disease term -> narrower or sibling disease terms."""

    def __init__(self, table: dict[str, list[str]]):
        self._table = {
            preprocess.normalize_token(k): [preprocess.normalize_token(v) for v in vs]
            for k, vs in table.items()
        }
        for term, hyps in self._table.items():
            if term in hyps:
                raise FormatError(f"term lists itself as its own hyponym: {term}")

    def hyponyms(self, term: str) -> list[str]:
        return list(self._table.get(preprocess.normalize_token(term), []))

    def items(self):
        return self._table.items()


# ---------------------------------------------------------------------------
# Parsers and loaders
# ---------------------------------------------------------------------------

def _text(el: ET.Element | None) -> str:
    return "".join(el.itertext()).strip() if el is not None else ""


def parse_citation_xml(xml_document: str) -> list[Citation]:
    """Parse the MEDLINE citation subset into Citation objects.

    Records missing a PMID are rejected with a warning; the remaining
    records are still returned.  Malformed XML raises FormatError.
    """
    try:
        root = ET.fromstring(xml_document)
    except ET.ParseError as exc:
        raise FormatError(f"malformed XML: {exc}") from exc

    if root.tag == "MedlineCitation":
        records = [root]
    else:
        records = list(root.iter("MedlineCitation"))

    citations: list[Citation] = []
    for idx, rec in enumerate(records):
        pmid_text = _text(rec.find("PMID")) or _text(rec.find(".//PMID"))
        if not pmid_text or not pmid_text.isdigit():
            log.warning("record %d rejected: missing or non-numeric PMID", idx)
            continue

        title = _text(rec.find(".//ArticleTitle"))

        sentences: list[str] = []
        section_labels: dict[int, str] = {}
        structured = False
        abstract_el = rec.find(".//Abstract")
        if abstract_el is not None:
            for block in abstract_el.findall("AbstractText"):
                label = block.get("Label")
                block_sents = preprocess.segment_sentences(_text(block))
                if label:
                    structured = True
                    for k in range(len(block_sents)):
                        section_labels[len(sentences) + k] = label
                sentences.extend(block_sents)

        mesh: list[MeshTerm] = []
        for heading in rec.findall(".//MeshHeading"):
            desc_el = heading.find("DescriptorName")
            descriptor = _text(desc_el)
            if not descriptor:
                continue
            qualifiers = heading.findall("QualifierName")
            if qualifiers:
                for q in qualifiers:
                    mesh.append(
                        MeshTerm(descriptor, _text(q), q.get("MajorTopicYN") == "Y")
                    )
            else:
                major = desc_el.get("MajorTopicYN") == "Y" if desc_el is not None else False
                mesh.append(MeshTerm(descriptor, None, major))

        pub_types = tuple(
            _text(pt) for pt in rec.findall(".//PublicationType") if _text(pt)
        )
        journal = _text(rec.find(".//Journal/Title"))
        year_text = _text(rec.find(".//PubDate/Year"))
        year = int(year_text) if year_text.isdigit() else 0

        citations.append(
            Citation(
                pmid=int(pmid_text),
                title=title,
                abstract=tuple(sentences),
                abstract_is_structured=structured,
                section_labels=section_labels if structured else None,
                mesh_terms=tuple(mesh),
                publication_types=pub_types,
                journal=journal,
                year=year,
            )
        )
    return citations


def _read_rows(path: str, n_cols: int):
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            yield lineno, line.split("\t", n_cols - 1)


def load_lexicon(path: str) -> ConceptLexicon:
    """Load a surface \\t canonical-id \\t group TSV lexicon."""
    seen: dict[tuple[str, str], LexiconEntry] = {}
    order: list[tuple[str, str]] = []
    for lineno, cols in _read_rows(path, 3):
        if len(cols) != 3:
            log.warning("lexicon line %d rejected: expected 3 columns", lineno)
            continue
        surface, canonical_id, group = (c.strip() for c in cols)
        group = group.lower()
        if group not in SEMANTIC_GROUPS:
            log.warning("lexicon line %d rejected: unknown group %r", lineno, group)
            continue
        norm = preprocess.normalize_token(surface)
        if not norm:
            log.warning("lexicon line %d rejected: empty surface form", lineno)
            continue
        key = (norm, group)
        if key in seen:
            log.warning("lexicon line %d: duplicate (%s, %s), last row wins",
                        lineno, norm, group)
        else:
            order.append(key)
        seen[key] = LexiconEntry(norm, canonical_id, group)
    return ConceptLexicon([seen[k] for k in order])


def load_drug_dictionary(path: str) -> DrugDictionary:
    """Load the tab-indented class/class/class/drug hierarchy.

    Indent 0-2 are the three class levels; indent 3 holds drugs.  Any
    deeper indentation or a skipped level is a load error naming the
    offending line.
    """
    parents: dict[str, str | None] = {}
    levels: dict[str, int] = {}
    names: dict[str, str] = {}
    stack: list[str] = []  # normalized names of open ancestors

    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            if not raw.strip() or raw.lstrip().startswith("#"):
                continue
            indent = len(raw) - len(raw.lstrip("\t"))
            name = raw.strip()
            if indent > 3:
                raise FormatError(
                    f"line {lineno}: indentation depth {indent + 1} exceeds the "
                    f"three class levels plus drugs"
                )
            if indent > len(stack):
                raise FormatError(f"line {lineno}: skipped a hierarchy level")
            norm = preprocess.normalize_token(name)
            if not norm:
                raise FormatError(f"line {lineno}: empty node name")
            level = indent + 1
            if norm in levels:
                raise FormatError(f"line {lineno}: duplicate name {name!r}")
            levels[norm] = level
            names[norm] = name
            parents[norm] = stack[indent - 1] if indent > 0 else None
            del stack[indent:]
            stack.append(norm)

    for norm, level in levels.items():
        if level == DrugDictionary.DRUG_LEVEL:
            chain = []
            key = norm
            while parents[key] is not None:
                key = parents[key]
                chain.append(key)
            if len(chain) != 3:
                raise FormatError(
                    f"drug {names[norm]!r} does not sit under exactly three "
                    f"class levels"
                )
    return DrugDictionary(parents, levels, names)


def load_gold_standard(path: str) -> list[ClinicalTopic]:
    """Load topic_id \\t title \\t comma-separated-PMIDs rows."""
    topics: list[ClinicalTopic] = []
    for lineno, cols in _read_rows(path, 3):
        if len(cols) < 2:
            log.warning("gold line %d rejected: expected >= 2 columns", lineno)
            continue
        topic_id, title = cols[0].strip(), cols[1].strip()
        pmid_field = cols[2].strip() if len(cols) > 2 else ""
        pmids: set[int] = set()
        bad = False
        for piece in filter(None, (p.strip() for p in pmid_field.split(","))):
            if not piece.isdigit():
                log.warning("gold line %d rejected: non-numeric PMID %r",
                            lineno, piece)
                bad = True
                break
            pmids.add(int(piece))
        if bad:
            continue
        topics.append(ClinicalTopic(topic_id, title, frozenset(pmids)))
    return topics


def load_hyponym_table(path: str) -> HyponymTable:
    """Load disease \\t comma-separated-hyponyms rows."""
    table: dict[str, list[str]] = {}
    for lineno, cols in _read_rows(path, 2):
        if len(cols) != 2:
            log.warning("hyponym line %d rejected: expected 2 columns", lineno)
            continue
        term = cols[0].strip()
        hyps = [h.strip() for h in cols[1].split(",") if h.strip()]
        table[term] = hyps
    return HyponymTable(table)


def load_synonym_table(path: str) -> dict[str, str]:
    """Load variant \\t canonical rows (equivalent drug-class names)."""
    table: dict[str, str] = {}
    for lineno, cols in _read_rows(path, 2):
        if len(cols) != 2:
            log.warning("synonym line %d rejected: expected 2 columns", lineno)
            continue
        table[preprocess.normalize_token(cols[0])] = cols[1].strip()
    return table


def _bundled(name: str) -> str:
    return str(resources.files("citescreen.data").joinpath(name))


def default_lexicon() -> ConceptLexicon:
    return load_lexicon(_bundled("lexicon.tsv"))


def default_drug_dictionary() -> DrugDictionary:
    return load_drug_dictionary(_bundled("drug_hierarchy.txt"))


def default_hyponym_table() -> HyponymTable:
    return load_hyponym_table(_bundled("hyponyms.tsv"))


def default_synonym_table() -> dict[str, str]:
    return load_synonym_table(_bundled("synonyms.tsv"))


def default_journal_whitelist() -> list[str]:
    with open(_bundled("journals.txt"), encoding="utf-8") as fh:
        return [line.strip() for line in fh if line.strip()]
