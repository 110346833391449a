"""Concept extraction.

Population is pulled out of constituency trees with seven ordered
structural patterns; intervention-or-comparison and disease come from
dictionary matching over normalized tokens; drug mentions are mapped
onto the class hierarchy with a cascade of normalization rules.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from citescreen import preprocess
from citescreen.corpus import ConceptLexicon, DrugDictionary, default_synonym_table
from citescreen.tree import PhraseTree, parse_phrase_tree


@dataclass(frozen=True)
class ConceptMention:
    surface: str
    canonical_id: str
    group: str
    span: tuple[int, int]        # token range within the sentence
    normal_form: str
    sentence_index: int = 0


@dataclass
class ConceptSet:
    """Three bags of normalized concepts (interventions and comparisons pooled)."""

    population: list[str] = field(default_factory=list)
    intervention: list[str] = field(default_factory=list)
    disease: list[str] = field(default_factory=list)

    def is_empty(self) -> bool:
        return not (self.population or self.intervention or self.disease)

    def bag(self, category: str) -> list[str]:
        return getattr(self, category)


# ---------------------------------------------------------------------------
# Population patterns
# ---------------------------------------------------------------------------

def _population_positions(phrase_tokens: list[str], lexicon: ConceptLexicon):
    """Start token positions of population lexicon terms within the phrase."""
    norm_words: list[tuple[str, int]] = []  # (normalized word, source index)
    for i, tok in enumerate(phrase_tokens):
        for w in preprocess.normalize_token(tok).split():
            norm_words.append((w, i))
    population_terms = {
        e.surface: e for e in lexicon.entries if e.group == "population"
    }
    hits = []
    words = [w for w, _ in norm_words]
    for surface, entry in population_terms.items():
        parts = surface.split()
        for j in range(len(words) - len(parts) + 1):
            if words[j:j + len(parts)] == parts:
                hits.append((norm_words[j][1], entry))
    return hits


def _pattern_matches(node: PhraseTree, pattern: int) -> bool:
    if pattern == 1:
        return node.label == "NP" and node.dominates("NN")
    if pattern == 2:
        return node.label == "NP" and node.dominates("VP")
    if pattern == 3:
        return node.label == "NP" and node.dominates("SBAR")
    if pattern == 4:
        return node.label == "NP" and node.dominates("PP")
    if pattern == 5:
        return node.label == "NP"
    if pattern == 6:
        return node.label == "VP" and node.dominates("NP")
    if pattern == 7:
        if node.label != "VP":
            return False
        has_pp_sbar = any(
            n.label == "PP" and n.dominates("SBAR") for n in node.children
        )
        return has_pp_sbar and node.dominates("NP")
    raise ValueError(pattern)


def extract_population(
    tree: PhraseTree, sentence: str, lexicon: ConceptLexicon,
    sentence_index: int = 0,
) -> list[ConceptMention]:
    """Apply the seven structural patterns in order.

    Patterns 1-4 accept a noun phrase only when a population term starts
    within its first two tokens; patterns 5-7 accept a phrase containing
    a population term anywhere.  The full matched phrase is emitted.
    Duplicate spans keep the lowest-numbered pattern.
    """
    tokens = sentence.split()
    mentions: dict[tuple[int, int], ConceptMention] = {}
    for pattern in range(1, 8):
        for node in tree.iter_nodes():
            if not _pattern_matches(node, pattern):
                continue
            if node.span in mentions:
                continue
            phrase_tokens = tokens[node.span[0]:node.span[1]]
            hits = _population_positions(phrase_tokens, lexicon)
            if pattern <= 4:
                hits = [h for h in hits if h[0] <= 1]
            if not hits:
                continue
            entry = min(hits, key=lambda h: h[0])[1]
            surface = " ".join(phrase_tokens)
            mentions[node.span] = ConceptMention(
                surface=surface,
                canonical_id=entry.canonical_id,
                group="population",
                span=node.span,
                normal_form=preprocess.normalize_token(surface),
                sentence_index=sentence_index,
            )
    return sorted(mentions.values(), key=lambda m: m.span)


# ---------------------------------------------------------------------------
# Dictionary matching (multi-pattern, longest match first)
# ---------------------------------------------------------------------------

class _TokenTrie:
    """Word-level trie over lexicon surface forms."""

    def __init__(self, lexicon: ConceptLexicon):
        self.root: dict = {}
        for entry in lexicon.entries:
            node = self.root
            for word in entry.surface.split():
                node = node.setdefault(word, {})
            node.setdefault(None, []).append(entry)

    def longest_match(self, words: list[str], start: int):
        """Longest entry list starting at ``start``, with its word length."""
        node = self.root
        best = None
        i = start
        while i < len(words) and words[i] in node:
            node = node[words[i]]
            i += 1
            if None in node:
                best = (i - start, node[None])
        return best


_TRIE_CACHE: dict[int, _TokenTrie] = {}


def _trie_for(lexicon: ConceptLexicon) -> _TokenTrie:
    key = id(lexicon)
    if key not in _TRIE_CACHE:
        _TRIE_CACHE.clear()
        _TRIE_CACHE[key] = _TokenTrie(lexicon)
    return _TRIE_CACHE[key]


def extract_concepts(
    sentences: list[str], lexicon: ConceptLexicon
) -> list[ConceptMention]:
    """Dictionary mentions over normalized tokens; longest match wins."""
    trie = _trie_for(lexicon)
    mentions: list[ConceptMention] = []
    for s_idx, sentence in enumerate(sentences):
        tokens = sentence.split()
        words: list[str] = []
        word_src: list[int] = []
        for t_idx, tok in enumerate(tokens):
            for w in preprocess.normalize_token(tok).split():
                words.append(w)
                word_src.append(t_idx)
        i = 0
        while i < len(words):
            match = trie.longest_match(words, i)
            if match is None:
                i += 1
                continue
            length, entries = match
            start_tok = word_src[i]
            end_tok = word_src[i + length - 1] + 1
            surface = " ".join(tokens[start_tok:end_tok])
            normal = " ".join(words[i:i + length])
            for entry in entries:
                mentions.append(
                    ConceptMention(
                        surface=surface,
                        canonical_id=entry.canonical_id,
                        group=entry.group,
                        span=(start_tok, end_tok),
                        normal_form=normal,
                        sentence_index=s_idx,
                    )
                )
            i += length
    return mentions


# ---------------------------------------------------------------------------
# Drug normalization
# ---------------------------------------------------------------------------

_NUMERALS = {"i", "ii", "iii", "iv", "v", "1", "2", "3", "4", "5"}
_ARABIC_TO_ROMAN = {"1": "i", "2": "ii", "3": "iii", "4": "iv", "5": "v"}


def _strip_numerals(norm: str) -> str:
    return " ".join(w for w in norm.split() if w not in _NUMERALS)


def _lookup(norm: str, drugs: DrugDictionary) -> str | None:
    return drugs.canonical_name(norm)


def _normalize_single(
    mention: str, drugs: DrugDictionary, synonyms: dict[str, str]
) -> str | None:
    """Rules 1, 2, 4, 5 and 6 of the mapping cascade; None if no rule hits."""
    norm = preprocess.normalize_token(mention)
    if not norm:
        return None
    # Rule 1: case normalization (the dictionary lookup is case-insensitive).
    hit = _lookup(norm, drugs)
    if hit:
        return hit
    # Rule 2: Arabic/Roman numeral variants.
    arabic_mapped = " ".join(_ARABIC_TO_ROMAN.get(w, w) for w in norm.split())
    hit = _lookup(arabic_mapped, drugs)
    if hit:
        return hit
    stripped = _strip_numerals(norm)
    for name_norm in (stripped,):
        for candidate in drugs.names():
            if _strip_numerals(preprocess.normalize_token(candidate)) == name_norm:
                return candidate
    # Rule 4: removal of contents inside parenthesis.
    without_parens = re.sub(r"\([^)]*\)", " ", mention)
    if without_parens != mention:
        norm2 = preprocess.normalize_token(without_parens)
        hit = _lookup(norm2, drugs)
        if hit:
            return hit
    # Rule 5: equivalent class names.
    canonical = synonyms.get(norm)
    if canonical is None and without_parens != mention:
        canonical = synonyms.get(preprocess.normalize_token(without_parens))
    if canonical is not None:
        hit = _lookup(preprocess.normalize_token(canonical), drugs)
        if hit:
            return hit
    # Rule 6: singular to plural for class names.
    for suffix in ("s", "es"):
        hit = _lookup(norm + suffix, drugs)
        if hit:
            return hit
    return None


def normalize_drug_components(
    mention: str,
    drugs: DrugDictionary,
    synonyms: dict[str, str] | None = None,
) -> list[str]:
    """Resolved dictionary names for a (possibly multi-drug) mention.

    Returns the input unchanged (as a single component) when no rule
    produces a dictionary match.
    """
    if synonyms is None:
        synonyms = default_synonym_table()
    single = _normalize_single(mention, drugs, synonyms)
    if single is not None:
        return [single]
    # Rule 3: interventions separated by slash, hyphen etc.
    parts = [p.strip() for p in re.split(r"[/;]|\s-\s|-", mention) if p.strip()]
    if len(parts) > 1:
        resolved = [_normalize_single(p, drugs, synonyms) for p in parts]
        if any(r is not None for r in resolved):
            return [r if r is not None else p for r, p in zip(resolved, parts)]
    return [mention]


def normalize_drug(
    mention: str,
    drugs: DrugDictionary,
    synonyms: dict[str, str] | None = None,
) -> str:
    """Dictionary-mapped form of a drug mention via the rule cascade.

    Multi-drug mentions come back comma-separated; an unmatched mention
    is returned unchanged.
    """
    return ", ".join(normalize_drug_components(mention, drugs, synonyms))


def drug_hierarchy(normal_form: str, drugs: DrugDictionary) -> list[str]:
    """Name plus class ancestors leaf-to-root; [] when unrecognized."""
    return drugs.hierarchy(normal_form)


# ---------------------------------------------------------------------------
# Concept-set construction
# ---------------------------------------------------------------------------

def build_concept_set(
    text_units: list[str],
    lexicon: ConceptLexicon,
    drugs: DrugDictionary,
    synonyms: dict[str, str] | None = None,
) -> ConceptSet:
    """Population, intervention-or-comparison and disease bags for a text.

    Chemicals are drug-normalized and expanded with their class
    hierarchy; procedures and devices pool into the intervention bag.
    """
    cs = ConceptSet()
    for s_idx, sentence in enumerate(text_units):
        tree = parse_phrase_tree(sentence)
        for m in extract_population(tree, sentence, lexicon, s_idx):
            cs.population.append(m.normal_form)
    for m in extract_concepts(text_units, lexicon):
        if m.group == "disorder":
            cs.disease.append(m.normal_form)
        elif m.group == "chemical":
            for name in normalize_drug_components(m.normal_form, drugs, synonyms):
                chain = drug_hierarchy(name, drugs)
                if chain:
                    cs.intervention.extend(
                        preprocess.normalize_token(n) for n in chain
                    )
                else:
                    cs.intervention.append(preprocess.normalize_token(name))
        elif m.group in ("procedure", "device"):
            cs.intervention.append(m.normal_form)
    return cs
