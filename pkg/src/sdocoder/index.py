"""Weighted full-text search over every textual attribute of the classification.

Matching rule: a class matches a query when at least one of its attributes
contains ALL query tokens; the class score is the sum of the weights of its
matching attributes. Zero-weight attributes still qualify a class as a match,
they just contribute nothing to the score.

Scores are computed with :func:`math.fsum`, which returns the correctly
rounded sum independent of addend order, so recomputing a score from the raw
attribute weights always reproduces it exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .analysis import fold, split_tokens, tokenize
from .errors import EmptyQuery
from .model import EntrySource, Glossary, KnowledgeBase, Section


class AttributeKind(str, Enum):
    MAIN_TITLE = "main_title"
    ADDITIONAL_TITLE = "additional_title"
    INCLUSION = "inclusion"
    EXCLUSION = "exclusion"
    NOTE = "note"
    ALPHABETICAL_MAIN = "alphabetical_main"
    ALPHABETICAL_INDENTED = "alphabetical_indented"
    NEOPLASM_MAIN = "neoplasm_main"
    NEOPLASM_INDENTED = "neoplasm_indented"
    GLOSSARY_PHYSICIANS = "glossary_physicians"
    GLOSSARY_RARE_DISEASES = "glossary_rare_diseases"
    GLOSSARY_EMERGENCY_SEI = "glossary_emergency_sei"
    GLOSSARY_MESH = "glossary_mesh"
    GLOSSARY_OTHER = "glossary_other"


# Per-attribute-kind weights. Any kind missing from a custom table scores 0.
DEFAULT_WEIGHTS: dict[AttributeKind, float] = {
    AttributeKind.MAIN_TITLE: 10.0,
    AttributeKind.ADDITIONAL_TITLE: 7.5,
    AttributeKind.INCLUSION: 2.5,
    AttributeKind.EXCLUSION: 0.0,
    AttributeKind.NOTE: 0.0,
    AttributeKind.ALPHABETICAL_MAIN: 2.5,
    AttributeKind.ALPHABETICAL_INDENTED: 0.1,
    AttributeKind.NEOPLASM_MAIN: 2.5,
    AttributeKind.NEOPLASM_INDENTED: 0.1,
    AttributeKind.GLOSSARY_PHYSICIANS: 0.1,
    AttributeKind.GLOSSARY_RARE_DISEASES: 0.1,
    AttributeKind.GLOSSARY_EMERGENCY_SEI: 0.1,
    AttributeKind.GLOSSARY_MESH: 0.1,
    AttributeKind.GLOSSARY_OTHER: 0.0,
}

_GLOSSARY_KIND: dict[Glossary, AttributeKind] = {
    Glossary.PHYSICIANS: AttributeKind.GLOSSARY_PHYSICIANS,
    Glossary.RARE_DISEASES: AttributeKind.GLOSSARY_RARE_DISEASES,
    Glossary.EMERGENCY_SEI: AttributeKind.GLOSSARY_EMERGENCY_SEI,
    Glossary.MESH: AttributeKind.GLOSSARY_MESH,
    Glossary.OTHER: AttributeKind.GLOSSARY_OTHER,
}

# Attribute kinds whose source strings are offered as autocomplete
# suggestions. Inclusion/exclusion/note lines are searchable but are never
# suggested as terms.
_SUGGESTION_KINDS = frozenset(
    {
        AttributeKind.MAIN_TITLE,
        AttributeKind.ADDITIONAL_TITLE,
        AttributeKind.ALPHABETICAL_MAIN,
        AttributeKind.ALPHABETICAL_INDENTED,
        AttributeKind.NEOPLASM_MAIN,
        AttributeKind.NEOPLASM_INDENTED,
        AttributeKind.GLOSSARY_PHYSICIANS,
        AttributeKind.GLOSSARY_RARE_DISEASES,
        AttributeKind.GLOSSARY_EMERGENCY_SEI,
        AttributeKind.GLOSSARY_MESH,
        AttributeKind.GLOSSARY_OTHER,
    }
)


def validate_weights(weights: dict[AttributeKind, float]) -> None:
    for kind, weight in weights.items():
        if not 0.0 <= weight <= 10.0:
            raise ValueError(f"weight for {kind.value} out of range [0, 10]: {weight}")


@dataclass(frozen=True)
class Query:
    terms: tuple[str, ...]
    section: Section
    limit: int = 50

    @classmethod
    def from_text(cls, text: str, section: Section, limit: int = 50) -> "Query":
        terms = tuple(tokenize(text))
        if not terms:
            raise EmptyQuery(f"query {text!r} is empty after normalization")
        if limit < 1:
            raise EmptyQuery(f"limit must be positive, got {limit}")
        return cls(terms=terms, section=section, limit=limit)


@dataclass(frozen=True)
class MatchedAttribute:
    kind: AttributeKind
    weight: float


@dataclass(frozen=True)
class SearchResult:
    code: str
    score: float
    matched_attributes: tuple[MatchedAttribute, ...]


@dataclass(frozen=True)
class RelatedTerm:
    token: str
    occurrence_count: int


@dataclass(frozen=True)
class _Attr:
    section: Section
    code: str
    kind: AttributeKind
    tokens: frozenset[str]


@dataclass(frozen=True)
class _Suggestion:
    display: str
    norm: str
    tokens: tuple[str, ...]
    kind: AttributeKind


def _entry_kind(source: EntrySource, indentation: int) -> AttributeKind:
    if source is EntrySource.NEOPLASM_TABLE:
        return (
            AttributeKind.NEOPLASM_MAIN if indentation == 0 else AttributeKind.NEOPLASM_INDENTED
        )
    return (
        AttributeKind.ALPHABETICAL_MAIN if indentation == 0 else AttributeKind.ALPHABETICAL_INDENTED
    )


class SearchIndex:
    """Inverted index over attribute instances of a :class:`KnowledgeBase`."""

    def __init__(self, kb: KnowledgeBase):
        self.kb = kb
        self._attrs: list[_Attr] = []
        self._postings: dict[Section, dict[str, set[int]]] = {
            Section.DIAGNOSES: {},
            Section.PROCEDURES: {},
        }
        self._suggestions: dict[Section, list[_Suggestion]] = {
            Section.DIAGNOSES: [],
            Section.PROCEDURES: [],
        }
        # Alphabetical-index entry texts per code, used for related terms.
        self._alpha_texts: dict[tuple[Section, str], list[str]] = {}
        self._build(kb)

    # ------------------------------------------------------------------
    # build
    # ------------------------------------------------------------------

    def _add_attr(self, section: Section, code: str, kind: AttributeKind, text: str) -> None:
        tokens = tokenize(text)
        if not tokens:
            return
        attr_id = len(self._attrs)
        self._attrs.append(_Attr(section, code, kind, frozenset(tokens)))
        postings = self._postings[section]
        for token in set(tokens):
            postings.setdefault(token, set()).add(attr_id)
        if kind in _SUGGESTION_KINDS:
            raw = tuple(split_tokens(text))
            if raw:
                self._suggestions[section].append(
                    _Suggestion(display=text, norm=fold(text), tokens=raw, kind=kind)
                )

    def _build(self, kb: KnowledgeBase) -> None:
        for node in kb.all_nodes():
            self._add_attr(node.section, node.code, AttributeKind.MAIN_TITLE, node.title)
            for text in node.additional_title_terms:
                self._add_attr(node.section, node.code, AttributeKind.ADDITIONAL_TITLE, text)
            for text in node.inclusions:
                self._add_attr(node.section, node.code, AttributeKind.INCLUSION, text)
            for exclusion in node.exclusions:
                self._add_attr(node.section, node.code, AttributeKind.EXCLUSION, exclusion.text)
            for note in node.notes:
                self._add_attr(node.section, node.code, AttributeKind.NOTE, note.text)
        for term in kb.entry_terms:
            kind = _entry_kind(term.source, term.indentation)
            self._add_attr(term.section, term.target_code, kind, term.text)
            if term.source is EntrySource.ALPHABETICAL_INDEX:
                key = (term.section, term.target_code)
                self._alpha_texts.setdefault(key, []).append(term.text)
        for term in kb.glossary_terms:
            self._add_attr(
                term.section, term.target_code, _GLOSSARY_KIND[term.glossary], term.text
            )

    # ------------------------------------------------------------------
    # search
    # ------------------------------------------------------------------

    def search(
        self,
        query: Query,
        weights: dict[AttributeKind, float] | None = None,
    ) -> list[SearchResult]:
        """Ranked matches for ``query``, best first (score desc, code asc)."""
        if not query.terms:
            raise EmptyQuery("query has no terms")
        table = DEFAULT_WEIGHTS if weights is None else weights
        validate_weights(table)
        postings = self._postings[query.section]
        candidate_sets = []
        for token in set(query.terms):
            posting = postings.get(token)
            if not posting:
                return []
            candidate_sets.append(posting)
        candidate_sets.sort(key=len)
        matched_ids = set(candidate_sets[0])
        for posting in candidate_sets[1:]:
            matched_ids &= posting
            if not matched_ids:
                return []

        by_code: dict[str, list[int]] = {}
        for attr_id in matched_ids:
            by_code.setdefault(self._attrs[attr_id].code, []).append(attr_id)

        results = []
        for code, attr_ids in by_code.items():
            attr_ids.sort()
            matched = tuple(
                MatchedAttribute(
                    kind=self._attrs[a].kind,
                    weight=table.get(self._attrs[a].kind, 0.0),
                )
                for a in attr_ids
            )
            score = math.fsum(m.weight for m in matched)
            results.append(SearchResult(code=code, score=score, matched_attributes=matched))
        results.sort(key=lambda r: (-r.score, r.code))
        return results[: query.limit]

    # ------------------------------------------------------------------
    # autocomplete
    # ------------------------------------------------------------------

    def autocomplete(
        self,
        prefix_text: str,
        section: Section,
        limit: int = 50,
        weights: dict[AttributeKind, float] | None = None,
    ) -> list[str]:
        """Source terms extending ``prefix_text`` at a token boundary.

        All but the last prefix token must occur as whole tokens in the term;
        some term token must start with the last prefix token. Stop words are
        kept on both sides so typing an article still completes.
        """
        prefix_tokens = split_tokens(prefix_text)
        if not prefix_tokens:
            raise EmptyQuery(f"prefix {prefix_text!r} is empty after normalization")
        if limit < 1:
            raise EmptyQuery(f"limit must be positive, got {limit}")
        table = DEFAULT_WEIGHTS if weights is None else weights
        *whole, last = prefix_tokens

        best: dict[str, tuple[float, str]] = {}
        for suggestion in self._suggestions[section]:
            token_set = set(suggestion.tokens)
            if any(t not in token_set for t in whole):
                continue
            if not any(t.startswith(last) for t in suggestion.tokens):
                continue
            weight = table.get(suggestion.kind, 0.0)
            current = best.get(suggestion.norm)
            candidate = (weight, suggestion.display)
            if current is None or (-candidate[0], candidate[1]) < (-current[0], current[1]):
                best[suggestion.norm] = candidate
        ranked = sorted(best.values(), key=lambda pair: (-pair[0], pair[1]))
        return [display for _, display in ranked[:limit]]

    # ------------------------------------------------------------------
    # related terms
    # ------------------------------------------------------------------

    def related_terms(self, query: Query, results: list[SearchResult]) -> list[RelatedTerm]:
        """Co-occurring tokens over the result classes, most frequent first.

        Tokens come from each result's main title, additional title terms,
        inclusions and alphabetical-index entry terms; stop words and the
        query's own tokens are removed.
        """
        counts: dict[str, int] = {}
        nodes = self.kb.nodes(query.section)
        for result in results:
            node = nodes.get(result.code)
            texts: list[str] = []
            if node is not None:
                texts.append(node.title)
                texts.extend(node.additional_title_terms)
                texts.extend(node.inclusions)
            texts.extend(self._alpha_texts.get((query.section, result.code), []))
            for text in texts:
                for token in tokenize(text):
                    counts[token] = counts.get(token, 0) + 1
        for term in query.terms:
            counts.pop(term, None)
        ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
        return [RelatedTerm(token=t, occurrence_count=c) for t, c in ranked]
