"""In-memory model of the hierarchical diagnosis/procedure classification.

The classification is a forest per section (diagnoses, procedures). Codes are
stored with their dot ("648.0"); prefix relations are evaluated on the dotless
form, so "648.0" is an ancestor of "648.00". Chapter and block headings carry
short digit prefixes ("6", "64") or a bare supplementary-prefix letter ("V",
"E"); category level and below use the usual 3-to-5 digit shape.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .errors import NotFound


class Section(str, Enum):
    DIAGNOSES = "diagnoses"
    PROCEDURES = "procedures"


class Level(str, Enum):
    CHAPTER = "chapter"
    BLOCK = "block"
    CATEGORY = "category"
    SUBCATEGORY = "subcategory"
    SUBCLASSIFICATION = "subclassification"


# Depth rank used for the "strictly descending along any path" invariant.
LEVEL_RANK: dict[Level, int] = {
    Level.CHAPTER: 0,
    Level.BLOCK: 1,
    Level.CATEGORY: 2,
    Level.SUBCATEGORY: 3,
    Level.SUBCLASSIFICATION: 4,
}


class NoteKind(str, Enum):
    USE_ADDITIONAL_CODE = "use_additional_code"
    CODE_BASIC_DISEASE_FIRST = "code_basic_disease_first"
    OTHER = "other"


class EntrySource(str, Enum):
    ALPHABETICAL_INDEX = "alphabetical_index"
    NEOPLASM_TABLE = "neoplasm_table"


class Glossary(str, Enum):
    PHYSICIANS = "physicians"
    RARE_DISEASES = "rare_diseases"
    EMERGENCY_SEI = "emergency_sei"
    MESH = "mesh"
    OTHER = "other"


class MappingQuality(str, Enum):
    EXACT = "exact"
    APPROXIMATE = "approximate"


class ProcedureClass(str, Enum):
    """Grouping of procedure codes by their weight in main-condition logic.

    Residual procedures never influence which question is asked next.
    """

    RELEVANT_SURGERY = "relevant"
    SELECTED_NONRELEVANT = "selected_nonrelevant"
    RESIDUAL_NONRELEVANT = "residual"


@dataclass(frozen=True)
class Exclusion:
    """An exclusion line, with any code cross-references parsed out."""

    text: str
    referenced_codes: tuple[str, ...] = ()


@dataclass(frozen=True)
class Note:
    """A coding note attached to a class."""

    kind: NoteKind
    text: str
    referenced_codes: tuple[str, ...] = ()


@dataclass(frozen=True)
class ClassNode:
    code: str
    title: str
    section: Section
    level: Level
    parent_code: str | None = None
    additional_title_terms: tuple[str, ...] = ()
    inclusions: tuple[str, ...] = ()
    exclusions: tuple[Exclusion, ...] = ()
    notes: tuple[Note, ...] = ()
    is_physiological: bool = False
    """True for codes describing normal physiological changes rather than
    pathology (normal delivery, normal pregnancy supervision)."""

    def dotless(self) -> str:
        return self.code.replace(".", "")


@dataclass(frozen=True)
class EntryTerm:
    """A term from the alphabetical index or the neoplasm table."""

    text: str
    target_code: str
    indentation: int
    source: EntrySource
    section: Section
    """Resolved at load time from the target code's section."""


@dataclass(frozen=True)
class GlossaryTerm:
    """A term from one of the auxiliary glossaries."""

    text: str
    target_code: str
    glossary: Glossary
    mapping_quality: MappingQuality
    section: Section


@dataclass(frozen=True)
class CodeDetails:
    """Detail panel payload for a single code."""

    code: str
    title: str
    is_leaf: bool
    children: tuple[str, ...]
    exclusions: tuple[Exclusion, ...]
    use_additional_code: tuple[Note, ...]
    basic_disease: tuple[Note, ...]


@dataclass(frozen=True)
class Inconsistency:
    """One violated structural invariant found by ``validate_hierarchy``."""

    kind: str
    section: Section
    code: str
    message: str

    def __str__(self) -> str:
        return f"[{self.kind}] {self.section.value}/{self.code}: {self.message}"


def dotless(code: str) -> str:
    return code.replace(".", "")


class KnowledgeBase:
    """The loaded classification plus all auxiliary term sources.

    Instances are immutable by convention: build once, then share freely
    between the index, the rules and the decision engine.
    """

    def __init__(
        self,
        nodes: list[ClassNode],
        entry_terms: list[EntryTerm],
        glossary_terms: list[GlossaryTerm],
        provenance: dict[str, int] | None = None,
    ):
        self._node_list = list(nodes)
        self.entry_terms = list(entry_terms)
        self.glossary_terms = list(glossary_terms)
        self.provenance = dict(provenance or {})
        self._by_section: dict[Section, dict[str, ClassNode]] = {
            Section.DIAGNOSES: {},
            Section.PROCEDURES: {},
        }
        for node in self._node_list:
            table = self._by_section[node.section]
            if node.code not in table:
                table[node.code] = node
        self._children: dict[Section, dict[str, list[str]]] = {
            Section.DIAGNOSES: {},
            Section.PROCEDURES: {},
        }
        for node in self._node_list:
            if node.parent_code is not None:
                bucket = self._children[node.section].setdefault(node.parent_code, [])
                if node.code not in bucket:
                    bucket.append(node.code)
        for table in self._children.values():
            for codes in table.values():
                codes.sort()

    # ------------------------------------------------------------------
    # navigation
    # ------------------------------------------------------------------

    def nodes(self, section: Section) -> dict[str, ClassNode]:
        return self._by_section[section]

    def all_nodes(self) -> list[ClassNode]:
        return list(self._node_list)

    def get(self, section: Section, code: str) -> ClassNode:
        try:
            return self._by_section[section][code]
        except KeyError:
            raise NotFound(f"code {code} not found in section {section.value}") from None

    def has(self, section: Section, code: str) -> bool:
        return code in self._by_section[section]

    def children(self, section: Section, code: str) -> list[str]:
        self.get(section, code)
        return list(self._children[section].get(code, []))

    def is_leaf(self, section: Section, code: str) -> bool:
        return not self.children(section, code)

    def chapter_of(self, section: Section, code: str) -> str:
        """Code of the chapter-level ancestor (the root above ``code``)."""
        node = self.get(section, code)
        seen = {node.code}
        while node.parent_code is not None:
            node = self.get(section, node.parent_code)
            if node.code in seen:  # cycle guard; validate_hierarchy reports it
                break
            seen.add(node.code)
        return node.code

    def code_details(self, section: Section, code: str) -> CodeDetails:
        node = self.get(section, code)
        return CodeDetails(
            code=node.code,
            title=node.title,
            is_leaf=self.is_leaf(section, code),
            children=tuple(self.children(section, code)),
            exclusions=node.exclusions,
            use_additional_code=tuple(
                n for n in node.notes if n.kind is NoteKind.USE_ADDITIONAL_CODE
            ),
            basic_disease=tuple(
                n for n in node.notes if n.kind is NoteKind.CODE_BASIC_DISEASE_FIRST
            ),
        )

    def total_terms(self) -> int:
        return sum(self.provenance.values())

    # ------------------------------------------------------------------
    # validation
    # ------------------------------------------------------------------

    def validate_hierarchy(self) -> list[Inconsistency]:
        """Every violated structural invariant, empty on a consistent KB."""
        reports: list[Inconsistency] = []
        seen: dict[tuple[Section, str], int] = {}
        for node in self._node_list:
            key = (node.section, node.code)
            seen[key] = seen.get(key, 0) + 1
        for (section, code), count in seen.items():
            if count > 1:
                reports.append(
                    Inconsistency("duplicate_code", section, code, f"defined {count} times")
                )

        for node in self._node_list:
            table = self._by_section[node.section]
            if node.parent_code is None:
                continue
            parent = table.get(node.parent_code)
            if parent is None:
                reports.append(
                    Inconsistency(
                        "orphan_parent",
                        node.section,
                        node.code,
                        f"parent {node.parent_code} does not exist",
                    )
                )
                continue
            if not node.dotless().startswith(parent.dotless()) or node.dotless() == parent.dotless():
                reports.append(
                    Inconsistency(
                        "non_prefix_child",
                        node.section,
                        node.code,
                        f"code is not an extension of parent {parent.code}",
                    )
                )
            if LEVEL_RANK[node.level] <= LEVEL_RANK[parent.level]:
                reports.append(
                    Inconsistency(
                        "level_inversion",
                        node.section,
                        node.code,
                        f"level {node.level.value} under {parent.level.value}",
                    )
                )

        for node in self._node_list:
            for exclusion in node.exclusions:
                for ref in exclusion.referenced_codes:
                    if not self.has(node.section, ref):
                        reports.append(
                            Inconsistency(
                                "unresolved_reference",
                                node.section,
                                node.code,
                                f"exclusion references unknown code {ref}",
                            )
                        )
            for note in node.notes:
                for ref in note.referenced_codes:
                    if not self.has(node.section, ref):
                        reports.append(
                            Inconsistency(
                                "unresolved_reference",
                                node.section,
                                node.code,
                                f"note references unknown code {ref}",
                            )
                        )

        for term in self.entry_terms:
            if not self.has(term.section, term.target_code):
                reports.append(
                    Inconsistency(
                        "unresolved_target",
                        term.section,
                        term.target_code,
                        f"entry term {term.text!r} targets unknown code",
                    )
                )
        for term in self.glossary_terms:
            if not self.has(term.section, term.target_code):
                reports.append(
                    Inconsistency(
                        "unresolved_target",
                        term.section,
                        term.target_code,
                        f"glossary term {term.text!r} targets unknown code",
                    )
                )
        return reports

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, KnowledgeBase):
            return NotImplemented
        return (
            self._node_list == other._node_list
            and self.entry_terms == other.entry_terms
            and self.glossary_terms == other.glossary_terms
            and self.provenance == other.provenance
        )


def parse_section(value: str) -> Section:
    try:
        return Section(value.strip().lower())
    except ValueError:
        raise NotFound(f"unknown section {value!r}") from None
