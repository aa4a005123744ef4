"""Streaming loaders for the tab-separated classification source files.

A build is described by a plain-text manifest: one source per line,

    <path><TAB><kind>[<TAB><declared record count>]

with ``#`` comments and blank lines ignored. Paths are relative to the
manifest's directory. Valid kinds: ``systematic``, ``alphabetical``,
``neoplasm``, ``glossary:<name>``, ``procedure_sets``, ``decision_tree``.

Every TSV file starts with a header line naming its columns; multi-valued
fields use ``||`` as the item separator; fields must not contain tabs or
newlines. Files are read line by line, so loaders work at full-scale sizes
without whole-file buffering.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

from . import tree as tree_module
from .errors import CountMismatch, InconsistentHierarchy, ParseError
from .model import (
    ClassNode,
    EntrySource,
    EntryTerm,
    Exclusion,
    Glossary,
    GlossaryTerm,
    Inconsistency,
    KnowledgeBase,
    Level,
    MappingQuality,
    Note,
    NoteKind,
    ProcedureClass,
    Section,
)

MANIFEST_KINDS = frozenset(
    {"systematic", "alphabetical", "neoplasm", "procedure_sets", "decision_tree"}
)

SYSTEMATIC_COLUMNS = [
    "code",
    "parent_code",
    "level",
    "section",
    "title",
    "additional_title_terms",
    "inclusions",
    "exclusions",
    "notes",
]
ENTRY_COLUMNS = ["text", "target_code", "indentation", "source"]
GLOSSARY_COLUMNS = ["text", "target_code", "glossary", "mapping_quality"]
PROCEDURE_SET_COLUMNS = ["code", "set"]

_CODE_REF_RE = re.compile(r"^[EV]?\d{1,4}(?:\.\d{1,2})?$")
_PAREN_RE = re.compile(r"\(([^()]*)\)")

_SET_LABELS = {
    "relevant": ProcedureClass.RELEVANT_SURGERY,
    "selected_nonrelevant": ProcedureClass.SELECTED_NONRELEVANT,
    "residual": ProcedureClass.RESIDUAL_NONRELEVANT,
}


@dataclass(frozen=True)
class SourceEntry:
    path: Path
    kind: str
    declared_count: int | None


@dataclass(frozen=True)
class SourceManifest:
    path: Path
    entries: tuple[SourceEntry, ...]


@dataclass
class Bundle:
    """Everything a deployment loads: classification, sets and tree."""

    kb: KnowledgeBase
    procedure_sets: dict[str, ProcedureClass]
    tree: tree_module.DecisionTree | None
    counts: dict[str, int]


def parse_referenced_codes(text: str) -> tuple[str, ...]:
    """Codes cross-referenced in parentheses inside ``text``.

    Comma-separated parenthesized items that look like codes are collected;
    ranges contribute both endpoints; anything else is ignored so the line
    survives as plain text.
    """
    refs: list[str] = []
    for group in _PAREN_RE.findall(text):
        for item in group.split(","):
            item = item.strip()
            if _CODE_REF_RE.match(item):
                refs.append(item)
                continue
            lo, sep, hi = item.partition("-")
            if sep and _CODE_REF_RE.match(lo.strip()) and _CODE_REF_RE.match(hi.strip()):
                refs.extend([lo.strip(), hi.strip()])
    out: list[str] = []
    for ref in refs:
        if ref not in out:
            out.append(ref)
    return tuple(out)


def parse_manifest(path: str | Path) -> SourceManifest:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"manifest {path} does not exist")
    entries: list[SourceEntry] = []
    with open(path, encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, start=1):
            line = raw.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) not in (2, 3):
                raise ParseError(str(path), lineno, "expected path<TAB>kind[<TAB>count]")
            source_path, kind = parts[0].strip(), parts[1].strip()
            base_kind = kind.split(":", 1)[0]
            if base_kind not in MANIFEST_KINDS and base_kind != "glossary":
                raise ParseError(str(path), lineno, f"unknown source kind {kind!r}")
            if base_kind == "glossary":
                name = kind.partition(":")[2]
                try:
                    Glossary(name)
                except ValueError:
                    raise ParseError(
                        str(path), lineno, f"unknown glossary name {name!r}"
                    ) from None
            declared: int | None = None
            if len(parts) == 3 and parts[2].strip():
                try:
                    declared = int(parts[2].strip())
                except ValueError:
                    raise ParseError(str(path), lineno, f"bad count {parts[2]!r}") from None
            entries.append(
                SourceEntry(path=path.parent / source_path, kind=kind, declared_count=declared)
            )
    if not entries:
        raise ParseError(str(path), 0, "manifest lists no sources")
    return SourceManifest(path=path, entries=tuple(entries))


# ----------------------------------------------------------------------
# row-level parsing
# ----------------------------------------------------------------------


def _rows(path: Path, expected_columns: list[str], optional: list[str] | None = None):
    """Yield (lineno, row dict) for a TSV file, validating the header."""
    if not path.is_file():
        raise FileNotFoundError(f"source file {path} does not exist")
    with open(path, encoding="utf-8") as handle:
        header_line = handle.readline()
        if not header_line:
            raise ParseError(str(path), 1, "missing header line")
        header = header_line.rstrip("\n").split("\t")
        allowed = expected_columns + list(optional or [])
        if header[: len(expected_columns)] != expected_columns or any(
            column not in allowed for column in header
        ):
            raise ParseError(str(path), 1, f"unexpected header {header}")
        for lineno, raw in enumerate(handle, start=2):
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            values = line.split("\t")
            if len(values) != len(header):
                raise ParseError(
                    str(path), lineno, f"expected {len(header)} fields, got {len(values)}"
                )
            yield lineno, dict(zip(header, values))


def _multi(value: str) -> list[str]:
    if not value.strip():
        return []
    return [item.strip() for item in value.split("||") if item.strip()]


def load_systematic(path: Path) -> list[ClassNode]:
    nodes: list[ClassNode] = []
    for lineno, row in _rows(path, SYSTEMATIC_COLUMNS, optional=["flags"]):
        code = row["code"].strip()
        if not code:
            raise ParseError(str(path), lineno, "empty code")
        try:
            level = Level(row["level"].strip())
        except ValueError:
            raise ParseError(str(path), lineno, f"bad level {row['level']!r}") from None
        try:
            section = Section(row["section"].strip())
        except ValueError:
            raise ParseError(str(path), lineno, f"bad section {row['section']!r}") from None
        exclusions = tuple(
            Exclusion(text=text, referenced_codes=parse_referenced_codes(text))
            for text in _multi(row["exclusions"])
        )
        notes = []
        for item in _multi(row["notes"]):
            kind_label, sep, text = item.partition(":")
            if not sep:
                raise ParseError(str(path), lineno, f"note {item!r} is not kind:text")
            try:
                kind = NoteKind(kind_label.strip())
            except ValueError:
                raise ParseError(
                    str(path), lineno, f"bad note kind {kind_label!r}"
                ) from None
            text = text.strip()
            notes.append(
                Note(kind=kind, text=text, referenced_codes=parse_referenced_codes(text))
            )
        flags = {f.strip() for f in row.get("flags", "").split(",") if f.strip()}
        unknown_flags = flags - {"physiological"}
        if unknown_flags:
            raise ParseError(str(path), lineno, f"unknown flags {sorted(unknown_flags)}")
        nodes.append(
            ClassNode(
                code=code,
                title=row["title"].strip(),
                section=section,
                level=level,
                parent_code=row["parent_code"].strip() or None,
                additional_title_terms=tuple(_multi(row["additional_title_terms"])),
                inclusions=tuple(_multi(row["inclusions"])),
                exclusions=exclusions,
                notes=tuple(notes),
                is_physiological="physiological" in flags,
            )
        )
    return nodes


@dataclass(frozen=True)
class _RawEntry:
    text: str
    target_code: str
    indentation: int
    source: EntrySource


@dataclass(frozen=True)
class _RawGlossary:
    text: str
    target_code: str
    glossary: Glossary
    mapping_quality: MappingQuality


def load_entries(path: Path, expected_source: EntrySource) -> list[_RawEntry]:
    entries: list[_RawEntry] = []
    for lineno, row in _rows(path, ENTRY_COLUMNS):
        try:
            indentation = int(row["indentation"].strip())
        except ValueError:
            raise ParseError(
                str(path), lineno, f"bad indentation {row['indentation']!r}"
            ) from None
        if not 0 <= indentation <= 6:
            raise ParseError(str(path), lineno, f"indentation {indentation} out of range 0-6")
        try:
            source = EntrySource(row["source"].strip())
        except ValueError:
            raise ParseError(str(path), lineno, f"bad source {row['source']!r}") from None
        if source is not expected_source:
            raise ParseError(
                str(path), lineno, f"source {source.value} not allowed in this file"
            )
        if not row["text"].strip() or not row["target_code"].strip():
            raise ParseError(str(path), lineno, "text and target_code are required")
        entries.append(
            _RawEntry(
                text=row["text"].strip(),
                target_code=row["target_code"].strip(),
                indentation=indentation,
                source=source,
            )
        )
    return entries


def load_glossary(path: Path, expected: Glossary) -> list[_RawGlossary]:
    terms: list[_RawGlossary] = []
    for lineno, row in _rows(path, GLOSSARY_COLUMNS):
        try:
            glossary = Glossary(row["glossary"].strip())
        except ValueError:
            raise ParseError(str(path), lineno, f"bad glossary {row['glossary']!r}") from None
        if glossary is not expected:
            raise ParseError(
                str(path), lineno, f"glossary {glossary.value} not allowed in this file"
            )
        try:
            quality = MappingQuality(row["mapping_quality"].strip())
        except ValueError:
            raise ParseError(
                str(path), lineno, f"bad mapping quality {row['mapping_quality']!r}"
            ) from None
        if not row["text"].strip() or not row["target_code"].strip():
            raise ParseError(str(path), lineno, "text and target_code are required")
        terms.append(
            _RawGlossary(
                text=row["text"].strip(),
                target_code=row["target_code"].strip(),
                glossary=glossary,
                mapping_quality=quality,
            )
        )
    return terms


def load_procedure_sets(path: Path) -> dict[str, ProcedureClass]:
    table: dict[str, ProcedureClass] = {}
    for lineno, row in _rows(path, PROCEDURE_SET_COLUMNS):
        code = row["code"].strip()
        label = row["set"].strip()
        if label not in _SET_LABELS:
            raise ParseError(str(path), lineno, f"unknown procedure set {label!r}")
        if code in table:
            raise ParseError(str(path), lineno, f"procedure {code} classified twice")
        table[code] = _SET_LABELS[label]
    return table


# ----------------------------------------------------------------------
# bundle assembly
# ----------------------------------------------------------------------


def _shape_section(code: str) -> Section:
    """Fallback section from the code's shape when the code is unknown.

    Procedure categories have two digits before the dot; diagnosis codes have
    three to five digits or an E/V prefix.
    """
    head = code.split(".", 1)[0]
    if head and head[0] in ("E", "V"):
        return Section.DIAGNOSES
    return Section.PROCEDURES if len(head) <= 2 else Section.DIAGNOSES


def _resolve_section(
    nodes_by_section: dict[Section, set[str]], code: str, path: Path, lineno: int
) -> Section:
    in_diagnoses = code in nodes_by_section[Section.DIAGNOSES]
    in_procedures = code in nodes_by_section[Section.PROCEDURES]
    if in_diagnoses and in_procedures:
        raise ParseError(
            str(path), lineno, f"target {code} exists in both sections; cannot resolve"
        )
    if in_diagnoses:
        return Section.DIAGNOSES
    if in_procedures:
        return Section.PROCEDURES
    return _shape_section(code)


def load_bundle(manifest_path: str | Path) -> Bundle:
    """Load and validate everything the manifest lists.

    Raises the first :class:`ParseError`/:class:`CountMismatch` found and
    :class:`InconsistentHierarchy` when the assembled KB violates any
    structural invariant; a bundle is only returned when clean.
    """
    manifest = parse_manifest(manifest_path)
    nodes: list[ClassNode] = []
    raw_entries: list[tuple[Path, _RawEntry]] = []
    raw_glossaries: list[tuple[Path, _RawGlossary]] = []
    procedure_sets: dict[str, ProcedureClass] = {}
    tree = None
    counts: dict[str, int] = {}
    provenance: dict[str, int] = {}

    def bump(kind: str, amount: int) -> None:
        counts[kind] = counts.get(kind, 0) + amount

    for entry in manifest.entries:
        base_kind = entry.kind.split(":", 1)[0]
        if base_kind == "systematic":
            records = load_systematic(entry.path)
            nodes.extend(records)
            actual = len(records)
        elif base_kind == "alphabetical":
            records = load_entries(entry.path, EntrySource.ALPHABETICAL_INDEX)
            raw_entries.extend((entry.path, r) for r in records)
            actual = len(records)
        elif base_kind == "neoplasm":
            records = load_entries(entry.path, EntrySource.NEOPLASM_TABLE)
            raw_entries.extend((entry.path, r) for r in records)
            actual = len(records)
        elif base_kind == "glossary":
            glossary = Glossary(entry.kind.partition(":")[2])
            records = load_glossary(entry.path, glossary)
            raw_glossaries.extend((entry.path, r) for r in records)
            actual = len(records)
        elif base_kind == "procedure_sets":
            table = load_procedure_sets(entry.path)
            overlap = set(table) & set(procedure_sets)
            if overlap:
                raise ParseError(
                    str(entry.path), 0, f"procedures classified twice: {sorted(overlap)}"
                )
            procedure_sets.update(table)
            actual = len(table)
        elif base_kind == "decision_tree":
            tree = tree_module.parse_tree_file(entry.path)
            actual = len(tree.records)
        else:  # unreachable; parse_manifest already screens kinds
            raise ParseError(str(manifest.path), 0, f"unknown kind {entry.kind!r}")
        bump(entry.kind, actual)
        if entry.declared_count is not None and entry.declared_count != actual:
            raise CountMismatch(str(entry.path), entry.declared_count, actual)
        if base_kind not in ("procedure_sets", "decision_tree"):
            provenance[entry.kind] = provenance.get(entry.kind, 0) + actual

    codes_by_section = {
        Section.DIAGNOSES: {n.code for n in nodes if n.section is Section.DIAGNOSES},
        Section.PROCEDURES: {n.code for n in nodes if n.section is Section.PROCEDURES},
    }
    entry_terms = [
        EntryTerm(
            text=r.text,
            target_code=r.target_code,
            indentation=r.indentation,
            source=r.source,
            section=_resolve_section(codes_by_section, r.target_code, path, 0),
        )
        for path, r in raw_entries
    ]
    glossary_terms = [
        GlossaryTerm(
            text=r.text,
            target_code=r.target_code,
            glossary=r.glossary,
            mapping_quality=r.mapping_quality,
            section=_resolve_section(codes_by_section, r.target_code, path, 0),
        )
        for path, r in raw_glossaries
    ]

    kb = KnowledgeBase(
        nodes=nodes,
        entry_terms=entry_terms,
        glossary_terms=glossary_terms,
        provenance=provenance,
    )
    reports = kb.validate_hierarchy()
    for code in sorted(procedure_sets):
        if not kb.has(Section.PROCEDURES, code):
            reports.append(
                Inconsistency(
                    "unresolved_target",
                    Section.PROCEDURES,
                    code,
                    "procedure-set table entry targets unknown code",
                )
            )
    if reports:
        raise InconsistentHierarchy(reports)
    return Bundle(kb=kb, procedure_sets=procedure_sets, tree=tree, counts=counts)


def load_kb(manifest_path: str | Path) -> KnowledgeBase:
    """The classification alone; see :func:`load_bundle` for the full build."""
    return load_bundle(manifest_path).kb
