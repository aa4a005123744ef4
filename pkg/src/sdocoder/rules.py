"""Advisory coding-rule checks for a code the user is about to select.

Alerts never block a selection; they surface classification guidance the
coder may consciously override.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .model import KnowledgeBase, NoteKind, Section


class AlertKind(str, Enum):
    NOT_LEAF = "NotLeaf"
    EXCLUSION_CONFLICT = "ExclusionConflict"
    USE_ADDITIONAL_CODE = "UseAdditionalCode"
    CODE_BASIC_DISEASE_FIRST = "CodeBasicDiseaseFirst"


@dataclass(frozen=True)
class SelectionAlert:
    kind: AlertKind
    subject_code: str
    referenced_codes: tuple[str, ...]
    message: str


def _exclusion_refs(kb: KnowledgeBase, section: Section, code: str) -> set[str]:
    node = kb.get(section, code)
    refs: set[str] = set()
    for exclusion in node.exclusions:
        refs.update(exclusion.referenced_codes)
    return refs


def validate_selection(
    kb: KnowledgeBase,
    section: Section,
    code: str,
    already_selected: list[str] | tuple[str, ...] = (),
) -> list[SelectionAlert]:
    """Alerts raised by selecting ``code`` given the codes already selected.

    Exclusion conflicts are symmetric: a conflict with a selected code is
    reported whether the exclusion reference sits on ``code`` or on the
    selected code.
    """
    node = kb.get(section, code)
    alerts: list[SelectionAlert] = []

    if not kb.is_leaf(section, code):
        alerts.append(
            SelectionAlert(
                kind=AlertKind.NOT_LEAF,
                subject_code=code,
                referenced_codes=tuple(kb.children(section, code)),
                message=f"{code} non è un codice terminale: scegliere un codice più specifico",
            )
        )

    own_refs = _exclusion_refs(kb, section, code)
    for selected in already_selected:
        if selected == code or not kb.has(section, selected):
            continue
        if selected in own_refs or code in _exclusion_refs(kb, section, selected):
            alerts.append(
                SelectionAlert(
                    kind=AlertKind.EXCLUSION_CONFLICT,
                    subject_code=code,
                    referenced_codes=(selected,),
                    message=f"{code} e {selected} si escludono a vicenda per le regole di codifica",
                )
            )

    for note in node.notes:
        if note.kind is NoteKind.USE_ADDITIONAL_CODE:
            alerts.append(
                SelectionAlert(
                    kind=AlertKind.USE_ADDITIONAL_CODE,
                    subject_code=code,
                    referenced_codes=note.referenced_codes,
                    message=note.text,
                )
            )
    for note in node.notes:
        if note.kind is NoteKind.CODE_BASIC_DISEASE_FIRST:
            alerts.append(
                SelectionAlert(
                    kind=AlertKind.CODE_BASIC_DISEASE_FIRST,
                    subject_code=code,
                    referenced_codes=note.referenced_codes,
                    message=note.text,
                )
            )
    return alerts
