"""Wire payload builders shared by the HTTP service and the CLI.

Both front ends must emit byte-identical JSON for the same request, so the
dict shapes live here and both sides render them through
:func:`sdocoder.engine.canonical_json`.
"""

from __future__ import annotations

from .engine import Interaction, ProgressEntry, SessionState
from .index import Query, SearchIndex
from .model import Exclusion, KnowledgeBase, Note, Section
from .rules import SelectionAlert, validate_selection


def search_payload(
    kb: KnowledgeBase,
    index: SearchIndex,
    section: Section,
    text: str,
    limit: int = 50,
) -> dict:
    query = Query.from_text(text, section, limit=limit)
    results = index.search(query)
    related = index.related_terms(query, results)
    nodes = kb.nodes(section)
    return {
        "section": section.value,
        "query": list(query.terms),
        "results": [
            {
                "code": result.code,
                "title": nodes[result.code].title if result.code in nodes else "",
                "score": result.score,
                "matched": [
                    {"kind": attr.kind.value, "weight": attr.weight}
                    for attr in result.matched_attributes
                ],
            }
            for result in results
        ],
        "related_terms": [
            {"token": term.token, "count": term.occurrence_count} for term in related
        ],
    }


def autocomplete_payload(
    index: SearchIndex, section: Section, text: str, limit: int = 50
) -> list[str]:
    """The response body is the bare suggestion array."""
    return index.autocomplete(text, section, limit=limit)


def _exclusion_payload(exclusion: Exclusion) -> dict:
    return {"text": exclusion.text, "referenced_codes": list(exclusion.referenced_codes)}


def _note_payload(note: Note) -> dict:
    return {"text": note.text, "referenced_codes": list(note.referenced_codes)}


def alert_payload(alert: SelectionAlert) -> dict:
    return {
        "kind": alert.kind.value,
        "subject_code": alert.subject_code,
        "referenced_codes": list(alert.referenced_codes),
        "message": alert.message,
    }


def code_details_payload(
    kb: KnowledgeBase,
    section: Section,
    code: str,
    selected: list[str] | tuple[str, ...] = (),
) -> dict:
    details = kb.code_details(section, code)
    alerts = validate_selection(kb, section, code, already_selected=tuple(selected))
    return {
        "section": section.value,
        "code": details.code,
        "title": details.title,
        "is_leaf": details.is_leaf,
        "children": list(details.children),
        "exclusions": [_exclusion_payload(e) for e in details.exclusions],
        "use_additional_code": [_note_payload(n) for n in details.use_additional_code],
        "basic_disease": [_note_payload(n) for n in details.basic_disease],
        "alerts": [alert_payload(a) for a in alerts],
    }


def session_payload(
    session: SessionState,
    interaction: Interaction | None,
    progress: list[ProgressEntry] | None = None,
) -> dict:
    payload: dict = {
        "session_id": session.session_id,
        "status": session.status.value,
        "pc": list(session.pc),
        "pi": list(session.pi),
    }
    if interaction is not None:
        payload["interaction"] = interaction.to_payload()
    if session.verdict is not None:
        payload["verdict"] = list(session.verdict)
    if progress is not None:
        payload["progress"] = [
            {"node_id": entry.node_id, "label": entry.label, "status": entry.status}
            for entry in progress
        ]
    return payload
