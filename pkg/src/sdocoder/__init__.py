"""Coding support for a hierarchical clinical classification.

The package covers the full pipeline used at discharge-abstract coding
desks: weighted search over every term source of the classification,
autocomplete, related-term suggestion, selection alerts driven by coding
rules, and a data-driven decision tree that identifies the main condition
of a hospital episode. ``sdocoder.service`` exposes everything over HTTP;
``sdocoder.cli`` wraps the same payloads for the terminal.
"""

from .engine import (
    BINARY_ANSWERS,
    RESULT_MESSAGE,
    DecisionEngine,
    Interaction,
    SessionState,
    SessionStatus,
    classify_procedure,
)
from .errors import (
    CodingSupportError,
    CountMismatch,
    EmptyConditionList,
    EmptyQuery,
    InconsistentHierarchy,
    InvalidAnswer,
    NotFound,
    ParseError,
    SessionFinished,
    StaleNode,
    UnclassifiedProcedure,
    UnknownCode,
)
from .index import DEFAULT_WEIGHTS, AttributeKind, Query, SearchIndex
from .ingestion import Bundle, load_bundle, load_kb
from .model import (
    ClassNode,
    EntryTerm,
    Glossary,
    GlossaryTerm,
    KnowledgeBase,
    Level,
    ProcedureClass,
    Section,
)
from .rules import AlertKind, SelectionAlert, validate_selection
from .tree import DecisionTree, TreeDefect, parse_tree, parse_tree_file, validate_tree

__all__ = [
    "AlertKind",
    "AttributeKind",
    "BINARY_ANSWERS",
    "Bundle",
    "ClassNode",
    "CodingSupportError",
    "CountMismatch",
    "DecisionEngine",
    "DecisionTree",
    "DEFAULT_WEIGHTS",
    "EmptyConditionList",
    "EmptyQuery",
    "EntryTerm",
    "Glossary",
    "GlossaryTerm",
    "InconsistentHierarchy",
    "Interaction",
    "InvalidAnswer",
    "KnowledgeBase",
    "Level",
    "NotFound",
    "ParseError",
    "ProcedureClass",
    "Query",
    "RESULT_MESSAGE",
    "SearchIndex",
    "Section",
    "SelectionAlert",
    "SessionFinished",
    "SessionState",
    "SessionStatus",
    "StaleNode",
    "TreeDefect",
    "UnclassifiedProcedure",
    "UnknownCode",
    "classify_procedure",
    "load_bundle",
    "load_kb",
    "parse_tree",
    "parse_tree_file",
    "validate_selection",
    "validate_tree",
]
