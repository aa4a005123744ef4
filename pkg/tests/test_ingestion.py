"""Source loading: manifests, TSV parsing, cross-reference extraction,
count checks and bundle-level validation.

Corruption tests copy the demonstration corpus and break exactly one thing,
then assert the loader reports it instead of producing a bundle.
"""

from __future__ import annotations

import shutil

import pytest

from sdocoder.errors import CountMismatch, InconsistentHierarchy, ParseError
from sdocoder.ingestion import (
    load_bundle,
    load_kb,
    parse_manifest,
    parse_referenced_codes,
)
from sdocoder.model import ProcedureClass, Section


class TestParseReferencedCodes:
    def test_single_reference(self):
        assert parse_referenced_codes("diabete gestazionale (648.8)") == ("648.8",)

    def test_comma_separated_references(self):
        text = "malattia renale cronica (585.6, 585.9)"
        assert parse_referenced_codes(text) == ("585.6", "585.9")

    def test_range_contributes_both_endpoints(self):
        assert parse_referenced_codes("diabete secondario (249.0-249.9)") == (
            "249.0",
            "249.9",
        )

    def test_supplementary_prefixes(self):
        assert parse_referenced_codes("gravidanza (V22.0, E870.8)") == ("V22.0", "E870.8")

    def test_plain_text_parentheses_are_ignored(self):
        assert parse_referenced_codes("diabete mellito neonatale (vedi sotto)") == ()

    def test_no_parentheses(self):
        assert parse_referenced_codes("diabete mellito neonatale") == ()

    def test_duplicates_collapse_in_order(self):
        assert parse_referenced_codes("x (648.8) y (250, 648.8)") == ("648.8", "250")


class TestParseManifest:
    def test_reads_fixture_manifest(self, fixture_dir):
        manifest = parse_manifest(fixture_dir / "manifest.tsv")
        kinds = [entry.kind for entry in manifest.entries]
        assert kinds.count("systematic") == 2
        assert "glossary:mesh" in kinds
        assert "decision_tree" in kinds
        assert all(entry.declared_count is not None for entry in manifest.entries)

    def test_paths_resolve_relative_to_manifest(self, fixture_dir):
        manifest = parse_manifest(fixture_dir / "manifest.tsv")
        assert all(entry.path.is_file() for entry in manifest.entries)

    def test_missing_manifest(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            parse_manifest(tmp_path / "nope.tsv")

    def test_unknown_kind(self, tmp_path):
        path = tmp_path / "manifest.tsv"
        path.write_text("data.tsv\tspreadsheet\n", encoding="utf-8")
        with pytest.raises(ParseError, match="unknown source kind"):
            parse_manifest(path)

    def test_unknown_glossary_name(self, tmp_path):
        path = tmp_path / "manifest.tsv"
        path.write_text("g.tsv\tglossary:slang\n", encoding="utf-8")
        with pytest.raises(ParseError, match="unknown glossary name"):
            parse_manifest(path)

    def test_bad_count(self, tmp_path):
        path = tmp_path / "manifest.tsv"
        path.write_text("a.tsv\talphabetical\tmany\n", encoding="utf-8")
        with pytest.raises(ParseError, match="bad count"):
            parse_manifest(path)

    def test_empty_manifest(self, tmp_path):
        path = tmp_path / "manifest.tsv"
        path.write_text("# nothing here\n\n", encoding="utf-8")
        with pytest.raises(ParseError, match="lists no sources"):
            parse_manifest(path)


class TestLoadBundle:
    def test_counts_match_the_manifest(self, fixture_dir, bundle):
        declared = {
            entry.kind: 0 for entry in parse_manifest(fixture_dir / "manifest.tsv").entries
        }
        for entry in parse_manifest(fixture_dir / "manifest.tsv").entries:
            declared[entry.kind] += entry.declared_count
        assert bundle.counts == declared

    def test_provenance_covers_term_sources_only(self, bundle):
        assert "procedure_sets" not in bundle.kb.provenance
        assert "decision_tree" not in bundle.kb.provenance
        assert bundle.kb.provenance["alphabetical"] == 26
        assert bundle.kb.provenance["neoplasm"] == 3
        assert bundle.kb.provenance["glossary:mesh"] == 2

    def test_procedure_sets_are_loaded(self, bundle):
        assert bundle.procedure_sets["55.24"] is ProcedureClass.RELEVANT_SURGERY
        assert bundle.procedure_sets["48.23"] is ProcedureClass.SELECTED_NONRELEVANT
        assert bundle.procedure_sets["89.52"] is ProcedureClass.RESIDUAL_NONRELEVANT

    def test_tree_is_loaded(self, bundle):
        assert bundle.tree is not None
        assert bundle.tree.root == 1

    def test_entry_sections_resolve_from_target(self, bundle):
        by_text = {term.text: term for term in bundle.kb.entry_terms}
        assert by_text["ecg"].section is Section.PROCEDURES
        assert by_text["pre-diabete"].section is Section.DIAGNOSES

    def test_load_kb_matches_bundle(self, fixture_dir, bundle):
        assert load_kb(fixture_dir / "manifest.tsv") == bundle.kb


def _copy_corpus(fixture_dir, tmp_path):
    target = tmp_path / "corpus"
    shutil.copytree(fixture_dir, target)
    return target


def _patch(path, old, new):
    text = path.read_text(encoding="utf-8")
    assert old in text, f"{old!r} not found in {path.name}"
    path.write_text(text.replace(old, new), encoding="utf-8")


class TestCorruptedSources:
    def test_declared_count_mismatch(self, fixture_dir, tmp_path):
        corpus = _copy_corpus(fixture_dir, tmp_path)
        _patch(corpus / "manifest.tsv", "alphabetical.tsv\talphabetical\t26", "alphabetical.tsv\talphabetical\t27")
        with pytest.raises(CountMismatch) as info:
            load_bundle(corpus / "manifest.tsv")
        assert info.value.declared == 27
        assert info.value.actual == 26

    def test_missing_source_file(self, fixture_dir, tmp_path):
        corpus = _copy_corpus(fixture_dir, tmp_path)
        (corpus / "neoplasm.tsv").unlink()
        with pytest.raises(FileNotFoundError):
            load_bundle(corpus / "manifest.tsv")

    def test_wrong_header(self, fixture_dir, tmp_path):
        corpus = _copy_corpus(fixture_dir, tmp_path)
        _patch(corpus / "alphabetical.tsv", "text\ttarget_code", "term\ttarget_code")
        with pytest.raises(ParseError, match="unexpected header"):
            load_bundle(corpus / "manifest.tsv")

    def test_wrong_field_count(self, fixture_dir, tmp_path):
        corpus = _copy_corpus(fixture_dir, tmp_path)
        with open(corpus / "alphabetical.tsv", "a", encoding="utf-8") as handle:
            handle.write("dangling line without tabs\n")
        with pytest.raises(ParseError, match="fields"):
            load_bundle(corpus / "manifest.tsv")

    def test_bad_level(self, fixture_dir, tmp_path):
        corpus = _copy_corpus(fixture_dir, tmp_path)
        _patch(corpus / "systematic_diagnoses.tsv", "\tcategory\t", "\tkingdom\t")
        with pytest.raises(ParseError, match="bad level"):
            load_bundle(corpus / "manifest.tsv")

    def test_bad_indentation(self, fixture_dir, tmp_path):
        corpus = _copy_corpus(fixture_dir, tmp_path)
        _patch(corpus / "alphabetical.tsv", "pre-diabete\t790.29\t0", "pre-diabete\t790.29\t9")
        with pytest.raises(ParseError, match="out of range"):
            load_bundle(corpus / "manifest.tsv")

    def test_entry_source_must_match_file_kind(self, fixture_dir, tmp_path):
        corpus = _copy_corpus(fixture_dir, tmp_path)
        _patch(
            corpus / "alphabetical.tsv",
            "pre-diabete\t790.29\t0\talphabetical_index",
            "pre-diabete\t790.29\t0\tneoplasm_table",
        )
        with pytest.raises(ParseError, match="not allowed in this file"):
            load_bundle(corpus / "manifest.tsv")

    def test_glossary_must_match_file_kind(self, fixture_dir, tmp_path):
        corpus = _copy_corpus(fixture_dir, tmp_path)
        _patch(corpus / "glossary_mesh.tsv", "\tmesh\t", "\tphysicians\t")
        with pytest.raises(ParseError, match="not allowed in this file"):
            load_bundle(corpus / "manifest.tsv")

    def test_bad_note_kind(self, fixture_dir, tmp_path):
        corpus = _copy_corpus(fixture_dir, tmp_path)
        _patch(corpus / "systematic_diagnoses.tsv", "use_additional_code:", "apply_extra_code:")
        with pytest.raises(ParseError, match="bad note kind"):
            load_bundle(corpus / "manifest.tsv")

    def test_unknown_flag(self, fixture_dir, tmp_path):
        corpus = _copy_corpus(fixture_dir, tmp_path)
        _patch(corpus / "systematic_diagnoses.tsv", "physiological", "physiologic")
        with pytest.raises(ParseError, match="unknown flags"):
            load_bundle(corpus / "manifest.tsv")

    def test_procedure_classified_twice(self, fixture_dir, tmp_path):
        corpus = _copy_corpus(fixture_dir, tmp_path)
        _patch(corpus / "procedure_sets.tsv", "89.52\tresidual", "89.52\tresidual\n89.52\trelevant")
        _patch(corpus / "manifest.tsv", "procedure_sets.tsv\tprocedure_sets\t7", "procedure_sets.tsv\tprocedure_sets\t8")
        with pytest.raises(ParseError, match="classified twice"):
            load_bundle(corpus / "manifest.tsv")

    def test_unknown_procedure_set_label(self, fixture_dir, tmp_path):
        corpus = _copy_corpus(fixture_dir, tmp_path)
        _patch(corpus / "procedure_sets.tsv", "55.24\trelevant", "55.24\tmajor")
        with pytest.raises(ParseError, match="unknown procedure set"):
            load_bundle(corpus / "manifest.tsv")

    def test_procedure_set_targeting_unknown_code(self, fixture_dir, tmp_path):
        corpus = _copy_corpus(fixture_dir, tmp_path)
        _patch(corpus / "procedure_sets.tsv", "55.24\trelevant", "66.66\trelevant")
        with pytest.raises(InconsistentHierarchy, match="unknown code"):
            load_bundle(corpus / "manifest.tsv")

    def test_orphan_parent_is_rejected(self, fixture_dir, tmp_path):
        corpus = _copy_corpus(fixture_dir, tmp_path)
        _patch(corpus / "systematic_diagnoses.tsv", "250.1\t250\t", "250.1\t251\t")
        with pytest.raises(InconsistentHierarchy, match="orphan_parent"):
            load_bundle(corpus / "manifest.tsv")

    def test_entry_targeting_unknown_code_is_rejected(self, fixture_dir, tmp_path):
        corpus = _copy_corpus(fixture_dir, tmp_path)
        _patch(corpus / "alphabetical.tsv", "pre-diabete\t790.29", "pre-diabete\t790.99")
        with pytest.raises(InconsistentHierarchy, match="unresolved_target"):
            load_bundle(corpus / "manifest.tsv")

    def test_malformed_tree_line(self, fixture_dir, tmp_path):
        corpus = _copy_corpus(fixture_dir, tmp_path)
        _patch(corpus / "decision_tree.tsv", "kind=leaf\tverdict=only_pc", "kind=leaf\tverdict")
        with pytest.raises(ParseError, match="key=value"):
            load_bundle(corpus / "manifest.tsv")
