"""Command line front end: ingest, search, wizard, fixture.

The ``--json`` modes are compared byte for byte against the HTTP bodies for
the same request, which pins the two front ends to one wire format.
"""

from __future__ import annotations

import shutil

import pytest
from click.testing import CliRunner
from fastapi.testclient import TestClient

from sdocoder.cli import main
from sdocoder.ingestion import load_bundle
from sdocoder.service import create_app

DEFECTIVE_TREE = """\
# arc no=3 points nowhere
tree\troot=1
node\tid=1\tkind=predicate\tpredicate=pc_count_is_one\tyes=2\tno=3
node\tid=2\tkind=leaf\tverdict=only_pc
"""

EXPECTED_INGEST = """\
alphabetical\t26
decision_tree\t28
glossary:emergency_sei\t2
glossary:mesh\t2
glossary:other\t2
glossary:physicians\t2
glossary:rare_diseases\t2
neoplasm\t3
procedure_sets\t7
systematic\t84
total terms\t123
tree nodes\t28
"""

WIZARD_TRANSCRIPT = (
    '{"id":"ref","state":10,"message":"Indicare la condizione patologica che ha'
    ' determinato l\'intervento","type":"ask_single_code",'
    '"allowed_answers":["585.9","250.40","757.33","404.10"]}\n'
    '{"id":"ref","state":18,"message":"Identificare una o più condizioni'
    ' patologiche non correlate all\'intervento","type":"ask_multicode",'
    '"allowed_answers":["250.40","757.33","404.10"]}\n'
    '{"id":"ref","state":20,"message":"Indicare, tra le condizioni patologiche'
    ' non correlate all\'intervento, quella che ha consumato più risorse durante'
    ' il ricovero","type":"ask_single_code",'
    '"allowed_answers":["250.40","404.10"]}\n'
    '{"id":"ref","state":22,"message":"Condizione principale identificata",'
    '"type":"result","verdict":["250.40"]}\n'
)


@pytest.fixture(scope="module")
def runner():
    return CliRunner()


@pytest.fixture(scope="module")
def manifest(fixture_dir):
    return str(fixture_dir / "manifest.tsv")


class TestIngest:
    def test_counts_table(self, runner, manifest):
        result = runner.invoke(main, ["ingest", "--manifest", manifest])
        assert result.exit_code == 0
        assert result.output == EXPECTED_INGEST

    def test_manifest_from_the_environment(self, runner, manifest):
        result = runner.invoke(main, ["ingest"], env={"SDOCODER_MANIFEST": manifest})
        assert result.exit_code == 0
        assert result.output == EXPECTED_INGEST

    def test_count_mismatch_fails(self, runner, fixture_dir, tmp_path):
        corpus = tmp_path / "corpus"
        shutil.copytree(fixture_dir, corpus)
        manifest = corpus / "manifest.tsv"
        text = manifest.read_text(encoding="utf-8")
        assert "alphabetical.tsv\talphabetical\t26" in text
        manifest.write_text(
            text.replace("alphabetical.tsv\talphabetical\t26", "alphabetical.tsv\talphabetical\t27"),
            encoding="utf-8",
        )
        result = runner.invoke(main, ["ingest", "--manifest", str(manifest)])
        assert result.exit_code == 1
        assert "error:" in result.stderr
        assert "declared 27" in result.stderr

    def test_defective_tree_fails(self, runner, manifest, tmp_path):
        tree_file = tmp_path / "broken.tsv"
        tree_file.write_text(DEFECTIVE_TREE, encoding="utf-8")
        result = runner.invoke(
            main, ["ingest", "--manifest", manifest, "--tree", str(tree_file)]
        )
        assert result.exit_code == 1
        assert "tree nodes\t2" in result.output
        assert "error:" in result.stderr and "dangling_arc" in result.stderr


class TestSearch:
    def test_human_output(self, runner, manifest):
        result = runner.invoke(
            main, ["search", "diagnoses", "diabete", "mellito", "--manifest", manifest]
        )
        assert result.exit_code == 0
        lines = result.output.splitlines()
        assert lines[0] == "775.1\t20.1\tDiabete mellito neonatale"
        assert lines[1] == "250\t12.5\tDiabete mellito"
        assert lines[3].startswith("648.0\t10\t")
        assert len(lines) == 13  # 12 results + the related-terms line
        assert lines[-1].startswith("related: ")
        assert "diabete" not in lines[-1] and "mellito" not in lines[-1]

    def test_variadic_query_equals_a_joined_one(self, runner, manifest):
        split = runner.invoke(
            main, ["search", "diagnoses", "diabete", "mellito", "--manifest", manifest]
        )
        joined = runner.invoke(
            main, ["search", "diagnoses", "diabete mellito", "--manifest", manifest]
        )
        assert split.output == joined.output

    def test_json_matches_the_http_body(self, runner, manifest, bundle):
        result = runner.invoke(
            main,
            ["search", "diagnoses", "diabete", "mellito", "--json", "--manifest", manifest],
        )
        assert result.exit_code == 0
        app = create_app(bundle=bundle)
        with TestClient(app) as client:
            response = client.get(
                "/v1/diagnoses/search", params={"q": "diabete mellito"}
            )
        assert result.output.rstrip("\n") == response.text

    def test_json_respects_the_limit(self, runner, manifest, bundle):
        result = runner.invoke(
            main,
            ["search", "procedures", "biopsia", "--json", "--limit", "2", "--manifest", manifest],
        )
        app = create_app(bundle=bundle)
        with TestClient(app) as client:
            response = client.get(
                "/v1/procedures/search", params={"q": "biopsia", "limit": 2}
            )
        assert result.output.rstrip("\n") == response.text

    def test_empty_query_fails(self, runner, manifest):
        result = runner.invoke(main, ["search", "diagnoses", "e", "--manifest", manifest])
        assert result.exit_code == 1
        assert result.stderr.startswith("error: query")

    def test_unknown_section_fails(self, runner, manifest):
        result = runner.invoke(main, ["search", "files", "diabete", "--manifest", manifest])
        assert result.exit_code == 1
        assert "unknown section" in result.stderr


class TestWizard:
    def test_scripted_transcript_is_byte_stable(self, runner, manifest, tmp_path):
        answers = tmp_path / "answers.txt"
        answers.write_text(
            "# surgery flow\n585.9\n250.40, 404.10\n\n250.40\n", encoding="utf-8"
        )
        result = runner.invoke(
            main,
            [
                "wizard",
                "--pc", "585.9,250.40,757.33,404.10",
                "--pi", "89.52,00.25",
                "--pi", "48.24,55.24",
                "--manifest", manifest,
                "--answers-file", str(answers),
                "--session-id", "ref",
            ],
        )
        assert result.exit_code == 0
        assert result.output == WIZARD_TRANSCRIPT

    def test_interactive_answers_reach_the_same_verdict(self, runner, manifest):
        result = runner.invoke(
            main,
            [
                "wizard",
                "--pc", "585.9,250.40,757.33,404.10",
                "--pi", "55.24",
                "--manifest", manifest,
                "--session-id", "ref",
            ],
            input="585.9\n250.40,404.10\n250.40\n",
        )
        assert result.exit_code == 0
        assert result.output.splitlines()[-1].endswith('"verdict":["250.40"]}')

    def test_interactive_rejection_reprompts(self, runner, manifest):
        result = runner.invoke(
            main,
            [
                "wizard",
                "--pc", "585.9,250.40",
                "--manifest", manifest,
                "--session-id", "ref",
            ],
            input="maybe\nNO\n250.40\n",
        )
        assert result.exit_code == 0
        assert result.stderr == "error: expected YES or NO, got 'maybe'\n"
        assert result.output.splitlines()[-1].endswith('"verdict":["250.40"]}')

    def test_scripted_rejection_fails(self, runner, manifest, tmp_path):
        answers = tmp_path / "answers.txt"
        answers.write_text("585.9\n999\n", encoding="utf-8")
        result = runner.invoke(
            main,
            [
                "wizard",
                "--pc", "585.9,250.40",
                "--pi", "55.24",
                "--manifest", manifest,
                "--answers-file", str(answers),
            ],
        )
        assert result.exit_code == 1
        assert result.stderr == (
            "error: step 2: answer '999' is not among the allowed codes\n"
        )

    def test_scripted_answers_can_run_out(self, runner, manifest, tmp_path):
        answers = tmp_path / "answers.txt"
        answers.write_text("585.9\n", encoding="utf-8")
        result = runner.invoke(
            main,
            [
                "wizard",
                "--pc", "585.9,250.40",
                "--pi", "55.24",
                "--manifest", manifest,
                "--answers-file", str(answers),
            ],
        )
        assert result.exit_code == 1
        assert result.stderr == "error: no scripted answer for step 2\n"

    def test_unknown_code_fails_before_any_output(self, runner, manifest):
        result = runner.invoke(
            main, ["wizard", "--pc", "999.9", "--manifest", manifest]
        )
        assert result.exit_code == 1
        assert result.stdout == ""
        assert result.stderr == "error: unknown diagnosis code 999.9\n"


class TestFixture:
    def test_writes_a_loadable_corpus(self, runner, tmp_path):
        target = tmp_path / "corpus"
        result = runner.invoke(main, ["fixture", str(target)])
        assert result.exit_code == 0
        manifest = result.output.strip()
        assert manifest == str(target / "manifest.tsv")
        bundle = load_bundle(manifest)
        assert bundle.kb.total_terms() == 123
