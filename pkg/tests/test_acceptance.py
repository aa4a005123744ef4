"""Acceptance gate: one test per shipped guarantee.

Each test checks one externally visible promise end to end and prints one
``PASS`` line (visible with ``pytest -s``); ``pytest -v`` shows the same
per-guarantee verdicts. Timed guarantees measure wall-clock time on the spot.
"""

from __future__ import annotations

import dataclasses
import random
import shutil
import time

import pytest

from drivers import (
    VOCAB,
    random_episode,
    random_mini_kb,
    random_query_text,
    replay_session,
    walk_session,
)
from oracles import (
    enumerate_attributes,
    naive_autocomplete,
    prepare_attributes,
    recount_related,
    scan_prepared,
)
from sdocoder.analysis import tokenize
from sdocoder.engine import DecisionEngine, SessionStatus
from sdocoder.errors import CountMismatch, InconsistentHierarchy
from sdocoder.index import Query, SearchIndex
from sdocoder.ingestion import load_bundle
from sdocoder.model import (
    ClassNode,
    EntrySource,
    EntryTerm,
    Glossary,
    GlossaryTerm,
    KnowledgeBase,
    Level,
    MappingQuality,
    ProcedureClass,
    Section,
)
from sdocoder.rules import AlertKind, validate_selection
from sdocoder.tree import DecisionTree, Rule, validate_tree

REFERENCE_PC = ["585.9", "250.40", "757.33", "404.10"]
REFERENCE_PI = ["89.52", "00.25", "48.24", "55.24"]


def _report(line: str) -> None:
    print(f"PASS {line}")


def _codes(index: SearchIndex, text: str, section=Section.DIAGNOSES) -> list[str]:
    query = Query.from_text(text, section, limit=10_000)
    return [result.code for result in index.search(query)]


class TestSearchReplay:
    def test_01_reference_query_suggestions_and_order(self, kb, index):
        started = time.perf_counter()

        results = index.search(Query.from_text("diabete mellito", Section.DIAGNOSES))
        codes = [r.code for r in results]
        assert {"775.1", "648.0", "648.8", "250.1", "250"} <= set(codes)

        prepared = prepare_attributes(kb, Section.DIAGNOSES)
        expected = scan_prepared(prepared, ["diabete", "mellito"])
        assert [(r.code, r.score) for r in results] == [(c, s) for c, s, _ in expected]

        query = Query.from_text("diabete", Section.DIAGNOSES)
        related = index.related_terms(query, index.search(query))
        assert "mellito" in [term.token for term in related]

        suggestions = index.autocomplete("diabete", Section.DIAGNOSES)
        assert "pre-diabete" in suggestions
        assert "diabete-nanismo-obesità" in suggestions

        elapsed = time.perf_counter() - started
        assert elapsed < 1.0
        _report(
            "reference diagnosis query: expected codes present, order matches the"
            f" full-scan oracle, related/autocomplete suggestions found ({elapsed:.3f}s)"
        )

    def test_02_reference_episode_transcript(self, engine):
        started = time.perf_counter()

        session, interaction = engine.start_session(
            REFERENCE_PC, REFERENCE_PI, session_id="acceptance"
        )
        assert interaction.message == (
            "Indicare la condizione patologica che ha determinato l'intervento"
        )
        assert interaction.allowed_answers == tuple(REFERENCE_PC)

        transcript = [interaction.to_json()]
        for node_id, answer in [
            (10, "585.9"),
            (18, ["250.40", "404.10"]),
            (20, "250.40"),
        ]:
            session, interaction = engine.answer(session, node_id, answer)
            transcript.append(interaction.to_json())

        assert session.status is SessionStatus.FINISHED
        assert set(session.verdict) <= set(REFERENCE_PC)
        assert transcript == [
            '{"id":"acceptance","state":10,"message":"Indicare la condizione'
            ' patologica che ha determinato l\'intervento",'
            '"type":"ask_single_code",'
            '"allowed_answers":["585.9","250.40","757.33","404.10"]}',
            '{"id":"acceptance","state":18,"message":"Identificare una o più'
            ' condizioni patologiche non correlate all\'intervento",'
            '"type":"ask_multicode","allowed_answers":["250.40","757.33","404.10"]}',
            '{"id":"acceptance","state":20,"message":"Indicare, tra le condizioni'
            ' patologiche non correlate all\'intervento, quella che ha consumato'
            ' più risorse durante il ricovero","type":"ask_single_code",'
            '"allowed_answers":["250.40","404.10"]}',
            '{"id":"acceptance","state":22,"message":"Condizione principale'
            ' identificata","type":"result","verdict":["250.40"]}',
        ]

        elapsed = time.perf_counter() - started
        assert elapsed < 1.0
        _report(
            "reference episode: expected first question, byte-stable transcript,"
            f" verdict within the supplied conditions ({elapsed:.3f}s)"
        )


class TestSearchProperties:
    def test_03_search_equals_the_full_scan_oracle(self):
        started = time.perf_counter()
        rng = random.Random(32003)
        kbs = queries = 0
        for _ in range(200):
            kb = random_mini_kb(rng, max_classes=500)
            index = SearchIndex(kb)
            prepared = prepare_attributes(kb, Section.DIAGNOSES)
            kbs += 1
            for _ in range(50):
                terms = tuple(tokenize(random_query_text(rng)))
                if not terms:
                    continue
                queries += 1
                expected = scan_prepared(prepared, terms)
                got = index.search(
                    Query(terms=terms, section=Section.DIAGNOSES, limit=10_000)
                )
                assert [(r.code, r.score) for r in got] == [
                    (c, s) for c, s, _ in expected
                ], terms
                assert [
                    [(a.kind, a.weight) for a in r.matched_attributes] for r in got
                ] == [m for _, _, m in expected], terms
        elapsed = time.perf_counter() - started
        assert elapsed < 60.0
        _report(
            f"search equals the naive full scan on {kbs} random knowledge bases"
            f" / {queries} queries, match set and order ({elapsed:.1f}s)"
        )

    def test_04_extending_a_query_only_narrows_it(self, kb, index):
        rng = random.Random(32004)
        tokens = sorted(
            {
                token
                for _, _, text in enumerate_attributes(kb, Section.DIAGNOSES)
                for token in tokenize(text)
            }
        )
        checked = 0
        for _ in range(1000):
            base = rng.sample(tokens, rng.randint(1, 2))
            extension = rng.choice(tokens)
            narrow = set(_codes(index, " ".join(base + [extension])))
            wide = set(_codes(index, " ".join(base)))
            assert narrow <= wide, (base, extension)
            checked += 1
        _report(
            f"adding a term never widens the result set ({checked} random"
            " query/extension pairs)"
        )

    def test_05_related_terms_match_an_independent_recount(self, kb, index):
        rng = random.Random(32005)
        checked = 0
        for _ in range(100):
            text = random_query_text(rng) if rng.random() < 0.5 else rng.choice(VOCAB)
            terms = tuple(tokenize(text))
            if not terms:
                continue
            query = Query(terms=terms, section=Section.DIAGNOSES, limit=10_000)
            results = index.search(query)
            related = index.related_terms(query, results)
            expected = recount_related(
                kb, Section.DIAGNOSES, [r.code for r in results], terms
            )
            assert [(t.token, t.occurrence_count) for t in related] == expected, terms
            checked += 1
        _report(f"related-term counts equal the independent recount ({checked} queries)")

    def test_06_attribute_weights_are_honored(self, index):
        results = index.search(Query.from_text("cardiomegalia", Section.DIAGNOSES))
        assert [(r.code, r.score) for r in results] == [("404.10", 10.0)]

        results = index.search(Query.from_text("pancreatite", Section.DIAGNOSES))
        assert [(r.code, r.score) for r in results] == [("250.4", 0.1)]

        results = index.search(Query.from_text("glicometaboliche", Section.DIAGNOSES))
        assert [(r.code, r.score) for r in results] == [("250", 0.0)]

        _report(
            "weight table honored: main title 10.0, indented entry term 0.1,"
            " zero-weight glossary still matches at 0.0"
        )


def _mutate_tree(rng: random.Random, tree: DecisionTree) -> tuple[str, DecisionTree]:
    """One random defect-injecting mutation: arc retarget, deletion or typo."""
    kind = rng.choice(("arc_swap", "node_deletion", "predicate_typo"))
    records = list(tree.records)
    if kind == "arc_swap":
        # Point an arc back at one of the node's ancestors: a guaranteed cycle.
        reaches: dict[int, set[int]] = {}

        def reachable(start: int) -> set[int]:
            if start not in reaches:
                reaches[start] = {start}
                for succ in tree.nodes[start].successors():
                    reaches[start] |= reachable(succ)
            return reaches[start]

        candidates = [
            (node, ancestor.id)
            for node in records
            if node.successors()
            for ancestor in records
            if node.id in reachable(ancestor.id)
        ]
        victim, target = rng.choice(candidates)
        arc = "yes" if victim.yes is not None else ("no" if victim.no is not None else "next")
        mutated = dataclasses.replace(victim, **{arc: target})
        records[records.index(victim)] = mutated
    elif kind == "node_deletion":
        victim = rng.choice(records)
        records.remove(victim)
    else:
        rules = [
            (node, field)
            for node in records
            for field in ("predicate", "answers", "verdict")
            if getattr(node, field) is not None
        ]
        victim, field = rng.choice(rules)
        rule: Rule = getattr(victim, field)
        mutated = dataclasses.replace(
            victim, **{field: Rule(name=rule.name + "_x", arg=rule.arg)}
        )
        records[records.index(victim)] = mutated
    return kind, DecisionTree(root=tree.root, records=records)


class TestTreeGuarantees:
    def test_07_validator_accepts_the_shipped_tree_and_catches_mutants(self, bundle):
        assert validate_tree(bundle.tree) == []

        rng = random.Random(32007)
        caught: dict[str, int] = {}
        for _ in range(100):
            kind, mutant = _mutate_tree(rng, bundle.tree)
            defects = validate_tree(mutant)
            assert defects, f"{kind} mutant produced no defect"
            caught[kind] = caught.get(kind, 0) + 1
        assert set(caught) == {"arc_swap", "node_deletion", "predicate_typo"}
        summary = ", ".join(f"{k} ×{v}" for k, v in sorted(caught.items()))
        _report(f"shipped tree validates clean; 100 mutants all rejected ({summary})")

    def test_08_sessions_terminate_and_replay_identically(self, engine):
        rng = random.Random(32008)
        budget = len(engine.tree.nodes)
        for i in range(1000):
            pc, pi = random_episode(rng, engine)
            session, transcript, answers = walk_session(
                engine, pc, pi, rng, session_id=f"a{i}"
            )
            assert session.status is SessionStatus.FINISHED
            assert len(transcript) <= budget
            assert session.verdict and set(session.verdict) <= set(pc)
            replayed, transcript2 = replay_session(
                engine, pc, pi, answers, session_id=f"a{i}"
            )
            assert [t.to_json() for t in transcript2] == [
                t.to_json() for t in transcript
            ]
            assert replayed.verdict == session.verdict
        _report(
            "1000 random sessions all finished within the node budget with"
            " verdict ⊆ pc and replayed byte-identically"
        )

    def test_09_residual_procedures_never_steer_the_flow(self, engine):
        rng = random.Random(32009)
        residual = sorted(
            code
            for code, klass in engine.procedure_sets.items()
            if klass is ProcedureClass.RESIDUAL_NONRELEVANT
        )
        assert residual, "fixture must classify some procedures as residual"
        for i in range(200):
            pc, pi = random_episode(rng, engine)
            stripped = [
                code
                for code in pi
                if engine.procedure_sets[code] is not ProcedureClass.RESIDUAL_NONRELEVANT
            ]
            extended = stripped + rng.sample(residual, rng.randint(1, len(residual)))
            session, transcript, answers = walk_session(
                engine, pc, stripped, rng, session_id=f"p{i}"
            )
            _, transcript2 = replay_session(
                engine, pc, extended, answers, session_id=f"p{i}"
            )
            assert [t.state for t in transcript2] == [t.state for t in transcript]
            assert [t.message for t in transcript2] == [t.message for t in transcript]
            assert [t.allowed_answers for t in transcript2] == [
                t.allowed_answers for t in transcript
            ]
        _report(
            "adding/removing residual procedures left 200 random question"
            " sequences unchanged"
        )


class TestRuleGuarantees:
    def test_10_selection_alerts(self, kb):
        alerts = validate_selection(kb, Section.DIAGNOSES, "250")
        assert [a.kind for a in alerts] == [AlertKind.NOT_LEAF]

        assert validate_selection(kb, Section.DIAGNOSES, "648.00") == []

        pairs = 0
        for section in Section:
            nodes = kb.nodes(section)
            for code, node in nodes.items():
                for exclusion in node.exclusions:
                    for ref in exclusion.referenced_codes:
                        if ref not in nodes:
                            continue
                        pairs += 1
                        forward = validate_selection(
                            kb, section, code, already_selected=(ref,)
                        )
                        backward = validate_selection(
                            kb, section, ref, already_selected=(code,)
                        )
                        assert any(
                            a.kind is AlertKind.EXCLUSION_CONFLICT for a in forward
                        ), (code, ref)
                        assert any(
                            a.kind is AlertKind.EXCLUSION_CONFLICT for a in backward
                        ), (ref, code)
        assert pairs > 0
        _report(
            "non-leaf selection alerts fire, leaves stay clean, exclusion"
            f" conflicts are symmetric over all {pairs} referenced pairs"
        )


class TestIngestionGuarantees:
    def test_11_loaded_counts_match_and_faults_are_detected(self, fixture_dir, bundle, tmp_path):
        declared: dict[str, int] = {}
        for line in (fixture_dir / "manifest.tsv").read_text(encoding="utf-8").splitlines():
            if line.startswith("#") or not line.strip():
                continue
            _, kind, count = line.split("\t")
            declared[kind] = declared.get(kind, 0) + int(count)
        assert bundle.counts == declared
        assert bundle.kb.validate_hierarchy() == []

        faults = [
            (
                "manifest.tsv",
                "alphabetical.tsv\talphabetical\t26",
                "alphabetical.tsv\talphabetical\t27",
                CountMismatch,
            ),
            (
                "systematic_diagnoses.tsv",
                "250.1\t250\t",
                "250.1\t251\t",
                InconsistentHierarchy,
            ),
            (
                "alphabetical.tsv",
                "pre-diabete\t790.29",
                "pre-diabete\t790.99",
                InconsistentHierarchy,
            ),
        ]
        for i, (name, old, new, expected) in enumerate(faults):
            corpus = tmp_path / f"fault{i}"
            shutil.copytree(fixture_dir, corpus)
            path = corpus / name
            text = path.read_text(encoding="utf-8")
            assert old in text
            path.write_text(text.replace(old, new), encoding="utf-8")
            with pytest.raises(expected):
                load_bundle(corpus / "manifest.tsv")
        _report(
            "fixture loads with exactly the declared per-source counts, clean"
            f" hierarchy; all {len(faults)} injected faults detected"
        )


class TestScale:
    def test_12_full_scale_knowledge_base_searches_quickly(self):
        rng = random.Random(32012)
        syllables = ["ca", "re", "mi", "to", "la", "si", "ne", "va", "do", "pe", "gu", "ro"]
        vocab = sorted(
            {
                "".join(rng.choice(syllables) for _ in range(rng.randint(2, 4)))
                for _ in range(1500)
            }
        )

        def text(words: int) -> str:
            return " ".join(rng.choice(vocab) for _ in range(words))

        n_classes, n_entries, n_glossary = 30_000, 190_000, 85_000
        nodes = [
            ClassNode(
                code=str(100_000 + i),
                title=text(3),
                section=Section.DIAGNOSES,
                level=Level.CATEGORY,
            )
            for i in range(n_classes)
        ]
        entries = [
            EntryTerm(
                text=text(2),
                target_code=nodes[rng.randrange(n_classes)].code,
                indentation=rng.randint(0, 3),
                source=EntrySource.ALPHABETICAL_INDEX,
                section=Section.DIAGNOSES,
            )
            for _ in range(n_entries)
        ]
        glossary = [
            GlossaryTerm(
                text=text(2),
                target_code=nodes[rng.randrange(n_classes)].code,
                glossary=Glossary.MESH,
                mapping_quality=MappingQuality.APPROXIMATE,
                section=Section.DIAGNOSES,
            )
            for _ in range(n_glossary)
        ]
        kb = KnowledgeBase(
            nodes,
            entries,
            glossary,
            provenance={
                "synthetic:systematic": n_classes,
                "synthetic:alphabetical": n_entries,
                "synthetic:glossary": n_glossary,
            },
        )
        assert kb.total_terms() >= 300_000

        built = time.perf_counter()
        index = SearchIndex(kb)
        build_time = time.perf_counter() - built

        timings = []
        for _ in range(50):
            query = Query.from_text(text(rng.randint(1, 2)), Section.DIAGNOSES)
            started = time.perf_counter()
            index.search(query)
            timings.append(time.perf_counter() - started)
        worst = max(timings)
        assert worst < 0.1, f"slowest query took {worst * 1000:.1f} ms"
        _report(
            f"{kb.total_terms():,}-term knowledge base indexed in {build_time:.1f}s;"
            f" slowest of 50 searches {worst * 1000:.1f} ms"
        )
