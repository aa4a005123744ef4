"""Built-in demonstration corpus.

A small but complete build: both classification sections, the alphabetical
index, the neoplasm table, all five glossaries, the procedure-set table and
the full decision tree, written in exactly the file formats a production
build uses. Large enough to exercise every code path (multi-level
hierarchies, cross-references, notes, physiological codes, every tree node
kind), small enough to read in one sitting.

``build_fixture`` writes the corpus to a directory; a pre-built copy ships
inside the package under ``data/fixture`` for the CLI and the service.
"""

from __future__ import annotations

from importlib import resources
from pathlib import Path

from .ingestion import (
    ENTRY_COLUMNS,
    GLOSSARY_COLUMNS,
    PROCEDURE_SET_COLUMNS,
    SYSTEMATIC_COLUMNS,
)


def _row(code, parent, level, title, add=(), inc=(), exc=(), notes=(), flags=""):
    return (
        code,
        parent,
        level,
        title,
        "||".join(add),
        "||".join(inc),
        "||".join(exc),
        "||".join(notes),
        flags,
    )


DIAGNOSES = [
    # chapters
    _row("1", "", "chapter", "Tumori"),
    _row("2", "", "chapter", "Malattie endocrine, nutrizionali, metaboliche e disturbi immunitari"),
    _row("3", "", "chapter", "Malattie del sistema nervoso e degli organi di senso"),
    _row("4", "", "chapter", "Malattie del sistema circolatorio"),
    _row("5", "", "chapter", "Malattie dell'apparato genitourinario"),
    _row("6", "", "chapter", "Complicazioni della gravidanza, del parto e del puerperio"),
    _row("75", "", "chapter", "Malformazioni congenite"),
    _row("77", "", "chapter", "Alcune condizioni morbose di origine perinatale"),
    _row("79", "", "chapter", "Sintomi, segni e stati morbosi maldefiniti"),
    _row(
        "V",
        "",
        "chapter",
        "Classificazione supplementare dei fattori che influenzano lo stato di salute"
        " e il ricorso ai servizi sanitari",
    ),
    _row(
        "E",
        "",
        "chapter",
        "Classificazione supplementare delle cause esterne di traumatismo e avvelenamento",
    ),
    # blocks
    _row("19", "1", "block", "Tumori maligni di altre sedi e di sedi non specificate"),
    _row("25", "2", "block", "Malattie di altre ghiandole endocrine"),
    _row("36", "3", "block", "Disturbi dell'occhio e degli annessi oculari"),
    _row("40", "4", "block", "Malattie ipertensive"),
    _row("58", "5", "block", "Nefrite, sindrome nefrosica e nefrosi"),
    _row("64", "6", "block", "Complicazioni principalmente legate alla gravidanza"),
    _row(
        "65",
        "6",
        "block",
        "Parto normale e altre indicazioni per l'assistenza in gravidanza, travaglio e parto",
    ),
    # categories
    _row("193", "19", "category", "Tumore maligno della tiroide"),
    _row(
        "250",
        "25",
        "category",
        "Diabete mellito",
        exc=("diabete gestazionale (648.8)", "diabete mellito neonatale"),
    ),
    _row("258", "25", "category", "Disfunzione poliendocrina e malattie correlate"),
    _row("362", "36", "category", "Altri disturbi della retina"),
    _row(
        "404",
        "40",
        "category",
        "Cardionefropatia ipertensiva",
        notes=(
            "use_additional_code:Utilizzare un codice aggiuntivo per identificare lo"
            " stadio della malattia renale cronica (585.6, 585.9)",
        ),
    ),
    _row(
        "585",
        "58",
        "category",
        "Malattia renale cronica",
        add=("Insufficienza renale cronica",),
    ),
    _row(
        "648",
        "64",
        "category",
        "Altre condizioni correnti della madre classificabili altrove, ma complicanti"
        " la gravidanza, il parto e il puerperio",
        notes=("use_additional_code:Utilizzare codici aggiuntivi per identificare la condizione",),
    ),
    _row(
        "650",
        "65",
        "category",
        "Parto in condizioni del tutto normali",
        inc=("parto spontaneo cefalico, senza menzione di manipolazione",),
        flags="physiological",
    ),
    _row("757", "75", "category", "Anomalie congenite dei tegumenti"),
    _row("775", "77", "category", "Disturbi endocrini e metabolici specifici del feto e del neonato"),
    _row("790", "79", "category", "Reperti anormali non specifici all'esame del sangue"),
    _row("V22", "V", "category", "Gravidanza normale", flags="physiological"),
    _row("E870", "E", "category", "Complicazioni accidentali durante cure mediche e chirurgiche"),
    # subcategories
    _row(
        "250.1",
        "250",
        "subcategory",
        "Diabete con chetoacidosi",
        add=(
            "Acidosi diabetica senza menzione di coma",
            "Chetosi diabetica senza menzione di coma",
        ),
    ),
    _row(
        "250.4",
        "250",
        "subcategory",
        "Diabete con complicazioni renali",
        notes=(
            "use_additional_code:Utilizzare un codice aggiuntivo per identificare la"
            " manifestazione: malattia renale cronica (585.6, 585.9)",
        ),
    ),
    _row(
        "250.5",
        "250",
        "subcategory",
        "Diabete con complicazioni oculari",
        notes=(
            "use_additional_code:Utilizzare un codice aggiuntivo per identificare la"
            " manifestazione: retinopatia diabetica (362.01)",
        ),
    ),
    _row(
        "258.1",
        "258",
        "subcategory",
        "Altre combinazioni di disfunzione endocrina",
        inc=("sindrome diabete-nanismo-obesità",),
    ),
    _row(
        "362.0",
        "362",
        "subcategory",
        "Retinopatia diabetica",
        notes=("code_basic_disease_first:Codificare prima la malattia di base (250.5)",),
    ),
    _row("404.1", "404", "subcategory", "Cardionefropatia ipertensiva benigna"),
    _row(
        "585.6",
        "585",
        "subcategory",
        "Malattia renale allo stadio terminale",
        inc=("malattia renale cronica che richiede dialisi cronica",),
    ),
    _row("585.9", "585", "subcategory", "Malattia renale cronica, non specificata"),
    _row(
        "648.0",
        "648",
        "subcategory",
        "Diabete mellito",
        exc=("diabete gestazionale (648.8)",),
        notes=(
            "use_additional_code:Utilizzare un codice aggiuntivo per identificare il"
            " tipo di diabete",
        ),
    ),
    _row(
        "648.8",
        "648",
        "subcategory",
        "Alterata tolleranza al glucosio",
        add=("Diabete gestazionale",),
        inc=("diabete che insorge in gravidanza",),
    ),
    _row("757.3", "757", "subcategory", "Altre anomalie specificate della cute"),
    _row(
        "775.1",
        "775",
        "subcategory",
        "Diabete mellito neonatale",
        add=("Sindrome del diabete mellito neonatale",),
        inc=("diabete mellito del neonato",),
        exc=("diabete gestazionale (648.8)",),
    ),
    _row("790.2", "790", "subcategory", "Glicemia anormale"),
    _row("V22.0", "V22", "subcategory", "Supervisione di prima gravidanza normale", flags="physiological"),
    _row("V22.1", "V22", "subcategory", "Supervisione di altra gravidanza normale", flags="physiological"),
    _row("V22.2", "V22", "subcategory", "Stato di gravidanza, incidentale", flags="physiological"),
    _row(
        "E870.8",
        "E870",
        "subcategory",
        "Complicazioni accidentali durante altre procedure specificate",
    ),
    # subclassifications
    _row(
        "250.40",
        "250.4",
        "subclassification",
        "Diabete tipo II o non specificato, non definito se scompensato, con complicazioni renali",
        notes=(
            "use_additional_code:Utilizzare un codice aggiuntivo per identificare la"
            " manifestazione: malattia renale cronica (585.6, 585.9)",
        ),
    ),
    _row(
        "250.41",
        "250.4",
        "subclassification",
        "Diabete tipo I [diabete giovanile], non definito se scompensato, con complicazioni renali",
        notes=(
            "use_additional_code:Utilizzare un codice aggiuntivo per identificare la"
            " manifestazione: malattia renale cronica (585.6, 585.9)",
        ),
    ),
    _row(
        "250.50",
        "250.5",
        "subclassification",
        "Diabete tipo II o non specificato, non definito se scompensato, con complicazioni oculari",
        notes=(
            "use_additional_code:Utilizzare un codice aggiuntivo per identificare la"
            " manifestazione: retinopatia diabetica (362.01)",
        ),
    ),
    _row(
        "250.51",
        "250.5",
        "subclassification",
        "Diabete tipo I [diabete giovanile], non definito se scompensato, con complicazioni oculari",
        notes=(
            "use_additional_code:Utilizzare un codice aggiuntivo per identificare la"
            " manifestazione: retinopatia diabetica (362.01)",
        ),
    ),
    _row(
        "362.01",
        "362.0",
        "subclassification",
        "Retinopatia diabetica di fondo",
        notes=("code_basic_disease_first:Codificare prima il diabete (250.5)",),
    ),
    _row(
        "362.02",
        "362.0",
        "subclassification",
        "Retinopatia diabetica proliferativa",
        notes=("code_basic_disease_first:Codificare prima il diabete (250.5)",),
    ),
    _row(
        "404.10",
        "404.1",
        "subclassification",
        "Cardiomegalia ipertensiva benigna senza insufficienza cardiaca e con patologia"
        " renale cronica dallo stadio I allo stadio IV, o non specificato",
        notes=(
            "use_additional_code:Utilizzare un codice aggiuntivo per identificare lo"
            " stadio della malattia renale cronica (585.9)",
        ),
    ),
    _row(
        "404.11",
        "404.1",
        "subclassification",
        "Cardionefropatia ipertensiva benigna con insufficienza cardiaca",
    ),
    _row("757.32", "757.3", "subclassification", "Amartomi vascolari", add=("Voglie",)),
    _row("757.33", "757.3", "subclassification", "Anomalie cutanee del pigmento, congenite"),
    _row("790.21", "790.2", "subclassification", "Alterata glicemia a digiuno"),
    _row("790.29", "790.2", "subclassification", "Altre anomalie della tolleranza al glucosio"),
    _row(
        "648.00",
        "648.0",
        "subclassification",
        "Diabete mellito, episodio di cura non specificato",
    ),
    _row(
        "648.01",
        "648.0",
        "subclassification",
        "Diabete mellito, con parto, con o senza menzione della condizione antepartum",
    ),
    _row(
        "648.02",
        "648.0",
        "subclassification",
        "Diabete mellito, con parto, con menzione della complicazione postpartum",
    ),
    _row(
        "648.03",
        "648.0",
        "subclassification",
        "Diabete mellito, condizione o complicazione antepartum",
    ),
    _row(
        "648.04",
        "648.0",
        "subclassification",
        "Diabete mellito, condizione o complicazione postpartum",
    ),
]

PROCEDURES = [
    _row("0", "", "chapter", "Procedure ed interventi, non classificati altrove"),
    _row("4", "", "chapter", "Interventi sull'apparato digerente"),
    _row("5", "", "chapter", "Interventi sull'apparato urinario"),
    _row("8", "", "chapter", "Miscellanea di procedure diagnostiche e terapeutiche"),
    _row("00", "0", "category", "Procedure ed interventi non classificati altrove"),
    _row("48", "4", "category", "Interventi su retto, rettosigmoide e tessuto perirettale"),
    _row("55", "5", "category", "Interventi sul rene"),
    _row("89", "8", "category", "Colloquio, valutazione, consulenza ed esame"),
    _row("00.2", "00", "subcategory", "Imaging intravascolare", add=("Ecografia intravascolare",)),
    _row(
        "48.2",
        "48",
        "subcategory",
        "Procedure diagnostiche su retto, rettosigmoide e tessuto perirettale",
    ),
    _row("55.2", "55", "subcategory", "Procedure diagnostiche sul rene"),
    _row("89.5", "89", "subcategory", "Altri esami non chirurgici"),
    _row(
        "00.25",
        "00.2",
        "subclassification",
        "Imaging intravascolare dei vasi renali",
        inc=("ecografia intravascolare dei vasi renali",),
    ),
    _row("48.23", "48.2", "subclassification", "Proctosigmoidoscopia rigida"),
    _row("48.24", "48.2", "subclassification", "Biopsia [endoscopica] del retto"),
    _row(
        "55.23",
        "55.2",
        "subclassification",
        "Biopsia renale chiusa [percutanea]",
        add=("Agobiopsia del rene",),
    ),
    _row("55.24", "55.2", "subclassification", "Biopsia renale a cielo aperto"),
    _row(
        "89.51",
        "89.5",
        "subclassification",
        "Ritmocardiogramma",
        inc=("tracciato del ritmo cardiaco",),
    ),
    _row(
        "89.52",
        "89.5",
        "subclassification",
        "Elettrocardiogramma",
        add=("ECG",),
        inc=("ECG con 12 o più derivazioni",),
    ),
]

# (text, target code, indentation); the target's section is resolved at load
ALPHABETICAL = [
    ("diabete mellito", "250", 0),
    ("diabete mellito con chetoacidosi", "250.1", 1),
    ("diabete mellito con complicazioni renali", "250.4", 1),
    ("diabete gestazionale", "648.8", 1),
    ("diabete mellito gestazionale", "648.8", 1),
    ("diabete mellito neonatale", "775.1", 1),
    ("diabete mellito materno, con parto", "648.01", 2),
    ("diabete mellito secondario a pancreatite", "250.4", 2),
    ("pre-diabete", "790.29", 0),
    ("diabete-nanismo-obesità", "258.1", 0),
    ("alterata tolleranza al glucosio in gravidanza", "648.8", 1),
    ("malattia renale cronica", "585", 0),
    ("insufficienza renale cronica", "585.9", 1),
    ("nefropatia ipertensiva", "404", 0),
    ("anomalie congenite della cute", "757", 0),
    ("macchie cutanee congenite", "757.33", 1),
    ("gravidanza normale", "V22", 0),
    ("parto normale", "650", 0),
    ("tumore maligno della tiroide", "193", 0),
    ("elettrocardiogramma", "89.52", 0),
    ("ecg", "89.52", 1),
    ("biopsia del retto", "48.24", 1),
    ("biopsia del rene", "55.23", 1),
    ("biopsia del rene a cielo aperto", "55.24", 2),
    ("imaging intravascolare", "00.2", 0),
    ("imaging intravascolare dei vasi renali", "00.25", 1),
]

NEOPLASM = [
    ("carcinoma della tiroide", "193", 0),
    ("carcinoma papillare della tiroide", "193", 1),
    ("adenocarcinoma tiroideo", "193", 1),
]

# glossary name -> (text, target code, mapping quality)
GLOSSARIES = {
    "physicians": [
        ("diabete scompensato", "250", "approximate"),
        ("rene grinzo", "585.9", "approximate"),
    ],
    "rare_diseases": [
        ("sindrome di Wolfram", "250.4", "approximate"),
        ("diabete neonatale permanente", "775.1", "approximate"),
    ],
    "emergency_sei": [
        ("crisi iperglicemica", "790.29", "approximate"),
        ("scompenso diabetico acuto", "250.1", "approximate"),
    ],
    "mesh": [
        ("diabete mellito di tipo 2", "250.40", "exact"),
        ("elettrocardiografia", "89.52", "exact"),
    ],
    "other": [
        ("turbe glicometaboliche", "250", "approximate"),
        ("squilibrio glicemico", "790.2", "approximate"),
    ],
}

PROCEDURE_SETS = [
    ("55.24", "relevant"),
    ("00.25", "selected_nonrelevant"),
    ("48.23", "selected_nonrelevant"),
    ("48.24", "selected_nonrelevant"),
    ("55.23", "selected_nonrelevant"),
    ("89.51", "residual"),
    ("89.52", "residual"),
]

# The interview flow. Nodes tagged origin=codified carry wording taken from
# the coding manual's published flow; origin=reconstructed marks connective
# logic reconstructed around them.
_TREE_RECORDS = [
    ["tree", "root=1"],
    ["node", "id=1", "kind=predicate", "predicate=pc_count_is_one", "yes=2", "no=3",
     "origin=reconstructed"],
    ["node", "id=2", "kind=leaf", "verdict=only_pc", "origin=reconstructed"],
    ["node", "id=3", "kind=predicate", "predicate=any_pc_in_chapter(6)", "yes=4", "no=5",
     "origin=reconstructed"],
    ["node", "id=4", "kind=predicate", "predicate=any_pathological_pc_in_chapter(6)",
     "yes=42", "no=44", "origin=reconstructed"],
    ["node", "id=42", "kind=predicate", "predicate=exactly_one_pathological_pc_in_chapter(6)",
     "yes=43", "no=40", "origin=reconstructed"],
    ["node", "id=43", "kind=leaf", "verdict=pathological_pc_in_chapter(6)",
     "origin=reconstructed"],
    ["node", "id=44", "kind=leaf", "verdict=pc_in_chapter(6)", "origin=reconstructed"],
    ["node", "id=40", "kind=ask_single_code",
     "message=Indicare la condizione ostetrica principale",
     "answers=pathological_pc_in_chapter(6)", "next=45", "origin=reconstructed"],
    ["node", "id=45", "kind=leaf", "verdict=answered(40)", "origin=reconstructed"],
    ["node", "id=5", "kind=predicate", "predicate=any_pc_in_chapter(77)", "yes=6", "no=7",
     "origin=reconstructed"],
    ["node", "id=6", "kind=predicate", "predicate=exactly_one_pc_in_chapter(77)",
     "yes=46", "no=41", "origin=reconstructed"],
    ["node", "id=46", "kind=leaf", "verdict=pc_in_chapter(77)", "origin=reconstructed"],
    ["node", "id=41", "kind=ask_single_code",
     "message=Indicare la condizione principale di origine perinatale",
     "answers=pc_in_chapter(77)", "next=47", "origin=reconstructed"],
    ["node", "id=47", "kind=leaf", "verdict=answered(41)", "origin=reconstructed"],
    ["node", "id=7", "kind=predicate", "predicate=has_relevant_surgery", "yes=10", "no=8",
     "origin=reconstructed"],
    ["node", "id=8", "kind=predicate", "predicate=has_selected_nonrelevant", "yes=10",
     "no=30", "origin=reconstructed"],
    ["node", "id=10", "kind=ask_single_code",
     "message=Indicare la condizione patologica che ha determinato l'intervento",
     "answers=all_pc", "next=18", "origin=codified"],
    ["node", "id=18", "kind=ask_multicode",
     "message=Identificare una o più condizioni patologiche non correlate all'intervento",
     "answers=pc_except_answered(10)", "next=19", "origin=codified"],
    ["node", "id=19", "kind=predicate", "predicate=answered_code_count_gt_one(18)",
     "yes=20", "no=21", "origin=codified"],
    ["node", "id=21", "kind=leaf", "verdict=answered(18)", "origin=reconstructed"],
    ["node", "id=20", "kind=ask_single_code",
     "message=Indicare, tra le condizioni patologiche non correlate all'intervento,"
     " quella che ha consumato più risorse durante il ricovero",
     "answers=answered(18)", "next=22", "origin=codified"],
    ["node", "id=22", "kind=leaf", "verdict=answered(20)", "origin=reconstructed"],
    ["node", "id=30", "kind=ask_binary",
     "message=Le condizioni patologiche sono correlate tra loro?", "yes=31", "no=33",
     "origin=codified"],
    ["node", "id=31", "kind=ask_binary", "message=Ha causato complicazioni?", "yes=32",
     "no=33", "origin=codified"],
    ["node", "id=32", "kind=ask_multicode", "message=Identificare l'evento più complesso",
     "answers=all_pc", "next=34", "origin=codified"],
    ["node", "id=34", "kind=leaf", "verdict=answered(32)", "origin=reconstructed"],
    ["node", "id=33", "kind=ask_single_code",
     "message=Indicare la condizione patologica che ha consumato più risorse durante il ricovero",
     "answers=all_pc", "next=35", "origin=codified"],
    ["node", "id=35", "kind=leaf", "verdict=answered(33)", "origin=reconstructed"],
]


def tree_text() -> str:
    return "\n".join("\t".join(record) for record in _TREE_RECORDS) + "\n"


def tree_node_count() -> int:
    return sum(1 for record in _TREE_RECORDS if record[0] == "node")


def _write(path: Path, header: list[str], rows) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        handle.write("\t".join(header) + "\n")
        for row in rows:
            handle.write("\t".join(str(field) for field in row) + "\n")


def _with_section(rows, section: str):
    for code, parent, level, title, add, inc, exc, notes, flags in rows:
        yield (code, parent, level, section, title, add, inc, exc, notes, flags)


def build_fixture(directory: str | Path) -> Path:
    """Write the full corpus into ``directory``; returns the manifest path."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)

    _write(
        directory / "systematic_diagnoses.tsv",
        SYSTEMATIC_COLUMNS + ["flags"],
        _with_section(DIAGNOSES, "diagnoses"),
    )
    _write(
        directory / "systematic_procedures.tsv",
        SYSTEMATIC_COLUMNS + ["flags"],
        _with_section(PROCEDURES, "procedures"),
    )
    _write(
        directory / "alphabetical.tsv",
        ENTRY_COLUMNS,
        [(t, c, i, "alphabetical_index") for t, c, i in ALPHABETICAL],
    )
    _write(
        directory / "neoplasm.tsv",
        ENTRY_COLUMNS,
        [(t, c, i, "neoplasm_table") for t, c, i in NEOPLASM],
    )
    for name, terms in GLOSSARIES.items():
        _write(
            directory / f"glossary_{name}.tsv",
            GLOSSARY_COLUMNS,
            [(t, c, name, q) for t, c, q in terms],
        )
    _write(directory / "procedure_sets.tsv", PROCEDURE_SET_COLUMNS, PROCEDURE_SETS)
    (directory / "decision_tree.tsv").write_text(tree_text(), encoding="utf-8")

    manifest_rows = [
        ("systematic_diagnoses.tsv", "systematic", len(DIAGNOSES)),
        ("systematic_procedures.tsv", "systematic", len(PROCEDURES)),
        ("alphabetical.tsv", "alphabetical", len(ALPHABETICAL)),
        ("neoplasm.tsv", "neoplasm", len(NEOPLASM)),
        *(
            (f"glossary_{name}.tsv", f"glossary:{name}", len(terms))
            for name, terms in GLOSSARIES.items()
        ),
        ("procedure_sets.tsv", "procedure_sets", len(PROCEDURE_SETS)),
        ("decision_tree.tsv", "decision_tree", tree_node_count()),
    ]
    manifest_path = directory / "manifest.tsv"
    with open(manifest_path, "w", encoding="utf-8") as handle:
        handle.write("# path\tkind\tcount\n")
        for name, kind, count in manifest_rows:
            handle.write(f"{name}\t{kind}\t{count}\n")
    return manifest_path


def packaged_manifest() -> Path:
    """Manifest of the pre-built copy shipped inside the package."""
    return Path(str(resources.files("sdocoder") / "data" / "fixture" / "manifest.tsv"))
