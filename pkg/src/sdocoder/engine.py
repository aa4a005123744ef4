"""Interactive engine identifying the main condition of a hospital episode.

A session starts from the episode's pathological conditions (``pc``,
diagnosis codes) and interventions/procedures (``pi``, procedure codes). The
engine walks the declarative decision tree: predicate nodes are evaluated
automatically, ask nodes stop and wait for an answer, leaves finish the
session with a verdict of one or more suggested main-condition codes.

Navigation is a pure function of (tree, kb, procedure sets, pc, pi, answers):
replaying the same inputs reproduces byte-identical interactions.
"""

from __future__ import annotations

import json
import uuid
from dataclasses import dataclass, field
from enum import Enum

from .errors import (
    EmptyConditionList,
    InvalidAnswer,
    SessionFinished,
    StaleNode,
    UnclassifiedProcedure,
    UnknownCode,
)
from .model import KnowledgeBase, ProcedureClass, Section
from .tree import (
    ASK_KINDS,
    CODE_ASK_KINDS,
    DecisionTree,
    NodeKind,
    Rule,
    TreeNode,
    guaranteed_asks,
    validate_tree,
)

BINARY_ANSWERS = ("YES", "NO")
RESULT_MESSAGE = "Condizione principale identificata"


class SessionStatus(str, Enum):
    AWAITING_ANSWER = "AwaitingAnswer"
    FINISHED = "Finished"
    CANCELLED = "Cancelled"


def classify_procedure(
    procedure_sets: dict[str, ProcedureClass], code: str
) -> ProcedureClass:
    try:
        return procedure_sets[code]
    except KeyError:
        raise UnclassifiedProcedure(
            f"procedure {code} has no entry in the procedure-set table"
        ) from None


@dataclass(frozen=True)
class Interaction:
    """What the caller sees after each engine step.

    ``type`` is the ask kind for questions or ``result`` for a finished
    session; exactly one of ``allowed_answers``/``verdict`` is present.
    """

    id: str
    state: int
    message: str
    type: str
    allowed_answers: tuple[str, ...] | None = None
    verdict: tuple[str, ...] | None = None

    def to_payload(self) -> dict:
        payload: dict = {
            "id": self.id,
            "state": self.state,
            "message": self.message,
            "type": self.type,
        }
        if self.allowed_answers is not None:
            payload["allowed_answers"] = list(self.allowed_answers)
        if self.verdict is not None:
            payload["verdict"] = list(self.verdict)
        return payload

    def to_json(self) -> str:
        return canonical_json(self.to_payload())


def canonical_json(payload) -> str:
    return json.dumps(payload, ensure_ascii=False, separators=(",", ":"))


@dataclass(frozen=True)
class HistoryEntry:
    node_id: int
    answer: tuple[str, ...]


@dataclass
class SessionState:
    session_id: str
    pc: tuple[str, ...]
    pi: tuple[str, ...]
    status: SessionStatus
    current_node: int
    history: list[HistoryEntry] = field(default_factory=list)
    verdict: tuple[str, ...] | None = None


@dataclass(frozen=True)
class ProgressEntry:
    node_id: int
    label: str
    status: str  # done | current | pending


class DecisionEngine:
    """Navigator over a validated decision tree."""

    def __init__(
        self,
        kb: KnowledgeBase,
        tree: DecisionTree,
        procedure_sets: dict[str, ProcedureClass],
    ):
        defects = validate_tree(tree)
        if defects:
            raise ValueError(
                "decision tree has defects: " + "; ".join(str(d) for d in defects)
            )
        self.kb = kb
        self.tree = tree
        self.procedure_sets = dict(procedure_sets)
        self._guaranteed = guaranteed_asks(tree)
        self._must_cache: dict[int, set[int]] = {}

    # ------------------------------------------------------------------
    # session lifecycle
    # ------------------------------------------------------------------

    def start_session(
        self,
        pc: list[str] | tuple[str, ...],
        pi: list[str] | tuple[str, ...] = (),
        session_id: str | None = None,
    ) -> tuple[SessionState, Interaction]:
        pc = tuple(pc)
        pi = tuple(pi)
        if not pc:
            raise EmptyConditionList("at least one pathological condition is required")
        for code in pc:
            if not self.kb.has(Section.DIAGNOSES, code):
                raise UnknownCode(f"unknown diagnosis code {code}")
        for code in pi:
            if not self.kb.has(Section.PROCEDURES, code):
                raise UnknownCode(f"unknown procedure code {code}")
            classify_procedure(self.procedure_sets, code)
        session = SessionState(
            session_id=session_id or str(uuid.uuid4()),
            pc=pc,
            pi=pi,
            status=SessionStatus.AWAITING_ANSWER,
            current_node=self.tree.root,
        )
        interaction = self._navigate(session)
        return session, interaction

    def answer(
        self, session: SessionState, node_id: int, answer
    ) -> tuple[SessionState, Interaction]:
        if session.status is not SessionStatus.AWAITING_ANSWER:
            raise SessionFinished(f"session {session.session_id} is {session.status.value}")
        if node_id != session.current_node:
            raise StaleNode(
                f"answer targets node {node_id} but the current node is {session.current_node}"
            )
        node = self.tree.nodes[session.current_node]
        normalized = self._validate_answer(session, node, answer)
        session.history.append(HistoryEntry(node_id=node.id, answer=normalized))
        if node.kind is NodeKind.ASK_BINARY:
            session.current_node = node.yes if normalized[0] == "YES" else node.no
        else:
            session.current_node = node.next
        interaction = self._navigate(session)
        return session, interaction

    def cancel(self, session: SessionState) -> SessionState:
        if session.status is not SessionStatus.AWAITING_ANSWER:
            raise SessionFinished(f"session {session.session_id} is {session.status.value}")
        session.status = SessionStatus.CANCELLED
        return session

    def interaction(self, session: SessionState) -> Interaction | None:
        """The pending question or final result; None once cancelled."""
        if session.status is SessionStatus.CANCELLED:
            return None
        return self._navigate(session)

    def progress(self, session: SessionState) -> list[ProgressEntry]:
        """Realized path, current stage and statically known pending stages."""
        entries = [
            ProgressEntry(
                node_id=entry.node_id,
                label=self._label(self.tree.nodes[entry.node_id]),
                status="done",
            )
            for entry in session.history
        ]
        current = self.tree.nodes[session.current_node]
        if session.status is SessionStatus.FINISHED:
            entries.append(
                ProgressEntry(node_id=current.id, label=self._label(current), status="done")
            )
            return entries
        entries.append(
            ProgressEntry(node_id=current.id, label=self._label(current), status="current")
        )
        for node_id in self._pending_after(current.id):
            entries.append(
                ProgressEntry(
                    node_id=node_id,
                    label=self._label(self.tree.nodes[node_id]),
                    status="pending",
                )
            )
        return entries

    # ------------------------------------------------------------------
    # internals
    # ------------------------------------------------------------------

    def _navigate(self, session: SessionState) -> Interaction:
        steps = 0
        bound = len(self.tree.nodes) + 1
        while True:
            steps += 1
            if steps > bound:  # cannot happen on a validated acyclic tree
                raise RuntimeError("navigation exceeded the node count")
            node = self.tree.nodes[session.current_node]
            if node.kind is NodeKind.PREDICATE:
                session.current_node = node.yes if self._holds(session, node) else node.no
                continue
            if node.kind is NodeKind.LEAF:
                session.status = SessionStatus.FINISHED
                session.verdict = tuple(self._eval_codes(session, node.verdict))
                return Interaction(
                    id=session.session_id,
                    state=node.id,
                    message=RESULT_MESSAGE,
                    type="result",
                    verdict=session.verdict,
                )
            return Interaction(
                id=session.session_id,
                state=node.id,
                message=node.message or "",
                type=node.kind.value,
                allowed_answers=self._allowed_answers(session, node),
            )

    def _validate_answer(self, session: SessionState, node: TreeNode, answer) -> tuple[str, ...]:
        if node.kind is NodeKind.ASK_BINARY:
            if isinstance(answer, str) and answer in BINARY_ANSWERS:
                return (answer,)
            raise InvalidAnswer(f"expected YES or NO, got {answer!r}")
        allowed = self._allowed_answers(session, node)
        if node.kind is NodeKind.ASK_SINGLE_CODE:
            if isinstance(answer, (list, tuple)):
                if len(answer) != 1:
                    raise InvalidAnswer("exactly one code is required")
                answer = answer[0]
            if not isinstance(answer, str) or answer not in allowed:
                raise InvalidAnswer(f"answer {answer!r} is not among the allowed codes")
            return (answer,)
        # ask_multicode
        if isinstance(answer, str):
            raise InvalidAnswer("a non-empty list of codes is required")
        codes = tuple(answer or ())
        if not codes:
            raise InvalidAnswer("a non-empty list of codes is required")
        if len(set(codes)) != len(codes):
            raise InvalidAnswer("duplicate codes in answer")
        for code in codes:
            if code not in allowed:
                raise InvalidAnswer(f"answer {code!r} is not among the allowed codes")
        return codes

    def _holds(self, session: SessionState, node: TreeNode) -> bool:
        rule = node.predicate
        assert rule is not None
        if rule.name == "pc_count_is_one":
            return len(session.pc) == 1
        if rule.name == "any_pc_in_chapter":
            return any(self._in_chapter(code, rule.arg) for code in session.pc)
        if rule.name == "exactly_one_pc_in_chapter":
            return sum(1 for code in session.pc if self._in_chapter(code, rule.arg)) == 1
        if rule.name == "any_pathological_pc_in_chapter":
            return any(
                self._in_chapter(code, rule.arg) and self._pathological(code)
                for code in session.pc
            )
        if rule.name == "exactly_one_pathological_pc_in_chapter":
            count = sum(
                1
                for code in session.pc
                if self._in_chapter(code, rule.arg) and self._pathological(code)
            )
            return count == 1
        if rule.name == "has_relevant_surgery":
            return self._has_class(session, ProcedureClass.RELEVANT_SURGERY)
        if rule.name == "has_selected_nonrelevant":
            return self._has_class(session, ProcedureClass.SELECTED_NONRELEVANT)
        if rule.name == "answered_code_count_gt_one":
            return len(self._answered(session, int(rule.arg))) > 1
        raise RuntimeError(f"unimplemented predicate {rule.name}")

    def _allowed_answers(self, session: SessionState, node: TreeNode) -> tuple[str, ...]:
        if node.kind is NodeKind.ASK_BINARY:
            return BINARY_ANSWERS
        rule = node.answers
        assert rule is not None
        if rule.name == "all_pc":
            return session.pc
        if rule.name == "pc_in_chapter":
            return tuple(code for code in session.pc if self._in_chapter(code, rule.arg))
        if rule.name == "pathological_pc_in_chapter":
            return tuple(
                code
                for code in session.pc
                if self._in_chapter(code, rule.arg) and self._pathological(code)
            )
        if rule.name == "pc_except_answered":
            answered = set(self._answered(session, int(rule.arg)))
            return tuple(code for code in session.pc if code not in answered)
        if rule.name == "answered":
            return self._answered(session, int(rule.arg))
        raise RuntimeError(f"unimplemented answer rule {rule.name}")

    def _eval_codes(self, session: SessionState, rule: Rule | None) -> tuple[str, ...]:
        assert rule is not None
        if rule.name == "only_pc":
            return (session.pc[0],)
        if rule.name == "answered":
            return self._answered(session, int(rule.arg))
        if rule.name == "pc_in_chapter":
            return tuple(code for code in session.pc if self._in_chapter(code, rule.arg))
        if rule.name == "pathological_pc_in_chapter":
            return tuple(
                code
                for code in session.pc
                if self._in_chapter(code, rule.arg) and self._pathological(code)
            )
        raise RuntimeError(f"unimplemented verdict rule {rule.name}")

    def _answered(self, session: SessionState, node_id: int) -> tuple[str, ...]:
        for entry in reversed(session.history):
            if entry.node_id == node_id:
                return entry.answer
        return ()

    def _in_chapter(self, code: str, chapter: str | None) -> bool:
        return self.kb.chapter_of(Section.DIAGNOSES, code) == chapter

    def _pathological(self, code: str) -> bool:
        return not self.kb.get(Section.DIAGNOSES, code).is_physiological

    def _has_class(self, session: SessionState, wanted: ProcedureClass) -> bool:
        return any(
            classify_procedure(self.procedure_sets, code) is wanted for code in session.pi
        )

    def _label(self, node: TreeNode) -> str:
        if node.kind is NodeKind.LEAF:
            return RESULT_MESSAGE
        return node.message or f"nodo {node.id}"

    def _pending_after(self, node_id: int) -> list[int]:
        """Ask/leaf nodes every continuation from ``node_id`` must visit."""
        node = self.tree.nodes[node_id]
        must: set[int] | None = None
        for succ in node.successors():
            paths = self._must_visit(succ)
            must = set(paths) if must is None else must & paths
        if not must:
            return []
        order: list[int] = []
        frontier = list(node.successors())
        seen: set[int] = set()
        while frontier:
            current = frontier.pop(0)
            if current in seen:
                continue
            seen.add(current)
            if current in must and current not in order:
                order.append(current)
            frontier.extend(self.tree.nodes[current].successors())
        return order

    def _must_visit(self, start: int) -> set[int]:
        """Ask/leaf ids visited on every path from ``start`` (inclusive)."""
        cached = self._must_cache.get(start)
        if cached is not None:
            return cached
        node = self.tree.nodes[start]
        own = {start} if node.kind in ASK_KINDS or node.kind is NodeKind.LEAF else set()
        successors = node.successors()
        if successors:
            shared: set[int] | None = None
            for succ in successors:
                s = self._must_visit(succ)
                shared = set(s) if shared is None else shared & s
            own |= shared or set()
        self._must_cache[start] = own
        return own
