"""Declarative decision-tree format for main-condition identification.

The tree is data, not code. A tree file is line oriented, UTF-8, one record
per line, fields tab-separated as ``key=value`` pairs:

    tree<TAB>root=<id>
    node<TAB>id=<int><TAB>kind=<kind><TAB>...

Node kinds and their required fields:

    predicate        predicate=<rule>  yes=<id>  no=<id>
    ask_binary       message=<text>    yes=<id>  no=<id>
    ask_single_code  message=<text>    answers=<rule>  next=<id>
    ask_multicode    message=<text>    answers=<rule>  next=<id>
    leaf             verdict=<rule>

Every node may carry ``origin=<tag>`` describing where its wording comes
from. Rules are ``name`` or ``name(arg)``; the closed vocabularies below
define the valid names and their argument type. Lines starting with ``#``
and blank lines are ignored.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .errors import ParseError


class NodeKind(str, Enum):
    PREDICATE = "predicate"
    ASK_BINARY = "ask_binary"
    ASK_SINGLE_CODE = "ask_single_code"
    ASK_MULTICODE = "ask_multicode"
    LEAF = "leaf"


ASK_KINDS = frozenset({NodeKind.ASK_BINARY, NodeKind.ASK_SINGLE_CODE, NodeKind.ASK_MULTICODE})
CODE_ASK_KINDS = frozenset({NodeKind.ASK_SINGLE_CODE, NodeKind.ASK_MULTICODE})

# Closed rule vocabularies. The argument type is one of:
#   None      no argument
#   "chapter" a chapter code of the diagnoses section
#   "node"    the id of a code-ask node
PREDICATES: dict[str, str | None] = {
    "pc_count_is_one": None,
    "any_pc_in_chapter": "chapter",
    "exactly_one_pc_in_chapter": "chapter",
    "any_pathological_pc_in_chapter": "chapter",
    "exactly_one_pathological_pc_in_chapter": "chapter",
    "has_relevant_surgery": None,
    "has_selected_nonrelevant": None,
    "answered_code_count_gt_one": "node",
}

ANSWER_RULES: dict[str, str | None] = {
    "all_pc": None,
    "pc_in_chapter": "chapter",
    "pathological_pc_in_chapter": "chapter",
    "pc_except_answered": "node",
    "answered": "node",
}

VERDICT_RULES: dict[str, str | None] = {
    "only_pc": None,
    "pc_in_chapter": "chapter",
    "pathological_pc_in_chapter": "chapter",
    "answered": "node",
}


@dataclass(frozen=True)
class Rule:
    name: str
    arg: str | None = None

    def __str__(self) -> str:
        return self.name if self.arg is None else f"{self.name}({self.arg})"


@dataclass(frozen=True)
class TreeNode:
    id: int
    kind: NodeKind
    message: str | None = None
    predicate: Rule | None = None
    yes: int | None = None
    no: int | None = None
    next: int | None = None
    answers: Rule | None = None
    verdict: Rule | None = None
    origin: str | None = None

    def successors(self) -> list[int]:
        out = []
        for arc in (self.yes, self.no, self.next):
            if arc is not None:
                out.append(arc)
        return out


@dataclass
class DecisionTree:
    root: int
    records: list[TreeNode]
    nodes: dict[int, TreeNode] = field(init=False)

    def __post_init__(self):
        self.nodes = {}
        for node in self.records:
            self.nodes.setdefault(node.id, node)


@dataclass(frozen=True)
class TreeDefect:
    kind: str
    node_id: int | None
    message: str

    def __str__(self) -> str:
        where = f"node {self.node_id}" if self.node_id is not None else "tree"
        return f"[{self.kind}] {where}: {self.message}"


def _parse_rule(value: str) -> Rule:
    if "(" in value:
        name, _, rest = value.partition("(")
        if not rest.endswith(")"):
            raise ValueError(f"malformed rule {value!r}")
        return Rule(name=name.strip(), arg=rest[:-1].strip())
    return Rule(name=value.strip())


def parse_tree(text: str, filename: str = "<tree>") -> DecisionTree:
    """Parse a tree document; raises :class:`ParseError` on malformed lines."""
    root: int | None = None
    records: list[TreeNode] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip("\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        parts = line.split("\t")
        record_type = parts[0].strip()
        fields: dict[str, str] = {}
        for part in parts[1:]:
            if not part.strip():
                continue
            key, sep, value = part.partition("=")
            if not sep:
                raise ParseError(filename, lineno, f"field {part!r} is not key=value")
            if key.strip() in fields:
                raise ParseError(filename, lineno, f"duplicate field {key.strip()!r}")
            fields[key.strip()] = value
        if record_type == "tree":
            if root is not None:
                raise ParseError(filename, lineno, "second tree record")
            try:
                root = int(fields["root"])
            except (KeyError, ValueError):
                raise ParseError(filename, lineno, "tree record needs root=<int>") from None
            continue
        if record_type != "node":
            raise ParseError(filename, lineno, f"unknown record type {record_type!r}")
        try:
            node_id = int(fields.pop("id"))
        except (KeyError, ValueError):
            raise ParseError(filename, lineno, "node record needs id=<int>") from None
        try:
            kind = NodeKind(fields.pop("kind"))
        except (KeyError, ValueError):
            raise ParseError(filename, lineno, "node record needs a valid kind") from None

        def arc(name: str) -> int | None:
            value = fields.pop(name, None)
            if value is None:
                return None
            try:
                return int(value)
            except ValueError:
                raise ParseError(filename, lineno, f"{name}={value!r} is not an id") from None

        def rule(name: str) -> Rule | None:
            value = fields.pop(name, None)
            if value is None:
                return None
            try:
                return _parse_rule(value)
            except ValueError as exc:
                raise ParseError(filename, lineno, str(exc)) from None

        node = TreeNode(
            id=node_id,
            kind=kind,
            message=fields.pop("message", None),
            predicate=rule("predicate"),
            yes=arc("yes"),
            no=arc("no"),
            next=arc("next"),
            answers=rule("answers"),
            verdict=rule("verdict"),
            origin=fields.pop("origin", None),
        )
        if fields:
            raise ParseError(filename, lineno, f"unknown fields {sorted(fields)}")
        records.append(node)
    if root is None:
        raise ParseError(filename, 0, "missing tree record with root id")
    if not records:
        raise ParseError(filename, 0, "tree has no nodes")
    return DecisionTree(root=root, records=records)


def parse_tree_file(path) -> DecisionTree:
    with open(path, encoding="utf-8") as handle:
        return parse_tree(handle.read(), filename=str(path))


def count_records(path) -> int:
    return len(parse_tree_file(path).records)


# ----------------------------------------------------------------------
# validation
# ----------------------------------------------------------------------


def _shape_defects(tree: DecisionTree) -> list[TreeDefect]:
    defects: list[TreeDefect] = []
    seen: set[int] = set()
    for node in tree.records:
        if node.id in seen:
            defects.append(TreeDefect("duplicate_id", node.id, "node id defined twice"))
        seen.add(node.id)

    for node in tree.nodes.values():
        if node.kind in (NodeKind.PREDICATE, NodeKind.ASK_BINARY):
            if node.yes is None or node.no is None:
                defects.append(TreeDefect("missing_arc", node.id, "needs yes and no arcs"))
            if node.next is not None:
                defects.append(TreeDefect("extra_arc", node.id, "next arc not allowed"))
        elif node.kind in CODE_ASK_KINDS:
            if node.next is None:
                defects.append(TreeDefect("missing_arc", node.id, "needs a next arc"))
            if node.yes is not None or node.no is not None:
                defects.append(TreeDefect("extra_arc", node.id, "yes/no arcs not allowed"))
        elif node.kind is NodeKind.LEAF:
            if node.successors():
                defects.append(TreeDefect("extra_arc", node.id, "leaves have no arcs"))
            if node.verdict is None:
                defects.append(TreeDefect("missing_verdict", node.id, "leaf needs a verdict"))

        if node.kind is NodeKind.PREDICATE:
            if node.predicate is None:
                defects.append(TreeDefect("missing_predicate", node.id, "predicate rule required"))
        elif node.predicate is not None:
            defects.append(TreeDefect("extra_predicate", node.id, "predicate not allowed here"))

        if node.kind in ASK_KINDS and not node.message:
            defects.append(TreeDefect("missing_message", node.id, "ask node needs a message"))
        if node.kind in CODE_ASK_KINDS and node.answers is None:
            defects.append(TreeDefect("missing_answers", node.id, "code ask needs answers rule"))
        if node.kind not in CODE_ASK_KINDS and node.answers is not None:
            defects.append(TreeDefect("extra_answers", node.id, "answers rule not allowed here"))
        if node.kind is not NodeKind.LEAF and node.verdict is not None:
            defects.append(TreeDefect("extra_verdict", node.id, "verdict only on leaves"))

        for arc in node.successors():
            if arc not in tree.nodes:
                defects.append(TreeDefect("dangling_arc", node.id, f"arc to unknown node {arc}"))

        for rule, vocabulary, label in (
            (node.predicate, PREDICATES, "predicate"),
            (node.answers, ANSWER_RULES, "answers"),
            (node.verdict, VERDICT_RULES, "verdict"),
        ):
            if rule is None:
                continue
            if rule.name not in vocabulary:
                defects.append(
                    TreeDefect("unknown_rule", node.id, f"unknown {label} rule {rule.name!r}")
                )
                continue
            arg_type = vocabulary[rule.name]
            if arg_type is None and rule.arg is not None:
                defects.append(
                    TreeDefect("rule_arity", node.id, f"{rule.name} takes no argument")
                )
            if arg_type is not None and (rule.arg is None or not rule.arg):
                defects.append(
                    TreeDefect("rule_arity", node.id, f"{rule.name} needs a {arg_type} argument")
                )
            if arg_type == "node" and rule.arg is not None:
                try:
                    int(rule.arg)
                except ValueError:
                    defects.append(
                        TreeDefect("rule_arity", node.id, f"{rule.name} needs a node id")
                    )
    return defects


def _reachable(tree: DecisionTree) -> set[int]:
    seen: set[int] = set()
    stack = [tree.root]
    while stack:
        node_id = stack.pop()
        if node_id in seen or node_id not in tree.nodes:
            continue
        seen.add(node_id)
        stack.extend(tree.nodes[node_id].successors())
    return seen


def _find_cycle(tree: DecisionTree) -> list[int] | None:
    WHITE, GREY, BLACK = 0, 1, 2
    color = {node_id: WHITE for node_id in tree.nodes}
    path: list[int] = []

    def visit(node_id: int) -> list[int] | None:
        color[node_id] = GREY
        path.append(node_id)
        for succ in tree.nodes[node_id].successors():
            if succ not in tree.nodes:
                continue
            if color[succ] == GREY:
                return path[path.index(succ):] + [succ]
            if color[succ] == WHITE:
                found = visit(succ)
                if found:
                    return found
        color[node_id] = BLACK
        path.pop()
        return None

    for node_id in tree.nodes:
        if color[node_id] == WHITE:
            found = visit(node_id)
            if found:
                return found
    return None


def _topological_order(tree: DecisionTree, reachable: set[int]) -> list[int]:
    indegree = {node_id: 0 for node_id in reachable}
    for node_id in reachable:
        for succ in tree.nodes[node_id].successors():
            if succ in indegree:
                indegree[succ] += 1
    frontier = [n for n, d in sorted(indegree.items()) if d == 0]
    order: list[int] = []
    while frontier:
        node_id = frontier.pop()
        order.append(node_id)
        for succ in tree.nodes[node_id].successors():
            if succ in indegree:
                indegree[succ] -= 1
                if indegree[succ] == 0:
                    frontier.append(succ)
    return order


def guaranteed_asks(tree: DecisionTree) -> dict[int, set[int]]:
    """For each reachable node, the ask nodes visited on EVERY root path.

    Only meaningful on an acyclic tree; callers must check for cycles first.
    """
    reachable = _reachable(tree)
    order = _topological_order(tree, reachable)
    guaranteed: dict[int, set[int]] = {tree.root: set()}
    for node_id in order:
        if node_id not in guaranteed:
            continue
        node = tree.nodes[node_id]
        contribution = set(guaranteed[node_id])
        if node.kind in ASK_KINDS:
            contribution.add(node_id)
        for succ in node.successors():
            if succ not in reachable:
                continue
            if succ in guaranteed:
                guaranteed[succ] &= contribution
            else:
                guaranteed[succ] = set(contribution)
    return guaranteed


def validate_tree(tree: DecisionTree) -> list[TreeDefect]:
    """All structural defects of ``tree``; empty when the tree is sound."""
    defects = _shape_defects(tree)

    if tree.root not in tree.nodes:
        defects.append(TreeDefect("unknown_root", None, f"root {tree.root} does not exist"))
        return defects

    reachable = _reachable(tree)
    for node_id in sorted(set(tree.nodes) - reachable):
        defects.append(TreeDefect("unreachable", node_id, "not reachable from the root"))

    cycle = _find_cycle(tree)
    if cycle:
        defects.append(
            TreeDefect("cycle", cycle[0], " -> ".join(str(n) for n in cycle))
        )
        return defects

    guaranteed = guaranteed_asks(tree)
    for node_id in sorted(reachable):
        node = tree.nodes[node_id]
        for rule in (node.predicate, node.answers, node.verdict):
            if rule is None:
                continue
            vocabulary = {**PREDICATES, **ANSWER_RULES, **VERDICT_RULES}
            if vocabulary.get(rule.name) != "node" or rule.arg is None:
                continue
            try:
                target = int(rule.arg)
            except ValueError:
                continue
            target_node = tree.nodes.get(target)
            if target_node is None or target_node.kind not in CODE_ASK_KINDS:
                defects.append(
                    TreeDefect(
                        "unsatisfiable_reference",
                        node_id,
                        f"{rule} does not reference a code-ask node",
                    )
                )
            elif target not in guaranteed.get(node_id, set()):
                defects.append(
                    TreeDefect(
                        "unsatisfiable_reference",
                        node_id,
                        f"{rule} references node {target} not answered on every path",
                    )
                )
    return defects
