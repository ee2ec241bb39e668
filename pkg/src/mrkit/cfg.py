"""Annotated control-flow graphs and their DOT-format serialization.

A CFG here is a directed graph whose nodes carry one of twenty closed
operation labels (``NodeOp``).  Graphs arrive either from the bundled
mini-IR lowering or from externally produced ``.dot`` files; both routes
meet the same structural invariants, checked by :func:`validate`:

* exactly one ``start`` node with in-degree 0 and one ``exit`` node with
  out-degree 0,
* every node reachable from ``start`` and ``exit`` reachable from every
  node,
* unique node ids and no duplicated edges.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Iterable, Sequence


class NodeOp(str, Enum):
    ADD = "add"
    SUB = "sub"
    MUL = "mul"
    DIV = "div"
    OR = "or"
    AND = "and"
    IF = "if"
    ASSI = "assi"
    EQL = "eql"
    GEQL = "geql"
    GT = "gt"
    LEQL = "leql"
    LT = "lt"
    NEQL = "neql"
    START = "start"
    REM = "rem"
    FCALL = "fcall"
    RETURN = "return"
    EXIT = "exit"
    GOTO = "goto"

    def __str__(self) -> str:  # "assi" rather than "NodeOp.ASSI" in messages
        return self.value


_LABELS_BY_VALUE = {op.value: op for op in NodeOp}

# Statement-token -> annotation label. Both spellings of the boolean
# connectives are accepted, as is the unicode minus sign.
STATEMENT_LABELS: dict[str, NodeOp] = {
    "+": NodeOp.ADD,
    "-": NodeOp.SUB,
    "−": NodeOp.SUB,
    "*": NodeOp.MUL,
    "/": NodeOp.DIV,
    "||": NodeOp.OR,
    "or": NodeOp.OR,
    "&": NodeOp.AND,
    "and": NodeOp.AND,
    "if": NodeOp.IF,
    "=": NodeOp.ASSI,
    "==": NodeOp.EQL,
    ">=": NodeOp.GEQL,
    ">": NodeOp.GT,
    "<=": NodeOp.LEQL,
    "<": NodeOp.LT,
    "!=": NodeOp.NEQL,
    ":=": NodeOp.START,
    "%": NodeOp.REM,
    "invoke": NodeOp.FCALL,
    "return": NodeOp.RETURN,
    "exit": NodeOp.EXIT,
    "goto": NodeOp.GOTO,
}


class CfgError(ValueError):
    """Structural problem while building or serializing a CFG."""


class DotParseError(CfgError):
    """Malformed DOT input; carries the 1-based source line."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class UnknownLabelError(CfgError):
    """A token outside the closed label/statement vocabulary."""


def parse_node_op(token: str) -> NodeOp:
    """Resolve a node annotation such as ``"assi"`` to its NodeOp."""
    try:
        return _LABELS_BY_VALUE[token]
    except KeyError:
        raise UnknownLabelError(f"unknown node label {token!r}") from None


def classify_statement(token: str) -> NodeOp:
    """Map a statement token (``"+"``, ``":="``, ``"invoke"``, ...) to its
    annotation label."""
    try:
        return STATEMENT_LABELS[token]
    except KeyError:
        raise UnknownLabelError(f"unknown statement token {token!r}") from None


@dataclass(frozen=True)
class Diagnostic:
    severity: str
    message: str
    node: int | None = None

    def __str__(self) -> str:
        where = f" (node {self.node})" if self.node is not None else ""
        return f"{self.severity}: {self.message}{where}"


@dataclass(frozen=True)
class AnnotatedCfg:
    """Immutable operation-labelled directed graph.

    Nodes are dense integers ``0..n-1`` in declaration order; ``ops[i]`` is
    the label of node ``i``.  Edge order follows the source (file or
    lowering emission) and is preserved by ``emit_dot``.
    """

    name: str
    ops: tuple[NodeOp, ...]
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        n = len(self.ops)
        for a, b in self.edges:
            if not (0 <= a < n and 0 <= b < n):
                raise CfgError(f"edge ({a}, {b}) references a missing node")

    @property
    def node_count(self) -> int:
        return len(self.ops)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    @cached_property
    def successors(self) -> tuple[tuple[int, ...], ...]:
        """Successor ids per node, ascending (canonical iteration order)."""
        succ: list[list[int]] = [[] for _ in self.ops]
        for a, b in self.edges:
            succ[a].append(b)
        return tuple(tuple(sorted(s)) for s in succ)

    @cached_property
    def predecessors(self) -> tuple[tuple[int, ...], ...]:
        pred: list[list[int]] = [[] for _ in self.ops]
        for a, b in self.edges:
            pred[b].append(a)
        return tuple(tuple(sorted(p)) for p in pred)

    def in_degree(self, node: int) -> int:
        return len(self.predecessors[node])

    def out_degree(self, node: int) -> int:
        return len(self.successors[node])

    def label_multiset(self) -> dict[NodeOp, int]:
        counts: dict[NodeOp, int] = {}
        for op in self.ops:
            counts[op] = counts.get(op, 0) + 1
        return counts


_NODE_RE = re.compile(
    r'^\s*(?P<id>"[^"]*"|[A-Za-z0-9_.]+)\s*\[\s*label\s*=\s*'
    r'(?P<label>"[^"]*"|[A-Za-z0-9_.]+)\s*\]\s*;?\s*$'
)
_EDGE_RE = re.compile(
    r'^\s*(?P<src>"[^"]*"|[A-Za-z0-9_.]+)\s*->\s*'
    r'(?P<dst>"[^"]*"|[A-Za-z0-9_.]+)\s*;?\s*$'
)
_HEADER_RE = re.compile(r'^\s*digraph\s*(?P<name>"[^"]*"|[A-Za-z0-9_.]+)?\s*\{\s*$')


def _unquote(token: str) -> str:
    if token.startswith('"') and token.endswith('"'):
        return token[1:-1]
    return token


def parse_dot(text: str) -> AnnotatedCfg:
    """Parse one directed graph in the dialect this toolkit emits.

    Every node must be declared with a ``label`` attribute before (or
    after) it is used in an edge; ids are opaque strings mapped to dense
    integers in declaration order.  Duplicate node ids, duplicate edges,
    unknown labels and stray syntax are reported with their line number.
    """
    lines = text.splitlines()
    ids: dict[str, int] = {}
    ops: list[NodeOp] = []
    raw_edges: list[tuple[str, str, int]] = []
    name = ""
    seen_header = False
    seen_footer = False

    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        if not seen_header:
            m = _HEADER_RE.match(raw)
            if not m:
                raise DotParseError("expected 'digraph <name> {'", lineno)
            name = _unquote(m.group("name") or "")
            seen_header = True
            continue
        if seen_footer:
            raise DotParseError("content after closing '}'", lineno)
        if line == "}":
            seen_footer = True
            continue
        m = _NODE_RE.match(raw)
        if m:
            node_id = _unquote(m.group("id"))
            if node_id in ids:
                raise DotParseError(f"duplicate node id {node_id!r}", lineno)
            label = _unquote(m.group("label"))
            try:
                op = parse_node_op(label)
            except UnknownLabelError as exc:
                raise DotParseError(str(exc), lineno) from None
            ids[node_id] = len(ops)
            ops.append(op)
            continue
        m = _EDGE_RE.match(raw)
        if m:
            raw_edges.append((_unquote(m.group("src")), _unquote(m.group("dst")), lineno))
            continue
        raise DotParseError(f"unrecognized statement {line!r}", lineno)

    if not seen_header:
        raise DotParseError("empty input, expected 'digraph <name> {'", len(lines) or 1)
    if not seen_footer:
        raise DotParseError("missing closing '}'", len(lines))

    edges: list[tuple[int, int]] = []
    seen: set[tuple[int, int]] = set()
    for src, dst, lineno in raw_edges:
        if src not in ids:
            raise DotParseError(f"edge references undeclared node {src!r}", lineno)
        if dst not in ids:
            raise DotParseError(f"edge references undeclared node {dst!r}", lineno)
        edge = (ids[src], ids[dst])
        if edge in seen:
            raise DotParseError(f"duplicate edge {src!r} -> {dst!r}", lineno)
        seen.add(edge)
        edges.append(edge)

    return AnnotatedCfg(name=name, ops=tuple(ops), edges=tuple(edges))


def emit_dot(cfg: AnnotatedCfg) -> str:
    """Serialize to the canonical dialect: byte-stable for a fixed graph,
    LF line endings, nodes then edges in declaration order."""
    out = [f"digraph {cfg.name or 'cfg'} {{"]
    for i, op in enumerate(cfg.ops):
        out.append(f'  n{i} [label="{op.value}"];')
    for a, b in cfg.edges:
        out.append(f"  n{a} -> n{b};")
    out.append("}")
    return "\n".join(out) + "\n"


def _reachable(n: int, adjacency: Sequence[Iterable[int]], roots: Iterable[int]) -> list[bool]:
    seen = [False] * n
    stack = [r for r in roots]
    for r in stack:
        seen[r] = True
    while stack:
        u = stack.pop()
        for v in adjacency[u]:
            if not seen[v]:
                seen[v] = True
                stack.append(v)
    return seen


def validate(cfg: AnnotatedCfg) -> list[Diagnostic]:
    """Check every AnnotatedCfg invariant; empty result means valid."""
    diags: list[Diagnostic] = []
    n = cfg.node_count

    seen_edges: set[tuple[int, int]] = set()
    for edge in cfg.edges:
        if edge in seen_edges:
            diags.append(Diagnostic("error", f"duplicate edge {edge[0]} -> {edge[1]}"))
        seen_edges.add(edge)

    starts = [i for i, op in enumerate(cfg.ops) if op is NodeOp.START]
    exits = [i for i, op in enumerate(cfg.ops) if op is NodeOp.EXIT]
    if len(starts) != 1:
        diags.append(Diagnostic(
            "error", f"expected exactly one start node, found {len(starts)}"))
    if len(exits) != 1:
        diags.append(Diagnostic(
            "error", f"expected exactly one exit node, found {len(exits)}"))
    for i in starts:
        if cfg.in_degree(i) != 0:
            diags.append(Diagnostic(
                "error", f"start node has in-degree {cfg.in_degree(i)}", i))
    for i in exits:
        if cfg.out_degree(i) != 0:
            diags.append(Diagnostic(
                "error", f"exit node has out-degree {cfg.out_degree(i)}", i))

    if len(starts) == 1:
        from_start = _reachable(n, cfg.successors, starts)
        for i, ok in enumerate(from_start):
            if not ok:
                diags.append(Diagnostic("error", "node unreachable from start", i))
    if len(exits) == 1:
        to_exit = _reachable(n, cfg.predecessors, exits)
        for i, ok in enumerate(to_exit):
            if not ok:
                diags.append(Diagnostic("error", "exit unreachable from node", i))

    return diags
