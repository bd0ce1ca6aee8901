"""Conversation graph data model, prompt templates, and structural validation."""

from __future__ import annotations

import enum
import re
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Mapping

from ordex.errors import GraphError
from ordex.llm.messages import Conversation

NodeId = str

_PLACEHOLDER = re.compile(r"\{(text|feature|binding:([A-Za-z_][A-Za-z0-9_]*))\}")


def render_template(template: str, state: RunState) -> str:
    """Fill ``{text}``, ``{feature}`` and ``{binding:NAME}``; other braces pass through."""

    def sub(m: re.Match) -> str:
        if m.group(1) == "text":
            return state.text
        if m.group(1) == "feature":
            return state.feature_name
        name = m.group(2)
        if name not in state.bindings:
            raise GraphError(f"template references unbound name {name!r}")
        return str(state.bindings[name])

    return _PLACEHOLDER.sub(sub, template)


@dataclass
class RunState:
    """Mutable per-run state. Bindings are write-once."""

    text: str
    feature: Any
    conversation: Conversation = field(default_factory=Conversation)
    bindings: dict[str, Any] = field(default_factory=dict)

    @property
    def feature_name(self) -> str:
        if isinstance(self.feature, enum.Enum):
            return str(self.feature.value)
        return str(self.feature)

    def bind(self, name: str, value: Any) -> None:
        if name in self.bindings and self.bindings[name] != value:
            raise GraphError(f"binding {name!r} already set to {self.bindings[name]!r}")
        self.bindings[name] = value


@dataclass(frozen=True)
class PromptNode:
    id: NodeId
    prompt: str | Callable[[RunState], str] | None = None

    def build_prompt(self, state: RunState) -> str | None:
        if self.prompt is None:
            return None
        if isinstance(self.prompt, str):
            return render_template(self.prompt, state)
        return self.prompt(state)


@dataclass(frozen=True)
class Edge:
    source: NodeId
    destination: NodeId
    condition: Callable[[str, RunState], bool]
    label: str = ""
    bind: tuple[tuple[str, str], ...] = ()

    def __post_init__(self) -> None:
        bind = self.bind.items() if isinstance(self.bind, Mapping) else self.bind
        object.__setattr__(self, "bind", tuple((str(k), str(v)) for k, v in bind))


@dataclass(frozen=True)
class ConversationGraph:
    """Prompt nodes joined by condition edges.

    Edges leaving a node are tried in the order they were declared. A node
    with no outgoing edges is a leaf.
    """

    nodes: tuple[PromptNode, ...]
    edges: tuple[Edge, ...]
    root: NodeId
    system_prompt: str | Callable[[RunState], str] | None = None
    name: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "edges", tuple(self.edges))

    def node(self, node_id: NodeId) -> PromptNode:
        for n in self.nodes:
            if n.id == node_id:
                return n
        raise KeyError(node_id)

    @property
    def node_ids(self) -> list[NodeId]:
        return [n.id for n in self.nodes]

    def out_edges(self, node_id: NodeId) -> list[Edge]:
        return [e for e in self.edges if e.source == node_id]

    def is_leaf(self, node_id: NodeId) -> bool:
        return not any(e.source == node_id for e in self.edges)

    def leaves(self) -> list[NodeId]:
        return [n.id for n in self.nodes if self.is_leaf(n.id)]

    def build_system_prompt(self, state: RunState) -> str | None:
        if self.system_prompt is None:
            return None
        if isinstance(self.system_prompt, str):
            return render_template(self.system_prompt, state)
        return self.system_prompt(state)


@dataclass(frozen=True)
class Violation:
    kind: str  # duplicate_node | missing_root | dangling_edge | self_loop | root_has_incoming | cycle | unreachable | missing_prompt
    element: str
    detail: str = ""

    def __str__(self) -> str:
        return f"{self.kind}({self.element})" + (f": {self.detail}" if self.detail else "")


def validate(graph: ConversationGraph) -> list[Violation]:
    out: list[Violation] = []
    ids: set[NodeId] = set()
    for n in graph.nodes:
        if n.id in ids:
            out.append(Violation("duplicate_node", n.id))
        ids.add(n.id)

    has_root = graph.root in ids
    if not has_root:
        out.append(Violation("missing_root", str(graph.root)))

    adjacency: dict[NodeId, list[NodeId]] = {i: [] for i in ids}
    for e in graph.edges:
        label = f"{e.source}->{e.destination}"
        missing = [x for x in (e.source, e.destination) if x not in ids]
        if missing:
            out.append(Violation("dangling_edge", label, f"unknown node(s) {', '.join(map(str, missing))}"))
            continue
        if e.source == e.destination:
            out.append(Violation("self_loop", e.source))
            continue
        adjacency[e.source].append(e.destination)
        if has_root and e.destination == graph.root:
            out.append(Violation("root_has_incoming", label))

    out.extend(_find_cycles(adjacency, [n.id for n in graph.nodes]))

    if has_root:
        seen = {graph.root}
        queue = deque([graph.root])
        while queue:
            for nxt in adjacency[queue.popleft()]:
                if nxt not in seen:
                    seen.add(nxt)
                    queue.append(nxt)
        for n in graph.nodes:
            if n.id not in seen:
                out.append(Violation("unreachable", n.id))

    for n in graph.nodes:
        if n.prompt is None and not graph.is_leaf(n.id):
            out.append(Violation("missing_prompt", n.id, "non-leaf nodes must issue a prompt"))
    return out


def _find_cycles(adjacency: Mapping[NodeId, list[NodeId]], order: Iterable[NodeId]) -> list[Violation]:
    """One violation per back edge found by an iterative depth-first search."""
    WHITE, GRAY, BLACK = 0, 1, 2
    color = {n: WHITE for n in adjacency}
    found: list[Violation] = []
    for start in order:
        if color.get(start) != WHITE:
            continue
        path = [start]
        stack = [(start, iter(adjacency[start]))]
        color[start] = GRAY
        while stack:
            node, children = stack[-1]
            child = next(children, None)
            if child is None:
                color[node] = BLACK
                stack.pop()
                path.pop()
            elif color[child] == GRAY:
                cycle = path[path.index(child):]
                found.append(Violation("cycle", child, " -> ".join(cycle + [child])))
            elif color[child] == WHITE:
                color[child] = GRAY
                path.append(child)
                stack.append((child, iter(adjacency[child])))
    return found


def require_valid(graph: ConversationGraph) -> None:
    problems = validate(graph)
    if problems:
        raise GraphError("invalid conversation graph: " + "; ".join(map(str, problems)))
