"""YAML tree definition files.

Grammar (all keys other than ``root``, ``nodes`` and ``edges`` are optional)::

    name: <string>
    root: <node id>
    system: <template>              # system preamble, may use placeholders
    nodes:
      - id: <node id>
        prompt: <template>          # omitted for prompt-less leaves
    edges:                          # per source node, listed in priority order
      - from: <node id>
        to: <node id>
        when: {contains: <keyword>} # or {option: "7.1"}, {regex: <pattern>}, {always: true}
        label: <string>
        bind: {<name>: <value>}     # recorded into run bindings when taken

Templates may contain ``{text}``, ``{feature}`` and ``{binding:NAME}``.
Only ``true``/``false`` load as booleans; ``yes``/``no`` stay strings.
"""

from __future__ import annotations

import re
from pathlib import Path
from typing import Any

import yaml

from ordex.errors import TreeFileError
from ordex.tree import conditions
from ordex.tree.graph import ConversationGraph, Edge, PromptNode


class _Dumper(yaml.SafeDumper):
    pass


def _str_presenter(dumper: yaml.SafeDumper, data: str) -> yaml.ScalarNode:
    if "\n" in data:
        return dumper.represent_scalar("tag:yaml.org,2002:str", data, style="|")
    return dumper.represent_scalar("tag:yaml.org,2002:str", data)


_Dumper.add_representer(str, _str_presenter)


class _Loader(yaml.SafeLoader):
    """Safe loader where only true/false are booleans, so ``label: yes`` stays a string."""


_Loader.yaml_implicit_resolvers = {
    first: [(tag, rx) for tag, rx in resolvers if tag != "tag:yaml.org,2002:bool"]
    for first, resolvers in yaml.SafeLoader.yaml_implicit_resolvers.items()
}
_Loader.add_implicit_resolver(
    "tag:yaml.org,2002:bool", re.compile(r"^(?:true|True|TRUE|false|False|FALSE)$"), list("tTfF")
)


def graph_to_dict(graph: ConversationGraph) -> dict[str, Any]:
    def template(value: Any, where: str) -> str | None:
        if value is None or isinstance(value, str):
            return value
        raise TreeFileError(f"{where} is a callable and cannot be serialized")

    out: dict[str, Any] = {"name": graph.name, "root": graph.root}
    system = template(graph.system_prompt, "system prompt")
    if system is not None:
        out["system"] = system
    nodes = []
    for n in graph.nodes:
        entry: dict[str, Any] = {"id": n.id}
        prompt = template(n.prompt, f"prompt of node {n.id!r}")
        if prompt is not None:
            entry["prompt"] = prompt
        nodes.append(entry)
    out["nodes"] = nodes
    edges = []
    for e in graph.edges:
        kind = getattr(e.condition, "kind", None)
        if kind not in conditions.DECLARATIVE:
            raise TreeFileError(f"edge {e.source}->{e.destination} uses a non-declarative condition")
        entry = {"from": e.source, "to": e.destination, "when": {kind: e.condition.arg}}
        if e.label:
            entry["label"] = e.label
        if e.bind:
            entry["bind"] = dict(e.bind)
        edges.append(entry)
    out["edges"] = edges
    return out


def graph_from_dict(data: Any) -> ConversationGraph:
    if not isinstance(data, dict):
        raise TreeFileError("tree file must contain a mapping at the top level")
    try:
        root = data["root"]
        raw_nodes = data["nodes"]
        raw_edges = data.get("edges") or []
    except KeyError as exc:
        raise TreeFileError(f"tree file missing required key {exc.args[0]!r}") from None

    nodes = []
    for i, n in enumerate(raw_nodes):
        if not isinstance(n, dict) or "id" not in n:
            raise TreeFileError(f"node #{i} must be a mapping with an 'id'")
        nodes.append(PromptNode(str(n["id"]), n.get("prompt")))

    edges = []
    for i, e in enumerate(raw_edges):
        try:
            when = e["when"]
            if not isinstance(when, dict) or len(when) != 1:
                raise TreeFileError(f"edge #{i}: 'when' must have exactly one condition")
            (kind, arg), = when.items()
            cond = conditions.from_spec(kind, arg)
            label = e.get("label", "")
            if not isinstance(label, str):
                raise TreeFileError(f"edge #{i}: label must be a string")
            edges.append(Edge(str(e["from"]), str(e["to"]), cond, label, e.get("bind") or {}))
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, TreeFileError):
                raise
            raise TreeFileError(f"edge #{i}: {exc}") from exc
    return ConversationGraph(tuple(nodes), tuple(edges), str(root), data.get("system"), data.get("name", ""))


def dumps(graph: ConversationGraph) -> str:
    return yaml.dump(graph_to_dict(graph), Dumper=_Dumper, sort_keys=False, allow_unicode=True, width=100)


def loads(text: str) -> ConversationGraph:
    try:
        data = yaml.load(text, Loader=_Loader)
    except yaml.YAMLError as exc:
        raise TreeFileError(f"invalid YAML: {exc}") from exc
    return graph_from_dict(data)


def load(path: str | Path) -> ConversationGraph:
    return loads(Path(path).read_text(encoding="utf-8"))


def save(graph: ConversationGraph, path: str | Path) -> None:
    Path(path).write_text(dumps(graph), encoding="utf-8")
