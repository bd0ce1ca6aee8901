"""Run a conversation graph against a chat backend."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Union

from ordex.llm import Conversation, Gateway, GenerationParams, system, user
from ordex.llm.backends import ChatBackend
from ordex.tree.graph import ConversationGraph, NodeId, RunState, require_valid


@dataclass(frozen=True)
class LeafResult:
    leaf_id: NodeId
    final_response: str
    bindings: dict[str, Any]
    transcript: Conversation
    visited: tuple[NodeId, ...] = ()


@dataclass(frozen=True)
class NoMatch:
    """No outgoing edge accepted the response at ``node_id``."""

    node_id: NodeId
    prompt: str
    response: str
    transcript: Conversation
    visited: tuple[NodeId, ...] = ()
    bindings: dict[str, Any] = field(default_factory=dict)


RunOutcome = Union[LeafResult, NoMatch]


def as_gateway(backend: Gateway | ChatBackend) -> Gateway:
    return backend if isinstance(backend, Gateway) else Gateway(backend)


async def _ask(gateway: Gateway, state: RunState, prompt: str, params: GenerationParams) -> str:
    state.conversation = state.conversation.append(user(prompt))
    reply = await gateway.cached_complete(state.conversation, params)
    state.conversation = state.conversation.append(reply)
    return reply.content


async def run(
    graph: ConversationGraph,
    text: str,
    feature: Any,
    backend: Gateway | ChatBackend,
    params: GenerationParams | None = None,
    *,
    check: bool = True,
) -> RunOutcome:
    """Walk ``graph`` from its root.

    Each non-leaf node prompts the model and the first outgoing edge whose
    condition accepts the reply is followed. On reaching a leaf that has a
    prompt, the prompt is issued and its reply is the final answer; a leaf
    without a prompt returns the reply that led into it. Backend errors
    propagate unchanged.
    """
    if check:
        require_valid(graph)
    gateway = as_gateway(backend)
    params = params or GenerationParams()
    state = RunState(text=text, feature=feature)
    preamble = graph.build_system_prompt(state)
    if preamble is not None:
        state.conversation = Conversation((system(preamble),))

    node_id = graph.root
    visited: list[NodeId] = []
    response = ""
    while not graph.is_leaf(node_id):
        visited.append(node_id)
        prompt = graph.node(node_id).build_prompt(state)
        assert prompt is not None  # validate() rejects non-leaf nodes without prompts
        response = await _ask(gateway, state, prompt, params)
        for edge in graph.out_edges(node_id):
            if edge.condition(response, state):
                for name, value in edge.bind:
                    state.bind(name, value)
                node_id = edge.destination
                break
        else:
            return NoMatch(node_id, prompt, response, state.conversation, tuple(visited), dict(state.bindings))

    visited.append(node_id)
    leaf_prompt = graph.node(node_id).build_prompt(state)
    if leaf_prompt is not None:
        response = await _ask(gateway, state, leaf_prompt, params)
    return LeafResult(node_id, response, dict(state.bindings), state.conversation, tuple(visited))


def transcript(outcome: RunOutcome) -> Conversation:
    return outcome.transcript
