from __future__ import annotations

import random

import pytest

import oracles
from conftest import FIXTURES, run
from ordex.errors import GraphError, NoScriptMatch, TreeFileError
from ordex.llm import ScriptedBackend
from ordex.ordinance import FeatureType, build_wind_tree
from ordex.tree import (
    Always,
    Contains,
    ConversationGraph,
    Custom,
    Edge,
    LeafResult,
    NoMatch,
    Option,
    PromptNode,
    Regex,
    RunState,
    render_template,
    transcript,
    validate,
)
from ordex.tree import treefile
from ordex.tree.conditions import from_spec

TREES = FIXTURES / "trees"


def kinds(graph) -> list[tuple[str, str]]:
    return [(v.kind, v.element) for v in validate(graph)]


# -- conditions ---------------------------------------------------------------------


def test_contains_is_case_insensitive():
    assert Contains("yes")("YES, there is")
    assert not Contains("yes")("No")


@pytest.mark.parametrize("response, number, hit", [
    ("#7.1 The setback has multiple conditions", "7.1", True),
    ("I choose #7.10", "7.1", False),
    ("#1.1", "1", False),
    ("#0 None of the above", "0", True),
    ("Option # 2.1", "#2.1", True),
])
def test_option_matching(response, number, hit):
    assert Option(number)(response) is hit


def test_regex_and_always():
    assert Regex(r"^\W*yes\b")("  Yes.")
    assert not Regex(r"^\W*yes\b")("Not yes")
    assert Always()("")


def test_from_spec():
    assert from_spec("contains", "x") == Contains("x")
    assert from_spec("always", True) == Always()
    with pytest.raises(ValueError):
        from_spec("fuzzy", "x")


# -- validation ---------------------------------------------------------------------


def test_chain_is_valid():
    assert validate(treefile.load(TREES / "chain.yaml")) == []


def test_cycle_fixture():
    assert kinds(treefile.load(TREES / "cycle.yaml")) == [("cycle", "A")]


def test_self_loop_fixture():
    assert kinds(treefile.load(TREES / "self_loop.yaml")) == [("self_loop", "A")]


def test_unreachable_fixture():
    assert kinds(treefile.load(TREES / "unreachable.yaml")) == [("unreachable", "D")]


def test_structural_violations():
    g = ConversationGraph(
        (PromptNode("r", "p"), PromptNode("r"), PromptNode("x")),
        (Edge("r", "ghost", Always()), Edge("x", "r", Always())),
        "r",
    )
    found = kinds(g)
    assert ("duplicate_node", "r") in found
    assert ("dangling_edge", "r->ghost") in found
    assert ("root_has_incoming", "x->r") in found
    assert ("missing_prompt", "x") in found
    assert kinds(ConversationGraph((PromptNode("a"),), (), "nope")) == [("missing_root", "nope")]


@pytest.mark.parametrize("feature", list(FeatureType))
def test_wind_trees_validate_clean(feature):
    assert validate(build_wind_tree(feature)) == []


def reachable_oracle(nodes, edges, root):
    """Reachability by repeated relaxation (no queue), for cross-checking BFS."""
    seen = {root}
    changed = True
    while changed:
        changed = False
        for s, d in edges:
            if s in seen and d not in seen:
                seen.add(d)
                changed = True
    return seen


def test_unreachable_matches_reachability_oracle():
    rng = random.Random(11)
    for _ in range(200):
        n = rng.randint(1, 9)
        ids = [f"n{i}" for i in range(n)]
        edges = [(ids[i], ids[j]) for i in range(n) for j in range(i + 1, n) if rng.random() < 0.25 and j != 0]
        g = ConversationGraph(tuple(PromptNode(i, "p") for i in ids), tuple(Edge(s, d, Always()) for s, d in edges), "n0")
        expected = sorted(set(ids) - reachable_oracle(ids, edges, "n0"))
        assert sorted(e for k, e in kinds(g) if k == "unreachable") == expected


# -- running ----------------------------------------------------------------------------


def test_single_node_graph():
    g = ConversationGraph((PromptNode("only", "P"),), (), "only")
    out = run(run_graph(g, ScriptedBackend({"P": "R"})))
    assert isinstance(out, LeafResult)
    assert out.final_response == "R" and out.leaf_id == "only"
    assert [m.content for m in transcript(out)] == ["P", "R"]


def run_graph(graph, backend, text="doc", feature="roads"):
    from ordex.tree import run as run_tree

    return run_tree(graph, text, feature, backend)


def test_yes_no_fixture_takes_no_branch():
    g = treefile.load(TREES / "yes_no.yaml")
    out = run(run_graph(g, ScriptedBackend(default="No"), text="ORDINANCE", feature=FeatureType.ROADS))
    assert out.leaf_id == "L2" and out.final_response == "No"
    msgs = transcript(out).messages
    assert len(msgs) == 3  # system preamble + one prompting node
    assert len([m for m in msgs if m.role.value != "system"]) == 2
    assert msgs[0].content == "Answer about roads using this text: ORDINANCE"
    assert out.visited == ("root", "L2")


def test_first_declared_edge_wins():
    g = treefile.load(TREES / "yes_no.yaml")
    out = run(run_graph(g, ScriptedBackend(default="Yes. No.")))
    assert out.leaf_id == "L1"


def test_no_match_is_returned_with_context():
    g = treefile.load(TREES / "yes_no.yaml")
    out = run(run_graph(g, ScriptedBackend(default="Maybe")))
    assert isinstance(out, NoMatch)
    assert (out.node_id, out.response) == ("root", "Maybe")
    assert out.prompt == "Is there a setback? Say Yes or No."
    assert transcript(out).messages[-1].content == "Maybe"


def test_backend_errors_propagate():
    g = treefile.load(TREES / "yes_no.yaml")
    with pytest.raises(NoScriptMatch):
        run(run_graph(g, ScriptedBackend()))


def test_invalid_graph_refused():
    with pytest.raises(GraphError):
        run(run_graph(treefile.load(TREES / "cycle.yaml"), ScriptedBackend(default="x")))


def test_leaf_prompt_is_issued_and_bindings_recorded():
    g = ConversationGraph(
        (PromptNode("q", "kind?"), PromptNode("leaf", "Report {binding:kind} for {feature}")),
        (Edge("q", "leaf", Contains("fixed"), bind={"kind": "fixed_distance"}),),
        "q",
    )
    backend = ScriptedBackend({"kind?": "fixed", "Report fixed_distance for roads": "done"})
    out = run(run_graph(g, backend))
    assert out.final_response == "done" and out.bindings == {"kind": "fixed_distance"}
    assert len(transcript(out)) == 4


def test_bindings_are_write_once():
    state = RunState("t", "f")
    state.bind("k", "a")
    state.bind("k", "a")
    with pytest.raises(GraphError):
        state.bind("k", "b")


def test_template_placeholders():
    state = RunState("TEXT", FeatureType.NOISE, bindings={"kind": "x"})
    assert render_template("{text}|{feature}|{binding:kind}|{other}", state) == "TEXT|noise|x|{other}"
    with pytest.raises(GraphError):
        render_template("{binding:missing}", state)


def test_custom_condition_runs_but_does_not_serialize():
    g = ConversationGraph(
        (PromptNode("q", "n?"), PromptNode("big"), PromptNode("small")),
        (Edge("q", "big", Custom(lambda r, s: int(r) > 10)), Edge("q", "small", Always())),
        "q",
    )
    assert run(run_graph(g, ScriptedBackend(default="42"))).leaf_id == "big"
    with pytest.raises(TreeFileError):
        treefile.dumps(g)


# -- oracle equivalence on random DAGs ------------------------------------------------------

VOCAB = ["alpha", "beta", "gamma", "delta"]


def random_dag(rng: random.Random):
    n = rng.randint(1, 10)
    ids = [f"n{i}" for i in range(n)]
    edges: list[tuple[str, str, str | None]] = []
    for j in range(1, n):
        # guarantee reachability from the root through an earlier node
        edges.append((ids[rng.randrange(j)], ids[j], rng.choice(VOCAB + [None])))
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < 0.2:
                edges.append((ids[i], ids[j], rng.choice(VOCAB + [None])))
    rng.shuffle(edges)  # declaration order is the priority under test
    sources = {e[0] for e in edges}
    prompts = {i: (f"prompt {i}" if i in sources or rng.random() < 0.5 else None) for i in ids}
    replies = {f"prompt {i}": " ".join(rng.sample(VOCAB, rng.randint(0, 2))) or "nothing" for i in ids}
    return ids, prompts, edges, replies


def test_engine_matches_interpreter_on_200_random_dags():
    rng = random.Random(1234)
    divergences = 0
    for _ in range(200):
        ids, prompts, edges, replies = random_dag(rng)
        graph = ConversationGraph(
            tuple(PromptNode(i, prompts[i]) for i in ids),
            tuple(Edge(s, d, Always() if k is None else Contains(k)) for s, d, k in edges),
            "n0",
        )
        assert validate(graph) == []
        expected = oracles.interpret(prompts, edges, "n0", replies.__getitem__)
        out = run(run_graph(graph, ScriptedBackend(replies)))
        got = (("leaf", out.leaf_id, list(out.visited), out.final_response) if isinstance(out, LeafResult)
               else ("nomatch", out.node_id, list(out.visited), out.response))
        divergences += got != expected
        prompting = sum(1 for v in out.visited if prompts[v] is not None)
        assert len(transcript(out)) == 2 * prompting
        assert len(out.visited) <= len(ids)
    assert divergences == 0


# -- tree files ------------------------------------------------------------------------------


@pytest.mark.parametrize("name", ["chain", "cycle", "self_loop", "unreachable", "yes_no"])
def test_fixture_round_trip(name):
    g = treefile.load(TREES / f"{name}.yaml")
    assert treefile.loads(treefile.dumps(g)) == g


@pytest.mark.parametrize("feature", list(FeatureType))
def test_wind_tree_round_trip(feature, tmp_path):
    g = build_wind_tree(feature)
    path = tmp_path / "tree.yaml"
    treefile.save(g, path)
    again = treefile.load(path)
    assert again == g
    assert treefile.dumps(again) == treefile.dumps(g)


@pytest.mark.parametrize("text", [
    "nodes: []\nedges: []\n",  # no root
    "root: a\nnodes: [{id: a}]\nedges: [{from: a, to: a, when: {fuzzy: x}}]\n",
    "root: a\nnodes: [{prompt: p}]\nedges: []\n",
    "- just a list\n",
    "root: a\nnodes: [{id: a}]\nedges: [{from: a, to: b, when: {contains: x, regex: y}}]\n",
])
def test_malformed_tree_files(text):
    with pytest.raises(TreeFileError):
        treefile.loads(text)
