from ordex.tree.conditions import Always, Contains, Custom, Option, Regex
from ordex.tree.engine import LeafResult, NoMatch, RunOutcome, run, transcript
from ordex.tree.graph import (
    ConversationGraph,
    Edge,
    PromptNode,
    RunState,
    Violation,
    render_template,
    require_valid,
    validate,
)

__all__ = [
    "Always", "Contains", "ConversationGraph", "Custom", "Edge", "LeafResult", "NoMatch", "Option",
    "PromptNode", "Regex", "RunOutcome", "RunState", "Violation", "render_template", "require_valid",
    "run", "transcript", "validate",
]
