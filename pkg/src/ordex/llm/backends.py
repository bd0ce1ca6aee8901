"""Chat-completion backends: a scripted one for tests and an HTTP one for real models."""

from __future__ import annotations

import json
import os
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Mapping, Protocol, Sequence

import httpx
import yaml

from ordex.errors import MalformedResponse, NoScriptMatch, PermanentBackendError, TransientBackendError
from ordex.llm.messages import Conversation


@dataclass(frozen=True)
class GenerationParams:
    model_id: str = "gpt-4"
    temperature: float = 0.0
    max_output_tokens: int = 1024

    def __post_init__(self) -> None:
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.max_output_tokens < 1:
            raise ValueError("max_output_tokens must be positive")

    def to_dict(self) -> dict[str, Any]:
        return {"model_id": self.model_id, "temperature": self.temperature,
                "max_output_tokens": self.max_output_tokens}


class ChatBackend(Protocol):
    async def chat(self, conv: Conversation, params: GenerationParams) -> str: ...


# -- scripted -----------------------------------------------------------------


@dataclass(frozen=True)
class ScriptRule:
    pattern: str
    response: str
    match: str = "exact"  # exact | contains | regex

    def __post_init__(self) -> None:
        if self.match not in ("exact", "contains", "regex"):
            raise ValueError(f"unknown match kind {self.match!r}")

    def matches(self, message: str) -> bool:
        if self.match == "exact":
            return message == self.pattern
        if self.match == "contains":
            return self.pattern in message
        return re.search(self.pattern, message) is not None


@dataclass(frozen=True)
class Turn:
    user: str | None  # None matches any user message at this position
    assistant: str


@dataclass(frozen=True)
class Transcript:
    """Ordered playback script.

    ``system_contains`` restricts playback to conversations whose system
    prompt contains every listed substring.
    """

    turns: tuple[Turn, ...]
    system_contains: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "turns", tuple(t if isinstance(t, Turn) else Turn(*t) for t in self.turns))
        needles = self.system_contains
        object.__setattr__(self, "system_contains", (needles,) if isinstance(needles, str) else tuple(needles or ()))

    def reply(self, conv: Conversation) -> str | None:
        users = conv.user_messages
        k = len(users) - 1
        if k >= len(self.turns):
            return None
        system_prompt = conv.system_prompt or ""
        if not all(needle in system_prompt for needle in self.system_contains):
            return None
        if all(turn.user is None or turn.user == msg for turn, msg in zip(self.turns, users)):
            return self.turns[k].assistant
        return None


class ScriptedBackend:
    """Deterministic backend driven by canned responses.

    Lookup order for a conversation:

    1. Transcripts (ordered playback). A transcript is a list of turns. If
       the conversation's user messages so far equal the transcript's first
       ``k`` user messages, the ``k``-th assistant reply is returned. Several
       transcripts may be loaded; the first whose prefix matches wins. A
       transcript may also require a substring of the system prompt.
    2. ``responses``: exact match on the latest user message.
    3. ``rules``: ordered contains/regex/exact rules on the latest user message.
    4. ``default``, if set.

    Anything else raises :class:`NoScriptMatch`.
    """

    def __init__(
        self,
        responses: Mapping[str, str] | None = None,
        *,
        transcripts: Iterable[Transcript | Sequence[Turn | tuple[str | None, str]]] = (),
        rules: Iterable[ScriptRule] = (),
        default: str | None = None,
    ) -> None:
        self.responses = dict(responses or {})
        self.transcripts = [tr if isinstance(tr, Transcript) else Transcript(tuple(tr)) for tr in transcripts]
        self.rules = list(rules)
        self.default = default
        self.calls = 0
        self.seen: list[Conversation] = []

    async def chat(self, conv: Conversation, params: GenerationParams) -> str:
        self.calls += 1
        self.seen.append(conv)
        return self.lookup(conv)

    def lookup(self, conv: Conversation) -> str:
        users = conv.user_messages
        if not users:
            raise NoScriptMatch("")
        for transcript in self.transcripts:
            reply = transcript.reply(conv)
            if reply is not None:
                return reply
        last = users[-1]
        if last in self.responses:
            return self.responses[last]
        for rule in self.rules:
            if rule.matches(last):
                return rule.response
        if self.default is not None:
            return self.default
        raise NoScriptMatch(last)

    @classmethod
    def from_data(cls, data: Mapping[str, Any]) -> "ScriptedBackend":
        backend = cls()
        backend.extend(data)
        return backend

    def extend(self, data: Mapping[str, Any]) -> None:
        self.responses.update(data.get("responses") or {})
        for rule in data.get("rules") or []:
            self.rules.append(ScriptRule(rule["pattern"], rule["response"], rule.get("match", "exact")))
        for tr in data.get("transcripts") or []:
            turns = tr["turns"] if isinstance(tr, Mapping) else tr
            system_contains = tr.get("system_contains") or () if isinstance(tr, Mapping) else ()
            self.transcripts.append(
                Transcript(tuple(Turn(t.get("user"), t["assistant"]) for t in turns), system_contains))
        if data.get("default") is not None:
            self.default = data["default"]

    @classmethod
    def from_dir(cls, path: str | Path) -> "ScriptedBackend":
        """Load every ``*.json``/``*.yaml``/``*.yml`` script in ``path`` (sorted by name)."""
        root = Path(path)
        files = sorted(p for p in root.iterdir() if p.suffix in (".json", ".yaml", ".yml"))
        if not files:
            raise FileNotFoundError(f"no script files in {root}")
        backend = cls()
        for f in files:
            text = f.read_text(encoding="utf-8")
            data = json.loads(text) if f.suffix == ".json" else yaml.safe_load(text)
            backend.extend(data or {})
        return backend


# -- HTTP ---------------------------------------------------------------------

_TRANSIENT_STATUS = {408, 409, 425, 429}


@dataclass
class HttpChatBackend:
    """OpenAI / Azure OpenAI compatible ``chat/completions`` client.

    With ``api_version`` set the Azure URL layout and ``api-key`` header are
    used: ``{endpoint}/openai/deployments/{model}/chat/completions``.
    Otherwise requests go to ``{endpoint}/v1/chat/completions`` with a
    bearer token.
    """

    endpoint: str
    api_key: str | None = None
    api_version: str | None = None
    timeout: float = 120.0
    transport: httpx.AsyncBaseTransport | None = field(default=None, repr=False)
    _client: httpx.AsyncClient | None = field(default=None, init=False, repr=False)

    @classmethod
    def from_env(cls, env: Mapping[str, str] | None = None) -> "HttpChatBackend":
        env = os.environ if env is None else env
        endpoint = env.get("ORDEX_ENDPOINT") or env.get("AZURE_OPENAI_ENDPOINT") or env.get("OPENAI_BASE_URL")
        if not endpoint:
            raise PermanentBackendError("no endpoint configured; set ORDEX_ENDPOINT")
        key = env.get("ORDEX_API_KEY") or env.get("AZURE_OPENAI_API_KEY") or env.get("OPENAI_API_KEY")
        version = env.get("ORDEX_API_VERSION") or env.get("AZURE_OPENAI_VERSION")
        return cls(endpoint=endpoint, api_key=key, api_version=version)

    def url(self, params: GenerationParams) -> str:
        base = self.endpoint.rstrip("/")
        if self.api_version:
            return f"{base}/openai/deployments/{params.model_id}/chat/completions?api-version={self.api_version}"
        return f"{base}/v1/chat/completions"

    def headers(self) -> dict[str, str]:
        h = {"Content-Type": "application/json"}
        if self.api_key:
            if self.api_version:
                h["api-key"] = self.api_key
            else:
                h["Authorization"] = f"Bearer {self.api_key}"
        return h

    @staticmethod
    def payload(conv: Conversation, params: GenerationParams) -> dict[str, Any]:
        return {
            "model": params.model_id,
            "messages": conv.to_list(),
            "temperature": params.temperature,
            "max_tokens": params.max_output_tokens,
        }

    def _get_client(self) -> httpx.AsyncClient:
        if self._client is None:
            self._client = httpx.AsyncClient(timeout=self.timeout, transport=self.transport)
        return self._client

    async def aclose(self) -> None:
        if self._client is not None:
            await self._client.aclose()
            self._client = None

    async def chat(self, conv: Conversation, params: GenerationParams) -> str:
        client = self._get_client()
        try:
            resp = await client.post(self.url(params), headers=self.headers(), json=self.payload(conv, params))
        except (httpx.TimeoutException, httpx.TransportError) as exc:
            raise TransientBackendError(f"transport error: {exc!r}") from exc
        status = resp.status_code
        if status in _TRANSIENT_STATUS or status >= 500:
            raise TransientBackendError(f"HTTP {status}: {resp.text[:200]}")
        if status >= 400:
            raise PermanentBackendError(f"HTTP {status}: {resp.text[:200]}", status_code=status)
        return parse_chat_response(resp.content)


def parse_chat_response(body: bytes | str) -> str:
    try:
        data = json.loads(body)
        content = data["choices"][0]["message"]["content"]
    except (ValueError, KeyError, IndexError, TypeError) as exc:
        raise MalformedResponse(f"unparseable chat response: {str(body)[:200]}") from exc
    if content is None:
        # content filters return a null message body
        return ""
    if not isinstance(content, str):
        raise MalformedResponse(f"message content is not a string: {content!r}")
    return content
