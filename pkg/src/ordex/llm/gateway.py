"""Uniform completion entry point: rate limiting, retries, caching, journaling."""

from __future__ import annotations

import asyncio
import logging
from dataclasses import dataclass

from ordex.errors import BackendExhausted, TransientBackendError
from ordex.llm.backends import ChatBackend, GenerationParams
from ordex.llm.cache import Journal, ResponseCache, request_digest
from ordex.llm.messages import ChatMessage, Conversation, assistant
from ordex.llm.ratelimit import Clock, MonotonicClock, RateLimiter
from ordex.textops import estimate_tokens

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RetryPolicy:
    max_attempts: int = 5
    base_delay: float = 1.0
    max_delay: float = 60.0

    def delay(self, attempt: int) -> float:
        """Backoff before retry number ``attempt`` (1-based)."""
        return min(self.base_delay * 2 ** (attempt - 1), self.max_delay)


@dataclass
class GatewayStats:
    backend_calls: int = 0
    cache_hits: int = 0
    retries: int = 0


class Gateway:
    """Shared handle for many concurrent completions against one backend."""

    def __init__(
        self,
        backend: ChatBackend,
        *,
        limiter: RateLimiter | None = None,
        cache: ResponseCache | None = None,
        journal: Journal | None = None,
        retry: RetryPolicy | None = None,
        clock: Clock | None = None,
    ) -> None:
        self.backend = backend
        self.clock = clock or (limiter.clock if limiter else MonotonicClock())
        self.limiter = limiter or RateLimiter(clock=self.clock)
        self.cache = cache
        self.journal = journal or Journal(None)
        self.retry = retry or RetryPolicy()
        self.stats = GatewayStats()
        self._inflight: dict[str, asyncio.Lock] = {}

    async def complete(self, conv: Conversation, params: GenerationParams) -> ChatMessage:
        """Send ``conv`` to the backend, retrying transient failures."""
        if not conv.awaiting_reply:
            raise ValueError("conversation must end with a user message")
        text = await self._call_with_retry(conv, params)
        self.journal.record(request_digest(conv, params), conv, text, cached=False)
        return assistant(text)

    async def cached_complete(self, conv: Conversation, params: GenerationParams) -> ChatMessage:
        if self.cache is None:
            return await self.complete(conv, params)
        digest = request_digest(conv, params)
        lock = self._inflight.setdefault(digest, asyncio.Lock())
        async with lock:
            hit = self.cache.get(digest)
            if hit is not None:
                self.stats.cache_hits += 1
                self.journal.record(digest, conv, hit, cached=True)
                return assistant(hit)
            message = await self.complete(conv, params)
            self.cache.put(digest, conv, params, message.content)
            return message

    async def _call_with_retry(self, conv: Conversation, params: GenerationParams) -> str:
        tokens = sum(estimate_tokens(m.content) for m in conv) + params.max_output_tokens
        last: BaseException | None = None
        for attempt in range(1, self.retry.max_attempts + 1):
            await self.limiter.acquire(tokens)
            self.stats.backend_calls += 1
            try:
                return await self.backend.chat(conv, params)
            except TransientBackendError as exc:
                last = exc
                if attempt == self.retry.max_attempts:
                    break
                self.stats.retries += 1
                wait = self.retry.delay(attempt)
                logger.warning("transient backend error (attempt %d/%d), retrying in %.1fs: %s",
                               attempt, self.retry.max_attempts, wait, exc)
                await self.clock.sleep(wait)
        raise BackendExhausted(self.retry.max_attempts, last)
