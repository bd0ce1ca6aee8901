"""Sliding-window request/token rate limiting on an injectable clock."""

from __future__ import annotations

import asyncio
import time
from collections import deque
from dataclasses import dataclass
from typing import Protocol

WINDOW_SECONDS = 60.0


class Clock(Protocol):
    def now(self) -> float: ...

    async def sleep(self, seconds: float) -> None: ...


class MonotonicClock:
    def now(self) -> float:
        return time.monotonic()

    async def sleep(self, seconds: float) -> None:
        await asyncio.sleep(seconds)


class SimulatedClock:
    """Clock whose time only moves when someone sleeps or calls ``advance``."""

    def __init__(self, start: float = 0.0) -> None:
        self._now = start
        self.sleeps: list[float] = []

    def now(self) -> float:
        return self._now

    def advance(self, seconds: float) -> None:
        self._now += seconds

    async def sleep(self, seconds: float) -> None:
        self.sleeps.append(seconds)
        if seconds > 0:
            self._now += seconds
        await asyncio.sleep(0)


@dataclass(frozen=True)
class RateLimit:
    """Per-minute bounds; ``None`` means that dimension is unbounded."""

    max_requests_per_minute: int | None = None
    max_tokens_per_minute: int | None = None

    def __post_init__(self) -> None:
        for name in ("max_requests_per_minute", "max_tokens_per_minute"):
            value = getattr(self, name)
            if value is not None and value < 1:
                raise ValueError(f"{name} must be positive or None")

    @classmethod
    def unlimited(cls) -> "RateLimit":
        return cls()

    @property
    def is_unlimited(self) -> bool:
        return self.max_requests_per_minute is None and self.max_tokens_per_minute is None


class RateLimiter:
    """Schedules grants so no 60 s window exceeds the configured bounds.

    Reservations are first-come first-served: a request never receives a
    grant time earlier than one already handed out. A single request whose
    token estimate alone exceeds the token bound is admitted once the window
    is otherwise empty.
    """

    def __init__(self, limit: RateLimit | None = None, clock: Clock | None = None,
                 window: float = WINDOW_SECONDS) -> None:
        self.limit = limit or RateLimit.unlimited()
        self.clock = clock or MonotonicClock()
        self.window = window
        self._log: deque[tuple[float, int]] = deque()
        self._last_grant = float("-inf")

    def reserve(self, estimated_tokens: int, now: float) -> float:
        """Record a grant and return the clock time at which it may proceed."""
        if self.limit.is_unlimited:
            return now
        max_req = self.limit.max_requests_per_minute
        max_tok = self.limit.max_tokens_per_minute
        t = max(now, self._last_grant)
        while True:
            # entries whose window has closed by t can never matter again
            while self._log and self._log[0][0] + self.window <= t:
                self._log.popleft()
            entries = self._log
            if max_req is not None and len(entries) >= max_req:
                t = entries[len(entries) - max_req][0] + self.window
                continue
            if max_tok is not None and entries:
                total = sum(tok for _, tok in entries) + estimated_tokens
                if total > max_tok:
                    i = 0
                    while i < len(entries) and total > max_tok:
                        total -= entries[i][1]
                        i += 1
                    t = entries[i - 1][0] + self.window
                    continue
            break
        self._log.append((t, estimated_tokens))
        self._last_grant = t
        return t

    async def acquire(self, estimated_tokens: int = 0) -> float:
        now = self.clock.now()
        grant = self.reserve(estimated_tokens, now)
        if grant > now:
            await self.clock.sleep(grant - now)
        return grant


async def acquire_rate_slot(limiter: RateLimiter, estimated_tokens: int, clock: Clock | None = None) -> float:
    """Wait for permission to send one request of ``estimated_tokens``."""
    if clock is not None and clock is not limiter.clock:
        now = clock.now()
        grant = limiter.reserve(estimated_tokens, now)
        if grant > now:
            await clock.sleep(grant - now)
        return grant
    return await limiter.acquire(estimated_tokens)
