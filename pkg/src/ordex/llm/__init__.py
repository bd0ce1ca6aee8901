from ordex.llm.backends import ChatBackend, GenerationParams, HttpChatBackend, ScriptedBackend, ScriptRule, Transcript, Turn
from ordex.llm.cache import Journal, ResponseCache, request_digest
from ordex.llm.gateway import Gateway, GatewayStats, RetryPolicy
from ordex.llm.messages import ChatMessage, Conversation, Role, assistant, system, user
from ordex.llm.ratelimit import MonotonicClock, RateLimit, RateLimiter, SimulatedClock, acquire_rate_slot

__all__ = [
    "ChatBackend", "ChatMessage", "Conversation", "Gateway", "GatewayStats", "GenerationParams",
    "HttpChatBackend", "Journal", "MonotonicClock", "RateLimit", "RateLimiter", "ResponseCache",
    "RetryPolicy", "Role", "ScriptRule", "ScriptedBackend", "SimulatedClock", "Transcript", "Turn",
    "acquire_rate_slot", "assistant", "request_digest", "system", "user",
]
