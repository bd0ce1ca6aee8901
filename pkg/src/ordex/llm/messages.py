"""Chat message and conversation value types."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field


class Role(str, enum.Enum):
    SYSTEM = "system"
    USER = "user"
    ASSISTANT = "assistant"


@dataclass(frozen=True)
class ChatMessage:
    role: Role
    content: str

    def __post_init__(self) -> None:
        object.__setattr__(self, "role", Role(self.role))
        if not isinstance(self.content, str):
            raise TypeError("message content must be a string")
        if not self.content and self.role is not Role.ASSISTANT:
            raise ValueError(f"{self.role.value} messages may not be empty")

    @property
    def is_placeholder(self) -> bool:
        """Empty assistant content, e.g. a backend that returned nothing."""
        return self.role is Role.ASSISTANT and not self.content

    def to_dict(self) -> dict[str, str]:
        return {"role": self.role.value, "content": self.content}

    @classmethod
    def from_dict(cls, data: dict) -> "ChatMessage":
        return cls(Role(data["role"]), data["content"])


def system(content: str) -> ChatMessage:
    return ChatMessage(Role.SYSTEM, content)


def user(content: str) -> ChatMessage:
    return ChatMessage(Role.USER, content)


def assistant(content: str) -> ChatMessage:
    return ChatMessage(Role.ASSISTANT, content)


def _check_order(messages: tuple[ChatMessage, ...]) -> None:
    body = messages
    if body and body[0].role is Role.SYSTEM:
        body = body[1:]
    for i, msg in enumerate(body):
        expected = Role.USER if i % 2 == 0 else Role.ASSISTANT
        if msg.role is not expected:
            raise ValueError(
                f"message {i} after the system preamble has role {msg.role.value}, expected {expected.value}"
            )


@dataclass(frozen=True)
class Conversation:
    """Immutable message list: optional system preamble, then user/assistant turns."""

    messages: tuple[ChatMessage, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        msgs = tuple(self.messages)
        _check_order(msgs)
        object.__setattr__(self, "messages", msgs)

    def __len__(self) -> int:
        return len(self.messages)

    def __iter__(self):
        return iter(self.messages)

    def __getitem__(self, idx):
        return self.messages[idx]

    def append(self, message: ChatMessage) -> "Conversation":
        return Conversation(self.messages + (message,))

    @property
    def system_prompt(self) -> str | None:
        if self.messages and self.messages[0].role is Role.SYSTEM:
            return self.messages[0].content
        return None

    @property
    def last_user_message(self) -> str | None:
        for msg in reversed(self.messages):
            if msg.role is Role.USER:
                return msg.content
        return None

    @property
    def user_messages(self) -> list[str]:
        return [m.content for m in self.messages if m.role is Role.USER]

    @property
    def awaiting_reply(self) -> bool:
        return bool(self.messages) and self.messages[-1].role is Role.USER

    def to_list(self) -> list[dict[str, str]]:
        return [m.to_dict() for m in self.messages]

    @classmethod
    def from_list(cls, items: list[dict]) -> "Conversation":
        return cls(tuple(ChatMessage.from_dict(m) for m in items))
