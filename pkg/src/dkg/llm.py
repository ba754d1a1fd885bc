"""Chat-completion abstraction: prompt templates, history windowing,
multi-sample drawing, and a deterministic record/replay harness.

Requests are keyed by a stable digest of the canonicalized messages plus
sampling parameters; a transcript maps digests to recorded responses so a
full pipeline run can be replayed byte-for-byte without a live backend.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path


class Role(Enum):
    SYSTEM = "system"
    USER = "user"
    ASSISTANT = "assistant"


@dataclass(frozen=True)
class ChatMessage:
    role: Role
    content: str

    def __post_init__(self) -> None:
        if not self.content:
            raise ValueError("message content must be nonempty")


class UnboundSlot(Exception):
    def __init__(self, slot: str):
        super().__init__(f"template slot {slot!r} is not bound")
        self.slot = slot


_MARKER = re.compile(r"\{\{(\w+)\}\}")


@dataclass(frozen=True)
class PromptTemplate:
    """A staged prompt with ``{{slot}}`` markers in the system/user bodies."""

    id: str
    slots: tuple[str, ...]
    system: str
    body: str

    def __post_init__(self) -> None:
        referenced = set(_MARKER.findall(self.system)) | set(_MARKER.findall(self.body))
        missing = referenced - set(self.slots)
        if missing:
            raise ValueError(f"template {self.id!r} references undeclared slots {sorted(missing)}")

    def render(self, bindings: dict[str, str]) -> list[ChatMessage]:
        """Substitute all slots; system message first, marker-free output."""
        for slot in self.slots:
            if slot not in bindings:
                raise UnboundSlot(slot)

        def fill(text: str) -> str:
            return _MARKER.sub(lambda m: bindings[m.group(1)], text)

        messages = []
        if self.system:
            messages.append(ChatMessage(Role.SYSTEM, fill(self.system)))
        messages.append(ChatMessage(Role.USER, fill(self.body)))
        return messages


def render(template: PromptTemplate, bindings: dict[str, str]) -> list[ChatMessage]:
    return template.render(bindings)


def estimate_tokens(message: ChatMessage) -> int:
    # chars/4 is a backend-agnostic monotone proxy; windowing needs no more
    return math.ceil(len(message.content) / 4)


class BudgetTooSmall(Exception):
    pass


def window_history(history: list[ChatMessage], budget: int) -> list[ChatMessage]:
    """Keep the system message plus the longest recent suffix fitting the
    token budget; never splits or reorders messages."""
    if budget <= 0:
        raise ValueError("budget must be positive")
    if not history:
        return []
    system: list[ChatMessage] = []
    rest = history
    if history[0].role is Role.SYSTEM:
        system, rest = [history[0]], history[1:]
        budget -= estimate_tokens(history[0])
        if budget < 0:
            raise BudgetTooSmall("system message alone exceeds the budget")
    kept: list[ChatMessage] = []
    for message in reversed(rest):
        cost = estimate_tokens(message)
        if cost > budget:
            break
        kept.append(message)
        budget -= cost
    return system + kept[::-1]


# --- digests and transcripts --------------------------------------------------

def request_digest(messages: list[ChatMessage], n: int, params: dict) -> str:
    canonical = json.dumps(
        {
            "messages": [{"role": m.role.value, "content": m.content} for m in messages],
            "n": n,
            "params": params,
        },
        sort_keys=True,
        ensure_ascii=False,
    )
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


class Transcript:
    """Recorded responses keyed by request digest; JSONL on disk."""

    def __init__(self) -> None:
        self.records: dict[str, list[str]] = {}

    def put(self, digest: str, responses: list[str]) -> None:
        if digest in self.records and self.records[digest] != responses:
            raise ValueError(f"conflicting responses for digest {digest}")
        self.records[digest] = list(responses)

    def get(self, digest: str) -> list[str] | None:
        return self.records.get(digest)

    def save(self, path: str | Path) -> None:
        lines = [json.dumps({"digest": d, "responses": r}, sort_keys=True, ensure_ascii=False)
                 for d, r in sorted(self.records.items())]
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> Transcript:
        transcript = cls()
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            if line.strip():
                record = json.loads(line)
                transcript.put(record["digest"], record["responses"])
        return transcript


# --- backends -----------------------------------------------------------------

class BackendError(Exception):
    pass


class ReplayMiss(Exception):
    def __init__(self, digest: str):
        super().__init__(f"transcript has no record for digest {digest}")
        self.digest = digest


class Backend:
    def complete(self, messages: list[ChatMessage], n: int = 1,
                 params: dict | None = None) -> list[str]:
        raise NotImplementedError


class ReplayBackend(Backend):
    """Answers from a recorded transcript; misses fail loudly."""

    def __init__(self, transcript: Transcript):
        self.transcript = transcript

    def complete(self, messages, n=1, params=None):
        digest = request_digest(messages, n, params or {})
        responses = self.transcript.get(digest)
        if responses is None:
            raise ReplayMiss(digest)
        return list(responses)


class ScriptedBackend(Backend):
    """Returns queued responses in order while recording a transcript.

    Used to build replay fixtures: run once with scripted responses, persist
    the transcript, then replay deterministically ever after.
    """

    def __init__(self, responses: list[str]):
        self.queue = list(responses)
        self.transcript = Transcript()

    def complete(self, messages, n=1, params=None):
        if len(self.queue) < n:
            raise BackendError(f"script exhausted: need {n} responses, have {len(self.queue)}")
        batch, self.queue = self.queue[:n], self.queue[n:]
        self.transcript.put(request_digest(messages, n, params or {}), batch)
        return batch


class LiveBackend(Backend):
    """OpenAI-style chat-completions HTTP backend."""

    def __init__(self, endpoint: str, model: str, api_key: str | None = None,
                 timeout: float = 120.0):
        self.endpoint = endpoint.rstrip("/")
        self.model = model
        self.api_key = api_key
        self.timeout = timeout

    def complete(self, messages, n=1, params=None):
        import httpx

        params = params or {}
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        payload = {
            "model": self.model,
            "messages": [{"role": m.role.value, "content": m.content} for m in messages],
            "n": n,
            "temperature": params.get("temperature", 0.2),
        }
        try:
            response = httpx.post(f"{self.endpoint}/chat/completions", json=payload,
                                  headers=headers, timeout=self.timeout)
            response.raise_for_status()
            data = response.json()
            texts = [choice["message"]["content"] for choice in data["choices"]]
        except Exception as exc:  # transport, auth, and shape failures alike
            raise BackendError(str(exc)) from exc
        if len(texts) != n:
            raise BackendError(f"backend returned {len(texts)} responses, expected {n}")
        return texts


class RecordingBackend(Backend):
    """Forwards to an inner backend and records every exchange."""

    def __init__(self, inner: Backend, transcript: Transcript | None = None):
        self.inner = inner
        self.transcript = transcript or Transcript()

    def complete(self, messages, n=1, params=None):
        responses = self.inner.complete(messages, n, params)
        self.transcript.put(request_digest(messages, n, params or {}), responses)
        return responses


def backend_from_env(env: dict[str, str] | None = None) -> Backend:
    """Backend selection via environment: DKG_BACKEND=replay|live plus
    DKG_TRANSCRIPT / DKG_ENDPOINT / DKG_MODEL / DKG_API_KEY."""
    env = dict(os.environ) if env is None else env
    kind = env.get("DKG_BACKEND", "replay")
    if kind == "replay":
        path = env.get("DKG_TRANSCRIPT")
        if not path:
            raise BackendError("replay backend needs DKG_TRANSCRIPT")
        return ReplayBackend(Transcript.load(path))
    if kind == "live":
        endpoint = env.get("DKG_ENDPOINT")
        model = env.get("DKG_MODEL")
        if not endpoint or not model:
            raise BackendError("live backend needs DKG_ENDPOINT and DKG_MODEL")
        return LiveBackend(endpoint, model, env.get("DKG_API_KEY"))
    raise BackendError(f"unknown backend kind {kind!r}")
