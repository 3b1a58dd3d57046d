"""Chat-backend abstraction: payload/response types, an OpenAI-style HTTP
client, and deterministic offline backends for tests and CI.

A backend receives a :class:`PromptPayload` and returns either plain text or a
function call with a raw JSON arguments string. The offline backends derive
every reply purely from the payload content, so runs are reproducible at any
concurrency level.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Protocol, runtime_checkable

import requests

from .errors import BackendError

DEFAULT_AUTH_ENV = "XLINSTRUCT_API_KEY"


@dataclass(frozen=True)
class DecodingConfig:
    """Sampling settings sent with every request.

    Temperature defaults to 0.0 so corpus runs are as reproducible as the
    backend allows.
    """

    temperature: float = 0.0
    max_output_tokens: int = 2048
    request_timeout: float = 60.0

    def __post_init__(self) -> None:
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.max_output_tokens <= 0:
            raise ValueError("max_output_tokens must be positive")


@dataclass(frozen=True)
class FunctionSchema:
    """A callable-tool definition attached to a chat request."""

    name: str
    description: str
    parameters: dict[str, Any]

    def to_json(self) -> str:
        return json.dumps(
            {
                "name": self.name,
                "description": self.description,
                "parameters": self.parameters,
            },
            indent=2,
            ensure_ascii=False,
        )


@dataclass(frozen=True)
class PromptPayload:
    """One rendered request: text, optional attached function, decoding."""

    system_or_user_text: str
    attached_function: FunctionSchema | None = None
    decoding: DecodingConfig = field(default_factory=DecodingConfig)


@dataclass(frozen=True)
class TextResponse:
    text: str


@dataclass(frozen=True)
class FunctionCallResponse:
    name: str
    arguments: str  # raw JSON text as returned by the backend


BackendResponse = TextResponse | FunctionCallResponse


@runtime_checkable
class ChatBackend(Protocol):
    identity: str
    supports_function_calling: bool

    def complete(self, payload: PromptPayload) -> BackendResponse: ...


def payload_digest(payload: PromptPayload) -> str:
    """Stable key for a payload: hash of text plus attached-schema JSON."""
    hasher = hashlib.sha256(payload.system_or_user_text.encode("utf-8"))
    if payload.attached_function is not None:
        hasher.update(b"\x00")
        hasher.update(payload.attached_function.to_json().encode("utf-8"))
    return hasher.hexdigest()


def _extract_sentence_array(text: str) -> list[str] | None:
    marker = "\nsentences: "
    pos = text.rfind(marker)
    if pos < 0:
        return None
    try:
        parsed = json.loads(text[pos + len(marker) :])
    except json.JSONDecodeError:
        return None
    if isinstance(parsed, list) and all(isinstance(s, str) for s in parsed):
        return parsed
    return None


def _extract_quoted_target(text: str) -> str:
    match = re.search(r'target: "(.*)"\n', text, re.DOTALL)
    return match.group(1) if match else text


class MockBackend:
    """Offline backend deriving deterministic replies from the payload.

    Translation payloads get their sentence array back through the attached
    function (or one line per sentence in plain-prompt mode), transformed per
    ``mode``; judge payloads get scores seeded by a hash of the judged text.

    Modes: ``echo`` returns segments unchanged, ``upper`` uppercases them,
    ``tag`` prefixes non-empty segments with ``[xx]``.
    """

    def __init__(self, mode: str = "tag", tag: str = "xx", identity: str = "mock"):
        if mode not in ("echo", "upper", "tag"):
            raise ValueError(f"unknown mock mode: {mode!r}")
        self.mode = mode
        self.tag = tag
        self.identity = identity
        self.supports_function_calling = True

    def _transform(self, segment: str) -> str:
        if not segment:
            return segment
        if self.mode == "echo":
            return segment
        if self.mode == "upper":
            return segment.upper()
        return f"[{self.tag}] {segment}"

    def complete(self, payload: PromptPayload) -> BackendResponse:
        text = payload.system_or_user_text
        if payload.attached_function is not None:
            sentences = _extract_sentence_array(text)
            if sentences is None:
                return TextResponse("I could not find the sentences to translate.")
            arguments = json.dumps(
                {"translated_sentences": [self._transform(s) for s in sentences]},
                ensure_ascii=False,
            )
            return FunctionCallResponse(name=payload.attached_function.name, arguments=arguments)

        if text.endswith("Completeness Score (0-100):"):
            digest = hashlib.sha256(_extract_quoted_target(text).encode("utf-8")).digest()
            completeness = 55 + int.from_bytes(digest[:4], "big") % 46
            informativeness = 40 + int.from_bytes(digest[4:8], "big") % 61
            return TextResponse(
                f"Completeness Score (0-100): {completeness}\n"
                "Both the instruction and the output are present in the text.\n"
                f"Informativeness Score (0-100): {informativeness}\n"
                "The text retains most of the meaningful information."
            )

        if text.endswith("Score (0-100):"):
            digest = hashlib.sha256(text.encode("utf-8")).digest()
            score = 50 + int.from_bytes(digest[:4], "big") % 51
            return TextResponse(f"Score (0-100): {score}")

        sentences = _extract_sentence_array(text)
        if sentences is not None:
            return TextResponse("\n".join(self._transform(s) for s in sentences))
        return TextResponse(text)


class ScriptedBackend:
    """Replays canned responses keyed by payload digest.

    Each key maps to a list of responses consumed in order across repeated
    calls with the same payload, which is how retry sequences are scripted.
    Payloads without a scripted entry fall through to ``fallback`` when given.
    """

    def __init__(
        self,
        script: dict[str, list[BackendResponse]],
        fallback: ChatBackend | None = None,
        identity: str = "scripted",
    ):
        self._script = {key: list(responses) for key, responses in script.items()}
        self._cursor: dict[str, int] = {}
        self._lock = threading.Lock()
        self.fallback = fallback
        self.identity = identity
        self.supports_function_calling = True

    def complete(self, payload: PromptPayload) -> BackendResponse:
        key = payload_digest(payload)
        with self._lock:
            if key in self._script:
                responses = self._script[key]
                index = min(self._cursor.get(key, 0), len(responses) - 1)
                self._cursor[key] = index + 1
                return responses[index]
        if self.fallback is not None:
            return self.fallback.complete(payload)
        raise BackendError(f"no scripted response for payload {key[:12]}")


class CountingBackend:
    """Wrapper counting requests made to an inner backend (thread-safe)."""

    def __init__(self, inner: ChatBackend):
        self.inner = inner
        self.identity = inner.identity
        self.supports_function_calling = inner.supports_function_calling
        self._lock = threading.Lock()
        self._calls = 0

    @property
    def calls(self) -> int:
        with self._lock:
            return self._calls

    def complete(self, payload: PromptPayload) -> BackendResponse:
        with self._lock:
            self._calls += 1
        return self.inner.complete(payload)


def response_from_dict(obj: dict[str, Any]) -> BackendResponse:
    kind = obj.get("kind")
    if kind == "text":
        return TextResponse(text=str(obj["text"]))
    if kind == "function_call":
        arguments = obj["arguments"]
        if not isinstance(arguments, str):
            arguments = json.dumps(arguments, ensure_ascii=False)
        return FunctionCallResponse(name=str(obj.get("name", "")), arguments=arguments)
    raise ValueError(f"unknown scripted response kind: {kind!r}")


def load_script(path: str | Path) -> dict[str, list[BackendResponse]]:
    """Load a canned-response script: JSON mapping payload digest to a list of
    response objects ({"kind": "text"|"function_call", ...})."""
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    if not isinstance(raw, dict):
        raise ValueError("script file must hold an object keyed by payload digest")
    return {
        key: [response_from_dict(item) for item in responses]
        for key, responses in raw.items()
    }


class HttpChatBackend:
    """Client for an OpenAI-style chat-completions endpoint.

    The payload text is sent as a single user message; an attached function
    travels as a ``tools`` entry with ``tool_choice`` forcing its use. The
    bearer token is read from ``auth_env`` at construction so misconfigured
    credentials fail before any work is scheduled.
    """

    def __init__(
        self,
        endpoint: str,
        model: str,
        auth_env: str = DEFAULT_AUTH_ENV,
        session: requests.Session | None = None,
        identity: str | None = None,
    ):
        token = os.environ.get(auth_env, "")
        if not token:
            raise BackendError(f"auth environment variable {auth_env!r} is not set")
        self.endpoint = endpoint
        self.model = model
        self._headers = {
            "Authorization": f"Bearer {token}",
            "Content-Type": "application/json",
        }
        self._session = session or requests.Session()
        self.identity = identity or f"http:{model}"
        self.supports_function_calling = True

    def _request_body(self, payload: PromptPayload) -> dict[str, Any]:
        body: dict[str, Any] = {
            "model": self.model,
            "messages": [{"role": "user", "content": payload.system_or_user_text}],
            "temperature": payload.decoding.temperature,
            "max_tokens": payload.decoding.max_output_tokens,
        }
        schema = payload.attached_function
        if schema is not None:
            body["tools"] = [
                {
                    "type": "function",
                    "function": {
                        "name": schema.name,
                        "description": schema.description,
                        "parameters": schema.parameters,
                    },
                }
            ]
            body["tool_choice"] = {"type": "function", "function": {"name": schema.name}}
        return body

    def complete(self, payload: PromptPayload) -> BackendResponse:
        try:
            response = self._session.post(
                self.endpoint,
                json=self._request_body(payload),
                headers=self._headers,
                timeout=payload.decoding.request_timeout,
            )
        except requests.RequestException as exc:
            raise BackendError(f"transport failure: {exc}") from exc
        if response.status_code != 200:
            raise BackendError(response.text[:200], status=response.status_code)
        try:
            message = response.json()["choices"][0]["message"]
        except (ValueError, KeyError, IndexError) as exc:
            raise BackendError(f"unparseable completion response: {exc}") from exc

        tool_calls = message.get("tool_calls")
        if tool_calls:
            function = tool_calls[0].get("function", {})
            return FunctionCallResponse(
                name=str(function.get("name", "")),
                arguments=str(function.get("arguments", "")),
            )
        legacy_call = message.get("function_call")
        if legacy_call:
            return FunctionCallResponse(
                name=str(legacy_call.get("name", "")),
                arguments=str(legacy_call.get("arguments", "")),
            )
        return TextResponse(text=str(message.get("content") or ""))
