"""Text-generation backends: a deterministic mock and a chat-completions HTTP client.

Both expose ``complete(prompt, *, temperature, top_p, max_tokens, seed)``.
The HTTP client sends OpenAI-style chat completion requests, retries
transient failures with exponential backoff, and caches response bodies on
disk keyed by hash(prompt, model, temperature, top_p, max_tokens). A key
stores every response observed for that request in arrival order, and each
client replays them one per call before going back to the network: repeats
of one prompt inside a run stay fresh samples, while a rerun against a warm
cache makes zero HTTP calls and reproduces the run byte for byte. The mock
never touches the network; its ``seed`` argument is what makes repeated
calls with the same prompt reproducible. The HTTP request schema has no seed
field, so that client ignores the argument.
"""
from __future__ import annotations

import hashlib
import json
import os
import threading
import time
from dataclasses import dataclass
from pathlib import Path

import requests

from ..errors import AuthMissing, BackendUnavailable
from .mock import mock_classification_response, mock_generation_response, requested_count
from .prompts import CLASSIFICATION_HEAD

CACHE_DIR_ENV = "DPSYNTH_CACHE_DIR"
DEFAULT_CACHE_DIR = ".dpsynth-cache"

_RETRYABLE_STATUS = {429, 500, 502, 503, 504}
_BACKOFF_BASE_SECONDS = 0.5


@dataclass(frozen=True)
class BackendSpec:
    """Which backend to use and how to reach it."""

    kind: str = "mock"  # "mock" | "http"
    endpoint_url: str = ""
    model_name: str = ""
    auth_env_var: str = ""
    max_concurrent: int = 1
    retry_limit: int = 3

    def __post_init__(self):
        if self.kind not in ("mock", "http"):
            raise ValueError(f"backend kind must be 'mock' or 'http', got {self.kind!r}")
        if self.max_concurrent < 1:
            raise ValueError("max_concurrent must be >= 1")
        if self.retry_limit < 0:
            raise ValueError("retry_limit must be >= 0")
        if self.kind == "http" and (not self.endpoint_url or not self.model_name):
            raise ValueError("http backend requires endpoint_url and model_name")

    def to_json_dict(self) -> dict:
        return {
            "kind": self.kind,
            "endpoint_url": self.endpoint_url,
            "model_name": self.model_name,
            "auth_env_var": self.auth_env_var,
            "max_concurrent": self.max_concurrent,
            "retry_limit": self.retry_limit,
        }


def resolve_cache_dir(explicit: str | Path | None = None) -> Path:
    if explicit:
        return Path(explicit)
    return Path(os.environ.get(CACHE_DIR_ENV) or DEFAULT_CACHE_DIR)


class ResponseCache:
    """Content-addressed response store: one JSON file per request key.

    A key's file holds the full sequence of response bodies observed for
    that request. Every cache instance keeps a per-key cursor and hands out
    each stored response at most once, in order, so a run that issues the
    same request N times replays all N recorded responses instead of
    collapsing them into one; ``put`` advances the cursor past the entry it
    appends because the caller has already consumed that response. Writes
    go through a temp file plus atomic replace and are serialized by a
    lock.
    """

    def __init__(self, directory: str | Path):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        self._consumed: dict[str, int] = {}

    @staticmethod
    def key_for(prompt: str, model: str, temperature: float, top_p: float, max_tokens: int) -> str:
        material = json.dumps(
            {
                "prompt": prompt,
                "model": model,
                "temperature": temperature,
                "top_p": top_p,
                "max_tokens": max_tokens,
            },
            sort_keys=True,
            ensure_ascii=False,
        )
        return hashlib.sha256(material.encode("utf-8")).hexdigest()

    def _path(self, key: str) -> Path:
        return self.directory / f"{key}.json"

    def _responses(self, key: str) -> list[str]:
        path = self._path(key)
        if not path.exists():
            return []
        obj = json.loads(path.read_text(encoding="utf-8"))
        return list(obj["responses"])

    def get(self, key: str) -> str | None:
        """Next unreplayed response for this key, or None when exhausted."""
        with self._lock:
            cursor = self._consumed.get(key, 0)
            responses = self._responses(key)
            if cursor >= len(responses):
                return None
            self._consumed[key] = cursor + 1
            return responses[cursor]

    def put(self, key: str, request_body: dict, response_text: str) -> None:
        with self._lock:
            responses = self._responses(key)
            responses.append(response_text)
            payload = json.dumps(
                {"request": request_body, "responses": responses}, ensure_ascii=False
            )
            tmp = self._path(key).with_suffix(".tmp")
            tmp.write_text(payload, encoding="utf-8")
            os.replace(tmp, self._path(key))
            self._consumed[key] = len(responses)


class MockClient:
    """Offline backend; see dpsynth.synth.mock for the content model."""

    kind = "mock"

    def __init__(self):
        self.stats = {"mock_calls": 0, "http_requests": 0, "cache_hits": 0}

    def complete(self, prompt: str, *, temperature: float, top_p: float,
                 max_tokens: int, seed: int) -> str:
        self.stats["mock_calls"] += 1
        if prompt.startswith(CLASSIFICATION_HEAD):
            return mock_classification_response(prompt)
        prompt_hash = hashlib.sha256(prompt.encode("utf-8")).hexdigest()
        return mock_generation_response(prompt_hash, seed, requested_count(prompt, fallback=8))


def _default_transport(url: str, headers: dict, body: dict) -> tuple[int, str]:
    resp = requests.post(url, headers=headers, json=body, timeout=120)
    return resp.status_code, resp.text


class HttpClient:
    """Chat-completions client with retries, backoff, and a disk cache.

    ``transport`` and ``sleep`` are injectable for tests; the default
    transport posts with ``requests``. A 2xx body must carry the completion
    text at choices[0].message.content.
    """

    kind = "http"

    def __init__(self, spec: BackendSpec, cache: ResponseCache | None = None,
                 transport=None, sleep=time.sleep):
        self.spec = spec
        self.cache = cache
        self.transport = transport or _default_transport
        self.sleep = sleep
        self.stats = {"mock_calls": 0, "http_requests": 0, "cache_hits": 0}

    def _headers(self) -> dict:
        headers = {"Content-Type": "application/json"}
        if self.spec.auth_env_var:
            token = os.environ.get(self.spec.auth_env_var)
            if not token:
                raise AuthMissing(
                    f"environment variable {self.spec.auth_env_var} is not set"
                )
            headers["Authorization"] = f"Bearer {token}"
        return headers

    def complete(self, prompt: str, *, temperature: float, top_p: float,
                 max_tokens: int, seed: int) -> str:
        del seed  # not part of the request schema or the cache key
        key = ResponseCache.key_for(prompt, self.spec.model_name, temperature, top_p, max_tokens)
        if self.cache is not None:
            hit = self.cache.get(key)
            if hit is not None:
                self.stats["cache_hits"] += 1
                return hit

        body = {
            "model": self.spec.model_name,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": temperature,
            "top_p": top_p,
            "max_tokens": max_tokens,
        }
        headers = self._headers()
        attempts = self.spec.retry_limit + 1
        last_reason = "no attempts made"
        for attempt in range(attempts):
            if attempt:
                self.sleep(_BACKOFF_BASE_SECONDS * 2 ** (attempt - 1))
            try:
                status, text = self.transport(self.spec.endpoint_url, headers, body)
                self.stats["http_requests"] += 1
            except (requests.RequestException, ConnectionError, OSError) as exc:
                last_reason = f"transport error: {exc}"
                continue
            if status in _RETRYABLE_STATUS:
                last_reason = f"status {status}"
                continue
            if not (200 <= status < 300):
                raise BackendUnavailable(f"backend returned status {status}")
            content = self._extract_content(text)
            if self.cache is not None:
                self.cache.put(key, body, content)
            return content
        raise BackendUnavailable(
            f"backend unavailable after {attempts} attempts ({last_reason})"
        )

    @staticmethod
    def _extract_content(text: str) -> str:
        try:
            obj = json.loads(text)
            content = obj["choices"][0]["message"]["content"]
        except (json.JSONDecodeError, KeyError, IndexError, TypeError):
            raise BackendUnavailable("malformed completion response body") from None
        if not isinstance(content, str):
            raise BackendUnavailable("completion content is not a string")
        return content


def make_backend(spec: BackendSpec, *, cache_dir: str | Path | None = None,
                 cache_enabled: bool = True, transport=None, sleep=time.sleep):
    """Construct the client for a BackendSpec."""
    if spec.kind == "mock":
        return MockClient()
    cache = ResponseCache(resolve_cache_dir(cache_dir)) if cache_enabled else None
    return HttpClient(spec, cache=cache, transport=transport, sleep=sleep)
