"""Minimal chat-completion client with bounded retries."""

from __future__ import annotations

import logging
import os
import time
from dataclasses import dataclass

import httpx

from ..errors import NetworkError, UsageError
from .prompt import PromptBundle

log = logging.getLogger(__name__)

DEFAULT_ENDPOINT = "https://api.openai.com/v1/chat/completions"
DEFAULT_MODEL = "gpt-4o"
API_KEY_ENV = "LLM_API_KEY"
BACKOFF_SECONDS = (1.0, 2.0, 4.0)


class AuthError(NetworkError):
    pass


class ProtocolError(NetworkError):
    pass


@dataclass(frozen=True)
class EndpointConfig:
    url: str = DEFAULT_ENDPOINT
    model: str = DEFAULT_MODEL
    temperature: float = 0.0
    api_key: str | None = None
    timeout: float = 60.0

    def resolved_key(self) -> str:
        key = self.api_key or os.environ.get(API_KEY_ENV)
        if not key:
            raise UsageError(f"no API key: set {API_KEY_ENV} or use --no-llm with a transcript")
        return key


def request_body(bundle: PromptBundle, config: EndpointConfig) -> dict:
    return {"model": config.model, "messages": bundle.messages(), "temperature": config.temperature}


def _extract_content(response: httpx.Response) -> str:
    try:
        doc = response.json()
        content = doc["choices"][0]["message"]["content"]
    except (ValueError, KeyError, IndexError, TypeError) as exc:
        raise ProtocolError(f"unparseable chat-completion response: {exc!r}") from exc
    if not isinstance(content, str):
        raise ProtocolError("assistant content is not a string")
    return content


def call_llm(bundle: PromptBundle, config: EndpointConfig, *, client: httpx.Client | None = None, sleep=time.sleep) -> str:
    """POST the bundle and return the assistant text.

    429, 5xx and transport timeouts are retried after 1 s, 2 s and 4 s.
    401/403 fail immediately.
    """
    headers = {"Authorization": f"Bearer {config.resolved_key()}", "Content-Type": "application/json"}
    body = request_body(bundle, config)
    own_client = client is None
    client = client or httpx.Client(timeout=config.timeout)
    try:
        attempt = 0
        while True:
            retryable = None
            try:
                response = client.post(config.url, json=body, headers=headers)
            except httpx.TimeoutException as exc:
                retryable = f"timeout: {exc}"
            except httpx.HTTPError as exc:
                raise NetworkError(f"request to {config.url} failed: {exc}") from exc
            else:
                status = response.status_code
                if status in (401, 403):
                    raise AuthError(f"endpoint rejected credentials (HTTP {status})")
                if status == 429 or status >= 500:
                    retryable = f"HTTP {status}"
                elif status >= 400:
                    raise NetworkError(f"endpoint returned HTTP {status}: {response.text[:200]}")
                else:
                    return _extract_content(response)
            if attempt >= len(BACKOFF_SECONDS):
                raise NetworkError(f"giving up after {attempt + 1} attempts ({retryable})")
            delay = BACKOFF_SECONDS[attempt]
            log.warning("LLM request failed (%s); retrying in %.0fs", retryable, delay)
            sleep(delay)
            attempt += 1
    finally:
        if own_client:
            client.close()
