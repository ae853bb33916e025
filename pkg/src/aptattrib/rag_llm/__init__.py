"""LLM attribution path: corpus retrieval, prompt assembly, endpoint call, reply parsing."""

from .client import AuthError, EndpointConfig, ProtocolError, call_llm, request_body
from .corpus import Document, EmptyCorpus, IntelCorpus, index_corpus, load_corpus_dir, retrieve
from .parse import AliasTable, LlmAttribution, LlmEntry, NoEntriesFound, parse_llm_response
from .prompt import ATTRIBUTION_INSTRUCTION, PromptBundle, build_prompt

__all__ = [
    "ATTRIBUTION_INSTRUCTION",
    "AliasTable",
    "AuthError",
    "Document",
    "EmptyCorpus",
    "EndpointConfig",
    "IntelCorpus",
    "LlmAttribution",
    "LlmEntry",
    "NoEntriesFound",
    "PromptBundle",
    "ProtocolError",
    "build_prompt",
    "call_llm",
    "index_corpus",
    "load_corpus_dir",
    "parse_llm_response",
    "request_body",
    "retrieve",
]
