from __future__ import annotations

from dataclasses import dataclass

from ..dataset import UnknownAttack, render_unknown_csv

SYSTEM_PREAMBLE = (
    "You are a cyber threat intelligence analyst. Base the attribution on the "
    "supplied indicators and on any reference intelligence provided."
)

ATTRIBUTION_INSTRUCTION = (
    "The file 'Unknown.csv' contains a list of indicators of compromise (IoCs) as well as "
    "tactics and techniques according to the MITRE ATT&CK enterprise matrix. "
    "Make an attribution and suggest the threat actor who is behind this attack. "
    "Provide likelihood in % for the five most probable threat actors."
)

CONTEXT_HEADER = "Reference intelligence:"
DEFAULT_CONTEXT_BUDGET = 12000


@dataclass(frozen=True)
class PromptBundle:
    system_preamble: str
    context_blocks: tuple[str, ...]
    user_prompt: str
    token_budget: int

    def context_text(self) -> str:
        if not self.context_blocks:
            return ""
        return CONTEXT_HEADER + "\n\n" + "\n\n".join(self.context_blocks) + "\n\n"

    def user_content(self) -> str:
        """Context region (possibly empty) followed by the prompt proper."""
        return self.context_text() + self.user_prompt

    def messages(self) -> list[dict]:
        return [
            {"role": "system", "content": self.system_preamble},
            {"role": "user", "content": self.user_content()},
        ]


def context_block(doc_id: str, text: str) -> str:
    return f"[source: {doc_id}]\n{text.strip()}"


def build_prompt(attack: UnknownAttack, retrieved=(), budget: int = DEFAULT_CONTEXT_BUDGET) -> PromptBundle:
    """Assemble the attribution prompt.

    ``retrieved`` holds ``(doc_id, excerpt)`` pairs in retrieval order. Blocks
    are taken whole, in order, until the next one would overrun ``budget``
    characters. Nothing is cut mid-excerpt.
    """
    blocks = []
    used = 0
    for doc_id, text in retrieved:
        block = context_block(doc_id, text)
        if used + len(block) > budget:
            break
        blocks.append(block)
        used += len(block)
    user_prompt = ATTRIBUTION_INSTRUCTION + "\n\nUnknown.csv:\n" + render_unknown_csv(attack)
    return PromptBundle(SYSTEM_PREAMBLE, tuple(blocks), user_prompt, budget)
