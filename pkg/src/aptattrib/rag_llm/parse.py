"""Pull ranked ``(actor, likelihood %)`` pairs out of free-text LLM replies."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from importlib import resources

from ..errors import DataError
from ..intel_model import ROSTER, ActorName, actor_key


class NoEntriesFound(DataError):
    pass


_NUMBERED = re.compile(r"^\s*\d{1,2}[.)]\s+(?P<body>.*)$")
_BULLET = re.compile(r"^\s*[-+*•]\s+(?P<body>.*)$")
_LIKELIHOOD = re.compile(r"\blikelihood\b[^0-9%\n]*?(?P<pct>\d{1,3}(?:\.\d+)?)\s*%", re.IGNORECASE)
_INLINE = re.compile(
    r"^(?P<name>.+?)\s*(?:[:\-–—]|\()?\s*(?:likelihood\s*[:\-–—]?\s*)?"
    r"(?P<pct>\d{1,3}(?:\.\d+)?)\s*%\s*\)?\s*[.;]?\s*$",
    re.IGNORECASE,
)
_EMPHASIS = re.compile(r"[*_]")


@dataclass(frozen=True)
class LlmEntry:
    actor_raw: str
    actor_canonical: ActorName | None
    likelihood_pct: float


@dataclass(frozen=True)
class LlmAttribution:
    entries: tuple[LlmEntry, ...]
    raw_response: str = field(repr=False)
    notes: tuple[str, ...] = ()

    def likelihoods(self) -> list[float]:
        return [e.likelihood_pct for e in self.entries]

    def top(self) -> LlmEntry:
        return self.entries[0]


class AliasTable:
    """Maps vendor names and aliases (case/space-insensitive) to roster actors."""

    def __init__(self, mapping: dict[str, list[str]]):
        self._by_key: dict[str, ActorName] = {}
        for canonical, aliases in mapping.items():
            actor = ActorName.of(canonical)
            for name in [canonical, *aliases]:
                self._by_key[actor_key(name)] = actor
        for name in ROSTER:
            self._by_key.setdefault(actor_key(name), ActorName.of(name))

    @classmethod
    def bundled(cls) -> AliasTable:
        text = resources.files("aptattrib.fixtures").joinpath("actor_aliases.json").read_text(encoding="utf-8")
        return cls(json.loads(text))

    @classmethod
    def from_file(cls, path) -> AliasTable:
        with open(path, encoding="utf-8") as fh:
            return cls(json.load(fh))

    def lookup(self, name: str) -> ActorName | None:
        return self._by_key.get(actor_key(name))

    def canonicalize(self, raw: str) -> tuple[ActorName | None, str | None]:
        """Resolve ``raw``; the second value is a note when the aliases disagree."""
        whole = self.lookup(raw)
        primary_text, _, rest = raw.partition("(")
        primary = self.lookup(primary_text.strip())
        alt = [self.lookup(p.strip()) for p in re.split(r"[/,;]", rest.rstrip(") ")) if p.strip()]
        found = [a for a in [whole, primary, *alt] if a is not None]
        if not found:
            return None, None
        chosen = whole or primary or found[0]
        distinct = sorted(set(found))
        note = None
        if len(distinct) > 1:
            names = ", ".join(a.display for a in distinct)
            note = f"ambiguous actor string {raw!r} names several groups ({names}); using {chosen.display}"
        return chosen, note


def _clean(text: str) -> str:
    return " ".join(_EMPHASIS.sub("", text).split())


def _header_name(body: str) -> str:
    return body.strip().rstrip(":").strip(" -–—")


def parse_llm_response(text: str, aliases: AliasTable | None = None) -> LlmAttribution:
    """Extract entries in the order they appear in ``text``.

    Numbered list items name the actors when the reply has any; otherwise
    bullet items do. An item is paired with the first ``Likelihood ... NN%``
    line that follows it, or with an ``NN%`` placed right after its name.
    """
    aliases = aliases or AliasTable.bundled()
    lines = text.splitlines()
    header_re = _NUMBERED if any(_NUMBERED.match(ln) for ln in lines) else _BULLET

    pairs: list[tuple[str, float]] = []
    notes: list[str] = []
    pending: str | None = None
    for line in lines:
        m = header_re.match(line)
        body = _clean(m.group("body")) if m else ""
        if m and not body.lower().startswith("likelihood"):
            inline = _INLINE.match(body)
            if inline:
                pairs.append((_header_name(inline.group("name")), float(inline.group("pct"))))
                pending = None
            else:
                pending = _header_name(body)
            continue
        if pending is None:
            continue
        lk = _LIKELIHOOD.search(_clean(line))
        if lk:
            pairs.append((pending, float(lk.group("pct"))))
            pending = None

    entries = []
    for raw, pct in pairs:
        if not 0.0 <= pct <= 100.0:
            notes.append(f"dropped {raw!r}: likelihood {pct}% outside [0, 100]")
            continue
        canonical, note = aliases.canonicalize(raw)
        if note:
            notes.append(note)
        if canonical is None:
            notes.append(f"{raw!r} is not a known roster actor")
        entries.append(LlmEntry(raw, canonical, pct))
    if not entries:
        raise NoEntriesFound("no actor/likelihood pairs found in the response")
    total = sum(e.likelihood_pct for e in entries)
    notes.append(f"likelihoods sum to {total:g}%; reported as given, not renormalized")
    return LlmAttribution(tuple(entries), text, tuple(notes))
