"""Indicator, technique-ID and actor-name grammars.

Everything here is an immutable value or a pure function, so it is safe to
share across threads.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from urllib.parse import urlsplit

from .errors import DataError


class MalformedTechniqueId(DataError):
    pass


class MalformedIndicator(DataError):
    pass


_TECHNIQUE_RE = re.compile(r"T(\d{4})(?:\.(\d{3}))?")


@dataclass(frozen=True, order=True)
class TechniqueId:
    """ATT&CK technique number with an optional sub-technique."""

    number: int
    sub: int | None = None

    def __post_init__(self):
        if not 0 <= self.number <= 9999:
            raise MalformedTechniqueId(f"technique number out of range: {self.number}")
        if self.sub is not None and not 0 <= self.sub <= 999:
            raise MalformedTechniqueId(f"sub-technique out of range: {self.sub}")

    def render(self) -> str:
        if self.sub is None:
            return f"T{self.number:04d}"
        return f"T{self.number:04d}.{self.sub:03d}"

    def __str__(self) -> str:
        return self.render()


def parse_technique_id(text: str) -> TechniqueId:
    """Parse ``T1234`` or ``T1234.567``; anything else raises."""
    m = _TECHNIQUE_RE.fullmatch(text)
    if m is None:
        raise MalformedTechniqueId(f"not a technique id: {text!r}")
    sub = m.group(2)
    return TechniqueId(int(m.group(1)), int(sub) if sub is not None else None)


class IndicatorKind(str, Enum):
    # Declaration order is the one-hot index order used by the feature encoder.
    TECHNIQUE = "technique"
    TACTIC = "tactic"
    MALWARE = "malware"
    TOOL = "tool"
    DOMAIN = "domain"
    URL = "url"
    IP = "ip"
    HASH = "hash"
    FILENAME = "filename"
    COMMAND = "command"
    LANGUAGE = "language"

    @classmethod
    def parse(cls, text: str) -> IndicatorKind:
        try:
            return cls(text.strip().lower())
        except ValueError:
            raise MalformedIndicator(f"unknown indicator kind: {text!r}") from None

    @property
    def index(self) -> int:
        return _KIND_INDEX[self]


_KIND_INDEX = {k: i for i, k in enumerate(IndicatorKind)}


ROSTER = (
    "GhostWriter",
    "APT28",
    "APT29",
    "Gamaredon",
    "InvisiMole",
    "Sandworm",
    "DragonFly",
    "Turla",
    "WizardSpider",
    "EmberBear",
)


def actor_key(name: str) -> str:
    return "".join(name.split()).lower()


_ROSTER_BY_KEY = {actor_key(n): n for n in ROSTER}


@dataclass(frozen=True, order=True)
class ActorName:
    """Threat-actor label; equality and ordering use the canonical key only.

    >>> ActorName.of("Wizard Spider") == ActorName.of("wizardspider")
    True
    """

    key: str
    display: str = field(compare=False)

    @classmethod
    def of(cls, name: str | ActorName) -> ActorName:
        if isinstance(name, ActorName):
            return name
        key = actor_key(name)
        if not key:
            raise MalformedIndicator("empty actor name")
        return cls(key, _ROSTER_BY_KEY.get(key, "".join(name.split())))

    def __str__(self) -> str:
        return self.display


ROSTER_ACTORS = tuple(sorted(ActorName.of(n) for n in ROSTER))


def refang(text: str) -> str:
    """Undo the common defang forms: ``hxxp(s)`` scheme, ``[.]`` and ``[:]``."""
    out = text
    # iterate: "[[.]]" collapses to "[.]" on the first pass
    while "[.]" in out or "[:]" in out:
        out = out.replace("[.]", ".").replace("[:]", ":")
    low = out[:5].lower()
    if low == "hxxps":
        out = "https" + out[5:]
    elif low[:4] == "hxxp":
        out = "http" + out[4:]
    return out


def normalize_value(kind: IndicatorKind, value: str) -> str:
    """Canonical stored form for an indicator value of the given kind."""
    v = refang(value).strip()
    if not v:
        raise MalformedIndicator("empty indicator value")
    if kind is IndicatorKind.TECHNIQUE:
        return parse_technique_id(v.upper()).render()
    return v.lower()


@dataclass(frozen=True)
class IndicatorRow:
    kind: IndicatorKind
    value: str
    label: ActorName | None = None

    @classmethod
    def make(cls, kind: IndicatorKind | str, value: str, label: str | ActorName | None = None) -> IndicatorRow:
        if not isinstance(kind, IndicatorKind):
            kind = IndicatorKind.parse(kind)
        return cls(kind, normalize_value(kind, value), ActorName.of(label) if label is not None else None)

    def to_csv_fields(self) -> tuple[str, str]:
        return self.kind.value, self.value


# -- kind inference -----------------------------------------------------------

_TECHNIQUE_CI_RE = re.compile(r"[Tt]\d{4}(?:\.\d{3})?")
_SCHEME_RE = re.compile(r"^[a-z][a-z0-9+.-]*://", re.IGNORECASE)
_IPV4_RE = re.compile(r"(\d{1,3})\.(\d{1,3})\.(\d{1,3})\.(\d{1,3})")
_HEX_RE = re.compile(r"[0-9a-fA-F]+")
_HOSTNAME_RE = re.compile(r"(?:[a-z0-9](?:[a-z0-9-]*[a-z0-9])?\.)+[a-z0-9-]*[a-z][a-z0-9-]*", re.IGNORECASE)
FILE_SUFFIXES = (".exe", ".msi", ".zip", ".jpg")
SHELL_VERBS = frozenset(
    """
    bash bitsadmin cd certutil cmd copy cscript curl del echo icacls ipconfig
    mshta net net1 netsh nltest ping powershell pwsh reg regsvr32 rmdir rundll32
    sc schtasks sh start taskkill timeout vssadmin wevtutil whoami wget wmic
    wscript
    """.split()
)


def _is_ipv4(v: str) -> bool:
    m = _IPV4_RE.fullmatch(v)
    return m is not None and all(int(g) <= 255 for g in m.groups())


def _is_command(v: str) -> bool:
    if not any(c.isspace() for c in v):
        return False
    for tok in v.lower().split():
        tok = tok.rsplit("\\", 1)[-1]
        if tok.endswith(".exe"):
            tok = tok[:-4]
        if tok in SHELL_VERBS:
            return True
    return False


def classify_indicator_kind(value: str) -> IndicatorKind:
    """Guess a kind for a refanged value. First matching rule wins."""
    v = value.strip()
    if _TECHNIQUE_CI_RE.fullmatch(v):
        return IndicatorKind.TECHNIQUE
    if _SCHEME_RE.match(v):
        return IndicatorKind.URL
    if _is_ipv4(v):
        return IndicatorKind.IP
    if len(v) in (32, 40, 64) and _HEX_RE.fullmatch(v):
        return IndicatorKind.HASH
    if not any(c.isspace() for c in v) and v.lower().endswith(FILE_SUFFIXES):
        return IndicatorKind.FILENAME
    if _is_command(v):
        return IndicatorKind.COMMAND
    if _HOSTNAME_RE.fullmatch(v):
        return IndicatorKind.DOMAIN
    return IndicatorKind.TOOL


# -- URL clustering -----------------------------------------------------------


def url_cluster_key(value: str) -> str:
    """``host/first/second`` prefix of a URL; scheme-less values are accepted."""
    target = value if "://" in value else "//" + value
    parts = urlsplit(target)
    segments = [s for s in parts.path.split("/") if s]
    return "/".join([parts.netloc.lower(), *segments[:2]])


def cluster_urls(rows) -> list[tuple[str, list[IndicatorRow]]]:
    """Group url rows by host plus the first two path segments.

    Groups come back largest first, ties broken by key; members keep input order.
    """
    groups: dict[str, list[IndicatorRow]] = {}
    for row in rows:
        if row.kind is not IndicatorKind.URL:
            continue
        groups.setdefault(url_cluster_key(row.value), []).append(row)
    return sorted(groups.items(), key=lambda kv: (-len(kv[1]), kv[0]))
