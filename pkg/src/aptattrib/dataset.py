"""Training / unknown-attack CSV ingest and the hashed feature encoder."""

from __future__ import annotations

import csv
import io
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError
from .intel_model import ActorName, IndicatorKind, IndicatorRow, MalformedIndicator

TRAIN_HEADER = ["actor", "kind", "value"]
UNKNOWN_HEADER = ["kind", "value"]
KIND_COUNT = len(IndicatorKind)
DEFAULT_HASH_DIM = 256
MIN_HASH_DIM = 16


class SchemaError(DataError):
    def __init__(self, message: str, line: int | None = None, path: str | None = None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}" if where else message)


class InputIOError(DataError):
    pass


class EmptyActorError(DataError):
    pass


class LabelPresentError(DataError):
    pass


class BadDimension(DataError):
    pass


@dataclass(frozen=True)
class TrainingSet:
    rows: tuple[IndicatorRow, ...]
    actors: tuple[ActorName, ...]

    @classmethod
    def from_rows(cls, rows) -> TrainingSet:
        rows = tuple(rows)
        if any(r.label is None for r in rows):
            raise DataError("training rows must all carry an actor label")
        actors = tuple(sorted({r.label for r in rows}))
        if len(actors) < 2:
            raise EmptyActorError(f"training data needs at least 2 actors, found {len(actors)}")
        return cls(rows, actors)

    def labels(self) -> list[ActorName]:
        return [r.label for r in self.rows]


@dataclass(frozen=True)
class UnknownAttack:
    rows: tuple[IndicatorRow, ...]
    name: str = "unknown"

    def __post_init__(self):
        if not self.rows:
            raise DataError("unknown attack has no indicator rows")
        if any(r.label is not None for r in self.rows):
            raise LabelPresentError("unknown attack rows must not carry actor labels")


def _read_text(path) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise InputIOError(f"cannot read {path}: {exc}") from exc


def _records(text: str):
    """Yield (line number, fields) for each non-comment, non-blank CSV record."""
    lines = ["\n" if ln.lstrip().startswith("#") else ln for ln in text.splitlines(keepends=True)]
    reader = csv.reader(io.StringIO("".join(lines)))
    start = 1
    for fields in reader:
        if fields and any(f.strip() for f in fields):
            yield start, [f.strip() for f in fields]
        start = reader.line_num + 1


def parse_training_csv(text: str, source: str | None = None) -> TrainingSet:
    records = _records(text)
    header = next(records, None)
    if header is None:
        raise SchemaError("empty file, expected header 'actor,kind,value'", path=source)
    lineno, fields = header
    if [f.lower() for f in fields] != TRAIN_HEADER:
        raise SchemaError(f"bad header {','.join(fields)!r}, expected 'actor,kind,value'", lineno, source)
    rows = []
    for lineno, fields in records:
        if len(fields) != 3:
            raise SchemaError(f"expected 3 columns, got {len(fields)}", lineno, source)
        actor, kind, value = fields
        try:
            rows.append(IndicatorRow.make(kind, value, actor))
        except MalformedIndicator as exc:
            raise SchemaError(str(exc), lineno, source) from exc
        except DataError as exc:
            raise SchemaError(str(exc), lineno, source) from exc
    return TrainingSet.from_rows(rows)


def parse_unknown_csv(text: str, name: str = "unknown", source: str | None = None) -> UnknownAttack:
    records = _records(text)
    header = next(records, None)
    if header is None:
        raise SchemaError("empty file, expected header 'kind,value'", path=source)
    lineno, fields = header
    lowered = [f.lower() for f in fields]
    if "actor" in lowered:
        raise LabelPresentError(f"{source or 'input'}:{lineno}: unknown-attack file must not have an actor column")
    if lowered != UNKNOWN_HEADER:
        raise SchemaError(f"bad header {','.join(fields)!r}, expected 'kind,value'", lineno, source)
    rows = []
    for lineno, fields in records:
        if len(fields) == 3:
            raise LabelPresentError(f"{source or 'input'}:{lineno}: row carries an extra (actor?) column")
        if len(fields) != 2:
            raise SchemaError(f"expected 2 columns, got {len(fields)}", lineno, source)
        try:
            rows.append(IndicatorRow.make(fields[0], fields[1]))
        except DataError as exc:
            raise SchemaError(str(exc), lineno, source) from exc
    if not rows:
        raise SchemaError("no indicator rows after header", path=source)
    return UnknownAttack(tuple(rows), name)


def load_training_csv(path) -> TrainingSet:
    return parse_training_csv(_read_text(path), str(path))


def load_unknown_csv(path, name: str | None = None) -> UnknownAttack:
    return parse_unknown_csv(_read_text(path), name or Path(path).stem, str(path))


def render_unknown_csv(attack: UnknownAttack) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(UNKNOWN_HEADER)
    for row in attack.rows:
        w.writerow(row.to_csv_fields())
    return buf.getvalue()


# -- encoding -----------------------------------------------------------------

FNV64_OFFSET = 0xCBF29CE484222325
FNV64_PRIME = 0x100000001B3
_MASK64 = (1 << 64) - 1
_TOKEN_SPLIT = re.compile(r"[/._\- ]+")


def fnv1a_64(data: bytes) -> int:
    h = FNV64_OFFSET
    for b in data:
        h = ((h ^ b) * FNV64_PRIME) & _MASK64
    return h


def tokenize(value: str) -> list[str]:
    """Split on ``/ . _ -`` and spaces, dropping empty pieces."""
    return [t for t in _TOKEN_SPLIT.split(value) if t]


@dataclass(frozen=True)
class FeatureEncoder:
    """Kind one-hot followed by a hashed token bag. Stateless."""

    hash_dim: int = DEFAULT_HASH_DIM
    kind_count: int = KIND_COUNT

    @property
    def total_dim(self) -> int:
        return self.kind_count + self.hash_dim

    def bucket(self, token: str) -> int:
        return self.kind_count + fnv1a_64(token.encode("utf-8")) % self.hash_dim

    def encode_row(self, row: IndicatorRow) -> np.ndarray:
        vec = np.zeros(self.total_dim, dtype=np.float64)
        vec[row.kind.index] = 1.0
        for tok in tokenize(row.value):
            vec[self.bucket(tok)] += 1.0
        return vec

    def encode_rows(self, rows) -> np.ndarray:
        rows = list(rows)
        out = np.zeros((len(rows), self.total_dim), dtype=np.float64)
        for i, row in enumerate(rows):
            out[i] = self.encode_row(row)
        return out


def build_encoder(train: TrainingSet | None = None, hash_dim: int = DEFAULT_HASH_DIM) -> FeatureEncoder:
    """Encoder for ``hash_dim`` buckets; ``train`` is accepted for symmetry but unused."""
    if not isinstance(hash_dim, int) or hash_dim < MIN_HASH_DIM:
        raise BadDimension(f"hash_dim must be an integer >= {MIN_HASH_DIM}, got {hash_dim!r}")
    return FeatureEncoder(hash_dim=hash_dim)


def encode_row(enc: FeatureEncoder, row: IndicatorRow) -> np.ndarray:
    return enc.encode_row(row)
