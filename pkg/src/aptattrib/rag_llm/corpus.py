"""TF-IDF index over intel documents with cosine retrieval."""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

from ..errors import DataError


class EmptyCorpus(DataError):
    pass


_NON_ALNUM = re.compile(r"[^0-9a-z]+")


def tokenize(text: str) -> list[str]:
    """Lowercase, split on non-alphanumerics, drop tokens shorter than 2."""
    return [t for t in _NON_ALNUM.split(text.lower()) if len(t) >= 2]


@dataclass(frozen=True)
class Document:
    doc_id: str
    title: str
    body: str


@dataclass(frozen=True)
class IntelCorpus:
    documents: tuple[Document, ...]
    idf: dict[str, float]
    vectors: tuple[dict[str, float], ...]

    def vectorize(self, text: str) -> dict[str, float]:
        """L2-normalized TF-IDF vector; tokens unseen in the corpus are dropped."""
        tf = Counter(t for t in tokenize(text) if t in self.idf)
        return _normalize({t: c * self.idf[t] for t, c in tf.items()})

    def document(self, doc_id: str) -> Document:
        for d in self.documents:
            if d.doc_id == doc_id:
                return d
        raise KeyError(doc_id)


def _normalize(vec: dict[str, float]) -> dict[str, float]:
    norm = math.sqrt(math.fsum(v * v for v in vec.values()))
    if norm == 0.0:
        return {}
    return {t: v / norm for t, v in vec.items()}


def index_corpus(docs) -> IntelCorpus:
    """Index ``docs`` (Documents or ``(doc_id, title, body)`` triples) by body text."""
    documents = tuple(d if isinstance(d, Document) else Document(*d) for d in docs)
    token_lists = [tokenize(d.body) for d in documents]
    if not any(token_lists):
        raise EmptyCorpus("corpus needs at least one document with indexable text")
    n_docs = len(documents)
    df = Counter()
    for toks in token_lists:
        df.update(set(toks))
    idf = {t: math.log(1.0 + n_docs / c) for t, c in sorted(df.items())}
    vectors = tuple(_normalize({t: c * idf[t] for t, c in Counter(toks).items()}) for toks in token_lists)
    return IntelCorpus(documents, idf, vectors)


def cosine(a: dict[str, float], b: dict[str, float]) -> float:
    if len(a) > len(b):
        a, b = b, a
    return math.fsum(v * b[t] for t, v in a.items() if t in b)


def retrieve(corpus: IntelCorpus, query: str, k: int = 3) -> list[tuple[str, float]]:
    """Top-``k`` documents with a positive cosine score, best first, ties by doc_id."""
    if k < 1:
        raise ValueError("k must be >= 1")
    q = corpus.vectorize(query)
    if not q:
        return []
    scored = [(d.doc_id, cosine(q, v)) for d, v in zip(corpus.documents, corpus.vectors)]
    scored = [s for s in scored if s[1] > 0.0]
    scored.sort(key=lambda s: (-s[1], s[0]))
    return scored[:k]


def load_corpus_dir(path) -> list[Document]:
    """One plain-text file per document: filename is the id, first line the title."""
    root = Path(path)
    if not root.is_dir():
        raise DataError(f"corpus directory not found: {root}")
    docs = []
    for f in sorted(p for p in root.iterdir() if p.is_file() and not p.name.startswith(".")):
        try:
            text = f.read_text(encoding="utf-8")
        except (OSError, UnicodeDecodeError) as exc:
            raise DataError(f"cannot read corpus file {f}: {exc}") from exc
        title, _, body = text.partition("\n")
        docs.append(Document(f.name, title.strip(), body.strip()))
    if not docs:
        raise EmptyCorpus(f"no documents in {root}")
    return docs
