"""Documents, tokenization and TF-IDF term vectors."""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Collection, Iterable, Mapping, Sequence

TermVector = dict[str, float]

# Letters and digits only; underscore and every kind of dash/punctuation split.
_WORD = re.compile(r"[^\W_]+", re.UNICODE)


def tokenize(
    text: str,
    stopwords: Collection[str] = frozenset(),
    lemmas: Mapping[str, str] | None = None,
) -> list[str]:
    """Split ``text`` into lowercase terms, dropping punctuation and stopwords.

    ``lemmas`` is an optional term -> lemma table applied after lowercasing;
    stopwords are checked against the lemmatized form.
    """
    terms = []
    for match in _WORD.finditer(text.lower()):
        term = match.group()
        if lemmas is not None:
            term = lemmas.get(term, term)
        if term not in stopwords:
            terms.append(term)
    return terms


@dataclass(frozen=True)
class Tokenizer:
    stopwords: frozenset[str] = frozenset()
    lemmas: Mapping[str, str] = field(default_factory=dict)

    def __call__(self, text: str) -> list[str]:
        return tokenize(text, self.stopwords, self.lemmas)

    def normalize(self, term: str) -> str:
        term = term.strip().lower()
        return self.lemmas.get(term, term)


@dataclass(frozen=True)
class Document:
    id: str
    title: str
    snippet: str = ""

    def __post_init__(self):
        if not self.id:
            raise ValueError("document id must be non-empty")
        if not (self.title or self.snippet):
            raise ValueError(f"document {self.id!r} has empty title and snippet")

    @property
    def text(self) -> str:
        return f"{self.title} {self.snippet}"


class Corpus:
    """Immutable document collection with a document-frequency index."""

    def __init__(self, documents: Iterable[Document], tokenizer: Tokenizer | None = None):
        self.tokenizer = tokenizer or Tokenizer()
        docs: dict[str, Document] = {}
        for doc in documents:
            if doc.id in docs:
                raise ValueError(f"duplicate document id {doc.id!r}")
            docs[doc.id] = doc
        self._docs = docs
        self._tf = {doc_id: Counter(self.tokenizer(doc.text)) for doc_id, doc in docs.items()}
        df: Counter[str] = Counter()
        for counts in self._tf.values():
            df.update(counts.keys())
        self._df = dict(sorted(df.items()))

    def __len__(self) -> int:
        return len(self._docs)

    def __iter__(self):
        return iter(self._docs.values())

    def __contains__(self, doc_id: str) -> bool:
        return doc_id in self._docs

    def __getitem__(self, doc_id: str) -> Document:
        return self._docs[doc_id]

    @property
    def doc_ids(self) -> list[str]:
        return list(self._docs)

    @property
    def document_frequency(self) -> Mapping[str, int]:
        return dict(self._df)

    def term_counts(self, doc_id: str) -> Mapping[str, int]:
        return self._tf[doc_id]

    def idf(self, term: str) -> float:
        return idf_value(len(self._docs), self._df.get(term, 0))


def idf_value(n_results: int, n_containing: int) -> float:
    """log((R+1)/R^n); a term found nowhere gets log(R+1)."""
    if n_results < 1:
        raise ValueError("idf needs at least one result")
    return math.log((n_results + 1) / max(n_containing, 1))


class ResultScope:
    """The set of result texts over which idf is counted for the semantic criterion.

    Documents are deduplicated by id, so R is the number of distinct results.
    """

    def __init__(self, documents: Iterable[Document], tokenizer: Tokenizer | None = None):
        self.tokenizer = tokenizer or Tokenizer()
        self._tokens: dict[str, list[str]] = {}
        for doc in documents:
            if doc.id not in self._tokens:
                self._tokens[doc.id] = self.tokenizer(doc.text)
        if not self._tokens:
            raise ValueError("result scope must contain at least one document")
        df: Counter[str] = Counter()
        for tokens in self._tokens.values():
            df.update(set(tokens))
        self._df = df

    def __contains__(self, doc_id: str) -> bool:
        return doc_id in self._tokens

    @property
    def size(self) -> int:
        return len(self._tokens)

    def containing(self, term: str) -> int:
        return self._df.get(term, 0)

    def idf(self, term: str) -> float:
        return idf_value(self.size, self.containing(term))

    def result_vector(self, doc_id: str) -> TermVector:
        counts = Counter(self._tokens[doc_id])
        return {term: tf * self.idf(term) for term, tf in counts.items()}

    def pattern_vector(self, pattern: Collection[str]) -> TermVector:
        if not pattern:
            raise ValueError("empty search pattern")
        share = 1.0 / len(pattern)
        vec = {term: share * self.idf(term) for term in sorted(pattern)}
        return {t: w for t, w in vec.items() if w != 0.0}


def idf(term: str, results: Sequence[Document], tokenizer: Tokenizer | None = None) -> float:
    return ResultScope(results, tokenizer).idf(term)


def result_vector(
    doc: Document, results: Sequence[Document], tokenizer: Tokenizer | None = None
) -> TermVector:
    scope = ResultScope(results, tokenizer)
    if doc.id not in scope:
        raise ValueError(f"document {doc.id!r} is not among the results")
    return scope.result_vector(doc.id)


def pattern_vector(
    pattern: Collection[str], results: Sequence[Document], tokenizer: Tokenizer | None = None
) -> TermVector:
    if not pattern:
        raise ValueError("empty search pattern")
    return ResultScope(results, tokenizer).pattern_vector(pattern)


def load_corpus(path: str | Path, tokenizer: Tokenizer | None = None) -> Corpus:
    """Read ``id<TAB>title<TAB>snippet`` lines (UTF-8); blank lines are skipped."""
    docs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\r\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) not in (2, 3):
                raise ValueError(f"{path}:{lineno}: expected id<TAB>title<TAB>snippet")
            try:
                docs.append(Document(*parts))
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
    return Corpus(docs, tokenizer)


def load_stopwords(path: str | Path) -> frozenset[str]:
    with open(path, encoding="utf-8") as fh:
        return frozenset(w.strip().lower() for w in fh if w.strip())


def load_lemmas(path: str | Path) -> dict[str, str]:
    """Term normalization table: ``term<TAB>lemma`` per line."""
    table = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            parts = line.rstrip("\r\n").split("\t")
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected term<TAB>lemma")
            table[parts[0].strip().lower()] = parts[1].strip().lower()
    return table
