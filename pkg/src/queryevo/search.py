"""Ranked retrieval of query results from a document source."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Protocol, Sequence

from .corpus import Corpus


@dataclass(frozen=True)
class RankedResult:
    doc_id: str
    position: int  # 1 = best


class SearchBackend(Protocol):
    """Anything that turns query terms into a deterministic ranked list."""

    def search(self, terms: Sequence[str], max_results: int) -> list[RankedResult]: ...


class CorpusSearcher:
    """Built-in TF-IDF searcher over an in-memory corpus.

    A document scores the sum of tf * idf over the literal query terms.
    Synonyms and gene weights play no part in matching. Zero-score documents
    are dropped and ties go to the smaller doc id.
    """

    def __init__(self, corpus: Corpus):
        if len(corpus) == 0:
            raise ValueError("corpus is empty")
        self.corpus = corpus
        self._postings: dict[str, list[tuple[str, int]]] = {}
        for doc_id in corpus.doc_ids:
            for term, tf in corpus.term_counts(doc_id).items():
                self._postings.setdefault(term, []).append((doc_id, tf))

    def scores(self, terms: Sequence[str]) -> dict[str, float]:
        parts: dict[str, list[float]] = {}
        for term in dict.fromkeys(self.corpus.tokenizer.normalize(t) for t in terms):
            postings = self._postings.get(term)
            if not postings:
                continue
            weight = self.corpus.idf(term)
            for doc_id, tf in postings:
                parts.setdefault(doc_id, []).append(tf * weight)
        return {doc_id: math.fsum(p) for doc_id, p in parts.items()}

    def search(self, terms: Sequence[str], max_results: int) -> list[RankedResult]:
        if max_results < 1:
            raise ValueError("max_results must be >= 1")
        scored = [(s, d) for d, s in self.scores(terms).items() if s > 0.0]
        scored.sort(key=lambda item: (-item[0], item[1]))
        return [RankedResult(doc_id, pos) for pos, (_, doc_id) in enumerate(scored[:max_results], 1)]


def execute(query, corpus: Corpus, max_results: int) -> list[RankedResult]:
    """Run a query genome (or plain term sequence) against ``corpus``."""
    terms = query.terms if hasattr(query, "terms") else list(query)
    return CorpusSearcher(corpus).search(terms, max_results)
