"""Rank, universality and semantic criteria and their additive aggregation."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Collection, Iterable, Sequence

from .corpus import Corpus, ResultScope, TermVector
from .search import RankedResult


@dataclass(frozen=True)
class ResultRecord:
    """One result of one query in one population, raw and normalized."""

    population_no: int
    query_no: int
    doc_id: str
    g_raw: float
    g: float
    p_raw: float
    p: float
    s_raw: float
    s: float


@dataclass(frozen=True)
class NormalizationContext:
    g_min: float
    g_max: float
    p_min: float
    p_max: float

    def __post_init__(self):
        if self.g_min > self.g_max or self.p_min > self.p_max:
            raise ValueError(f"inverted normalization bounds: {self}")

    @classmethod
    def from_raw(cls, g_values: Iterable[float], p_values: Iterable[float]) -> NormalizationContext:
        g_values, p_values = list(g_values), list(p_values)
        if not g_values or not p_values:
            raise ValueError("normalization needs at least one result")
        return cls(min(g_values), max(g_values), min(p_values), max(p_values))


def min_max(value: float, lo: float, hi: float) -> float:
    """Position of ``value`` within ``[lo, hi]``; a zero-width range maps to 0.5."""
    if not lo <= value <= hi:
        raise ValueError(f"value {value} outside [{lo}, {hi}]")
    if hi == lo:
        return 0.5
    return (value - lo) / (hi - lo)


def normalize_rank(g_raw: float, ctx: NormalizationContext) -> float:
    if ctx.g_max == ctx.g_min:
        min_max(g_raw, ctx.g_min, ctx.g_max)
        return 0.5
    return 1.0 - min_max(g_raw, ctx.g_min, ctx.g_max)


def normalize_universality(p_raw: float, ctx: NormalizationContext) -> float:
    return min_max(p_raw, ctx.p_min, ctx.p_max)


def _positions(doc_id: str, population_results: Sequence[Sequence[RankedResult]]) -> list[int]:
    found = [r.position for results in population_results for r in results if r.doc_id == doc_id]
    if not found:
        raise ValueError(f"document not in population results: {doc_id!r}")
    return found


def rank_raw(doc_id: str, population_results: Sequence[Sequence[RankedResult]]) -> float:
    """Sum of the document's positions over every list it appears in."""
    return float(sum(_positions(doc_id, population_results)))


def universality_raw(doc_id: str, population_results: Sequence[Sequence[RankedResult]]) -> float:
    """Number of the population's result lists that contain the document."""
    _positions(doc_id, population_results)
    return float(sum(any(r.doc_id == doc_id for r in results) for results in population_results))


def semantic_similarity(a: TermVector, b: TermVector) -> float:
    """Cosine of two sparse vectors; empty or zero-norm input gives 0."""
    if not a or not b:
        return 0.0
    if len(a) > len(b):
        a, b = b, a
    dot = math.fsum(w * b[t] for t, w in a.items() if t in b)
    na = math.sqrt(math.fsum(w * w for w in a.values()))
    nb = math.sqrt(math.fsum(w * w for w in b.values()))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return max(-1.0, min(1.0, dot / (na * nb)))


def result_fitness(g: float, p: float, s: float, w) -> float:
    return w.w_g * g + w.w_p * p + w.w_s * s


def query_fitness(records: Sequence[ResultRecord], w) -> float:
    """Mean additive fitness over one query's results; s enters as the raw cosine."""
    if not records:
        raise ValueError("query returned no results")
    return math.fsum(result_fitness(r.g, r.p, r.s_raw, w) for r in records) / len(records)


def population_fitness(per_query: Sequence[float]) -> float:
    if not per_query:
        raise ValueError("population fitness needs at least one query")
    return math.fsum(per_query) / len(per_query)


def score_population(
    population_no: int,
    population_results: Sequence[Sequence[RankedResult]],
    corpus: Corpus,
    pattern_terms: Collection[str],
) -> list[ResultRecord]:
    """Build the records of one population in two phases: raw criteria, then normalization.

    Records come out grouped by query index, each group in rank order. Idf for
    the semantic criterion is counted over the distinct documents returned by
    the whole population.
    """
    positions: dict[str, int] = {}
    counts: dict[str, int] = {}
    for results in population_results:
        for r in results:
            positions[r.doc_id] = positions.get(r.doc_id, 0) + r.position
            counts[r.doc_id] = counts.get(r.doc_id, 0) + 1
    if not positions:
        return []

    scope = ResultScope((corpus[d] for d in positions), corpus.tokenizer)
    k_vec = scope.pattern_vector(pattern_terms)
    s_raw = {d: semantic_similarity(scope.result_vector(d), k_vec) for d in positions}

    ctx = NormalizationContext.from_raw(positions.values(), counts.values())
    s_lo, s_hi = min(s_raw.values()), max(s_raw.values())
    records = []
    for q, results in enumerate(population_results):
        for r in results:
            g_raw, p_raw = float(positions[r.doc_id]), float(counts[r.doc_id])
            records.append(
                ResultRecord(
                    population_no=population_no,
                    query_no=q,
                    doc_id=r.doc_id,
                    g_raw=g_raw,
                    g=normalize_rank(g_raw, ctx),
                    p_raw=p_raw,
                    p=normalize_universality(p_raw, ctx),
                    s_raw=s_raw[r.doc_id],
                    s=min_max(s_raw[r.doc_id], s_lo, s_hi),
                )
            )
    return records


def fitness_by_query(records: Sequence[ResultRecord], n_queries: int, w) -> list[float]:
    """Per-query fitness for query indices ``0..n_queries-1``; a query with no records scores 0."""
    grouped: dict[int, list[ResultRecord]] = {}
    for rec in records:
        grouped.setdefault(rec.query_no, []).append(rec)
    return [query_fitness(grouped[q], w) if q in grouped else 0.0 for q in range(n_queries)]
