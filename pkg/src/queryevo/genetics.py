"""Query genomes and the operators that evolve them.

A genome is a fixed-length vector of genes ``{term, weight, synonyms}``.
All randomness comes from an explicit :class:`random.Random`; every set is
sorted before a draw so runs replay exactly regardless of hash seeding.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Iterable, Mapping, Sequence


@dataclass(frozen=True)
class Gene:
    term: str
    weight: float = 1.0
    synonyms: frozenset[str] = frozenset()

    def __post_init__(self):
        if not self.term:
            raise ValueError("gene term must be non-empty")
        if self.term in self.synonyms:
            raise ValueError(f"term {self.term!r} listed among its own synonyms")


@dataclass(frozen=True)
class QueryGenome:
    genes: tuple[Gene, ...]

    def __post_init__(self):
        object.__setattr__(self, "genes", tuple(self.genes))
        terms = self.terms
        if len(set(terms)) != len(terms):
            raise ValueError(f"duplicate terms in genome: {terms}")

    @property
    def terms(self) -> tuple[str, ...]:
        return tuple(g.term for g in self.genes)

    def __len__(self) -> int:
        return len(self.genes)

    @classmethod
    def from_terms(cls, terms: Sequence[str], pattern: SearchPattern | None = None) -> QueryGenome:
        m = len(terms)
        syn = pattern.entries if pattern is not None else {}
        return cls(tuple(Gene(t, 1.0 / m, frozenset(syn.get(t, frozenset()))) for t in terms))


@dataclass(frozen=True)
class Population:
    members: tuple[QueryGenome, ...]
    generation_no: int = 0

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(self.members))

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)


@dataclass(frozen=True)
class SearchPattern:
    """Subject-domain terms with their synonym sets."""

    entries: Mapping[str, frozenset[str]] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for term, syns in self.entries.items():
            if term in clean:
                raise ValueError(f"duplicate pattern term {term!r}")
            clean[term] = frozenset(syns) - {term}
        object.__setattr__(self, "entries", dict(sorted(clean.items())))

    @property
    def terms(self) -> list[str]:
        return list(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def gene(self, term: str, weight: float) -> Gene:
        return Gene(term, weight, self.entries.get(term, frozenset()))


def load_pattern(path: str | Path, normalize: Callable[[str], str] = str.lower) -> SearchPattern:
    """Read ``term<TAB>syn1,syn2,...`` lines; the synonym column may be absent."""
    entries: dict[str, frozenset[str]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\r\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            term, _, rest = line.partition("\t")
            term = normalize(term.strip())
            if not term or len(term.split()) != 1:
                raise ValueError(f"{path}:{lineno}: pattern term must be a single word")
            if term in entries:
                raise ValueError(f"{path}:{lineno}: duplicate pattern term {term!r}")
            syns = {normalize(s.strip()) for s in rest.split(",") if s.strip()}
            entries[term] = frozenset(syns)
    return SearchPattern(entries)


def init_population(pattern: SearchPattern, n: int, m: int, rng: random.Random) -> Population:
    if n < 2 or m < 1:
        raise ValueError(f"need n >= 2 and m >= 1, got n={n}, m={m}")
    if not 2 * n < len(pattern):
        raise ValueError(f"population constraint N < |K|/2 violated: N={n}, |K|={len(pattern)}")
    if len(pattern) < m:
        raise ValueError(f"pattern has {len(pattern)} terms, fewer than M={m}")
    terms = pattern.terms
    members = tuple(
        QueryGenome(tuple(pattern.gene(t, 1.0 / m) for t in rng.sample(terms, m))) for _ in range(n)
    )
    return Population(members, 0)


def _repair(
    child: list[Gene],
    foreign: Iterable[int],
    donor: QueryGenome,
    pattern: SearchPattern | None,
    rng: random.Random,
) -> QueryGenome:
    """Replace duplicated terms sitting in exchanged slots.

    Replacements come from the donor parent's unused genes, then from the pattern.
    """
    m = len(child)
    foreign = set(foreign)
    kept = {child[i].term for i in range(m) if i not in foreign}
    seen: set[str] = set(kept)
    for i in sorted(foreign):
        if child[i].term not in seen:
            seen.add(child[i].term)
            continue
        present = seen | {child[j].term for j in foreign if j > i}
        spare = [g for g in donor.genes if g.term not in present]
        if spare:
            gene = rng.choice(spare)
        else:
            pool = [t for t in (pattern.terms if pattern else []) if t not in present]
            if not pool:
                raise ValueError("cannot repair offspring: no unused donor or pattern terms")
            gene = pattern.gene(rng.choice(pool), 1.0 / m)
        child[i] = gene
        seen.add(gene.term)
    return QueryGenome(tuple(child))


def crossover(
    a: QueryGenome,
    b: QueryGenome,
    points: int,
    rng: random.Random,
    cuts: Sequence[int] | None = None,
    pattern: SearchPattern | None = None,
) -> tuple[QueryGenome, QueryGenome]:
    """One- or two-point exchange of gene segments between two genomes.

    ``cuts`` fixes the cut positions (each in ``1..m-1``); otherwise they are
    drawn from ``rng``. A cut ``c`` splits the genome into ``[:c]`` and
    ``[c:]``. With two cuts the middle segment is exchanged. Two-point
    crossover on genomes of length 2 degrades to one-point.
    """
    m = len(a)
    if len(b) != m:
        raise ValueError(f"crossover needs equal lengths, got {m} and {len(b)}")
    if m < 2:
        raise ValueError("crossover needs genomes of length >= 2")
    if points not in (1, 2):
        raise ValueError("points must be 1 or 2")
    if cuts is None:
        if points == 2 and m >= 3:
            cuts = sorted(rng.sample(range(1, m), 2))
        else:
            cuts = [rng.randrange(1, m)]
    cuts = list(cuts)
    if any(not 1 <= c < m for c in cuts) or cuts != sorted(set(cuts)) or len(cuts) not in (1, 2):
        raise ValueError(f"invalid cut positions {cuts} for length {m}")
    lo, hi = (cuts[0], m) if len(cuts) == 1 else (cuts[0], cuts[1])
    swapped = range(lo, hi)
    child_a = list(a.genes[:lo]) + list(b.genes[lo:hi]) + list(a.genes[hi:])
    child_b = list(b.genes[:lo]) + list(a.genes[lo:hi]) + list(b.genes[hi:])
    return (
        _repair(child_a, swapped, b, pattern, rng),
        _repair(child_b, swapped, a, pattern, rng),
    )


def mutate(g: QueryGenome, p_m: float, rng: random.Random) -> QueryGenome:
    """With probability ``p_m`` swap one random gene's term for one of its synonyms.

    The displaced term joins the synonym set. Synonyms already used as terms
    elsewhere in the genome are not eligible; with none eligible the genome
    comes back unchanged.
    """
    if not 0.0 <= p_m <= 1.0:
        raise ValueError(f"mutation probability must lie in [0, 1], got {p_m}")
    if rng.random() >= p_m:
        return g
    idx = rng.randrange(len(g))
    gene = g.genes[idx]
    used = set(g.terms)
    candidates = sorted(gene.synonyms - used)
    if not candidates:
        return g
    new_term = rng.choice(candidates)
    new_gene = replace(gene, term=new_term, synonyms=(gene.synonyms - {new_term}) | {gene.term})
    genes = list(g.genes)
    genes[idx] = new_gene
    return QueryGenome(tuple(genes))


def genotype_distance(a: QueryGenome, b: QueryGenome) -> int:
    if len(a) != len(b):
        raise ValueError(f"genome lengths differ: {len(a)} vs {len(b)}")
    return len(a) - len(set(a.terms) & set(b.terms))


def select_outbred_pairs(
    pop: Population | Sequence[QueryGenome],
    distance: Callable[[QueryGenome, QueryGenome], float] = genotype_distance,
) -> list[tuple[int, int]]:
    """Greedy outbreeding: lowest unpaired index mates its most distant unpaired peer.

    Returns index pairs; with odd N the leftover genome stays unpaired.
    """
    members = list(pop)
    if len(members) < 2:
        raise ValueError("need at least two genomes to pair")
    unpaired = list(range(len(members)))
    pairs = []
    while len(unpaired) >= 2:
        i = unpaired.pop(0)
        j = max(unpaired, key=lambda k: (distance(members[i], members[k]), -k))
        unpaired.remove(j)
        pairs.append((i, j))
    return pairs


def elitist_select(
    parents: Population,
    offspring: Sequence[QueryGenome],
    fitness: Callable[[QueryGenome], float],
    n: int,
) -> Population:
    """Keep the ``n`` fittest of parents + offspring; ties favour parents, then lower index."""
    pool = list(parents.members) + list(offspring)
    if len(pool) < n:
        raise ValueError(f"selection pool of {len(pool)} is smaller than n={n}")
    ranked = sorted(range(len(pool)), key=lambda i: (-fitness(pool[i]), i))
    return Population(tuple(pool[i] for i in ranked[:n]), parents.generation_no + 1)


def is_stable(history: Sequence[float], epsilon: float, window: int) -> bool:
    """True when the last ``window + 1`` fitness values all lie within ``epsilon``."""
    if epsilon < 0 or window < 1:
        raise ValueError("epsilon must be >= 0 and window >= 1")
    if len(history) < window + 1:
        return False
    tail = history[-(window + 1):]
    return max(tail) - min(tail) <= epsilon
