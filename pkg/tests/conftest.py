import random
from pathlib import Path

import pytest

from queryevo.corpus import Corpus, Document
from queryevo.genetics import SearchPattern
from queryevo.runner import ExperimentConfig

PATTERN_TERMS = [
    "evolution", "process", "control", "enterprise", "technology", "industrial",
    "production", "quality", "automation", "system", "management", "innovation",
    "model", "design", "planning", "optimization", "resource", "efficiency",
    "monitoring", "diagnostics", "standard", "maintenance", "equipment", "workflow",
]
FILLER = [
    "the", "report", "annual", "review", "market", "data", "study", "case", "news",
    "article", "overview", "survey", "analysis", "approach", "method", "practice",
]


def synthetic_pattern(n_terms: int = len(PATTERN_TERMS), n_syn: int = 2) -> SearchPattern:
    terms = PATTERN_TERMS[:n_terms]
    entries = {t: frozenset(f"{t}{k}" for k in range(1, n_syn + 1)) for t in terms}
    return SearchPattern(entries)


def synthetic_documents(n_docs: int, seed: int = 0, pattern: SearchPattern | None = None) -> list[Document]:
    pattern = pattern or synthetic_pattern()
    vocab = list(pattern.terms) + sorted({s for syns in pattern.entries.values() for s in syns})
    rng = random.Random(seed)
    docs = []
    for i in range(n_docs):
        title = " ".join(rng.choice(vocab) for _ in range(rng.randint(1, 4)))
        snippet = " ".join(rng.choice(vocab + FILLER * 2) for _ in range(rng.randint(4, 12)))
        docs.append(Document(f"d{i:04d}", title.capitalize(), snippet + "."))
    return docs


@pytest.fixture(scope="session")
def pattern() -> SearchPattern:
    return synthetic_pattern()


@pytest.fixture(scope="session")
def corpus(pattern) -> Corpus:
    return Corpus(synthetic_documents(200, seed=1, pattern=pattern))


def write_inputs(directory: Path, docs: list[Document], pattern: SearchPattern) -> tuple[Path, Path]:
    corpus_file = directory / "corpus.tsv"
    corpus_file.write_text(
        "".join(f"{d.id}\t{d.title}\t{d.snippet}\n" for d in docs), encoding="utf-8"
    )
    pattern_file = directory / "pattern.tsv"
    pattern_file.write_text(
        "".join(f"{t}\t{','.join(sorted(s))}\n" for t, s in pattern.entries.items()), encoding="utf-8"
    )
    return corpus_file, pattern_file


@pytest.fixture
def config_file(tmp_path) -> Path:
    pattern = synthetic_pattern()
    corpus_file, pattern_file = write_inputs(tmp_path, synthetic_documents(200, seed=1, pattern=pattern), pattern)
    cfg = tmp_path / "exp.cfg"
    cfg.write_text(
        "# synthetic experiment\n"
        f"corpus_file = {corpus_file.name}\n"
        f"pattern_file = {pattern_file.name}\n"
        "queries_per_population = 5\n"
        "terms_per_query = 8\n"
        "max_results = 20\n"
        "mutation_probability = 0.1\n"
        "generations = 30\n"
        "seed = 3\n",
        encoding="utf-8",
    )
    return cfg


def small_config(**kw) -> ExperimentConfig:
    base = dict(queries_per_population=5, terms_per_query=8, max_results=20, generations=5, seed=11)
    base.update(kw)
    return ExperimentConfig(**base)
