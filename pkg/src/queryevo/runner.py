"""Experiment orchestration: config, the evolutionary loop, logs and fitness curves."""

from __future__ import annotations

import csv
import dataclasses
import json
import logging
import random
import re
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Literal, Sequence

from .corpus import Corpus, Tokenizer, load_corpus, load_lemmas, load_stopwords
from .fitness import (
    ResultRecord,
    fitness_by_query,
    population_fitness,
    query_fitness,
    score_population,
)
from .genetics import (
    Population,
    QueryGenome,
    SearchPattern,
    crossover,
    elitist_select,
    init_population,
    is_stable,
    load_pattern,
    mutate,
    select_outbred_pairs,
)
from .search import CorpusSearcher, RankedResult, SearchBackend
from .weights import (
    AllPopulations,
    PerPopulation,
    PerQuery,
    RadiusConfig,
    samples_from_records,
    select_records,
    weights_for_samples,
)

logger = logging.getLogger(__name__)


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    pattern_file: str = ""
    corpus_file: str = ""
    stopwords_file: str = ""
    lemmas_file: str = ""
    queries_per_population: int = 5
    terms_per_query: int = 8
    max_results: int = 20
    population_max_results: int = 0  # 0 = no per-population cap
    mutation_probability: float = 0.1
    generations: int = 200
    seed: int = 0
    stop_enabled: bool = False
    stop_epsilon: float = 1e-6
    stop_window: int = 10
    crossover_points: str = "random"
    xi_g: float = 0.33
    xi_p: float = 0.33
    xi_s: float = 0.34
    radius_variant: str = "direct"
    s_column: str = "raw"
    selection_weights: str = "equal"
    curve_mode: str = "per-population"

    def validate(self) -> None:
        if self.queries_per_population < 2:
            raise ConfigError("queries_per_population must be >= 2")
        if self.terms_per_query < 1:
            raise ConfigError("terms_per_query must be >= 1")
        if self.max_results < 1:
            raise ConfigError("max_results must be >= 1")
        if self.population_max_results < 0:
            raise ConfigError("population_max_results must be >= 0")
        if not 0.0 <= self.mutation_probability <= 1.0:
            raise ConfigError("mutation_probability must lie in [0, 1]")
        if self.generations < 1:
            raise ConfigError("generations must be >= 1")
        if self.stop_epsilon < 0 or self.stop_window < 1:
            raise ConfigError("stop_epsilon must be >= 0 and stop_window >= 1")
        if self.crossover_points not in ("1", "2", "random"):
            raise ConfigError("crossover_points must be 1, 2 or random")
        if self.s_column not in ("raw", "normalized"):
            raise ConfigError("s_column must be raw or normalized")
        if self.selection_weights not in ("equal", "spread", "radius"):
            raise ConfigError("selection_weights must be equal, spread or radius")
        if self.curve_mode not in CURVE_MODES:
            raise ConfigError(f"curve_mode must be one of {', '.join(CURVE_MODES)}")
        try:
            self.radius_config()
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def radius_config(self) -> RadiusConfig:
        return RadiusConfig(self.xi_g, self.xi_p, self.xi_s, self.radius_variant)


def _coerce(name: str, kind: type, text: str):
    if kind is bool:
        low = text.lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"{name}: expected a boolean, got {text!r}")
    try:
        return kind(text)
    except ValueError:
        raise ConfigError(f"{name}: expected {kind.__name__}, got {text!r}") from None


def load_config(path: str | Path, **overrides) -> ExperimentConfig:
    """Read flat ``key = value`` lines; ``#`` starts a comment.

    Relative file paths resolve against the config file's directory.
    """
    path = Path(path)
    kinds = {f.name: {"int": int, "float": float, "bool": bool, "str": str}[f.type] for f in dataclasses.fields(ExperimentConfig)}
    values: dict[str, Any] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            key, value = key.strip(), value.strip()
            if not sep or key not in kinds:
                raise ConfigError(f"{path}:{lineno}: unknown or malformed setting {line!r}")
            values[key] = _coerce(key, kinds[key], value)
    for key, value in overrides.items():
        if value is not None:
            values[key] = value
    for key in ("pattern_file", "corpus_file", "stopwords_file", "lemmas_file"):
        if values.get(key) and not Path(values[key]).is_absolute():
            values[key] = str(path.parent / values[key])
    cfg = ExperimentConfig(**values)
    cfg.validate()
    return cfg


@dataclass
class ResultLog:
    records: list[ResultRecord] = field(default_factory=list)
    metadata: dict[str, Any] = field(default_factory=dict)

    def population_numbers(self) -> list[int]:
        return sorted({r.population_no for r in self.records})

    def population(self, population_no: int) -> list[ResultRecord]:
        return [r for r in self.records if r.population_no == population_no]

    def queries_per_population(self, population_no: int) -> int:
        """Configured N when known, else the number of queries seen in that population."""
        n = self.metadata.get("queries_per_population")
        seen = {r.query_no for r in self.records if r.population_no == population_no}
        return int(n) if n else len(seen)


# -- log I/O -----------------------------------------------------------------

LOG_COLUMNS = ("population_no", "query_no", "doc_id", "g_raw", "g", "p_raw", "p", "s_raw", "s")
_INT_COLUMNS = {"population_no", "query_no"}
_ALIASES = {
    "№популяции": "population_no",
    "№особи(запроса)": "query_no",
    "№особи": "query_no",
    "g(r_i,r)": "g_raw",
    "p(r_i,r)": "p_raw",
    "s(r_i,r)": "s_raw",
}


class LogFormatError(ValueError):
    pass


def _header_name(cell: str) -> str:
    key = re.sub(r"[\s$\\{}]", "", cell).lower()
    return _ALIASES.get(key, key)


def _fmt(value: float) -> str:
    return repr(float(value))


def write_log(log: ResultLog, path: str | Path) -> None:
    """Write records as CSV and, when present, metadata to ``<path>.meta.json``."""
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(LOG_COLUMNS)
        for r in log.records:
            writer.writerow(
                [r.population_no, r.query_no, r.doc_id]
                + [_fmt(getattr(r, c)) for c in LOG_COLUMNS[3:]]
            )
    if log.metadata:
        meta_path(path).write_text(json.dumps(log.metadata, indent=1, ensure_ascii=False), encoding="utf-8")


def meta_path(path: str | Path) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".meta.json")


def _sniff_delimiter(header: str) -> str:
    for delim in ("\t", ";", ","):
        if delim in header:
            return delim
    return ","


def read_log(path: str | Path) -> ResultLog:
    """Parse a result log.

    Accepts ``,`` ``;`` or tab delimiters, comma decimals (when the delimiter is
    not a comma) and the Russian table headers. Rows made only of dots are
    elision markers and are skipped. Without a ``doc_id`` column ids become
    ``row<line>``.
    """
    path = Path(path)
    with open(path, encoding="utf-8", newline="") as fh:
        lines = fh.read().splitlines()
    start = next((i for i, line in enumerate(lines) if line.strip()), None)
    log = ResultLog()
    mp = meta_path(path)
    if mp.exists():
        log.metadata = json.loads(mp.read_text(encoding="utf-8"))
    if start is None:
        return log
    delim = _sniff_delimiter(lines[start])
    reader = csv.reader(lines[start:], delimiter=delim)
    header = [_header_name(c) for c in next(reader)]
    missing = [c for c in LOG_COLUMNS if c not in header and c != "doc_id"]
    if missing:
        raise LogFormatError(f"{path}:{start + 1}: header lacks columns {missing}")
    index = {name: header.index(name) for name in LOG_COLUMNS if name in header}
    for offset, row in enumerate(reader, start + 2):
        if not row or all(re.fullmatch(r"[.…\s]*", c) for c in row):
            continue
        if len(row) < len(header):
            raise LogFormatError(f"{path}:{offset}: expected {len(header)} columns, got {len(row)}")
        values: dict[str, Any] = {}
        for name in LOG_COLUMNS:
            if name not in index:
                values[name] = f"row{offset}"
                continue
            cell = row[index[name]].strip()
            if name == "doc_id":
                if not cell:
                    raise LogFormatError(f"{path}:{offset}: column doc_id is empty")
                values[name] = cell
                continue
            if delim != ",":
                cell = cell.replace(",", ".")
            try:
                values[name] = int(cell) if name in _INT_COLUMNS else float(cell)
            except ValueError:
                raise LogFormatError(f"{path}:{offset}: column {name}: bad number {cell!r}") from None
        log.records.append(ResultRecord(**values))
    return log


# -- the evolutionary loop -----------------------------------------------------


def _cap_population(results: list[list[RankedResult]], cap: int) -> list[list[RankedResult]]:
    """Drop the lowest-ranked results (largest position, later query first) until ``cap`` remain."""
    total = sum(len(r) for r in results)
    if not cap or total <= cap:
        return results
    order = sorted(
        ((r.position, q, i) for q, lst in enumerate(results) for i, r in enumerate(lst)),
        reverse=True,
    )
    drop = {(q, i) for _, q, i in order[: total - cap]}
    return [[r for i, r in enumerate(lst) if (q, i) not in drop] for q, lst in enumerate(results)]


class Evaluator:
    """Executes genomes against a backend and scores them as one population."""

    def __init__(self, backend: SearchBackend, corpus: Corpus, pattern: SearchPattern, cfg: ExperimentConfig):
        self.backend = backend
        self.corpus = corpus
        self.pattern_terms = pattern.terms
        self.cfg = cfg
        self._cache: dict[tuple[str, ...], list[RankedResult]] = {}

    def results(self, genomes: Sequence[QueryGenome]) -> list[list[RankedResult]]:
        out = []
        for g in genomes:
            key = g.terms
            if key not in self._cache:
                self._cache[key] = self.backend.search(list(key), self.cfg.max_results)
            out.append(self._cache[key])
        return _cap_population(out, self.cfg.population_max_results)

    def score(self, population_no: int, genomes: Sequence[QueryGenome]) -> list[ResultRecord]:
        return score_population(population_no, self.results(genomes), self.corpus, self.pattern_terms)

    def selection_weights(self, records: Sequence[ResultRecord]):
        method = self.cfg.selection_weights
        if method == "equal" or not records:
            return weights_for_samples(None, "equal")
        return weights_for_samples(samples_from_records(records, self.cfg.s_column), method, self.cfg.radius_config())


def load_inputs(cfg: ExperimentConfig) -> tuple[Corpus, SearchPattern]:
    stopwords = load_stopwords(cfg.stopwords_file) if cfg.stopwords_file else frozenset()
    lemmas = load_lemmas(cfg.lemmas_file) if cfg.lemmas_file else {}
    tokenizer = Tokenizer(stopwords, lemmas)
    corpus = load_corpus(cfg.corpus_file, tokenizer)
    pattern = load_pattern(cfg.pattern_file, tokenizer.normalize)
    return corpus, pattern


def run_experiment(
    cfg: ExperimentConfig,
    corpus: Corpus | None = None,
    pattern: SearchPattern | None = None,
    backend: SearchBackend | None = None,
) -> ResultLog:
    """Evolve query populations and log every result of every generation.

    Each generation is executed and logged under its own normalization
    context. Offspring come from outbred pairs via crossover then mutation;
    parents and offspring are scored together as one selection pool, and the
    fittest N form the next generation.
    """
    cfg.validate()
    if corpus is None or pattern is None:
        loaded_corpus, loaded_pattern = load_inputs(cfg)
        corpus = loaded_corpus if corpus is None else corpus
        pattern = loaded_pattern if pattern is None else pattern
    if len(corpus) == 0:
        raise ConfigError("corpus is empty")
    if len(pattern) < cfg.terms_per_query:
        raise ConfigError(f"pattern has {len(pattern)} terms, fewer than terms_per_query={cfg.terms_per_query}")
    n, m = cfg.queries_per_population, cfg.terms_per_query
    if not 2 * n < len(pattern):
        raise ConfigError(f"population constraint N < |K|/2 violated: N={n}, |K|={len(pattern)}")

    rng = random.Random(cfg.seed)
    evaluator = Evaluator(backend or CorpusSearcher(corpus), corpus, pattern, cfg)
    started = time.time()
    pop = init_population(pattern, n, m, rng)

    log = ResultLog()
    history: list[float] = []
    audit: list[dict[str, Any]] = []
    fitness_trail: list[dict[str, Any]] = []
    for gen in range(cfg.generations):
        records = evaluator.score(gen, pop.members)
        log.records.extend(records)
        w = evaluator.selection_weights(records)
        per_query = fitness_by_query(records, n, w)
        history.append(population_fitness(per_query))
        fitness_trail.append({"population_no": gen, "queries": per_query, "population": history[-1]})
        entry: dict[str, Any] = {"population_no": gen, "members": [list(g.terms) for g in pop]}
        audit.append(entry)
        logger.debug("generation %d: W=%.6f", gen, history[-1])

        if gen == cfg.generations - 1:
            break
        if cfg.stop_enabled and is_stable(history, cfg.stop_epsilon, cfg.stop_window):
            logger.info("population stable after generation %d", gen)
            break

        offspring: list[QueryGenome] = []
        pairs = select_outbred_pairs(pop)
        for i, j in pairs:
            a, b = pop.members[i], pop.members[j]
            if m >= 2:
                points = rng.choice((1, 2)) if cfg.crossover_points == "random" else int(cfg.crossover_points)
                a, b = crossover(a, b, points, rng, pattern=pattern)
            offspring += [mutate(a, cfg.mutation_probability, rng), mutate(b, cfg.mutation_probability, rng)]

        pool = list(pop.members) + offspring
        pool_records = evaluator.score(-1, pool)
        pool_fit = fitness_by_query(pool_records, len(pool), evaluator.selection_weights(pool_records))
        by_index = {id(g): f for g, f in zip(pool, pool_fit)}
        pop = elitist_select(pop, offspring, lambda g: by_index[id(g)], n)
        entry.update(
            pairs=[list(p) for p in pairs],
            pool=[list(g.terms) for g in pool],
            pool_fitness=pool_fit,
        )

    log.metadata = {
        "config": dataclasses.asdict(cfg),
        "seed": cfg.seed,
        "queries_per_population": n,
        "fitness": fitness_trail,
        "genomes": audit,
        "started_at": started,
        "finished_at": time.time(),
    }
    return log


# -- curves --------------------------------------------------------------------

CURVE_MODES = ("all", "per-population", "per-query")
CURVE_COLUMNS = ("population_no", "W_equ", "W_dis", "W_rad")


@dataclass(frozen=True)
class CurvePoint:
    population_no: int
    W_equ: float
    W_dis: float
    W_rad: float


def _population_curve_value(records, n_queries, weights_for_query) -> float:
    grouped: dict[int, list[ResultRecord]] = {}
    for r in records:
        grouped.setdefault(r.query_no, []).append(r)
    values = [query_fitness(recs, weights_for_query(q, recs)) for q, recs in sorted(grouped.items())]
    values += [0.0] * (n_queries - len(values))
    return population_fitness(values)


def compute_curves(
    log: ResultLog,
    radius_cfg: RadiusConfig = RadiusConfig(),
    mode: Literal["all", "per-population", "per-query"] = "per-population",
    s_column: str = "raw",
) -> list[CurvePoint]:
    """Population fitness per generation under equal, spread and radius weights.

    ``mode`` picks the data range the weights are computed over: every logged
    result (``all``), each population's results (``per-population``) or each
    query's results (``per-query``).
    """
    if not log.records:
        raise ValueError("cannot compute curves from an empty log")
    if mode not in CURVE_MODES:
        raise ValueError(f"unknown curve mode {mode!r}")

    def weights(method, rng_records):
        return weights_for_samples(samples_from_records(rng_records, s_column), method, radius_cfg)

    global_weights = {}
    if mode == "all":
        every = select_records(log.records, AllPopulations())
        global_weights = {m: weights(m, every) for m in ("equal", "spread", "radius")}

    points = []
    for pop_no in log.population_numbers():
        records = select_records(log.records, PerPopulation(pop_no))
        n_queries = max(log.queries_per_population(pop_no), len({r.query_no for r in records}))
        values = []
        for method in ("equal", "spread", "radius"):
            if mode == "all":
                pick = lambda q, recs, w=global_weights[method]: w
            elif mode == "per-population":
                pick = lambda q, recs, w=weights(method, records): w
            else:
                pick = lambda q, recs, method=method: weights(method, recs)
            values.append(_population_curve_value(records, n_queries, pick))
        points.append(CurvePoint(pop_no, *values))
    return points


def write_curves(points: Sequence[CurvePoint], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CURVE_COLUMNS)
        for p in points:
            writer.writerow([p.population_no, _fmt(p.W_equ), _fmt(p.W_dis), _fmt(p.W_rad)])


def read_curves(path: str | Path) -> list[CurvePoint]:
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.DictReader(fh))
    return [CurvePoint(int(r["population_no"]), float(r["W_equ"]), float(r["W_dis"]), float(r["W_rad"])) for r in rows]
