"""Evolutionary search-query optimization with analytically weighted additive fitness."""

from .corpus import Corpus, Document, Tokenizer, load_corpus, tokenize
from .fitness import NormalizationContext, ResultRecord
from .genetics import Gene, Population, QueryGenome, SearchPattern, load_pattern
from .runner import CurvePoint, ExperimentConfig, ResultLog, compute_curves, read_log, run_experiment, write_log
from .search import CorpusSearcher, RankedResult, SearchBackend
from .weights import (
    AllPopulations,
    CriterionSamples,
    PerPopulation,
    PerQuery,
    RadiusConfig,
    WeightVector,
    equal_weights,
    radius_weights,
    relative_spread_weights,
)

__version__ = "0.1.0"
