"""Analytical weight coefficients for the additive fitness criterion.

Three ways to pick ``(w_g, w_p, w_s)``:

* equal weights;
* relative spread: each criterion weighted by ``1 - min/max`` of its samples;
* radius: each criterion's largest observed value whose relative deviation
  from the criterion minimum stays within a threshold ``xi``; weights are
  inversely (``inverse``) or directly (``direct``) proportional to it.
"""

from __future__ import annotations

import math
import re
import warnings
from dataclasses import dataclass
from typing import Iterable, Literal, Sequence, Union

import numpy as np

SUM_TOL = 1e-9
ZERO_MIN_CLAMP = 1e-6

Variant = Literal["inverse", "direct"]
SColumn = Literal["raw", "normalized"]


@dataclass(frozen=True)
class WeightVector:
    w_g: float
    w_p: float
    w_s: float

    def __post_init__(self):
        values = (self.w_g, self.w_p, self.w_s)
        if any(not math.isfinite(v) or v < 0 for v in values):
            raise ValueError(f"weights must be finite and nonnegative: {values}")
        if abs(math.fsum(values) - 1.0) > SUM_TOL:
            raise ValueError(f"weights must sum to 1: {values}")

    @classmethod
    def normalized(cls, raw: Sequence[float]) -> WeightVector:
        total = math.fsum(raw)
        return cls(*(v / total for v in raw))

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.w_g, self.w_p, self.w_s)


@dataclass(frozen=True)
class CriterionSamples:
    g: np.ndarray
    p: np.ndarray
    s: np.ndarray

    def __post_init__(self):
        arrays = [np.asarray(a, dtype=float).ravel() for a in (self.g, self.p, self.s)]
        if len({len(a) for a in arrays}) != 1 or len(arrays[0]) == 0:
            raise ValueError("criterion samples must be non-empty and of equal length")
        if not all(np.all(np.isfinite(a)) for a in arrays):
            raise ValueError("criterion samples must be finite")
        for name, a in zip("gps", arrays):
            object.__setattr__(self, name, a)

    def columns(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return (self.g, self.p, self.s)

    @classmethod
    def from_ranges(cls, g: tuple[float, float], p: tuple[float, float], s: tuple[float, float]):
        """Two-point samples carrying only the given (min, max) of each criterion."""
        return cls(np.array(g), np.array(p), np.array(s))


@dataclass(frozen=True)
class PerQuery:
    population_no: int
    query_no: int

    def __str__(self) -> str:
        return f"query:{self.population_no}:{self.query_no}"


@dataclass(frozen=True)
class PerPopulation:
    population_no: int

    def __str__(self) -> str:
        return f"population:{self.population_no}"


@dataclass(frozen=True)
class AllPopulations:
    def __str__(self) -> str:
        return "all"


DataRange = Union[PerQuery, PerPopulation, AllPopulations]

_RANGE_RE = re.compile(r"^(?:query:(-?\d+):(-?\d+)|population:(-?\d+)|all)$")


def parse_range(text: str) -> DataRange:
    """Parse ``query:<pop>:<query>``, ``population:<pop>`` or ``all``."""
    m = _RANGE_RE.match(text.strip())
    if not m:
        raise ValueError(f"bad data range {text!r}; use query:P:Q, population:P or all")
    if m.group(1) is not None:
        return PerQuery(int(m.group(1)), int(m.group(2)))
    if m.group(3) is not None:
        return PerPopulation(int(m.group(3)))
    return AllPopulations()


@dataclass(frozen=True)
class RadiusConfig:
    xi_g: float = 0.33
    xi_p: float = 0.33
    xi_s: float = 0.34
    variant: Variant = "direct"

    def __post_init__(self):
        if min(self.xi_g, self.xi_p, self.xi_s) <= 0:
            raise ValueError("radius thresholds xi must be positive")
        if self.variant not in ("inverse", "direct"):
            raise ValueError(f"unknown radius variant {self.variant!r}")

    @property
    def xi(self) -> tuple[float, float, float]:
        return (self.xi_g, self.xi_p, self.xi_s)


def equal_weights() -> WeightVector:
    return WeightVector(1 / 3, 1 / 3, 1 / 3)


def relative_spreads(samples: CriterionSamples) -> tuple[float, float, float]:
    spreads = []
    for col in samples.columns():
        lo, hi = float(col.min()), float(col.max())
        if hi <= 0:
            raise ValueError("method 1 requires positive criterion maxima")
        spreads.append(1.0 - lo / hi)
    return tuple(spreads)


def relative_spread_weights(samples: CriterionSamples) -> WeightVector:
    delta = relative_spreads(samples)
    if all(d == 0.0 for d in delta):
        return equal_weights()
    return WeightVector.normalized(delta)


def radii(samples: CriterionSamples, cfg: RadiusConfig) -> tuple[float, float, float]:
    """Largest observed value per criterion whose deviation from the minimum is within xi.

    A zero minimum is clamped to ``ZERO_MIN_CLAMP`` with a RuntimeWarning; the
    clamped minimum itself always qualifies.
    """
    out = []
    for name, col, xi in zip("gps", samples.columns(), cfg.xi):
        lo = float(col.min())
        if lo == 0.0:
            warnings.warn(f"criterion {name} has zero minimum; clamped to {ZERO_MIN_CLAMP:g}", RuntimeWarning, stacklevel=2)
            lo = ZERO_MIN_CLAMP
        beta = (col - lo) / lo
        inside = col[beta <= xi]
        out.append(max(lo, float(inside.max())) if inside.size else lo)
    return tuple(out)


def weights_from_radii(r: Sequence[float], variant: Variant = "direct") -> WeightVector:
    if len(r) != 3 or any(v <= 0 for v in r):
        raise ValueError(f"radii must be three positive values, got {tuple(r)}")
    if variant == "inverse":
        # scaled by the smallest radius so tiny radii cannot overflow to inf
        smallest = min(r)
        return WeightVector.normalized([smallest / v for v in r])
    if variant == "direct":
        return WeightVector.normalized(list(r))
    raise ValueError(f"unknown radius variant {variant!r}")


def radius_weights(samples: CriterionSamples, cfg: RadiusConfig = RadiusConfig()) -> WeightVector:
    return weights_from_radii(radii(samples, cfg), cfg.variant)


def select_records(records: Iterable, rng: DataRange) -> list:
    if isinstance(rng, PerQuery):
        keep = lambda r: r.population_no == rng.population_no and r.query_no == rng.query_no
    elif isinstance(rng, PerPopulation):
        keep = lambda r: r.population_no == rng.population_no
    elif isinstance(rng, AllPopulations):
        keep = lambda r: True
    else:
        raise TypeError(f"not a data range: {rng!r}")
    return [r for r in records if keep(r)]


def samples_from_records(records: Sequence, s_column: SColumn = "raw") -> CriterionSamples:
    if not records:
        raise ValueError("empty data range")
    if s_column not in ("raw", "normalized"):
        raise ValueError(f"s_column must be raw or normalized, got {s_column!r}")
    s_attr = "s_raw" if s_column == "raw" else "s"
    return CriterionSamples(
        np.array([r.g for r in records]),
        np.array([r.p for r in records]),
        np.array([getattr(r, s_attr) for r in records]),
    )


def collect_samples(log, rng: DataRange, s_column: SColumn = "raw") -> CriterionSamples:
    """The (g, p, s) columns of the log rows inside ``rng``."""
    records = log.records if hasattr(log, "records") else log
    return samples_from_records(select_records(records, rng), s_column)


Method = Literal["equal", "spread", "radius"]


def weights_for_samples(
    samples: CriterionSamples, method: Method, cfg: RadiusConfig = RadiusConfig()
) -> WeightVector:
    if method == "equal":
        return equal_weights()
    if method == "spread":
        return relative_spread_weights(samples)
    if method == "radius":
        return radius_weights(samples, cfg)
    raise ValueError(f"unknown weight method {method!r}")


def weights_for_range(
    log,
    rng: DataRange,
    method: Method,
    cfg: RadiusConfig = RadiusConfig(),
    s_column: SColumn = "raw",
) -> WeightVector:
    samples = collect_samples(log, rng, s_column)
    return weights_for_samples(samples, method, cfg)


REPORT_HEADER = "method,variant,range,w_g,w_p,w_s,xi_g,xi_p,xi_s"


def report_row(method: Method, rng: DataRange, w: WeightVector, cfg: RadiusConfig | None = None) -> str:
    """One weight-report line; variant and xi are filled only for the radius method."""
    if method == "radius":
        cfg = cfg or RadiusConfig()
        extra = [cfg.variant, str(rng), *map(repr, w.as_tuple()), *map(repr, cfg.xi)]
    else:
        extra = ["", str(rng), *map(repr, w.as_tuple()), "", "", ""]
    return ",".join([method, *extra])
