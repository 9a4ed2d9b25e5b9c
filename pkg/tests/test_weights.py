import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from queryevo.fitness import ResultRecord, result_fitness
from queryevo.runner import ResultLog
from queryevo.weights import (
    AllPopulations,
    CriterionSamples,
    PerPopulation,
    PerQuery,
    RadiusConfig,
    WeightVector,
    collect_samples,
    equal_weights,
    parse_range,
    radii,
    radius_weights,
    relative_spread_weights,
    relative_spreads,
    report_row,
    weights_for_range,
    weights_from_radii,
)

import oracle

TABLE_RANGES = dict(g=(0.43, 0.95), p=(0.13, 1.00), s=(0.05, 0.09))


def synthetic_log(n_pops=3, n_queries=5, n_results=20, seed=0):
    rng = np.random.default_rng(seed)
    recs = []
    for pop in range(n_pops):
        for q in range(n_queries):
            for i in range(rng.integers(1, n_results + 1)):
                g, p, s = rng.uniform(0.01, 1, 3)
                recs.append(ResultRecord(pop, q, f"d{i}", 1.0, g, 1.0, p, s * 0.1, s))
    return ResultLog(recs)


class TestWeightVector:
    def test_rejects_negative_and_bad_sum(self):
        with pytest.raises(ValueError):
            WeightVector(-0.1, 0.6, 0.5)
        with pytest.raises(ValueError):
            WeightVector(0.3, 0.3, 0.3)

    def test_equal(self):
        w = equal_weights()
        assert w.as_tuple() == pytest.approx((1 / 3,) * 3)
        assert sum(w.as_tuple()) == pytest.approx(1, abs=1e-12)
        assert result_fitness(0.1, 0.5, 0.9, w) == pytest.approx((0.1 + 0.5 + 0.9) / 3)


class TestRelativeSpread:
    def test_table_example(self):
        samples = CriterionSamples.from_ranges(**TABLE_RANGES)
        assert relative_spreads(samples) == pytest.approx((0.5474, 0.8700, 0.4444), abs=1e-4)
        w = relative_spread_weights(samples)
        assert w.as_tuple() == pytest.approx((0.294, 0.467, 0.239), abs=1e-3)
        assert sum(w.as_tuple()) == pytest.approx(1, abs=1e-9)

    def test_all_constant(self):
        w = relative_spread_weights(CriterionSamples([0.4, 0.4], [1, 1], [0.2, 0.2]))
        assert w == equal_weights()

    def test_one_constant(self):
        w = relative_spread_weights(CriterionSamples([0.4, 0.4], [0.5, 1], [1, 2]))
        assert w.as_tuple() == pytest.approx((0, 0.5, 0.5))

    def test_nonpositive_maximum(self):
        with pytest.raises(ValueError, match="positive criterion maxima"):
            relative_spread_weights(CriterionSamples([0, 0], [0.5, 1], [1, 2]))

    @given(
        arrays(float, 6, elements=st.floats(0.01, 1)),
        st.floats(0.1, 50),
        st.permutations(range(6)),
    )
    def test_scale_and_order_invariance(self, col, alpha, perm):
        g, p, s = col, col[::-1].copy(), np.sqrt(col)
        base = relative_spread_weights(CriterionSamples(g, p, s)).as_tuple()
        scaled = relative_spread_weights(CriterionSamples(g * alpha, p, s)).as_tuple()
        shuffled = relative_spread_weights(CriterionSamples(g[list(perm)], p[list(perm)], s[list(perm)])).as_tuple()
        assert scaled == pytest.approx(base, abs=1e-9)
        assert shuffled == base


class TestRadius:
    R_STAR = (0.4719, 0.3729, 0.4828)

    def test_direct_example(self):
        w = weights_from_radii(self.R_STAR, "direct")
        assert w.as_tuple() == pytest.approx((0.355, 0.281, 0.364), abs=1e-3)

    def test_inverse_example(self):
        # 1/R* = (2.1191, 2.6817, 2.0713), sum 6.8720
        w = weights_from_radii(self.R_STAR, "inverse")
        assert w.as_tuple() == pytest.approx((0.308, 0.390, 0.301), abs=1e-3)

    def test_equal_radii(self):
        for variant in ("direct", "inverse"):
            assert weights_from_radii((0.7,) * 3, variant).as_tuple() == pytest.approx((1 / 3,) * 3)

    def test_constrained_maximum(self):
        # g: min 0.5, threshold 0.5*1.2 = 0.6 -> 0.58 qualifies, 0.7 does not
        samples = CriterionSamples([0.5, 0.58, 0.7], [1.0, 2.0, 3.0], [0.2, 0.2, 0.2])
        assert radii(samples, RadiusConfig(0.2, 0.5, 0.1)) == pytest.approx((0.58, 1.0, 0.2))

    def test_zero_minimum_clamped_with_warning(self):
        samples = CriterionSamples([0.0, 0.5], [1.0, 2.0], [0.2, 0.3])
        with pytest.warns(RuntimeWarning, match="zero minimum"):
            r = radii(samples, RadiusConfig())
        assert r[0] == pytest.approx(1e-6)

    def test_invalid_config(self):
        with pytest.raises(ValueError):
            RadiusConfig(0, 0.3, 0.3)
        with pytest.raises(ValueError):
            RadiusConfig(variant="sideways")

    @given(
        arrays(float, 8, elements=st.floats(0.01, 1)),
        st.floats(0.01, 2),
        st.floats(0, 2),
    )
    def test_larger_threshold_never_shrinks_radius(self, col, xi, extra):
        samples = CriterionSamples(col, col, col)
        small = radii(samples, RadiusConfig(xi, xi, xi))
        big = radii(samples, RadiusConfig(xi + extra, xi, xi))
        assert big[0] >= small[0]

    @given(arrays(float, (3, 7), elements=st.floats(0.01, 1)), st.permutations(range(7)))
    def test_argmax_relation_and_order_independence(self, data, perm):
        samples = CriterionSamples(*data)
        for variant in ("direct", "inverse"):
            cfg = RadiusConfig(variant=variant)
            r = radii(samples, cfg)
            w = radius_weights(samples, cfg).as_tuple()
            target = max(r) if variant == "direct" else min(r)
            assert r[int(np.argmax(w))] == target
            shuffled = CriterionSamples(*(row[list(perm)] for row in data))
            assert radius_weights(shuffled, cfg) == radius_weights(samples, cfg)


class TestRanges:
    def test_parse(self):
        assert parse_range("query:145:559") == PerQuery(145, 559)
        assert parse_range("population:145") == PerPopulation(145)
        assert parse_range("all") == AllPopulations()
        assert str(parse_range("population:3")) == "population:3"
        with pytest.raises(ValueError):
            parse_range("generation:3")

    def test_per_query_length(self):
        log = synthetic_log(n_results=20)
        n = sum(1 for r in log.records if (r.population_no, r.query_no) == (1, 2))
        assert len(collect_samples(log, PerQuery(1, 2)).g) == n

    def test_per_population_length(self):
        log = synthetic_log()
        assert len(collect_samples(log, PerPopulation(0)).g) <= 100

    def test_all_is_concatenation(self):
        log = synthetic_log()
        whole = collect_samples(log, AllPopulations(), "normalized")
        parts = [collect_samples(log, PerPopulation(p), "normalized") for p in range(3)]
        for k in range(3):
            np.testing.assert_array_equal(whole.columns()[k], np.concatenate([x.columns()[k] for x in parts]))

    def test_s_column_selector(self):
        log = synthetic_log()
        raw = collect_samples(log, AllPopulations(), "raw").s
        norm = collect_samples(log, AllPopulations(), "normalized").s
        np.testing.assert_allclose(raw * 10, norm)

    def test_empty_range(self):
        with pytest.raises(ValueError, match="empty data range"):
            collect_samples(synthetic_log(), PerPopulation(99))


class TestDispatch:
    def test_equal_any_range(self):
        log = synthetic_log()
        for rng in (PerQuery(0, 0), PerPopulation(1), AllPopulations()):
            assert weights_for_range(log, rng, "equal") == equal_weights()

    def test_spread_on_table_extremes(self):
        g, p, s = TABLE_RANGES["g"], TABLE_RANGES["p"], TABLE_RANGES["s"]
        recs = [ResultRecord(145, 559, f"d{i}", 0, g[i], 0, p[i], s[i], 0) for i in range(2)]
        w = weights_for_range(ResultLog(recs), PerPopulation(145), "spread")
        assert w.as_tuple() == pytest.approx((0.294, 0.467, 0.239), abs=1e-3)

    def test_replay(self):
        log = synthetic_log(seed=4)
        for method in ("equal", "spread", "radius"):
            a = weights_for_range(log, PerPopulation(2), method)
            b = weights_for_range(synthetic_log(seed=4), PerPopulation(2), method)
            assert a == b

    def test_matches_oracle(self):
        log = synthetic_log(seed=9)
        s = collect_samples(log, AllPopulations())
        cols = [list(c) for c in s.columns()]
        assert weights_for_range(log, AllPopulations(), "spread").as_tuple() == pytest.approx(oracle.spread_weights(*cols), abs=1e-12)
        for v in ("direct", "inverse"):
            got = weights_for_range(log, AllPopulations(), "radius", RadiusConfig(variant=v)).as_tuple()
            assert got == pytest.approx(oracle.radius_weights(*cols, variant=v), abs=1e-12)

    def test_report_rows(self):
        w = WeightVector(0.5, 0.25, 0.25)
        assert report_row("spread", PerPopulation(145), w) == "spread,,population:145,0.5,0.25,0.25,,,"
        row = report_row("radius", AllPopulations(), w, RadiusConfig(variant="inverse"))
        assert row == "radius,inverse,all,0.5,0.25,0.25,0.33,0.33,0.34"


samples_strategy = st.integers(1, 30).flatmap(
    lambda n: st.tuples(*(arrays(float, n, elements=st.floats(0, 1)) for _ in range(3)))
)


@settings(max_examples=1000, deadline=None)
@given(samples_strategy, st.sampled_from(["direct", "inverse"]), st.floats(0.01, 1))
def test_weights_are_a_distribution(cols, variant, xi):
    samples = CriterionSamples(*cols)
    results = [equal_weights()]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        results.append(radius_weights(samples, RadiusConfig(xi, xi, xi, variant)))
    if all(c.max() > 0 for c in cols):
        results.append(relative_spread_weights(samples))
    for w in results:
        t = w.as_tuple()
        assert min(t) >= 0
        assert abs(sum(t) - 1) <= 1e-9
