import random
from fractions import Fraction as F

import pytest

from _factories import random_claim, random_market
from platonic import (
    FiniteSpace,
    Filtration,
    LinearProgram,
    Partition,
    RandomVariable,
    UnpricedMarketError,
    attainability_set_check,
    build_market,
    delayed_filtration,
    enumerate_generators,
    enumerate_vertices,
    ftap_verdict,
    polar_cone_check,
    price_interval,
    superreplicate,
)
from platonic.ftap import martingale_polytope_constraints


def part(*blocks):
    return Partition(tuple(frozenset(b) for b in blocks))


@pytest.fixture
def binomial():
    space = FiniteSpace(("u", "d"), (F(1, 2), F(1, 2)))
    big = Filtration((0, 1), (part({0, 1}), part({0}, {1})))
    return build_market(space, big, {"s": [(1, 1), (2, F(1, 2))]})


@pytest.fixture
def delayed_canonical():
    space = FiniteSpace(("uu", "ud", "du", "dd"), (F(1, 4),) * 4)
    big = Filtration(
        (0, F(1, 2), 1),
        (part({0, 1, 2, 3}), part({0, 1}, {2, 3}), Partition.singletons(4)),
    )
    prices = {"s": [(1,) * 4, (2, 2, F(1, 2), F(1, 2)), (4, 1, 1, F(1, 4))]}
    return build_market(
        space, big, prices, trading_filtrations=delayed_filtration(big, F(1, 2))
    )


def dual_vertices(model, claim_len):
    gens = enumerate_generators(model)
    cols = [tuple(g.payoff.values) for g in gens]
    lp = LinearProgram.build(
        [0] * claim_len, "max",
        martingale_polytope_constraints(cols, claim_len, "martingale"),
        [(0, None)] * claim_len,
    )
    return enumerate_vertices(lp)


class TestSuperreplicate:
    def test_constant_claim_costs_its_value(self, binomial):
        hedge, dual = superreplicate(binomial, (F(5, 2), F(5, 2)))
        assert hedge.price == F(5, 2)
        assert all(l == 0 for l in hedge.lambdas) or hedge.consumption.values == (0, 0)

    def test_binomial_call(self, binomial):
        hedge, dual = superreplicate(binomial, (1, 0))
        assert hedge.price == F(1, 3)
        assert hedge.lambdas == (F(2, 3),)
        assert hedge.consumption.values == (0, 0)  # perfect hedge
        assert dual.q_values == (F(1, 3), F(2, 3))

    def test_delayed_call_matches_vertex_oracle(self, delayed_canonical):
        claim = (3, 0, 0, 0)
        hedge, dual = superreplicate(delayed_canonical, claim)
        vertices = dual_vertices(delayed_canonical, 4)
        best = max(sum(q * c for q, c in zip(v, claim)) for v in vertices)
        assert hedge.price == best == F(1, 2)

    def test_refuses_on_arbitrage(self):
        space = FiniteSpace(("u", "d"), (F(1, 2), F(1, 2)))
        big = Filtration((0, 1), (part({0, 1}), part({0}, {1})))
        model = build_market(space, big, {"s": [(1, 1), (2, 2)]})
        with pytest.raises(UnpricedMarketError):
            superreplicate(model, (1, 0))

    def test_dominates_claim_everywhere(self, delayed_canonical):
        rng = random.Random(42)
        gens = enumerate_generators(delayed_canonical)
        for _ in range(10):
            claim = random_claim(rng, 4)
            hedge, dual = superreplicate(delayed_canonical, claim)
            wealth = [
                sum(c * g.payoff.values[i] for c, g in zip(hedge.lambdas, gens))
                for i in range(4)
            ]
            assert all(
                hedge.price + w >= cv for w, cv in zip(wealth, claim.values)
            )
            assert hedge.price == sum(q * c for q, c in zip(dual.q_values, claim.values))


class TestPriceInterval:
    def test_attainable_wealth_has_degenerate_interval(self, delayed_canonical):
        gens = enumerate_generators(delayed_canonical)
        g0 = gens[0].payoff
        interval = price_interval(delayed_canonical, g0)
        assert interval.lower == interval.upper == 0
        assert interval.replication is not None
        x, lam = interval.replication
        assert x == 0
        combo = [
            sum(c * g.payoff.values[i] for c, g in zip(lam, gens)) for i in range(4)
        ]
        assert tuple(combo) == g0.values

    def test_complete_market_every_claim_attainable(self, binomial):
        rng = random.Random(1)
        for _ in range(5):
            claim = random_claim(rng, 2)
            interval = price_interval(binomial, claim)
            assert interval.lower == interval.upper
            assert interval.attained_lower and interval.attained_upper

    def test_incomplete_open_interval(self, delayed_canonical):
        claim = RandomVariable((3, 0, 0, 0))
        interval = price_interval(delayed_canonical, claim, eta=F(1, 10**6))
        assert (interval.lower, interval.upper) == (0, F(1, 2))
        assert not interval.attained_upper and not interval.attained_lower
        w = interval.upper_witness
        assert w is not None and w.null_outcomes  # optimizer kills some outcome
        assert min(w.mixture) > 0  # the mixture has full support
        assert interval.upper - w.achieved <= F(1, 10**6)
        total = sum(w.mixture)
        assert total == 1

    def test_cash_translation_and_monotonicity(self, delayed_canonical):
        rng = random.Random(2)
        for _ in range(5):
            claim = random_claim(rng, 4)
            hedge, _ = superreplicate(delayed_canonical, claim)
            shifted, _ = superreplicate(delayed_canonical, claim + 3)
            assert shifted.price == hedge.price + 3
            bigger, _ = superreplicate(delayed_canonical, claim + RandomVariable((0, 1, 0, 2)))
            assert bigger.price >= hedge.price

    def test_subreplication_symmetry(self, delayed_canonical):
        rng = random.Random(3)
        for _ in range(5):
            claim = random_claim(rng, 4)
            interval = price_interval(delayed_canonical, claim)
            hedge_minus, _ = superreplicate(delayed_canonical, -claim)
            assert hedge_minus.price == -interval.lower

    def test_smaller_filtration_never_cheapens_hedges(self, delayed_canonical):
        # the same market observed fully
        full = build_market(
            delayed_canonical.space,
            delayed_canonical.big_filtration,
            {"s": list(delayed_canonical.price_path("s"))},
        )
        rng = random.Random(4)
        for _ in range(5):
            claim = random_claim(rng, 4)
            coarse_price, _ = superreplicate(delayed_canonical, claim)
            fine_price, _ = superreplicate(full, claim)
            assert coarse_price.price >= fine_price.price

    def test_long_only_never_cheaper(self, delayed_canonical):
        rng = random.Random(5)
        for _ in range(5):
            claim = random_claim(rng, 4)
            free_hedge, _ = superreplicate(delayed_canonical, claim, "free")
            long_hedge, _ = superreplicate(delayed_canonical, claim, "long_only")
            assert long_hedge.price >= free_hedge.price


class TestPolarCone:
    def test_constant_prices_polar_is_whole_simplex(self):
        space = FiniteSpace(("a", "b", "c"), (F(1, 3),) * 3)
        big = Filtration((0, 1), (part({0, 1, 2}), Partition.singletons(3)))
        model = build_market(space, big, {"s": [(1, 1, 1), (1, 1, 1)]})
        report = polar_cone_check(model)
        assert report.match
        assert set(report.polar_vertices) == {(1, 0, 0), (0, 1, 0), (0, 0, 1)}

    def test_complete_binomial_polar_is_single_ray(self, binomial):
        report = polar_cone_check(binomial)
        assert report.match
        assert report.polar_vertices == ((F(1, 3), F(2, 3)),)

    def test_canonical_vertices_match(self, delayed_canonical):
        report = polar_cone_check(delayed_canonical, seed=11)
        assert report.match and report.polar_in_dual and report.dual_in_polar
        assert report.cone_inequality_samples_ok
        assert set(report.dual_vertices) == {
            (0, F(1, 3), F(2, 3), 0),
            (F(1, 6), F(1, 6), 0, F(2, 3)),
        }

    def test_long_only_variant(self, delayed_canonical):
        report = polar_cone_check(delayed_canonical, mode="long_only", seed=12)
        assert report.match and report.cone_inequality_samples_ok


class TestAttainability:
    def test_reachable_wealth_passes_all_tests(self, delayed_canonical):
        gen = enumerate_generators(delayed_canonical)[0]
        report = attainability_set_check(delayed_canonical, gen.payoff)
        assert report.zero_width and report.in_cone_both_ways
        assert report.zero_at_all_vertices and report.in_generator_span
        assert report.consistent and report.candidate_price == 0

    def test_cash_passes_with_price_one(self, delayed_canonical):
        report = attainability_set_check(delayed_canonical, (1, 1, 1, 1))
        assert report.consistent and report.zero_width
        assert report.candidate_price == 1

    def test_random_claims_consistent(self, delayed_canonical):
        rng = random.Random(6)
        for _ in range(10):
            report = attainability_set_check(delayed_canonical, random_claim(rng, 4))
            assert report.consistent

    def test_consistency_over_random_markets(self):
        rng = random.Random(7)
        done = 0
        while done < 8:
            model = random_market(rng, max_outcomes=6)
            if ftap_verdict(model).kind != "NO_ARBITRAGE":
                continue
            done += 1
            for _ in range(2):
                claim = random_claim(rng, model.n_outcomes)
                assert attainability_set_check(model, claim).consistent


def test_long_only_pricing_survives_free_arbitrage():
    # strictly falling price: free trading arbitrages it, long-only cannot
    space = FiniteSpace(("u", "d"), (F(1, 2), F(1, 2)))
    big = Filtration((0, 1), (part({0, 1}), part({0}, {1})))
    model = build_market(space, big, {"s": [(2, 2), (1, F(1, 2))]})
    assert ftap_verdict(model, "long_only").kind == "NO_ARBITRAGE"
    with pytest.raises(UnpricedMarketError):
        superreplicate(model, (1, 0), "free")
    hedge, dual = superreplicate(model, (1, 0), "long_only")
    assert dual.kind == "supermartingale"
    assert hedge.price == sum(q * v for q, v in zip(dual.q_values, (1, 0)))
