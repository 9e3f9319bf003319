"""Acceptance criteria, one test per criterion, each printing a pass/fail line.

Everything runs in exact rational arithmetic unless a criterion says
otherwise; expected values are either computed by an independent oracle
inside the test or asserted as exact identities.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines.
"""
import random
import time
from fractions import Fraction as F

from _factories import random_claim, random_market, resample_reference
from platonic import (
    FloatModeError,
    LinearProgram,
    OptionGridSpec,
    RandomVariable,
    attainability_set_check,
    conditional_expectation,
    embed_semistatic,
    enumerate_generators,
    enumerate_vertices,
    find_measure,
    ftap_verdict,
    polar_cone_check,
    posterior_process,
    semistatic_direct_price,
    superreplicate,
)
from platonic.bayes import BayesSetup, free_lunch_sweep
from platonic.ftap import martingale_polytope_constraints
from platonic.market import as_float_model
from platonic.scenario import parse_scenario


def _report(number: int, label: str, ok: bool, detail: str) -> None:
    print(f"[acceptance] criterion {number} ({label}): {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, f"criterion {number} ({label}): {detail}"


def _verdicts(suite, mode: str):
    key = "verdicts" if mode == "free" else "long_verdicts"
    cache = suite[key]
    if not cache:
        for idx, model in enumerate(suite["instances"]):
            cache[idx] = ftap_verdict(model, mode)
    return cache


def _na_indices(suite):
    verdicts = _verdicts(suite, "free")
    return [i for i, v in verdicts.items() if v.kind == "NO_ARBITRAGE"]


def test_criterion_1_ftap_roundtrip(suite):
    started = time.perf_counter()
    verdicts = _verdicts(suite, "free")
    elapsed = time.perf_counter() - started
    counts = {"ARBITRAGE": 0, "NO_ARBITRAGE": 0}
    for verdict in verdicts.values():
        # the verdict constructor already enforces exclusivity; recheck anyway
        assert (verdict.arbitrage is None) != (verdict.measure is None)
        if verdict.measure is not None:
            assert verdict.measure.min_mass > 0
            assert all(v == 0 for v in verdict.measure.verification)
        counts[verdict.kind] += 1
    ok = len(verdicts) >= 200 and elapsed <= 60
    _report(
        1, "FTAP round-trip", ok,
        f"{len(verdicts)} instances ({counts['ARBITRAGE']} arbitrage / "
        f"{counts['NO_ARBITRAGE']} none) in {elapsed:.1f}s",
    )


def test_criterion_2_long_only_ftap(suite):
    verdicts = _verdicts(suite, "long_only")
    for verdict in verdicts.values():
        assert (verdict.arbitrage is None) != (verdict.measure is None)
        if verdict.measure is not None:
            assert verdict.measure.kind == "supermartingale"
            assert all(v <= 0 for v in verdict.measure.verification)
    _report(2, "long-only FTAP", len(verdicts) >= 200, f"{len(verdicts)} instances, exclusivity holds")


def test_criterion_3_strong_duality(suite):
    na = _na_indices(suite)
    exact_pairs = 0
    float_pairs = 0
    worst_float_gap = 0.0
    for idx in na:
        model = suite["instances"][idx]
        fmodel = as_float_model(model)
        for claim in suite["claims"][idx]:
            hedge, dual = superreplicate(model, claim)
            dual_value = sum(q * v for q, v in zip(dual.q_values, claim.values))
            assert hedge.price == dual_value  # exact rational equality
            exact_pairs += 1
            fclaim = [float(v) for v in claim.values]
            try:
                fhedge, fdual = superreplicate(fmodel, fclaim, tol=1e-9)
            except FloatModeError:  # refusing is allowed, a wrong gap is not
                continue
            gap = abs(fhedge.price - sum(q * v for q, v in zip(fdual.q_values, fclaim)))
            worst_float_gap = max(worst_float_gap, gap)
            assert gap <= 1e-8
            float_pairs += 1
    ok = exact_pairs >= 5 * len(na) and float_pairs >= 0.9 * exact_pairs
    _report(
        3, "strong duality", ok,
        f"{exact_pairs} exact pairs over {len(na)} markets; "
        f"{float_pairs} float pairs, worst gap {worst_float_gap:.2e}",
    )


def test_criterion_4_vertex_oracle(suite):
    from platonic import solve

    verdicts = _verdicts(suite, "free")
    checked = 0
    empty = 0
    for idx, model in enumerate(suite["instances"]):
        n = model.n_outcomes
        if n > 12:
            continue
        cols = [tuple(g.payoff.values) for g in enumerate_generators(model)]
        rows = martingale_polytope_constraints(cols, n, "martingale")
        vertices = enumerate_vertices(
            LinearProgram.build([0] * n, "max", rows, [(0, None)] * n)
        )
        if verdicts[idx].kind == "NO_ARBITRAGE":
            assert vertices, "martingale polytope of a no-arbitrage market is nonempty"
        for claim in suite["claims"][idx][:2]:
            sol = solve(LinearProgram.build(
                list(claim.values), "max", rows, [(0, None)] * n
            ))
            if sol.status == "infeasible":
                assert not vertices
                empty += 1
                continue
            oracle = max(sum(q * v for q, v in zip(vx, claim.values)) for vx in vertices)
            assert sol.objective == oracle
            checked += 1
    _report(
        4, "vertex oracle", checked >= 200,
        f"{checked} LP-vs-enumeration matches ({empty} empty polytopes agreed)",
    )


def test_criterion_5_polar_cone_identity():
    rng = random.Random(515)
    done = 0
    attempts = 0
    while done < 20 and attempts < 400:
        attempts += 1
        model = random_market(rng, max_outcomes=6, na_bias=0.8)
        if ftap_verdict(model).kind != "NO_ARBITRAGE":
            continue
        report = polar_cone_check(model, seed=done)
        assert report.match and report.polar_in_dual and report.dual_in_polar
        assert report.cone_inequality_samples_ok
        done += 1
    _report(5, "polar-cone identity", done >= 20, f"{done} instances, double inclusion exact")


def test_criterion_6_attainability_trichotomy(suite):
    rng = random.Random(616)
    na = _na_indices(suite)
    pairs = 0
    degenerate = 0
    for idx in na:
        model = suite["instances"][idx]
        n = model.n_outcomes
        cols = [g.payoff.values for g in enumerate_generators(model)]
        claims = list(suite["claims"][idx][:2])
        # one replicable claim built from the generators plus cash
        lam = [F(rng.randint(-2, 2)) for _ in cols]
        reachable = [
            sum(l * col[i] for l, col in zip(lam, cols)) + F(rng.randint(-2, 2))
            for i in range(n)
        ]
        claims.append(RandomVariable(tuple(reachable)))
        for claim in claims:
            report = attainability_set_check(model, claim)
            assert report.consistent
            if report.zero_width:
                degenerate += 1
            pairs += 1
        if pairs >= 120:
            break
    ok = pairs >= 100 and degenerate >= 10
    _report(
        6, "attainability trichotomy", ok,
        f"{pairs} (instance, claim) pairs agree three ways ({degenerate} replicable)",
    )


def test_criterion_7_semistatic_embedding():
    rng = random.Random(717)
    done = 0
    attempts = 0
    while done < 20 and attempts < 300:
        attempts += 1
        model = random_market(rng, max_outcomes=6)
        if frozenset(model.assets) not in model.admissible_sets:
            continue
        cert = find_measure(model)
        if cert is None:
            continue
        n = model.n_outcomes
        grid = model.times
        q = cert.q_values
        k_times = rng.randint(1, len(grid))
        opt_times = tuple(sorted(rng.sample(grid, k_times)))
        payoff = random_claim(rng, n)
        quotes = tuple(
            payoff if s == grid[-1]
            else conditional_expectation(payoff, model.big_filtration.at(s), q)
            for s in opt_times
        )
        spec = OptionGridSpec(f"opt{done}", payoff, opt_times, quotes)
        embedded = embed_semistatic(model, [spec])
        assert ftap_verdict(embedded).kind == "NO_ARBITRAGE"
        claim = random_claim(rng, n)
        hedge, _ = superreplicate(embedded, claim)
        direct = semistatic_direct_price(model, [spec], claim)
        assert hedge.price == direct  # exact equality of the two formulations
        done += 1
    _report(7, "semi-static embedding", done >= 20, f"{done} option-grid scenarios, prices equal")


def test_criterion_8_free_lunch_truncations():
    rows = free_lunch_sweep(10)
    gaps = [row["gap"] for row in rows]
    all_na = all(row["verdict"] == "NO_ARBITRAGE" for row in rows)
    decreasing = all(a > b for a, b in zip(gaps, gaps[1:]))
    # frozen golden values of the gap sequence (2 - 2^-n) * 2^-n
    golden = [F(2 ** (n + 1) - 1, 4 ** n) for n in range(1, 11)]
    ok = all_na and decreasing and gaps == golden and gaps[9] < gaps[0] / 4
    _report(
        8, "free-lunch truncations", ok,
        f"gaps {gaps[0]} -> {gaps[9]}, all NO_ARBITRAGE, d10 < d1/4",
    )


def test_criterion_9_posterior_martingale(scenario_path):
    scenario = parse_scenario(scenario_path("two_theta"))
    raw = scenario.raw["bayes"]
    from platonic import FiniteSpace, Filtration, Partition

    paths = FiniteSpace(tuple(raw["paths"]["outcomes"]), tuple(F(p) for p in raw["paths"]["probs"]))
    index = {o: i for i, o in enumerate(paths.outcomes)}
    filt = Filtration(
        tuple(F(t) for t in raw["grid"]),
        tuple(
            Partition(tuple(frozenset(index[o] for o in block) for block in part))
            for part in raw["path_filtration"]
        ),
    )
    setup = BayesSetup(
        paths, filt, tuple(raw["thetas"]),
        tuple(F(p) for p in raw["prior"]),
        tuple(tuple(F(v) for v in raw["models"][t]) for t in raw["thetas"]),
    )
    model = scenario.model
    obs_filt = model.trading_filtrations[0]
    checked = 0
    for theta in setup.thetas:
        process = posterior_process(setup, model, theta)
        prior = setup.prior[setup.thetas.index(theta)]
        assert process[0].values == (prior,) * model.space.size
        for i, t in enumerate(model.times):
            for later in process[i + 1:]:
                pulled = conditional_expectation(later, obs_filt.at(t), model.space.probs)
                assert pulled.values == process[i].values  # exact tower identity
                checked += 1
    _report(9, "posterior martingale", checked >= 6, f"{checked} exact tower identities per theta")


def test_criterion_10_equivalence_class_invariance(suite):
    rng = random.Random(1010)
    verdicts = _verdicts(suite, "free")
    instances = suite["instances"][:10]
    resamples = 0
    for idx, model in enumerate(instances):
        base_verdict = verdicts[idx].kind
        base_price = None
        if base_verdict == "NO_ARBITRAGE":
            hedge, _ = superreplicate(model, suite["claims"][idx][0])
            base_price = hedge.price
        for _ in range(5):
            other = resample_reference(rng, model)
            assert ftap_verdict(other).kind == base_verdict
            if base_price is not None:
                hedge, _ = superreplicate(other, suite["claims"][idx][0])
                assert hedge.price == base_price
            resamples += 1
    _report(
        10, "equivalence-class invariance", resamples >= 50,
        f"{resamples} resamples across {len(instances)} instances, verdicts and prices fixed",
    )
