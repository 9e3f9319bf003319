"""Superreplication by linear-programming duality.

The cheapest dominating hedge of a claim equals the largest expectation of the
claim over the polytope of measures under which every admissible projection of
prices is a (super)martingale; in exact mode the two optimal values coincide
as rational numbers. Price intervals, the polar-cone identity and the
attainability trichotomy are verified with the same machinery plus a
brute-force vertex oracle on small instances.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from . import _linalg
from .ftap import MeasureCertificate, find_measure, martingale_polytope_constraints
from .lpsolve import (
    EQ,
    GE,
    INFEASIBLE,
    LE,
    OPTIMAL,
    DimensionGuardError,
    LinearProgram,
    enumerate_vertices,
    solve,
)
from .market import MarketModel, generator_matrix, validate
from .numeric import Num, all_exact, pick_tol
from .probspace import RandomVariable, as_random_variable


class UnpricedMarketError(RuntimeError):
    """Superreplication requested in a market that admits arbitrage."""


@dataclass(frozen=True)
class HedgeCertificate:
    """Cheapest dominating position: price plus generator coefficients.

    ``price + wealth(lambdas) = claim + consumption`` outcome-wise with
    nonnegative consumption; the residual after subtracting consumption is
    identically zero, and consumption vanishes wherever the dual optimizer
    puts mass (complementary slackness).
    """

    price: Num
    lambdas: tuple[Num, ...]
    consumption: RandomVariable
    claim: RandomVariable
    residual: RandomVariable


@dataclass(frozen=True)
class BoundWitness:
    """Why an un-attained bound is still approachable by full-support measures."""

    optimizer: tuple[Num, ...]
    null_outcomes: tuple[int, ...]
    mixture: tuple[Num, ...]
    eta: Num
    achieved: Num


@dataclass(frozen=True)
class PriceInterval:
    """Dual expectations of a claim: [lower, upper] with attainment flags.

    Zero width means the claim is replicable; ``replication`` then holds the
    exact (price, coefficients) pair. Otherwise neither bound is attained by a
    full-support measure and the witnesses exhibit mixtures coming within
    ``eta`` of the bounds.
    """

    lower: Num
    upper: Num
    attained_lower: bool
    attained_upper: bool
    replication: tuple[Num, tuple[Num, ...]] | None
    lower_witness: BoundWitness | None
    upper_witness: BoundWitness | None

    @property
    def width(self) -> Num:
        return self.upper - self.lower


def _context(model: MarketModel, claim: RandomVariable, tol: Num | None):
    values = model.all_values() + list(claim.values)
    eff = pick_tol(values, tol)
    lp_mode = "exact" if all_exact(values) and eff == 0 else "float"
    return lp_mode, eff


def _measure_or_refuse(model: MarketModel, kind: str, tol: Num | None) -> MeasureCertificate:
    cert = find_measure(model, kind, tol)
    if cert is None:
        raise UnpricedMarketError(
            "the market admits arbitrage; superreplication prices are not defined"
        )
    return cert


def superreplicate(
    model: MarketModel,
    claim: RandomVariable | Sequence[Num],
    mode: str = "free",
    tol: Num | None = None,
) -> tuple[HedgeCertificate, MeasureCertificate]:
    """Cheapest dominating hedge and the dual measure certifying its price.

    Primal: minimize x such that x plus some reachable wealth dominates the
    claim everywhere. Dual: maximize the claim's expectation over the measure
    polytope. Exact mode returns equal objective values and checks
    complementary slackness between the two solutions.
    """
    claim = as_random_variable(claim)
    kind = "martingale" if mode == "free" else "supermartingale"
    _measure_or_refuse(model, kind, tol)
    lp_mode, eff_tol = _context(model, claim, tol)
    gens, cols = generator_matrix(model, mode)
    n = model.n_outcomes
    k = len(cols)
    if len(claim) != n:
        raise ValueError("claim lives on a different space")

    lam_bounds = (0, None) if mode == "long_only" else (None, None)
    primal = LinearProgram.build(
        objective=[1] + [0] * k,
        sense="min",
        constraints=[
            ([1] + [col[w] for col in cols], GE, claim[w]) for w in range(n)
        ],
        bounds=[(None, None)] + [lam_bounds] * k,
    )
    psol = solve(primal, lp_mode, float(eff_tol) if eff_tol else 1e-9)
    if psol.status != OPTIMAL:  # pragma: no cover - dual feasibility makes it bounded
        raise RuntimeError(f"superreplication primal ended with status {psol.status}")
    price = psol.objective
    lambdas = tuple(psol.x[1:])
    wealth = [sum(c * col[w] for c, col in zip(lambdas, cols)) for w in range(n)]
    consumption = RandomVariable(tuple(price + wv - cv for wv, cv in zip(wealth, claim)))

    dual = LinearProgram.build(
        objective=list(claim.values),
        sense="max",
        constraints=martingale_polytope_constraints(cols, n, kind),
        bounds=[(0, None)] * n,
    )
    dsol = solve(dual, lp_mode, float(eff_tol) if eff_tol else 1e-9)
    if dsol.status != OPTIMAL:  # pragma: no cover - polytope nonempty and bounded
        raise RuntimeError(f"superreplication dual ended with status {dsol.status}")
    gap = price - dsol.objective
    if abs(gap) > eff_tol * (1 + abs(price)):
        raise RuntimeError(f"duality gap {gap} between hedge price and dual value")
    q = tuple(dsol.x)
    scale = max((abs(v) for v in claim.values), default=1)
    for qe, ce in zip(q, consumption):
        if qe > eff_tol and abs(ce) > eff_tol * (1 + scale):
            raise RuntimeError("complementary slackness fails between hedge and dual")
    verification = tuple(sum(qi * ci for qi, ci in zip(q, col)) for col in cols)
    dual_cert = MeasureCertificate(q, kind, min(q), verification)
    hedge = HedgeCertificate(
        price=price,
        lambdas=lambdas,
        consumption=consumption,
        claim=claim,
        residual=RandomVariable.constant(n, 0),
    )
    return hedge, dual_cert


def _bound_lp(cols, n, kind, claim, sense):
    return LinearProgram.build(
        objective=list(claim.values),
        sense=sense,
        constraints=martingale_polytope_constraints(cols, n, kind),
        bounds=[(0, None)] * n,
    )


def _attained_by_full_support(cols, n, kind, claim, bound, lp_mode, eff_tol) -> tuple[bool, Num]:
    """Maximize the minimum mass over optimizers of the bound."""
    constraints = [(c + [0], rel, rhs) for c, rel, rhs in martingale_polytope_constraints(cols, n, kind)]
    constraints.append((list(claim.values) + [0], EQ, bound))
    for w in range(n):
        row = [0] * (n + 1)
        row[w] = 1
        row[n] = -1
        constraints.append((row, GE, 0))
    lp = LinearProgram.build(
        objective=[0] * n + [1],
        sense="max",
        constraints=constraints,
        bounds=[(0, None)] * (n + 1),
    )
    sol = solve(lp, lp_mode, float(eff_tol) if eff_tol else 1e-9)
    if sol.status != OPTIMAL:  # pragma: no cover
        raise RuntimeError("attainment probe failed")
    return sol.objective > eff_tol, sol.objective


def _mixing_witness(q_star, base_cert, claim, bound, eta) -> BoundWitness:
    """Full-support mixture of the optimizer with a full-support feasible
    measure, landing within eta of the bound."""
    base = base_cert.q_values
    base_value = sum(q * c for q, c in zip(base, claim.values))
    gap = abs(bound - base_value)
    alpha = 1 if gap == 0 else min(1, Fraction(eta) / gap if isinstance(gap, Fraction) else eta / gap)
    mix = tuple((1 - alpha) * qs + alpha * qb for qs, qb in zip(q_star, base))
    achieved = sum(q * c for q, c in zip(mix, claim.values))
    nulls = tuple(i for i, q in enumerate(q_star) if q == 0)
    return BoundWitness(tuple(q_star), nulls, mix, eta, achieved)


def price_interval(
    model: MarketModel,
    claim: RandomVariable | Sequence[Num],
    eta: Num = Fraction(1, 10**6),
    tol: Num | None = None,
) -> PriceInterval:
    """Dual price bounds of a claim with the attainability dichotomy resolved.

    Zero width: the claim is replicable and the exact replication is returned.
    Positive width: the bounds are not attained by any full-support measure
    (verified, not assumed) yet are approachable within ``eta`` by mixing.
    """
    claim = as_random_variable(claim)
    base_cert = _measure_or_refuse(model, "martingale", tol)
    lp_mode, eff_tol = _context(model, claim, tol)
    _gens, cols = generator_matrix(model, "free")
    n = model.n_outcomes

    up = solve(_bound_lp(cols, n, "martingale", claim, "max"), lp_mode, float(eff_tol) if eff_tol else 1e-9)
    lo = solve(_bound_lp(cols, n, "martingale", claim, "min"), lp_mode, float(eff_tol) if eff_tol else 1e-9)
    if up.status != OPTIMAL or lo.status != OPTIMAL:  # pragma: no cover
        raise RuntimeError("price interval LPs did not solve")
    upper, lower = up.objective, lo.objective

    if abs(upper - lower) <= eff_tol * (1 + abs(upper)):
        coeffs = _linalg.column_span_solve([list(c) for c in cols], [v - lower for v in claim.values], eff_tol)
        if coeffs is None:  # pragma: no cover - zero width forces replicability
            raise RuntimeError("zero-width interval without an exact replication")
        return PriceInterval(lower, upper, True, True, (lower, tuple(coeffs)), None, None)

    att_up, _ = _attained_by_full_support(cols, n, "martingale", claim, upper, lp_mode, eff_tol)
    att_lo, _ = _attained_by_full_support(cols, n, "martingale", claim, lower, lp_mode, eff_tol)
    up_witness = None if att_up else _mixing_witness(tuple(up.x), base_cert, claim, upper, eta)
    lo_witness = None if att_lo else _mixing_witness(tuple(lo.x), base_cert, claim, lower, eta)
    return PriceInterval(lower, upper, att_lo, att_up, None, lo_witness, up_witness)


@dataclass(frozen=True)
class PolarConeReport:
    """Vertex-level comparison of two descriptions of the same dual object."""

    match: bool
    polar_vertices: tuple[tuple[Num, ...], ...]
    dual_vertices: tuple[tuple[Num, ...], ...]
    polar_in_dual: bool
    dual_in_polar: bool
    cone_inequality_samples_ok: bool


def polar_cone_check(
    model: MarketModel,
    mode: str = "free",
    samples: int = 20,
    seed: int = 0,
    tol: Num | None = None,
) -> PolarConeReport:
    """The polar of the claim cone, normalized to total mass one, must be the
    measure polytope: both are enumerated as vertex sets and compared exactly.

    The polar is described through signed inequalities against the generator
    columns, the polytope through the (super)martingale rows; random elements
    of the claim cone are also paired against every polar vertex.
    """
    violations = validate(model, tol)
    if violations:
        from .ftap import InvalidModelError

        raise InvalidModelError(violations)
    n = model.n_outcomes
    if n > 6:
        raise DimensionGuardError("polar cone check supports at most 6 outcomes")
    kind = "martingale" if mode == "free" else "supermartingale"
    _measure_or_refuse(model, kind, tol)
    _gens, cols = generator_matrix(model, mode)

    polar_rows: list[tuple[list[Num], str, Num]] = [([1] * n, EQ, 1)]
    for col in cols:
        polar_rows.append((list(col), LE, 0))
        if mode == "free":
            polar_rows.append(([-v for v in col], LE, 0))
    polar_lp = LinearProgram.build([0] * n, "max", polar_rows, [(0, None)] * n)
    dual_lp = LinearProgram.build(
        [0] * n, "max", martingale_polytope_constraints(cols, n, kind), [(0, None)] * n
    )
    polar_vertices = tuple(enumerate_vertices(polar_lp))
    dual_vertices = tuple(enumerate_vertices(dual_lp))

    def satisfies(point, lp: LinearProgram) -> bool:
        for con in lp.constraints:
            lhs = sum(Fraction(c) * v for c, v in zip(con.coeffs, point))
            rhs = Fraction(con.rhs)
            if con.relation == EQ and lhs != rhs:
                return False
            if con.relation == LE and lhs > rhs:
                return False
            if con.relation == GE and lhs < rhs:
                return False
        return all(v >= 0 for v in point)

    polar_in_dual = all(satisfies(v, dual_lp) for v in polar_vertices)
    dual_in_polar = all(satisfies(v, polar_lp) for v in dual_vertices)

    rng = random.Random(seed)
    samples_ok = True
    k = len(cols)
    for _ in range(samples):
        lam = [Fraction(rng.randint(-6, 6), rng.randint(1, 4)) for _ in range(k)]
        if mode == "long_only":
            lam = [abs(v) for v in lam]
        h = [Fraction(rng.randint(0, 6), rng.randint(1, 4)) for _ in range(n)]
        element = [
            sum(c * Fraction(col[w]) for c, col in zip(lam, cols)) - h[w] for w in range(n)
        ]
        for vertex in polar_vertices:
            if sum(z * e for z, e in zip(vertex, element)) > 0:
                samples_ok = False
    return PolarConeReport(
        match=set(polar_vertices) == set(dual_vertices),
        polar_vertices=polar_vertices,
        dual_vertices=dual_vertices,
        polar_in_dual=polar_in_dual,
        dual_in_polar=dual_in_polar,
        cone_inequality_samples_ok=samples_ok,
    )


@dataclass(frozen=True)
class AttainabilityReport:
    """Three equivalent membership tests for replicability at the candidate price."""

    candidate_price: Num
    zero_width: bool
    in_cone_both_ways: bool
    zero_at_all_vertices: bool
    in_generator_span: bool

    @property
    def consistent(self) -> bool:
        return (
            self.zero_width
            == self.in_cone_both_ways
            == self.zero_at_all_vertices
            == self.in_generator_span
        )


def _cone_feasible(cols, n, target, lp_mode, eff_tol) -> bool:
    """Is there a generator combination dominating ``target`` outcome-wise?"""
    k = len(cols)
    lp = LinearProgram.build(
        objective=[0] * k,
        sense="min",
        constraints=[([col[w] for col in cols], GE, target[w]) for w in range(n)],
        bounds=[(None, None)] * k,
    )
    sol = solve(lp, lp_mode, float(eff_tol) if eff_tol else 1e-9)
    if sol.status == INFEASIBLE:
        return False
    return True


def attainability_set_check(
    model: MarketModel,
    claim: RandomVariable | Sequence[Num],
    tol: Num | None = None,
) -> AttainabilityReport:
    """Check the replicability characterizations against each other.

    With x the upper dual bound: the claim minus x lies in the claim cone in
    both directions iff its expectation vanishes at every vertex of the
    measure polytope iff it lies in the span of the generators, and all three
    hold exactly when the price interval degenerates.
    """
    claim = as_random_variable(claim)
    interval = price_interval(model, claim, tol=tol)
    lp_mode, eff_tol = _context(model, claim, tol)
    _gens, cols = generator_matrix(model, "free")
    n = model.n_outcomes
    x = interval.upper
    shifted = [v - x for v in claim.values]

    in_cone = _cone_feasible(cols, n, shifted, lp_mode, eff_tol) and _cone_feasible(
        cols, n, [-v for v in shifted], lp_mode, eff_tol
    )
    dual_lp = LinearProgram.build(
        [0] * n, "max", martingale_polytope_constraints(cols, n, "martingale"), [(0, None)] * n
    )
    vertices = enumerate_vertices(dual_lp)
    at_vertices = all(
        abs(sum(q * v for q, v in zip(vertex, shifted))) <= eff_tol for vertex in vertices
    )
    span = _linalg.column_span_solve([list(c) for c in cols], shifted, eff_tol) is not None
    return AttainabilityReport(
        candidate_price=x,
        zero_width=abs(interval.width) <= eff_tol * (1 + abs(x)),
        in_cone_both_ways=in_cone,
        zero_at_all_vertices=at_vertices,
        in_generator_span=span,
    )
