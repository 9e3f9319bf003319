"""Both sides of the fundamental theorem on a finite space: search the claim
cone for an arbitrage, and search the probability simplex for a full-support
measure that turns every admissible projection of prices into a
(super)martingale. Exactly one of the two searches can succeed; the verdict
function raises when the solver pair ever disagrees with that.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

from .lpsolve import EQ, GE, LE, INFEASIBLE, OPTIMAL, LinearProgram, solve
from .market import (
    MarketModel,
    Strategy,
    generator_matrix,
    strategy_from_coefficients,
    validate,
)
from .numeric import Num, all_exact, pick_tol
from .probspace import RandomVariable, conditional_expectation


class InvalidModelError(ValueError):
    def __init__(self, violations: Sequence[str]):
        super().__init__("model fails validation: " + "; ".join(violations))
        self.violations = tuple(violations)


class FtapInconsistencyError(RuntimeError):
    """Arbitrage search and measure search both succeeded or both failed."""

    def __init__(self, message: str, arbitrage, measure):
        super().__init__(message)
        self.arbitrage = arbitrage
        self.measure = measure


@dataclass(frozen=True)
class MeasureCertificate:
    """A probability vector with its per-generator expectations attached."""

    q_values: tuple[Num, ...]
    kind: str  # "martingale" | "supermartingale"
    min_mass: Num
    verification: tuple[Num, ...]

    @property
    def full_support(self) -> bool:
        return self.min_mass > 0

    def density(self, reference: Sequence[Num]) -> RandomVariable:
        return RandomVariable(tuple(q / p for q, p in zip(self.q_values, reference)))


@dataclass(frozen=True)
class ArbitrageCertificate:
    """A nonnegative, somewhere-positive terminal gain reachable from zero cost.

    ``terminal_gain + consumption`` equals the generator combination with
    coefficients ``lambdas`` outcome by outcome.
    """

    strategy: Strategy
    terminal_gain: RandomVariable
    consumption: RandomVariable
    lambdas: tuple[Num, ...]


@dataclass(frozen=True)
class FtapVerdict:
    kind: str  # "ARBITRAGE" | "NO_ARBITRAGE"
    arbitrage: ArbitrageCertificate | None
    measure: MeasureCertificate | None


@dataclass(frozen=True)
class SeparatingDensity:
    """Strictly positive density whose pairing with every reachable claim is <= 0."""

    z: RandomVariable
    generator_moments: tuple[Num, ...]
    measure: MeasureCertificate


def _require_valid(model: MarketModel, tol: Num | None) -> None:
    violations = validate(model, tol)
    if violations:
        raise InvalidModelError(violations)


def _mode_and_tol(model: MarketModel, tol: Num | None) -> tuple[str, Num]:
    exact = all_exact(model.all_values())
    eff = pick_tol(model.all_values(), tol)
    return ("exact" if exact and eff == 0 else "float"), eff


def find_arbitrage(model: MarketModel, mode: str = "free", tol: Num | None = None) -> ArbitrageCertificate | None:
    """Maximize the mass of a nonnegative terminal gain dominated by a
    zero-cost wealth; a positive optimum is an arbitrage and zero decides
    that none exists (the claim cone is closed here, nothing is lost).

    The gain is capped by 1 outcome-wise: the cone is scale-invariant, so the
    cap only makes the search bounded.
    """
    return _find_arbitrage(model, mode, tol)


@lru_cache(maxsize=None)
def _find_arbitrage(model: MarketModel, mode: str, tol: Num | None) -> ArbitrageCertificate | None:
    _require_valid(model, tol)
    lp_mode, eff_tol = _mode_and_tol(model, tol)
    gens, cols = generator_matrix(model, mode)
    n = model.n_outcomes
    k = len(cols)
    lam_bounds = (0, None) if mode == "long_only" else (None, None)
    objective = [0] * k + [1] * n
    bounds = [lam_bounds] * k + [(0, 1)] * n
    constraints = []
    for w in range(n):
        coeffs = [col[w] for col in cols] + [0] * n
        coeffs[k + w] = -1
        constraints.append((coeffs, GE, 0))
    lp = LinearProgram.build(objective, "max", constraints, bounds)
    sol = solve(lp, lp_mode, float(eff_tol) if eff_tol else 1e-9)
    if sol.status != OPTIMAL:  # pragma: no cover - always feasible and bounded
        raise RuntimeError(f"arbitrage search ended with status {sol.status}")
    if sol.objective <= eff_tol:
        return None
    lam = sol.x[:k]
    gain = sol.x[k:]
    wealth = [sum(c * col[w] for c, col in zip(lam, cols)) for w in range(n)]
    consumption = [wv - fv for wv, fv in zip(wealth, gain)]
    return ArbitrageCertificate(
        strategy=strategy_from_coefficients(model, gens, lam, mode),
        terminal_gain=RandomVariable(tuple(gain)),
        consumption=RandomVariable(tuple(consumption)),
        lambdas=tuple(lam),
    )


def martingale_polytope_constraints(
    cols: Sequence[tuple[Num, ...]], n: int, kind: str
) -> list[tuple[list[Num], str, Num]]:
    """Rows of the dual polytope over measure variables q[0..n-1]."""
    relation = EQ if kind == "martingale" else LE
    rows: list[tuple[list[Num], str, Num]] = [([1] * n, EQ, 1)]
    for col in cols:
        rows.append((list(col), relation, 0))
    return rows


def find_measure(model: MarketModel, kind: str = "martingale", tol: Num | None = None) -> MeasureCertificate | None:
    """Search for a full-support measure killing (martingale, expectations
    exactly zero) or dominating (supermartingale, <= 0) every generator.

    Strict positivity is decided by maximizing the minimum mass; the optimum
    is positive iff a full-support measure exists. In float mode a positive
    optimum below the tolerance cannot be told from zero and raises, asking
    for an exact rerun.
    """
    if kind not in ("martingale", "supermartingale"):
        raise ValueError("kind must be 'martingale' or 'supermartingale'")
    return _find_measure(model, kind, tol)


@lru_cache(maxsize=None)
def _find_measure(model: MarketModel, kind: str, tol: Num | None) -> MeasureCertificate | None:
    _require_valid(model, tol)
    lp_mode, eff_tol = _mode_and_tol(model, tol)
    mode = "free" if kind == "martingale" else "long_only"
    _gens, cols = generator_matrix(model, mode)
    n = model.n_outcomes
    constraints = [(c + [0], rel, rhs) for c, rel, rhs in martingale_polytope_constraints(cols, n, kind)]
    for w in range(n):
        row = [0] * (n + 1)
        row[w] = 1
        row[n] = -1
        constraints.append((row, GE, 0))
    objective = [0] * n + [1]
    bounds = [(0, None)] * n + [(0, None)]
    lp = LinearProgram.build(objective, "max", constraints, bounds)
    sol = solve(lp, lp_mode, float(eff_tol) if eff_tol else 1e-9)
    if sol.status == INFEASIBLE:
        return None
    if sol.status != OPTIMAL:  # pragma: no cover - epsilon is bounded by 1/n
        raise RuntimeError(f"measure search ended with status {sol.status}")
    eps = sol.objective
    if lp_mode == "exact":
        if eps == 0:
            return None
    else:
        from .lpsolve import FloatModeError

        # Numerically zero means no full-support measure; a genuinely positive
        # minimum mass below the tolerance cannot be certified either way.
        if abs(eps) <= eff_tol * 1e-3:
            return None
        if eps <= eff_tol:
            raise FloatModeError(
                f"minimum mass {eps} is below the tolerance; boundary case, rerun exact"
            )
    q = tuple(sol.x[:n])
    verification = tuple(sum(qi * ci for qi, ci in zip(q, col)) for col in cols)
    return MeasureCertificate(q, kind, min(q), verification)


def ftap_verdict(model: MarketModel, mode: str = "free", tol: Num | None = None) -> FtapVerdict:
    """Run both searches; exactly one may succeed, anything else is an error
    carrying the raw certificates for diagnosis."""
    arbitrage = find_arbitrage(model, mode, tol)
    kind = "martingale" if mode == "free" else "supermartingale"
    measure = find_measure(model, kind, tol)
    if (arbitrage is None) == (measure is None):
        state = "both" if arbitrage is not None else "neither"
        raise FtapInconsistencyError(
            f"{state} of arbitrage and full-support measure found", arbitrage, measure
        )
    if arbitrage is not None:
        return FtapVerdict("ARBITRAGE", arbitrage, None)
    return FtapVerdict("NO_ARBITRAGE", None, measure)


def find_separating_density(model: MarketModel, tol: Num | None = None) -> SeparatingDensity | None:
    """Strictly positive Z with E_P[Z g] = 0 for every generator, when one
    exists: the measure certificate re-expressed as a density against the
    reference probabilities."""
    cert = find_measure(model, "martingale", tol)
    if cert is None:
        return None
    z = cert.density(model.space.probs)
    _gens, cols = generator_matrix(model, "free")
    probs = model.space.probs
    moments = tuple(
        sum(p * zv * cv for p, zv, cv in zip(probs, z.values, col)) for col in cols
    )
    return SeparatingDensity(z=z, generator_moments=moments, measure=cert)


class ProjectionError(RuntimeError):
    """The projected process failed its (super)martingale postcondition."""


def project_prices(
    model: MarketModel,
    cert: MeasureCertificate,
    asset_set: frozenset[str] | Sequence[str],
    tol: Num | None = None,
    *,
    use_reference_on_null: bool = False,
) -> dict[str, list[RandomVariable]]:
    """Best trading-filtration view of each price in the set under ``cert``:
    value at t is the conditional expectation of S_t given the blocks at t.

    Verifies the defining property before returning: conditioning the later
    projected values back to time t reproduces (martingale) or is dominated
    by (supermartingale) the value at t.
    """
    _require_valid(model, tol)
    eff_tol = pick_tol(model.all_values(), tol)
    aset = frozenset(asset_set)
    if aset not in model.admissible_sets:
        raise ValueError(f"asset set {sorted(aset)} is not admissible")
    filt = model.filtration_for(aset)
    q = cert.q_values
    fallback = model.space.probs if use_reference_on_null else None
    grid = model.times
    out: dict[str, list[RandomVariable]] = {}
    for asset in sorted(aset):
        path = model.price_path(asset)
        projected = [
            conditional_expectation(rv, filt.at(t), q, fallback=fallback, tol=eff_tol)
            for t, rv in zip(grid, path)
        ]
        for i, t in enumerate(grid):
            part = filt.at(t)
            for later in projected[i + 1:]:
                pulled = conditional_expectation(later, part, q, fallback=fallback, tol=eff_tol)
                for a, b in zip(pulled, projected[i]):
                    diff = a - b
                    ok = abs(diff) <= eff_tol if cert.kind == "martingale" else diff <= eff_tol
                    if not ok:
                        raise ProjectionError(
                            f"projection of {asset} is not a {cert.kind} at t={t}"
                        )
        out[asset] = projected
    return out
