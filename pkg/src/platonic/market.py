"""Market models where prices are adapted to a large filtration while trading
uses smaller ones: assets on a common time grid, the admissible family of
tradable asset sets with its filtration assignment, simple strategies, wealth
processes and the elementary one-interval bets that span all terminal wealths.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Mapping, Sequence

from . import _linalg
from .numeric import Num, pick_tol
from .probspace import (
    FiniteSpace,
    Filtration,
    Partition,
    RandomVariable,
    as_random_variable,
    is_sub_filtration,
)


class NonMeasurableHoldings(ValueError):
    """Strategy holdings are not constant on the trading-filtration blocks."""


@dataclass(frozen=True)
class MarketModel:
    """Assets with prices on the common grid of ``big_filtration.times``.

    ``prices[k]`` belongs to ``assets[k]``; ``trading_filtrations[k]`` belongs
    to ``admissible_sets[k]``. Instances are immutable and hashable, which the
    generator cache relies on.
    """

    space: FiniteSpace
    big_filtration: Filtration
    assets: tuple[str, ...]
    prices: tuple[tuple[RandomVariable, ...], ...]
    admissible_sets: tuple[frozenset[str], ...]
    trading_filtrations: tuple[Filtration, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "assets", tuple(self.assets))
        object.__setattr__(self, "prices", tuple(tuple(p) for p in self.prices))
        object.__setattr__(self, "admissible_sets", tuple(frozenset(a) for a in self.admissible_sets))
        object.__setattr__(self, "trading_filtrations", tuple(self.trading_filtrations))
        n = self.space.size
        if self.big_filtration.n_outcomes != n:
            raise ValueError("big filtration lives on a different space")
        if len(set(self.assets)) != len(self.assets) or not self.assets:
            raise ValueError("asset ids must be unique and nonempty")
        if len(self.prices) != len(self.assets):
            raise ValueError("one price path per asset required")
        grid = self.times
        for asset, path in zip(self.assets, self.prices):
            if len(path) != len(grid):
                raise ValueError(f"asset {asset} needs one price per grid time")
            if any(len(rv) != n for rv in path):
                raise ValueError(f"asset {asset} has prices on the wrong space")
        if not self.admissible_sets:
            raise ValueError("at least one admissible asset set required")
        if len(set(self.admissible_sets)) != len(self.admissible_sets):
            raise ValueError("admissible sets must be distinct")
        known = set(self.assets)
        for aset in self.admissible_sets:
            if not aset or not aset <= known:
                raise ValueError(f"admissible set {sorted(aset)} is empty or has unknown assets")
        if len(self.trading_filtrations) != len(self.admissible_sets):
            raise ValueError("one trading filtration per admissible set required")
        if any(f.n_outcomes != n for f in self.trading_filtrations):
            raise ValueError("trading filtration lives on a different space")

    @property
    def times(self) -> tuple[Fraction, ...]:
        return self.big_filtration.times

    @property
    def n_outcomes(self) -> int:
        return self.space.size

    def price_path(self, asset: str) -> tuple[RandomVariable, ...]:
        return self.prices[self.assets.index(asset)]

    def filtration_for(self, asset_set: frozenset[str]) -> Filtration:
        return self.trading_filtrations[self.admissible_sets.index(frozenset(asset_set))]

    def all_values(self) -> list[Num]:
        vals: list[Num] = list(self.space.probs)
        for path in self.prices:
            for rv in path:
                vals.extend(rv.values)
        return vals


def build_market(
    space: FiniteSpace,
    big_filtration: Filtration,
    prices: Mapping[str, Sequence[RandomVariable | Sequence[Num]]],
    *,
    admissible_sets: Sequence[Sequence[str]] | None = None,
    trading_filtrations: Filtration | Mapping[frozenset[str], Filtration] | None = None,
) -> MarketModel:
    """Convenience constructor.

    Defaults: one admissible set holding every asset; a single trading
    filtration applies to all admissible sets (the big filtration itself when
    none is given, which is the classical fully-observed market).
    """
    assets = tuple(prices.keys())
    paths = tuple(tuple(as_random_variable(rv) for rv in prices[a]) for a in assets)
    if admissible_sets is None:
        sets: tuple[frozenset[str], ...] = (frozenset(assets),)
    else:
        sets = tuple(frozenset(s) for s in admissible_sets)
    if trading_filtrations is None:
        filts = tuple(big_filtration for _ in sets)
    elif isinstance(trading_filtrations, Filtration):
        filts = tuple(trading_filtrations for _ in sets)
    else:
        filts = tuple(trading_filtrations[s] for s in sets)
    return MarketModel(space, big_filtration, assets, paths, sets, filts)


@dataclass(frozen=True)
class Leg:
    """Holdings set at ``start`` and kept until ``end``; one value per asset."""

    start: Fraction
    end: Fraction
    holdings: tuple[RandomVariable, ...]  # aligned with sorted(strategy.asset_set)


@dataclass(frozen=True)
class Strategy:
    asset_set: frozenset[str]
    legs: tuple[Leg, ...]
    sign_constraint: str = "free"

    def __post_init__(self) -> None:
        object.__setattr__(self, "asset_set", frozenset(self.asset_set))
        object.__setattr__(self, "legs", tuple(self.legs))
        if self.sign_constraint not in ("free", "long_only"):
            raise ValueError("sign_constraint must be 'free' or 'long_only'")


@dataclass(frozen=True)
class Generator:
    """The elementary bet ``1_B (S_u - S_t)`` over one grid interval.

    The payoff is recoverable from the fields; ``asset_set`` records which
    admissible set contributed the block, so strategies can be rebuilt from
    generator coefficients. ``one_sided`` marks long-only enumeration.
    """

    asset: str
    from_time: Fraction
    to_time: Fraction
    block: frozenset[int]
    payoff: RandomVariable
    asset_set: frozenset[str]
    one_sided: bool = False


def validate(model: MarketModel, tol: Num | None = None) -> list[str]:
    """Semantic invariant check; returns violations as data, never raises."""
    return list(_validate(model, tol))


@lru_cache(maxsize=None)
def _validate(model: MarketModel, tol: Num | None) -> tuple[str, ...]:
    tol = pick_tol(model.all_values(), tol)
    violations: list[str] = []
    grid = model.times
    for asset, path in zip(model.assets, model.prices):
        for t, rv in zip(grid, path):
            if not rv.is_constant_on(model.big_filtration.at(t), tol):
                violations.append(f"adaptedness: asset {asset} at t={t}")
    family = set(model.admissible_sets)
    for i, a1 in enumerate(model.admissible_sets):
        for a2 in model.admissible_sets[i + 1:]:
            if a1 | a2 not in family:
                violations.append(
                    f"refining: union of {sorted(a1)} and {sorted(a2)} is not admissible"
                )
    for i, a1 in enumerate(model.admissible_sets):
        for j, a2 in enumerate(model.admissible_sets):
            if i != j and a1 < a2:
                if not is_sub_filtration(model.trading_filtrations[i], model.trading_filtrations[j]):
                    violations.append(f"monotonicity: {sorted(a1)} within {sorted(a2)}")
    for aset, filt in zip(model.admissible_sets, model.trading_filtrations):
        if not is_sub_filtration(filt, model.big_filtration):
            violations.append(f"containment: trading filtration for {sorted(aset)}")
    return tuple(violations)


def close_admissible_under_unions(model: MarketModel) -> MarketModel:
    """Union-closure of the admissible family; created unions get the join of
    the filtrations of every admissible subset they contain."""
    family = {s: f for s, f in zip(model.admissible_sets, model.trading_filtrations)}
    closed = set(family)
    changed = True
    while changed:
        changed = False
        for a in list(closed):
            for b in list(closed):
                if a | b not in closed:
                    closed.add(a | b)
                    changed = True
    grid = model.times
    out_sets = list(model.admissible_sets)
    out_filts = list(model.trading_filtrations)
    for u in sorted(closed - set(family), key=lambda s: (len(s), sorted(s))):
        parts = []
        for t in grid:
            joined = Partition.trivial(model.n_outcomes)
            for s, f in family.items():
                if s <= u:
                    joined = joined.join(f.at(t))
            parts.append(joined)
        out_sets.append(u)
        out_filts.append(Filtration(grid, tuple(parts)))
    return MarketModel(
        model.space, model.big_filtration, model.assets, model.prices,
        tuple(out_sets), tuple(out_filts),
    )


def wealth_process(model: MarketModel, strat: Strategy, tol: Num | None = None) -> list[RandomVariable]:
    """Portfolio value at every grid time: holdings times stopped price moves.

    The value at grid time t is the sum over legs and assets of
    ``H * (S(end ^ t) - S(start ^ t))``; it is identically zero at time 0.
    """
    tol = pick_tol(model.all_values(), tol)
    grid = model.times
    n = model.n_outcomes
    if frozenset(strat.asset_set) not in model.admissible_sets:
        raise ValueError(f"asset set {sorted(strat.asset_set)} is not admissible")
    filt = model.filtration_for(strat.asset_set)
    ordered = sorted(strat.asset_set)
    index_of = {t: k for k, t in enumerate(grid)}
    out = [RandomVariable.constant(n, 0) for _ in grid]
    for leg in strat.legs:
        if leg.start not in index_of or leg.end not in index_of:
            raise ValueError("leg endpoints must be grid times")
        k0, k1 = index_of[leg.start], index_of[leg.end]
        if k0 >= k1:
            raise ValueError("leg must cover a nonempty interval")
        part = filt.at(leg.start)
        if len(leg.holdings) != len(ordered):
            raise ValueError("one holding per asset in the set required")
        for asset, holding in zip(ordered, leg.holdings):
            if not holding.is_constant_on(part, tol):
                raise NonMeasurableHoldings(f"holdings in {asset} at t={leg.start}")
            if strat.sign_constraint == "long_only" and any(v < -tol for v in holding):
                raise ValueError("long-only strategy with a negative holding")
            path = model.price_path(asset)
            for k in range(1, len(grid)):
                lo, hi = min(k0, k), min(k1, k)
                if lo < hi:
                    out[k] = out[k] + holding * (path[hi] - path[lo])
    return out


@lru_cache(maxsize=None)
def _generators(model: MarketModel, mode: str) -> tuple[Generator, ...]:
    grid = model.times
    n = model.n_outcomes
    one_sided = mode == "long_only"
    seen: set[tuple[Num, ...]] = set()
    out: list[Generator] = []
    for aset, filt in zip(model.admissible_sets, model.trading_filtrations):
        for asset in sorted(aset):
            path = model.price_path(asset)
            for k in range(len(grid) - 1):
                diff = path[k + 1] - path[k]
                for block in filt.at(grid[k]).blocks:
                    payoff = tuple(diff[i] if i in block else 0 for i in range(n))
                    if all(v == 0 for v in payoff) or payoff in seen:
                        continue
                    seen.add(payoff)
                    out.append(Generator(
                        asset, grid[k], grid[k + 1], block,
                        RandomVariable(payoff), aset, one_sided,
                    ))
    return tuple(out)


def enumerate_generators(model: MarketModel, mode: str = "free") -> tuple[Generator, ...]:
    """Every elementary bet over adjacent grid intervals, deduplicated by payoff.

    Bets over longer intervals decompose into adjacent ones with the same
    (still measurable) holding, so adjacent intervals span all terminal
    wealths. Identically-zero payoffs are dropped; in long-only mode the same
    payoffs come back tagged one-sided.
    """
    if mode not in ("free", "long_only"):
        raise ValueError("mode must be 'free' or 'long_only'")
    return _generators(model, mode)


@dataclass(frozen=True)
class ConeDescription:
    """Matrix of generator payoffs plus how to read the spanned cones."""

    generators: tuple[Generator, ...]
    columns: tuple[tuple[Num, ...], ...]
    mode: str
    rank: int
    wealth_cone: str
    claim_cone: str
    closed: bool = True

    def matrix_rows(self) -> list[list[Num]]:
        n = len(self.columns[0]) if self.columns else 0
        return [[col[i] for col in self.columns] for i in range(n)]


def terminal_cone_description(model: MarketModel, mode: str = "free") -> ConeDescription:
    """Generator matrix G plus metadata describing the reachable-wealth cone
    and the super-replicable-claim cone (closed on a finite space, so no
    closure step is ever applied)."""
    gens = enumerate_generators(model, mode)
    columns = tuple(tuple(g.payoff.values) for g in gens)
    n = model.n_outcomes
    matrix = [[col[i] for col in columns] for i in range(n)]
    tol = pick_tol(model.all_values())
    rank = _linalg.rank(matrix, tol) if columns else 0
    if mode == "free":
        wealth = "all linear combinations of the columns"
    else:
        wealth = "all nonnegative combinations of the columns"
    return ConeDescription(
        generators=gens,
        columns=columns,
        mode=mode,
        rank=rank,
        wealth_cone=wealth,
        claim_cone="wealth cone minus the nonnegative orthant",
    )


def strategy_from_coefficients(
    model: MarketModel,
    gens: Sequence[Generator],
    coeffs: Sequence[Num],
    mode: str = "free",
) -> Strategy:
    """Rebuild a simple strategy from generator coefficients."""
    n = model.n_outcomes
    active = [(g, c) for g, c in zip(gens, coeffs) if c != 0]
    involved: frozenset[str] = frozenset()
    for g, _ in active:
        involved |= g.asset_set
    if not involved:
        aset = model.admissible_sets[0]
        return Strategy(aset, (), mode)
    if involved in model.admissible_sets:
        aset = involved
    else:
        candidates = [s for s in model.admissible_sets if involved <= s]
        if not candidates:
            raise ValueError("no admissible set covers the generators used")
        aset = min(candidates, key=lambda s: (len(s), sorted(s)))
    ordered = sorted(aset)
    by_interval: dict[tuple[Fraction, Fraction], dict[str, list[Num]]] = {}
    for g, c in active:
        slot = by_interval.setdefault((g.from_time, g.to_time), {})
        holding = slot.setdefault(g.asset, [0] * n)
        for i in g.block:
            holding[i] += c
    legs = []
    for (t0, t1), per_asset in sorted(by_interval.items()):
        holdings = tuple(
            RandomVariable(tuple(per_asset.get(a, [0] * n))) for a in ordered
        )
        legs.append(Leg(t0, t1, holdings))
    return Strategy(aset, tuple(legs), mode)


def generator_matrix(model: MarketModel, mode: str = "free") -> tuple[tuple[Generator, ...], list[tuple[Num, ...]]]:
    """Generators plus their payoff columns, convenient for LP assembly."""
    gens = enumerate_generators(model, mode)
    return gens, [tuple(g.payoff.values) for g in gens]


def as_float_model(model: MarketModel) -> MarketModel:
    """Copy of the model with float probabilities and prices (times stay exact)."""
    space = FiniteSpace(model.space.outcomes, tuple(float(p) for p in model.space.probs))
    prices = tuple(
        tuple(RandomVariable(tuple(float(v) for v in rv)) for rv in path)
        for path in model.prices
    )
    return MarketModel(
        space, model.big_filtration, model.assets, prices,
        model.admissible_sets, model.trading_filtrations,
    )
