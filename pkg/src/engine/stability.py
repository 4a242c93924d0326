"""
Core membership, core non-emptiness, least core and provider deviation.

Core non-emptiness is decided on the balanced-collection side of the
feasibility question: maximize sum_S lambda_S v(S) over proper coalitions
subject to sum_{S contains i} lambda_S = 1 for every player i. The optimum
is at most v(N) exactly when the core is nonempty, and the simplex
multipliers of the player rows form a payoff x with x(S) >= v(S) for every
proper S and x(N) equal to that optimum.
"""
import itertools
import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed

from core.config.settings import settings
from core.exceptions import LengthMismatch, NumericalFailure, TooLargeForEnumeration
from engine.shapley import PayoffVector, shapley_exact
from engine.simplex import OPTIMAL, DenseSimplex
from game.coalition import coalition_sums, describe, mask_array, mask_to_bits
from game.model import Game
from game.structure import CoalitionStructure

logger = logging.getLogger(__name__)

DEVIATION_CONCEPT = "shapley-in-own-block versus shapley-in-grand-coalition (Aumann-Dreze payoffs)"


@dataclass
class CoreReport:
    is_member: bool
    violations: List[Tuple[int, float]]
    tolerance: float
    efficiency_gap: float = 0.0

    def as_dict(self, limit: Optional[int] = None) -> dict:
        shown = self.violations if limit is None else self.violations[:limit]
        return {
            "is_member": self.is_member,
            "tolerance": self.tolerance,
            "efficiency_gap": self.efficiency_gap,
            "violation_count": len(self.violations),
            "violations": [{"coalition": describe(mask), "mask": mask, "excess": excess}
                           for mask, excess in shown],
        }


@dataclass
class CoreResult:
    nonempty: bool
    witness: Optional[PayoffVector] = None
    balanced_value: Optional[float] = None


@dataclass
class LeastCoreResult:
    epsilon: float
    witness: PayoffVector
    iterations: int = 0


@dataclass
class ProviderDeviation:
    provider: int
    block: int
    grand_payoff: float
    split_payoff: float
    gain: float
    block_excess: float

    def as_dict(self) -> dict:
        return {
            "provider": self.provider,
            "block": describe(self.block),
            "grand_payoff": self.grand_payoff,
            "split_payoff": self.split_payoff,
            "gain": self.gain,
            "block_excess": self.block_excess,
        }


@dataclass
class DeviationReport:
    deviations: List[ProviderDeviation] = field(default_factory=list)
    verdict: bool = True
    concept: str = DEVIATION_CONCEPT

    def gain_of(self, provider: int) -> float:
        return next(d.gain for d in self.deviations if d.provider == provider)

    def as_dict(self) -> dict:
        return {
            "concept": self.concept,
            "verdict": self.verdict,
            "providers": [d.as_dict() for d in self.deviations],
        }


def _check_size(game: Game, bound: int, operation: str) -> None:
    if game.n_players > bound:
        raise TooLargeForEnumeration(f"{game.n_players} players exceed the enumeration bound of {bound}",
                                     operation=operation)


def core_contains(game: Game, x: Sequence[float], tol: float) -> CoreReport:
    _check_size(game, settings.ENUMERATION_MAX_PLAYERS, "core_contains")
    x = np.asarray(x, dtype=float)
    n = game.n_players
    if x.shape != (n,):
        raise LengthMismatch(f"Payoff vector has {x.size} entries for {n} players", operation="core_contains")

    table = game.worth_table()
    sums = coalition_sums(x)
    proper = mask_array(n)[1:-1]
    excess = table[proper] - sums[proper]
    bad = excess > tol
    masks = proper[bad]
    values = excess[bad]

    gap = float(sums[-1] - table[-1])
    if abs(gap) > tol:
        masks = np.append(masks, game.grand)
        values = np.append(values, abs(gap))

    order = np.lexsort((masks, -values))
    violations = [(int(masks[k]), float(values[k])) for k in order]
    return CoreReport(is_member=not violations, violations=violations, tolerance=tol, efficiency_gap=gap)


def _balanced_value(game: Game, shift: float) -> Tuple[float, np.ndarray, int]:
    """Max of sum_S lambda_S (v(S) - shift) over balanced weights on proper coalitions."""
    n = game.n_players
    table = game.worth_table()
    proper = mask_array(n)[1:-1]
    membership = np.stack([((proper >> i) & 1).astype(float) for i in range(n)])
    cap = settings.SIMPLEX_CAP_FACTOR * (1 << n)
    solver = DenseSimplex(membership, np.ones(n), -(table[proper] - shift),
                          tol=settings.FEASIBILITY_TOL, max_iterations=cap)
    result = solver.solve()
    if result.status != OPTIMAL:
        # singletons are always a feasible balanced collection and weights are bounded by 1
        raise NumericalFailure(f"Balanced-collection LP ended {result.status}")
    return -result.objective, -result.duals, result.iterations


def _feasible_at(game: Game, epsilon: float) -> Tuple[bool, Optional[np.ndarray], float]:
    grand = game.worth(game.grand)
    value, multipliers, pivots = _balanced_value(game, epsilon)
    scale = max(1.0, abs(grand))
    logger.debug(f"epsilon={epsilon:.9g}: balanced value {value:.12g} vs v(N) {grand:.12g} ({pivots} pivots)")
    if value > grand + settings.FEASIBILITY_TOL * scale:
        return False, None, value
    witness = multipliers.copy()
    witness[0] += grand - witness.sum()
    return True, witness, value


def core_nonempty(game: Game) -> CoreResult:
    _check_size(game, settings.LP_MAX_PLAYERS, "core_nonempty")
    if game.n_players == 1:
        return CoreResult(nonempty=True, witness=np.array([game.worth(1)]), balanced_value=game.worth(1))
    feasible, witness, value = _feasible_at(game, 0.0)
    return CoreResult(nonempty=feasible, witness=witness, balanced_value=value)


def least_core(game: Game) -> LeastCoreResult:
    _check_size(game, settings.LP_MAX_PLAYERS, "least_core")
    n = game.n_players
    grand = game.worth(game.grand)
    if n == 1:
        return LeastCoreResult(epsilon=0.0, witness=np.array([grand]))

    feasible, witness, _ = _feasible_at(game, 0.0)
    if feasible:
        return LeastCoreResult(epsilon=0.0, witness=witness)

    # the equal split is feasible once epsilon reaches its largest excess
    table = game.worth_table()
    equal = np.full(n, grand / n)
    proper = mask_array(n)[1:-1]
    lo = 0.0
    hi = max(0.0, float(np.max(table[proper] - coalition_sums(equal)[proper])))
    best = equal
    iterations = 0
    while hi - lo > settings.LEAST_CORE_TOL:
        mid = 0.5 * (lo + hi)
        ok, candidate, _ = _feasible_at(game, mid)
        if ok:
            hi, best = mid, candidate
        else:
            lo = mid
        iterations += 1
    logger.info(f"Least core epsilon {hi:.9g} after {iterations} bisection steps")
    return LeastCoreResult(epsilon=hi, witness=best, iterations=iterations)


def _block_payoff(game: Game, block: int, player: int) -> float:
    sub = game.restrict(block)
    return float(shapley_exact(sub)[sub.members.index(player)])


def provider_deviation(game: Game, structure: CoalitionStructure) -> DeviationReport:
    """Structures reject blocks with two providers when they are built (InvalidStructure)."""
    grand = shapley_exact(game)
    report = DeviationReport()
    splits = Parallel(n_jobs=settings.THREADS, prefer="threads")(
        delayed(_block_payoff)(game, structure.block_of(p), p) for p in structure.providers)
    for provider, split in zip(structure.providers, splits):
        block = structure.block_of(provider)
        members = mask_to_bits(block)
        excess = game.worth(block) - float(np.sum(grand[members]))
        report.deviations.append(ProviderDeviation(
            provider=provider,
            block=block,
            grand_payoff=float(grand[provider]),
            split_payoff=split,
            gain=split - float(grand[provider]),
            block_excess=excess,
        ))
    report.verdict = all(d.gain <= settings.DEVIATION_TOL for d in report.deviations)
    return report


def is_convex(game: Game, tol: Optional[float] = None) -> bool:
    """Supermodularity: v(S+i) - v(S) <= v(S+i+j) - v(S+j) for all S and i, j outside S."""
    tol = settings.AXIOM_TOL if tol is None else tol
    _check_size(game, settings.AXIOM_MAX_PLAYERS, "is_convex")
    n = game.n_players
    table = game.worth_table()
    masks = mask_array(n)
    for i, j in itertools.combinations(range(n), 2):
        bi, bj = 1 << i, 1 << j
        rest = masks[(masks & (bi | bj)) == 0]
        if np.any(table[rest | bi] - table[rest] > table[rest | bi | bj] - table[rest | bj] + tol):
            return False
    return True
