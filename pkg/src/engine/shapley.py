"""
Shapley payoff division: the exact subset formula, seeded Monte Carlo
permutation sampling, and checks for the efficiency, symmetry and dummy
axioms.
"""
import itertools
import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from joblib import Parallel, delayed
from scipy.special import factorial

from core.config.settings import settings
from core.exceptions import LengthMismatch, TooLargeForEnumeration, TooLargeForExact, ZeroSamples
from game.coalition import mask_array, popcount_array
from game.model import Game

logger = logging.getLogger(__name__)

# One payoff per player, indexed like the game's roster.
PayoffVector = np.ndarray

# Permutations are drawn in fixed-size chunks; chunk c uses PCG64 seeded
# from the c-th child of SeedSequence(seed). The chunking never depends on
# the worker count, so sharded and serial runs draw identical samples.
MC_CHUNK = 4096
RNG_ALGORITHM = f"numpy.random.PCG64 over SeedSequence(seed).spawn(), {MC_CHUNK} permutations per substream"


@dataclass
class McEstimate:
    mean: PayoffVector
    std_error: PayoffVector
    samples: int
    seed: int
    rng: str = RNG_ALGORITHM

    def as_dict(self) -> dict:
        return {
            "mean": [float(x) for x in self.mean],
            "std_error": [float(x) for x in self.std_error],
            "samples": self.samples,
            "seed": self.seed,
            "rng": self.rng,
        }


@dataclass
class AxiomReport:
    efficiency: bool
    efficiency_gap: float
    symmetry: Optional[bool] = None
    symmetry_witness: Optional[Tuple[int, int]] = None
    dummy: Optional[bool] = None
    dummy_witness: Optional[int] = None

    @property
    def passed(self) -> bool:
        return self.efficiency and self.symmetry is not False and self.dummy is not False

    def as_dict(self) -> dict:
        return {
            "efficiency": self.efficiency,
            "efficiency_gap": self.efficiency_gap,
            "symmetry": self.symmetry,
            "symmetry_witness": list(self.symmetry_witness) if self.symmetry_witness else None,
            "dummy": self.dummy,
            "dummy_witness": self.dummy_witness,
        }


def shapley_weights(n_players: int) -> np.ndarray:
    """|S|!(N-|S|-1)!/N! for |S| = 0..N-1."""
    total = factorial(n_players, exact=True)
    return np.array([
        factorial(size, exact=True) * factorial(n_players - size - 1, exact=True) / total
        for size in range(n_players)
    ])


def _player_value(table: np.ndarray, masks: np.ndarray, sizes: np.ndarray,
                  weights: np.ndarray, player: int) -> float:
    bit = 1 << player
    without = masks[(masks & bit) == 0]
    gains = table[without | bit] - table[without]
    return float(np.sum(weights[sizes[without]] * gains))


def shapley_exact(game: Game) -> PayoffVector:
    n = game.n_players
    if n > settings.EXACT_MAX_PLAYERS:
        raise TooLargeForExact(f"{n} players exceed the exact bound of {settings.EXACT_MAX_PLAYERS}; "
                               f"use Monte Carlo sampling")
    table = game.worth_table()
    masks = mask_array(n)
    sizes = popcount_array(masks, n)
    weights = shapley_weights(n)
    values = Parallel(n_jobs=settings.THREADS, prefer="threads")(
        delayed(_player_value)(table, masks, sizes, weights, player) for player in range(n)
    )
    return np.array(values, dtype=float)


def shapley_potential(game: Game) -> float:
    """Hart-Mas-Colell potential: sum over T of (|T|-1)!(N-|T|)!/N! v(T); phi_i = P(N) - P(N-i)."""
    n = game.n_players
    if n == 0:
        return 0.0
    if n > settings.EXACT_MAX_PLAYERS:
        raise TooLargeForExact(f"{n} players exceed the exact bound of {settings.EXACT_MAX_PLAYERS}",
                               operation="shapley_potential")
    table = game.worth_table()
    sizes = popcount_array(mask_array(n), n)
    total = factorial(n, exact=True)
    weights = np.zeros(n + 1)
    for size in range(1, n + 1):
        weights[size] = factorial(size - 1, exact=True) * factorial(n - size, exact=True) / total
    return float(np.sum(weights[sizes] * table))


def permutation_marginals(table: np.ndarray, perms: np.ndarray) -> np.ndarray:
    """Marginal contribution of every player along each permutation row."""
    bits = np.left_shift(np.int64(1), perms)
    after = np.cumsum(bits, axis=1)
    before = after - bits
    gains = table[after] - table[before]
    marginals = np.empty(gains.shape, dtype=float)
    np.put_along_axis(marginals, perms, gains, axis=1)
    return marginals


def _marginals_by_oracle(game: Game, perms: np.ndarray) -> np.ndarray:
    marginals = np.empty(perms.shape, dtype=float)
    for row, order in enumerate(perms):
        mask = 0
        previous = 0.0
        for player in order:
            mask |= 1 << int(player)
            current = game.worth(mask)
            marginals[row, player] = current - previous
            previous = current
    return marginals


def shapley_permutation_average(game: Game) -> PayoffVector:
    """Average marginal vector over all N! join orders; a reference for small games."""
    n = game.n_players
    if n > settings.PERMUTATION_MAX_PLAYERS:
        raise TooLargeForEnumeration(f"{n}! permutations is beyond the oracle bound",
                                     operation="shapley_permutation_average")
    perms = np.array(list(itertools.permutations(range(n))), dtype=np.int64)
    return permutation_marginals(game.worth_table(), perms).mean(axis=0)


def sample_permutations(n_players: int, samples: int, seed: int) -> List[np.ndarray]:
    """The permutation chunks drawn for (samples, seed), in substream order."""
    children = np.random.SeedSequence(seed % (1 << 64)).spawn(math.ceil(samples / MC_CHUNK))
    chunks = []
    remaining = samples
    for child in children:
        size = min(MC_CHUNK, remaining)
        rng = np.random.Generator(np.random.PCG64(child))
        chunks.append(rng.permuted(np.tile(np.arange(n_players, dtype=np.int64), (size, 1)), axis=1))
        remaining -= size
    return chunks


def shapley_montecarlo(game: Game, samples: int, seed: int) -> McEstimate:
    if samples < 1:
        raise ZeroSamples("Monte Carlo estimation needs at least one sample")
    n = game.n_players
    chunks = sample_permutations(n, samples, seed)

    use_table = game.has_table or (n <= settings.ENUMERATION_MAX_PLAYERS and (1 << n) <= samples * n)
    if use_table:
        table = game.worth_table()
        parts = Parallel(n_jobs=settings.THREADS, prefer="threads")(
            delayed(permutation_marginals)(table, chunk) for chunk in chunks)
    else:
        parts = Parallel(n_jobs=settings.THREADS, prefer="threads")(
            delayed(_marginals_by_oracle)(game, chunk) for chunk in chunks)
    marginals = np.concatenate(parts, axis=0)

    mean = marginals.mean(axis=0)
    if samples > 1:
        std_error = marginals.std(axis=0, ddof=1) / math.sqrt(samples)
    else:
        std_error = np.zeros(n)
    logger.debug(f"Monte Carlo Shapley: {samples} samples, seed {seed}, table={use_table}")
    return McEstimate(mean=mean, std_error=std_error, samples=samples, seed=seed)


def check_axioms(game: Game, phi: PayoffVector, tol: Optional[float] = None) -> AxiomReport:
    tol = settings.AXIOM_TOL if tol is None else tol
    n = game.n_players
    phi = np.asarray(phi, dtype=float)
    if phi.shape != (n,):
        raise LengthMismatch(f"Payoff vector has {phi.size} entries for {n} players", operation="check_axioms")

    gap = float(np.sum(phi) - game.worth(game.grand))
    report = AxiomReport(efficiency=abs(gap) <= tol, efficiency_gap=gap)
    if n > settings.AXIOM_MAX_PLAYERS:
        logger.info(f"Skipping symmetry and dummy checks: {n} players exceed {settings.AXIOM_MAX_PLAYERS}")
        return report

    table = game.worth_table()
    masks = mask_array(n)

    report.dummy = True
    for i in range(n):
        bit = 1 << i
        without = masks[(masks & bit) == 0]
        is_null = np.all(np.abs(table[without | bit] - table[without]) <= tol)
        if is_null and abs(phi[i]) > tol:
            report.dummy = False
            report.dummy_witness = i
            break

    report.symmetry = True
    for i, j in itertools.combinations(range(n), 2):
        pair = (1 << i) | (1 << j)
        rest = masks[(masks & pair) == 0]
        interchangeable = np.all(np.abs(table[rest | (1 << i)] - table[rest | (1 << j)]) <= tol)
        if interchangeable and abs(phi[i] - phi[j]) > tol:
            report.symmetry = False
            report.symmetry_witness = (i, j)
            break
    return report
