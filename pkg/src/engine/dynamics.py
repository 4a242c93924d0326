"""
Peer best-response dynamics over exclusive single-provider blocks.

Each block divides its worth by the Shapley value of the game restricted to
the block; unattached peers earn nothing. Peers move one at a time to the
destination that pays them most, when that beats staying by more than the
switch threshold.

Block payoffs of this kind admit an exact potential (the sum of the block
games' Hart-Mas-Colell potentials), so `structure_potential` rises by the
mover's gain on every move.
"""
import itertools
import logging
import threading
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Sequence

import numpy as np
from joblib import Parallel, delayed

from core.config.settings import settings
from core.exceptions import BlockTooLarge, TooLargeForEnumeration
from engine.shapley import PayoffVector, shapley_exact, shapley_potential
from game.coalition import mask_to_bits, popcount
from game.model import Game, Peer
from game.structure import UNATTACHED, CoalitionStructure

logger = logging.getLogger(__name__)

CONVERGED = "converged"
CYCLE = "cycle"
MAX_STEPS = "max_steps"


class Policy(str, Enum):
    ROUND_ROBIN = "round_robin"
    RANDOM_ORDER = "random_order"


@dataclass(frozen=True)
class Move:
    peer: int
    source: Optional[int]
    destination: Optional[int]
    payoff_gain: float

    def as_dict(self) -> dict:
        return {"peer": self.peer, "from": self.source, "to": self.destination, "payoff_gain": self.payoff_gain}


@dataclass(frozen=True)
class Moved:
    structure: CoalitionStructure
    move: Move


@dataclass
class Outcome:
    kind: str
    step: int
    cycle_length: Optional[int] = None

    def as_dict(self) -> dict:
        return {"kind": self.kind, "step": self.step, "cycle_length": self.cycle_length}


@dataclass
class Diagnostics:
    identical_peer_spread: float = 0.0
    incumbent_losses: int = 0
    potentials: List[float] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "identical_peer_spread": self.identical_peer_spread,
            "incumbent_losses": self.incumbent_losses,
            "potentials": self.potentials,
        }


@dataclass
class Trajectory:
    states: List[CoalitionStructure]
    moves: List[Move]
    outcome: Outcome
    diagnostics: Diagnostics = field(default_factory=Diagnostics)

    @property
    def final(self) -> CoalitionStructure:
        return self.states[-1]

    def as_dict(self) -> dict:
        first = self.states[0]
        return {
            "providers": list(first.providers),
            "peers": list(first.peers),
            "states": [state.as_list() for state in self.states],
            "moves": [move.as_dict() for move in self.moves],
            "outcome": self.outcome.as_dict(),
            "diagnostics": self.diagnostics.as_dict(),
        }


class BlockIncentive:
    """Shapley shares of block subgames, memoized by block mask."""

    def __init__(self, game: Game):
        self.game = game
        self._memo: Dict[int, Dict[int, float]] = {}
        self._lock = threading.Lock()

    def shares(self, block: int) -> Dict[int, float]:
        with self._lock:
            cached = self._memo.get(block)
        if cached is not None:
            return cached
        if popcount(block) > settings.BLOCK_MAX_PLAYERS:
            raise BlockTooLarge(f"Block of {popcount(block)} players exceeds {settings.BLOCK_MAX_PLAYERS}")
        sub = self.game.restrict(block)
        shares = dict(zip(sub.members, (float(v) for v in shapley_exact(sub))))
        with self._lock:
            return self._memo.setdefault(block, shares)

    def payoff(self, block: int, player: int) -> float:
        return self.shares(block)[player]


class VisitLog:
    """Step index of every visited state encoding."""

    def __init__(self):
        self._first_seen: Dict[tuple, int] = {}

    def record(self, key: tuple, index: int) -> Optional[int]:
        """Returns the earlier index when `key` was already visited."""
        if key in self._first_seen:
            return self._first_seen[key]
        self._first_seen[key] = index
        return None


def peer_payoffs(game: Game, structure: CoalitionStructure,
                 incentive: Optional[BlockIncentive] = None) -> PayoffVector:
    incentive = incentive or BlockIncentive(game)
    payoffs = np.zeros(game.n_players)
    for block in structure.blocks():
        for player, share in incentive.shares(block).items():
            payoffs[player] = share
    return payoffs


def structure_potential(game: Game, structure: CoalitionStructure) -> float:
    return sum(shapley_potential(game.restrict(block)) for block in structure.blocks())


def _destinations(structure: CoalitionStructure, current: Optional[int]) -> List[Optional[int]]:
    options: List[Optional[int]] = [p for p in structure.providers if p != current]
    if current is not UNATTACHED:
        options.append(UNATTACHED)
    return options


def _payoff_at(incentive: BlockIncentive, structure: CoalitionStructure, peer: int,
               destination: Optional[int]) -> float:
    if destination is UNATTACHED:
        return incentive.payoff(1 << peer, peer)
    return incentive.payoff(structure.block_of(destination) | (1 << peer), peer)


def best_response_step(game: Game, structure: CoalitionStructure, order: Sequence[int], threshold: float,
                       incentive: Optional[BlockIncentive] = None) -> Optional[Moved]:
    """First peer in `order` with an improving switch moves; None when no peer can improve."""
    incentive = incentive or BlockIncentive(game)
    for peer in order:
        current = structure.provider_of(peer)
        staying = incentive.payoff(structure.block_of(peer), peer)
        options = _destinations(structure, current)
        if settings.THREADS > 1:
            values = Parallel(n_jobs=settings.THREADS, prefer="threads")(
                delayed(_payoff_at)(incentive, structure, peer, dest) for dest in options)
        else:
            values = [_payoff_at(incentive, structure, peer, dest) for dest in options]

        # options are already in tie-break order: providers ascending, unattached last
        best_dest, best_value = None, None
        for dest, value in zip(options, values):
            if best_value is None or value > best_value + settings.AXIOM_TOL:
                best_dest, best_value = dest, value
        if best_value is not None and best_value - staying > threshold:
            move = Move(peer=peer, source=current, destination=best_dest, payoff_gain=best_value - staying)
            logger.debug(f"Peer {peer}: {current} -> {best_dest} (+{move.payoff_gain:.6g})")
            return Moved(structure=structure.moved(peer, best_dest), move=move)
    return None


def _diagnose(game: Game, trajectory: Trajectory, incentive: BlockIncentive, threshold: float) -> Diagnostics:
    diagnostics = Diagnostics()
    diagnostics.potentials = [structure_potential(game, state) for state in trajectory.states]

    for before, move in zip(trajectory.states, trajectory.moves):
        if move.destination is UNATTACHED:
            continue
        incumbents = before.block_of(move.destination)
        arrived = incumbents | (1 << move.peer)
        if any(incentive.payoff(arrived, i) < incentive.payoff(incumbents, i) - threshold
               for i in mask_to_bits(incumbents)):
            diagnostics.incumbent_losses += 1

    payoffs = peer_payoffs(game, trajectory.final, incentive)
    groups: Dict[float, List[float]] = {}
    for peer in trajectory.final.peers:
        kind = game.kind(peer)
        if isinstance(kind, Peer):
            groups.setdefault(kind.upload_capacity, []).append(float(payoffs[peer]))
    diagnostics.identical_peer_spread = max((max(v) - min(v) for v in groups.values()), default=0.0)
    return diagnostics


def simulate(game: Game, init: CoalitionStructure, max_steps: int, threshold: float, seed: int,
             policy: Policy = Policy.ROUND_ROBIN) -> Trajectory:
    incentive = BlockIncentive(game)
    rng = np.random.Generator(np.random.PCG64(seed % (1 << 64)))
    peers = list(init.peers)
    states = [init]
    moves: List[Move] = []
    visits = VisitLog()
    visits.record(init.encode(), 0)
    outcome = Outcome(kind=MAX_STEPS, step=max_steps)

    for step in range(max_steps):
        if policy == Policy.RANDOM_ORDER:
            order = [peers[k] for k in rng.permutation(len(peers))]
        else:
            order = peers
        result = best_response_step(game, states[-1], order, threshold, incentive)
        if result is None:
            outcome = Outcome(kind=CONVERGED, step=step)
            break
        states.append(result.structure)
        moves.append(result.move)
        earlier = visits.record(result.structure.encode(), len(states) - 1)
        if earlier is not None:
            outcome = Outcome(kind=CYCLE, step=step + 1, cycle_length=len(states) - 1 - earlier)
            break

    trajectory = Trajectory(states=states, moves=moves, outcome=outcome)
    trajectory.diagnostics = _diagnose(game, trajectory, incentive, threshold)
    logger.info(f"Dynamics ended {outcome.kind} at step {outcome.step} after {len(moves)} moves")
    return trajectory


def enumerate_assignments(game: Game) -> List[CoalitionStructure]:
    providers = game.provider_indices()
    peers = game.peer_indices()
    states = (len(providers) + 1) ** len(peers)
    if states > settings.STABILITY_MAX_STATES:
        raise TooLargeForEnumeration(f"{states} assignments exceed {settings.STABILITY_MAX_STATES}",
                                     operation="enumerate_assignments")
    options: List[Optional[int]] = list(providers) + [UNATTACHED]
    return [CoalitionStructure.from_assignment(game, combo)
            for combo in itertools.product(options, repeat=len(peers))]


def is_nash_stable(game: Game, structure: CoalitionStructure, threshold: float,
                   incentive: Optional[BlockIncentive] = None) -> bool:
    return best_response_step(game, structure, structure.peers, threshold, incentive) is None


def nash_stable_states(game: Game, threshold: float) -> List[CoalitionStructure]:
    incentive = BlockIncentive(game)
    return [state for state in enumerate_assignments(game) if is_nash_stable(game, state, threshold, incentive)]
