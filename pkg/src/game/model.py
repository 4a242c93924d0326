"""
Players, coalitional games and the peer-assisted worth function.

A game maps coalitions (bitmasks) to a worth in currency per period. Every
game memoizes its worth oracle; the memo is guarded by a lock so parallel
workers may query the same game.
"""
import logging
import math
import threading
from abc import ABC, abstractmethod
from dataclasses import dataclass, field, fields
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from core.exceptions import (EmptyRoster, InvalidCoalition, InvalidParameter, TooLargeForEnumeration,
                             TooManyPlayers)
from game.coalition import MAX_PLAYERS, grand_mask, mask_to_bits

logger = logging.getLogger(__name__)

# worth_table() materializes 2^N floats; keep it to sizes that fit in memory
TABLE_MAX_PLAYERS = 26


@dataclass(frozen=True)
class Provider:
    subscribers: float
    revenue_per_subscriber: float
    demand_per_subscriber: float
    server_cost_per_bandwidth: float

    @property
    def revenue(self) -> float:
        return self.subscribers * self.revenue_per_subscriber

    @property
    def demand(self) -> float:
        return self.subscribers * self.demand_per_subscriber

    @property
    def standalone_worth(self) -> float:
        return self.revenue - self.server_cost_per_bandwidth * self.demand


@dataclass(frozen=True)
class Peer:
    upload_capacity: float


PlayerKind = Union[Provider, Peer]


@dataclass
class AllocationPlan:
    """Peer bandwidth routed to providers; keys are (peer, provider) indices."""
    flows: Dict[Tuple[int, int], float] = field(default_factory=dict)

    def assigned_to(self, provider: int) -> float:
        return sum(bw for (_, dst), bw in self.flows.items() if dst == provider)

    def uploaded_by(self, peer: int) -> float:
        return sum(bw for (src, _), bw in self.flows.items() if src == peer)

    def total(self) -> float:
        return sum(self.flows.values())


class Game(ABC):
    """Memoized characteristic function over N ≤ 64 players."""

    def __init__(self, n_players: int):
        self.n_players = n_players
        self._cache: Dict[int, float] = {}
        self._lock = threading.Lock()
        self._table: Optional[np.ndarray] = None

    @property
    def grand(self) -> int:
        return grand_mask(self.n_players)

    def validate(self, mask: int) -> None:
        if mask < 0 or mask >> self.n_players:
            raise InvalidCoalition(f"Coalition {mask:#x} has members outside [0, {self.n_players})")

    def worth(self, mask: int) -> float:
        self.validate(mask)
        if mask == 0:
            return 0.0
        if self._table is not None:
            return float(self._table[mask])
        with self._lock:
            cached = self._cache.get(mask)
        if cached is not None:
            return cached
        value = float(self._evaluate(mask))
        with self._lock:
            # first writer wins so concurrent readers all see one value
            return self._cache.setdefault(mask, value)

    @abstractmethod
    def _evaluate(self, mask: int) -> float:
        pass

    def worth_table(self) -> np.ndarray:
        """Worth of every coalition, indexed by mask."""
        if self._table is None:
            if self.n_players > TABLE_MAX_PLAYERS:
                raise TooLargeForEnumeration(
                    f"Cannot tabulate 2^{self.n_players} coalitions", operation="worth_table")
            logger.debug(f"Tabulating {1 << self.n_players} coalitions for {self!r}")
            table = np.empty(1 << self.n_players, dtype=float)
            for mask in range(1 << self.n_players):
                table[mask] = self.worth(mask)
            self._table = table
        return self._table

    @property
    def has_table(self) -> bool:
        return self._table is not None

    def clear_cache(self) -> None:
        with self._lock:
            self._cache.clear()
            self._table = None

    def kind(self, player: int) -> Optional[PlayerKind]:
        return None

    def is_provider(self, player: int) -> bool:
        return isinstance(self.kind(player), Provider)

    def provider_indices(self) -> List[int]:
        return [i for i in range(self.n_players) if self.is_provider(i)]

    def peer_indices(self) -> List[int]:
        return [i for i in range(self.n_players) if isinstance(self.kind(i), Peer)]

    def restrict(self, mask: int) -> "SubGame":
        self.validate(mask)
        return SubGame(self, mask_to_bits(mask))

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}(n_players={self.n_players})"


class PeerAssistedGame(Game):
    """Providers sell content; peers' upload bandwidth offsets provider server cost."""

    def __init__(self, players: Sequence[PlayerKind]):
        super().__init__(len(players))
        self.players: List[PlayerKind] = list(players)

    def kind(self, player: int) -> PlayerKind:
        return self.players[player]

    def allocate(self, mask: int) -> AllocationPlan:
        self.validate(mask)
        members = mask_to_bits(mask)
        providers = [i for i in members if isinstance(self.players[i], Provider)]
        peers = [i for i in members if isinstance(self.players[i], Peer)]
        plan = AllocationPlan()
        if not providers or not peers:
            return plan

        # costliest server bandwidth first; equal rates by ascending index
        providers.sort(key=lambda i: (-self.players[i].server_cost_per_bandwidth, i))
        remaining = {j: self.players[j].upload_capacity for j in peers}
        for provider in providers:
            need = self.players[provider].demand
            for peer in peers:
                if need <= 0:
                    break
                give = min(remaining[peer], need)
                if give > 0:
                    plan.flows[(peer, provider)] = give
                    remaining[peer] -= give
                    need -= give
        return plan

    def _evaluate(self, mask: int) -> float:
        plan = self.allocate(mask)
        total = 0.0
        for i in mask_to_bits(mask):
            player = self.players[i]
            if isinstance(player, Provider):
                residual = max(0.0, player.demand - plan.assigned_to(i))
                total += player.revenue - player.server_cost_per_bandwidth * residual
        return total

    def residual_cost(self, mask: int, plan: AllocationPlan) -> float:
        cost = 0.0
        for i in mask_to_bits(mask):
            player = self.players[i]
            if isinstance(player, Provider):
                cost += player.server_cost_per_bandwidth * max(0.0, player.demand - plan.assigned_to(i))
        return cost


class TabularGame(Game):
    """Game given by an explicit worth table or a worth callable."""

    def __init__(self, n_players: int, values: Optional[Sequence[float]] = None,
                 function: Optional[Callable[[int], float]] = None, name: str = "tabular"):
        super().__init__(n_players)
        if values is None and function is None:
            raise InvalidParameter("A tabular game needs values or a worth function")
        if values is not None:
            values = np.asarray(values, dtype=float)
            if values.shape != (1 << n_players,):
                raise InvalidParameter(f"Expected {1 << n_players} worth values, got {values.shape}")
            if values[0] != 0.0:
                raise InvalidParameter("The empty coalition must have worth 0")
            if not np.all(np.isfinite(values)):
                raise InvalidParameter("Worth values must be finite")
        self._values = values
        self._function = function
        self.name = name

    @classmethod
    def from_function(cls, n_players: int, function: Callable[[int], float], name: str = "tabular"):
        return cls(n_players, function=function, name=name)

    def _evaluate(self, mask: int) -> float:
        if self._values is not None:
            return float(self._values[mask])
        return float(self._function(mask))

    def __repr__(self) -> str:
        return f"TabularGame({self.name}, n_players={self.n_players})"


class SubGame(Game):
    """The parent game restricted to a subset of its players, re-indexed from 0."""

    def __init__(self, parent: Game, members: Sequence[int]):
        super().__init__(len(members))
        self.parent = parent
        self.members = list(members)

    def parent_mask(self, mask: int) -> int:
        result = 0
        for local in mask_to_bits(mask):
            result |= 1 << self.members[local]
        return result

    def kind(self, player: int) -> Optional[PlayerKind]:
        return self.parent.kind(self.members[player])

    def _evaluate(self, mask: int) -> float:
        return self.parent.worth(self.parent_mask(mask))

    def __repr__(self) -> str:
        return f"SubGame(members={self.members})"


class SumGame(Game):
    """Pointwise sum (u + w)(S) = u(S) + w(S) of two games on one roster."""

    def __init__(self, left: Game, right: Game):
        if left.n_players != right.n_players:
            raise InvalidParameter("Summed games must share a roster")
        super().__init__(left.n_players)
        self.left = left
        self.right = right

    def _evaluate(self, mask: int) -> float:
        return self.left.worth(mask) + self.right.worth(mask)


def _validate_kind(index: int, player: PlayerKind) -> None:
    if not isinstance(player, (Provider, Peer)):
        raise InvalidParameter(f"Player {index} is neither a provider nor a peer")
    for spec in fields(player):
        value = getattr(player, spec.name)
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise InvalidParameter(f"Player {index}: {spec.name} must be a number")
        if not math.isfinite(value) or value < 0:
            raise InvalidParameter(f"Player {index}: {spec.name} must be finite and non-negative, got {value}")


def make_game(spec: Sequence[PlayerKind]) -> PeerAssistedGame:
    """Build the canonical peer-assisted game; player indices follow input order."""
    if len(spec) == 0:
        raise EmptyRoster("A game needs at least one player")
    if len(spec) > MAX_PLAYERS:
        raise TooManyPlayers(f"{len(spec)} players exceed the limit of {MAX_PLAYERS}")
    for index, player in enumerate(spec):
        _validate_kind(index, player)
    game = PeerAssistedGame(spec)
    logger.debug(f"Built game with {len(game.provider_indices())} providers and "
                 f"{len(game.peer_indices())} peers")
    return game


def allocate_uploads(game: PeerAssistedGame, s: int) -> AllocationPlan:
    return game.allocate(s)


def worth(game: Game, s: int) -> float:
    return game.worth(s)
