"""
Generate games for testing and demos
"""
import logging
from typing import List, Tuple

import numpy as np

from game.coalition import coalition_sums, mask_array, popcount, popcount_array
from game.model import Peer, PeerAssistedGame, Provider, TabularGame, make_game

logger = logging.getLogger(__name__)


def unanimity_game(n_players: int) -> TabularGame:
    """Worth 1 for the grand coalition, 0 otherwise."""
    grand = (1 << n_players) - 1
    return TabularGame.from_function(n_players, lambda s: 1.0 if s == grand else 0.0, name="unanimity")


def majority_game(n_players: int) -> TabularGame:
    """Worth 1 for any strict majority; empty core for odd N >= 3."""
    quota = n_players // 2 + 1
    return TabularGame.from_function(n_players, lambda s: 1.0 if popcount(s) >= quota else 0.0,
                                     name="majority")


def glove_game(left: int, right: int) -> TabularGame:
    """Players 0..left-1 hold left gloves, the rest right gloves; worth is the number of pairs."""
    left_mask = (1 << left) - 1

    def pairs(s: int) -> float:
        return float(min(popcount(s & left_mask), popcount(s & ~left_mask)))

    return TabularGame.from_function(left + right, pairs, name="glove")


class GameGenerator:
    def __init__(self, seed: int = 0):
        self.rng = np.random.default_rng(seed)

    def random_table_game(self, n_players: int, low: float = 0.0, high: float = 100.0) -> TabularGame:
        values = self.rng.uniform(low, high, size=1 << n_players)
        values[0] = 0.0
        return TabularGame(n_players, values=values, name="random")

    def random_convex_game(self, n_players: int) -> TabularGame:
        """Additive part plus c·|S|², which is supermodular for any c >= 0."""
        masks = mask_array(n_players)
        additive = coalition_sums(self.rng.uniform(-10.0, 10.0, size=n_players))
        sizes = popcount_array(masks, n_players)
        values = additive + float(self.rng.uniform(0.0, 5.0)) * sizes ** 2
        return TabularGame(n_players, values=values, name="convex")

    def random_pair(self, n_players: int) -> Tuple[TabularGame, TabularGame]:
        return self.random_table_game(n_players), self.random_table_game(n_players)

    def random_provider(self) -> Provider:
        """Revenue per subscriber is kept at or above the server cost of serving them."""
        demand = float(self.rng.uniform(0.5, 3.0))
        cost = float(self.rng.uniform(0.1, 2.0))
        return Provider(
            subscribers=float(self.rng.integers(1, 50)),
            revenue_per_subscriber=cost * demand * float(self.rng.uniform(1.0, 3.0)),
            demand_per_subscriber=demand,
            server_cost_per_bandwidth=cost,
        )

    def random_peer(self) -> Peer:
        return Peer(upload_capacity=float(self.rng.uniform(0.0, 40.0)))

    def random_peer_assisted(self, n_providers: int, n_peers: int) -> PeerAssistedGame:
        players = [self.random_provider() for _ in range(n_providers)]
        players += [self.random_peer() for _ in range(n_peers)]
        return make_game(players)

    def corpus(self, count: int, min_players: int = 2, max_players: int = 10) -> List[TabularGame]:
        games = [self.random_table_game(int(self.rng.integers(min_players, max_players + 1)))
                 for _ in range(count)]
        logger.info(f"Generated {count} random games with {min_players}-{max_players} players")
        return games

    def peer_assisted_corpus(self, count: int, max_players: int = 8) -> List[PeerAssistedGame]:
        games = []
        for _ in range(count):
            n_providers = int(self.rng.integers(1, max(2, max_players // 2) + 1))
            n_peers = int(self.rng.integers(0, max_players - n_providers + 1))
            games.append(self.random_peer_assisted(n_providers, n_peers))
        return games
