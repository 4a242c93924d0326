"""
Shared fixtures: classic games, the frozen scenario rosters and random corpora.
"""
import os
import sys
from pathlib import Path

import pytest

sys.path.insert(0, os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "src"))

from data.game_generator import GameGenerator, majority_game, unanimity_game  # noqa: E402
from game.model import Peer, Provider, make_game  # noqa: E402

SCENARIO_DIR = Path(__file__).resolve().parent.parent / "src" / "data" / "scenarios"


def provider(subscribers=10, revenue=2, demand=1, cost=1):
    return Provider(subscribers=subscribers, revenue_per_subscriber=revenue,
                    demand_per_subscriber=demand, server_cost_per_bandwidth=cost)


def peer(upload):
    return Peer(upload_capacity=upload)


@pytest.fixture
def scenario_dir():
    return SCENARIO_DIR


@pytest.fixture
def single_provider_game():
    """One provider (revenue 10, demand 10, cost rate 0.5) and two peers of upload 4."""
    return make_game([provider(10, 1, 1, 0.5), peer(4), peer(4)])


@pytest.fixture
def shared_peer_game():
    """Two identical providers and one peer that can serve either."""
    return make_game([provider(), provider(), peer(10)])


@pytest.fixture
def unequal_providers_game():
    """Providers with cost rates 1 and 0.5 and two identical peers of upload 10."""
    return make_game([provider(cost=1), provider(cost=0.5), peer(10), peer(10)])


@pytest.fixture
def majority3():
    return majority_game(3)


@pytest.fixture
def unanimity():
    return unanimity_game


@pytest.fixture
def generator():
    return GameGenerator(seed=2024)
