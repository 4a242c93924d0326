"""
Tests for players, coalitions and the peer-assisted worth function
"""
import math

import numpy as np
import pytest

from conftest import peer, provider
from core.exceptions import EmptyRoster, InvalidCoalition, InvalidParameter, InvalidStructure, TooManyPlayers
from game.coalition import bits_to_mask, coalition_sums, describe, grand_mask, mask_to_bits, popcount
from game.model import Provider, SubGame, SumGame, TabularGame, allocate_uploads, make_game, worth
from game.structure import CoalitionStructure


def test_coalition_helpers():
    assert bits_to_mask([0, 2, 5]) == 0b100101
    assert mask_to_bits(0b100101) == [0, 2, 5]
    assert grand_mask(4) == 15
    assert popcount(0b1011) == 3
    assert describe(0b101) == "{0,2}"


def test_coalition_sums_match_direct_sums():
    x = np.array([1.5, -2.0, 4.0, 0.25])
    sums = coalition_sums(x)
    for mask in range(16):
        assert sums[mask] == pytest.approx(sum(x[i] for i in mask_to_bits(mask)))


def test_single_provider_worths(single_provider_game):
    game = single_provider_game
    assert worth(game, 0) == 0.0
    assert worth(game, 0b001) == pytest.approx(5.0)
    assert worth(game, 0b011) == pytest.approx(7.0)
    assert worth(game, 0b111) == pytest.approx(9.0)
    # peers alone earn nothing
    assert worth(game, 0b110) == 0.0


def test_greedy_allocation_serves_costliest_provider_first():
    game = make_game([provider(cost=1), provider(cost=0.5), peer(10)])
    plan = allocate_uploads(game, 0b111)
    assert plan.assigned_to(0) == pytest.approx(10.0)
    assert plan.assigned_to(1) == 0.0
    assert plan.uploaded_by(2) == pytest.approx(10.0)
    assert worth(game, 0b111) == pytest.approx(20 + 20 - 0.5 * 10)


def test_peer_bandwidth_spans_providers():
    game = make_game([provider(), provider(), peer(20)])
    plan = allocate_uploads(game, 0b111)
    assert plan.total() == pytest.approx(20.0)
    assert plan.assigned_to(0) == pytest.approx(10.0)
    assert plan.assigned_to(1) == pytest.approx(10.0)
    assert worth(game, 0b111) == pytest.approx(40.0)
    assert game.residual_cost(0b111, plan) == 0.0


def test_make_game_rejects_bad_rosters():
    with pytest.raises(EmptyRoster):
        make_game([])
    with pytest.raises(TooManyPlayers):
        make_game([peer(1)] * 65)
    with pytest.raises(InvalidParameter):
        make_game([provider(cost=-1)])
    with pytest.raises(InvalidParameter):
        make_game([peer(math.nan)])
    with pytest.raises(InvalidParameter):
        make_game([peer(math.inf)])


def test_worth_rejects_foreign_players(single_provider_game):
    with pytest.raises(InvalidCoalition):
        single_provider_game.worth(1 << 3)
    with pytest.raises(InvalidCoalition):
        single_provider_game.worth(-1)


def test_worth_table_agrees_with_oracle(generator):
    game = generator.random_peer_assisted(2, 3)
    values = [game.worth(mask) for mask in range(1 << game.n_players)]
    game.clear_cache()
    assert np.array_equal(game.worth_table(), np.array(values))
    assert game.has_table


def test_profitable_rosters_are_monotone_and_superadditive(generator):
    for game in generator.peer_assisted_corpus(20, max_players=6):
        table = game.worth_table()
        n = game.n_players
        for s in range(1 << n):
            for i in range(n):
                assert table[s | (1 << i)] >= table[s] - 1e-9
            rest = grand_mask(n) & ~s
            t = rest
            while t:
                assert table[s | t] >= table[s] + table[t] - 1e-9
                t = (t - 1) & rest


def test_subgame_reads_through_parent(shared_peer_game):
    sub = shared_peer_game.restrict(0b101)
    assert isinstance(sub, SubGame)
    assert sub.members == [0, 2]
    assert sub.worth(0b11) == pytest.approx(shared_peer_game.worth(0b101))
    assert sub.is_provider(0)
    assert sub.peer_indices() == [1]


def test_sum_game_adds_pointwise(generator):
    left, right = generator.random_pair(3)
    total = SumGame(left, right)
    for mask in range(8):
        assert total.worth(mask) == pytest.approx(left.worth(mask) + right.worth(mask))


def test_tabular_game_validation():
    with pytest.raises(InvalidParameter):
        TabularGame(2, values=[0.0, 1.0, 2.0])
    with pytest.raises(InvalidParameter):
        TabularGame(1, values=[1.0, 2.0])
    with pytest.raises(InvalidParameter):
        TabularGame(1, values=[0.0, math.nan])
    with pytest.raises(InvalidParameter):
        TabularGame(2)


def grid_minimum_cost(game, mask, step):
    """Smallest residual server cost over every grid allocation of the coalition's pooled upload."""
    members = mask_to_bits(mask)
    providers = [game.kind(i) for i in members if isinstance(game.kind(i), Provider)]
    pooled = sum(game.kind(i).upload_capacity for i in members if not isinstance(game.kind(i), Provider))
    if not providers:
        return 0.0
    axes = [np.arange(0.0, min(p.demand, pooled) + step / 2, step) for p in providers]
    received = np.meshgrid(*axes, indexing="ij")
    feasible = sum(received) <= pooled + 1e-9
    cost = sum(p.server_cost_per_bandwidth * np.maximum(0.0, p.demand - r)
               for p, r in zip(providers, received))
    return float(cost[feasible].min())


def test_greedy_matches_grid_search_on_every_coalition():
    game = make_game([provider(3, 2, 1, 2), provider(3, 2, 1, 1), provider(2, 2, 1, 1.5),
                      peer(4), peer(1), peer(2), peer(0.8)])
    step = 0.01 * 4
    for mask in range(1, 1 << game.n_players):
        plan = allocate_uploads(game, mask)
        for j in game.peer_indices():
            if mask >> j & 1:
                assert plan.uploaded_by(j) <= game.kind(j).upload_capacity + 1e-9
        assert game.residual_cost(mask, plan) == pytest.approx(grid_minimum_cost(game, mask, step), abs=1e-6)


def test_costlier_provider_is_filled_before_cheaper_one():
    game = make_game([provider(3, 2, 1, 2), provider(3, 2, 1, 1), peer(4)])
    plan = allocate_uploads(game, 0b111)
    assert plan.flows == {(2, 0): 3.0, (2, 1): 1.0}


def test_structure_blocks_must_partition_with_one_provider_each(shared_peer_game):
    with pytest.raises(InvalidStructure):
        CoalitionStructure.from_blocks(shared_peer_game, [0b011, 0b100])
    with pytest.raises(InvalidStructure):
        CoalitionStructure.from_blocks(shared_peer_game, [0b101, 0b110])
    with pytest.raises(InvalidStructure):
        CoalitionStructure.from_blocks(shared_peer_game, [0b101])
    with pytest.raises(InvalidStructure):
        CoalitionStructure.from_blocks(shared_peer_game, [0b101, 0, 0b010])
    with pytest.raises(InvalidStructure):
        CoalitionStructure.from_assignment(shared_peer_game, [2])
    with pytest.raises(InvalidStructure):
        CoalitionStructure.from_assignment(shared_peer_game, [0, 1])
    structure = CoalitionStructure.from_blocks(shared_peer_game, [0b010, 0b101])
    assert structure.as_list() == [0]
    assert structure.blocks() == [0b101, 0b010]
