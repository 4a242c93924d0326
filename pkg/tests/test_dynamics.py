"""
Tests for peer best-response dynamics and Nash-stability enumeration
"""
import numpy as np
import pytest

from conftest import peer, provider
from core.config.settings import settings
from core.exceptions import BlockTooLarge, TooLargeForEnumeration
from engine.dynamics import (CONVERGED, CYCLE, MAX_STEPS, BlockIncentive, Policy, VisitLog,
                             best_response_step, enumerate_assignments, is_nash_stable,
                             nash_stable_states, peer_payoffs, simulate, structure_potential)
from game.model import make_game
from game.structure import UNATTACHED, CoalitionStructure


def test_unfair_stable_state_golden(unequal_providers_game):
    game = unequal_providers_game
    trajectory = simulate(game, CoalitionStructure.unattached(game), max_steps=50,
                          threshold=1e-9, seed=7, policy=Policy.ROUND_ROBIN)
    exported = trajectory.as_dict()
    assert exported["states"] == [[None, None], [0, None], [0, 1]]
    assert exported["moves"] == [
        {"peer": 2, "from": None, "to": 0, "payoff_gain": 5.0},
        {"peer": 3, "from": None, "to": 1, "payoff_gain": 2.5},
    ]
    assert exported["outcome"] == {"kind": CONVERGED, "step": 2, "cycle_length": None}
    assert exported["diagnostics"]["identical_peer_spread"] == pytest.approx(2.5)
    assert exported["diagnostics"]["potentials"] == pytest.approx([25.0, 30.0, 32.5])
    assert is_nash_stable(game, trajectory.final, 1e-9)


def test_arrivals_can_hurt_incumbents():
    game = make_game([provider(), peer(10), peer(10)])
    trajectory = simulate(game, CoalitionStructure.unattached(game), max_steps=10, threshold=1e-9, seed=0)
    assert [m.payoff_gain for m in trajectory.moves] == pytest.approx([5.0, 5 / 3])
    assert trajectory.outcome.kind == CONVERGED
    assert trajectory.diagnostics.incumbent_losses == 1
    assert trajectory.diagnostics.identical_peer_spread == pytest.approx(0.0)


def test_potential_rises_by_each_gain(generator):
    for _ in range(15):
        game = generator.random_peer_assisted(2, 3)
        trajectory = simulate(game, CoalitionStructure.unattached(game), max_steps=100,
                              threshold=1e-9, seed=3, policy=Policy.RANDOM_ORDER)
        potentials = trajectory.diagnostics.potentials
        for k, move in enumerate(trajectory.moves):
            assert potentials[k + 1] - potentials[k] == pytest.approx(move.payoff_gain, abs=1e-8)


def test_simulation_agrees_with_enumeration(generator):
    instances = [generator.random_peer_assisted(p, q) for p, q in [(1, 2), (2, 2), (2, 3), (3, 3), (2, 4)]]
    for game in instances:
        stable = {state.encode() for state in nash_stable_states(game, 1e-9)}
        assert stable, "an exact potential guarantees a stable assignment"
        for init in enumerate_assignments(game):
            trajectory = simulate(game, init, max_steps=1_000, threshold=1e-9, seed=1)
            assert trajectory.outcome.kind == CONVERGED
            assert trajectory.final.encode() in stable
            if init.encode() in stable:
                assert trajectory.outcome.step == 0


def test_round_robin_runs_are_deterministic(unequal_providers_game):
    init = CoalitionStructure.unattached(unequal_providers_game)
    runs = [simulate(unequal_providers_game, init, 50, 1e-9, seed=7).as_dict() for _ in range(2)]
    assert runs[0] == runs[1]


def test_random_order_depends_only_on_seed(generator):
    game = generator.random_peer_assisted(2, 4)
    init = CoalitionStructure.unattached(game)
    first = simulate(game, init, 100, 1e-9, seed=42, policy=Policy.RANDOM_ORDER)
    second = simulate(game, init, 100, 1e-9, seed=42, policy=Policy.RANDOM_ORDER)
    assert first.as_dict() == second.as_dict()


def test_step_limit(unequal_providers_game):
    game = unequal_providers_game
    trajectory = simulate(game, CoalitionStructure.unattached(game), max_steps=1, threshold=1e-9, seed=0)
    assert trajectory.outcome.kind == MAX_STEPS
    assert trajectory.outcome.step == 1
    assert len(trajectory.moves) == 1


def test_visit_log_reports_revisits():
    log = VisitLog()
    assert log.record((0, None), 0) is None
    assert log.record((1, None), 1) is None
    assert log.record((0, None), 4) == 0
    assert CYCLE == "cycle"


def test_best_response_prefers_lower_provider_on_ties():
    game = make_game([provider(), provider(), peer(10)])
    moved = best_response_step(game, CoalitionStructure.unattached(game), [2], threshold=1e-9)
    assert moved.move.destination == 0
    assert moved.move.payoff_gain == pytest.approx(5.0)


def test_threshold_blocks_small_gains(unequal_providers_game):
    game = unequal_providers_game
    assert best_response_step(game, CoalitionStructure.unattached(game), [2, 3], threshold=10.0) is None


def test_parallel_scan_matches_serial(monkeypatch, unequal_providers_game):
    game = unequal_providers_game
    init = CoalitionStructure.unattached(game)
    serial = simulate(game, init, 50, 1e-9, seed=7).as_dict()
    monkeypatch.setattr(settings, "THREADS", 3)
    assert simulate(game, init, 50, 1e-9, seed=7).as_dict() == serial


def test_block_payoffs_are_efficient(generator):
    game = generator.random_peer_assisted(2, 3)
    structure = CoalitionStructure.round_robin(game)
    payoffs = peer_payoffs(game, structure)
    for block in structure.blocks():
        members = [i for i in range(game.n_players) if block >> i & 1]
        assert np.sum(payoffs[members]) == pytest.approx(game.worth(block))
    assert sum(game.worth(b) for b in structure.blocks()) == pytest.approx(payoffs.sum())


def test_structure_potential_of_unattached_peers(unequal_providers_game):
    game = unequal_providers_game
    assert structure_potential(game, CoalitionStructure.unattached(game)) == pytest.approx(25.0)


def test_enumeration_bound(monkeypatch, unequal_providers_game):
    assert len(enumerate_assignments(unequal_providers_game)) == 9
    monkeypatch.setattr(settings, "STABILITY_MAX_STATES", 8)
    with pytest.raises(TooLargeForEnumeration):
        enumerate_assignments(unequal_providers_game)


def test_block_size_bound(monkeypatch, shared_peer_game):
    monkeypatch.setattr(settings, "BLOCK_MAX_PLAYERS", 1)
    incentive = BlockIncentive(shared_peer_game)
    with pytest.raises(BlockTooLarge):
        incentive.shares(0b101)


def test_structures_from_blocks(unequal_providers_game):
    game = unequal_providers_game
    structure = CoalitionStructure.from_blocks(game, [0b0101, 0b0010, 0b1000])
    assert structure.as_list() == [0, UNATTACHED]
    assert structure.blocks() == [0b0101, 0b0010, 0b1000]
    assert structure.peers == (2, 3)
