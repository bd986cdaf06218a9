# tests/test_zerosum_solver.py
import pytest

from conftest import property_cases
from src.solver.errors import ContractViolation, OracleInfeasible
from src.solver.game_model import OBJECTIVE_CLASSES
from src.solver.lar_oracle import lar_oracle_solve, lar_update
from src.solver.random_games import random_game
from src.solver.suspect_game import build_arena
from src.solver.utils.bitsets import subsets
from src.solver.zerosum_solver import solve_eve_region


def test_region_of_turn_based_parity_game(turn_based_parity):
    arena = build_arena(turn_based_parity, 0)
    region = solve_eve_region(arena, 0b10)
    assert region.eve_wins(0, 0b11)
    assert region.eve_wins(1, 0b11)
    assert region.eve_wins(2, 0b01)
    assert region.eve_wins(1, 0b01)
    assert not region.eve_wins(2, 0b11)
    assert region.adam_wins(0, 0b11, ("left", "wait"))
    assert not region.adam_wins(0, 0b11, ("right", "wait"))
    with pytest.raises(ContractViolation):
        region.eve_wins(0, 0b01)


def test_matching_pennies_has_no_punishing_region(penny_parity):
    arena = build_arena(penny_parity, 0)
    assert len(arena.eve) == 2
    for losers in (0b01, 0b10, 0b11):
        region = solve_eve_region(arena, losers)
        assert not region.winning_eve_vertices()
    assert len(solve_eve_region(arena, 0).winning_eve_vertices()) == 2


def test_reach_region_tracks_visited_agents(penny_reach):
    arena = build_arena(penny_reach, 0)
    region = solve_eve_region(arena, 0b10)
    # Adam can always send the play to s2 where agent 2 has already won
    assert not region.eve_wins(0, 0b11)
    assert region.eve_wins(1, 0b11)
    assert not region.eve_wins(2, 0b11)


def test_lar_update_moves_state_to_front():
    assert lar_update((0, 1, 2, 3), 2) == ((2, 0, 1, 3), 2)
    assert lar_update((2, 0, 1, 3), 2) == ((2, 0, 1, 3), 0)


def test_oracle_budget(turn_based_parity):
    arena = build_arena(turn_based_parity, 0)
    with pytest.raises(OracleInfeasible) as info:
        lar_oracle_solve(arena, 0b10, budget=3)
    assert info.value.budget == 3


def _compare(arena, losers):
    fixpoint = solve_eve_region(arena, losers)
    oracle = lar_oracle_solve(arena, losers)
    # reach/safety regions also depend on which losers have already met their set
    for visited in subsets(losers if fixpoint.condition.tracked else 0):
        for s, p in arena.eve:
            assert fixpoint.eve_wins(s, p, visited) == oracle.eve_wins(s, p, visited), (s, p, visited, losers)
        for s, p, move in arena.adam:
            assert fixpoint.adam_wins(s, p, move, visited) == oracle.adam_wins(s, p, move, visited), \
                (s, p, move, visited, losers)
    return fixpoint


@pytest.mark.parametrize("kind", OBJECTIVE_CLASSES)
def test_fixpoint_agrees_with_lar_oracle(kind, rng):
    for _ in range(property_cases(4, 200)):
        game = random_game(rng, kind, rng.randint(1, 3), rng.randint(1, 3), 2)
        arena = build_arena(game, 0)
        for losers in subsets((1 << game.n_agents) - 1):
            _compare(arena, losers)


@pytest.mark.parametrize("kind", OBJECTIVE_CLASSES)
def test_more_losers_shrink_eve_region(kind, rng):
    for _ in range(property_cases(6, 10_000)):
        game = random_game(rng, kind, rng.randint(1, 4), rng.randint(1, 3), 2)
        arena = build_arena(game, 0)
        everyone = (1 << game.n_agents) - 1
        regions = {losers: solve_eve_region(arena, losers) for losers in subsets(everyone)}
        assert len(regions[0].winning_eve_vertices()) == len(arena.eve)
        for small in regions:
            for large in subsets(everyone):
                if small & ~large:
                    continue
                for s, p in arena.eve:
                    if regions[large].eve_wins(s, p):
                        assert regions[small].eve_wins(s, p)


@pytest.mark.slow
@pytest.mark.parametrize("kind", OBJECTIVE_CLASSES)
def test_fixpoint_agrees_with_lar_oracle_at_scale(kind, rng):
    for _ in range(property_cases(200, 200)):
        game = random_game(rng, kind, rng.randint(1, 5), rng.randint(1, 3), 2)
        arena = build_arena(game, 0)
        for losers in subsets((1 << game.n_agents) - 1):
            _compare(arena, losers)


@pytest.mark.parametrize("kind", OBJECTIVE_CLASSES)
def test_solving_again_gives_the_same_region(kind, rng):
    for _ in range(property_cases(4, 100)):
        game = random_game(rng, kind, rng.randint(1, 4), rng.randint(1, 3), 2)
        arena = build_arena(game, 0)
        rebuilt = build_arena(game, 0)
        for losers in subsets((1 << game.n_agents) - 1):
            first = solve_eve_region(arena, losers)
            again = solve_eve_region(arena, losers)
            assert again.winning_eve_vertices() == first.winning_eve_vertices()
            fresh = solve_eve_region(rebuilt, losers)
            for s, p in arena.eve:
                assert fresh.eve_wins(s, p) == first.eve_wins(s, p)
            for s, p, move in arena.adam:
                assert again.adam_wins(s, p, move) == first.adam_wins(s, p, move)
