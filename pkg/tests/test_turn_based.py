# tests/test_turn_based.py
import pytest

from conftest import property_cases
from src.solver.errors import InvariantViolation
from src.solver.turn_based import (
    ADAM, EVE, TurnBasedGame, attractor, generalized_buchi, solve_buchi, solve_cobuchi,
    solve_muller, zielonka,
)


def _game(owners, edges):
    tg = TurnBasedGame()
    for owner in owners:
        tg.add_vertex(owner)
    for u, v in edges:
        tg.add_edge(u, v)
    return tg


def _random_game(rng, size):
    owners = [rng.choice((EVE, ADAM)) for _ in range(size)]
    edges = set()
    for u in range(size):
        for v in rng.sample(range(size), rng.randint(1, min(3, size))):
            edges.add((u, v))
    return _game(owners, sorted(edges))


def test_attractor_counts_adam_choices():
    # 0 (Eve) -> 1 | 2; 1 (Adam) -> 2 | 3; 2 target; 3 sink
    tg = _game([EVE, ADAM, EVE, EVE], [(0, 1), (0, 2), (1, 2), (1, 3), (2, 2), (3, 3)])
    assert attractor(tg, EVE, [2]) == {0, 2}
    assert attractor(tg, ADAM, [3]) == {1, 3}
    assert attractor(tg, EVE, [2], within={1, 2}) == {1, 2}


def test_buchi_and_cobuchi():
    # Eve at 0 chooses between looping on the accepting 1 or the sink 2
    tg = _game([EVE, EVE, ADAM], [(0, 1), (0, 2), (1, 0), (2, 2)])
    assert solve_buchi(tg, EVE, {1}) == {0, 1}
    assert solve_cobuchi(tg, EVE, {1}) == {0, 1, 2}
    assert solve_cobuchi(tg, ADAM, {2}) == set()


def test_zielonka_small():
    # max parity, Eve wins on even
    tg = _game([EVE, ADAM, EVE], [(0, 1), (1, 0), (1, 2), (2, 2)])
    # Adam escapes from 1 to the odd loop at 2
    assert zielonka(tg, [2, 0, 1]) == (set(), {0, 1, 2})
    assert zielonka(tg, [2, 0, 4]) == ({0, 1, 2}, set())


def test_generalized_buchi_needs_every_target():
    # Eve alternates 1 and 2 from 0; Adam owns nothing
    tg = _game([EVE, EVE, EVE, EVE], [(0, 1), (0, 2), (1, 0), (2, 0), (3, 3)])
    assert generalized_buchi(tg, [{1}, {2}]) == {0, 1, 2}
    assert generalized_buchi(tg, [{1}, {3}]) == set()


def test_check_total_reports_dead_ends():
    tg = _game([EVE, EVE], [(0, 1)])
    with pytest.raises(InvariantViolation, match="without successors"):
        tg.check_total()
    _game([EVE, ADAM], [(0, 1), (1, 0)]).check_total()


def test_zielonka_is_a_partition_and_matches_mcnaughton(rng):
    for _ in range(property_cases(30, 10_000)):
        size = rng.randint(1, 7)
        tg = _random_game(rng, size)
        priority = [rng.randint(0, 4) for _ in range(size)]
        won, lost = zielonka(tg, priority)
        assert won | lost == set(range(size)) and not won & lost
        muller_won, muller_lost = solve_muller(tg, priority, lambda colours: max(colours) % 2 == 0)
        assert muller_won == won and muller_lost == lost


def test_generalized_buchi_matches_intersection_for_one_target(rng):
    for _ in range(property_cases(30, 10_000)):
        size = rng.randint(1, 7)
        tg = _random_game(rng, size)
        target = {v for v in range(size) if rng.random() < 0.4}
        assert generalized_buchi(tg, [target]) == solve_buchi(tg, EVE, target)
        assert generalized_buchi(tg, [target, target]) == solve_buchi(tg, EVE, target)


def _naive_attractor(tg, player, target, inside):
    attr = {v for v in target if v in inside}
    while True:
        grown = set(attr)
        for u in inside - attr:
            succ = [w for w in tg.succ[u] if w in inside]
            if tg.owner[u] == player and any(w in attr for w in succ):
                grown.add(u)
            elif tg.owner[u] != player and succ and all(w in attr for w in succ):
                grown.add(u)
        if grown == attr:
            return attr
        attr = grown


def test_attractor_matches_naive_fixpoint(rng):
    for _ in range(property_cases(50, 10_000)):
        size = rng.randint(1, 8)
        tg = _random_game(rng, size)
        target = set(rng.sample(range(size), rng.randint(0, size)))
        inside = set(rng.sample(range(size), rng.randint(1, size))) | target
        for player in (EVE, ADAM):
            assert attractor(tg, player, target) == _naive_attractor(tg, player, target, tg.vertices())
            assert attractor(tg, player, target, inside) == _naive_attractor(tg, player, target, inside)
