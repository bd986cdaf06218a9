# tests/test_game_model.py
import json
from itertools import product

import pytest

from conftest import property_cases
from src.solver.errors import ContractViolation, GameValidationError
from src.solver.game_io import dump_game, game_to_document, load_game, validate_game
from src.solver.game_model import (
    OBJECTIVE_CLASSES, Buchi, CoBuchi, Lasso, Muller, Parity, Reach, Safety, WinnerProfile,
    check_lasso, cobuchi_as_parity, complement_objective, eval_objective, payoff_of_lasso,
)
from src.solver.graph_analysis import enumerate_lassos
from src.solver.random_games import random_game, random_objective


def test_eval_objective_per_class():
    occ, inf = 0b0111, 0b0110
    assert eval_objective(Reach(0b0001), occ, inf)
    assert not eval_objective(Safety(0b0001), occ, inf)
    assert not eval_objective(Buchi(0b0001), occ, inf)
    assert eval_objective(CoBuchi(0b0001), occ, inf)
    assert eval_objective(Parity((1, 2, 3, 0)), occ, inf)        # min over {s1, s2} is 2
    assert not eval_objective(Parity((0, 3, 5, 0)), occ, inf)
    muller = Muller(("r", "g", "g", "r"), frozenset({frozenset({"g"})}))
    assert eval_objective(muller, occ, inf)
    assert not eval_objective(muller, occ, 0b0011)


def test_eval_objective_rejects_bad_sets():
    with pytest.raises(ContractViolation):
        eval_objective(Buchi(1), 0b01, 0)
    with pytest.raises(ContractViolation):
        eval_objective(Buchi(1), 0b01, 0b10)


def test_complement_objective_flips_every_outcome(rng):
    n_states = 4
    for kind in OBJECTIVE_CLASSES:
        for _ in range(property_cases(5, 200)):
            obj = random_objective(rng, kind, n_states)
            other = complement_objective(obj)
            for inf in range(1, 1 << n_states):
                for extra in range(1 << n_states):
                    occ = inf | extra
                    assert eval_objective(other, occ, inf) != eval_objective(obj, occ, inf)


def test_cobuchi_as_parity_agrees():
    obj = CoBuchi(0b0101)
    parity = cobuchi_as_parity(obj, 4)
    assert parity.priority == (1, 2, 1, 2)
    for inf in range(1, 16):
        assert parity.evaluate(inf, inf) == obj.evaluate(inf, inf)


def test_winner_profile_basics():
    p = WinnerProfile.from_string("101")
    assert p.n == 3 and p.sw == 2 and p.mask == 0b101 and p.losers_mask == 0b010
    assert str(p) == "101"
    assert WinnerProfile.from_mask(0b101, 3) == p
    assert WinnerProfile.from_string("100") <= p
    assert not WinnerProfile.from_string("010") <= p
    assert p >= WinnerProfile.zeros(3)
    with pytest.raises(ContractViolation):
        WinnerProfile.from_string("12")
    with pytest.raises(ContractViolation):
        WinnerProfile.from_string("")


@pytest.mark.parametrize("stem,cycle,expected", [
    ((0, 1, 2), (3, 2), ((0, 1), (2, 3))),
    ((), (0, 0), ((), (0,))),
    ((0,), (0,), ((), (0,))),
    ((0,), (1, 2, 1, 2), ((0,), (1, 2))),
    ((), (1, 0), ((1,), (0, 1))),
    ((2,), (1, 0), ((2, 1), (0, 1))),
    ((0,), (2, 1, 2, 1), ((0, 2), (1, 2))),
    ((3, 1), (2, 0, 1), ((3, 1, 2), (0, 1, 2))),
])
def test_lasso_canonical_form(stem, cycle, expected):
    lasso = Lasso(stem, cycle).canonical()
    assert (lasso.stem, lasso.cycle) == expected
    assert lasso.is_canonical()


def _unrolled_winners(game, lasso):
    """Winners read off a finite unrolling: the cycle is walked through twice after the stem."""
    head = len(lasso.stem) + len(lasso.cycle)
    word = lasso.unroll(head + len(lasso.cycle))
    tail = set(word[head:])
    bits = []
    for obj in game.objectives:
        if isinstance(obj, Reach):
            won = any(obj.states >> s & 1 for s in word)
        elif isinstance(obj, Safety):
            won = not any(obj.states >> s & 1 for s in word)
        elif isinstance(obj, Buchi):
            won = any(obj.states >> s & 1 for s in tail)
        elif isinstance(obj, CoBuchi):
            won = not any(obj.states >> s & 1 for s in tail)
        elif isinstance(obj, Parity):
            won = min(obj.priority[s] for s in tail) % 2 == 0
        else:
            won = frozenset(obj.colours[s] for s in tail) in obj.family
        bits.append(int(won))
    return WinnerProfile(tuple(bits))


def test_payoff_matches_unrolled_play(rng):
    for kind in OBJECTIVE_CLASSES:
        for _ in range(property_cases(5, 200)):
            game = random_game(rng, kind, rng.randint(1, 4), rng.randint(1, 3), 2)
            for lasso in enumerate_lassos(game, 0, 2, 3):
                assert payoff_of_lasso(game, lasso) == _unrolled_winners(game, lasso)


def test_payoff_ignores_rotation_and_pumping(rng):
    for kind in OBJECTIVE_CLASSES:
        for _ in range(property_cases(5, 200)):
            game = random_game(rng, kind, rng.randint(1, 4), rng.randint(1, 3), 2)
            for lasso in enumerate_lassos(game, 0, 2, 3):
                stem, cycle = lasso.stem, lasso.cycle
                payoff = payoff_of_lasso(game, lasso)
                same_play = [Lasso(stem + cycle[:k], cycle[k:] + cycle[:k]) for k in range(len(cycle))]
                same_play += [Lasso(stem, cycle * 2), Lasso(stem + cycle, cycle)]
                for other in same_play:
                    assert payoff_of_lasso(game, other) == payoff
                    assert other.canonical() == lasso


def test_lasso_needs_a_cycle():
    with pytest.raises(ContractViolation):
        Lasso((0,), ())


def test_lasso_occ_inf_and_unroll():
    lasso = Lasso((0, 1), (2, 3))
    assert lasso.source == 0
    assert lasso.occ == 0b1111 and lasso.inf == 0b1100
    assert lasso.unroll(7) == (0, 1, 2, 3, 2, 3, 2)
    assert list(lasso.edges()) == [(0, 1), (1, 2), (2, 3), (3, 2)]
    assert Lasso((), (4, 5)).source == 4


def test_payoff_of_lasso(turn_based_parity):
    game = turn_based_parity
    assert payoff_of_lasso(game, Lasso.from_names(game, ["s0"], ["s1"])).to_string() == "10"
    assert payoff_of_lasso(game, Lasso.from_names(game, ["s0"], ["s2"])).to_string() == "01"
    with pytest.raises(ContractViolation, match="invalid lasso edge s1 -> s0"):
        check_lasso(game, Lasso.from_names(game, [], ["s1", "s0"]))


def test_game_queries(penny_reach):
    game = penny_reach
    assert game.n_states == 3 and game.n_agents == 2
    assert game.moves(0) == (("h", "h"), ("h", "t"), ("t", "h"), ("t", "t"))
    assert game.successors(0) == (1, 2)
    assert game.successor(0, ("t", "t")) == 1
    assert game.moves_between(0, 2) == (("h", "t"), ("t", "h"))
    assert game.objective_class == "reach"
    assert not game.turn_based_hint
    assert game.table_size == 6
    with pytest.raises(ContractViolation):
        game.successor(1, ("t", "h"))
    with pytest.raises(ContractViolation):
        game.index("nowhere")


def test_turn_based_owner(turn_based_parity):
    assert turn_based_parity.turn_based_hint
    assert turn_based_parity.owner(0) == 0
    assert turn_based_parity.owner(1) is None


def test_mixed_objective_class_is_rejected(one_state):
    game = one_state.with_objectives([Reach(1)])
    assert game.objective_class == "reach"
    mixed = one_state.with_objectives([Reach(1), Buchi(1)], n_agents=2,
                                      available=((("a",), ("a",)),),
                                      table=({("a", "a"): 0},))
    with pytest.raises(ContractViolation, match="mixed"):
        mixed.objective_class


def test_round_trip_fixtures(tmp_path, fixture_path):
    for name in ("one_state.json", "penny_reach.json", "penny_parity.json",
                 "turn_based_parity.json", "buchi_ranks.json"):
        game = load_game(fixture_path(name))
        out = tmp_path / name
        dump_game(game, str(out))
        assert load_game(str(out)) == game


def test_round_trip_random_games(rng):
    for kind in OBJECTIVE_CLASSES:
        for _ in range(property_cases(5, 100)):
            game = random_game(rng, kind, rng.randint(1, 5), rng.randint(1, 3), rng.randint(1, 2))
            assert validate_game(json.loads(json.dumps(game_to_document(game)))) == game


def test_extra_keys_are_kept(one_state):
    doc = game_to_document(one_state, threshold=1)
    assert doc["threshold"] == 1
    assert validate_game(doc) == one_state


def test_validation_collects_every_violation(fixture_path):
    with pytest.raises(GameValidationError) as info:
        load_game(fixture_path("missing_transition.json"))
    assert "missing transition at s0 for move (b)" in info.value.violations

    doc = game_to_document(load_game(fixture_path("penny_reach.json")))
    doc["objectives"] = [{"type": "reach", "target": ["s9"]}]
    doc["available"]["s1"] = [[], ["h"]]
    with pytest.raises(GameValidationError) as info:
        validate_game(doc)
    violations = info.value.violations
    assert "expected 2 objectives, got 1" in violations
    assert "objective 1: unknown state s9" in violations
    assert "empty availability at s1 for agent 1" in violations


def test_schema_errors_become_validation_errors():
    with pytest.raises(GameValidationError) as info:
        validate_game({"states": ["s0"], "agents": 0, "actions": ["a"], "available": {},
                       "transitions": [], "objectives": []})
    assert any(v.startswith("agents") for v in info.value.violations)

    with pytest.raises(GameValidationError):
        validate_game({"states": ["s0"], "agents": 1, "actions": ["a"],
                       "available": {"s0": [["a"]]},
                       "transitions": [{"from": "s0", "move": ["a"], "to": "s0"}],
                       "objectives": [{"type": "rabin", "pairs": []}]})


def test_missing_parity_priority_is_reported(one_state):
    doc = game_to_document(one_state)
    doc["objectives"] = [{"type": "parity", "priority": {}}]
    with pytest.raises(GameValidationError, match="missing priority for state s0"):
        validate_game(doc)


def test_muller_family_with_unknown_colour(one_state):
    doc = game_to_document(one_state)
    doc["objectives"] = [{"type": "muller", "colors": {"s0": "red"}, "family": [["blue"]]}]
    with pytest.raises(GameValidationError, match="unknown colour"):
        validate_game(doc)


def test_every_move_has_a_successor(rng):
    for kind in OBJECTIVE_CLASSES:
        game = random_game(rng, kind, 4, 3, 2)
        for s in range(game.n_states):
            for move in product(*game.available[s]):
                assert 0 <= game.successor(s, move) < game.n_states
