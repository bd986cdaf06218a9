# tests/test_equilibria.py
import pytest

from conftest import property_cases
from src.solver.equilibria import (
    EquilibriumSolver, constrained_ne_exists, ne_exists, podp, podp_buchi, podp_count_variant,
    swdp, swdp_buchi, verify_ne_lasso,
)
from src.solver.errors import ContractViolation
from src.solver.game_io import validate_game
from src.solver.game_model import OBJECTIVE_CLASSES, Lasso, WinnerProfile, payoff_of_lasso
from src.solver.graph_analysis import achievable_profiles, default_bound, enumerate_lassos, pareto_front
from src.solver.random_games import random_game


def test_one_state_game(one_state):
    decision = ne_exists(one_state, 0)
    assert decision.answer
    assert decision.profile.to_string() == "1"
    assert decision.witness == Lasso((), (0,))
    assert swdp(one_state, 0, 1).answer
    assert podp(one_state, 0).answer


def test_matching_pennies_have_no_equilibrium(penny_reach, penny_parity):
    for game in (penny_reach, penny_parity):
        assert not ne_exists(game, 0).answer
        assert not swdp(game, 0, 0).answer
        assert not podp(game, 0).answer
        assert not podp_count_variant(game, 0).answer


def test_buchi_pennies(penny_reach):
    from src.solver.game_model import Buchi
    game = penny_reach.with_objectives([Buchi(0b010), Buchi(0b100)])
    assert not ne_exists(game, 0).answer
    assert not swdp_buchi(game, 0, 0).answer


def test_turn_based_parity_equilibria(turn_based_parity):
    game = turn_based_parity
    assert verify_ne_lasso(game, 0, Lasso.from_names(game, ["s0"], ["s1"]))
    assert not verify_ne_lasso(game, 0, Lasso.from_names(game, ["s0"], ["s2"]))
    decision = constrained_ne_exists(game, 0, WinnerProfile.from_string("00"), WinnerProfile.from_string("11"))
    assert decision.answer
    assert decision.witness.to_names(game) == {"stem": ["s0"], "cycle": ["s1"]}
    assert decision.profile.to_string() == "10"
    assert not constrained_ne_exists(game, 0, WinnerProfile.from_string("01"),
                                     WinnerProfile.from_string("11")).answer
    assert podp(game, 0).answer


def test_decision_document(turn_based_parity):
    doc = ne_exists(turn_based_parity, 0).to_document(turn_based_parity)
    assert list(doc) == ["problem", "answer", "witness", "method", "stats"]
    assert doc["problem"] == "ne" and doc["answer"] is True
    assert doc["witness"] == {"stem": ["s0"], "cycle": ["s1"], "profile": "10"}
    assert list(doc["stats"]) == sorted(doc["stats"])


def test_contract_checks(turn_based_parity, penny_parity):
    solver = EquilibriumSolver(turn_based_parity, 0)
    with pytest.raises(ContractViolation):
        solver.swdp(3)
    with pytest.raises(ContractViolation):
        solver.constrained_ne_exists(WinnerProfile.from_string("1"), WinnerProfile.from_string("11"))
    with pytest.raises(ContractViolation):
        solver.constrained_ne_exists(WinnerProfile.from_string("10"), WinnerProfile.from_string("01"))
    with pytest.raises(ContractViolation):
        solver.swdp_buchi(1)
    with pytest.raises(ContractViolation):
        EquilibriumSolver(penny_parity, 0, backend="magic")
    with pytest.raises(ContractViolation):
        solver.verify_ne_lasso(Lasso((), (1,)))


def test_buchi_rank_procedures(buchi_ranks):
    game = buchi_ranks
    first = swdp(game, 0, 1)
    assert first.answer and first.profile.to_string() == "010"
    assert first.witness.to_names(game) == {"stem": [], "cycle": ["a", "b"]}
    assert swdp_buchi(game, 0, 1).answer
    # only the maximal components are scanned without refinement
    assert not swdp_buchi(game, 0, 1, refine=False).answer
    assert not swdp(game, 0, 2).answer
    assert not swdp_buchi(game, 0, 2).answer
    assert not podp(game, 0).answer
    assert not podp_count_variant(game, 0).answer
    assert not podp_buchi(game, 0).answer


def test_scc_profiles(buchi_ranks):
    solver = EquilibriumSolver(buchi_ranks, 0)
    literal = [(p.to_string(), c) for p, c in solver.scc_profiles(refine=False)]
    assert literal == [("110", 0b0111), ("001", 0b1000)]
    refined = {p.to_string() for p, _ in solver.scc_profiles(refine=True)}
    assert refined == {"110", "010", "001"}


def _random_cases(rng, kinds, cases, max_states=3):
    for kind in kinds:
        for _ in range(cases):
            yield random_game(rng, kind, rng.randint(1, max_states), rng.randint(1, 3), 2)


def _decisions(game, backend):
    solver = EquilibriumSolver(game, 0, backend=backend)
    out = [solver.ne_exists().answer, solver.podp().answer]
    out += [solver.swdp(v).answer for v in range(game.n_agents + 1)]
    return out


def test_backends_agree(rng):
    for game in _random_cases(rng, OBJECTIVE_CLASSES, property_cases(3, 200)):
        assert _decisions(game, "fixpoint") == _decisions(game, "oracle")


@pytest.mark.slow
def test_backends_agree_at_scale(rng):
    for game in _random_cases(rng, OBJECTIVE_CLASSES, property_cases(200, 200), max_states=5):
        assert _decisions(game, "fixpoint") == _decisions(game, "oracle")


def test_witnesses_are_short_and_verified(rng):
    for game in _random_cases(rng, OBJECTIVE_CLASSES, property_cases(4, 500), max_states=4):
        solver = EquilibriumSolver(game, 0)
        decision = solver.ne_exists()
        if not decision.answer:
            continue
        lasso = decision.witness
        bound = default_bound(game)
        assert len(lasso.stem) <= bound and len(lasso.cycle) <= bound
        assert payoff_of_lasso(game, lasso) == decision.profile
        assert solver.verify_ne_lasso(lasso)


def test_bounded_lassos_agree_with_profile_search(rng):
    for game in _random_cases(rng, OBJECTIVE_CLASSES, property_cases(3, 200)):
        solver = EquilibriumSolver(game, 0)
        for lasso in enumerate_lassos(game, 0, 3, 3):
            if solver.verify_ne_lasso(lasso):
                assert solver.ne_witness(payoff_of_lasso(game, lasso)) is not None


def test_swdp_is_monotone_and_matches_ne_exists(rng):
    for game in _random_cases(rng, OBJECTIVE_CLASSES, property_cases(3, 10_000)):
        solver = EquilibriumSolver(game, 0)
        answers = [solver.swdp(v).answer for v in range(game.n_agents + 1)]
        assert answers == sorted(answers, reverse=True)
        assert answers[0] == solver.ne_exists().answer
        if solver.podp().answer:
            assert answers[0]


def test_buchi_fast_path_matches_generic(rng):
    for game in _random_cases(rng, ["buchi"], property_cases(10, 100), max_states=4):
        solver = EquilibriumSolver(game, 0)
        for v in range(game.n_agents + 1):
            assert solver.swdp_buchi(v).answer == solver.swdp(v).answer


def test_parallel_profile_checks_match(buchi_ranks):
    serial = EquilibriumSolver(buchi_ranks, 0).swdp(1)
    parallel = EquilibriumSolver(buchi_ranks, 0, workers=2).swdp(1)
    assert parallel.answer == serial.answer
    assert parallel.witness == serial.witness and parallel.profile == serial.profile


def _stay_or_wander():
    # s0 -> s1; at s1 the agent may stay or wander to s2 and come back; Buchi on s1
    return validate_game({
        "states": ["s0", "s1", "s2"],
        "agents": 1,
        "actions": ["go", "stay"],
        "available": {"s0": [["go"]], "s1": [["go", "stay"]], "s2": [["go"]]},
        "transitions": [
            {"from": "s0", "move": ["go"], "to": "s1"},
            {"from": "s1", "move": ["stay"], "to": "s1"},
            {"from": "s1", "move": ["go"], "to": "s2"},
            {"from": "s2", "move": ["go"], "to": "s1"},
        ],
        "objectives": [{"type": "buchi", "accept": ["s1"]}],
        "initial": "s0",
    })


def test_witness_is_the_least_lasso():
    game = _stay_or_wander()
    decision = ne_exists(game, 0)
    assert decision.answer and decision.profile.to_string() == "1"
    assert decision.witness.to_names(game) == {"stem": ["s0"], "cycle": ["s1"]}


def _first_verified(solver, lassos, keep=lambda lasso: True):
    return next((lasso for lasso in lassos if keep(lasso) and solver.verify_ne_lasso(lasso)), None)


def test_witness_is_the_first_verified_enumerated_lasso(rng):
    for game in _random_cases(rng, OBJECTIVE_CLASSES, property_cases(3, 200)):
        solver = EquilibriumSolver(game, 0)
        decision = solver.ne_exists()
        if not decision.answer:
            continue
        bound = default_bound(game)
        witness = decision.witness
        first = _first_verified(solver, enumerate_lassos(game, 0))
        assert first is not None and witness.sort_key <= first.sort_key
        if len(witness.stem) <= bound and len(witness.cycle) <= bound:
            assert witness == first
        for v in range(game.n_agents + 1):
            welfare = solver.swdp(v)
            if welfare.answer:
                rich = _first_verified(solver, enumerate_lassos(game, 0),
                                       lambda l: payoff_of_lasso(game, l).sw >= v)
                assert welfare.witness.sort_key <= rich.sort_key
                if len(welfare.witness.stem) <= bound and len(welfare.witness.cycle) <= bound:
                    assert rich == welfare.witness


@pytest.mark.slow
def test_doubled_bounds_find_nothing_new(rng):
    for game in _random_cases(rng, OBJECTIVE_CLASSES, property_cases(50, 50), max_states=2):
        solver = EquilibriumSolver(game, 0)
        bound = default_bound(game)
        short = _first_verified(solver, enumerate_lassos(game, 0, bound, bound))
        long = _first_verified(solver, enumerate_lassos(game, 0, 2 * bound, 2 * bound))
        assert (short is None) == (long is None) == (not solver.ne_exists().answer)


def test_yes_witnesses_meet_their_constraint(rng):
    for game in _random_cases(rng, OBJECTIVE_CLASSES, property_cases(3, 300)):
        solver = EquilibriumSolver(game, 0)
        n = game.n_agents
        achievable = achievable_profiles(game, 0)
        for profile in achievable:
            cne = solver.constrained_ne_exists(profile, profile)
            if cne.answer:
                assert cne.profile == profile == payoff_of_lasso(game, cne.witness)
                assert solver.verify_ne_lasso(cne.witness)
                assert solver.swdp(profile.sw).answer
        for v in range(n + 1):
            welfare = solver.swdp(v)
            if welfare.answer:
                assert payoff_of_lasso(game, welfare.witness).sw >= v
                assert solver.verify_ne_lasso(welfare.witness)
        optimal = solver.podp()
        if optimal.answer:
            assert optimal.profile in pareto_front(achievable)
            assert payoff_of_lasso(game, optimal.witness) == optimal.profile
            assert solver.verify_ne_lasso(optimal.witness)
