# src/solver/random_games.py
"""Seeded random concurrent games for differential tests and the arena census."""
import random
from itertools import product
from typing import List, Optional

from src.solver.errors import ContractViolation
from src.solver.game_model import (
    BUCHI, COBUCHI, MULLER, PARITY, REACH, SAFETY,
    Buchi, CoBuchi, ConcurrentGame, Muller, Objective, Parity, Reach, Safety,
)

ACTION_NAMES = ("a", "b", "c", "d")
COLOURS = ("red", "green", "blue")


def random_objective(rng: random.Random, kind: str, n_states: int, max_priority: int = 3) -> Objective:
    if kind in (REACH, SAFETY, BUCHI, COBUCHI):
        states = rng.getrandbits(n_states)
        return {REACH: Reach, SAFETY: Safety, BUCHI: Buchi, COBUCHI: CoBuchi}[kind](states)
    if kind == PARITY:
        return Parity(tuple(rng.randint(0, max_priority) for _ in range(n_states)))
    if kind == MULLER:
        palette = COLOURS[:rng.randint(1, len(COLOURS))]
        colours = tuple(rng.choice(palette) for _ in range(n_states))
        used = sorted(set(colours))
        candidates = []
        for picks in product((False, True), repeat=len(used)):
            chosen = frozenset(c for c, keep in zip(used, picks) if keep)
            if chosen:
                candidates.append(chosen)
        family = frozenset(c for c in candidates if rng.random() < 0.5)
        return Muller(colours, family)
    raise ContractViolation(f"unknown objective class {kind}")


def random_game(rng: random.Random, kind: str, n_states: int = 4, n_agents: int = 2,
                n_actions: int = 2, turn_based: bool = False,
                objectives: Optional[List[Objective]] = None) -> ConcurrentGame:
    """A total game over states s0..s{n-1}; every agent gets 1..n_actions actions per state.

    With `turn_based` one agent (picked at random per state) owns the state and
    the others only have the first action.
    """
    if n_states < 1 or n_agents < 1 or not 1 <= n_actions <= len(ACTION_NAMES):
        raise ContractViolation("random games need at least one state, agent and action")
    states = tuple(f"s{k}" for k in range(n_states))
    actions = ACTION_NAMES[:n_actions]
    available, table = [], []
    for _ in range(n_states):
        if turn_based:
            owner = rng.randrange(n_agents)
            per_agent = tuple(actions[:rng.randint(1, n_actions)] if i == owner else actions[:1]
                              for i in range(n_agents))
        else:
            per_agent = tuple(actions[:rng.randint(1, n_actions)] for _ in range(n_agents))
        available.append(per_agent)
        table.append({move: rng.randrange(n_states) for move in product(*per_agent)})
    if objectives is None:
        objectives = [random_objective(rng, kind, n_states) for _ in range(n_agents)]
    return ConcurrentGame(states, n_agents, actions, tuple(available), tuple(table),
                          tuple(objectives), initial=0)
