# src/solver/lar_oracle.py
"""Slow independent oracle for Eve's region.

The whole winning condition (limit suspects, visited sets, inf states) is
compiled into a parity condition with a latest appearance record over game
states and solved with Zielonka's algorithm on the explicit product.
"""
import logging
from collections import deque
from typing import Dict, Tuple

from src.solver.errors import OracleInfeasible
from src.solver.suspect_game import SuspectArena
from src.solver.turn_based import ADAM, EVE, TurnBasedGame, zielonka
from src.solver.utils.bitsets import iter_bits, mask_of, subsets
from src.solver.zerosum_solver import EveCondition, WinningRegion

logger = logging.getLogger(__name__)

DEFAULT_BUDGET = 1_000_000

Record = Tuple[int, ...]


def lar_update(record: Record, state: int) -> Tuple[Record, int]:
    """Move `state` to the front; return the new record and its old position (the hit)."""
    hit = record.index(state)
    return (state,) + record[:hit] + record[hit + 1:], hit


def _eve_wins_limit(condition: EveCondition, inf_states: int, suspects: int, visited: int) -> bool:
    return all(condition.agent_loses(i, inf_states, visited)
               for i in iter_bits(suspects & condition.losers))


def lar_oracle_solve(arena: SuspectArena, losers: int, budget: int = DEFAULT_BUDGET) -> WinningRegion:
    condition = EveCondition.of(arena.game, losers)
    n = arena.game.n_states
    identity = tuple(range(n))
    tg = TurnBasedGame()
    ids: Dict[tuple, int] = {}
    priority = []
    queue = deque()

    def vertex(key: tuple) -> int:
        if key not in ids:
            if len(ids) >= budget:
                raise OracleInfeasible(budget, len(ids) + 1)
            owner = EVE if key[0] == "e" else ADAM
            ids[key] = tg.add_vertex(owner)
            if owner == EVE:
                _, e, visited, record, hit = key
                s, p = arena.eve[e]
                good = _eve_wins_limit(condition, mask_of(record[:hit + 1]), p, visited)
                priority.append(2 * hit + (0 if good else 1))
            else:
                priority.append(0)
            queue.append(key)
        return ids[key]

    def enter(e: int, visited: int, record: Record) -> tuple:
        s, _ = arena.eve[e]
        if condition.tracked:
            visited |= condition.hits[s]
        record, hit = lar_update(record, s)
        return ("e", e, visited, record, hit)

    def visited_sets(s: int):
        if not condition.tracked:
            return (0,)
        base = condition.hits[s]
        return tuple(base | extra for extra in subsets(losers & ~base))

    seeds_eve: Dict[Tuple[int, int], int] = {}
    seeds_adam: Dict[Tuple[int, int], int] = {}
    for e, (s, _) in enumerate(arena.eve):
        for b in visited_sets(s):
            seeds_eve[e, b] = vertex(enter(e, b, identity))
    for a, (s, _, _) in enumerate(arena.adam):
        for b in visited_sets(s):
            seeds_adam[a, b] = vertex(("a", a, b, identity))

    while queue:
        key = queue.popleft()
        v = ids[key]
        if key[0] == "e":
            _, e, visited, record, _ = key
            for a in arena.eve_edges[e]:
                tg.add_edge(v, vertex(("a", a, visited, record)))
        else:
            _, a, visited, record = key
            for e in arena.adam_edges[a]:
                tg.add_edge(v, vertex(enter(e, visited, record)))

    logger.debug("[LarOracle] product has %d vertices (budget %d)", tg.n, budget)
    tg.check_total()
    won, _ = zielonka(tg, priority)
    return WinningRegion(arena, condition,
                         {key: v in won for key, v in seeds_eve.items()},
                         {key: v in won for key, v in seeds_adam.items()},
                         clip=False, method="lar-oracle")
