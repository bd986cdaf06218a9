# src/solver/zerosum_solver.py
"""Eve's winning region in the suspect arena for a loser set L.

Eve wins a play when every agent of L that stays a suspect forever loses the
projected play. Reach/safety get a monotone "visited" bookkeeping set B,
Buchi is a single coBuchi fixpoint, and coBuchi/parity/Muller are solved layer
by layer over suspect sets, smallest first.
"""
import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, FrozenSet, Hashable, List, Optional, Set, Tuple

from src.solver.errors import ContractViolation
from src.solver.game_model import (
    BUCHI, COBUCHI, MULLER, PARITY, REACH, SAFETY, ConcurrentGame, Move, Muller, Parity,
)
from src.solver.suspect_game import SuspectArena
from src.solver.turn_based import (
    ADAM, EVE, TurnBasedGame, attractor, generalized_buchi, solve_cobuchi, solve_muller, zielonka,
)
from src.solver.utils.bitsets import bits_list, iter_bits, subsets

logger = logging.getLogger(__name__)

WIN_SINK = "win"
LOSE_SINK = "lose"


@dataclass(frozen=True)
class EveCondition:
    """Loser set plus the per-state bookkeeping the solvers need."""
    game: ConcurrentGame
    losers: int
    kind: str
    hits: Tuple[int, ...]       # state -> agents of L whose reach/safety set contains it

    @classmethod
    def of(cls, game: ConcurrentGame, losers: int) -> "EveCondition":
        kind = game.objective_class
        hits = [0] * game.n_states
        if kind in (REACH, SAFETY):
            for i in iter_bits(losers):
                for s in iter_bits(game.objectives[i].states):
                    hits[s] |= 1 << i
        return cls(game, losers, kind, tuple(hits))

    @property
    def tracked(self) -> bool:
        return self.kind in (REACH, SAFETY)

    def agent_loses(self, i: int, inf_states: int, visited: int) -> bool:
        """Does agent i lose a play with these inf states (and visited reach/safety sets)?"""
        obj = self.game.objectives[i]
        if self.kind == REACH:
            return not visited >> i & 1
        if self.kind == SAFETY:
            return bool(visited >> i & 1)
        return not obj.evaluate(inf_states, inf_states)


@dataclass
class WinningRegion:
    """Eve's region over (arena vertex, visited set) pairs.

    `visited` is the set of loser agents whose reach/safety set has been met so
    far; it is ignored for the other classes. `clip` says whether the solver
    keyed its vertices by visited agents that are still suspects only.
    """
    arena: SuspectArena
    condition: EveCondition
    eve_win: Dict[Tuple[int, int], bool] = field(default_factory=dict)
    adam_win: Dict[Tuple[int, int], bool] = field(default_factory=dict)
    clip: bool = True
    method: str = "fixpoint"

    def _visited(self, state: int, suspects: int, visited: int) -> int:
        if not self.condition.tracked:
            return 0
        visited = (visited | self.condition.hits[state]) & self.condition.losers
        return visited & suspects if self.clip else visited

    def eve_wins(self, state: int, suspects: int, visited: int = 0) -> bool:
        e = self.arena.eve_id(state, suspects)
        if e is None:
            raise ContractViolation("no such eve vertex in the arena")
        return self.eve_win[e, self._visited(state, suspects, visited)]

    def adam_wins(self, state: int, suspects: int, move: Move, visited: int = 0) -> bool:
        """Whether Eve wins from the Adam vertex (state, suspects, move)."""
        a = self.arena.adam_id(state, suspects, move)
        if a is None:
            raise ContractViolation("no such adam vertex in the arena")
        return self.adam_win[a, self._visited(state, suspects, visited)]

    def winning_eve_vertices(self) -> Set[Tuple[int, int]]:
        return {key for key, won in self.eve_win.items() if won}

    def size(self) -> int:
        return len(self.eve_win) + len(self.adam_win)


def _visited_sets(condition: EveCondition, state: int, suspects: int):
    """Consistent bookkeeping sets at a vertex: supersets of the hits, inside P and L."""
    if not condition.tracked:
        yield 0
        return
    scope = suspects & condition.losers
    base = condition.hits[state] & scope
    for extra in subsets(scope & ~base):
        yield base | extra


def _solve_occurrence(arena: SuspectArena, condition: EveCondition) -> WinningRegion:
    """Reach and safety: augment with B, then one coBuchi fixpoint on the product."""
    tg = TurnBasedGame()
    eve_ids: Dict[Tuple[int, int], int] = {}
    adam_ids: Dict[Tuple[int, int], int] = {}
    for e, (s, p) in enumerate(arena.eve):
        for b in _visited_sets(condition, s, p):
            eve_ids[e, b] = tg.add_vertex(EVE)
            for a in arena.eve_edges[e]:
                adam_ids[a, b] = tg.add_vertex(ADAM)
    bad = set()
    for (e, b), v in eve_ids.items():
        s, p = arena.eve[e]
        for a in arena.eve_edges[e]:
            tg.add_edge(v, adam_ids[a, b])
        scope = p & condition.losers
        if (condition.kind == REACH and b) or (condition.kind == SAFETY and scope & ~b):
            bad.add(v)
    for (a, b), v in adam_ids.items():
        for e in arena.adam_edges[a]:
            t, q = arena.eve[e]
            tg.add_edge(v, eve_ids[e, (b | condition.hits[t]) & q])
    won = solve_cobuchi(tg, EVE, bad)
    return WinningRegion(arena, condition,
                         {key: v in won for key, v in eve_ids.items()},
                         {key: v in won for key, v in adam_ids.items()})


def _solve_buchi_class(arena: SuspectArena, condition: EveCondition) -> WinningRegion:
    """Buchi: a surviving loser may see its set only finitely often."""
    tg = arena.graph
    game = arena.game
    bad = set()
    for e, (s, p) in enumerate(arena.eve):
        if any(game.objectives[i].states >> s & 1 for i in iter_bits(p & condition.losers)):
            bad.add(e)
    won = solve_cobuchi(tg, EVE, bad)
    offset = len(arena.eve)
    return WinningRegion(arena, condition,
                         {(e, 0): e in won for e in range(len(arena.eve))},
                         {(a, 0): offset + a in won for a in range(len(arena.adam))})


def _layer_condition(condition: EveCondition, agents: List[int]) -> Callable[[FrozenSet[Hashable]], bool]:
    game = condition.game

    def eve_wins(colours: FrozenSet[Hashable]) -> bool:
        if WIN_SINK in colours:
            return True
        if LOSE_SINK in colours:
            return False
        for pos, i in enumerate(agents):
            obj = game.objectives[i]
            values = {sig[pos] for sig in colours}
            if isinstance(obj, Parity):
                if min(values) % 2 == 0:
                    return False
            elif frozenset(values) in obj.family:
                return False
        return True

    return eve_wins


def _solve_layered(arena: SuspectArena, condition: EveCondition) -> WinningRegion:
    game = arena.game
    eve_win: Dict[Tuple[int, int], bool] = {}
    adam_win: Dict[Tuple[int, int], bool] = {}
    for p, eves, adams in arena.layers:
        agents = bits_list(p & condition.losers)
        tg = TurnBasedGame()
        local: Dict[Tuple[str, int], int] = {}
        for e in eves:
            local["e", e] = tg.add_vertex(EVE)
        for a in adams:
            local["a", a] = tg.add_vertex(ADAM)
        win = tg.add_vertex(EVE)
        lose = tg.add_vertex(EVE)
        tg.add_edge(win, win)
        tg.add_edge(lose, lose)
        state_of = {}
        for e in eves:
            state_of[local["e", e]] = arena.eve[e][0]
            for a in arena.eve_edges[e]:
                tg.add_edge(local["e", e], local["a", a])
        for a in adams:
            state_of[local["a", a]] = arena.adam[a][0]
            for e in arena.adam_edges[a]:
                if arena.eve[e][1] == p:
                    tg.add_edge(local["a", a], local["e", e])
                else:
                    tg.add_edge(local["a", a], win if eve_win[e, 0] else lose)

        if not agents:
            won = tg.vertices() - attractor(tg, ADAM, [lose])
        elif condition.kind == COBUCHI:
            targets = []
            for i in agents:
                reject = game.objectives[i].states
                targets.append({v for (kind, e), v in local.items()
                                if kind == "e" and reject >> arena.eve[e][0] & 1} | {win})
            won = generalized_buchi(tg, targets)
        elif condition.kind == PARITY and len(agents) == 1:
            prio = game.objectives[agents[0]].priority
            top = max(prio)
            ceiling = top if top % 2 else top + 1
            priority = [0] * tg.n
            for v, s in state_of.items():
                priority[v] = ceiling - prio[s]
            priority[win], priority[lose] = 0, 1
            won, _ = zielonka(tg, priority)
        else:
            colour: List[Hashable] = [None] * tg.n
            for v, s in state_of.items():
                colour[v] = tuple(_signature(game.objectives[i], s) for i in agents)
            colour[win], colour[lose] = WIN_SINK, LOSE_SINK
            won, _ = solve_muller(tg, colour, _layer_condition(condition, agents))

        for e in eves:
            eve_win[e, 0] = local["e", e] in won
        for a in adams:
            adam_win[a, 0] = local["a", a] in won
        logger.debug("[ZeroSum] layer %s: %d/%d eve vertices winning",
                     bin(p), sum(eve_win[e, 0] for e in eves), len(eves))
    return WinningRegion(arena, condition, eve_win, adam_win)


def _signature(obj, s: int):
    if isinstance(obj, Parity):
        return obj.priority[s]
    if isinstance(obj, Muller):
        return obj.colours[s]
    raise ContractViolation(f"no layered signature for {obj.kind} objectives")


def solve_eve_region(arena: SuspectArena, losers: int) -> WinningRegion:
    """Exact region for: every agent of `losers` that is a limit suspect loses."""
    game = arena.game
    condition = EveCondition.of(game, losers)
    if condition.kind in (REACH, SAFETY):
        region = _solve_occurrence(arena, condition)
    elif condition.kind == BUCHI:
        region = _solve_buchi_class(arena, condition)
    elif condition.kind in (COBUCHI, PARITY, MULLER):
        region = _solve_layered(arena, condition)
    else:
        raise ContractViolation(f"unknown objective class {condition.kind}")
    logger.debug("[ZeroSum] solved L=%s (%s): %d vertices", bin(losers), condition.kind, region.size())
    return region
