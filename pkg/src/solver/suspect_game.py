# src/solver/suspect_game.py
"""The suspect arena: Eve proposes moves, Adam picks successors and the suspects shrink."""
import logging
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Any, Dict, List, Optional, Tuple

from src.solver.errors import ContractViolation, InvariantViolation
from src.solver.game_model import ConcurrentGame, Lasso, Move
from src.solver.turn_based import ADAM, EVE, TurnBasedGame
from src.solver.utils.bitsets import bits_list, full_mask, popcount

logger = logging.getLogger(__name__)

EveState = Tuple[int, int]             # (state, suspects)
AdamState = Tuple[int, int, Move]      # (state, suspects, proposed move)


def suspect_table(game: ConcurrentGame, s: int, move: Move) -> Dict[int, int]:
    """Successor state -> agents that could reach it by deviating alone from `move`."""
    if not game.is_legal(s, move):
        raise ContractViolation(f"illegal move ({', '.join(move)}) at {game.states[s]}")
    table: Dict[int, int] = {}
    row = game.table[s]
    for i in range(game.n_agents):
        for a in game.available[s][i]:
            target = row[move[:i] + (a,) + move[i + 1:]]
            table[target] = table.get(target, 0) | 1 << i
    return table


def suspects(game: ConcurrentGame, s: int, s_next: int, move: Move) -> int:
    return suspect_table(game, s, tuple(move)).get(s_next, 0)


@dataclass(frozen=True)
class SuspectArena:
    game: ConcurrentGame
    source: int
    eve: Tuple[EveState, ...]
    adam: Tuple[AdamState, ...]
    eve_edges: Tuple[Tuple[int, ...], ...]     # eve id -> adam ids, one per legal move
    adam_edges: Tuple[Tuple[int, ...], ...]    # adam id -> eve ids, ordered by successor state
    obey: Tuple[int, ...]                      # adam id -> eve id reached when Adam obeys

    @cached_property
    def eve_index(self) -> Dict[EveState, int]:
        return {v: k for k, v in enumerate(self.eve)}

    @cached_property
    def adam_index(self) -> Dict[AdamState, int]:
        return {v: k for k, v in enumerate(self.adam)}

    @property
    def all_agents(self) -> int:
        return full_mask(self.game.n_agents)

    @property
    def initial(self) -> int:
        return self.eve_index[(self.source, self.all_agents)]

    def eve_id(self, state: int, suspects: int) -> Optional[int]:
        return self.eve_index.get((state, suspects))

    def adam_id(self, state: int, suspects: int, move: Move) -> Optional[int]:
        return self.adam_index.get((state, suspects, tuple(move)))

    @cached_property
    def layers(self) -> List[Tuple[int, List[int], List[int]]]:
        """(suspects, eve ids, adam ids), smaller suspect sets first."""
        eve: Dict[int, List[int]] = {}
        adam: Dict[int, List[int]] = {}
        for k, (_, p) in enumerate(self.eve):
            eve.setdefault(p, []).append(k)
        for k, (_, p, _) in enumerate(self.adam):
            adam.setdefault(p, []).append(k)
        order = sorted(eve, key=lambda p: (popcount(p), p))
        return [(p, eve[p], adam.get(p, [])) for p in order]

    @cached_property
    def graph(self) -> TurnBasedGame:
        """Eve vertices keep their ids; Adam vertex k becomes len(eve) + k."""
        tg = TurnBasedGame()
        for _ in self.eve:
            tg.add_vertex(EVE)
        for _ in self.adam:
            tg.add_vertex(ADAM)
        offset = len(self.eve)
        for e, targets in enumerate(self.eve_edges):
            for a in targets:
                tg.add_edge(e, offset + a)
        for a, targets in enumerate(self.adam_edges):
            for e in targets:
                tg.add_edge(offset + a, e)
        return tg


def build_arena(game: ConcurrentGame, source: int) -> SuspectArena:
    """Reachable fragment of the suspect game from (source, all agents)."""
    if not 0 <= source < game.n_states:
        raise ContractViolation(f"unknown source state {source}")
    everyone = full_mask(game.n_agents)
    eve: List[EveState] = [(source, everyone)]
    eve_index = {eve[0]: 0}
    adam: List[AdamState] = []
    eve_edges: List[Tuple[int, ...]] = []
    adam_edges: List[Tuple[int, ...]] = []
    obey: List[int] = []
    queue = deque([0])
    tables: Dict[Tuple[int, Move], Dict[int, int]] = {}

    def eve_vertex(state: int, p: int) -> int:
        key = (state, p)
        if key not in eve_index:
            eve_index[key] = len(eve)
            eve.append(key)
            queue.append(eve_index[key])
        return eve_index[key]

    while queue:
        e = queue.popleft()
        while len(eve_edges) <= e:
            eve_edges.append(())
        s, p = eve[e]
        mine = []
        for move in game.moves(s):
            a = len(adam)
            adam.append((s, p, move))
            mine.append(a)
            if (s, move) not in tables:
                tables[s, move] = suspect_table(game, s, move)
            sus = tables[s, move]
            targets = []
            for t in game.successors(s):
                q = p & sus.get(t, 0)
                if q & ~p:
                    raise InvariantViolation("suspect set grew along an arena edge")
                targets.append(eve_vertex(t, q))
            obeyed = eve_vertex(game.table[s][move], p)
            if eve[obeyed][1] != p:
                raise InvariantViolation("obey edge changed the suspect set")
            adam_edges.append(tuple(targets))
            obey.append(obeyed)
        eve_edges[e] = tuple(mine)

    arena = SuspectArena(game, source, tuple(eve), tuple(adam), tuple(eve_edges),
                         tuple(adam_edges), tuple(obey))
    logger.info("[SuspectArena] built %d eve / %d adam vertices from %s",
                len(eve), len(adam), game.states[source])
    return arena


def lambda_limit(arena: SuspectArena, path: Lasso) -> int:
    """Limit suspect set of an arena lasso given by Eve vertex ids."""
    values = {arena.eve[e][1] for e in path.cycle}
    if len(values) != 1:
        raise InvariantViolation("suspect sets disagree along an arena cycle")
    previous = None
    for e in path.stem + path.cycle:
        p = arena.eve[e][1]
        if previous is not None and p & ~previous:
            raise InvariantViolation("suspect set grew along an arena path")
        previous = p
    return values.pop()


def embed_obedient(arena: SuspectArena, lasso: Lasso) -> Tuple[Lasso, Lasso]:
    """Arena lasso where Eve proposes the witness moves and Adam always obeys.

    Returns (Eve vertex ids, Adam vertex ids); Adam vertex k sits between Eve
    vertices k and k+1 of the unrolled play.
    """
    game = arena.game
    if lasso.source != arena.source:
        raise ContractViolation("lasso does not start at the arena source")
    everyone = arena.all_agents

    def step(s: int, t: int) -> int:
        moves = game.moves_between(s, t)
        if not moves:
            raise ContractViolation(f"invalid lasso edge {game.states[s]} -> {game.states[t]}")
        a = arena.adam_id(s, everyone, moves[0])
        if a is None or arena.eve[arena.obey[a]][0] != t:
            raise InvariantViolation("obedient play left the arena")
        return a

    seq = lasso.stem + lasso.cycle
    nxt = seq[1:] + (lasso.cycle[0],)
    eve_ids = tuple(arena.eve_id(s, everyone) for s in seq)
    adam_ids = tuple(step(s, t) for s, t in zip(seq, nxt))
    k = len(lasso.stem)
    return (Lasso(eve_ids[:k], eve_ids[k:]), Lasso(adam_ids[:k], adam_ids[k:]))


def project(arena: SuspectArena, path: Lasso) -> Lasso:
    """First projection: the game states of an arena lasso of Eve vertex ids."""
    return Lasso(tuple(arena.eve[e][0] for e in path.stem),
                 tuple(arena.eve[e][0] for e in path.cycle))


def arena_to_document(arena: SuspectArena, region: Any = None) -> Dict[str, Any]:
    """Debug export: one record per vertex (with `owner`) and per edge.

    `region`, when given, is a WinningRegion; vertices then carry `eve_wins`
    (evaluated with nothing visited yet).
    """
    game = arena.game
    vertices = []
    for k, (s, p) in enumerate(arena.eve):
        record = {"id": f"e{k}", "owner": "eve", "state": game.states[s],
                  "suspects": [i + 1 for i in bits_list(p)]}
        if region is not None:
            record["eve_wins"] = region.eve_wins(s, p)
        vertices.append(record)
    for k, (s, p, move) in enumerate(arena.adam):
        record = {"id": f"a{k}", "owner": "adam", "state": game.states[s],
                  "suspects": [i + 1 for i in bits_list(p)], "move": list(move)}
        if region is not None:
            record["eve_wins"] = region.adam_wins(s, p, move)
        vertices.append(record)
    edges = [{"from": f"e{e}", "to": f"a{a}"} for e, targets in enumerate(arena.eve_edges) for a in targets]
    edges += [{"from": f"a{a}", "to": f"e{e}", "obey": arena.obey[a] == e}
              for a, targets in enumerate(arena.adam_edges) for e in targets]
    return {"states": list(game.states), "agents": game.n_agents,
            "initial": f"e{arena.initial}", "vertices": vertices, "edges": edges}
