# src/solver/turn_based.py
"""Explicit two-player turn-based games and their classical fixpoint solvers.

Player 0 is Eve, player 1 is Adam. Vertex sets are plain Python sets of ints.
Parity conditions are max-parity with Eve winning on even priorities.
"""
import logging
from collections import deque
from typing import Callable, Dict, FrozenSet, Hashable, Iterable, List, Optional, Sequence, Set, Tuple

from src.solver.errors import InvariantViolation

logger = logging.getLogger(__name__)

EVE = 0
ADAM = 1


class TurnBasedGame:
    def __init__(self):
        self.owner: List[int] = []
        self.succ: List[List[int]] = []
        self.pred: List[List[int]] = []

    @property
    def n(self) -> int:
        return len(self.owner)

    def add_vertex(self, owner: int) -> int:
        self.owner.append(owner)
        self.succ.append([])
        self.pred.append([])
        return len(self.owner) - 1

    def add_edge(self, u: int, v: int) -> None:
        self.succ[u].append(v)
        self.pred[v].append(u)

    def vertices(self) -> Set[int]:
        return set(range(self.n))

    def check_total(self, within: Optional[Set[int]] = None) -> None:
        within = self.vertices() if within is None else within
        dead = [v for v in within if not any(w in within for w in self.succ[v])]
        if dead:
            raise InvariantViolation(f"vertices without successors: {sorted(dead)[:5]}")


def attractor(tg: TurnBasedGame, player: int, target: Iterable[int],
              within: Optional[Set[int]] = None) -> Set[int]:
    """Least set containing `target` from which `player` forces a visit to it (inside `within`)."""
    inside = tg.vertices() if within is None else within
    attr = {v for v in target if v in inside}
    remaining: Dict[int, int] = {}
    queue = deque(attr)
    while queue:
        v = queue.popleft()
        for u in tg.pred[v]:
            if u not in inside or u in attr:
                continue
            if tg.owner[u] == player:
                attr.add(u)
                queue.append(u)
                continue
            if u not in remaining:
                remaining[u] = sum(1 for w in tg.succ[u] if w in inside)
            remaining[u] -= 1
            if remaining[u] == 0:
                attr.add(u)
                queue.append(u)
    return attr


def solve_buchi(tg: TurnBasedGame, player: int, accepting: Iterable[int],
                within: Optional[Set[int]] = None) -> Set[int]:
    """Region where `player` can visit `accepting` infinitely often."""
    game = set(tg.vertices() if within is None else within)
    accepting = set(accepting)
    opponent = 1 - player
    while True:
        recur = attractor(tg, player, accepting & game, game)
        trap = game - recur
        if not trap:
            return game
        game -= attractor(tg, opponent, trap, game)


def solve_cobuchi(tg: TurnBasedGame, player: int, rejecting: Iterable[int],
                  within: Optional[Set[int]] = None) -> Set[int]:
    """Region where `player` can visit `rejecting` only finitely often."""
    game = set(tg.vertices() if within is None else within)
    return game - solve_buchi(tg, 1 - player, rejecting, game)


def zielonka(tg: TurnBasedGame, priority: Sequence[int],
             within: Optional[Set[int]] = None) -> Tuple[Set[int], Set[int]]:
    """Recursive parity solver; returns (Eve region, Adam region)."""
    game = set(tg.vertices() if within is None else within)
    if not game:
        return set(), set()
    top = max(priority[v] for v in game)
    sigma = top % 2
    regions: List[Set[int]] = [set(), set()]
    while True:
        if not game:
            return regions[EVE], regions[ADAM]
        top = max(priority[v] for v in game)
        if top % 2 != sigma:
            sub = zielonka(tg, priority, game)
            regions[EVE] |= sub[EVE]
            regions[ADAM] |= sub[ADAM]
            return regions[EVE], regions[ADAM]
        peak = attractor(tg, sigma, [v for v in game if priority[v] == top], game)
        sub = zielonka(tg, priority, game - peak)
        if not sub[1 - sigma]:
            regions[sigma] |= game
            return regions[EVE], regions[ADAM]
        lost = attractor(tg, 1 - sigma, sub[1 - sigma], game)
        regions[1 - sigma] |= lost
        game -= lost


def solve_muller(tg: TurnBasedGame, colour: Sequence[Hashable],
                 eve_wins: Callable[[FrozenSet[Hashable]], bool],
                 within: Optional[Set[int]] = None) -> Tuple[Set[int], Set[int]]:
    """McNaughton's recursive algorithm on an explicit condition over colour sets.

    `eve_wins(S)` says whether Eve wins a play whose infinitely-often colours are S.
    """
    game = set(tg.vertices() if within is None else within)
    if not game:
        return set(), set()
    palette = frozenset(colour[v] for v in game)
    sigma = EVE if eve_wins(palette) else ADAM
    opponent = 1 - sigma
    for c in sorted(palette, key=repr):
        keep = attractor(tg, sigma, [v for v in game if colour[v] == c], game)
        sub = solve_muller(tg, colour, eve_wins, game - keep)
        if sub[opponent]:
            lost = attractor(tg, opponent, sub[opponent], game)
            rest = solve_muller(tg, colour, eve_wins, game - lost)
            regions = [set(rest[EVE]), set(rest[ADAM])]
            regions[opponent] |= lost
            return regions[EVE], regions[ADAM]
    regions = [set(), set()]
    regions[sigma] = game
    return regions[EVE], regions[ADAM]


def generalized_buchi(tg: TurnBasedGame, targets: Sequence[Set[int]],
                      within: Optional[Set[int]] = None) -> Set[int]:
    """Eve's region for visiting every target set infinitely often (counter product)."""
    game = set(tg.vertices() if within is None else within)
    if not targets:
        return solve_buchi(tg, EVE, game, game)
    if len(targets) == 1:
        return solve_buchi(tg, EVE, targets[0], game)
    k = len(targets)
    product = TurnBasedGame()
    ids: Dict[Tuple[int, int], int] = {}
    for v in sorted(game):
        for j in range(k):
            ids[v, j] = product.add_vertex(tg.owner[v])
    accepting = set()
    for (v, j), pid in ids.items():
        hit = v in targets[j]
        if hit:
            accepting.add(pid)
        nxt = (j + 1) % k if hit else j
        for w in tg.succ[v]:
            if w in game:
                product.add_edge(pid, ids[w, nxt])
    won = solve_buchi(product, EVE, accepting)
    return {v for v in game if ids[v, 0] in won}
