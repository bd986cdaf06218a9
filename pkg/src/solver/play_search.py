# src/solver/play_search.py
"""One-player search for a play realising a partial winner/loser assignment.

Occurrence objectives (reach, safety) become forbidden states or must-visit
groups tracked in a (state, visited groups) product; limit objectives become
constraints on the set of states seen infinitely often, which is searched by
recursive SCC refinement.
"""
import logging
from collections import deque
from typing import Callable, Dict, Iterator, List, Mapping, Optional, Tuple

from src.solver.errors import InvariantViolation
from src.solver.game_model import (
    Buchi, CoBuchi, ConcurrentGame, Lasso, Muller, Parity, Reach, Safety,
)
from src.solver.scc_paths import covering_cycle, strongly_connected
from src.solver.utils.bitsets import full_mask, iter_bits, mask_of

logger = logging.getLogger(__name__)

# edge_ok(s, visited_agents, t): may the play move from s to t, given the
# constrained agents whose occurrence event has already happened
EdgeFilter = Callable[[int, int, int], bool]


class _Constraint:
    def __init__(self, game: ConcurrentGame, fixed: Mapping[int, int]):
        self.forbidden = 0
        self.avoid = 0
        self.must_meet: List[int] = []
        self.parity: List[Tuple[Tuple[int, ...], bool]] = []
        self.muller: List[Tuple[Muller, bool]] = []
        groups: Dict[int, int] = {}
        for i, bit in sorted(fixed.items()):
            obj = game.objectives[i]
            win = bool(bit)
            if isinstance(obj, Reach) or isinstance(obj, Safety):
                if win == isinstance(obj, Reach):
                    groups[obj.states] = groups.get(obj.states, 0) | 1 << i
                else:
                    self.forbidden |= obj.states
            elif isinstance(obj, Buchi) or isinstance(obj, CoBuchi):
                if win == isinstance(obj, Buchi):
                    self.must_meet.append(obj.states)
                else:
                    self.avoid |= obj.states
            elif isinstance(obj, Parity):
                self.parity.append((obj.priority, win))
            else:
                self.muller.append((obj, win))
        self.groups = list(groups)
        self.group_agents = [groups[g] for g in self.groups]
        self.hits = [mask_of(j for j, g in enumerate(self.groups) if g >> s & 1)
                     for s in range(game.n_states)]
        self.full = full_mask(len(self.groups))

    def hopeless(self) -> bool:
        return any(g == 0 for g in self.groups) or any(f == 0 for f in self.must_meet)

    def limit_ok(self, inf: int) -> bool:
        """Do the limit constraints hold when exactly `inf` is seen infinitely often?"""
        if inf & self.avoid or any(not inf & f for f in self.must_meet):
            return False
        for priority, want_even in self.parity:
            if (min(priority[s] for s in iter_bits(inf)) % 2 == 0) != want_even:
                return False
        return all((obj.colour_set(inf) in obj.family) == want_in for obj, want_in in self.muller)

    def agents_of(self, visited: int) -> int:
        out = 0
        for j in iter_bits(visited):
            out |= self.group_agents[j]
        return out


class PlaySearch:
    def __init__(self, game: ConcurrentGame, source: int, edge_ok: Optional[EdgeFilter] = None):
        self.game = game
        self.source = source
        self.edge_ok = edge_ok
        self._cache: Dict[Tuple[Tuple[int, int], ...], Optional[Lasso]] = {}
        self._least: Dict[Tuple[Tuple[int, int], ...], Optional[Lasso]] = {}

    def feasible(self, fixed: Mapping[int, int]) -> bool:
        return self.find(fixed) is not None

    def find(self, fixed: Mapping[int, int]) -> Optional[Lasso]:
        """A canonical lasso whose payoff matches `fixed` on the agents it names, or None."""
        key = tuple(sorted(fixed.items()))
        if key not in self._cache:
            self._cache[key] = self._search(_Constraint(self.game, fixed))
        return self._cache[key]

    def least(self, fixed: Mapping[int, int]) -> Optional[Lasso]:
        """The first lasso in `Lasso.sort_key` order whose payoff matches `fixed`.

        Never longer than the witness of `find`, which bounds the search.
        """
        key = tuple(sorted(fixed.items()))
        if key not in self._least:
            witness = self.find(fixed)
            self._least[key] = None if witness is None else \
                _LeastLasso(self, _Constraint(self.game, fixed)).search(witness.length)
        return self._least[key]

    def _allowed(self, c: _Constraint, s: int, visited: int, t: int) -> bool:
        if c.forbidden >> t & 1:
            return False
        return self.edge_ok is None or self.edge_ok(s, c.agents_of(visited), t)

    def _search(self, c: _Constraint) -> Optional[Lasso]:
        game = self.game
        if c.hopeless() or c.forbidden >> self.source & 1:
            return None
        start = (self.source, c.hits[self.source])
        parent = {start: None}
        queue = deque([start])
        final_order: List[Tuple[int, int]] = []
        while queue:
            node = queue.popleft()
            s, visited = node
            if visited == c.full:
                final_order.append(node)
            for t in game.successors(s):
                if not self._allowed(c, s, visited, t):
                    continue
                nxt = (t, visited | c.hits[t])
                if nxt not in parent:
                    parent[nxt] = node
                    queue.append(nxt)
        region = mask_of(s for s, _ in final_order)
        if not region:
            return None

        def inside(s):
            return [t for t in game.successors(s)
                    if region >> t & 1 and self._allowed(c, s, c.full, t)]

        cycle_set = _InfSearch(c, inside).search(region)
        if cycle_set is None:
            return None
        entry = next(node for node in final_order if cycle_set >> node[0] & 1)
        path = []
        node = entry
        while node is not None:
            path.append(node[0])
            node = parent[node]
        path.reverse()
        cycle = covering_cycle(entry[0], cycle_set, inside)
        lasso = Lasso(tuple(path[:-1]), cycle).canonical()
        if not lasso.inf == cycle_set:
            raise InvariantViolation("play search: witness cycle left its state set")
        return lasso


class _InfSearch:
    """Finds a strongly connected state set meeting the limit constraints."""

    def __init__(self, c: _Constraint, inside: Callable[[int], List[int]]):
        self.c = c
        self.inside = inside
        self.failed = set()

    def _components(self, region: int) -> List[int]:
        def neighbours(s):
            return [t for t in self.inside(s) if region >> t & 1]

        comps = []
        for members in strongly_connected(iter_bits(region), neighbours):
            if len(members) > 1 or members[0] in neighbours(members[0]):
                comps.append(mask_of(members))
        return sorted(comps, key=lambda m: m & -m)

    def search(self, region: int) -> Optional[int]:
        if not region or region in self.failed:
            return None
        for comp in self._components(region):
            found = self._check(comp)
            if found is not None:
                return found
        self.failed.add(region)
        return None

    def _check(self, comp: int) -> Optional[int]:
        c = self.c
        if comp & c.avoid:
            return self.search(comp & ~c.avoid)
        if any(not comp & f for f in c.must_meet):
            return None
        for priority, want_even in c.parity:
            least = min(priority[s] for s in iter_bits(comp))
            if (least % 2 == 0) != want_even:
                return self.search(comp & ~mask_of(s for s in iter_bits(comp) if priority[s] == least))
        for obj, want_in in c.muller:
            if (obj.colour_set(comp) in obj.family) != want_in:
                for s in iter_bits(comp):
                    found = self.search(comp & ~(1 << s))
                    if found is not None:
                        return found
                return None
        return comp


# word automaton over lassos: INIT, then ("stem", s, visited) while reading the
# stem, then ("cycle", t, visited, seen, start) while reading the cycle
_INIT = ("init",)


class _LeastLasso:
    """Shortest-first, then lexicographic, search over lassos meeting a constraint."""

    def __init__(self, search: PlaySearch, c: _Constraint):
        self.play = search
        self.c = c
        self.succ = [search.game.successors(s) for s in range(search.game.n_states)]
        self.moves: Dict[tuple, List[tuple]] = {}
        self.dist: Dict[tuple, int] = {}

    def _ok(self, s: int, visited: int, t: int) -> bool:
        return self.play._allowed(self.c, s, visited, t)

    def _cycle_node(self, t: int, visited: int, seen: int, start: int) -> tuple:
        return ("cycle", t, visited | self.c.hits[t], seen | 1 << t, start)

    def _expand(self, node: tuple) -> List[tuple]:
        c = self.c
        if node == _INIT:
            s = self.play.source
            if c.forbidden >> s & 1:
                return []
            return [self._cycle_node(s, 0, 0, s), ("stem", s, c.hits[s])]
        if node[0] == "stem":
            _, s, visited = node
            nexts = [t for t in self.succ[s] if self._ok(s, visited, t)]
            return ([self._cycle_node(t, visited, 0, t) for t in nexts]
                    + [("stem", t, visited | c.hits[t]) for t in nexts])
        _, t, visited, seen, start = node
        # the second time round every edge is taken with all groups visited
        return [self._cycle_node(u, visited, seen, start) for u in self.succ[t]
                if u >= start and self._ok(t, visited, u) and self._ok(t, c.full, u)]

    def _closes(self, node: tuple) -> bool:
        if node[0] != "cycle":
            return False
        _, t, visited, seen, start = node
        return (visited == self.c.full and start in self.succ[t]
                and self._ok(t, visited, start) and self.c.limit_ok(seen))

    def _explore(self, bound: int) -> None:
        depth = {_INIT: 0}
        queue = deque([_INIT])
        back: Dict[tuple, List[tuple]] = {}
        while queue:
            node = queue.popleft()
            if depth[node] >= bound:
                continue
            self.moves[node] = self._expand(node)
            for nxt in self.moves[node]:
                back.setdefault(nxt, []).append(node)
                if nxt not in depth:
                    depth[nxt] = depth[node] + 1
                    queue.append(nxt)
        queue = deque(node for node in depth if self._closes(node))
        self.dist = {node: 0 for node in queue}
        while queue:
            node = queue.popleft()
            for prev in back.get(node, ()):
                if prev not in self.dist:
                    self.dist[prev] = self.dist[node] + 1
                    queue.append(prev)

    def _words(self, node: tuple, left: int, stem: List[int], cycle: List[int]) -> Iterator[Lasso]:
        if left == 0:
            if self._closes(node):
                yield Lasso(tuple(stem), tuple(cycle))
            return
        for nxt in self.moves.get(node, ()):
            if self.dist.get(nxt, left) > left - 1:
                continue
            part = stem if nxt[0] == "stem" else cycle
            part.append(nxt[1])
            yield from self._words(nxt, left - 1, stem, cycle)
            part.pop()

    def search(self, bound: int) -> Optional[Lasso]:
        self._explore(bound)
        if _INIT not in self.dist:
            raise InvariantViolation("least lasso: the search witness is not accepted")
        for total in range(self.dist[_INIT], bound + 1):
            for lasso in self._words(_INIT, total, [], []):
                # a cycle whose least state repeats may still be an unlucky rotation
                if lasso.is_canonical():
                    return lasso
        raise InvariantViolation("least lasso: no canonical lasso up to the search witness")
