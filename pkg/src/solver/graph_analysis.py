# src/solver/graph_analysis.py
"""Move graph algorithms: SCCs, bounded lassos, outcome classes, winner profiles."""
import logging
from collections import deque
from dataclasses import dataclass
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Set, Tuple

from src.solver.errors import ContractViolation, InvariantViolation
from src.solver.game_model import (
    Buchi, ConcurrentGame, Lasso, Move, WinnerProfile, payoff_of_lasso, profile_of,
)
from src.solver.play_search import PlaySearch
from src.solver.scc_paths import covering_cycle, strongly_connected, unwind
from src.solver.utils.bitsets import full_mask, iter_bits, mask_of

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MoveGraph:
    successors: Tuple[Tuple[int, ...], ...]
    labels: Dict[Tuple[int, int], Tuple[Move, ...]]

    @classmethod
    def of_game(cls, game: ConcurrentGame) -> "MoveGraph":
        labels: Dict[Tuple[int, int], List[Move]] = {}
        for s in range(game.n_states):
            for move in game.moves(s):
                labels.setdefault((s, game.table[s][move]), []).append(move)
        return cls(tuple(game.successors(s) for s in range(game.n_states)),
                   {edge: tuple(moves) for edge, moves in labels.items()})

    @property
    def n(self) -> int:
        return len(self.successors)

    def reachable(self, source: int, allowed: Optional[int] = None) -> int:
        allowed = full_mask(self.n) if allowed is None else allowed
        if not allowed >> source & 1:
            return 0
        seen = 1 << source
        todo = [source]
        while todo:
            s = todo.pop()
            for t in self.successors[s]:
                if allowed >> t & 1 and not seen >> t & 1:
                    seen |= 1 << t
                    todo.append(t)
        return seen


@dataclass(frozen=True)
class SccDecomposition:
    sccs: Tuple[int, ...]            # state masks, reverse topological order
    component: Dict[int, int]
    transient: Tuple[bool, ...]

    def rank(self, game: ConcurrentGame, k: int) -> int:
        """Number of agents whose Buchi set meets SCC k."""
        mask = self.sccs[k]
        return sum(1 for obj in game.objectives if isinstance(obj, Buchi) and obj.states & mask)

    def nontrivial(self) -> List[int]:
        return [self.sccs[k] for k in range(len(self.sccs)) if not self.transient[k]]


def tarjan_sccs(graph: MoveGraph, source: int, allowed: Optional[int] = None) -> SccDecomposition:
    if not 0 <= source < graph.n:
        raise ContractViolation(f"unknown source state {source}")
    allowed = full_mask(graph.n) if allowed is None else allowed

    def neighbours(s):
        return [t for t in graph.successors[s] if allowed >> t & 1]

    roots = [source] if allowed >> source & 1 else []
    sccs, component, transient = [], {}, []
    for members in strongly_connected(roots, neighbours):
        k = len(sccs)
        mask = mask_of(members)
        sccs.append(mask)
        for s in members:
            component[s] = k
        only = members[0]
        transient.append(len(members) == 1 and only not in neighbours(only))
    return SccDecomposition(tuple(sccs), component, tuple(transient))


def sccs_within(graph: MoveGraph, region: int) -> List[int]:
    """Nontrivial SCC masks of the subgraph induced by `region`, ordered by least state."""
    def neighbours(s):
        return [t for t in graph.successors[s] if region >> t & 1]

    out = []
    for members in strongly_connected(iter_bits(region), neighbours):
        if len(members) > 1 or members[0] in neighbours(members[0]):
            out.append(mask_of(members))
    return sorted(out, key=lambda m: (m & -m))


def default_bound(game: ConcurrentGame) -> int:
    return game.n_states ** 2


def enumerate_lassos(game: ConcurrentGame, source: int, stem_bound: Optional[int] = None,
                     cycle_bound: Optional[int] = None, distinct_outcomes: bool = False) -> Iterator[Lasso]:
    """Every canonical lasso from `source` within the bounds, in `Lasso.sort_key` order.

    The stem includes the source; an empty stem means the cycle starts there.
    With distinct_outcomes only the first lasso of each (occ, inf) pair is yielded.
    Exhaustive: only usable with small bounds.
    """
    stem_bound = default_bound(game) if stem_bound is None else stem_bound
    cycle_bound = default_bound(game) if cycle_bound is None else cycle_bound
    if stem_bound < 0 or cycle_bound < 1:
        return
    succ = [game.successors(s) for s in range(game.n_states)]
    seen_outcomes = set()

    # lassos of exactly `left` more states; at every stem, closing the stem and
    # starting the cycle sorts before stretching the stem
    def words(stem: List[int], cycle: List[int], left: int) -> Iterator[Tuple[Tuple[int, ...], Tuple[int, ...]]]:
        if left == 0:
            if cycle and cycle[0] in succ[cycle[-1]]:
                yield tuple(stem), tuple(cycle)
            return
        if cycle:
            if len(cycle) < cycle_bound:
                for t in succ[cycle[-1]]:
                    cycle.append(t)
                    yield from words(stem, cycle, left - 1)
                    cycle.pop()
            return
        nexts = succ[stem[-1]] if stem else (source,)
        for t in nexts:
            cycle.append(t)
            yield from words(stem, cycle, left - 1)
            cycle.pop()
        if len(stem) < stem_bound:
            for t in nexts:
                stem.append(t)
                yield from words(stem, cycle, left - 1)
                stem.pop()

    for total in range(1, stem_bound + cycle_bound + 1):
        for stem, cycle in words([], [], total):
            lasso = Lasso(stem, cycle)
            if not lasso.is_canonical():
                continue
            if distinct_outcomes:
                key = (lasso.occ, lasso.inf)
                if key in seen_outcomes:
                    continue
                seen_outcomes.add(key)
            yield lasso


def strongly_connected_regions(graph: MoveGraph) -> List[int]:
    """Every nonempty state set whose induced subgraph is strongly connected (small graphs only)."""
    out = []
    for region in range(1, 1 << graph.n):
        comps = sccs_within(graph, region)
        if len(comps) == 1 and comps[0] == region:
            out.append(region)
    return out


def outcome_classes(game: ConcurrentGame, source: int) -> Dict[Tuple[int, int], Lasso]:
    """All achievable (occ, inf) pairs from `source`, each with a short canonical witness.

    Explores (state, visited set) pairs and all strongly connected state sets, so it
    is exponential in |St|; meant as an oracle for small games.
    """
    graph = MoveGraph.of_game(game)
    start = (source, 1 << source)
    parent = {start: None}
    order = [start]
    queue = deque([start])
    while queue:
        s, seen = queue.popleft()
        for t in graph.successors[s]:
            nxt = (t, seen | 1 << t)
            if nxt not in parent:
                parent[nxt] = (s, seen)
                order.append(nxt)
                queue.append(nxt)

    regions = strongly_connected_regions(graph)
    cycle_cache: Dict[Tuple[int, int], Tuple[int, ...]] = {}
    out: Dict[Tuple[int, int], Lasso] = {}
    for node in order:
        s, seen = node
        path = [v for v, _ in unwind(parent, node)]
        for region in regions:
            if not region >> s & 1:
                continue
            if (s, region) not in cycle_cache:
                cycle_cache[s, region] = covering_cycle(s, region, lambda v: graph.successors[v])
            lasso = Lasso(tuple(path[:-1]), cycle_cache[s, region]).canonical()
            key = (seen | region, region)
            if key not in out or lasso.sort_key < out[key].sort_key:
                out[key] = lasso
    return out


def profiles_from_outcome_classes(game: ConcurrentGame, source: int) -> Dict[WinnerProfile, Lasso]:
    best: Dict[WinnerProfile, Lasso] = {}
    for (occ, inf), lasso in outcome_classes(game, source).items():
        p = profile_of(game, occ, inf)
        if p not in best or lasso.sort_key < best[p].sort_key:
            best[p] = lasso
    return best


def achievable_profile_witnesses(game: ConcurrentGame, source: int,
                                 lower: Optional[WinnerProfile] = None,
                                 upper: Optional[WinnerProfile] = None,
                                 min_welfare: int = 0) -> Dict[WinnerProfile, Lasso]:
    """Profiles realised by some play from `source`, within [lower, upper], each with a witness.

    Agent-by-agent search; every partial assignment is pruned as soon as no play realises it.
    """
    n = game.n_agents
    lower = lower or WinnerProfile.zeros(n)
    upper = upper or WinnerProfile.ones(n)
    search = PlaySearch(game, source)
    found: Dict[WinnerProfile, Lasso] = {}

    def walk(i: int, fixed: Dict[int, int], wins: int):
        if wins + (n - i) < min_welfare:
            return
        if i == n:
            lasso = search.find(fixed)
            if lasso is None:
                return
            profile = WinnerProfile(tuple(fixed[j] for j in range(n)))
            if payoff_of_lasso(game, lasso) != profile:
                raise InvariantViolation(f"witness for profile {profile} realises another profile")
            found[profile] = lasso
            return
        for bit in (1, 0):
            if not lower.bits[i] <= bit <= upper.bits[i]:
                continue
            fixed[i] = bit
            if search.find(fixed) is not None:
                walk(i + 1, fixed, wins + bit)
            del fixed[i]

    walk(0, {}, 0)
    logger.debug("[GraphAnalysis] %d achievable profile(s) from %s", len(found), game.states[source])
    return found


def achievable_profiles(game: ConcurrentGame, source: int) -> Set[WinnerProfile]:
    return set(achievable_profile_witnesses(game, source))


def pareto_front(profiles: Iterable[WinnerProfile]) -> Set[WinnerProfile]:
    pool = set(profiles)
    return {p for p in pool if not any(p <= q and p != q for q in pool)}


def max_welfare(profiles: Iterable[WinnerProfile]) -> int:
    return max((p.sw for p in profiles), default=-1)


def sort_profiles(profiles: Iterable[WinnerProfile]) -> Sequence[WinnerProfile]:
    """Highest welfare first, then descending bit-string."""
    return sorted(profiles, key=lambda p: (-p.sw, tuple(-b for b in p.bits)))
