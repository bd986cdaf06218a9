# src/solver/scc_paths.py
"""Plain digraph helpers shared by the graph analysis and the play search:
Tarjan components, shortest paths and covering cycles over callable neighbours."""
import itertools
from collections import deque
from typing import Callable, Dict, Hashable, Iterable, Iterator, List, Optional, Set, Tuple

from src.solver.errors import InvariantViolation
from src.solver.utils.bitsets import iter_bits


def strongly_connected(vertices: Iterable[Hashable],
                       neighbours: Callable[[Hashable], Iterable[Hashable]]) -> Iterator[List[Hashable]]:
    """Tarjan's algorithm with an explicit stack.

    Components come out in reverse topological order (sinks first).
    """
    indices = itertools.count()
    index: Dict[Hashable, int] = {}
    lowlink: Dict[Hashable, int] = {}
    stack: List[Hashable] = []
    on_stack: Set[Hashable] = set()

    for root in vertices:
        if root in index:
            continue
        index[root] = lowlink[root] = next(indices)
        stack.append(root)
        on_stack.add(root)
        work = [(root, iter(neighbours(root)))]
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = lowlink[w] = next(indices)
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(neighbours(w))))
                    advanced = True
                    break
                if w in on_stack:
                    lowlink[v] = min(lowlink[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                lowlink[parent] = min(lowlink[parent], lowlink[v])
            if lowlink[v] == index[v]:
                scc = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    scc.append(w)
                    if w == v:
                        break
                yield scc


def unwind(parent: Dict[Hashable, Hashable], v: Hashable) -> List[Hashable]:
    path = []
    while v is not None:
        path.append(v)
        v = parent[v]
    return path[::-1]


def bfs_path(start: Hashable, goal: Callable[[Hashable], bool],
             neighbours: Callable[[Hashable], Iterable[Hashable]]) -> Optional[List[Hashable]]:
    """Shortest path from `start` to the first vertex satisfying `goal`, ends included."""
    parent = {start: None}
    queue = deque([start])
    while queue:
        v = queue.popleft()
        if goal(v):
            return unwind(parent, v)
        for w in neighbours(v):
            if w not in parent:
                parent[w] = v
                queue.append(w)
    return None


def _closing_walk(u: int, goal: int, inside: Callable[[int], Iterable[int]]) -> Optional[List[int]]:
    """Shortest walk of at least one edge from u to goal."""
    parent: Dict[int, Optional[int]] = {}
    queue = deque()
    for t in inside(u):
        if t not in parent:
            parent[t] = None
            queue.append(t)
    while queue:
        v = queue.popleft()
        if v == goal:
            return [u] + unwind(parent, v)
        for w in inside(v):
            if w not in parent:
                parent[w] = v
                queue.append(w)
    return None


def covering_cycle(start: int, region: int, neighbours: Callable[[int], Iterable[int]]) -> Tuple[int, ...]:
    """A closed walk from `start` inside `region` visiting every state of it.

    Targets are visited in index order; `region` must be strongly connected.
    """
    def inside(s):
        return [t for t in neighbours(s) if region >> t & 1]

    walk = [start]
    for target in iter_bits(region):
        if target in walk:
            continue
        path = bfs_path(walk[-1], lambda v, t=target: v == t, inside)
        if path is None:
            raise InvariantViolation("covering cycle: region is not strongly connected")
        walk.extend(path[1:])
    closing = _closing_walk(walk[-1], start, inside)
    if closing is None:
        raise InvariantViolation("covering cycle: region is not strongly connected")
    return tuple(walk + closing[1:-1])


