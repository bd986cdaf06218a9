# src/solver/game_model.py
"""Concurrent game structures, omega-regular objectives, lassos and payoffs.

States are strings at the boundary and dense indices inside; state sets are
int bit masks (bit s set iff state s is in the set). Agents are 0-based inside
and 1-based in every message a user can read.
"""
from dataclasses import dataclass, replace
from functools import cached_property
from itertools import product
from typing import Dict, FrozenSet, Iterator, Optional, Sequence, Tuple

from src.solver.errors import ContractViolation
from src.solver.utils.bitsets import iter_bits, mask_of, popcount

Move = Tuple[str, ...]

REACH = "reach"
SAFETY = "safety"
BUCHI = "buchi"
COBUCHI = "cobuchi"
PARITY = "parity"
MULLER = "muller"
OBJECTIVE_CLASSES = (REACH, SAFETY, BUCHI, COBUCHI, PARITY, MULLER)


class Objective:
    kind: str = ""
    reads_occ: bool = False

    def evaluate(self, occ: int, inf: int) -> bool:
        raise NotImplementedError


@dataclass(frozen=True)
class Reach(Objective):
    states: int
    kind = REACH
    reads_occ = True

    def evaluate(self, occ, inf):
        return bool(occ & self.states)


@dataclass(frozen=True)
class Safety(Objective):
    states: int
    kind = SAFETY
    reads_occ = True

    def evaluate(self, occ, inf):
        return not (occ & self.states)


@dataclass(frozen=True)
class Buchi(Objective):
    states: int
    kind = BUCHI

    def evaluate(self, occ, inf):
        return bool(inf & self.states)


@dataclass(frozen=True)
class CoBuchi(Objective):
    states: int
    kind = COBUCHI

    def evaluate(self, occ, inf):
        return not (inf & self.states)


@dataclass(frozen=True)
class Parity(Objective):
    """Min-parity: the play wins iff the least priority seen infinitely often is even."""
    priority: Tuple[int, ...]
    kind = PARITY

    def evaluate(self, occ, inf):
        return min(self.priority[s] for s in iter_bits(inf)) % 2 == 0


@dataclass(frozen=True)
class Muller(Objective):
    colours: Tuple[str, ...]
    family: FrozenSet[FrozenSet[str]]
    kind = MULLER

    def colour_set(self, states: int) -> FrozenSet[str]:
        return frozenset(self.colours[s] for s in iter_bits(states))

    def evaluate(self, occ, inf):
        return self.colour_set(inf) in self.family


def eval_objective(obj: Objective, occ: int, inf: int) -> bool:
    if not inf:
        raise ContractViolation("inf must be nonempty")
    if inf & ~occ:
        raise ContractViolation("inf must be a subset of occ")
    return obj.evaluate(occ, inf)


def complement_objective(obj: Objective) -> Objective:
    """The objective won by exactly the plays `obj` loses."""
    if isinstance(obj, Reach):
        return Safety(obj.states)
    if isinstance(obj, Safety):
        return Reach(obj.states)
    if isinstance(obj, Buchi):
        return CoBuchi(obj.states)
    if isinstance(obj, CoBuchi):
        return Buchi(obj.states)
    if isinstance(obj, Parity):
        return Parity(tuple(p + 1 for p in obj.priority))
    if isinstance(obj, Muller):
        palette = sorted(set(obj.colours))
        every = set()
        for picks in product((False, True), repeat=len(palette)):
            every.add(frozenset(c for c, keep in zip(palette, picks) if keep))
        return Muller(obj.colours, frozenset(every - set(obj.family)))
    raise ContractViolation(f"unknown objective {obj!r}")


def cobuchi_as_parity(obj: CoBuchi, n_states: int) -> Parity:
    """Two-priority parity objective equivalent to a coBuchi one (1 on F, 2 elsewhere)."""
    return Parity(tuple(1 if obj.states >> s & 1 else 2 for s in range(n_states)))


@dataclass(frozen=True)
class ConcurrentGame:
    states: Tuple[str, ...]
    n_agents: int
    actions: Tuple[str, ...]
    available: Tuple[Tuple[Tuple[str, ...], ...], ...]
    table: Tuple[Dict[Move, int], ...]
    objectives: Tuple[Objective, ...]
    initial: Optional[int] = None

    @property
    def n_states(self) -> int:
        return len(self.states)

    @cached_property
    def state_index(self) -> Dict[str, int]:
        return {name: i for i, name in enumerate(self.states)}

    def index(self, name: str) -> int:
        try:
            return self.state_index[name]
        except KeyError:
            raise ContractViolation(f"unknown state {name}") from None

    @cached_property
    def _moves(self) -> Tuple[Tuple[Move, ...], ...]:
        return tuple(tuple(product(*self.available[s])) for s in range(self.n_states))

    def moves(self, s: int) -> Tuple[Move, ...]:
        """Legal moves at `s` in lexicographic action order."""
        return self._moves[s]

    @cached_property
    def _successors(self) -> Tuple[Tuple[int, ...], ...]:
        return tuple(tuple(sorted(set(self.table[s].values()))) for s in range(self.n_states))

    def successors(self, s: int) -> Tuple[int, ...]:
        return self._successors[s]

    def is_legal(self, s: int, move: Sequence[str]) -> bool:
        return len(move) == self.n_agents and all(a in self.available[s][i] for i, a in enumerate(move))

    def successor(self, s: int, move: Sequence[str]) -> int:
        move = tuple(move)
        if not self.is_legal(s, move):
            raise ContractViolation(f"illegal move ({', '.join(move)}) at {self.states[s]}")
        return self.table[s][move]

    def moves_between(self, s: int, t: int) -> Tuple[Move, ...]:
        return tuple(m for m in self.moves(s) if self.table[s][m] == t)

    @property
    def turn_based_hint(self) -> bool:
        return all(sum(len(acts) > 1 for acts in per_agent) <= 1 for per_agent in self.available)

    def owner(self, s: int) -> Optional[int]:
        """The single agent with a real choice at `s`, if there is exactly one."""
        choosers = [i for i, acts in enumerate(self.available[s]) if len(acts) > 1]
        return choosers[0] if len(choosers) == 1 else None

    @property
    def table_size(self) -> int:
        return sum(len(self.moves(s)) for s in range(self.n_states))

    @property
    def objective_class(self) -> str:
        kinds = {obj.kind for obj in self.objectives}
        if len(kinds) != 1:
            raise ContractViolation(f"mixed objective classes: {sorted(kinds)}")
        return kinds.pop()

    def state_names(self, mask: int) -> Tuple[str, ...]:
        return tuple(self.states[s] for s in iter_bits(mask))

    def states_mask(self, names) -> int:
        return mask_of(self.index(name) for name in names)

    def with_objectives(self, objectives: Sequence[Objective], n_agents: Optional[int] = None,
                        available=None, table=None, actions=None) -> "ConcurrentGame":
        return replace(self, objectives=tuple(objectives),
                       n_agents=self.n_agents if n_agents is None else n_agents,
                       actions=self.actions if actions is None else tuple(actions),
                       available=self.available if available is None else available,
                       table=self.table if table is None else table)


@dataclass(frozen=True)
class WinnerProfile:
    bits: Tuple[int, ...]

    @classmethod
    def from_mask(cls, mask: int, n: int) -> "WinnerProfile":
        return cls(tuple((mask >> i) & 1 for i in range(n)))

    @classmethod
    def from_string(cls, text: str) -> "WinnerProfile":
        if not text or set(text) - {"0", "1"}:
            raise ContractViolation(f"profile must be a bit-string, got {text!r}")
        return cls(tuple(int(ch) for ch in text))

    @classmethod
    def zeros(cls, n: int) -> "WinnerProfile":
        return cls((0,) * n)

    @classmethod
    def ones(cls, n: int) -> "WinnerProfile":
        return cls((1,) * n)

    @property
    def n(self) -> int:
        return len(self.bits)

    @cached_property
    def mask(self) -> int:
        return mask_of(i for i, b in enumerate(self.bits) if b)

    @property
    def losers_mask(self) -> int:
        return ((1 << self.n) - 1) & ~self.mask

    @property
    def sw(self) -> int:
        return popcount(self.mask)

    def __le__(self, other: "WinnerProfile") -> bool:
        return self.n == other.n and self.mask & ~other.mask == 0

    def __ge__(self, other: "WinnerProfile") -> bool:
        return other.__le__(self)

    def to_string(self) -> str:
        return "".join(str(b) for b in self.bits)

    def __str__(self) -> str:
        return self.to_string()


@dataclass(frozen=True)
class Lasso:
    """stem . cycle^omega; the play starts at stem[0], or cycle[0] when the stem is empty."""
    stem: Tuple[int, ...]
    cycle: Tuple[int, ...]

    def __post_init__(self):
        if not self.cycle:
            raise ContractViolation("lasso cycle must be nonempty")

    @property
    def source(self) -> int:
        return self.stem[0] if self.stem else self.cycle[0]

    @property
    def occ(self) -> int:
        return mask_of(self.stem) | mask_of(self.cycle)

    @property
    def inf(self) -> int:
        return mask_of(self.cycle)

    @property
    def length(self) -> int:
        return len(self.stem) + len(self.cycle)

    @property
    def sort_key(self):
        """Shorter lassos first, equal lengths in (stem, cycle) lexicographic order."""
        return (self.length, self.stem, self.cycle)

    def edges(self) -> Iterator[Tuple[int, int]]:
        seq = self.stem + self.cycle
        for u, v in zip(seq, seq[1:]):
            yield u, v
        yield self.cycle[-1], self.cycle[0]

    def unroll(self, length: int) -> Tuple[int, ...]:
        out = list(self.stem)
        while len(out) < length:
            out.extend(self.cycle)
        return tuple(out[:length])

    def canonical(self) -> "Lasso":
        """The one representation of this play: primitive cycle in its least
        rotation, with the shortest stem that goes with it."""
        cycle = self.cycle
        size = len(cycle)
        for period in range(1, size + 1):
            if size % period == 0 and cycle[:period] * (size // period) == cycle:
                cycle = cycle[:period]
                break
        stem = self.stem
        while stem and stem[-1] == cycle[-1]:
            cycle = (stem[-1],) + cycle[:-1]
            stem = stem[:-1]
        k = min(range(len(cycle)), key=lambda i: cycle[i:] + cycle[:i])
        return Lasso(stem + cycle[:k], cycle[k:] + cycle[:k])

    def is_canonical(self) -> bool:
        return self.canonical() == self

    def to_names(self, game: ConcurrentGame) -> Dict[str, list]:
        return {"stem": [game.states[s] for s in self.stem],
                "cycle": [game.states[s] for s in self.cycle]}

    @classmethod
    def from_names(cls, game: ConcurrentGame, stem: Sequence[str], cycle: Sequence[str]) -> "Lasso":
        return cls(tuple(game.index(s) for s in stem), tuple(game.index(s) for s in cycle))


def check_lasso(game: ConcurrentGame, lasso: Lasso) -> None:
    for u, v in lasso.edges():
        if v not in game.successors(u):
            raise ContractViolation(f"invalid lasso edge {game.states[u]} -> {game.states[v]}")


def profile_of(game: ConcurrentGame, occ: int, inf: int) -> WinnerProfile:
    return WinnerProfile(tuple(int(eval_objective(obj, occ, inf)) for obj in game.objectives))


def payoff_of_lasso(game: ConcurrentGame, lasso: Lasso) -> WinnerProfile:
    check_lasso(game, lasso)
    return profile_of(game, lasso.occ, lasso.inf)
