# src/solver/reductions.py
"""CNF formulas and the SAT-to-game constructions used as correctness fixtures.

Every generated game is turn-based in the general format: agent 1 owns every
state and the other agents only ever have one action.
"""
import logging
import random
from dataclasses import dataclass
from itertools import product
from typing import Dict, List, Optional, Sequence, Tuple

from src.solver.errors import ContractViolation, DimacsError, SatBoundExceeded
from src.solver.game_model import (
    CoBuchi, ConcurrentGame, Objective, Reach, Safety, cobuchi_as_parity,
)
from src.solver.utils.bitsets import mask_of

logger = logging.getLogger(__name__)

WAIT = "wait"


@dataclass(frozen=True)
class CnfFormula:
    n_vars: int
    clauses: Tuple[Tuple[int, ...], ...]

    def __post_init__(self):
        if self.n_vars < 0:
            raise ContractViolation("variable count must be non-negative")
        for clause in self.clauses:
            if not clause:
                raise ContractViolation("clauses must be nonempty")
            for lit in clause:
                if lit == 0 or abs(lit) > self.n_vars:
                    raise ContractViolation(f"literal {lit} out of range 1..{self.n_vars}")

    @classmethod
    def of(cls, n_vars: int, clauses: Sequence[Sequence[int]]) -> "CnfFormula":
        return cls(n_vars, tuple(tuple(dict.fromkeys(c)) for c in clauses))

    @property
    def n_clauses(self) -> int:
        return len(self.clauses)

    def satisfied_by(self, assignment: Sequence[bool]) -> bool:
        """`assignment[k]` is the value of variable k+1."""
        return all(any(assignment[abs(l) - 1] == (l > 0) for l in clause) for clause in self.clauses)


def parse_dimacs(text: str) -> CnfFormula:
    header: Optional[Tuple[int, int]] = None
    clauses: List[Tuple[int, ...]] = []
    pending: List[int] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("%"):
            break
        if line.startswith("p"):
            parts = line.split()
            if header is not None or len(parts) != 4 or parts[1] != "cnf":
                raise DimacsError(f"line {lineno}: malformed header {line!r}")
            try:
                header = (int(parts[2]), int(parts[3]))
            except ValueError:
                raise DimacsError(f"line {lineno}: malformed header {line!r}") from None
            if header[0] < 0 or header[1] < 0:
                raise DimacsError(f"line {lineno}: malformed header {line!r}")
            continue
        if header is None:
            raise DimacsError(f"line {lineno}: clause before the 'p cnf' header")
        for token in line.split():
            try:
                lit = int(token)
            except ValueError:
                raise DimacsError(f"line {lineno}: not a literal: {token!r}") from None
            if lit == 0:
                if not pending:
                    raise DimacsError(f"line {lineno}: empty clause")
                clauses.append(tuple(dict.fromkeys(pending)))
                pending = []
            elif abs(lit) > header[0]:
                raise DimacsError(f"line {lineno}: literal {lit} out of range 1..{header[0]}")
            else:
                pending.append(lit)
    if header is None:
        raise DimacsError("missing 'p cnf' header")
    if pending:
        raise DimacsError("last clause is missing its terminating 0")
    if len(clauses) != header[1]:
        raise DimacsError(f"header declares {header[1]} clauses, found {len(clauses)}")
    return CnfFormula(header[0], tuple(clauses))


def to_dimacs(formula: CnfFormula) -> str:
    lines = [f"p cnf {formula.n_vars} {formula.n_clauses}"]
    lines += [" ".join(str(l) for l in clause) + " 0" for clause in formula.clauses]
    return "\n".join(lines) + "\n"


def random_cnf(rng: random.Random, variables: int, clauses: int, width: int = 3) -> CnfFormula:
    width = min(width, variables)
    out = []
    for _ in range(clauses):
        picked = rng.sample(range(1, variables + 1), width)
        out.append(tuple(v if rng.random() < 0.5 else -v for v in sorted(picked)))
    return CnfFormula(variables, tuple(out))


def brute_force_sat(formula: CnfFormula, bound: int = 20) -> bool:
    if formula.n_vars > bound:
        raise SatBoundExceeded(f"{formula.n_vars} variables exceed the brute-force bound {bound}")
    return any(formula.satisfied_by(values) for values in product((False, True), repeat=formula.n_vars))


class _TurnBasedBuilder:
    """Collects states owned by agent 1; the other agents always `wait`."""

    def __init__(self, n_agents: int):
        self.n_agents = n_agents
        self.states: List[str] = []
        self.choices: Dict[str, List[Tuple[str, str]]] = {}

    def add_state(self, name: str) -> None:
        self.states.append(name)
        self.choices[name] = []

    def add_choice(self, state: str, action: str, target: str) -> None:
        self.choices[state].append((action, target))

    def build(self, objectives: Sequence[Objective]) -> ConcurrentGame:
        index = {s: i for i, s in enumerate(self.states)}
        actions = sorted({a for ch in self.choices.values() for a, _ in ch} | {WAIT})
        available, table = [], []
        for s in self.states:
            owner_actions = tuple(sorted(a for a, _ in self.choices[s]))
            available.append((owner_actions,) + ((WAIT,),) * (self.n_agents - 1))
            table.append({(a,) + (WAIT,) * (self.n_agents - 1): index[t] for a, t in self.choices[s]})
        return ConcurrentGame(tuple(self.states), self.n_agents, tuple(actions),
                              tuple(available), tuple(table), tuple(objectives), initial=0)

    def mask(self, names) -> int:
        index = {s: i for i, s in enumerate(self.states)}
        return mask_of(index[n] for n in names)


def _literal_state(lit: int) -> str:
    return f"x{lit}" if lit > 0 else f"not_x{-lit}"


def sat_to_reach_game(formula: CnfFormula) -> Tuple[ConcurrentGame, int]:
    """Diamond chain choose_k -> x_k | not_x_k -> ... -> end (absorbing).

    Agent 1 owns everything and targets every state; agent j+1 targets the
    literal states satisfying clause j. Threshold m+1.
    """
    n, m = formula.n_vars, formula.n_clauses
    builder = _TurnBasedBuilder(m + 1)
    for k in range(1, n + 1):
        builder.add_state(f"choose_{k}")
        builder.add_state(f"x{k}")
        builder.add_state(f"not_x{k}")
    builder.add_state("end")
    for k in range(1, n + 1):
        after = f"choose_{k + 1}" if k < n else "end"
        builder.add_choice(f"choose_{k}", "t", f"x{k}")
        builder.add_choice(f"choose_{k}", "f", f"not_x{k}")
        builder.add_choice(f"x{k}", "go", after)
        builder.add_choice(f"not_x{k}", "go", after)
    builder.add_choice("end", "go", "end")
    objectives: List[Objective] = [Reach(builder.mask(builder.states))]
    for clause in formula.clauses:
        objectives.append(Reach(builder.mask(_literal_state(l) for l in clause)))
    game = builder.build(objectives)
    logger.debug("[Reductions] reach game: %d states, %d agents", game.n_states, game.n_agents)
    return game, m + 1


def _cyclic_layers(formula: CnfFormula) -> Tuple[_TurnBasedBuilder, List[int], List[int]]:
    """Layers s | x_k, not_x_k | clause literals, fully connected in order and back to s.

    Returns the builder and, per variable, the masks of the positive and
    negative unsafe sets.
    """
    n = formula.n_vars
    builder = _TurnBasedBuilder(2 * n + 1)
    layers: List[List[str]] = [["s"]]
    for k in range(1, n + 1):
        layers.append([f"x{k}", f"not_x{k}"])
    literal_of: Dict[str, int] = {}
    for j, clause in enumerate(formula.clauses, start=1):
        layer = []
        for p, lit in enumerate(clause, start=1):
            name = f"c{j}_{p}"
            literal_of[name] = lit
            layer.append(name)
        layers.append(layer)
    for layer in layers:
        for name in layer:
            builder.add_state(name)
    for i, layer in enumerate(layers):
        nxt = layers[(i + 1) % len(layers)]
        for name in layer:
            for a, target in enumerate(nxt):
                builder.add_choice(name, f"a{a}", target)
    positive, negative = [], []
    for k in range(1, n + 1):
        positive.append(builder.mask([f"x{k}"] + [s for s, l in literal_of.items() if l == k]))
        negative.append(builder.mask([f"not_x{k}"] + [s for s, l in literal_of.items() if l == -k]))
    return builder, positive, negative


def sat_to_safety_game(formula: CnfFormula) -> Tuple[ConcurrentGame, int]:
    builder, positive, negative = _cyclic_layers(formula)
    objectives: List[Objective] = [Safety(0)]
    for pos, neg in zip(positive, negative):
        objectives += [Safety(pos), Safety(neg)]
    return builder.build(objectives), formula.n_vars + 1


def sat_to_cobuchi_game(formula: CnfFormula) -> Tuple[ConcurrentGame, int]:
    builder, positive, negative = _cyclic_layers(formula)
    objectives: List[Objective] = [CoBuchi(0)]
    for pos, neg in zip(positive, negative):
        objectives += [CoBuchi(pos), CoBuchi(neg)]
    return builder.build(objectives), formula.n_vars + 1


def sat_to_parity_game(formula: CnfFormula) -> Tuple[ConcurrentGame, int]:
    """The coBuchi construction with every set coded by priorities 1 (in F) and 2."""
    game, v = sat_to_cobuchi_game(formula)
    parity = [cobuchi_as_parity(obj, game.n_states) for obj in game.objectives]
    return game.with_objectives(parity), v


REDUCTIONS = {
    "reach": sat_to_reach_game,
    "safety": sat_to_safety_game,
    "cobuchi": sat_to_cobuchi_game,
    "parity": sat_to_parity_game,
}


def add_shadow_agent(game: ConcurrentGame, agent: int) -> ConcurrentGame:
    """Append an agent that never chooses anything and copies `agent`'s objective."""
    if not 0 <= agent < game.n_agents:
        raise ContractViolation(f"no agent {agent + 1} to shadow")
    actions = game.actions if WAIT in game.actions else game.actions + (WAIT,)
    available = tuple(per_agent + ((WAIT,),) for per_agent in game.available)
    table = tuple({move + (WAIT,): t for move, t in row.items()} for row in game.table)
    return game.with_objectives(game.objectives + (game.objectives[agent],),
                                n_agents=game.n_agents + 1, available=available, table=table,
                                actions=actions)
