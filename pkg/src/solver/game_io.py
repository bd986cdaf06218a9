# src/solver/game_io.py
"""Game files: pydantic schema, validation into ConcurrentGame, JSON round trip."""
import json
import logging
from typing import Annotated, Any, Dict, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, NonNegativeInt, ValidationError

from src.solver.errors import GameValidationError
from src.solver.game_model import (
    Buchi, CoBuchi, ConcurrentGame, Muller, Objective, Parity, Reach, Safety,
)

logger = logging.getLogger(__name__)


class ReachDoc(BaseModel):
    type: Literal["reach"]
    target: List[str]


class SafetyDoc(BaseModel):
    type: Literal["safety"]
    unsafe: List[str]


class BuchiDoc(BaseModel):
    type: Literal["buchi"]
    accept: List[str]


class CoBuchiDoc(BaseModel):
    type: Literal["cobuchi"]
    reject: List[str]


class ParityDoc(BaseModel):
    type: Literal["parity"]
    priority: Dict[str, NonNegativeInt]


class MullerDoc(BaseModel):
    type: Literal["muller"]
    colors: Dict[str, str]
    family: List[List[str]]


ObjectiveDoc = Annotated[
    Union[ReachDoc, SafetyDoc, BuchiDoc, CoBuchiDoc, ParityDoc, MullerDoc],
    Field(discriminator="type"),
]


class TransitionDoc(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    source: str = Field(alias="from")
    move: List[str]
    to: str


class GameDocument(BaseModel):
    # extra keys (e.g. "threshold" written by the reductions) are kept, not rejected
    model_config = ConfigDict(extra="allow")

    states: List[str]
    agents: int = Field(ge=1)
    actions: List[str]
    available: Dict[str, List[List[str]]]
    transitions: List[TransitionDoc]
    objectives: List[ObjectiveDoc]
    initial: Optional[str] = None


_SET_KEYS = {"reach": "target", "safety": "unsafe", "buchi": "accept", "cobuchi": "reject"}
_SET_TYPES = {"reach": Reach, "safety": Safety, "buchi": Buchi, "cobuchi": CoBuchi}


def _format_pydantic(err: ValidationError) -> List[str]:
    out = []
    for item in err.errors():
        where = ".".join(str(p) for p in item["loc"])
        out.append(f"{where}: {item['msg']}")
    return out


def _objective(doc, agent: int, index: Dict[str, int], violations: List[str]) -> Optional[Objective]:
    label = f"objective {agent + 1}"

    def known(names):
        bad = [x for x in names if x not in index]
        for x in bad:
            violations.append(f"{label}: unknown state {x}")
        return not bad

    if doc.type in _SET_KEYS:
        names = getattr(doc, _SET_KEYS[doc.type])
        if not known(names):
            return None
        mask = 0
        for x in names:
            mask |= 1 << index[x]
        return _SET_TYPES[doc.type](mask)

    if doc.type == "parity":
        if not known(doc.priority):
            return None
        missing = [s for s in index if s not in doc.priority]
        for s in missing:
            violations.append(f"{label}: missing priority for state {s}")
        if missing:
            return None
        return Parity(tuple(doc.priority[s] for s in index))

    # muller
    if not known(doc.colors):
        return None
    missing = [s for s in index if s not in doc.colors]
    for s in missing:
        violations.append(f"{label}: missing colour for state {s}")
    if missing:
        return None
    colours = tuple(doc.colors[s] for s in index)
    palette = set(colours)
    family = set()
    for member in doc.family:
        stray = sorted(set(member) - palette)
        if stray:
            violations.append(f"{label}: family member uses unknown colour(s) {', '.join(stray)}")
        family.add(frozenset(member))
    return Muller(colours, frozenset(family))


def validate_game(raw: Union[Dict[str, Any], GameDocument]) -> ConcurrentGame:
    """Check a raw game description and build the immutable game.

    Every problem found is collected; GameValidationError carries the full list.
    """
    if isinstance(raw, GameDocument):
        doc = raw
    else:
        try:
            doc = GameDocument.model_validate(raw)
        except ValidationError as err:
            raise GameValidationError(_format_pydantic(err)) from None

    violations: List[str] = []
    n = doc.agents
    if not doc.states:
        violations.append("game has no states")
    seen = set()
    for s in doc.states:
        if s in seen:
            violations.append(f"duplicate state {s}")
        seen.add(s)
    index = {s: i for i, s in enumerate(dict.fromkeys(doc.states))}
    states = tuple(index)
    actions = tuple(dict.fromkeys(doc.actions))
    action_set = set(actions)

    for name in doc.available:
        if name not in index:
            violations.append(f"unknown state {name} in available")

    available = []
    for s in states:
        per_agent = doc.available.get(s)
        if per_agent is None:
            violations.append(f"missing availability for state {s}")
            available.append(tuple(() for _ in range(n)))
            continue
        if len(per_agent) != n:
            violations.append(f"availability at {s} lists {len(per_agent)} agents, expected {n}")
        row = []
        for i in range(n):
            acts = per_agent[i] if i < len(per_agent) else []
            if not acts:
                violations.append(f"empty availability at {s} for agent {i + 1}")
            for a in acts:
                if a not in action_set:
                    violations.append(f"unknown action {a} at {s} for agent {i + 1}")
            row.append(tuple(sorted(set(acts))))
        available.append(tuple(row))

    table: List[Dict[tuple, int]] = [dict() for _ in states]
    for tr in doc.transitions:
        move = tuple(tr.move)
        broken = False
        for x in (tr.source, tr.to):
            if x not in index:
                violations.append(f"unknown state {x} in transition")
                broken = True
        if broken:
            continue
        s = index[tr.source]
        if len(move) != n or any(a not in available[s][i] for i, a in enumerate(move)):
            violations.append(f"illegal move ({', '.join(move)}) at {tr.source}")
            continue
        target = index[tr.to]
        if table[s].get(move, target) != target:
            violations.append(f"conflicting transitions at {tr.source} for move ({', '.join(move)})")
        table[s][move] = target

    game = ConcurrentGame(states, n, actions, tuple(available), tuple(table), ())
    for s in range(len(states)):
        if any(not acts for acts in available[s]):
            continue
        for move in game.moves(s):
            if move not in table[s]:
                violations.append(f"missing transition at {states[s]} for move ({', '.join(move)})")

    if len(doc.objectives) != n:
        violations.append(f"expected {n} objectives, got {len(doc.objectives)}")
    objectives = [_objective(o, i, index, violations) for i, o in enumerate(doc.objectives)]

    initial = None
    if doc.initial is not None:
        if doc.initial in index:
            initial = index[doc.initial]
        else:
            violations.append(f"unknown initial state {doc.initial}")

    if violations:
        logger.debug("[GameIO] rejected game: %d violation(s)", len(violations))
        raise GameValidationError(violations)
    return ConcurrentGame(states, n, actions, tuple(available), tuple(table), tuple(objectives), initial)


def _objective_document(obj: Objective, states) -> Dict[str, Any]:
    if obj.kind in _SET_KEYS:
        return {"type": obj.kind,
                _SET_KEYS[obj.kind]: [s for i, s in enumerate(states) if obj.states >> i & 1]}
    if isinstance(obj, Parity):
        return {"type": "parity", "priority": dict(zip(states, obj.priority))}
    return {
        "type": "muller",
        "colors": dict(zip(states, obj.colours)),
        "family": sorted(sorted(member) for member in obj.family),
    }


def game_to_document(game: ConcurrentGame, **extra) -> Dict[str, Any]:
    doc: Dict[str, Any] = {
        "states": list(game.states),
        "agents": game.n_agents,
        "actions": list(game.actions),
        "available": {s: [list(a) for a in game.available[i]] for i, s in enumerate(game.states)},
        "transitions": [
            {"from": s, "move": list(move), "to": game.states[game.table[i][move]]}
            for i, s in enumerate(game.states)
            for move in game.moves(i)
        ],
        "objectives": [_objective_document(o, game.states) for o in game.objectives],
    }
    if game.initial is not None:
        doc["initial"] = game.states[game.initial]
    doc.update(extra)
    return doc


def read_document(path: str) -> Dict[str, Any]:
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except json.JSONDecodeError as err:
        raise GameValidationError([f"{path}: not valid JSON ({err.msg} at line {err.lineno})"]) from None
    except UnicodeDecodeError as err:
        raise GameValidationError([f"{path}: not UTF-8 text ({err.reason} at byte {err.start})"]) from None


def load_game(path: str) -> ConcurrentGame:
    return validate_game(read_document(path))


def dump_game(game: ConcurrentGame, path: str, **extra) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(game_to_document(game, **extra), f, indent=2)
        f.write("\n")
