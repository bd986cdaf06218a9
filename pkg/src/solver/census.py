# src/solver/census.py
"""Arena-size census and the decision-procedure disagreement census."""
import logging
import random
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from src.solver.census_store import CENSUS_COLUMNS, CensusStore
from src.solver.equilibria import EquilibriumSolver
from src.solver.game_io import game_to_document
from src.solver.game_model import BUCHI, OBJECTIVE_CLASSES
from src.solver.random_games import random_game
from src.solver.suspect_game import build_arena

logger = logging.getLogger(__name__)


def arena_census(rng: random.Random, samples: int, kinds=OBJECTIVE_CLASSES, max_states: int = 5,
                 max_agents: int = 3, max_actions: int = 2,
                 store: Optional[CensusStore] = None) -> pd.DataFrame:
    """Build the suspect arena of `samples` random games and record its size."""
    rows = []
    for k in range(samples):
        kind = kinds[k % len(kinds)]
        game = random_game(rng, kind, rng.randint(1, max_states), rng.randint(1, max_agents),
                           rng.randint(1, max_actions))
        arena = build_arena(game, 0)
        row = {"kind": kind, "states": game.n_states, "agents": game.n_agents,
               "actions": len(game.actions), "table_size": game.table_size,
               "eve_states": len(arena.eve), "adam_states": len(arena.adam)}
        rows.append(row)
        if store is not None:
            store.insert_census(row)
    logger.info("[Census] sampled %d arenas", len(rows))
    return pd.DataFrame(rows, columns=list(CENSUS_COLUMNS))


def fit_growth(df: pd.DataFrame) -> Tuple[np.ndarray, float]:
    """Least-squares quadratic of eve_states against table_size, plus the worst eve/size² ratio."""
    if df.empty:
        return np.zeros(3), 0.0
    x = df["table_size"].to_numpy(dtype=float)
    y = df["eve_states"].to_numpy(dtype=float)
    degree = min(2, len(np.unique(x)) - 1)
    coefficients = np.polyfit(x, y, degree) if degree > 0 else np.array([y.mean()])
    coefficients = np.concatenate([np.zeros(3 - len(coefficients)), coefficients])
    worst = float(np.max(y / np.square(x)))
    return coefficients, worst


def growth_is_quadratic(df: pd.DataFrame, slack: float) -> bool:
    _, worst = fit_growth(df)
    return worst <= slack


def _record(found: List[Dict[str, Any]], store: Optional[CensusStore], kind: str,
            game, detail: Dict[str, Any]) -> None:
    document = game_to_document(game)
    found.append({"kind": kind, "game": document, "detail": detail})
    if store is not None:
        store.insert_disagreement(kind, document, detail)
    logger.info("[Census] %s disagreement: %s", kind, detail)


def podp_disagreement_census(rng: random.Random, samples: int, kind: str = BUCHI, n_states: int = 4,
                             n_agents: int = 3, store: Optional[CensusStore] = None) -> List[Dict[str, Any]]:
    """Compare exact PODP with the count variant (and, for Buchi, the SCC-rank procedures)."""
    found: List[Dict[str, Any]] = []
    for _ in range(samples):
        game = random_game(rng, kind, n_states, n_agents, 2)
        solver = EquilibriumSolver(game, 0)
        exact = solver.podp().answer
        count = solver.podp_count_variant().answer
        if exact != count:
            _record(found, store, "podp-count-variant", game, {"exact": exact, "count_variant": count})
        if kind != BUCHI:
            continue
        rank = solver.podp_buchi().answer
        if exact != rank:
            _record(found, store, "podp-buchi", game, {"exact": exact, "buchi_scc": rank})
        for v in range(game.n_agents + 1):
            generic = solver.swdp(v).answer
            literal = solver.swdp_buchi(v, refine=False).answer
            if generic != literal:
                _record(found, store, "swdp-buchi-literal", game,
                        {"threshold": v, "generic": generic, "buchi_scc": literal})
    return found
