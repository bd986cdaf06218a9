# src/cli/main.py
"""Command-line entry point: python -m src.cli.main <subcommand> ...

Every subcommand prints one JSON document on stdout. Exit 0 means a result was
produced (a "no" answer included), 2 means bad input, 3 means the oracle ran
out of budget.
"""
import argparse
import json
import logging
import random
import sys
from typing import Any, Dict, List, Optional, TextIO

from pydantic import ValidationError

from src.solver.census import arena_census, fit_growth
from src.solver.census_store import CensusStore
from src.solver.equilibria import EquilibriumSolver
from src.solver.errors import (
    ContractViolation, DimacsError, GameValidationError, OracleInfeasible, SatBoundExceeded,
)
from src.solver.game_io import dump_game, game_to_document, load_game, read_document, validate_game
from src.solver.game_model import ConcurrentGame, Lasso, WinnerProfile, payoff_of_lasso
from src.solver.reductions import REDUCTIONS, brute_force_sat, parse_dimacs
from src.solver.settings import ENV_PREFIX, Settings
from src.solver.suspect_game import arena_to_document, build_arena
from src.solver.zerosum_solver import solve_eve_region

logger = logging.getLogger("src.cli")

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_BUDGET = 3


def _add_decision_commands(sub, settings: Settings) -> None:
    def game_args(p):
        p.add_argument("game", help="game file (JSON)")
        p.add_argument("--state", help="source state (defaults to the game's initial state)")

    p = sub.add_parser("cne", help="constrained NE existence")
    game_args(p)
    p.add_argument("--lower", help="bit-string, agent 1 leftmost (default all 0)")
    p.add_argument("--upper", help="bit-string, agent 1 leftmost (default all 1)")
    p.set_defaults(problem="cne")

    p = sub.add_parser("ne", help="plain NE existence")
    game_args(p)
    p.set_defaults(problem="ne")

    p = sub.add_parser("swdp", help="NE with at least THRESHOLD winners")
    game_args(p)
    p.add_argument("--threshold", type=int, required=True)
    p.add_argument("--method", choices=("generic", "buchi-scc"), default="generic")
    p.add_argument("--literal", action="store_true",
                   help="buchi-scc only: scan maximal SCCs without refinement")
    p.set_defaults(problem="swdp")

    p = sub.add_parser("podp", help="NE with a Pareto-optimal winner profile")
    game_args(p)
    p.add_argument("--method", choices=("generic", "count", "buchi-scc"), default="generic")
    p.set_defaults(problem="podp")

    p = sub.add_parser("verify", help="is a lasso the outcome of an NE?")
    game_args(p)
    p.add_argument("--stem", default="", help="comma-separated states, source first")
    p.add_argument("--cycle", required=True, help="comma-separated states")
    p.set_defaults(problem="verify")


def build_parser(settings: Settings) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nash", description="Pure Nash equilibria in concurrent games.")
    parser.add_argument("--workers", type=int, default=settings.workers,
                        help="processes for parallel profile checks")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="validate a game file")
    p.add_argument("game")

    _add_decision_commands(sub, settings)

    oracle = sub.add_parser("oracle", help="re-run a decision with the LAR oracle back-end")
    oracle.add_argument("--budget", type=int, default=settings.oracle_budget)
    _add_decision_commands(oracle.add_subparsers(dest="oracle_command", required=True), settings)
    oracle.set_defaults(backend="oracle")

    reduce = sub.add_parser("reduce", help="SAT-to-game constructions")
    rsub = reduce.add_subparsers(dest="source", required=True)
    p = rsub.add_parser("sat")
    p.add_argument("--objective", choices=tuple(REDUCTIONS), required=True)
    p.add_argument("--cnf", required=True, help="DIMACS CNF file")
    p.add_argument("-o", "--output", help="write the game here instead of stdout")
    p.add_argument("--check-sat", action="store_true",
                   help="also report satisfiability by brute force")

    p = sub.add_parser("census", help="arena-size census over random games")
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--db", default=settings.db_path)

    p = sub.add_parser("arena", help="export the suspect arena")
    p.add_argument("game")
    p.add_argument("--state")
    p.add_argument("--losers", help="bit-string of losers; adds Eve's region to the export")
    return parser


def _source(game: ConcurrentGame, name: Optional[str]) -> int:
    if name is not None:
        return game.index(name)
    if game.initial is None:
        raise ContractViolation("no --state given and the game has no initial state")
    return game.initial


def _profile(text: Optional[str], game: ConcurrentGame, default: WinnerProfile) -> WinnerProfile:
    if text is None:
        return default
    profile = WinnerProfile.from_string(text)
    if profile.n != game.n_agents:
        raise ContractViolation(f"profile {text} must have {game.n_agents} bits")
    return profile


def _names(text: str):
    return [s for s in text.split(",") if s]


def _decide(args, settings: Settings) -> Dict[str, Any]:
    game = load_game(args.game)
    source = _source(game, args.state)
    n = game.n_agents
    backend = getattr(args, "backend", "fixpoint")
    budget = getattr(args, "budget", settings.oracle_budget)
    solver = EquilibriumSolver(game, source, backend=backend, workers=args.workers, oracle_budget=budget)
    if args.problem == "verify":
        lasso = Lasso.from_names(game, _names(args.stem), _names(args.cycle))
        return {"problem": "verify", "answer": solver.verify_ne_lasso(lasso),
                "witness": dict(lasso.to_names(game), profile=str(payoff_of_lasso(game, lasso))),
                "method": backend, "stats": dict(sorted(solver.stats.items()))}
    if args.problem == "cne":
        lower = _profile(args.lower, game, WinnerProfile.zeros(n))
        upper = _profile(args.upper, game, WinnerProfile.ones(n))
        decision = solver.constrained_ne_exists(lower, upper)
    elif args.problem == "ne":
        decision = solver.ne_exists()
    elif args.problem == "swdp":
        if args.method == "buchi-scc":
            decision = solver.swdp_buchi(args.threshold, refine=not args.literal)
        else:
            decision = solver.swdp(args.threshold)
    elif args.method == "count":
        decision = solver.podp_count_variant()
    elif args.method == "buchi-scc":
        decision = solver.podp_buchi()
    else:
        decision = solver.podp()
    if backend == "oracle":
        decision.method = f"{decision.method}+lar-oracle"
    return decision.to_document(game)


def _check(args) -> Dict[str, Any]:
    game = validate_game(read_document(args.game))
    kinds = sorted({obj.kind for obj in game.objectives})
    return {"valid": True, "states": game.n_states, "agents": game.n_agents,
            "objective_class": kinds[0] if len(kinds) == 1 else "mixed"}


def _reduce(args, settings: Settings) -> Dict[str, Any]:
    with open(args.cnf, "rb") as f:
        raw = f.read()
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as err:
        raise DimacsError(f"{args.cnf}: not UTF-8 text ({err.reason} at byte {err.start})") from err
    formula = parse_dimacs(text)
    game, v = REDUCTIONS[args.objective](formula)
    result: Dict[str, Any] = {"objective": args.objective, "threshold": v,
                              "states": game.n_states, "agents": game.n_agents}
    if args.check_sat:
        result["satisfiable"] = brute_force_sat(formula, settings.sat_bound)
    if args.output:
        dump_game(game, args.output, threshold=v)
        result["output"] = args.output
    else:
        result["game"] = game_to_document(game, threshold=v)
    return result


def _census(args) -> Dict[str, Any]:
    store = CensusStore(args.db)
    try:
        df = arena_census(random.Random(args.seed), args.samples, store=store)
    finally:
        store.close()
    coefficients, worst = fit_growth(df)
    return {"samples": len(df), "db": args.db,
            "quadratic_fit": [round(float(c), 6) for c in coefficients],
            "worst_ratio": round(worst, 6), "max_eve_states": int(df["eve_states"].max()) if len(df) else 0}


def _arena(args) -> Dict[str, Any]:
    game = load_game(args.game)
    arena = build_arena(game, _source(game, args.state))
    region = None
    if args.losers is not None:
        losers = _profile(args.losers, game, WinnerProfile.zeros(game.n_agents))
        region = solve_eve_region(arena, losers.mask)
    return arena_to_document(arena, region)


def _dispatch(args, settings: Settings) -> Dict[str, Any]:
    logger.debug("[Cli] running %s", args.command)
    if args.command == "check":
        return _check(args)
    if args.command in ("cne", "ne", "swdp", "podp", "verify", "oracle"):
        return _decide(args, settings)
    if args.command == "reduce":
        return _reduce(args, settings)
    if args.command == "census":
        return _census(args)
    return _arena(args)


def _emit(out: TextIO, payload: Dict[str, Any]) -> None:
    out.write(json.dumps(payload, indent=2) + "\n")


def _setting_violations(err: ValidationError) -> List[str]:
    return [f"{ENV_PREFIX}{str(e['loc'][0]).upper()}: {e['msg']}" for e in err.errors()]


def run(argv: Optional[List[str]] = None, out: Optional[TextIO] = None) -> int:
    out = out or sys.stdout
    try:
        settings = Settings.from_env()
    except ValidationError as err:
        _emit(out, {"error": "bad configuration", "violations": _setting_violations(err)})
        return EXIT_INPUT
    parser = build_parser(settings)
    try:
        args = parser.parse_args(argv)
    except SystemExit as stop:
        return EXIT_INPUT if stop.code else EXIT_OK
    level = logging.DEBUG if args.verbose > 1 else logging.INFO if args.verbose else settings.log_level
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")

    try:
        payload = _dispatch(args, settings)
    except GameValidationError as err:
        if args.command == "check":
            _emit(out, {"valid": False, "violations": err.violations})
        else:
            _emit(out, {"error": str(err), "violations": err.violations})
        return EXIT_INPUT
    except (ContractViolation, DimacsError, SatBoundExceeded, OSError) as err:
        _emit(out, {"error": str(err)})
        return EXIT_INPUT
    except OracleInfeasible as err:
        _emit(out, {"error": str(err), "budget": err.budget})
        return EXIT_BUDGET
    _emit(out, payload)
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
