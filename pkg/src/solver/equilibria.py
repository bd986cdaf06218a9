# src/solver/equilibria.py
"""Constrained NE existence, social welfare (SWDP) and Pareto optimality (PODP).

A lasso is the outcome of a Nash equilibrium iff every step of it can be
proposed by Eve through an Adam vertex that is in her winning region for the
loser set of the lasso. Deciders search for such lassos profile by profile:
the good edges for a profile restrict a one-player play search.
"""
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations
from typing import Any, Dict, Iterable, List, Optional, Tuple

from src.solver.errors import ContractViolation, InvariantViolation
from src.solver.game_model import (
    BUCHI, MULLER, ConcurrentGame, Lasso, WinnerProfile, check_lasso, payoff_of_lasso,
)
from src.solver.graph_analysis import (
    MoveGraph, achievable_profile_witnesses, pareto_front, sccs_within,
    sort_profiles, tarjan_sccs,
)
from src.solver.lar_oracle import DEFAULT_BUDGET, lar_oracle_solve
from src.solver.play_search import PlaySearch
from src.solver.suspect_game import SuspectArena, build_arena
from src.solver.utils.bitsets import full_mask, iter_bits, mask_of
from src.solver.zerosum_solver import WinningRegion, solve_eve_region

logger = logging.getLogger(__name__)

BACKENDS = ("fixpoint", "oracle")


@dataclass
class Decision:
    problem: str
    answer: bool
    method: str
    witness: Optional[Lasso] = None
    profile: Optional[WinnerProfile] = None
    stats: Dict[str, int] = field(default_factory=dict)

    def to_document(self, game: ConcurrentGame) -> Dict[str, Any]:
        witness = None
        if self.witness is not None:
            witness = self.witness.to_names(game)
            witness["profile"] = self.profile.to_string()
        return {
            "problem": self.problem,
            "answer": self.answer,
            "witness": witness,
            "method": self.method,
            "stats": dict(sorted(self.stats.items())),
        }


def _least(found: Dict[WinnerProfile, Lasso]) -> Tuple[Optional[WinnerProfile], Optional[Lasso]]:
    if not found:
        return None, None
    profile = min(found, key=lambda p: (found[p].sort_key, p.bits))
    return profile, found[profile]


def _profile_task(args: Dict[str, Any]) -> Tuple[Tuple[int, ...], Optional[Lasso]]:
    """One exact-profile NE check; module level so worker processes can run it."""
    solver = EquilibriumSolver(args["game"], args["source"], backend=args["backend"],
                               oracle_budget=args["budget"])
    return args["bits"], solver.ne_witness(WinnerProfile(args["bits"]))


class EquilibriumSolver:
    def __init__(self, game: ConcurrentGame, source: int, backend: str = "fixpoint",
                 workers: int = 1, oracle_budget: int = DEFAULT_BUDGET):
        if backend not in BACKENDS:
            raise ContractViolation(f"unknown backend {backend!r}")
        if not 0 <= source < game.n_states:
            raise ContractViolation(f"unknown source state {source}")
        self.game = game
        self.source = source
        self.backend = backend
        self.workers = max(1, workers)
        self.oracle_budget = oracle_budget
        self._arena: Optional[SuspectArena] = None
        self._regions: Dict[int, WinningRegion] = {}
        self._ne: Dict[WinnerProfile, Optional[Lasso]] = {}
        self.stats: Dict[str, int] = {"profiles_checked": 0, "regions_solved": 0, "lassos_examined": 0}

    @property
    def n(self) -> int:
        return self.game.n_agents

    @property
    def arena(self) -> SuspectArena:
        if self._arena is None:
            self._arena = build_arena(self.game, self.source)
        return self._arena

    def region(self, losers: int) -> WinningRegion:
        if losers not in self._regions:
            if self.backend == "oracle":
                self._regions[losers] = lar_oracle_solve(self.arena, losers, self.oracle_budget)
            else:
                self._regions[losers] = solve_eve_region(self.arena, losers)
            self.stats["regions_solved"] += 1
        return self._regions[losers]

    def _good_edge_filter(self, losers: int):
        region = self.region(losers)
        everyone = full_mask(self.n)
        game = self.game
        cache: Dict[Tuple[int, int, int], bool] = {}

        def edge_ok(s: int, visited: int, t: int) -> bool:
            key = (s, visited & losers, t)
            if key not in cache:
                cache[key] = any(region.adam_wins(s, everyone, move, visited & losers)
                                 for move in game.moves_between(s, t))
            return cache[key]

        return edge_ok

    def ne_witness(self, profile: WinnerProfile) -> Optional[Lasso]:
        """The least NE outcome (in `Lasso.sort_key` order) with exactly this profile, or None."""
        if profile not in self._ne:
            self.stats["profiles_checked"] += 1
            search = PlaySearch(self.game, self.source, self._good_edge_filter(profile.losers_mask))
            lasso = search.least(dict(enumerate(profile.bits)))
            if lasso is not None:
                self.stats["lassos_examined"] += 1
                if payoff_of_lasso(self.game, lasso) != profile:
                    raise InvariantViolation(f"NE witness for {profile} has another payoff")
            self._ne[profile] = lasso
        return self._ne[profile]

    def _ne_witnesses(self, profiles: Iterable[WinnerProfile]) -> Dict[WinnerProfile, Lasso]:
        pending = [p for p in profiles if p not in self._ne]
        if self.workers > 1 and len(pending) > 1:
            tasks = [{"game": self.game, "source": self.source, "backend": self.backend,
                      "budget": self.oracle_budget, "bits": p.bits} for p in pending]
            with ProcessPoolExecutor(max_workers=self.workers) as pool:
                for bits, lasso in pool.map(_profile_task, tasks):
                    self._ne[WinnerProfile(bits)] = lasso
                    self.stats["profiles_checked"] += 1
                    self.stats["lassos_examined"] += lasso is not None
        found = {}
        for p in profiles:
            lasso = self.ne_witness(p)
            if lasso is not None:
                found[p] = lasso
        return found

    def verify_ne_lasso(self, lasso: Lasso) -> bool:
        """Does the lasso stay inside Eve's region for its own loser set?"""
        if lasso.source != self.source:
            raise ContractViolation("lasso does not start at the source state")
        check_lasso(self.game, lasso)
        profile = payoff_of_lasso(self.game, lasso)
        losers = profile.losers_mask
        edge_ok = self._good_edge_filter(losers)
        region = self.region(losers)
        seq = lasso.unroll(len(lasso.stem) + 2 * len(lasso.cycle) + 1)
        visited = 0
        for s, t in zip(seq, seq[1:]):
            if region.condition.tracked:
                visited |= region.condition.hits[s]
            if not edge_ok(s, visited, t):
                return False
        return True

    def _decide(self, problem: str, method: str, found: Dict[WinnerProfile, Lasso],
                extra: Optional[Dict[str, int]] = None) -> Decision:
        profile, lasso = _least(found)
        stats = dict(self.stats)
        stats.update(extra or {})
        decision = Decision(problem, lasso is not None, method, lasso, profile, stats)
        logger.info("[Equilibria] %s (%s): %s", problem, method, "yes" if decision.answer else "no")
        return decision

    def constrained_ne_exists(self, lower: WinnerProfile, upper: WinnerProfile) -> Decision:
        if lower.n != self.n or upper.n != self.n:
            raise ContractViolation(f"threshold profiles must have {self.n} bits")
        if not lower <= upper:
            raise ContractViolation(f"lower {lower} is not below upper {upper}")
        candidates = achievable_profile_witnesses(self.game, self.source, lower, upper)
        found = self._ne_witnesses(sort_profiles(candidates))
        return self._decide("cne", "generic", found, {"candidate_profiles": len(candidates)})

    def ne_exists(self) -> Decision:
        decision = self.constrained_ne_exists(WinnerProfile.zeros(self.n), WinnerProfile.ones(self.n))
        decision.problem = "ne"
        return decision

    def _check_threshold(self, v: int) -> None:
        if not 0 <= v <= self.n:
            raise ContractViolation(f"threshold {v} outside 0..{self.n}")

    def swdp(self, v: int) -> Decision:
        self._check_threshold(v)
        if self.game.objective_class == MULLER:
            # guess the set of (at least) v winners, then a constrained NE check
            found: Dict[WinnerProfile, Lasso] = {}
            for winners in combinations(range(self.n), v):
                lower = WinnerProfile.from_mask(mask_of(winners), self.n)
                decision = self.constrained_ne_exists(lower, WinnerProfile.ones(self.n))
                if decision.answer:
                    found[decision.profile] = decision.witness
            return self._decide("swdp", "generic", found)
        candidates = achievable_profile_witnesses(self.game, self.source, min_welfare=v)
        found = self._ne_witnesses(sort_profiles(candidates))
        return self._decide("swdp", "generic", found, {"candidate_profiles": len(candidates)})

    def _require_buchi(self) -> None:
        if self.game.objective_class != BUCHI:
            raise ContractViolation("SCC-rank procedures need Buchi objectives for every agent")

    def _scc_profile(self, region: int) -> WinnerProfile:
        return WinnerProfile(tuple(int(bool(obj.states & region)) for obj in self.game.objectives))

    def scc_profiles(self, refine: bool = True) -> List[Tuple[WinnerProfile, int]]:
        """(profile, SCC mask) pairs, highest rank first.

        Without refinement only the maximal reachable SCCs are listed; with it,
        every SCC is split again after dropping the Buchi set of one of its
        winners, which reaches every achievable limit profile.
        """
        graph = MoveGraph.of_game(self.game)
        decomposition = tarjan_sccs(graph, self.source)
        top = decomposition.nontrivial()
        pairs: Dict[WinnerProfile, int] = {}
        if not refine:
            ordered = [(self._scc_profile(c), c) for c in sorted(top, key=lambda m: m & -m)]
            return sorted(ordered, key=lambda pc: -pc[0].sw)
        seen = set()
        todo = list(top)
        while todo:
            comp = todo.pop()
            if comp in seen:
                continue
            seen.add(comp)
            p = self._scc_profile(comp)
            if p not in pairs or comp < pairs[p]:
                pairs[p] = comp
            for i in iter_bits(p.mask):
                todo.extend(sccs_within(graph, comp & ~self.game.objectives[i].states))
        return [(p, pairs[p]) for p in sort_profiles(pairs)]

    def swdp_buchi(self, v: int, refine: bool = True) -> Decision:
        self._require_buchi()
        self._check_threshold(v)
        ranked = self.scc_profiles(refine)
        checked = 0
        for profile, _ in ranked:
            if profile.sw < v:
                break
            checked += 1
            lasso = self.ne_witness(profile)
            if lasso is not None:
                return self._decide("swdp", "buchi-scc", {profile: lasso}, {"sccs": len(ranked)})
        return self._decide("swdp", "buchi-scc", {}, {"sccs": len(ranked)})

    def podp(self) -> Decision:
        achievable = achievable_profile_witnesses(self.game, self.source)
        front = pareto_front(achievable)
        found = self._ne_witnesses(sort_profiles(front))
        return self._decide("podp", "generic", found,
                            {"achievable_profiles": len(achievable), "pareto_profiles": len(front)})

    def podp_count_variant(self) -> Decision:
        """Binary search for the best NE welfare m, then compare with the best welfare of any play."""
        calls = 1
        best = self.swdp(0)
        if not best.answer:
            m = -1
        else:
            lo, hi = 0, self.n
            while lo < hi:
                mid = (lo + hi + 1) // 2
                calls += 1
                attempt = self.swdp(mid)
                if attempt.answer:
                    lo, best = mid, attempt
                else:
                    hi = mid - 1
            m = lo
        exceeded = bool(achievable_profile_witnesses(self.game, self.source, min_welfare=m + 1))
        found = {best.profile: best.witness} if m >= 0 and not exceeded else {}
        return self._decide("podp", "count-variant", found, {"swdp_calls": calls, "best_ne_welfare": m})

    def podp_buchi(self) -> Decision:
        """Check the maximal SCCs of the highest rank only; the first rank decides."""
        self._require_buchi()
        ranked = self.scc_profiles(refine=False)
        if not ranked:
            return self._decide("podp", "buchi-scc", {})
        rank = ranked[0][0].sw
        for profile, _ in ranked:
            if profile.sw != rank:
                break
            lasso = self.ne_witness(profile)
            if lasso is not None:
                return self._decide("podp", "buchi-scc", {profile: lasso}, {"rank": rank})
        return self._decide("podp", "buchi-scc", {}, {"rank": rank})


def _solver(game: ConcurrentGame, source: int, **options) -> EquilibriumSolver:
    return EquilibriumSolver(game, source, **options)


def verify_ne_lasso(game: ConcurrentGame, source: int, lasso: Lasso, **options) -> bool:
    return _solver(game, source, **options).verify_ne_lasso(lasso)


def constrained_ne_exists(game: ConcurrentGame, source: int, lower: WinnerProfile,
                          upper: WinnerProfile, **options) -> Decision:
    return _solver(game, source, **options).constrained_ne_exists(lower, upper)


def ne_exists(game: ConcurrentGame, source: int, **options) -> Decision:
    return _solver(game, source, **options).ne_exists()


def swdp(game: ConcurrentGame, source: int, v: int, **options) -> Decision:
    return _solver(game, source, **options).swdp(v)


def swdp_buchi(game: ConcurrentGame, source: int, v: int, refine: bool = True, **options) -> Decision:
    return _solver(game, source, **options).swdp_buchi(v, refine)


def podp(game: ConcurrentGame, source: int, **options) -> Decision:
    return _solver(game, source, **options).podp()


def podp_count_variant(game: ConcurrentGame, source: int, **options) -> Decision:
    return _solver(game, source, **options).podp_count_variant()


def podp_buchi(game: ConcurrentGame, source: int, **options) -> Decision:
    return _solver(game, source, **options).podp_buchi()
