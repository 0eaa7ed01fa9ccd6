"""Randomized search for minimum-cost quartet trees.

Two generation modes drive the same outer loop, which keeps a best tree and
replaces it only on strict improvement so the score history is monotone:

* ``hill_climb``: each generation applies a k-mutation (k from the fat-tail
  pmf) to the best tree and keeps the mutant only when it scores better.
* ``metropolis``: each generation is a walk of ``trial_length`` single
  mutations with a Metropolis accept/reject on the raw (unnormalized) tree
  cost, rolling back rejected steps; the best tree seen during the walk is
  then checked for improvement.

Termination is either ``simple`` (stop after ``patience`` examined trees
without improvement) or ``agreement`` (r independently seeded runs advance
round-robin; whenever one improves and all best scores are equal, the r
candidate trees are compared and the search stops when they are identical).
A tree certified perfect (every quartet at its minimal cost, S(T)=1) stops
any mode immediately since no tree can cost less.

Determinism: identical (cost function, config, seed) reproduce SearchResult
bit for bit. Agreement rounds advance runs in run order; with ``threads>1``
the per-round generations are precomputed in parallel from snapshots and
committed in the same order, so thread counts do not change results.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
import numpy as np

from .cost import (
    CostFunction,
    DistanceCostFunction,
    ScoreBounds,
    bounds as cost_bounds,
    is_min_perfect,
    score_from_cost,
    tree_cost_naive,
)
from .fastcost import BACKEND, cost_distance_from_adj
from .mutate import DEFAULT_K_MAX, MutationRecord, apply_record, sample_k, simple_mutation
from .trees import Tree, random_tree, tree_from_newick, tree_to_newick

__all__ = [
    "SearchConfig",
    "SearchResult",
    "hill_climb",
    "metropolis_trial",
    "replay_trace",
    "run_with_agreement",
    "search",
    "select_r",
]


def select_r(n: int) -> int:
    """Number of dovetailed runs the agreement termination uses for n items:
    6 for n in 4..5, 5 for 6..9, 4 for 10..15, 3 for 16..17, 2 beyond."""
    if n < 4:
        raise ValueError(f"need at least 4 items, got n={n}")
    if n <= 5:
        return 6
    if n <= 9:
        return 5
    if n <= 15:
        return 4
    if n <= 17:
        return 3
    return 2


@dataclass(frozen=True)
class SearchConfig:
    """Knobs for the tree search; defaults follow the method's standard
    settings (patience 100000 examined trees, Metropolis trial length n,
    temperature (M-m)/C(n,4))."""

    termination: str = "simple"  # "simple" | "agreement"
    patience: int = 100_000
    max_trees: int | None = None
    runs_r: int | None = None
    trial_length: int | None = None  # None -> n
    metropolis_temperature: float | None = None  # None -> (M-m)/C(n,4)
    seed: int = 0
    scorer: str | None = None  # "naive" | "fast" | None -> auto
    mode: str = "metropolis"  # "hill_climb" | "metropolis"
    k_max: int = DEFAULT_K_MAX
    threads: int = 1
    progress_path: str | Path | None = None
    trace_path: str | Path | None = None

    def __post_init__(self):
        if self.termination not in ("simple", "agreement"):
            raise ValueError(f"unknown termination {self.termination!r}")
        if self.mode not in ("hill_climb", "metropolis"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.scorer not in (None, "naive", "fast"):
            raise ValueError(f"unknown scorer {self.scorer!r}")
        if self.patience < 1:
            raise ValueError("patience must be >= 1")
        if self.trial_length is not None and self.trial_length < 1:
            raise ValueError("trial_length must be >= 1")
        if self.metropolis_temperature is not None and not self.metropolis_temperature > 0:
            raise ValueError("metropolis_temperature must be > 0")
        if self.k_max < 1:
            raise ValueError("k_max must be >= 1")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")
        if self.max_trees is not None and self.max_trees < 1:
            raise ValueError("max_trees must be >= 1")


@dataclass
class SearchResult:
    """Outcome of one search invocation."""

    best_tree: Tree
    best_score: float
    best_cost: float
    trees_examined: int
    history: list[tuple[int, float]]
    per_run_seeds: list[int]
    terminated_by: str  # perfect_score | agreement | patience | max_trees
    bounds: ScoreBounds
    mode: str
    scorer: str
    backend: str = BACKEND
    k_accepted: list[int] = field(default_factory=list)
    k_rejected: list[int] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "best_score": self.best_score,
            "best_cost": self.best_cost,
            "bounds": {"m": self.bounds.m, "M": self.bounds.M},
            "trees_examined": self.trees_examined,
            "history": [[t, s] for t, s in self.history],
            "per_run_seeds": self.per_run_seeds,
            "terminated_by": self.terminated_by,
            "mode": self.mode,
            "scorer": self.scorer,
            "backend": self.backend,
        }


# ---------------------------------------------------------------------- #
# Scorer adapters
# ---------------------------------------------------------------------- #


class _Scorer:
    """Uniform cost interface over adjacency arrays, plus the exactness
    certificate trigger (cost within rounding distance of the lower
    bound)."""

    def __init__(self, cf: CostFunction, which: str):
        self.cf = cf
        self.n = cf.n
        self.which = which
        self.bounds = cost_bounds(cf)
        b = self.bounds
        self.trigger = b.m + 1e-9 * (abs(b.m) + abs(b.M) + 1.0)
        if which == "fast":
            if not isinstance(cf, DistanceCostFunction):
                raise ValueError("fast scorer needs a distance-backed cost function")
            self._d = cf.dm.d

    def cost(self, adj: np.ndarray) -> float:
        if self.which == "fast":
            return cost_distance_from_adj(adj, self.n, self._d)
        return tree_cost_naive(adj, self.cf, self.n)

    def certify_perfect(self, adj: np.ndarray, cost: float) -> bool:
        return cost <= self.trigger and is_min_perfect(adj, self.cf, self.n)

    def score(self, cost: float, perfect: bool) -> float:
        return score_from_cost(cost, self.bounds, perfect)


def _pick_scorer(cf: CostFunction, choice: str | None) -> str:
    if choice is None:
        return "fast" if isinstance(cf, DistanceCostFunction) else "naive"
    return choice


# ---------------------------------------------------------------------- #
# Single run state
# ---------------------------------------------------------------------- #


class _Run:
    def __init__(self, scorer: _Scorer, config: SearchConfig, seed: int, theta: float):
        self.scorer = scorer
        self.cfg = config
        self.n = scorer.n
        self.seed = seed
        self.theta = theta
        self.trial_length = config.trial_length or self.n
        self.rng = np.random.Generator(np.random.PCG64(seed))
        self.examined = 0
        self.best_adj: np.ndarray | None = None
        self.best_cost = math.inf
        self.perfect = False
        self.improved = False
        self.initialized = False
        self._key: str | None = None
        self._work: np.ndarray | None = None
        self.k_accepted: list[int] = []
        self.k_rejected: list[int] = []
        self.trace: list[MutationRecord] = []
        self.initial_tree: Tree | None = None

    # -- state dance for deterministic parallel rounds ------------------- #

    def snapshot(self) -> dict:
        return {
            "rng": self.rng.bit_generator.state,
            "examined": self.examined,
            "best_adj": None if self.best_adj is None else self.best_adj.copy(),
            "best_cost": self.best_cost,
            "perfect": self.perfect,
            "improved": self.improved,
            "initialized": self.initialized,
            "key": self._key,
            "n_acc": len(self.k_accepted),
            "n_rej": len(self.k_rejected),
            "n_trace": len(self.trace),
            "initial_tree": self.initial_tree,
        }

    def restore(self, snap: dict) -> None:
        self.rng.bit_generator.state = snap["rng"]
        self.examined = snap["examined"]
        self.best_adj = None if snap["best_adj"] is None else snap["best_adj"].copy()
        self.best_cost = snap["best_cost"]
        self.perfect = snap["perfect"]
        self.improved = snap["improved"]
        self.initialized = snap["initialized"]
        self._key = snap["key"]
        del self.k_accepted[snap["n_acc"] :]
        del self.k_rejected[snap["n_rej"] :]
        del self.trace[snap["n_trace"] :]
        self.initial_tree = snap["initial_tree"]

    # -- generations ------------------------------------------------------ #

    def advance(self, budget: int | None) -> None:
        """One generation (or initialization) in place; sets self.improved."""
        self.improved = False
        if not self.initialized:
            self._init_tree()
            return
        if self.perfect:
            return
        if self.cfg.mode == "hill_climb":
            self._gen_hill()
        else:
            self._gen_metropolis(budget)

    def _init_tree(self) -> None:
        tree = random_tree(self.n, self.rng)
        self.initial_tree = tree
        self.best_adj = tree.copy_adjacency()
        self._work = self.best_adj.copy()
        self.best_cost = self.scorer.cost(self.best_adj)
        self.examined += 1
        self.improved = True
        self.initialized = True
        self._key = None
        if self.scorer.certify_perfect(self.best_adj, self.best_cost):
            self.perfect = True

    def _gen_hill(self) -> None:
        k = sample_k(self.rng, self.cfg.k_max)
        work = self._work
        np.copyto(work, self.best_adj)
        recs = [simple_mutation(work, self.n, self.rng) for _ in range(k)]
        c = self.scorer.cost(work)
        self.examined += 1
        if c < self.best_cost:
            np.copyto(self.best_adj, work)
            self.best_cost = c
            self._key = None
            self.improved = True
            self.k_accepted.append(k)
            self.trace.extend(recs)
            if self.scorer.certify_perfect(self.best_adj, c):
                self.perfect = True
        else:
            self.k_rejected.append(k)

    def _gen_metropolis(self, budget: int | None) -> None:
        cur = self._work
        np.copyto(cur, self.best_adj)
        ccur = self.best_cost
        walk_cost = self.best_cost
        walk_best = None
        recs: list[MutationRecord] = []
        best_prefix = 0
        steps = self.trial_length if budget is None else min(self.trial_length, budget)
        for _ in range(steps):
            rec = simple_mutation(cur, self.n, self.rng)
            cnew = self.scorer.cost(cur)
            self.examined += 1
            u = self.rng.random()
            dc = cnew - ccur
            if dc <= 0 or u < math.exp(-dc / self.theta):
                ccur = cnew
                recs.append(rec)
                if ccur < walk_cost:
                    walk_cost = ccur
                    if walk_best is None:
                        walk_best = cur.copy()
                    else:
                        np.copyto(walk_best, cur)
                    best_prefix = len(recs)
                    if self.scorer.certify_perfect(cur, ccur):
                        self.perfect = True
                        break
            else:
                apply_record(cur, rec.inverse())
        if walk_cost < self.best_cost:
            np.copyto(self.best_adj, walk_best)
            self.best_cost = walk_cost
            self._key = None
            self.improved = True
            self.trace.extend(recs[:best_prefix])

    def best_key(self) -> str:
        if self._key is None:
            self._key = Tree(self.best_adj, validate=False).canonical_key()
        return self._key

    def best_tree(self) -> Tree:
        return Tree(self.best_adj, validate=True)


# ---------------------------------------------------------------------- #
# Engine
# ---------------------------------------------------------------------- #


class _Terminate(Exception):
    def __init__(self, reason: str, winner: int):
        self.reason = reason
        self.winner = winner


def search(
    cf: CostFunction, config: SearchConfig | None = None, rng: np.random.Generator | None = None, **overrides
) -> SearchResult:
    """Run the configured search on a cost function over cf.n items."""
    config = replace(config or SearchConfig(), **overrides)
    which = _pick_scorer(cf, config.scorer)
    scorer = _Scorer(cf, which)
    n = cf.n
    b = scorer.bounds
    q = math.comb(n, 4)
    theta = config.metropolis_temperature
    if theta is None:
        theta = (b.M - b.m) / q if b.M > b.m else 1.0

    r = 1
    if config.termination == "agreement":
        r = config.runs_r if config.runs_r is not None else select_r(n)
        if r < 2:
            raise ValueError(f"agreement termination needs at least 2 runs, got {r}")
    if rng is not None:
        seeds = [int(rng.integers(1 << 63)) for _ in range(r)]
    else:
        seeds = [int(s) for s in np.random.SeedSequence(config.seed).generate_state(r, np.uint64)]
    runs = [_Run(scorer, config, seeds[i], theta) for i in range(r)]

    history: list[tuple[int, float]] = []
    progress = None
    if config.progress_path is not None:
        progress = open(config.progress_path, "a", encoding="utf-8")

    state = {"total": 0, "last_improve": 0, "gb": -1, "gb_cost": math.inf}

    def commit_events(i: int) -> None:
        run = runs[i]
        state["total"] = sum(x.examined for x in runs)
        if run.improved:
            state["last_improve"] = state["total"]
            if run.best_cost < state["gb_cost"]:
                state["gb"] = i
                state["gb_cost"] = run.best_cost
                perfect = run.perfect or scorer.certify_perfect(run.best_adj, run.best_cost)
                s = scorer.score(run.best_cost, perfect)
                history.append((state["total"], s))
                if progress is not None:
                    progress.write(f"{state['total']}\t{s!r}\n")
        if run.perfect:
            raise _Terminate("perfect_score", i)
        if (
            config.termination == "agreement"
            and run.improved
            and all(x.initialized for x in runs)
            and all(x.best_cost == run.best_cost for x in runs)
        ):
            key = run.best_key()
            if all(x.best_key() == key for x in runs):
                raise _Terminate("agreement", i)
        if config.max_trees is not None and state["total"] >= config.max_trees:
            raise _Terminate("max_trees", state["gb"])
        if state["total"] - state["last_improve"] >= config.patience:
            raise _Terminate("patience", state["gb"])

    reason, winner = None, None
    pool = None
    try:
        parallel = config.threads > 1 and r > 1 and config.max_trees is None
        if parallel:
            pool = ThreadPoolExecutor(max_workers=min(config.threads, r))
        while True:
            budget = None
            if config.max_trees is not None:
                budget = max(1, config.max_trees - state["total"])
            if parallel:
                snaps = [run.snapshot() for run in runs]
                list(pool.map(lambda run: run.advance(None), runs))
                posts = [run.snapshot() for run in runs]
                for run, pre in zip(runs, snaps):
                    run.restore(pre)
                try:
                    for i, run in enumerate(runs):
                        run.restore(posts[i])
                        commit_events(i)
                except _Terminate as t:
                    reason, winner = t.reason, t.winner
                    break
            else:
                try:
                    for i, run in enumerate(runs):
                        run.advance(budget)
                        commit_events(i)
                        if config.max_trees is not None:
                            budget = max(1, config.max_trees - state["total"])
                except _Terminate as t:
                    reason, winner = t.reason, t.winner
                    break
    finally:
        if pool is not None:
            pool.shutdown(wait=False)
        if progress is not None:
            progress.close()

    win = runs[winner if winner >= 0 else 0]
    perfect = win.perfect or scorer.certify_perfect(win.best_adj, win.best_cost)
    best_score = scorer.score(win.best_cost, perfect)
    result = SearchResult(
        best_tree=win.best_tree(),
        best_score=best_score,
        best_cost=win.best_cost,
        trees_examined=state["total"],
        history=history,
        per_run_seeds=seeds,
        terminated_by=reason,
        bounds=b,
        mode=config.mode,
        scorer=which,
        k_accepted=[k for run in runs for k in run.k_accepted],
        k_rejected=[k for run in runs for k in run.k_rejected],
    )
    if config.trace_path is not None:
        _write_trace(config.trace_path, win)
    return result


def hill_climb(
    cf: CostFunction, config: SearchConfig | None = None, rng: np.random.Generator | None = None, **overrides
) -> SearchResult:
    """Fig-2-style randomized hill climbing with k-mutations."""
    config = replace(config or SearchConfig(), mode="hill_climb", **overrides)
    return search(cf, config, rng)


def run_with_agreement(
    cf: CostFunction, config: SearchConfig | None = None, rng: np.random.Generator | None = None, **overrides
) -> SearchResult:
    """Dovetailed independent runs that stop when all agree on one tree."""
    config = replace(config or SearchConfig(), termination="agreement", **overrides)
    return search(cf, config, rng)


def metropolis_trial(
    t0: Tree,
    cf: CostFunction,
    config: SearchConfig | None = None,
    rng: np.random.Generator | None = None,
) -> Tree:
    """One Metropolis walk of ``trial_length`` steps from ``t0``; acceptance
    uses the raw tree cost and rejected steps are rolled back. Returns the
    best tree seen (``t0`` itself when nothing beat it)."""
    config = config or SearchConfig()
    if rng is None:
        rng = np.random.Generator(np.random.PCG64(config.seed))
    scorer = _Scorer(cf, _pick_scorer(cf, config.scorer))
    b = scorer.bounds
    theta = config.metropolis_temperature
    if theta is None:
        theta = (b.M - b.m) / math.comb(cf.n, 4) if b.M > b.m else 1.0
    steps = config.trial_length or cf.n
    cur = t0.copy_adjacency()
    ccur = scorer.cost(cur)
    best_cost = ccur
    best = cur.copy()
    for _ in range(steps):
        rec = simple_mutation(cur, cf.n, rng)
        cnew = scorer.cost(cur)
        u = rng.random()
        dc = cnew - ccur
        if dc <= 0 or u < math.exp(-dc / theta):
            ccur = cnew
            if ccur < best_cost:
                best_cost = ccur
                np.copyto(best, cur)
                if scorer.certify_perfect(cur, ccur):
                    break
        else:
            apply_record(cur, rec.inverse())
    return Tree(best, validate=True, _copy=False)


# ---------------------------------------------------------------------- #
# Trace files
# ---------------------------------------------------------------------- #


def _write_trace(path, run: _Run) -> None:
    # edges pin the internal node ids the records refer to; the newick
    # line is presentation only
    tree = run.initial_tree
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# quartet trace v1\n")
        fh.write(f"# n {run.n}\n")
        fh.write(f"# initial {tree_to_newick(tree)}\n")
        adj = tree.adj_array
        for v in range(tree.node_count):
            for w in adj[v]:
                if int(w) > v:
                    fh.write(f"# edge {v} {int(w)}\n")
        for rec in run.trace:
            fh.write(rec.to_line() + "\n")


def replay_trace(path) -> tuple[Tree, list[MutationRecord], Tree]:
    """Read a trace file back: (initial tree, records, tree after replay)."""
    n = None
    edges: list[tuple[int, int]] = []
    records: list[MutationRecord] = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                if line.startswith("# n "):
                    n = int(line[len("# n "):])
                elif line.startswith("# edge "):
                    a, b = line[len("# edge "):].split()
                    edges.append((int(a), int(b)))
                continue
            records.append(MutationRecord.from_line(line))
    if n is None or len(edges) != 2 * n - 3:
        raise ValueError(
            f"trace file {path} needs an '# n' header and 2n-3 '# edge' lines"
        )
    adjacency: dict[int, list[int]] = {v: [] for v in range(2 * n - 2)}
    for a, b in edges:
        adjacency[a].append(b)
        adjacency[b].append(a)
    initial = Tree.from_adjacency(adjacency)
    adj = initial.copy_adjacency()
    for rec in records:
        apply_record(adj, rec)
    return initial, records, Tree(adj, validate=True, _copy=False)
