"""Seeded Monte Carlo harness: sweeps, bound checks and statistical suites.

Every replica gets its own generator.  The seed of replica ``r`` at grid
point ``(i, j)`` (index into the lambda grid and the n list) is::

    SeedSequence(master_seed, spawn_key=(i, j, r)).generate_state(1, uint64)[0]

so results depend only on the master seed, never on the worker count or the
order in which replicas finish.
"""
from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats as sps

from . import degree_theory as dt
from .chase_engine import (
    draw_passage_times,
    path_fronts,
    run_gillespie,
    run_quenched,
    run_tree,
)
from .config_graph import MultiGraph, match_half_edges, sample_graph
from .degree_theory import DegreeModel
from .percolation import (
    build_open_subgraph,
    half_edges_closed,
    jprr_stats,
    mark_open,
    percolation_report,
)

__all__ = [
    "Estimate",
    "SweepConfig",
    "SweepRow",
    "SweepResult",
    "ResourceGuardError",
    "replica_seed",
    "replica_rng",
    "sweep",
    "estimate_path_survival",
    "validate_bounds",
    "BoundsCell",
    "SuiteVerdict",
    "property_suite",
    "SUITES",
    "CSV_COLUMNS",
    "PERC_COLUMNS",
]

MODES = ("range", "percolation", "path", "tree")
DEFAULT_MAX_COST = 2 * 10**9

# Frozen thresholds for the finite-n surrogates of the "with high
# probability" statements; see README ("Pilot-frozen thresholds").
ORDER_STATS_DELTA = 0.05
JN_ALPHA_MIN = 0.2
HAT_JN_Q99_MAX = 0.9
Z_BAND = 4.0


class ResourceGuardError(RuntimeError):
    """A sweep was refused because its cost exceeds the configured cap."""


@dataclass(frozen=True)
class Estimate:
    mean: float
    stderr: float
    count: int

    @property
    def ci95(self) -> tuple[float, float]:
        half = 1.959963984540054 * self.stderr
        return (self.mean - half, self.mean + half)

    @classmethod
    def from_samples(cls, x) -> "Estimate":
        x = np.asarray(x, dtype=float)
        if x.size == 0:
            return cls(math.nan, math.nan, 0)
        se = float(x.std(ddof=1) / math.sqrt(x.size)) if x.size > 1 else 0.0
        return cls(float(x.mean()), se, int(x.size))

    @classmethod
    def binomial(cls, successes: int, count: int) -> "Estimate":
        p = successes / count
        return cls(p, math.sqrt(p * (1 - p) / count), count)


def replica_seed(master_seed: int, *coords: int) -> int:
    ss = np.random.SeedSequence(master_seed, spawn_key=tuple(int(c) for c in coords))
    return int(ss.generate_state(1, np.uint64)[0])


def replica_rng(master_seed: int, *coords: int) -> np.random.Generator:
    return np.random.default_rng(replica_seed(master_seed, *coords))


@dataclass(frozen=True)
class SweepConfig:
    """Grid of ``(lambda, n)`` points, each run for ``replicas`` replicas.

    ``mode`` chooses what a replica is:

    * ``range``: fresh graph, one quenched run, records the red range;
    * ``percolation``: as ``range`` plus the open-vertex report on the same
      passage times;
    * ``path``: chase-escape on a path of length ``n``, records the furthest
      red vertex;
    * ``tree``: Galton-Watson tree (root law ``model``, offspring the
      size-biased law) truncated at depth ``n``, records the red range.

    ``fixed_graph`` reuses one graph per grid point instead of a fresh one per
    replica.
    """

    model: DegreeModel
    lambda_grid: tuple[float, ...]
    n_list: tuple[int, ...]
    replicas: int
    delta: float = 0.1
    master_seed: int = 0
    mode: str = "range"
    workers: int = 1
    epsilon: float = 0.3
    fixed_graph: bool = False
    max_cost: int = DEFAULT_MAX_COST

    def __post_init__(self):
        object.__setattr__(self, "lambda_grid", tuple(float(x) for x in self.lambda_grid))
        object.__setattr__(self, "n_list", tuple(int(x) for x in self.n_list))
        if not self.lambda_grid or not self.n_list:
            raise ValueError("lambda grid and n list must be nonempty")
        if any(not lam > 0 for lam in self.lambda_grid):
            raise ValueError("lambda values must be > 0")
        if any(n < 1 for n in self.n_list):
            raise ValueError("n values must be >= 1")
        if self.replicas < 2:
            raise ValueError("replicas must be >= 2")
        if not 0 < self.delta <= 1:
            raise ValueError("delta must lie in (0, 1]")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

    @property
    def cost(self) -> int:
        return len(self.lambda_grid) * sum(self.n_list) * self.replicas

    def echo(self) -> dict:
        """Everything that determines the output (workers excluded)."""
        return {
            "model": self.model.label,
            "lambda_grid": list(self.lambda_grid),
            "n_list": list(self.n_list),
            "replicas": self.replicas,
            "delta": self.delta,
            "master_seed": self.master_seed,
            "mode": self.mode,
            "epsilon": self.epsilon,
            "fixed_graph": self.fixed_graph,
        }


@dataclass(frozen=True)
class SweepRow:
    lam: float
    n: int
    range: Estimate
    p_exceed: Estimate
    aux: dict = field(default_factory=dict)


CSV_COLUMNS = (
    "model",
    "lambda",
    "n",
    "delta",
    "replicas",
    "mean_range",
    "stderr_range",
    "p_exceed",
    "stderr_p",
)
PERC_COLUMNS = (
    "mean_ratio",
    "stderr_ratio",
    "p_giant",
    "stderr_giant",
    "mean_largest_frac",
    "stderr_largest_frac",
    "p_root_open",
    "stderr_root_open",
    "coupling_violations",
)


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


@dataclass(frozen=True)
class SweepResult:
    config: SweepConfig
    rows: tuple[SweepRow, ...]

    def row(self, lam: float, n: int) -> SweepRow:
        for r in self.rows:
            if r.lam == lam and r.n == n:
                return r
        raise KeyError((lam, n))

    @property
    def columns(self) -> tuple[str, ...]:
        return CSV_COLUMNS + (PERC_COLUMNS if self.config.mode == "percolation" else ())

    def records(self) -> list[dict]:
        out = []
        for row in self.rows:
            rec = {
                "model": self.config.model.label,
                "lambda": row.lam,
                "n": row.n,
                "delta": self.config.delta,
                "replicas": self.config.replicas,
                "mean_range": row.range.mean,
                "stderr_range": row.range.stderr,
                "p_exceed": row.p_exceed.mean,
                "stderr_p": row.p_exceed.stderr,
            }
            if self.config.mode == "percolation":
                a = row.aux
                rec.update(
                    mean_ratio=a["ratio"].mean,
                    stderr_ratio=a["ratio"].stderr,
                    p_giant=a["giant"].mean,
                    stderr_giant=a["giant"].stderr,
                    mean_largest_frac=a["largest_frac"].mean,
                    stderr_largest_frac=a["largest_frac"].stderr,
                    p_root_open=a["root_open"].mean,
                    stderr_root_open=a["root_open"].stderr,
                    coupling_violations=a["coupling_violations"],
                )
            out.append(rec)
        return out

    def to_csv(self, header_comment: bool = True) -> str:
        buf = io.StringIO()
        if header_comment:
            buf.write("# config: " + json.dumps(self.config.echo(), sort_keys=True) + "\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for rec in self.records():
            w.writerow([_fmt(rec[c]) for c in self.columns])
        return buf.getvalue()

    def to_json(self, extra: dict | None = None) -> str:
        doc = {"config": self.config.echo(), "rows": self.records()}
        if extra:
            doc.update(extra)
        return json.dumps(doc, indent=2, sort_keys=False)


# -- replica kernels (module level so worker processes can import them) ----


def _coupling_violation(g: MultiGraph, outcome, report, mask) -> bool:
    if not mask.is_open(1):
        return False
    comps = build_open_subgraph(g, mask).components()
    members = np.flatnonzero(comps.labels == comps.labels[1])
    ever = np.isfinite(outcome.r)
    return bool(not ever[members].all() or outcome.range < report.root_open_component)


def _replica_block(task) -> dict[str, np.ndarray]:
    mode, model, lam, n, seeds, epsilon, graph = task
    out: dict[str, list] = {"range": []}
    if mode == "percolation":
        for k in ("ratio", "giant", "largest_frac", "root_open", "violation"):
            out[k] = []
    for seed in seeds:
        rng = np.random.default_rng(seed)
        if mode == "path":
            out["range"].append(int(path_fronts(n, lam, rng, 1)[0]))
            continue
        if mode == "tree":
            res = run_tree(dt.size_biased_offspring(model), model, n, lam, rng)
            out["range"].append(res.range)
            continue
        g = graph if graph is not None else sample_graph(model, n, rng)
        pt = draw_passage_times(g, lam, rng)
        outcome = run_quenched(g, pt)
        out["range"].append(outcome.range)
        if mode == "percolation":
            mask = mark_open(g, pt)
            rep = percolation_report(g, mask)
            out["ratio"].append(rep.ratio)
            out["giant"].append(rep.S_n >= epsilon * rep.M_n)
            out["largest_frac"].append(rep.largest_open_component / n)
            out["root_open"].append(rep.root_open)
            out["violation"].append(_coupling_violation(g, outcome, rep, mask))
    return {k: np.asarray(v) for k, v in out.items()}


def _run_point(cfg: SweepConfig, i: int, j: int, pool) -> dict[str, np.ndarray]:
    lam, n = cfg.lambda_grid[i], cfg.n_list[j]
    seeds = [replica_seed(cfg.master_seed, i, j, r) for r in range(cfg.replicas)]
    graph = None
    if cfg.fixed_graph and cfg.mode in ("range", "percolation"):
        graph = sample_graph(cfg.model, n, replica_rng(cfg.master_seed, i, j, cfg.replicas))
    if pool is None:
        return _replica_block((cfg.mode, cfg.model, lam, n, seeds, cfg.epsilon, graph))
    n_chunks = min(len(seeds), 4 * cfg.workers)
    chunks = [c.tolist() for c in np.array_split(np.asarray(seeds, dtype=np.uint64), n_chunks)]
    tasks = [(cfg.mode, cfg.model, lam, n, c, cfg.epsilon, graph) for c in chunks]
    parts = list(pool.map(_replica_block, tasks))
    return {k: np.concatenate([p[k] for p in parts]) for k in parts[0]}


def sweep(config: SweepConfig) -> SweepResult:
    """Run every grid point; rows come out in (lambda, n) grid order."""
    if config.cost > config.max_cost:
        raise ResourceGuardError(
            f"sweep needs ~{config.cost:.3g} vertex-replicas, cap is {config.max_cost:.3g}"
        )
    pool = ProcessPoolExecutor(config.workers) if config.workers > 1 else None
    rows = []
    try:
        for i, lam in enumerate(config.lambda_grid):
            for j, n in enumerate(config.n_list):
                data = _run_point(config, i, j, pool)
                rng_ = data["range"]
                size = n if config.mode in ("range", "percolation", "path") else None
                if size is None:
                    exceed = np.zeros(rng_.size, dtype=bool)
                    exceed_est = Estimate.binomial(0, rng_.size)
                else:
                    exceed = rng_ > config.delta * size
                    exceed_est = Estimate.binomial(int(exceed.sum()), rng_.size)
                aux = {}
                if config.mode == "percolation":
                    aux = {
                        "ratio": Estimate.from_samples(data["ratio"]),
                        "giant": Estimate.binomial(int(data["giant"].sum()), rng_.size),
                        "largest_frac": Estimate.from_samples(data["largest_frac"]),
                        "root_open": Estimate.binomial(int(data["root_open"].sum()), rng_.size),
                        "coupling_violations": int(data["violation"].sum()),
                    }
                rows.append(
                    SweepRow(lam, n, Estimate.from_samples(rng_), exceed_est, aux)
                )
    finally:
        if pool is not None:
            pool.shutdown()
    return SweepResult(config, tuple(rows))


def estimate_path_survival(
    lam: float, k_max: int, replicas: int, seed: int, chunk: int = 50_000
) -> list[Estimate]:
    """``[P(A_1), ..., P(A_k_max)]`` with binomial standard errors."""
    fronts = []
    done = 0
    block = 0
    while done < replicas:
        size = min(chunk, replicas - done)
        fronts.append(path_fronts(k_max, lam, replica_rng(seed, block), size))
        done += size
        block += 1
    front = np.concatenate(fronts)
    return [Estimate.binomial(int((front >= k).sum()), replicas) for k in range(1, k_max + 1)]


@dataclass(frozen=True)
class BoundsCell:
    lam: float
    n: int
    estimate: Estimate
    kind: str  # "bound" (lam <= Lambda) or "growth"
    threshold: float
    passed: bool


def validate_bounds(
    model: DegreeModel,
    lambdas,
    n_list,
    replicas: int,
    seed: int,
    workers: int = 1,
) -> list[BoundsCell]:
    """Check the uniform range bound below the critical rate; profile growth above.

    A ``bound`` cell passes when ``mean + 4 stderr < C``.  A ``growth`` cell
    passes when its mean exceeds the mean at the previous ``n`` (the first
    ``n`` passes trivially); its ``threshold`` is that previous mean.
    """
    a = dt.branching_ratio(model)
    if not 1 < a < math.inf:
        raise dt.DomainError(f"bound validation needs 1 < a < inf, got {a}")
    lambdas = list(lambdas)
    if not lambdas:
        return []
    crit = dt.lambda_crit(a)
    C = dt.range_const(model)
    res = sweep(
        SweepConfig(model, tuple(lambdas), tuple(n_list), replicas, 0.5, seed, "range", workers)
    )
    cells = []
    for lam in res.config.lambda_grid:
        prev = -math.inf
        for n in res.config.n_list:
            est = res.row(lam, n).range
            if lam <= crit:
                cells.append(
                    BoundsCell(lam, n, est, "bound", C, est.mean + Z_BAND * est.stderr < C)
                )
            else:
                cells.append(BoundsCell(lam, n, est, "growth", prev, est.mean > prev))
                prev = est.mean
    return cells


# -- statistical suites ------------------------------------------------------


@dataclass
class SuiteVerdict:
    name: str
    passed: bool
    stats: dict

    def line(self) -> str:
        head = "PASS" if self.passed else "FAIL"
        body = " ".join(f"{k}={_short(v)}" for k, v in self.stats.items())
        return f"{head} {self.name} {body}"


def _short(v):
    if isinstance(v, float):
        return f"{v:.6g}"
    if isinstance(v, (list, tuple)):
        return "[" + ",".join(str(_short(x)) for x in v) + "]"
    return v


def _suite_matching_uniformity(p: dict, seed: int) -> SuiteVerdict:
    degrees = p.get("degrees", [1, 1, 2])
    samples = int(p.get("samples", 30_000))
    tol = float(p.get("tol", 0.01))
    rng = np.random.default_rng(seed)
    loops = 0
    for _ in range(samples):
        g = match_half_edges(degrees, rng)
        loops += bool(g.is_loop().any())
    freq = loops / samples
    target = float(p.get("target", 1 / 3))
    return SuiteVerdict(
        "matching_uniformity",
        abs(freq - target) <= tol,
        {"samples": samples, "self_loop_freq": freq, "target": target, "tol": tol},
    )


def engine_test_graphs() -> dict[str, MultiGraph]:
    """The two four-vertex fixtures (seed included) used for engine comparison."""
    return {
        "triangle": MultiGraph.from_edges(3, [(1, 2), (2, 3), (1, 3)]),
        "deg112": MultiGraph.from_edges(3, [(1, 3), (2, 3)]),
    }


def range_distributions(g: MultiGraph, lam: float, replicas: int, seed: int):
    """Range counts under both engines, indexed by range value."""
    rq = replica_rng(seed, 0)
    rg = replica_rng(seed, 1)
    q = np.zeros(g.n + 1, dtype=np.int64)
    c = np.zeros(g.n + 1, dtype=np.int64)
    for _ in range(replicas):
        q[run_quenched(g, draw_passage_times(g, lam, rq)).range] += 1
        c[run_gillespie(g, lam, rg).range] += 1
    return q, c


def _suite_engine_equivalence(p: dict, seed: int) -> SuiteVerdict:
    lam = float(p.get("lambda", 1.0))
    replicas = int(p.get("replicas", 100_000))
    alpha = float(p.get("alpha", 0.01))
    out = {"lambda": lam, "replicas": replicas}
    ok = True
    for idx, (name, g) in enumerate(engine_test_graphs().items()):
        q, c = range_distributions(g, lam, replicas, replica_seed(seed, idx))
        table = np.vstack([q, c])
        table = table[:, table.sum(axis=0) > 0]
        if table.shape[1] < 2:
            pval = 1.0
        else:
            pval = float(sps.chi2_contingency(table)[1])
        ok &= pval > alpha
        out[f"{name}_quenched"] = q.tolist()
        out[f"{name}_gillespie"] = c.tolist()
        out[f"{name}_pvalue"] = pval
    return SuiteVerdict("engine_equivalence", bool(ok), out)


def _suite_coupling(p: dict, seed: int) -> SuiteVerdict:
    n = int(p.get("n", 200))
    model = p.get("model", DegreeModel.regular(3))
    lambdas = p.get("lambdas", (5.0, 20.0))
    realizations = int(p.get("realizations", 1000))
    violations = 0
    root_open = 0
    for i, lam in enumerate(lambdas):
        for r in range(realizations):
            rng = replica_rng(seed, i, r)
            g = sample_graph(model, n, rng)
            pt = draw_passage_times(g, lam, rng)
            outcome = run_quenched(g, pt)
            mask = mark_open(g, pt)
            rep = percolation_report(g, mask)
            root_open += rep.root_open
            violations += _coupling_violation(g, outcome, rep, mask)
    return SuiteVerdict(
        "coupling",
        violations == 0,
        {
            "n": n,
            "lambdas": list(lambdas),
            "realizations": realizations * len(lambdas),
            "root_open": root_open,
            "violations": violations,
        },
    )


def _suite_order_stats(p: dict, seed: int) -> SuiteVerdict:
    mu = float(p.get("mu", 3.0))
    n = int(p.get("n", 100_000))
    eps = float(p.get("epsilon", 0.2))
    delta = float(p.get("delta", ORDER_STATS_DELTA))
    replicas = int(p.get("replicas", 100))
    need = int(p.get("need", 99))
    top = math.ceil(delta * n)
    fractions = []
    for r in range(replicas):
        x = np.sort(replica_rng(seed, r).poisson(mu, n))
        fractions.append(float(x[n - top :].sum()) / (mu * n))
    hits = sum(f < eps for f in fractions)
    return SuiteVerdict(
        "order_stats",
        hits >= need,
        {
            "delta": delta,
            "epsilon": eps,
            "hits": hits,
            "replicas": replicas,
            "max_top_fraction": max(fractions),
        },
    )


def _suite_jn_bound(p: dict, seed: int) -> SuiteVerdict:
    n = int(p.get("n", 10_000))
    replicas = int(p.get("replicas", 100))
    alpha_min = float(p.get("alpha_min", JN_ALPHA_MIN))
    mixed = p.get("model", DegreeModel.explicit({1: 0.5, 3: 0.5}))
    regular = DegreeModel.regular(3)
    reg_j = []
    ratios = []
    for r in range(replicas):
        rng = replica_rng(seed, r)
        reg_j.append(jprr_stats(regular.sample(rng, n)).j_n)
        ratios.append(jprr_stats(mixed.sample(rng, n)).j_n / n)
    alpha = 1 - max(ratios)
    return SuiteVerdict(
        "jn_bound",
        all(j == 1 for j in reg_j) and alpha >= alpha_min,
        {
            "n": n,
            "replicas": replicas,
            "regular_jn_max": max(reg_j),
            "mixed_jn_frac_mean": float(np.mean(ratios)),
            "observed_alpha": alpha,
            "alpha_min": alpha_min,
        },
    )


def _suite_hat_jn_bound(p: dict, seed: int) -> SuiteVerdict:
    n = int(p.get("n", 10_000))
    lam = float(p.get("lambda", 20.0))
    replicas = int(p.get("replicas", 100))
    model = p.get("model", DegreeModel.regular(3))
    limit = float(p.get("q99_max", HAT_JN_Q99_MAX))
    fr = []
    for r in range(replicas):
        rng = replica_rng(seed, r)
        g = sample_graph(model, n, rng)
        rep = percolation_report(g, mark_open(g, draw_passage_times(g, lam, rng)))
        fr.append(rep.j_n / n)
    q99 = float(np.quantile(fr, 0.99))
    return SuiteVerdict(
        "hat_jn_bound",
        q99 < limit,
        {"n": n, "lambda": lam, "replicas": replicas, "q99": q99, "limit": limit},
    )


def _suite_en_bound(p: dict, seed: int) -> SuiteVerdict:
    n = int(p.get("n", 10_000))
    lam = float(p.get("lambda", 20.0))
    replicas = int(p.get("replicas", 20))
    d = int(p.get("d", 3))
    model = DegreeModel.regular(d)
    vals = []
    for r in range(replicas):
        rng = replica_rng(seed, r)
        g = sample_graph(model, n, rng)
        mask = mark_open(g, draw_passage_times(g, lam, rng))
        vals.append(half_edges_closed(g, mask) / n)
    est = Estimate.from_samples(vals)
    target = d * (1 - dt.open_probability(d, lam))
    return SuiteVerdict(
        "en_bound",
        est.mean <= target + Z_BAND * est.stderr,
        {
            "n": n,
            "lambda": lam,
            "mean_En_over_n": est.mean,
            "stderr": est.stderr,
            "closed_form": target,
        },
    )


SUITES = {
    "order_stats": _suite_order_stats,
    "jn_bound": _suite_jn_bound,
    "hat_jn_bound": _suite_hat_jn_bound,
    "en_bound": _suite_en_bound,
    "engine_equivalence": _suite_engine_equivalence,
    "coupling": _suite_coupling,
    "matching_uniformity": _suite_matching_uniformity,
}


def property_suite(name: str, params: dict | None = None, seed: int = 0) -> SuiteVerdict:
    """Run one named statistical suite; ``params`` overrides its defaults."""
    try:
        fn = SUITES[name]
    except KeyError:
        raise ValueError(f"unknown suite {name!r}; choose from {sorted(SUITES)}") from None
    return fn(dict(params or {}), seed)
