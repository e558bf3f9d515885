"""Property suites behind ``linsubmod verify`` and the acceptance tests.

Every suite draws its instances from ``numpy.random.default_rng([seed, i])``
so a suite run is reproducible from its seed alone.  Optimal values come from
:func:`~linsubmod.baselines.brute_force`.
"""
from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from .baselines import brute_force, density_greedy, double_greedy, greedy, lazy_greedy, stochastic_greedy
from .constraints import (
    AllOf,
    CardinalityConstraint,
    KnapsackConstraint,
    MultiKnapsackConstraint,
    MultiKnapsackInstance,
    PartitionMatroid,
    SystemConstraint,
    Unconstrained,
    cardinality,
    normalize_knapsack,
)
from .errors import UnknownSuite
from .hardness import SIGame, find_identifying_matrix, hard_instance, si_solve
from .instances import random_costs, random_graph_with_hubs, random_small_objective, ratio
from .objectives import CutObjective, ModularObjective, vertex_cover_objective
from .oracle import QueryCountingOracle
from .smk import estimate_opt, fast_threshold_greedy, smc_maximize, smk_maximize
from .smks import (
    big_alg_singleton,
    fast_inverse_ratio,
    preprocess,
    quality_inverse_ratio,
    rho_guessing,
    set_extract,
    set_extract_total,
    smks_basic,
    smks_maximize,
    smks_nearly_linear,
)

SLACK = 1e-9


@dataclass
class Check:
    name: str
    passed: int = 0
    total: int = 0
    worst: float | None = None
    note: str = ""
    failures: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.passed == self.total

    def record(self, ok: bool, detail: str = "") -> None:
        self.total += 1
        if ok:
            self.passed += 1
        elif len(self.failures) < 5:
            self.failures.append(detail)

    def observe(self, value: float, lower_is_worse: bool = True) -> None:
        if self.worst is None or (value < self.worst if lower_is_worse else value > self.worst):
            self.worst = value

    def line(self) -> str:
        tag = "PASS" if self.ok else "FAIL"
        worst = "" if self.worst is None else f"; worst {self.note or 'value'} {self.worst:.6g}"
        return f"[{tag}] {self.name}: {self.passed}/{self.total}{worst}"


@dataclass
class SuiteReport:
    suite: str
    checks: list[Check]
    seconds: float = 0.0

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def lines(self) -> list[str]:
        out = [c.line() for c in self.checks]
        for c in self.checks:
            out.extend(f"    {c.name}: {f}" for f in c.failures)
        out.append(f"{self.suite}: {'ok' if self.ok else 'FAILED'} in {self.seconds:.2f}s")
        return out


def _rng(seed: int, i: int) -> np.random.Generator:
    return np.random.default_rng([seed, i])


# --- estimator / SMC / SMK ----------------------------------------------------

def _knapsack_fixture(rng, n_lo: int, n_hi: int):
    n = int(rng.integers(n_lo, n_hi + 1))
    f = random_small_objective(rng, n)
    if rng.random() < 0.5:
        inst = cardinality(n, int(rng.integers(1, max(1, n // 2) + 1)))
    else:
        inst = normalize_knapsack(random_costs(rng, n)[0])
    return f, inst


def suite_estimator_sandwich(seed: int = 0, count: int = 200) -> list[Check]:
    c = Check("gamma <= OPT <= 8 gamma", note="OPT/gamma")
    for i in range(count):
        f, inst = _knapsack_fixture(_rng(seed, i), 4, 12)
        est = estimate_opt(QueryCountingOracle(f), inst)
        _, opt = brute_force(QueryCountingOracle(f), KnapsackConstraint(inst))
        c.record(est.gamma <= opt + SLACK and opt <= 8 * est.gamma + SLACK,
                 f"instance {i}: gamma={est.gamma}, OPT={opt}")
        if est.gamma > 0:
            c.observe(opt / est.gamma, lower_is_worse=False)
    return [c]


def suite_smc_ratio(seed: int = 0, count: int = 200, eps: float = 0.1) -> list[Check]:
    bound = 1 - 1 / math.e - eps
    c = Check(f"f(out) >= (1 - 1/e - {eps}) OPT", note="ratio")
    for i in range(count):
        rng = _rng(seed, i)
        n = int(rng.integers(4, 15))
        k = int(rng.integers(1, min(4, n) + 1))
        f = random_small_objective(rng, n)
        res = smc_maximize(QueryCountingOracle(f), k, eps)
        _, opt = brute_force(QueryCountingOracle(f), CardinalityConstraint(k))
        c.record(res.value >= bound * opt - SLACK and len(res.solution) <= k,
                 f"instance {i}: value={res.value}, OPT={opt}")
        c.observe(ratio(res.value, opt))
    return [c]


def trap_instance(delta: float = 0.01):
    """Cheap element ``u`` worth ``2 delta`` next to a full-budget element ``w`` worth 1."""
    return ModularObjective([2 * delta, 1.0]), normalize_knapsack([delta, 1.0])


def suite_smk_ratio(seed: int = 0, count: int = 200, eps: float = 0.1) -> list[Check]:
    c = Check(f"f(out) >= (1/2 - {eps}) OPT", note="ratio")
    trap = Check("trap: threshold greedy alone keeps {u}, smk returns {w}")
    f, inst = trap_instance()
    plain = fast_threshold_greedy(QueryCountingOracle(f), inst, eps)
    res = smk_maximize(QueryCountingOracle(f), inst, eps)
    trap.record(plain.sequence == [0] and res.solution == (1,),
                f"greedy={plain.sequence}, smk={res.solution}")
    c.record(res.value >= (0.5 - eps) * 1.0 - SLACK, f"trap: value={res.value}")
    c.observe(res.value)
    for i in range(count - 1):
        f, inst = _knapsack_fixture(_rng(seed, i), 4, 12)
        res = smk_maximize(QueryCountingOracle(f), inst, eps)
        _, opt = brute_force(QueryCountingOracle(f), KnapsackConstraint(inst))
        c.record(res.value >= (0.5 - eps) * opt - SLACK and inst.is_feasible(res.solution),
                 f"instance {i}: value={res.value}, OPT={opt}")
        c.observe(ratio(res.value, opt))
    return [c, trap]


def smc_flatness(seed: int = 0, n: int = 20000, eps: float = 0.5,
                 ks: tuple[int, ...] = (10, 100, 1000)) -> tuple[dict[int, int], Check, Check]:
    nodes, edges = random_graph_with_hubs(n - 20, seed)
    f = vertex_cover_objective(nodes, edges)
    counts = {k: smc_maximize(QueryCountingOracle(f), k, eps).queries for k in ks}
    spread = max(counts.values()) / min(counts.values())
    flat = Check("query counts within 5% across k", note="max/min")
    flat.record(spread <= 1.05, f"counts={counts}")
    flat.observe(spread, lower_is_worse=False)
    cap = Check(f"queries <= 12 n / eps = {12 * n / eps:g}", note="max queries")
    cap.record(max(counts.values()) <= 12 * n / eps, f"counts={counts}")
    cap.observe(max(counts.values()), lower_is_worse=False)
    return counts, flat, cap


def suite_smc_flatness(seed: int = 0) -> list[Check]:
    _, flat, cap = smc_flatness(seed)
    return [flat, cap]


# --- SetExtract / SMKS ----------------------------------------------------------

def setextract_fixture(rng, lam: int, d: int, n: int = 24, grid: int = 64):
    """Small elements on a dyadic grid and an order whose last element overflows a budget."""
    while True:
        C = rng.integers(0, grid // lam + 1, size=(d, n)) / grid
        C[int(rng.integers(d)), C.sum(axis=0) == 0] = 1 / grid
        mk = MultiKnapsackInstance(C, tuple(range(n)))
        order = rng.permutation(n).tolist()
        loads = np.zeros(d)
        for j, u in enumerate(order):
            loads += C[:, u]
            if loads.max() > 1:
                return mk, order[: j + 1]


def suite_setextract(seed: int = 0, count: int = 1000) -> list[Check]:
    c = Check("feasible and sum_i c_i(T) >= lam/(lam+1)", note="total - lam/(lam+1)")
    for i in range(count):
        rng = _rng(seed, i)
        lam, d = int(rng.integers(1, 4)), int(rng.integers(1, 4))
        mk, S = setextract_fixture(rng, lam, d)
        T = set_extract(lam, S, mk)
        total = set_extract_total(T, mk)
        ok = (max(mk.loads(T)) <= 1 and set(T) <= set(S) and len(set(T)) == len(T)
              and total >= Fraction(lam, lam + 1))
        c.record(ok, f"instance {i}: lam={lam}, d={d}, total={float(total)}")
        c.observe(float(total - Fraction(lam, lam + 1)))
    return [c]


def smks_fixture(rng):
    n = int(rng.integers(5, 11))
    d = int(rng.integers(1, 3))
    f = random_small_objective(rng, n)
    parts = rng.integers(0, 3, size=n).tolist()
    limits = {q: int(rng.integers(1, 4)) for q in range(3)}
    system = PartitionMatroid(parts, limits)
    raw = rng.integers(0, 13, size=(d, n)) / 10
    raw[0, raw.sum(axis=0) == 0] = 0.1
    mk = preprocess(system, raw)
    return f, system, mk


def smks_opt(f, system, mk) -> float:
    return brute_force(QueryCountingOracle(f), AllOf(SystemConstraint(system), MultiKnapsackConstraint(mk)))[1]


def suite_smks_ratio(seed: int = 0, count: int = 100, eps: float = 0.1,
                     flavors: tuple[str, ...] = ("fast", "quality")) -> list[Check]:
    checks = []
    pool = [smks_fixture(_rng(seed, i)) for i in range(count)]
    opts = [smks_opt(*inst) for inst in pool]
    for flavor in flavors:
        inv = fast_inverse_ratio if flavor == "fast" else quality_inverse_ratio
        c = Check(f"{flavor}: f(out) * inverse ratio >= OPT", note="ratio")
        for i, ((f, system, mk), opt) in enumerate(zip(pool, opts)):
            res = smks_maximize(QueryCountingOracle(f), system, mk, eps, flavor)
            feasible = mk.is_feasible(res.solution) and system.is_independent(res.solution)
            c.record(feasible and res.value * inv(system.p, mk.d, eps) >= opt - SLACK,
                     f"instance {i}: value={res.value}, OPT={opt}, feasible={feasible}")
            c.observe(ratio(res.value, opt))
        checks.append(c)
    return checks


# --- hardness -------------------------------------------------------------------

def hardness_separation(seed: int = 0, runs: int = 200, n: int = 2000, k: int = 2, alpha: float = 0.5,
                        eps: float = 0.1) -> tuple[float, list[float]]:
    """Mean ratio of sample-size-1 stochastic greedy and the per-run ratios of smc."""
    sg, smc = [], []
    for i in range(runs):
        u = int(_rng(seed, i).integers(n))
        f = hard_instance(n, k, alpha, u)
        sg.append(stochastic_greedy(QueryCountingOracle(f), k, seed=seed * 100003 + i, sample_size=1).value / f.t)
        smc.append(smc_maximize(QueryCountingOracle(f), k, eps).value / f.t)
    return float(np.mean(sg)), smc


def suite_hardness(seed: int = 0, runs: int = 200) -> list[Check]:
    mean_sg, smc = hardness_separation(seed, runs)
    weak = Check("stochastic greedy (s=1) mean ratio <= 0.55", note="mean ratio")
    weak.record(mean_sg <= 0.55, f"mean={mean_sg}")
    weak.observe(mean_sg, lower_is_worse=False)
    strong = Check("smc ratio >= 0.53 on every run", note="ratio")
    for i, r in enumerate(smc):
        strong.record(r >= 0.53, f"run {i}: ratio={r}")
        strong.observe(r)
    sub = Check("f_u monotone submodular (n=6, exhaustive)")
    for u in range(3):
        f = hard_instance(6, 2, 0.5, u)
        sub.record(_exhaustive_submodular(f), f"u={u}")
    return [weak, strong, sub]


def _exhaustive_submodular(f) -> bool:
    n = f.n
    val = {m: f([i for i in range(n) if m >> i & 1]) for m in range(1 << n)}
    for S in range(1 << n):
        for u in range(n):
            if S >> u & 1:
                continue
            gain = val[S | 1 << u] - val[S]
            if gain < 0:
                return False
            for v in range(n):
                if v != u and not S >> v & 1 and val[S | 1 << v | 1 << u] - val[S | 1 << v] > gain:
                    return False
    return True


def suite_si_recovery(seed: int = 0, n: int = 8, k: int = 4, random_games: int = 200) -> list[Check]:
    matrix = find_identifying_matrix(n)
    rec = Check(f"si_solve recovers every hidden {k}-subset of {n} with q={matrix.q}")
    for C in itertools.combinations(range(n), k):
        res = si_solve(SIGame(n, k, hidden=C), matrix)
        rec.record(res.recovered == C and res.queries == matrix.q, f"hidden={C}, got={res.recovered}")
    bound = Check("adversary keeps |L_i| >= |C|/(k+1)^i")
    game = SIGame(n, k)
    res = si_solve(game, matrix)
    bound.record(game.list_bound_holds() and len(game.candidates) == 1 and res.recovered == game.commit(),
                 "adversary game against si_solve")
    for i in range(random_games):
        rng = _rng(seed, i)
        game = SIGame(n, k)
        for _ in range(int(rng.integers(1, 12))):
            game.query(np.flatnonzero(rng.random(n) < 0.5).tolist())
        bound.record(game.list_bound_holds(), f"random game {i}")
    return [rec, bound]


# --- baselines and determinism -----------------------------------------------------

def suite_lazy_equivalence(seed: int = 0, count: int = 500) -> list[Check]:
    c = Check("lazy greedy = greedy with no more queries", note="lazy/greedy queries")
    for i in range(count):
        rng = _rng(seed, i)
        kind = ("coverage", "facility", "modular")[i % 3]
        # facility values are sums / n; a power-of-two n keeps every gain exact so ties stay ties
        n = int(rng.choice([4, 8, 16])) if kind == "facility" else int(rng.integers(3, 21))
        k = int(rng.integers(1, n + 1))
        f = random_small_objective(rng, n, kind)
        g = greedy(QueryCountingOracle(f), CardinalityConstraint(k))
        lz = lazy_greedy(QueryCountingOracle(f), k)
        c.record(lz.solution == g.solution and lz.queries <= g.queries,
                 f"fixture {i}: greedy={g.solution}/{g.queries}, lazy={lz.solution}/{lz.queries}")
        c.observe(lz.queries / g.queries, lower_is_worse=False)
    return [c]


def deterministic_runs(seed: int = 0) -> dict[str, Callable[[], object]]:
    """Named zero-argument runners for every deterministic algorithm on fixed fixtures."""
    rng = _rng(seed, 0)
    f = random_small_objective(rng, 14, "coverage")
    n = f.n
    kn = normalize_knapsack(random_costs(rng, n)[0])
    g, system, mk = smks_fixture(_rng(seed, 1))
    cut = CutObjective(10, [(a, b) for a in range(10) for b in range(10) if a != b and (a * 7 + b) % 3 == 0])
    se_mk, se_S = setextract_fixture(_rng(seed, 2), 2, 2)

    def o(fn=f):
        return QueryCountingOracle(fn)

    def smks_runs(run):
        def go():
            oracle = o(g)
            return run(oracle)
        return go

    return {
        "estimate_opt": lambda: estimate_opt(o(), kn),
        "fast_threshold_greedy": lambda: fast_threshold_greedy(o(), kn, 0.1, 2.0),
        "smc": lambda: smc_maximize(o(), 4, 0.1),
        "smk": lambda: smk_maximize(o(), kn, 0.1),
        "set_extract": lambda: set_extract(2, se_S, se_mk),
        "smks_basic": smks_runs(lambda orc: smks_basic(orc, system, mk, 2, 0.5, big_alg_singleton)),
        "smks_nearly_linear": smks_runs(lambda orc: smks_nearly_linear(orc, system, mk, 2, 0.5, 0.1,
                                                                       big_alg_singleton)),
        "rho_guessing_basic": smks_runs(lambda orc: rho_guessing(orc, system, mk, 2, 0.1)),
        "rho_guessing_nearly_linear": smks_runs(lambda orc: rho_guessing(orc, system, mk, 2, 0.1,
                                                                         "nearly_linear", 0.1)),
        "smks_fast": smks_runs(lambda orc: smks_maximize(orc, system, mk, 0.1, "fast")),
        "smks_quality": smks_runs(lambda orc: smks_maximize(orc, system, mk, 0.1, "quality")),
        "greedy": lambda: greedy(o(), CardinalityConstraint(4)),
        "lazy_greedy": lambda: lazy_greedy(o(), 4),
        "density_greedy": lambda: density_greedy(o(), kn),
        "double_greedy": lambda: double_greedy(o(cut)),
        "stochastic_greedy(seed=3)": lambda: stochastic_greedy(o(), 4, 0.1, seed=3),
        "greedy(unconstrained cut)": lambda: greedy(o(cut), Unconstrained()),
    }


def fingerprint(result) -> object:
    fp = getattr(result, "fingerprint", None)
    if fp is not None:
        return fp()
    if hasattr(result, "__dataclass_fields__"):
        return repr({k: getattr(result, k) for k in result.__dataclass_fields__ if k not in ("millis",)})
    return repr(result)


def suite_determinism(seed: int = 0) -> list[Check]:
    c = Check("identical results across two runs")
    for name, run in deterministic_runs(seed).items():
        c.record(fingerprint(run()) == fingerprint(run()), name)
    return [c]


SUITES: dict[str, Callable[..., list[Check]]] = {
    "estimator-sandwich": suite_estimator_sandwich,
    "smc-ratio": suite_smc_ratio,
    "smc-flatness": suite_smc_flatness,
    "smk-ratio": suite_smk_ratio,
    "setextract": suite_setextract,
    "smks-ratio": suite_smks_ratio,
    "hardness": suite_hardness,
    "si-recovery": suite_si_recovery,
    "lazy-equivalence": suite_lazy_equivalence,
    "determinism": suite_determinism,
}


def run_suite(name: str, seed: int = 0, **kwargs) -> SuiteReport:
    try:
        fn = SUITES[name]
    except KeyError:
        raise UnknownSuite(f"unknown suite {name!r}; known: {', '.join(SUITES)}") from None
    t0 = time.perf_counter()
    checks = fn(seed=seed, **kwargs)
    return SuiteReport(name, checks, time.perf_counter() - t0)
