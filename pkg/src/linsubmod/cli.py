"""Command-line harness: ``gen``, ``solve``, ``bench``, ``verify`` and ``adversary``.

Exit codes: 0 success, 1 a verification check failed, 2 invalid input.
"""
from __future__ import annotations

import argparse
import configparser
import csv
import io
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from . import baselines, hardness, instances
from .constraints import PartitionMatroid, cardinality, normalize_knapsack
from .errors import SubmodError, InvalidSpec, UnknownSuite
from .oracle import QueryCountingOracle, SetFunction
from .result import SOLVE_COLUMNS, SolveResult, Stopwatch
from .smk import smc_maximize, smk_maximize
from .smks import big_alg_singleton, preprocess, rho_guessing, smks_basic, smks_maximize, smks_nearly_linear
from .verify import SUITES, run_suite

BENCH_COLUMNS = ("experiment", "algorithm", "n", "param", "eps", "seed", "value", "queries", "millis", "error")
ADVERSARY_COLUMNS = ("mode", "game", "algorithm", "n", "k", "seed", "queries", "intersection", "ratio")

EXIT_OK, EXIT_CHECK, EXIT_INPUT = 0, 1, 2


# --- problem and algorithm registry -------------------------------------------

@dataclass
class Problem:
    """An objective plus the constraint data a run may need."""

    f: SetFunction
    constraint: str = "cardinality"
    costs: np.ndarray | None = None
    system: PartitionMatroid | None = None


@dataclass(frozen=True)
class AlgoSpec:
    run: Callable[..., SolveResult]
    constraint: str
    uses_eps: bool = False
    randomized: bool = False


def _knapsack(problem: Problem, param):
    if problem.constraint == "cardinality":
        return cardinality(problem.f.n, int(param))
    if problem.costs is None:
        raise InvalidSpec("knapsack runs need a cost file")
    return normalize_knapsack(problem.costs[0], float(param))


def _run_smks(flavor):
    def run(oracle, problem, param, eps, seed, opts):
        mk = _system_instance(problem, param)
        res = smks_maximize(oracle, problem.system, mk, eps, flavor)
        res.param = param
        return res
    return run


def _system_instance(problem: Problem, param):
    if problem.system is None or problem.costs is None:
        raise InvalidSpec("set-system runs need a partition file and a cost file")
    return preprocess(problem.system, problem.costs, [float(param)] * problem.costs.shape[0])


def _run_smks_fixed(variant):
    def run(oracle, problem, param, eps, seed, opts):
        mk = _system_instance(problem, param)
        lam = int(opts.get("lambda", 2))
        with Stopwatch() as sw:
            if variant == "basic":
                out = smks_basic(oracle, problem.system, mk, lam, float(opts.get("rho", 0.0)), big_alg_singleton)
            else:
                out = smks_nearly_linear(oracle, problem.system, mk, lam, float(opts.get("rho", 0.0)), eps,
                                         big_alg_singleton)
        return SolveResult(f"smks_{variant}", out.solution, out.value, out.queries, oracle.n, param=param,
                           eps=eps if variant != "basic" else None, millis=sw.millis, trace=out)
    return run


def _run_rho(oracle, problem, param, eps, seed, opts):
    mk = _system_instance(problem, param)
    lam = int(opts.get("lambda", 2))
    res = rho_guessing(oracle, problem.system, mk, lam, float(opts.get("delta", eps)), "basic", eps,
                       big_alg_singleton, alpha_lower_inv=max(mk.d * (lam - 1), 1))
    res.param = param
    return res


def _named(res: SolveResult, name: str, param) -> SolveResult:
    res.algorithm, res.param = name, param
    return res


ALGORITHMS: dict[str, AlgoSpec] = {
    "smc": AlgoSpec(lambda o, p, param, eps, seed, opts: smc_maximize(o, int(param), eps), "cardinality", True),
    "smk": AlgoSpec(lambda o, p, param, eps, seed, opts: smk_maximize(o, _knapsack(p, param), eps, param=param),
                    "knapsack", True),
    "smks-fast": AlgoSpec(_run_smks("fast"), "system", True),
    "smks-quality": AlgoSpec(_run_smks("quality"), "system", True),
    "smks-basic": AlgoSpec(_run_smks_fixed("basic"), "system"),
    "smks-nearly-linear": AlgoSpec(_run_smks_fixed("nearly_linear"), "system", True),
    "rho-guessing": AlgoSpec(_run_rho, "system", True),
    "greedy": AlgoSpec(lambda o, p, param, eps, seed, opts: baselines.greedy(
        o, baselines.CardinalityConstraint(int(param)), param=int(param)), "cardinality"),
    "lazy_greedy": AlgoSpec(lambda o, p, param, eps, seed, opts: baselines.lazy_greedy(o, int(param)), "cardinality"),
    "stochastic_greedy": AlgoSpec(lambda o, p, param, eps, seed, opts: baselines.stochastic_greedy(
        o, int(param), eps, seed=seed), "cardinality", True, True),
    "density_greedy": AlgoSpec(lambda o, p, param, eps, seed, opts: baselines.density_greedy(
        o, _knapsack(p, param), param=param), "knapsack"),
    "double_greedy": AlgoSpec(lambda o, p, param, eps, seed, opts: _named(
        baselines.double_greedy(o), "double_greedy", param), "none"),
}


def run_one(name: str, problem: Problem, param, eps: float | None, seed: int,
            query_cap: int | None = None, opts: dict | None = None) -> SolveResult:
    algo = ALGORITHMS[name]
    oracle = QueryCountingOracle(problem.f, cap=query_cap)
    return algo.run(oracle, problem, param, eps, seed, opts or {})


# --- spec files -----------------------------------------------------------------

def parse_values(text: str, cast=float) -> list:
    """``"5:50:5"`` (inclusive range) or ``"0.1, 0.2"`` (list)."""
    text = text.strip()
    if not text:
        return []
    if ":" in text:
        parts = [cast(x) for x in text.split(":")]
        if len(parts) != 3 or parts[2] <= 0:
            raise InvalidSpec(f"range {text!r} must be start:stop:step with a positive step")
        start, stop, step = parts
        out, i = [], 0
        while start + i * step <= stop + 1e-12:
            out.append(cast(start + i * step))
            i += 1
        return out
    return [cast(x) for x in text.replace(",", " ").split()]


def _as_int(x) -> int:
    v = float(x)
    if v != int(v):
        raise InvalidSpec(f"expected an integer, got {x!r}")
    return int(v)


@dataclass
class AlgoRun:
    name: str
    eps: list
    seeds: list[int]
    opts: dict = field(default_factory=dict)


@dataclass
class ExperimentSpec:
    id: str
    problem: Problem
    params: list
    algorithms: list[AlgoRun]
    output: Path | None = None
    query_cap: int | None = None

    def rows(self) -> Iterable[tuple[AlgoRun, object, float | None, int]]:
        for algo in self.algorithms:
            for eps in algo.eps:
                for param in self.params:
                    for seed in algo.seeds:
                        yield algo, param, eps, seed


def _load_problem(sec: configparser.SectionProxy, base: Path, cache: Path) -> Problem:
    kind = sec.get("objective")
    if not kind:
        raise InvalidSpec("[experiment] needs an objective")
    gen_kind = sec.get("generate")
    if gen_kind:
        n = _as_int(sec.get("n", "0"))
        path = instances.generate(gen_kind, n, {}, _as_int(sec.get("gen_seed", "0")), cache)
    else:
        if "data" not in sec:
            raise InvalidSpec("[experiment] needs data or generate")
        path = base / sec["data"]
    if not path.exists():
        raise InvalidSpec(f"data file {path} does not exist")
    f = instances.load_objective(kind, path, lam=float(sec.get("lam", "1")), alpha=float(sec.get("alpha", "1")))
    constraint = sec.get("constraint", "cardinality")
    costs = system = None
    if "costs" in sec:
        cpath = base / sec["costs"]
        if not cpath.exists():
            raise InvalidSpec(f"cost file {cpath} does not exist")
        costs = instances.load_costs(cpath, f.n)
    if "partition" in sec:
        ppath = base / sec["partition"]
        if not ppath.exists():
            raise InvalidSpec(f"partition file {ppath} does not exist")
        system = instances.load_partition(ppath, _as_int(sec.get("limit", "1")), f.n)
    return Problem(f, constraint, costs, system)


def load_spec(path: str | Path, default_seed: int = 0, cache: Path | None = None) -> ExperimentSpec:
    """Parse an INI experiment file (grammar in the README)."""
    path = Path(path)
    if not path.exists():
        raise InvalidSpec(f"spec file {path} does not exist")
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        cp.read(path)
    except configparser.Error as exc:
        raise InvalidSpec(str(exc)) from exc
    if "experiment" not in cp:
        raise InvalidSpec("missing [experiment] section")
    sec = cp["experiment"]
    base = path.parent
    problem = _load_problem(sec, base, cache or base / "instances")
    key = {"cardinality": "k", "knapsack": "budget", "system": "budget"}.get(problem.constraint)
    if key is None:
        raise InvalidSpec(f"unknown constraint {problem.constraint!r}")
    cast = _as_int if key == "k" else float
    params = parse_values(sec.get(key, ""), cast)
    if not params:
        raise InvalidSpec(f"[experiment] needs a nonempty {key} range")
    algos = []
    for name in cp.sections():
        if not name.startswith("algorithm"):
            continue
        algo = name.split(None, 1)[1].strip() if " " in name else ""
        if algo not in ALGORITHMS:
            raise InvalidSpec(f"unknown algorithm {algo!r}; known: {', '.join(ALGORITHMS)}")
        spec = ALGORITHMS[algo]
        a = cp[name]
        if spec.constraint not in ("none", problem.constraint) and not (
                spec.constraint == "knapsack" and problem.constraint == "cardinality"):
            raise InvalidSpec(f"{algo} does not run under a {problem.constraint} constraint")
        eps = parse_values(a.get("eps", "0.1")) if spec.uses_eps else [None]
        if not eps:
            raise InvalidSpec(f"{algo}: empty eps list")
        if spec.randomized:
            if "seeds" not in a:
                raise InvalidSpec(f"{algo} is randomized and needs a seeds list")
            seeds = parse_values(a["seeds"], _as_int)
        else:
            seeds = parse_values(a.get("seeds", str(default_seed)), _as_int)
        if not seeds:
            raise InvalidSpec(f"{algo}: empty seeds list")
        opts = {k: float(a[k]) for k in ("lambda", "rho", "delta") if k in a}
        algos.append(AlgoRun(algo, eps, seeds, opts))
    if not algos:
        raise InvalidSpec("the experiment file lists no [algorithm ...] sections")
    output = base / sec["output"] if "output" in sec else None
    cap = _as_int(sec["query_cap"]) if "query_cap" in sec else None
    return ExperimentSpec(sec.get("id", path.stem), problem, params, algos, output, cap)


def _bench_row(spec: ExperimentSpec, algo: AlgoRun, param, eps, seed, cap) -> dict:
    row = {"experiment": spec.id, "algorithm": algo.name, "n": spec.problem.f.n, "param": param,
           "eps": "" if eps is None else eps, "seed": seed, "value": "", "queries": "", "millis": "",
           "error": ""}
    try:
        res = run_one(algo.name, spec.problem, param, eps, seed, cap, algo.opts)
    except (SubmodError, ValueError, ArithmeticError) as exc:
        row["error"] = f"{type(exc).__name__}: {exc}"
        return row
    r = res.row()
    row.update(value=r["value"], queries=r["queries"], millis=r["millis"])
    return row


def run_experiment(spec: ExperimentSpec, threads: int = 1, query_cap: int | None = None) -> list[dict]:
    """All rows of the sweep, in spec order; each row gets a fresh oracle."""
    cap = query_cap if query_cap is not None else spec.query_cap
    jobs = list(spec.rows())
    call = lambda job: _bench_row(spec, *job, cap)  # noqa: E731
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(call, jobs))
    return [call(job) for job in jobs]


def write_csv(rows: Sequence[dict], columns: Sequence[str], out: str | Path | None) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(columns), lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    text = buf.getvalue()
    if out is None or str(out) == "-":
        sys.stdout.write(text)
    else:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)
    return text


# --- subcommands --------------------------------------------------------------------

def cmd_gen(args) -> int:
    params = dict(_kv(p) for p in args.param)
    path = instances.generate(args.kind, args.n, params, args.seed, args.out or "instances")
    print(path)
    return EXIT_OK


def _kv(text: str):
    if "=" not in text:
        raise InvalidSpec(f"expected key=value, got {text!r}")
    k, v = text.split("=", 1)
    try:
        v = int(v)
    except ValueError:
        try:
            v = float(v)
        except ValueError:
            pass
    return k.strip(), v


def cmd_solve(args) -> int:
    if args.flavor:
        args.algorithm = f"smks-{args.flavor}"
    if not args.algorithm:
        raise InvalidSpec("solve needs --algorithm or --flavor")
    f = instances.load_objective(args.objective, args.data, lam=args.lam, alpha=args.alpha)
    costs = instances.load_costs(args.costs, f.n) if args.costs else None
    system = instances.load_partition(args.partition, args.limit, f.n) if args.partition else None
    spec = ALGORITHMS[args.algorithm]
    if spec.constraint == "cardinality" or (spec.constraint == "knapsack" and costs is None):
        if args.k is None:
            raise InvalidSpec(f"{args.algorithm} needs --k")
        problem, param = Problem(f, "cardinality"), args.k
    elif spec.constraint == "none":
        problem, param = Problem(f, "none"), None
    else:
        problem = Problem(f, spec.constraint, costs, system)
        param = args.budget
    opts = {"lambda": args.lam_cut, "rho": args.rho, "delta": args.delta if args.delta is not None else args.eps}
    res = run_one(args.algorithm, problem, param, args.eps, args.seed, args.query_cap, opts)
    write_csv([res.row()], SOLVE_COLUMNS, args.out)
    return EXIT_OK


def cmd_bench(args) -> int:
    spec = load_spec(args.spec, args.seed)
    rows = run_experiment(spec, args.threads, args.query_cap)
    write_csv(rows, BENCH_COLUMNS, args.out or spec.output)
    return EXIT_OK


def cmd_verify(args) -> int:
    names = list(SUITES) if args.suites == ["all"] else args.suites
    for name in names:
        if name not in SUITES:
            raise UnknownSuite(f"unknown suite {name!r}; known: {', '.join(SUITES)}")
    ok = True
    for name in names:
        report = run_suite(name, seed=args.seed)
        print("\n".join(report.lines()), flush=True)
        ok = ok and report.ok
    return EXIT_OK if ok else EXIT_CHECK


def adversary_rows(mode: str, n: int, k: int, alpha: float, seed: int, games: int) -> list[dict]:
    rows = []
    for g in range(games):
        rng = np.random.default_rng([seed, g])
        base = {"mode": mode, "game": g, "n": n, "k": k, "seed": seed}
        if mode == "cardinality":
            f = hardness.hard_instance(n, k, alpha, int(rng.integers(n)))
            for name, res in (("smc", smc_maximize(QueryCountingOracle(f), k, 0.1)),
                              ("stochastic_greedy_s1", baselines.stochastic_greedy(
                                  QueryCountingOracle(f), k, seed=int(rng.integers(2**31)), sample_size=1))):
                hit = int(f.u in res.solution)
                rows.append({**base, "algorithm": name, "queries": res.queries, "intersection": hit,
                             "ratio": repr(res.value / f.t)})
        elif mode == "si":
            hidden = tuple(sorted(rng.choice(n, size=k, replace=False).tolist()))
            for name, game in (("si_solve", hardness.SIGame(n, k, hidden=hidden)),
                               ("si_solve_vs_adversary", hardness.SIGame(n, k))):
                res = hardness.si_solve(game)
                truth = set(game.commit(res.recovered))
                hit = len(truth & set(res.recovered))
                rows.append({**base, "algorithm": name, "queries": res.queries, "intersection": hit,
                             "ratio": repr(hit / k)})
        elif mode == "usm":
            if n % 2:
                raise InvalidSpec("usm mode needs an even n")
            hidden = tuple(sorted(rng.choice(n, size=n // 2, replace=False).tolist()))
            game = hardness.SIGame(n, n // 2, hidden=hidden, explicit=False)
            res = hardness.usm_reduction(lambda o: baselines.double_greedy(o), game, seed=int(rng.integers(2**31)))
            hit = len(set(hidden) & set(res.output))
            rows.append({**base, "k": n // 2, "algorithm": "double_greedy", "queries": res.queries,
                         "intersection": hit, "ratio": repr(hit / (n // 2))})
        else:
            raise InvalidSpec(f"unknown adversary mode {mode!r}")
    return rows


def cmd_adversary(args) -> int:
    k = args.k if args.k is not None else (args.n // 2 if args.mode == "usm" else 2)
    rows = adversary_rows(args.mode, args.n, k, args.alpha, args.seed, args.games)
    write_csv(rows, ADVERSARY_COLUMNS, args.out)
    return EXIT_OK


# --- argument parsing -----------------------------------------------------------------

def _globals(parser: argparse.ArgumentParser, suppress: bool) -> None:
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--seed", type=int, default=d(0), help="base random seed")
    parser.add_argument("--threads", type=int, default=d(1), help="worker threads for bench rows")
    parser.add_argument("--out", default=d(None), help="output file (CSV) or directory (gen)")
    parser.add_argument("--query-cap", type=int, default=d(None), help="abort a run after this many queries")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="linsubmod", description=__doc__.splitlines()[0])
    _globals(p, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _globals(common, suppress=True)
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", parents=[common], help="generate an instance file")
    g.add_argument("--kind", required=True, choices=instances.GEN_KINDS)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--param", action="append", default=[], metavar="KEY=VALUE")
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("solve", parents=[common], help="run one algorithm on one instance")
    s.add_argument("--objective", required=True, choices=instances.OBJECTIVE_KINDS)
    s.add_argument("--data", required=True)
    s.add_argument("--algorithm", choices=sorted(ALGORITHMS))
    s.add_argument("--k", type=int)
    s.add_argument("--costs")
    s.add_argument("--budget", type=float, default=1.0)
    s.add_argument("--partition")
    s.add_argument("--limit", type=int, default=1)
    s.add_argument("--eps", type=float, default=0.1)
    s.add_argument("--lambda", dest="lam_cut", type=int, default=2, help="big/small cutoff for smks-basic runs")
    s.add_argument("--rho", type=float, default=0.0, help="density target for smks-basic runs")
    s.add_argument("--delta", type=float, help="grid step for rho-guessing (default: eps)")
    s.add_argument("--flavor", choices=("fast", "quality"),
                   help="shorthand for --algorithm smks-fast / smks-quality")
    s.add_argument("--lam", type=float, default=1.0, help="similarity decay for feature files")
    s.add_argument("--alpha", type=float, default=1.0, help="log-det scale")
    s.set_defaults(func=cmd_solve)

    b = sub.add_parser("bench", parents=[common], help="run an experiment spec file")
    b.add_argument("spec")
    b.set_defaults(func=cmd_bench)

    v = sub.add_parser("verify", parents=[common], help="run property suites")
    v.add_argument("suites", nargs="+", metavar="SUITE", help=f"one of: all, {', '.join(SUITES)}")
    v.set_defaults(func=cmd_verify)

    a = sub.add_parser("adversary", parents=[common], help="play lower-bound games")
    a.add_argument("--mode", required=True, choices=("cardinality", "si", "usm"))
    a.add_argument("--n", type=int, required=True)
    a.add_argument("--k", type=int)
    a.add_argument("--alpha", type=float, default=0.5)
    a.add_argument("--games", type=int, default=10)
    a.set_defaults(func=cmd_adversary)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (SubmodError, OSError, ValueError) as exc:
        print(f"error: {exc.args[0] if exc.args else exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
