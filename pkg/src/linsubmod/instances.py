"""Instance generators, file loaders and small random fixtures.

File formats (all plain text, elements are 0-based):

* edge list: one ``u v`` pair per line, ``#`` comments; ``# nodes N`` fixes the node count
* coverage: CSV ``element,item``
* features: CSV with ``n`` rows and ``d`` numeric columns, no header
* kernel: square CSV matrix, no header
* sqrt-coverage: CSV ``word,element,score``
* costs: CSV ``element,cost`` or ``element,c_1,...,c_d``
* partition: CSV ``element,part``
"""
from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy.spatial.distance import cdist

from .constraints import PartitionMatroid
from .errors import InvalidParam, InvalidSpec
from .objectives import (
    CoverageObjective,
    FacilityLocationObjective,
    LogDetObjective,
    ModularObjective,
    SqrtCoverageObjective,
    vertex_cover_objective,
)
from .oracle import SetFunction

FIXTURE_SEED = 0xF1A
FIX_A = ({1, 2}, {2, 3}, {4})

GEN_KINDS = ("random-graph-with-hubs", "random-psd-kernel", "random-feature-cloud", "random-coverage")
HUBS = 20
HUB_DEGREE = 50


# --- generators ---------------------------------------------------------------

def random_graph_with_hubs(n: int, seed: int, avg_degree: float = 2.0, hubs: int = HUBS,
                           hub_degree: int = HUB_DEGREE) -> tuple[int, list[tuple[int, int]]]:
    """``n`` nodes with ``n * avg_degree / 2`` distinct random edges, plus ``hubs`` extra nodes.

    Each hub links to ``hub_degree`` distinct random base nodes, so the edge
    count is exactly ``round(n * avg_degree / 2) + hubs * hub_degree``.
    """
    if n < 2:
        raise InvalidParam("need at least two nodes")
    m = round(n * avg_degree / 2)
    if m > n * (n - 1) // 2 or hub_degree > n:
        raise InvalidParam("graph too small for the requested degrees")
    rng = np.random.default_rng(seed)
    seen: set[tuple[int, int]] = set()
    edges: list[tuple[int, int]] = []
    while len(edges) < m:
        pairs = rng.integers(0, n, size=(2 * (m - len(edges)) + 8, 2))
        for a, b in pairs.tolist():
            if a == b:
                continue
            e = (a, b) if a < b else (b, a)
            if e in seen:
                continue
            seen.add(e)
            edges.append(e)
            if len(edges) == m:
                break
    for h in range(hubs):
        for v in np.sort(rng.choice(n, size=hub_degree, replace=False)).tolist():
            edges.append((v, n + h))
    return n + hubs, edges


def random_psd_kernel(n: int, seed: int, dim: int = 8) -> np.ndarray:
    """Gram matrix ``V V^T / dim`` of ``n`` Gaussian vectors."""
    V = np.random.default_rng(seed).normal(size=(n, dim))
    return V @ V.T / dim


def random_feature_cloud(n: int, seed: int, dim: int = 8) -> np.ndarray:
    return np.random.default_rng(seed).normal(size=(n, dim))


def random_coverage(n: int, seed: int, items: int | None = None,
                    density: float = 0.1) -> list[set[int]]:
    """Each element covers every item independently with probability ``density`` (at least one item).

    ``n = 3`` with ``FIXTURE_SEED`` returns the pinned fixture ``FIX_A``.
    """
    if n == 3 and seed == FIXTURE_SEED:
        return [set(s) for s in FIX_A]
    items = 2 * n if items is None else items
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        hit = np.flatnonzero(rng.random(items) < density)
        if hit.size == 0:
            hit = rng.integers(0, items, size=1)
        out.append(set(hit.tolist()))
    return out


def similarity_matrix(features: np.ndarray, lam: float = 1.0) -> np.ndarray:
    """``M_ij = exp(-lam * ||v_i - v_j||)``."""
    return np.exp(-lam * cdist(features, features))


# --- cached files -------------------------------------------------------------

def instance_key(kind: str, n: int, params: dict, seed: int) -> str:
    blob = json.dumps([kind, n, sorted(params.items()), seed], sort_keys=True)
    return hashlib.sha1(blob.encode()).hexdigest()[:12]


_EXT = {"random-graph-with-hubs": "edges", "random-psd-kernel": "kernel.csv",
        "random-feature-cloud": "features.csv", "random-coverage": "coverage.csv"}


def generate(kind: str, n: int, params: dict | None, seed: int, out_dir: str | Path) -> Path:
    """Write an instance file, reusing a cached one with the same key."""
    if kind not in GEN_KINDS:
        raise InvalidParam(f"unknown instance kind {kind!r}; expected one of {', '.join(GEN_KINDS)}")
    params = dict(params or {})
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{kind}-n{n}-{instance_key(kind, n, params, seed)}.{_EXT[kind]}"
    if path.exists():
        return path
    tmp = path.with_suffix(path.suffix + ".tmp")
    if kind == "random-graph-with-hubs":
        nodes, edges = random_graph_with_hubs(n, seed, **params)
        write_edge_list(tmp, nodes, edges)
    elif kind == "random-psd-kernel":
        np.savetxt(tmp, random_psd_kernel(n, seed, **params), delimiter=",", fmt="%.17g")
    elif kind == "random-feature-cloud":
        np.savetxt(tmp, random_feature_cloud(n, seed, **params), delimiter=",", fmt="%.17g")
    else:
        write_coverage(tmp, random_coverage(n, seed, **params))
    tmp.replace(path)
    return path


def write_edge_list(path, nodes: int, edges: Iterable[tuple[int, int]]) -> None:
    with open(path, "w") as fh:
        fh.write(f"# nodes {nodes}\n")
        for a, b in edges:
            fh.write(f"{a} {b}\n")


def write_coverage(path, cover_sets: Sequence[Iterable[int]]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["element", "item"])
        for u, items in enumerate(cover_sets):
            for it in sorted(items):
                w.writerow([u, it])


# --- loaders ------------------------------------------------------------------

def load_edge_list(path) -> tuple[int, list[tuple[int, int]]]:
    nodes = 0
    edges = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                parts = line[1:].split()
                if len(parts) == 2 and parts[0] == "nodes":
                    nodes = max(nodes, int(parts[1]))
                continue
            a, b = (int(x) for x in line.split()[:2])
            edges.append((a, b))
            nodes = max(nodes, a + 1, b + 1)
    return nodes, edges


def _rows(path) -> list[list[str]]:
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].lstrip().startswith("#")]
    if rows and not _is_number(rows[0][0]):
        rows = rows[1:]  # header
    return rows


def _is_number(s: str) -> bool:
    try:
        float(s)
    except ValueError:
        return False
    return True


def load_coverage(path, n: int | None = None) -> CoverageObjective:
    sets: dict[int, set[int]] = {}
    for r in _rows(path):
        sets.setdefault(int(r[0]), set()).add(int(r[1]))
    n = max(sets, default=-1) + 1 if n is None else n
    return CoverageObjective([sets.get(u, set()) for u in range(n)])


def load_matrix(path) -> np.ndarray:
    return np.atleast_2d(np.loadtxt(path, delimiter=",", comments="#"))


def load_sqrt_coverage(path) -> SqrtCoverageObjective:
    triples = [(int(r[0]), int(r[1]), float(r[2])) for r in _rows(path)]
    return SqrtCoverageObjective.from_triples(triples)


def load_costs(path, n: int | None = None) -> np.ndarray:
    """Cost matrix of shape ``(d, n)``; unlisted elements cost 0."""
    rows = _rows(path)
    if not rows:
        raise InvalidSpec(f"{path}: no cost rows")
    d = len(rows[0]) - 1
    if d < 1 or any(len(r) - 1 != d for r in rows):
        raise InvalidSpec(f"{path}: every row needs an element and the same number of costs")
    n = max(int(r[0]) for r in rows) + 1 if n is None else n
    C = np.zeros((d, n))
    for r in rows:
        C[:, int(r[0])] = [float(x) for x in r[1:]]
    return C


def load_partition(path, limits, n: int | None = None) -> PartitionMatroid:
    """``limits`` is an int (same for every part) or a mapping ``part -> limit``."""
    rows = _rows(path)
    mapping = {int(r[0]): int(r[1]) for r in rows}
    n = max(mapping, default=-1) + 1 if n is None else n
    parts = [mapping.get(u, -1) for u in range(n)]
    if isinstance(limits, int):
        limits = {q: limits for q in set(parts)}
    return PartitionMatroid(parts, limits)


OBJECTIVE_KINDS = ("coverage", "graph", "facility", "logdet", "kernel-logdet", "sqrt-coverage")


def load_objective(kind: str, path, lam: float = 1.0, alpha: float = 1.0) -> SetFunction:
    """Build an objective from a data file.

    ``graph`` reads an edge list (vertex ``u`` covers itself and its
    neighbours); ``facility`` and ``logdet`` read features and apply
    :func:`similarity_matrix`; ``kernel-logdet`` reads the kernel directly.
    """
    if kind == "coverage":
        return load_coverage(path)
    if kind == "graph":
        nodes, edges = load_edge_list(path)
        return vertex_cover_objective(nodes, edges)
    if kind == "facility":
        return FacilityLocationObjective(similarity_matrix(load_matrix(path), lam))
    if kind == "logdet":
        return LogDetObjective(similarity_matrix(load_matrix(path), lam), alpha)
    if kind == "kernel-logdet":
        return LogDetObjective(load_matrix(path), alpha)
    if kind == "sqrt-coverage":
        return load_sqrt_coverage(path)
    raise InvalidSpec(f"unknown objective kind {kind!r}; expected one of {', '.join(OBJECTIVE_KINDS)}")


# --- small random fixtures for property suites --------------------------------

def random_small_objective(rng: np.random.Generator, n: int, kind: str | None = None) -> SetFunction:
    """A random monotone submodular objective on ``n`` elements."""
    kinds = ("coverage", "facility", "modular", "sqrt")
    kind = kinds[int(rng.integers(len(kinds)))] if kind is None else kind
    if kind == "coverage":
        items = int(rng.integers(n, 3 * n + 1))
        sets = [set(np.flatnonzero(rng.random(items) < 0.3).tolist()) for _ in range(n)]
        return CoverageObjective(sets)
    if kind == "facility":
        return FacilityLocationObjective(rng.integers(0, 10, size=(n, n)).astype(float))
    if kind == "modular":
        return ModularObjective(rng.integers(0, 10, size=n).astype(float).tolist())
    if kind == "sqrt":
        return SqrtCoverageObjective.from_dense(rng.integers(0, 5, size=(2 * n, n)).astype(float))
    raise InvalidParam(f"unknown fixture kind {kind!r}")


def random_costs(rng: np.random.Generator, n: int, d: int = 1, grid: int = 20) -> np.ndarray:
    """Costs on a ``1/grid`` lattice in ``(0, 1]`` so budget sums stay exact-ish."""
    return rng.integers(1, grid + 1, size=(d, n)) / grid


def ratio(value: float, opt: float) -> float:
    return 1.0 if opt == 0 else value / opt

