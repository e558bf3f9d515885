from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Any

SOLVE_COLUMNS = ("algorithm", "n", "param", "eps", "value", "queries", "millis")


@dataclass
class SolveResult:
    algorithm: str
    solution: tuple[int, ...]
    value: float
    queries: int
    n: int
    param: float | int | None = None
    eps: float | None = None
    millis: float = 0.0
    trace: Any = field(default=None, repr=False, compare=False)

    def row(self) -> dict[str, Any]:
        return {
            "algorithm": self.algorithm,
            "n": self.n,
            "param": "" if self.param is None else self.param,
            "eps": "" if self.eps is None else self.eps,
            "value": repr(float(self.value)),
            "queries": self.queries,
            "millis": f"{self.millis:.3f}",
        }

    def fingerprint(self) -> tuple:
        """Everything except wall time; equal across reruns of a deterministic solver."""
        return (self.algorithm, self.n, self.param, self.eps, tuple(self.solution),
                float(self.value), self.queries)


class Stopwatch:
    def __enter__(self):
        self._t0 = time.perf_counter()
        self.millis = 0.0
        return self

    def __exit__(self, *exc):
        self.millis = (time.perf_counter() - self._t0) * 1000.0
        return False
