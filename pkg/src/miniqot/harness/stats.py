"""Monte-Carlo test runner with explicit confidence bounds.

Every result carries ``(N, estimate, bound, confidence)`` so a pass/fail line
always states what was compared.  Three bound types:

* ``hoeffding``: rate against a target (two-sided tolerance) or an upper
  bound (one-sided count ceiling);
* ``binomial``: exact one-sided test that the true rate does not exceed a bound;
* ``chi2``: independence of an outcome from a grouping variable.
"""

from __future__ import annotations

import json
import math
from collections.abc import Callable, Iterable
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy import stats as sps

BOUND_TYPES = ("hoeffding", "binomial", "chi2")


def hoeffding_radius(N: int, confidence: float = 0.99, two_sided: bool = True) -> float:
    """Deviation ``t`` with ``P(|p̂ - p| > t) <= 1 - confidence``."""
    delta = 1.0 - confidence
    return math.sqrt(math.log((2.0 if two_sided else 1.0) / delta) / (2.0 * N))


def hoeffding_ceiling(p: float, N: int, confidence: float = 0.99) -> int:
    """Largest count consistent with a true rate ``<= p`` at one-sided confidence."""
    return int(math.floor(N * (p + hoeffding_radius(N, confidence, two_sided=False))))


def binomial_upper(k: int, N: int, confidence: float = 0.99) -> float:
    """Clopper-Pearson upper confidence limit for a rate after ``k`` hits in ``N``."""
    if k >= N:
        return 1.0
    return float(sps.beta.ppf(confidence, k + 1, N - k))


def chi2_independence(table) -> float:
    """p-value of the χ² independence test; degenerate tables give 1.0."""
    t = np.asarray(table, dtype=float)
    t = t[t.sum(axis=1) > 0][:, t.sum(axis=0) > 0]
    if t.shape[0] < 2 or t.shape[1] < 2:
        return 1.0
    return float(sps.chi2_contingency(t, correction=False)[1])


@dataclass
class StatResult:
    test: str
    N: int
    estimate: float
    bound: float | list
    passed: bool
    confidence: float
    kind: str
    detail: str = ""

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        if isinstance(self.bound, (list, tuple)):
            b = "[" + ", ".join(f"{v:.4g}" for v in self.bound) + "]"
        else:
            b = f"{self.bound:.4g}" if isinstance(self.bound, float) else self.bound
        return (f"{verdict} {self.test}: N={self.N} estimate={self.estimate:.4g} bound={b} "
                f"({self.kind}, confidence {self.confidence}) {self.detail}".rstrip())

    def to_dict(self) -> dict:
        d = asdict(self)
        d["pass"] = d.pop("passed")
        return d


@dataclass
class StatTest:
    """One statistical claim checked over ``trials`` seeded trials.

    ``estimator(seed)`` returns a truthy event for ``hoeffding``/``binomial``
    and a ``(group, event)`` pair for ``chi2``.  For ``hoeffding`` set either
    ``target`` and ``tolerance`` (two-sided) or ``upper`` (one-sided count
    ceiling); ``binomial`` uses ``upper``.
    """

    name: str
    trials: int
    estimator: Callable[[int], object]
    bound: str = "hoeffding"
    target: float | None = None
    tolerance: float | None = None
    upper: float | None = None
    confidence: float = 0.99
    seed: int = 0
    outcomes: list = field(default_factory=list, repr=False)

    def __post_init__(self):
        if self.bound not in BOUND_TYPES:
            raise ValueError(f"bound must be one of {BOUND_TYPES}")
        if self.bound == "hoeffding" and (self.upper is None) == (self.target is None or self.tolerance is None):
            raise ValueError("hoeffding needs either target+tolerance or upper")
        if self.bound == "binomial" and self.upper is None:
            raise ValueError("binomial needs upper")

    def seeds(self) -> Iterable[int]:
        ss = np.random.SeedSequence(self.seed)
        return (int(s.generate_state(1)[0]) for s in ss.spawn(self.trials))

    def run(self) -> StatResult:
        self.outcomes = [self.estimator(s) for s in self.seeds()]
        return self.evaluate(self.outcomes)

    def evaluate(self, outcomes: list) -> StatResult:
        N = len(outcomes)
        if self.bound == "chi2":
            groups = sorted({g for g, _ in outcomes})
            table = [[sum(1 for g2, ev in outcomes if g2 == g and bool(ev) == v) for v in (False, True)]
                     for g in groups]
            p = chi2_independence(table)
            rate = sum(bool(ev) for _, ev in outcomes) / max(N, 1)
            return StatResult(self.name, N, p, 1.0 - self.confidence, p > 1.0 - self.confidence,
                              self.confidence, "chi2", f"p-value vs threshold; event rate {rate:.4f}; "
                              f"table {table}")
        k = sum(bool(o) for o in outcomes)
        rate = k / max(N, 1)
        if self.bound == "binomial":
            p = float(sps.binomtest(k, N, self.upper, alternative="greater").pvalue)
            return StatResult(self.name, N, rate, self.upper, p > 1.0 - self.confidence, self.confidence,
                              "binomial", f"count {k}, one-sided p {p:.3g}")
        if self.upper is not None:
            ceiling = hoeffding_ceiling(self.upper, N, self.confidence)
            return StatResult(self.name, N, rate, self.upper, k <= ceiling, self.confidence, "hoeffding",
                              f"count {k} <= ceiling {ceiling}")
        radius = hoeffding_radius(N, self.confidence)
        ok = abs(rate - self.target) <= self.tolerance
        return StatResult(self.name, N, rate, [self.target - self.tolerance, self.target + self.tolerance],
                          ok, self.confidence, "hoeffding",
                          f"count {k}, sampling radius {radius:.4f} <= tolerance {self.tolerance}")


def write_results(results: Iterable[StatResult], path) -> None:
    """Machine-readable report: one JSON object per line."""
    with Path(path).open("w") as fh:
        for r in results:
            fh.write(json.dumps(r.to_dict(), default=_json_default) + "\n")


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(type(o).__name__)
