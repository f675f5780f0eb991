"""Sender-security error budget for one BBCS layer.

With ``|T| = αn`` checked positions, sampling slack ``δ``, Hoeffding slack
``η`` and extraction rate ``γ`` the total error is

    ε = √6·exp(−αnδ²/100) + exp(−2η²(1−α)n) + 2^(−γn/2)

and privacy amplification to ``ℓ`` bits needs

    (½ − η)(1 − α)n − h(δ)n − ℓ ≥ γn.

Infeasible parameters are flagged, not rejected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


def binary_entropy(p: float) -> float:
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


@dataclass(frozen=True)
class EntropyBudget:
    n: int
    alpha: float
    delta: float
    eta: float
    gamma: float
    ell: int

    @property
    def h_delta(self) -> float:
        return binary_entropy(self.delta)

    @property
    def eps_samp(self) -> float:
        return math.sqrt(6) * math.exp(-self.alpha * self.n * self.delta ** 2 / 100)

    @property
    def eps_hof(self) -> float:
        return math.exp(-2 * self.eta ** 2 * (1 - self.alpha) * self.n)

    @property
    def eps_pa(self) -> float:
        return 2.0 ** (-self.gamma * self.n / 2)

    @property
    def eps_total(self) -> float:
        return self.eps_samp + self.eps_hof + self.eps_pa

    @property
    def min_entropy(self) -> float:
        """Lower bound on the min-entropy left in the unchosen half."""
        return (0.5 - self.eta) * (1 - self.alpha) * self.n - self.h_delta * self.n

    @property
    def margin(self) -> float:
        return self.min_entropy - self.ell - self.gamma * self.n

    @property
    def feasible(self) -> bool:
        return self.gamma > 0 and self.delta > 0 and self.eta > 0 and self.margin >= 0

    def summary(self) -> str:
        return (f"n={self.n} α={self.alpha:.4g} ℓ={self.ell} δ={self.delta} η={self.eta} γ={self.gamma}: "
                f"ε_samp={self.eps_samp:.4g} ε_hof={self.eps_hof:.4g} ε_pa={self.eps_pa:.4g} "
                f"ε={self.eps_total:.4g} margin={self.margin:.3f} "
                f"{'feasible' if self.feasible else 'INFEASIBLE'}")


def entropy_budget(n: int, alpha: float, delta: float, eta: float, gamma: float, ell: int) -> EntropyBudget:
    if n <= 0 or ell <= 0:
        raise ValueError("n and ell must be positive")
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    for name, v in (("delta", delta), ("eta", eta), ("gamma", gamma)):
        if v < 0:
            raise ValueError(f"{name} must be non-negative")
    return EntropyBudget(n, alpha, delta, eta, gamma, ell)


def config_budgets(config) -> dict[str, EntropyBudget]:
    """Budgets for the inner and outer BBCS layers of a :class:`~miniqot.params.StackConfig`."""
    s = config.slack
    return {name: entropy_budget(p.n, p.alpha, s.delta, s.eta, s.gamma, p.ell)
            for name, p in (("inner", config.inner), ("outer", config.outer))}
