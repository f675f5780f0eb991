"""Stack configuration and shipped presets.

Each preset also carries the slack parameters ``(δ, η, γ)`` used by the
entropy-budget calculator for its BBCS layers.  At desk scale the budget is
only feasible with very small slack, which makes the error terms close to 1;
see :func:`miniqot.harness.entropy.entropy_budget`.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .bbcs import QotParams

MODES = ("hybrid", "semi-real", "full")
TRANSPORTS = ("inproc", "tcp")
LAYERS = ("outer_socom", "cds_ot", "inner_socom", "zk")


@dataclass(frozen=True)
class Slack:
    """Entropy-budget slack: sampling error ``delta``, Hoeffding ``eta``, extraction rate ``gamma``."""

    delta: float
    eta: float
    gamma: float


@dataclass(frozen=True)
class StackConfig:
    """Parameters for one OT tower.

    ``mode`` picks which layers are ideal functionalities:

    * ``hybrid``: the outer BBCS OT runs over the ideal selective-opening
      commitment.
    * ``semi-real``: the extractable commitment is real, its CDS uses the
      ideal parallel OT.
    * ``full``: every layer is real.

    ``ideal`` additionally forces single layers (names in :data:`LAYERS`)
    to their ideal version, which is how layer-swap tests are written.
    """

    lam: int = 16
    inner: QotParams = field(default_factory=lambda: QotParams(128, 3 / 8, 32))
    outer: QotParams = field(default_factory=lambda: QotParams(256, 3 / 8, 32))
    t: int = 10
    mode: str = "full"
    transport: str = "inproc"
    seed: int = 0
    ideal: tuple[str, ...] = ()
    slack: Slack = field(default_factory=lambda: Slack(0.002, 0.02, 0.02))

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.transport not in TRANSPORTS:
            raise ValueError(f"transport must be one of {TRANSPORTS}")
        if not 4 <= self.lam <= 32:
            raise ValueError("λ must lie in [4, 32]")
        if self.t < 1:
            raise ValueError("need at least one ZK round")
        if self.inner.ell != 2 * self.lam:
            raise ValueError("inner OT strings carry a label and its coins: ℓ must be 2λ")
        for p in (self.inner, self.outer):
            if p.n < 4 * self.lam:
                raise ValueError("BBCS needs n >= 4λ qubits per instance")
        bad = set(self.ideal) - set(LAYERS)
        if bad:
            raise ValueError(f"unknown layers {sorted(bad)}")

    def backends(self) -> dict[str, str]:
        """Backend name per layer after applying ``mode`` and ``ideal``."""
        b = {"outer_socom": "ecom", "cds_ot": "bbcs", "inner_socom": "plain", "zk": "real"}
        if self.mode == "hybrid":
            b["outer_socom"] = "ideal"
        elif self.mode == "semi-real":
            b["cds_ot"] = "ideal"
        for name in self.ideal:
            b[name] = "ideal"
        return b

    def with_(self, **kw) -> "StackConfig":
        return replace(self, **kw)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["ideal"] = list(self.ideal)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "StackConfig":
        d = dict(d)
        d["inner"] = QotParams(**d["inner"])
        d["outer"] = QotParams(**d["outer"])
        d["slack"] = Slack(**d["slack"])
        d["ideal"] = tuple(d.get("ideal", ()))
        return cls(**d)

    def rngs(self) -> tuple[np.random.Generator, np.random.Generator, int]:
        """Sender RNG, receiver RNG and broker seed, all derived from ``seed``."""
        ss = np.random.SeedSequence(self.seed)
        s, r, b = ss.spawn(3)
        return np.random.default_rng(s), np.random.default_rng(r), int(b.generate_state(1)[0])


PRESETS = {
    "desk": StackConfig(lam=8, inner=QotParams(64, 3 / 8, 16), outer=QotParams(128, 3 / 8, 16), t=6,
                        slack=Slack(0.001, 0.02, 0.03)),
    "test": StackConfig(lam=16, inner=QotParams(128, 3 / 8, 32), outer=QotParams(256, 3 / 8, 32), t=10,
                        slack=Slack(0.002, 0.02, 0.02)),
}


def preset(name: str, **overrides) -> StackConfig:
    try:
        base = PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    return base.with_(**overrides) if overrides else base
