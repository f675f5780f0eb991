"""Per-party execution context shared by all protocol layers."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .transport.runtime import ProtocolAbort, ProtocolSession, StrategyCrash


@dataclass
class ZkConfig:
    """How proofs are run.

    ``backend="real"`` runs the interactive argument; ``"ideal"`` replaces it
    by a trusted check of the witness against the statement (used only for
    high-trial-count statistical tests of other layers).
    """

    rounds: int = 10
    backend: str = "real"


@dataclass
class Ctx:
    sess: ProtocolSession
    rng: np.random.Generator
    broker: Any = None
    adversary: Any = None
    zk: ZkConfig = field(default_factory=ZkConfig)
    lam: int = 16
    cds_ot: Any = None  # parallel-OT backend used by CDS inside the extractable commitment

    @property
    def role(self) -> str:
        return self.sess.party

    def hook(self, step: str, value, **info):
        """Let the adversary override ``value`` at a named step."""
        adv = self.adversary
        if adv is None:
            return value
        fn = adv.hooks.get(step)
        if fn is None:
            return value
        try:
            return fn(value, ctx=self, **info)
        except ProtocolAbort:
            raise
        except Exception as exc:  # noqa: BLE001 - surfaced as strategy crash
            raise StrategyCrash(f"hook {step!r} raised {exc!r}") from exc

    def hooked(self, step: str) -> bool:
        return self.adversary is not None and step in self.adversary.hooks

    def abort(self, reason: str):
        self.sess.abort(reason)
