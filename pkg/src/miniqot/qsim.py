"""Trusted broker simulating BB84 qubits and EPR pairs.

Parties only ever see integer handles.  The broker keeps, per physical qubit
("slot"), either the preparation data ``(x, θ)`` or the EPR twin link, and
enforces that each qubit is measured at most once.  Transmitting a qubit
kills the sender's handle and issues a fresh one to the receiver.

Randomness for conjugate-basis outcomes is a pure function of
``(seed, slot, draw)`` (splitmix64), so results do not depend on the order in
which parties issue requests.  Tests may inject their own coin function to
enumerate outcomes exhaustively.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

PLUS, TIMES = 0, 1
BASIS_NAMES = {PLUS: "+", TIMES: "x"}

_PREPARED, _EPR = 0, 1
_ALIVE, _MEASURED, _SENT = 0, 1, 2


class QsimError(RuntimeError):
    pass


class NotOwner(QsimError):
    pass


class DeadHandle(QsimError):
    pass


class DoubleMeasure(DeadHandle):
    pass


def splitmix64(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = x + np.uint64(0x9E3779B97F4A7C15)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
        return z ^ (z >> np.uint64(31))


CoinFn = Callable[[np.ndarray, np.ndarray], np.ndarray]


class _Grow:
    """Append-only column store with amortised doubling."""

    def __init__(self, **dtypes):
        self.n = 0
        self._cap = 1024
        self.cols = {k: np.zeros(self._cap, dtype=d) for k, d in dtypes.items()}

    def extend(self, count: int) -> np.ndarray:
        need = self.n + count
        if need > self._cap:
            while self._cap < need:
                self._cap *= 2
            for k, v in self.cols.items():
                nv = np.zeros(self._cap, dtype=v.dtype)
                nv[: self.n] = v[: self.n]
                self.cols[k] = nv
        idx = np.arange(self.n, need, dtype=np.int64)
        self.n = need
        return idx

    def __getitem__(self, key):
        return self.cols[key]


class Broker:
    """In-process physics broker.

    Args:
        seed: seed for conjugate-basis coins.
        coin_fn: optional ``(slots, draws) -> bits`` override.
    """

    def __init__(self, seed: int = 0, coin_fn: CoinFn | None = None):
        self.seed = int(seed) & 0xFFFFFFFFFFFFFFFF
        self.coin_fn = coin_fn
        self._slots = _Grow(kind=np.uint8, x=np.uint8, theta=np.uint8, twin=np.int64,
                            done=np.uint8, out=np.uint8, basis=np.uint8)
        self._handles = _Grow(slot=np.int64, owner=np.int32, state=np.uint8)
        self._party_ids: dict[str, int] = {}
        self.log: list[tuple] = []

    # -- bookkeeping -----------------------------------------------------

    def _pid(self, party: str) -> int:
        return self._party_ids.setdefault(party, len(self._party_ids))

    def _new_handles(self, slots: np.ndarray, party: str) -> np.ndarray:
        idx = self._handles.extend(slots.size)
        self._handles["slot"][idx] = slots
        self._handles["owner"][idx] = self._pid(party)
        self._handles["state"][idx] = _ALIVE
        return idx

    def _coins(self, slots: np.ndarray, draw: int) -> np.ndarray:
        slots = np.asarray(slots, dtype=np.int64)
        draws = np.full(slots.size, draw, dtype=np.int64)
        if self.coin_fn is not None:
            return np.asarray(self.coin_fn(slots, draws), dtype=np.uint8)
        key = (np.uint64(self.seed)
               ^ (slots.astype(np.uint64) * np.uint64(0xD1B54A32D192ED03))
               ^ (draws.astype(np.uint64) * np.uint64(0x8CB92BA72F3D8DD7)))
        return (splitmix64(key) >> np.uint64(63)).astype(np.uint8)

    def _uniform(self, slots: np.ndarray) -> np.ndarray:
        key = np.uint64(self.seed ^ 0x5851F42D4C957F2D) ^ (
            np.asarray(slots, dtype=np.uint64) * np.uint64(0xA24BAED4963EE407))
        return (splitmix64(key) >> np.uint64(11)).astype(np.float64) / float(1 << 53)

    def _check_live(self, party: str, handles) -> np.ndarray:
        h = np.asarray(handles, dtype=np.int64).reshape(-1)
        if h.size and (h.min() < 0 or h.max() >= self._handles.n):
            raise DeadHandle("unknown qubit handle")
        if h.size != np.unique(h).size:
            raise DoubleMeasure("handle repeated within one request")
        state = self._handles["state"][h]
        owner = self._handles["owner"][h]
        pid = self._pid(party)
        if np.any(state == _SENT):
            raise NotOwner("handle was transmitted to another party")
        if np.any(owner != pid):
            raise NotOwner(f"{party} does not own this qubit")
        if np.any(state == _MEASURED):
            raise DoubleMeasure("qubit already measured")
        return h

    # -- operations --------------------------------------------------------

    def prepare_batch(self, party: str, xs, thetas) -> np.ndarray:
        xs = np.asarray(xs, dtype=np.uint8).reshape(-1)
        thetas = np.asarray(thetas, dtype=np.uint8).reshape(-1)
        if xs.size != thetas.size:
            raise ValueError("xs and thetas differ in length")
        if (xs.size and xs.max() > 1) or (thetas.size and thetas.max() > 1):
            raise ValueError("bits and bases must be 0/1")
        slots = self._slots.extend(xs.size)
        self._slots["kind"][slots] = _PREPARED
        self._slots["x"][slots] = xs
        self._slots["theta"][slots] = thetas
        self._slots["twin"][slots] = -1
        self._slots["done"][slots] = 0
        self.log.append(("PREPARE", party, int(xs.size)))
        return self._new_handles(slots, party)

    def prepare(self, party: str, x: int, theta: int) -> int:
        return int(self.prepare_batch(party, [x], [theta])[0])

    def epr_batch(self, party: str, count: int) -> tuple[np.ndarray, np.ndarray]:
        a = self._slots.extend(count)
        b = self._slots.extend(count)
        for s, t in ((a, b), (b, a)):
            self._slots["kind"][s] = _EPR
            self._slots["twin"][s] = t
            self._slots["done"][s] = 0
        self.log.append(("EPR", party, int(count)))
        return self._new_handles(a, party), self._new_handles(b, party)

    def epr_pair(self, party: str) -> tuple[int, int]:
        a, b = self.epr_batch(party, 1)
        return int(a[0]), int(b[0])

    def transmit_batch(self, party: str, handles, to: str) -> np.ndarray:
        h = np.asarray(handles, dtype=np.int64).reshape(-1)
        if h.size and (h.min() < 0 or h.max() >= self._handles.n):
            raise DeadHandle("unknown qubit handle")
        state = self._handles["state"][h]
        if np.any(state != _ALIVE):
            raise DeadHandle("cannot transmit a dead handle")
        if np.any(self._handles["owner"][h] != self._pid(party)):
            raise NotOwner(f"{party} does not own this qubit")
        if h.size != np.unique(h).size:
            raise DeadHandle("handle repeated within one request")
        self._handles["state"][h] = _SENT
        self.log.append(("TRANSMIT", party, to, int(h.size)))
        return self._new_handles(self._handles["slot"][h], to)

    def transmit(self, party: str, handle: int, to: str) -> int:
        return int(self.transmit_batch(party, [handle], to)[0])

    def measure_batch(self, party: str, handles, bases) -> np.ndarray:
        h = self._check_live(party, handles)
        bases = np.asarray(bases, dtype=np.uint8).reshape(-1)
        if bases.size != h.size:
            raise ValueError("one basis per handle required")
        if bases.size and bases.max() > 1:
            raise ValueError("basis must be 0 (+) or 1 (x)")
        self._handles["state"][h] = _MEASURED
        slots = self._handles["slot"][h]
        S = self._slots
        out = np.empty(h.size, dtype=np.uint8)

        prep = S["kind"][slots] == _PREPARED
        if prep.any():
            ps = slots[prep]
            same = S["theta"][ps] == bases[prep]
            out[prep] = np.where(same, S["x"][ps], self._coins(ps, 0))

        epr = np.flatnonzero(~prep)
        if epr.size:
            es = slots[epr]
            # both halves in one request: the higher slot is measured second
            later = np.isin(S["twin"][es], es) & (es > S["twin"][es])
            for part in (epr[~later], epr[later]):
                if part.size:
                    out[part] = self._measure_epr(slots[part], bases[part])
        self.log.append(("MEASURE", party, int(h.size)))
        return out

    def _measure_epr(self, es: np.ndarray, eb: np.ndarray) -> np.ndarray:
        S = self._slots
        twin = S["twin"][es]
        twin_done = S["done"][twin] == 1
        # a pair is keyed by its lower slot so both halves share coin draws
        key = np.minimum(es, twin)
        first = self._coins(key, 1)
        second = self._coins(key, 2)
        agree = S["basis"][twin] == eb
        res = np.where(twin_done, np.where(agree, S["out"][twin], second), first)
        S["out"][es] = res
        S["basis"][es] = eb
        S["done"][es] = 1
        return res

    def measure(self, party: str, handle: int, theta: int) -> int:
        return int(self.measure_batch(party, [handle], [theta])[0])

    def measure_biased(self, party: str, handles, p_one: np.ndarray) -> np.ndarray:
        """Adversary hook: outcome 1 with probability ``p_one[θ][x]``.

        Only defined for prepared qubits; the handle dies as with ``measure``.
        """
        h = self._check_live(party, handles)
        slots = self._handles["slot"][h]
        if np.any(self._slots["kind"][slots] != _PREPARED):
            raise QsimError("biased measurement only supports prepared qubits")
        self._handles["state"][h] = _MEASURED
        p = np.asarray(p_one, dtype=np.float64)[self._slots["theta"][slots], self._slots["x"][slots]]
        return (self._uniform(slots) < p).astype(np.uint8)

    # -- test introspection (never exposed to protocol code) ----------------

    def peek_preparation(self, handles) -> tuple[np.ndarray, np.ndarray]:
        slots = self._handles["slot"][np.asarray(handles, dtype=np.int64)]
        return self._slots["x"][slots].copy(), self._slots["theta"][slots].copy()

    def live_count(self) -> int:
        return int(np.count_nonzero(self._handles["state"][: self._handles.n] == _ALIVE))
