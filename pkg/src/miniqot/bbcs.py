"""BB84-based oblivious transfer over a selective-opening commitment.

``pot_send`` / ``pot_receive`` run ``k`` OT instances side by side: one qubit
batch, one commitment to all ``k·n`` measurement records, one opening of
every instance's check set.  ``qot_send`` / ``qot_receive`` are the
single-instance case.  The commitment backend is pluggable (ideal
functionality, the plain Naor/ZK protocol, or the extractable commitment).

Records committed by the receiver are ``(θ^B_i, x^B_i)`` bit pairs.
Index sets are 0-based positions within an instance.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import floor

import numpy as np

from . import bits as B
from . import socom
from .transport.runtime import Oracle
from .uhash import UniversalHash

LAYER = "bbcs"


@dataclass(frozen=True)
class QotParams:
    """``n`` qubits per instance, check fraction ``alpha``, secret length ``ell``."""

    n: int
    alpha: float = 3 / 8
    ell: int = 16

    def __post_init__(self):
        if not 0.25 < self.alpha < 0.5:
            raise ValueError("alpha must lie strictly between 1/4 and 1/2")
        if self.ell < 1 or self.n < 2 * self.ell:
            raise ValueError("need n >= 2*ell and ell >= 1")

    @property
    def t_check(self) -> int:
        """``|T|``: ``α·n`` rounded half up."""
        return int(floor(self.alpha * self.n + 0.5))


def pad_bits(x: np.ndarray, idx: np.ndarray, n: int) -> np.ndarray:
    """``x`` restricted to ``idx`` (increasing order) followed by zeros up to ``n`` bits."""
    out = np.zeros(n, dtype=np.uint8)
    idx = np.sort(np.asarray(idx, dtype=np.int64))
    out[: idx.size] = x[idx]
    return out


def _hash_many(descs: np.ndarray, xs: np.ndarray, ell: int) -> np.ndarray:
    """Toeplitz hashes for a batch: ``descs`` (N, n+ℓ-1), ``xs`` (N, n) -> (N, ℓ)."""
    n = xs.shape[1]
    win = np.lib.stride_tricks.sliding_window_view(descs, n, axis=1)[:, :ell, ::-1]
    return (np.einsum("kln,kn->kl", win.astype(np.int64), xs.astype(np.int64)) & 1).astype(np.uint8)


def check_partition(I0, I1, rest: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    I0 = np.asarray(I0, dtype=np.int64).reshape(-1)
    I1 = np.asarray(I1, dtype=np.int64).reshape(-1)
    both = np.concatenate([I0, I1])
    if both.size and (both.min() < 0 or both.max() >= n):
        raise ValueError("partition index out of range")
    if both.size != np.unique(both).size or not np.array_equal(np.sort(both), np.sort(rest)):
        raise ValueError("(I0, I1) is not a partition of the unchecked positions")
    return np.sort(I0), np.sort(I1)


def _secrets(secrets, ell: int) -> np.ndarray:
    s = np.asarray(secrets, dtype=np.uint8)
    if s.ndim == 2:
        s = s[None]
    if s.ndim != 3 or s.shape[1:] != (2, ell):
        raise ValueError(f"secrets must have shape (k, 2, {ell})")
    return s


def pot_send(ctx, secrets, params: QotParams, backend: str = "ideal", epr: bool = False):
    """Sender party for ``k`` parallel OTs; ``secrets`` has shape ``(k, 2, ℓ)``."""
    s = _secrets(secrets, params.ell)
    k, n, t = s.shape[0], params.n, params.t_check
    sess, rng, broker = ctx.sess, ctx.rng, ctx.broker
    _, Receiver = socom.backend(backend)
    with sess.layer(LAYER):
        theta_a = B.random_bits(rng, k * n).reshape(k, n)
        # drawn in both modes so θ^A, T and f share one random stream across modes
        x_a = ctx.hook("bbcs.prepare", B.random_bits(rng, k * n).reshape(k, n))
        if epr:
            mine, theirs = broker.epr_batch(sess.party, k * n)
            x_a = np.zeros((k, n), dtype=np.uint8)
        else:
            theirs = broker.prepare_batch(sess.party, x_a.reshape(-1), theta_a.reshape(-1))
        sent = broker.transmit_batch(sess.party, theirs, sess.peer)
        sess.send_qubits("QUBITS", sent)

        com = Receiver(ctx)
        K, L = yield from com.receive()
        if K != k * n or L != 2:
            ctx.abort("bbcs: commitment has the wrong shape")
        T = np.stack([np.sort(rng.choice(n, size=t, replace=False)) for _ in range(k)]) if t else \
            np.zeros((k, 0), dtype=np.int64)
        T = ctx.hook("bbcs.check-set", T)
        flat = (np.arange(k)[:, None] * n + T).reshape(-1)
        records = yield from com.open(flat)
        theta_b, x_b = records[:, 0].reshape(k, t), records[:, 1].reshape(k, t)
        if epr:
            x_a[np.arange(k)[:, None], T] = broker.measure_batch(
                sess.party, mine.reshape(k, n)[np.arange(k)[:, None], T].reshape(-1),
                theta_a[np.arange(k)[:, None], T].reshape(-1)).reshape(k, t)
        ta = theta_a[np.arange(k)[:, None], T]
        xa = x_a[np.arange(k)[:, None], T]
        if np.any((theta_b == ta) & (x_b != xa)):
            ctx.abort("bbcs: check set mismatch")

        keep = np.ones((k, n), dtype=bool)
        keep[np.arange(k)[:, None], T] = False
        rest = [np.flatnonzero(keep[i]) for i in range(k)]
        if epr:
            h = mine.reshape(k, n)[keep]
            x_a[keep] = broker.measure_batch(sess.party, h, theta_a[keep])
        sess.send("BASES_REVEAL", np.stack([theta_a[i, rest[i]] for i in range(k)]))

        part = yield from sess.recv("PARTITION")
        try:
            parts = [check_partition(part["I0"][i], part["I1"][i], rest[i], n) for i in range(k)]
        except (KeyError, IndexError, TypeError, ValueError):
            ctx.abort("bbcs: malformed partition")
        descs = B.random_bits(rng, k * (n + params.ell - 1)).reshape(k, -1)
        xs = np.stack([np.stack([pad_bits(x_a[i], parts[i][b], n) for b in (0, 1)]) for i in range(k)])
        hashed = np.stack([_hash_many(descs, xs[:, b], params.ell) for b in (0, 1)], axis=1)
        masked = s ^ hashed
        masked = ctx.hook("bbcs.transfer", masked, secrets=s, hashed=hashed, parts=parts, theta_a=theta_a,
                         x_a=x_a)
        sess.send("TRANSFER", {"f": descs, "m": masked})
    return None


def pot_receive(ctx, choices, params: QotParams, backend: str = "ideal"):
    """Receiver party; returns the chosen secrets, shape ``(k, ℓ)``."""
    c = np.asarray(choices, dtype=np.uint8).reshape(-1)
    if c.size and c.max() > 1:
        raise ValueError("choice bits must be 0/1")
    k, n, t = c.size, params.n, params.t_check
    sess, rng, broker = ctx.sess, ctx.rng, ctx.broker
    Committer, _ = socom.backend(backend)
    with sess.layer(LAYER):
        handles = np.asarray((yield from sess.recv("QUBITS")), dtype=np.int64).reshape(-1)
        if handles.size != k * n:
            ctx.abort("bbcs: wrong number of qubits")
        theta_b = B.random_bits(rng, k * n)
        theta_b, x_b = ctx.hook("bbcs.measure", None, handles=handles, bases=theta_b) or \
            (theta_b, broker.measure_batch(sess.party, handles, theta_b))
        theta_b, x_b = ctx.hook("bbcs.commit-bases", (theta_b, x_b))
        theta_b = np.asarray(theta_b, dtype=np.uint8).reshape(k, n)
        x_b = np.asarray(x_b, dtype=np.uint8).reshape(k, n)

        com = Committer(ctx)
        yield from com.commit(np.stack([theta_b.reshape(-1), x_b.reshape(-1)], axis=1))
        flat = np.sort(np.asarray((yield from com.open()), dtype=np.int64))
        T = [flat[(flat >= i * n) & (flat < (i + 1) * n)] - i * n for i in range(k)]

        theta_hat = np.asarray((yield from sess.recv("BASES_REVEAL")), dtype=np.uint8)
        rest = [np.setdiff1d(np.arange(n), T[i]) for i in range(k)]
        if theta_hat.shape != (k, n - t) or any(r.size != n - t for r in rest):
            ctx.abort("bbcs: malformed basis reveal")
        I0, I1 = [], []
        for i in range(k):
            same = rest[i][theta_hat[i] == theta_b[i, rest[i]]]
            diff = rest[i][theta_hat[i] != theta_b[i, rest[i]]]
            pair = (same, diff) if c[i] == 0 else (diff, same)
            I0.append(pair[0])
            I1.append(pair[1])
        I0, I1 = ctx.hook("bbcs.partition", (I0, I1), theta_hat=theta_hat)
        sess.send("PARTITION", {"I0": list(I0), "I1": list(I1)})

        tr = yield from sess.recv("TRANSFER")
        try:
            descs = np.asarray(tr["f"], dtype=np.uint8).reshape(k, n + params.ell - 1)
            masked = np.asarray(tr["m"], dtype=np.uint8).reshape(k, 2, params.ell)
        except (KeyError, TypeError, ValueError):
            ctx.abort("bbcs: malformed transfer")
        own = [I0[i] if c[i] == 0 else I1[i] for i in range(k)]
        xs = np.stack([pad_bits(x_b[i], own[i], n) for i in range(k)])
        out = masked[np.arange(k), c] ^ _hash_many(descs, xs, params.ell)
    return out


def qot_send(ctx, s0, s1, params: QotParams, backend: str = "ideal", epr: bool = False):
    return (yield from pot_send(ctx, np.stack([B.as_bits(s0), B.as_bits(s1)])[None], params, backend, epr))


def qot_receive(ctx, c: int, params: QotParams, backend: str = "ideal"):
    out = yield from pot_receive(ctx, [c], params, backend)
    return out[0]


def uhash_of(desc_row: np.ndarray, n: int, ell: int) -> UniversalHash:
    return UniversalHash(desc_row, n, ell)


# -- ideal parallel OT --------------------------------------------------------

class FPot(Oracle):
    """Records ``(x^i_0, x^i_1)_i`` once and answers one receiver query.

    The sender is told when the receiver has been served, so the caller
    does not start its next sub-protocol while this one is still open.
    """

    def __init__(self, path, link):
        super().__init__(path, link)
        self.pairs: np.ndarray | None = None
        self.answered = False

    def handle(self, party, name, body, aux=None):
        if name == "SENDER":
            if self.pairs is None:
                self.pairs = np.asarray(body["x"], dtype=np.uint8)
                self.sender = party
        elif name == "RECEIVER":
            if self.pairs is None or self.answered:
                return
            c = np.asarray(body["c"], dtype=np.int64).reshape(-1)
            if c.size != self.pairs.shape[0]:
                return
            self.answered = True
            self.deliver(party, "REVEAL", {"x": self.pairs[np.arange(c.size), c]})
            self.deliver(self.sender, "DONE")


def fpot_send(ctx, secrets, layer: str = "pot"):
    s = np.asarray(secrets, dtype=np.uint8)
    with ctx.sess.layer(layer):
        ctx.sess.to_oracle("pot", "SENDER", {"x": s})
        yield from ctx.sess.recv_oracle("DONE")
    return None


def fpot_receive(ctx, choices, layer: str = "pot"):
    with ctx.sess.layer(layer):
        ctx.sess.to_oracle("pot", "RECEIVER", {"c": np.asarray(choices, dtype=np.int64)})
        body = yield from ctx.sess.recv_oracle("REVEAL")
    return np.asarray(body["x"], dtype=np.uint8)


@dataclass(frozen=True)
class ParallelOt:
    """Which parallel-OT implementation a caller plugs in.

    ``kind="ideal"`` uses the :class:`FPot` functionality; ``kind="bbcs"``
    runs :func:`pot_send` / :func:`pot_receive` with ``params`` over the
    commitment backend ``socom``.
    """

    kind: str = "ideal"
    params: QotParams | None = None
    socom: str = "plain"

    def __post_init__(self):
        if self.kind not in ("ideal", "bbcs"):
            raise ValueError(f"unknown parallel OT kind {self.kind!r}")
        if self.kind == "bbcs" and self.params is None:
            raise ValueError("bbcs parallel OT needs QotParams")

    def send(self, ctx, secrets):
        secrets = np.asarray(secrets, dtype=np.uint8)
        if self.kind == "ideal":
            return (yield from fpot_send(ctx, secrets))
        return (yield from pot_send(ctx, secrets, self.params, self.socom))

    def receive(self, ctx, choices):
        if self.kind == "ideal":
            return (yield from fpot_receive(ctx, choices))
        return (yield from pot_receive(ctx, choices, self.params, self.socom))
