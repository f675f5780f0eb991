"""Compilers from protocol-level claims to :class:`Statement` objects.

Prover and verifier call the same compiler on the same public data; only the
prover additionally assembles a witness via :meth:`Statement.assemble`.
"""

from __future__ import annotations

import hashlib

import numpy as np

from .. import bits as B
from ..circuit import AND, BooleanCircuit
from ..garble import GarbledCircuit, Topology, lower
from .engine import Statement, StatementBuilder, StatementError
from .gadgets import (circuit_gadget, commit_gadget, labelgen_gadget, pair_eq_gadget,
                      row_gadget, select_gadget)


def _bits2d(x, width: int, rows: int | None = None) -> np.ndarray:
    x = np.asarray(x, dtype=np.uint8)
    x = x.reshape(-1, width) if x.size else np.zeros((0, width), np.uint8)
    if rows is not None and x.shape[0] != rows:
        raise StatementError(f"expected {rows} rows of {width} bits, got {x.shape}")
    return x


def _rho(rho, lam: int) -> np.ndarray:
    rho = B.as_bits(rho)
    if rho.size != 3 * lam:
        raise StatementError(f"rho must have {3 * lam} bits")
    return rho


def circuit_statement(circuit: BooleanCircuit) -> Statement:
    """``∃w: C(w) = 1`` for a single-output circuit."""
    h = hashlib.sha256(circuit.ops.tobytes() + circuit.a.tobytes() + circuit.b.tobytes()
                       + circuit.outputs.tobytes() + str(circuit.n_inputs).encode()).hexdigest()[:16]
    sb = StatementBuilder("circuit")
    w = sb.witness("w", (circuit.n_inputs,))
    start = w[:1] if w.size else np.zeros(1, np.int64)
    sb.add(circuit_gadget(circuit, h), 1, {"w": start}, check=True)
    return sb.finish()


def commits_open_to(lam: int, rho, cs, msgs, kind: str = "commit-opens-to") -> Statement:
    """Each ``cs[i]`` is a string commitment to the public ``msgs[i]``.

    Witness part ``r``: seeds of shape ``(N, λ)``.
    """
    rho = _rho(rho, lam)
    msgs = np.asarray(msgs, dtype=np.uint8)
    if msgs.ndim == 1:
        msgs = msgs[None, :]
    N, L = msgs.shape
    if N == 0:
        raise StatementError("nothing to prove for an empty message list")
    cs = _bits2d(cs, 3 * lam * L, N)
    sb = StatementBuilder(kind)
    r = sb.witness("r", (N, lam))
    sb.add(commit_gadget(lam, L, False), N, {"seed": r[:, 0]},
           {"msg": msgs, "rho": rho, "c": cs}, check=True)
    return sb.finish()


def socom_consistency(lam: int, rho, cs, opened, opened_msgs) -> Statement:
    """Commitments in ``opened`` open to ``opened_msgs``; all others are well formed.

    Witness parts: ``r`` seeds ``(k, λ)`` and ``hidden`` messages ``(k-|I|, L)``
    in increasing index order.
    """
    rho = _rho(rho, lam)
    opened = np.asarray(opened, dtype=np.int64).reshape(-1)
    opened_msgs = np.asarray(opened_msgs, dtype=np.uint8)
    k = np.asarray(cs).shape[0]
    L = np.asarray(cs).shape[1] // (3 * lam)
    cs = _bits2d(cs, 3 * lam * L, k)
    opened_msgs = opened_msgs.reshape(opened.size, L)
    if opened.size and (opened.min() < 0 or opened.max() >= k or np.unique(opened).size != opened.size):
        raise StatementError("opened index set out of range or repeated")
    hidden = np.setdiff1d(np.arange(k), opened)
    sb = StatementBuilder("socom-consistency")
    r = sb.witness("r", (k, lam))
    m = sb.witness("hidden", (hidden.size, L))
    if hidden.size:
        sb.add(commit_gadget(lam, L, True), hidden.size, {"seed": r[hidden, 0], "msg": m[:, 0]},
               {"rho": rho, "c": cs[hidden]}, check=True)
    if opened.size:
        sb.add(commit_gadget(lam, L, False), opened.size, {"seed": r[opened, 0]},
               {"msg": opened_msgs, "rho": rho, "c": cs[opened]}, check=True)
    return sb.finish()


def _ctr_bits(idx: np.ndarray, lam: int) -> np.ndarray:
    idx = np.asarray(idx, dtype=np.uint64)
    mask = np.uint64((1 << lam) - 1)
    return np.concatenate([B.words_to_bits(idx & mask, lam),
                           B.words_to_bits(idx >> np.uint64(lam), lam)], axis=-1)


def cds_consistency(lam: int, rho, topo: Topology, gcs: list[GarbledCircuit], cstar,
                    clab) -> Statement:
    """Every garbling is the seeded garbling of ``topo`` with garbler input ``μ``;
    ``c*`` commits to ``μ``; every label commitment commits to its label.

    Witness parts: ``gamma`` (2λ, λ) garbling seeds, ``mu`` (n_garbler,),
    ``rstar`` (λ,), ``rlab`` (2λ, m, 2, λ).
    """
    rho = _rho(rho, lam)
    n_inst = len(gcs)
    m, g_in = topo.n_eval, topo.n_garbler
    nb = -(-topo.n_wires // 2)
    for gc in gcs:
        t = gc.topo
        if (gc.lam != lam or t.n_eval != m or t.n_garbler != g_in or t.n_gates != topo.n_gates
                or not np.array_equal(t.ops, topo.ops) or not np.array_equal(t.a, topo.a)
                or not np.array_equal(t.b, topo.b) or not np.array_equal(t.outputs, topo.outputs)):
            raise StatementError("garbled circuit does not have the agreed topology")
    clab = _bits2d(clab, 3 * lam * lam, n_inst * m * 2).reshape(n_inst, m, 2, -1)
    cstar = _bits2d(cstar, 3 * lam * g_in, 1)

    sb = StatementBuilder("cds-consistency")
    gamma = sb.witness("gamma", (n_inst, lam))
    mu = sb.witness("mu", (g_in,))
    rstar = sb.witness("rstar", (lam,))
    rlab = sb.witness("rlab", (n_inst, m, 2, lam))

    inst = np.repeat(np.arange(n_inst), nb)
    blk = np.tile(np.arange(nb), n_inst)
    lab = sb.add(labelgen_gadget(lam), n_inst * nb, {"seed": gamma[inst, 0]},
                 {"ctr": _ctr_bits(blk, lam)})
    lab_base = lab[:, 0].reshape(n_inst, nb)

    def pair(i, w):
        w = np.asarray(w)
        return lab_base[i, w // 2] + (w % 2) * 2 * lam

    gate_wire = topo.first_gate_wire + np.arange(topo.n_gates)
    for is_and in (False, True):
        sel = np.flatnonzero((topo.ops == AND) == is_and)
        if sel.size == 0:
            continue
        ii = np.repeat(np.arange(n_inst), sel.size)
        gg = np.tile(sel, n_inst)
        rows = np.stack([B.words_to_bits(gcs[i].tables[sel], lam).reshape(sel.size, 8 * lam)
                         for i in range(n_inst)]).reshape(-1, 8 * lam)
        sb.add(row_gadget(lam, is_and), ii.size,
               {"la": pair(ii, topo.a[gg]), "lb": pair(ii, topo.b[gg]), "lo": pair(ii, gate_wire[gg])},
               {"tweak": _ctr_bits(gg, lam), "rows": rows}, check=True)

    glabels = np.stack([gc.garbler_labels for gc in gcs])  # (n_inst, g_in + 2)
    if g_in:
        ii = np.repeat(np.arange(n_inst), g_in)
        jj = np.tile(np.arange(g_in), n_inst)
        sb.add(select_gadget(lam, True), ii.size, {"pair": pair(ii, m + jj), "v": mu[jj]},
               {"label": B.words_to_bits(glabels[:, :g_in].reshape(-1), lam)}, check=True)
    ii = np.repeat(np.arange(n_inst), 2)
    vv = np.tile([0, 1], n_inst)
    sb.add(select_gadget(lam, False), ii.size, {"pair": pair(ii, topo.zero_wire + vv)},
           {"v": vv[:, None], "label": B.words_to_bits(glabels[:, g_in:].reshape(-1), lam)}, check=True)

    n_out = topo.outputs.size
    ii = np.repeat(np.arange(n_inst), n_out)
    oo = np.tile(np.arange(n_out), n_inst)
    dec = np.stack([gc.decode for gc in gcs]).reshape(-1, 2)
    sb.add(pair_eq_gadget(lam), ii.size, {"pair": pair(ii, topo.outputs[oo])},
           {"pub": B.words_to_bits(dec, lam).reshape(-1, 2 * lam)}, check=True)

    ii, jj, bb = (a.reshape(-1) for a in np.meshgrid(np.arange(n_inst), np.arange(m), [0, 1], indexing="ij"))
    sb.add(commit_gadget(lam, lam, True), ii.size,
           {"seed": rlab[ii, jj, bb, 0], "msg": pair(ii, jj) + bb * lam},
           {"rho": rho, "c": clab.reshape(-1, clab.shape[-1])}, check=True)
    if g_in:
        sb.add(commit_gadget(lam, g_in, True), 1, {"seed": rstar[:1], "msg": mu[:1]},
               {"rho": rho, "c": cstar}, check=True)
    return sb.finish()


def ecom_consistency(lam: int, rho_cds, cstar_cds, rho_star, cstar, msg_len: int) -> Statement:
    """``c*_cds`` commits to the concatenated messages and each ``c*_i`` to message ``i``.

    Witness parts: ``mu`` (K, L), ``r_cds`` (λ,), ``r_star`` (K, λ).
    """
    rho_cds, rho_star = _rho(rho_cds, lam), _rho(rho_star, lam)
    L = msg_len
    cstar = _bits2d(cstar, 3 * lam * L)
    K = cstar.shape[0]
    cstar_cds = _bits2d(cstar_cds, 3 * lam * K * L, 1)
    sb = StatementBuilder("ecom-consistency")
    mu = sb.witness("mu", (K, L))
    r_cds = sb.witness("r_cds", (lam,))
    r_star = sb.witness("r_star", (K, lam))
    sb.add(commit_gadget(lam, K * L, True), 1, {"seed": r_cds[:1], "msg": mu[:1, 0]},
           {"rho": rho_cds, "c": cstar_cds}, check=True)
    sb.add(commit_gadget(lam, L, True), K, {"seed": r_star[:, 0], "msg": mu[:, 0]},
           {"rho": rho_star, "c": cstar}, check=True)
    return sb.finish()


_KINDS = {
    "circuit": circuit_statement,
    "commit-opens-to": commits_open_to,
    "socom-consistency": socom_consistency,
    "cds-consistency": cds_consistency,
    "ecom-consistency": ecom_consistency,
    "ecom-open": lambda lam, rho, cs, msgs: commits_open_to(lam, rho, cs, msgs, kind="ecom-open"),
}


def compile_statement(kind: str, *args, **kwargs) -> Statement:
    fn = _KINDS.get(kind)
    if fn is None:
        raise StatementError(f"unsupported statement kind {kind!r}")
    return fn(*args, **kwargs)


def topology_of(circuit: BooleanCircuit, n_garbler: int) -> Topology:
    return lower(circuit, n_garbler)
