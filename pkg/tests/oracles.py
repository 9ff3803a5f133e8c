"""Independent reference implementations used as test oracles.

Everything here is deliberately naive: dense F2 linear algebra and explicit
per-edge message-passing loops, kept free of the package's vectorized code
paths (the masked decoders share only the documented per-edge RNG contract).
"""

from __future__ import annotations

import math

import numpy as np

from qcmdpc.crypto import PrivateKey, PublicKey
from qcmdpc.decoders import _edge_uniforms, channel_llr


def dense_parity_check(priv: PrivateKey) -> np.ndarray:
    """H with H[m, i*Q+b] = h_i[(m-b) mod Q], realizing the polynomial
    syndrome convention s = sum_i h_i * c_i."""
    q = priv.params.q
    blocks = []
    for h in priv.h:
        coeffs = h.coeffs()
        block = np.zeros((q, q), dtype=np.uint8)
        for m in range(q):
            for b in range(q):
                block[m, b] = coeffs[(m - b) % q]
        blocks.append(block)
    return np.concatenate(blocks, axis=1)


def dense_generator(pub: PublicKey) -> np.ndarray:
    """Systematic G = [I | circ(g_0); ...], row (i*Q+j) parity = g_i shifted by j."""
    q = pub.params.q
    k, n = pub.params.k, pub.params.n
    g_mat = np.zeros((k, n), dtype=np.uint8)
    g_mat[:, :k] = np.eye(k, dtype=np.uint8)
    for i, g in enumerate(pub.g):
        g_mat[i * q : (i + 1) * q, k:] = g.to_dense_circulant()
    return g_mat


def mat_vec_f2(m: np.ndarray, v: np.ndarray) -> np.ndarray:
    return (m.astype(np.int64) @ v.astype(np.int64)) % 2


class EdgeGraph:
    """Adjacency lists from the dense parity-check matrix."""

    def __init__(self, h_dense: np.ndarray):
        self.h = h_dense
        self.r, self.n = h_dense.shape
        self.cn_neighbors = [list(np.flatnonzero(h_dense[m])) for m in range(self.r)]
        self.vn_neighbors = [list(np.flatnonzero(h_dense[:, v])) for v in range(self.n)]

    def syndrome_zero(self, word_bits: np.ndarray) -> bool:
        return not mat_vec_f2(self.h, word_bits).any()


def ref_decode_bf(graph: EdgeGraph, c_bipolar, imax, b=None, rule="fixed", delta=0):
    word = np.asarray(c_bipolar, dtype=int).copy()
    it = 0
    while True:
        syn = [int(np.prod(word[graph.cn_neighbors[m]])) for m in range(graph.r)]
        if all(s == 1 for s in syn):
            return word, True, it
        if it == imax:
            return word, False, it
        counts = np.array(
            [sum(syn[m] == -1 for m in graph.vn_neighbors[v]) for v in range(graph.n)]
        )
        if rule == "fixed":
            b_eff = b
        elif rule == "max_upc":
            b_eff = counts.max()
        else:
            b_eff = counts.max() - delta
        word = np.where(counts >= b_eff, -word, word)
        it += 1


def _ref_extrinsic_loop(graph, c_bipolar, imax, vn_rule, decide):
    """Flooding schedule with per-edge dict messages; shared by the reference
    Gallager-B and ternary decoders."""
    c = np.asarray(c_bipolar, dtype=int)
    if graph.syndrome_zero((c < 0).astype(np.uint8)):
        return (c < 0).astype(np.uint8), True, 0
    vc = {(v, m): c[v] for v in range(graph.n) for m in graph.vn_neighbors[v]}
    dec = (c < 0).astype(np.uint8)
    for ell in range(1, imax + 1):
        cv = {}
        for m in range(graph.r):
            for v in graph.cn_neighbors[m]:
                prod = 1
                for v2 in graph.cn_neighbors[m]:
                    if v2 != v:
                        prod *= vc[(v2, m)]
                cv[(m, v)] = prod
        dec = decide(cv, c)
        if graph.syndrome_zero(dec):
            return dec, True, ell
        if ell == imax:
            return dec, False, imax
        vc = vn_rule(cv, c, ell, vc)
    return dec, False, imax


def ref_decode_gallager_b(graph: EdgeGraph, c_bipolar, b, imax):
    def vn_rule(cv, c, ell, prev):
        out = {}
        for v in range(graph.n):
            for m in graph.vn_neighbors[v]:
                cnt = sum(
                    cv[(m2, v)] == -c[v] for m2 in graph.vn_neighbors[v] if m2 != m
                )
                out[(v, m)] = -c[v] if cnt >= b else c[v]
        return out

    def decide(cv, c):
        dec = []
        for v in range(graph.n):
            cnt = sum(cv[(m, v)] == -c[v] for m in graph.vn_neighbors[v])
            dec.append(-c[v] if cnt > b else c[v])
        return (np.array(dec) < 0).astype(np.uint8)

    return _ref_extrinsic_loop(graph, c_bipolar, imax, vn_rule, decide)


def _sign(x):
    return int(x > 0) - int(x < 0)


def ref_decode_ternary(graph: EdgeGraph, c_bipolar, omega, imax, variant="AlgE",
                       p_star=0.0, p_dec=0.0, seed=0, edge_index=None,
                       uniform_shape=None):
    """Reference for the ternary family.  CN product absorbs zeros; masking
    consumes the documented per-edge uniforms via edge_index[(v, m)]."""

    def p_e(ell):
        p = p_star
        for _ in range(ell):
            p = p - p_dec if p > p_dec else 0.0
        return p

    def masked(vc_out, ell):
        if variant == "AlgE" or p_e(ell) == 0.0:
            return vc_out
        u = _edge_uniforms(seed, ell, uniform_shape)
        out = {}
        for (v, m), val in vc_out.items():
            keep = u[edge_index[(v, m)]] >= p_e(ell)
            if variant == "REMP1":
                out[(v, m)] = val if (val == 0 or keep) else 0
            else:  # REMP2
                contradicts = val == -c_ref[v]
                out[(v, m)] = 0 if (contradicts and not keep) else val
        return out

    c_ref = np.asarray(c_bipolar, dtype=int)

    def vn_rule(cv, c, ell, prev):
        out = {}
        for v in range(graph.n):
            for m in graph.vn_neighbors[v]:
                s = omega * c[v] + sum(
                    cv[(m2, v)] for m2 in graph.vn_neighbors[v] if m2 != m
                )
                out[(v, m)] = _sign(s)
        return masked(out, ell)

    def decide(cv, c):
        dec = []
        for v in range(graph.n):
            s = omega * c[v] + sum(cv[(m, v)] for m in graph.vn_neighbors[v])
            dec.append(_sign(s) if s != 0 else c[v])
        return (np.array(dec) < 0).astype(np.uint8)

    # initial messages: sign(omega * c), masked at ell=0 for REMP1
    c = c_ref
    if graph.syndrome_zero((c < 0).astype(np.uint8)):
        return (c < 0).astype(np.uint8), True, 0
    vc = {(v, m): _sign(omega * c[v]) for v in range(graph.n) for m in graph.vn_neighbors[v]}
    if variant == "REMP1":
        vc = masked(vc, 0)
    dec = (c < 0).astype(np.uint8)
    for ell in range(1, imax + 1):
        cv = {}
        for m in range(graph.r):
            for v in graph.cn_neighbors[m]:
                prod = 1
                for v2 in graph.cn_neighbors[m]:
                    if v2 != v:
                        prod *= vc[(v2, m)]
                cv[(m, v)] = prod
        dec = decide(cv, c)
        if graph.syndrome_zero(dec):
            return dec, True, ell
        if ell == imax:
            return dec, False, imax
        vc = vn_rule(cv, c, ell, vc)
    return dec, False, imax


def ref_decode_bp(graph: EdgeGraph, c_bipolar, t_assumed, imax,
                  llr_convention="paper", clip=19.0):
    c = np.asarray(c_bipolar, dtype=float)
    bits = (c < 0).astype(np.uint8)
    if graph.syndrome_zero(bits):
        return bits, True, 0
    m_ch = channel_llr(graph.n, t_assumed, llr_convention) * c
    vc = {
        (v, m): float(np.clip(m_ch[v], -clip, clip))
        for v in range(graph.n)
        for m in graph.vn_neighbors[v]
    }
    dec = bits
    for ell in range(1, imax + 1):
        cv = {}
        for m in range(graph.r):
            for v in graph.cn_neighbors[m]:
                prod = 1.0
                for v2 in graph.cn_neighbors[m]:
                    if v2 != v:
                        prod *= math.tanh(vc[(v2, m)] / 2.0)
                prod = min(max(prod, -(1 - 1e-16)), 1 - 1e-16)
                cv[(m, v)] = float(np.clip(2.0 * math.atanh(prod), -clip, clip))
        dec = []
        for v in range(graph.n):
            s = m_ch[v] + sum(cv[(m, v)] for m in graph.vn_neighbors[v])
            dec.append(1 if s > 0 else -1 if s < 0 else int(c[v]))
        dec = (np.array(dec) < 0).astype(np.uint8)
        if graph.syndrome_zero(dec):
            return dec, True, ell
        if ell == imax:
            return dec, False, imax
        vc_new = {}
        for v in range(graph.n):
            total = m_ch[v] + sum(cv[(m, v)] for m in graph.vn_neighbors[v])
            for m in graph.vn_neighbors[v]:
                vc_new[(v, m)] = float(np.clip(total - cv[(m, v)], -clip, clip))
        vc = vc_new
    return dec, False, imax
