"""Iterative message-passing decoders over the Tanner graph.

All decoders take the ciphertext in bipolar form (bit 0 -> +1, bit 1 -> -1)
and run a flooding schedule: one full check-node pass plus one full
variable-node pass per iteration.  After each check-node pass the tentative
decision word is formed and the decoder stops early on a zero syndrome.

Masking decisions are drawn per edge per iteration from a counter-based
generator keyed by (seed, iteration), so outcomes do not depend on
scheduling or worker counts.  A decoder with p_star = 0 never consults the
generator and is bit-identical to its unmasked base variant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .de import erasure_schedule
from .tanner import TannerGraph

VARIANTS = ("BF", "GallagerB", "MF1", "MF2", "AlgE", "REMP1", "REMP2", "BP", "MBP")
BF_RULES = ("fixed", "max_upc", "max_upc_minus")

_ONE_BELOW = float(np.nextafter(1.0, 0.0))
_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class DecoderConfig:
    variant: str
    imax: int = 50
    b: int | None = None  # flip threshold; default ceil(d_v / 2) at decode time
    bf_rule: str = "fixed"
    bf_delta: int = 0
    omega: float = 1.0
    p_star: float = 0.0
    p_dec: float = 0.0
    t_assumed: int | None = None
    seed: int = 0
    llr_convention: str = "paper"
    bp_clip: float = 19.0

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown decoder variant {self.variant!r}")
        if self.imax < 0:
            raise ValueError("imax must be >= 0")
        if self.bf_rule not in BF_RULES:
            raise ValueError(f"unknown BF threshold rule {self.bf_rule!r}")
        if not 0.0 <= self.p_dec <= self.p_star <= 1.0:
            raise ValueError("need 0 <= p_dec <= p_star <= 1")
        if self.omega < 0:
            raise ValueError("omega must be >= 0")
        if self.llr_convention not in ("paper", "bsc"):
            raise ValueError(f"unknown llr_convention {self.llr_convention!r}")
        if self.variant in ("BP", "MBP") and self.t_assumed is None:
            raise ValueError(f"{self.variant} requires t_assumed")

    def with_seed(self, seed: int) -> "DecoderConfig":
        return replace(self, seed=int(seed))


@dataclass(frozen=True)
class DecodeOutcome:
    word: np.ndarray  # length-n bit vector (decision)
    success: bool  # syndrome of word is zero
    iterations: int
    residual_erasures: int = 0


def _edge_uniforms(seed: int, iteration: int, shape) -> np.ndarray:
    key = (int(seed) & _MASK64) | ((iteration + 1) << 64)
    return np.random.Generator(np.random.Philox(key=key)).random(shape)


def _bits(word_bipolar: np.ndarray) -> np.ndarray:
    return (word_bipolar < 0).astype(np.uint8)


def _check_input(graph: TannerGraph, c_bipolar: np.ndarray) -> np.ndarray:
    c = np.asarray(c_bipolar)
    if c.shape != (graph.n,):
        raise ValueError(f"expected bipolar word of length {graph.n}, got {c.shape}")
    return c.astype(np.int8)


def _default_b(graph: TannerGraph) -> int:
    return math.ceil(graph.vn_degree_max / 2)


def decode_bf(
    graph: TannerGraph,
    c_bipolar: np.ndarray,
    imax: int,
    b: int | None = None,
    rule: str = "fixed",
    delta: int = 0,
) -> DecodeOutcome:
    """Bit flipping: flip every variable whose unsatisfied-check count reaches
    the threshold; the check messages are plain parities (no extrinsic split).
    """
    cb = _check_input(graph, c_bipolar)
    if rule == "fixed" and b is None:
        b = _default_b(graph)
    word = cb.copy()
    it = 0
    while True:
        spread = graph.cn_view(graph.spread_word(word))
        neg = (spread == -1).sum(axis=0)
        syn_failed = (neg & 1).astype(bool)  # per-check: parity of -1 inputs
        if not syn_failed.any():
            return DecodeOutcome(_bits(word), True, it)
        if it == imax:
            return DecodeOutcome(_bits(word), False, it)
        unsat_rows = np.broadcast_to(syn_failed, (graph.cn_degree, graph.q))
        counts = graph.vn_sum(graph.vn_view(unsat_rows).astype(np.int32)).reshape(-1)
        if rule == "fixed":
            b_eff = b
        elif rule == "max_upc":
            b_eff = int(counts.max())
        else:  # max_upc_minus
            b_eff = int(counts.max()) - delta
        word = np.where(counts >= b_eff, -word, word).astype(np.int8)
        it += 1


def _gallager_family(
    graph: TannerGraph,
    c_bipolar: np.ndarray,
    b: int | None,
    imax: int,
    mf_variant: int | None,
    p_star: float,
    p_dec: float,
    seed: int,
) -> DecodeOutcome:
    """Hard-decision extrinsic decoding; mf_variant 1/2 adds probabilistic
    masking of the flip decision, mf_variant None is plain Gallager B."""
    cb = _check_input(graph, c_bipolar)
    if b is None:
        b = _default_b(graph)
    if not 1 <= b <= graph.vn_degree_max - 1:
        raise ValueError(f"threshold b={b} outside 1..{graph.vn_degree_max - 1}")
    if graph.syndrome_is_zero(_bits(cb)):
        return DecodeOutcome(_bits(cb), True, 0)
    c_edge = graph.spread_word(cb)
    vc = c_edge.copy()
    dec = cb
    for ell in range(1, imax + 1):
        vc_cn = graph.cn_view(vc)
        neg_in = vc_cn == -1
        ext_neg = neg_in.sum(axis=0)[None, :] - neg_in
        cv = graph.vn_view((1 - 2 * (ext_neg & 1)).astype(np.int8))
        disagree = cv != c_edge
        cnt_vn = graph.vn_sum(disagree.astype(np.int32))
        dec = np.where(cnt_vn.reshape(-1) > b, -cb, cb).astype(np.int8)
        if graph.syndrome_is_zero(_bits(dec)):
            return DecodeOutcome(_bits(dec), True, ell)
        if ell == imax:
            break
        ext_cnt = cnt_vn[graph.row_block] - disagree
        fire = ext_cnt >= b
        m_new = np.where(fire, -c_edge, c_edge).astype(np.int8)
        if mf_variant is not None:
            p_e = erasure_schedule(p_star, p_dec, ell)
            if p_e > 0.0:
                masked = fire & (_edge_uniforms(seed, ell, m_new.shape) < p_e)
                m_new[masked] = c_edge[masked] if mf_variant == 1 else vc[masked]
        vc = m_new
    return DecodeOutcome(_bits(dec), False, imax)


def decode_gallager_b(graph, c_bipolar, b, imax) -> DecodeOutcome:
    return _gallager_family(graph, c_bipolar, b, imax, None, 0.0, 0.0, 0)


def decode_mf(graph, c_bipolar, variant, b, p_star, p_dec, imax, seed) -> DecodeOutcome:
    if variant not in (1, 2):
        raise ValueError("MF variant must be 1 or 2")
    return _gallager_family(graph, c_bipolar, b, imax, variant, p_star, p_dec, seed)


def _sign_int8(values: np.ndarray) -> np.ndarray:
    return np.sign(values).astype(np.int8)


def _ternary_family(
    graph: TannerGraph,
    c_bipolar: np.ndarray,
    omega: float,
    imax: int,
    variant: str,
    p_star: float,
    p_dec: float,
    seed: int,
) -> DecodeOutcome:
    """Ternary-alphabet decoding: messages in {-1, 0, +1}, weighted channel
    term, zero-absorbing check products.  variant selects the masking rule:
    plain, erase-any-nonzero, or erase-on-contradiction."""
    cb = _check_input(graph, c_bipolar)
    if graph.syndrome_is_zero(_bits(cb)):
        return DecodeOutcome(_bits(cb), True, 0)
    c_edge = graph.spread_word(cb)
    vc = c_edge.copy()
    if variant == "REMP1":
        p_e0 = erasure_schedule(p_star, p_dec, 0)
        if p_e0 > 0.0:
            vc[_edge_uniforms(seed, 0, vc.shape) < p_e0] = 0
    dec = cb
    resid = 0
    for ell in range(1, imax + 1):
        vc_cn = graph.cn_view(vc)
        zero_in = vc_cn == 0
        neg_in = vc_cn == -1
        ext_zero = zero_in.sum(axis=0)[None, :] - zero_in
        ext_neg = neg_in.sum(axis=0)[None, :] - neg_in
        cv_cn = np.where(ext_zero > 0, 0, 1 - 2 * (ext_neg & 1)).astype(np.int8)
        cv = graph.vn_view(cv_cn)
        sums = graph.vn_sum(cv.astype(np.int32))
        dec_val = omega * cb + sums.reshape(-1)
        dec = np.where(dec_val > 0, 1, np.where(dec_val < 0, -1, cb)).astype(np.int8)
        resid = int(np.count_nonzero(dec_val == 0))
        if graph.syndrome_is_zero(_bits(dec)):
            return DecodeOutcome(_bits(dec), True, ell, resid)
        if ell == imax:
            break
        ext = sums[graph.row_block] - cv
        m_new = _sign_int8(omega * c_edge + ext)
        p_e = erasure_schedule(p_star, p_dec, ell)
        if p_e > 0.0 and variant != "AlgE":
            if variant == "REMP1":
                candidates = m_new != 0
            else:  # REMP2: only messages contradicting the channel bit
                candidates = m_new == -c_edge
            masked = candidates & (_edge_uniforms(seed, ell, m_new.shape) < p_e)
            m_new[masked] = 0
        vc = m_new
    return DecodeOutcome(_bits(dec), False, imax, resid)


def decode_alg_e(graph, c_bipolar, omega, imax) -> DecodeOutcome:
    return _ternary_family(graph, c_bipolar, omega, imax, "AlgE", 0.0, 0.0, 0)


def decode_remp1(graph, c_bipolar, omega, p_star, p_dec, imax, seed) -> DecodeOutcome:
    return _ternary_family(graph, c_bipolar, omega, imax, "REMP1", p_star, p_dec, seed)


def decode_remp2(graph, c_bipolar, omega, p_star, p_dec, imax, seed) -> DecodeOutcome:
    return _ternary_family(graph, c_bipolar, omega, imax, "REMP2", p_star, p_dec, seed)


def channel_llr(n: int, t_assumed: int, convention: str) -> float:
    """Magnitude multiplying the bipolar ciphertext bit at initialization."""
    if not 0 < t_assumed < n:
        raise ValueError(f"t_assumed must be in (0, {n}), got {t_assumed}")
    if convention == "paper":
        return math.log((n - t_assumed) / n)
    if convention == "bsc":
        return math.log((n - t_assumed) / t_assumed)
    raise ValueError(f"unknown llr_convention {convention!r}")


def _bp_family(
    graph: TannerGraph,
    c_bipolar: np.ndarray,
    t_assumed: int,
    imax: int,
    masked: bool,
    p_star: float,
    p_dec: float,
    seed: int,
    llr_convention: str,
    clip: float,
) -> DecodeOutcome:
    """Sum-product decoding with tanh-rule check nodes; masked variant
    replaces sign-contradicting messages by the channel value."""
    cb = _check_input(graph, c_bipolar)
    mag = channel_llr(graph.n, t_assumed, llr_convention)
    if graph.syndrome_is_zero(_bits(cb)):
        return DecodeOutcome(_bits(cb), True, 0)
    m_ch = mag * cb.astype(np.float64)
    m_ch_edge = graph.spread_word(m_ch)
    vc = np.clip(m_ch_edge, -clip, clip)
    dec = cb
    resid = 0
    for ell in range(1, imax + 1):
        t_cn = np.tanh(graph.cn_view(vc) / 2.0)
        neg_in = t_cn < 0
        lg = np.log(np.maximum(np.abs(t_cn), 1e-300))
        ext_mag = np.exp(lg.sum(axis=0)[None, :] - lg)
        ext_neg = neg_in.sum(axis=0)[None, :] - neg_in
        ext_sign = 1.0 - 2.0 * (ext_neg & 1)
        cv_cn = 2.0 * np.arctanh(np.minimum(ext_mag, _ONE_BELOW)) * ext_sign
        np.clip(cv_cn, -clip, clip, out=cv_cn)
        cv = graph.vn_view(cv_cn)
        sums = graph.vn_sum(cv)
        dec_val = m_ch + sums.reshape(-1)
        dec = np.where(dec_val > 0, 1, np.where(dec_val < 0, -1, cb)).astype(np.int8)
        resid = int(np.count_nonzero(dec_val == 0))
        if graph.syndrome_is_zero(_bits(dec)):
            return DecodeOutcome(_bits(dec), True, ell, resid)
        if ell == imax:
            break
        m_new = np.clip(m_ch_edge + sums[graph.row_block] - cv, -clip, clip)
        if masked:
            p_e = erasure_schedule(p_star, p_dec, ell)
            if p_e > 0.0:
                contra = np.sign(m_new) != np.sign(m_ch_edge)
                sel = contra & (_edge_uniforms(seed, ell, m_new.shape) < p_e)
                m_new[sel] = m_ch_edge[sel]
        vc = m_new
    return DecodeOutcome(_bits(dec), False, imax, resid)


def decode_bp(graph, c_bipolar, t_assumed, imax, llr_convention="paper", clip=19.0):
    return _bp_family(
        graph, c_bipolar, t_assumed, imax, False, 0.0, 0.0, 0, llr_convention, clip
    )


def decode_mbp(
    graph, c_bipolar, t_assumed, p_star, p_dec, imax, seed, llr_convention="paper", clip=19.0
):
    return _bp_family(
        graph, c_bipolar, t_assumed, imax, True, p_star, p_dec, seed, llr_convention, clip
    )


def decode(graph: TannerGraph, c_bipolar: np.ndarray, config: DecoderConfig) -> DecodeOutcome:
    """Dispatch on the configured variant."""
    v = config.variant
    if v == "BF":
        return decode_bf(
            graph, c_bipolar, config.imax, config.b, config.bf_rule, config.bf_delta
        )
    if v == "GallagerB":
        return decode_gallager_b(graph, c_bipolar, config.b, config.imax)
    if v in ("MF1", "MF2"):
        return decode_mf(
            graph,
            c_bipolar,
            1 if v == "MF1" else 2,
            config.b,
            config.p_star,
            config.p_dec,
            config.imax,
            config.seed,
        )
    if v in ("AlgE", "REMP1", "REMP2"):
        return _ternary_family(
            graph,
            c_bipolar,
            config.omega,
            config.imax,
            v,
            config.p_star,
            config.p_dec,
            config.seed,
        )
    if v == "BP":
        return decode_bp(
            graph, c_bipolar, config.t_assumed, config.imax, config.llr_convention, config.bp_clip
        )
    if v == "MBP":
        return decode_mbp(
            graph,
            c_bipolar,
            config.t_assumed,
            config.p_star,
            config.p_dec,
            config.imax,
            config.seed,
            config.llr_convention,
            config.bp_clip,
        )
    raise ValueError(f"unknown decoder variant {v!r}")


# batched kernels ----------------------------------------------------------
#
# Campaigns decode millions of short words; per-call numpy overhead dominates
# the scalar path at small Q.  These kernels run a whole batch through the
# same update rules and must stay outcome-identical to the scalar decoders
# (covered by tests); any rule change has to land in both places.


def _batch_syndrome_ok(graph: TannerGraph, words: np.ndarray) -> np.ndarray:
    """Per-trial zero-syndrome flag for a (B, n) batch of bit words."""
    spread = words.reshape(words.shape[0], graph.n0, graph.q)[:, graph.row_block, :]
    cn = spread[:, np.arange(graph.cn_degree)[:, None], graph.to_cn_idx]
    return ~(np.bitwise_xor.reduce(cn, axis=1).any(axis=1))


def _batch_cn_view(graph: TannerGraph, arr_vn: np.ndarray) -> np.ndarray:
    return arr_vn[:, np.arange(graph.cn_degree)[:, None], graph.to_cn_idx]


def _batch_vn_view(graph: TannerGraph, arr_cn: np.ndarray) -> np.ndarray:
    return arr_cn[:, np.arange(graph.cn_degree)[:, None], graph.to_vn_idx]


def _batch_vn_sum(graph: TannerGraph, arr_vn: np.ndarray) -> np.ndarray:
    return np.add.reduceat(arr_vn, graph.block_starts, axis=1)


def _batch_spread(graph: TannerGraph, per_vn: np.ndarray) -> np.ndarray:
    return per_vn.reshape(per_vn.shape[0], graph.n0, graph.q)[:, graph.row_block, :]


def _finish(outcomes, idx, word_bip, success, iterations, resid=0):
    outcomes[idx] = DecodeOutcome(_bits(word_bip), success, iterations, resid)


def decode_bf_batch(
    graph: TannerGraph,
    c_batch: np.ndarray,
    imax: int,
    b: int | None = None,
    rule: str = "fixed",
    delta: int = 0,
) -> list[DecodeOutcome]:
    nb = c_batch.shape[0]
    if rule == "fixed" and b is None:
        b = _default_b(graph)
    words = c_batch.astype(np.int8).copy()
    outcomes: list = [None] * nb
    active = np.ones(nb, dtype=bool)
    it = 0
    while True:
        spread = _batch_cn_view(graph, _batch_spread(graph, words))
        syn_failed = ((spread == -1).sum(axis=1) & 1).astype(bool)  # (B, Q)
        ok = ~syn_failed.any(axis=1)
        for i in np.flatnonzero(active & ok):
            _finish(outcomes, i, words[i], True, it)
        active &= ~ok
        if it == imax or not active.any():
            for i in np.flatnonzero(active):
                _finish(outcomes, i, words[i], False, it)
            return outcomes
        unsat = _batch_vn_view(
            graph, np.broadcast_to(syn_failed[:, None, :], spread.shape)
        ).astype(np.int32)
        counts = _batch_vn_sum(graph, unsat).reshape(nb, -1)
        if rule == "fixed":
            b_eff = np.full(nb, b, dtype=np.int32)
        else:
            b_eff = counts.max(axis=1).astype(np.int32)
            if rule == "max_upc_minus":
                b_eff -= delta
        flip = (counts >= b_eff[:, None]) & active[:, None]
        words = np.where(flip, -words, words).astype(np.int8)
        it += 1


def _gallager_family_batch(graph, c_batch, b, imax, mf_variant, p_star, p_dec, seeds):
    nb = c_batch.shape[0]
    if b is None:
        b = _default_b(graph)
    if not 1 <= b <= graph.vn_degree_max - 1:
        raise ValueError(f"threshold b={b} outside 1..{graph.vn_degree_max - 1}")
    cb = c_batch.astype(np.int8)
    outcomes: list = [None] * nb
    active = np.ones(nb, dtype=bool)
    for i in np.flatnonzero(_batch_syndrome_ok(graph, _bits(cb))):
        _finish(outcomes, i, cb[i], True, 0)
        active[i] = False
    if not active.any() or imax == 0:
        for i in np.flatnonzero(active):
            _finish(outcomes, i, cb[i], False, 0)
        return outcomes
    c_edge = _batch_spread(graph, cb)
    vc = c_edge.copy()
    dec = cb.copy()
    for ell in range(1, imax + 1):
        vc_cn = _batch_cn_view(graph, vc)
        neg_in = vc_cn == -1
        ext_neg = neg_in.sum(axis=1)[:, None, :] - neg_in
        cv = _batch_vn_view(graph, (1 - 2 * (ext_neg & 1)).astype(np.int8))
        disagree = cv != c_edge
        cnt_vn = _batch_vn_sum(graph, disagree.astype(np.int32))
        new_dec = np.where(cnt_vn.reshape(nb, -1) > b, -cb, cb).astype(np.int8)
        dec[active] = new_dec[active]
        ok = _batch_syndrome_ok(graph, _bits(dec))
        for i in np.flatnonzero(active & ok):
            _finish(outcomes, i, dec[i], True, ell)
        active &= ~ok
        if ell == imax or not active.any():
            break
        ext_cnt = cnt_vn[:, graph.row_block, :] - disagree
        fire = ext_cnt >= b
        m_new = np.where(fire, -c_edge, c_edge).astype(np.int8)
        if mf_variant is not None:
            p_e = erasure_schedule(p_star, p_dec, ell)
            if p_e > 0.0:
                for i in np.flatnonzero(active):
                    masked = fire[i] & (
                        _edge_uniforms(seeds[i], ell, m_new.shape[1:]) < p_e
                    )
                    m_new[i][masked] = (
                        c_edge[i][masked] if mf_variant == 1 else vc[i][masked]
                    )
        vc = np.where(active[:, None, None], m_new, vc)
    for i in np.flatnonzero(active):
        _finish(outcomes, i, dec[i], False, imax)
    return outcomes


def _ternary_family_batch(graph, c_batch, omega, imax, variant, p_star, p_dec, seeds):
    nb = c_batch.shape[0]
    cb = c_batch.astype(np.int8)
    outcomes: list = [None] * nb
    active = np.ones(nb, dtype=bool)
    for i in np.flatnonzero(_batch_syndrome_ok(graph, _bits(cb))):
        _finish(outcomes, i, cb[i], True, 0)
        active[i] = False
    if not active.any() or imax == 0:
        for i in np.flatnonzero(active):
            _finish(outcomes, i, cb[i], False, 0)
        return outcomes
    c_edge = _batch_spread(graph, cb)
    vc = c_edge.copy()
    if variant == "REMP1":
        p_e0 = erasure_schedule(p_star, p_dec, 0)
        if p_e0 > 0.0:
            for i in range(nb):
                vc[i][_edge_uniforms(seeds[i], 0, vc.shape[1:]) < p_e0] = 0
    dec = cb.copy()
    resid = np.zeros(nb, dtype=np.int64)
    for ell in range(1, imax + 1):
        vc_cn = _batch_cn_view(graph, vc)
        zero_in = vc_cn == 0
        neg_in = vc_cn == -1
        ext_zero = zero_in.sum(axis=1)[:, None, :] - zero_in
        ext_neg = neg_in.sum(axis=1)[:, None, :] - neg_in
        cv = _batch_vn_view(
            graph, np.where(ext_zero > 0, 0, 1 - 2 * (ext_neg & 1)).astype(np.int8)
        )
        sums = _batch_vn_sum(graph, cv.astype(np.int32)).reshape(nb, -1)
        dec_val = omega * cb + sums
        new_dec = np.where(dec_val > 0, 1, np.where(dec_val < 0, -1, cb)).astype(np.int8)
        dec[active] = new_dec[active]
        resid[active] = np.count_nonzero(dec_val == 0, axis=1)[active]
        ok = _batch_syndrome_ok(graph, _bits(dec))
        for i in np.flatnonzero(active & ok):
            _finish(outcomes, i, dec[i], True, ell, int(resid[i]))
        active &= ~ok
        if ell == imax or not active.any():
            break
        ext = sums.reshape(nb, graph.n0, graph.q)[:, graph.row_block, :] - cv
        m_new = _sign_int8(omega * c_edge + ext)
        p_e = erasure_schedule(p_star, p_dec, ell)
        if p_e > 0.0 and variant != "AlgE":
            if variant == "REMP1":
                candidates = m_new != 0
            else:
                candidates = m_new == -c_edge
            for i in np.flatnonzero(active):
                masked = candidates[i] & (
                    _edge_uniforms(seeds[i], ell, m_new.shape[1:]) < p_e
                )
                m_new[i][masked] = 0
        vc = np.where(active[:, None, None], m_new, vc)
    for i in np.flatnonzero(active):
        _finish(outcomes, i, dec[i], False, imax, int(resid[i]))
    return outcomes


def decode_batch(
    graph: TannerGraph,
    c_batch: np.ndarray,
    config: DecoderConfig,
    seeds=None,
) -> list[DecodeOutcome]:
    """Decode a (B, n) batch of bipolar words; outcome-identical to per-word
    ``decode`` with ``config.with_seed(seeds[i])``."""
    c_batch = np.asarray(c_batch)
    if c_batch.ndim != 2 or c_batch.shape[1] != graph.n:
        raise ValueError(f"expected batch of shape (B, {graph.n}), got {c_batch.shape}")
    nb = c_batch.shape[0]
    seeds = [config.seed] * nb if seeds is None else list(seeds)
    if len(seeds) != nb:
        raise ValueError("need one seed per batch entry")
    v = config.variant
    if v == "BF":
        if _HAVE_NUMBA:
            return [
                decode_bf_fast(
                    graph, c_batch[i], config.imax, config.b, config.bf_rule, config.bf_delta
                )
                for i in range(nb)
            ]
        return decode_bf_batch(
            graph, c_batch, config.imax, config.b, config.bf_rule, config.bf_delta
        )
    if v == "GallagerB":
        return _gallager_family_batch(
            graph, c_batch, config.b, config.imax, None, 0.0, 0.0, seeds
        )
    if v in ("MF1", "MF2"):
        return _gallager_family_batch(
            graph,
            c_batch,
            config.b,
            config.imax,
            1 if v == "MF1" else 2,
            config.p_star,
            config.p_dec,
            seeds,
        )
    if v in ("AlgE", "REMP1", "REMP2"):
        return _ternary_family_batch(
            graph, c_batch, config.omega, config.imax, v, config.p_star, config.p_dec, seeds
        )
    return [decode(graph, c_batch[i], config.with_seed(seeds[i])) for i in range(nb)]


# compiled bit-flipping kernel ----------------------------------------------
#
# Reaction-attack campaigns push millions of BF decodes through small graphs;
# a compiled loop with the identical flip rule is an order of magnitude
# faster than the array path.  Outcome equality with decode_bf is covered by
# tests; decode_bf_batch routes through this kernel when numba is present.

try:
    import numba as _numba

    @_numba.njit(cache=True, nogil=True)
    def _bf_kernel(word, vn_of_edge, imax, rule_code, b_param):
        # word: int8 bipolar, modified in place; returns (iterations, success)
        rows, q = vn_of_edge.shape
        n = word.shape[0]
        unsat = np.zeros(q, dtype=np.uint8)
        counts = np.zeros(n, dtype=np.int32)
        for it in range(imax + 1):
            nfail = 0
            for m in range(q):
                p = 1
                for s in range(rows):
                    p *= word[vn_of_edge[s, m]]
                if p < 0:
                    unsat[m] = 1
                    nfail += 1
                else:
                    unsat[m] = 0
            if nfail == 0:
                return it, True
            if it == imax:
                return imax, False
            counts[:] = 0
            for m in range(q):
                if unsat[m]:
                    for s in range(rows):
                        counts[vn_of_edge[s, m]] += 1
            if rule_code == 0:
                b_eff = b_param
            else:
                b_eff = counts.max()
                if rule_code == 2:
                    b_eff -= b_param
            for v in range(n):
                if counts[v] >= b_eff:
                    word[v] = -word[v]
        return imax, False

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    _HAVE_NUMBA = False


def _vn_of_edge_table(graph: TannerGraph) -> np.ndarray:
    cached = getattr(graph, "_vn_of_edge", None)
    if cached is None:
        block_base = (graph.row_block * graph.q).astype(np.int64)
        cols = np.arange(graph.q, dtype=np.int64)
        table = (block_base[:, None] + (cols[None, :] - graph.row_shift[:, None]) % graph.q)
        cached = table.astype(np.int32)
        object.__setattr__(graph, "_vn_of_edge", cached)
    return cached


def decode_bf_fast(
    graph: TannerGraph,
    c_bipolar: np.ndarray,
    imax: int,
    b: int | None = None,
    rule: str = "fixed",
    delta: int = 0,
) -> DecodeOutcome:
    """decode_bf through the compiled kernel (identical flip rule)."""
    if not _HAVE_NUMBA:
        return decode_bf(graph, c_bipolar, imax, b, rule, delta)
    cb = _check_input(graph, c_bipolar)
    if rule == "fixed" and b is None:
        b = _default_b(graph)
    rule_code = {"fixed": 0, "max_upc": 1, "max_upc_minus": 2}[rule]
    b_param = b if rule == "fixed" else delta
    word = cb.copy()
    iterations, success = _bf_kernel(
        word, _vn_of_edge_table(graph), imax, rule_code, int(b_param or 0)
    )
    return DecodeOutcome(_bits(word), bool(success), int(iterations))
