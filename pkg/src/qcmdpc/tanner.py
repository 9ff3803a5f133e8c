"""Tanner graph of a QC-MDPC parity-check row, laid out for vectorized decoding.

Every check node sees exactly one edge per set coefficient of each block
polynomial, so the edge set is a stack of R = sum_i wt(h_i) "rows" of Q
edges each.  Messages live in (R, Q) arrays in one of two column orders:

  CN order: column m is the edge's check node index.
  VN order: column b is the edge's variable position within its block.

Row s (block i, shift a) connects check m to variable i*Q + (m - a) mod Q,
matching the polynomial syndrome convention s(X) = sum_i h_i(X) c_i(X):
converting between the two orders is a per-row cyclic gather.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .crypto import PrivateKey


@dataclass(frozen=True, eq=False)
class TannerGraph:
    q: int
    n0: int
    row_block: np.ndarray  # (R,) block index per edge row
    row_shift: np.ndarray  # (R,) coefficient exponent per edge row
    block_starts: np.ndarray  # (n0,) first edge row of each block
    vn_degrees: tuple[int, ...]  # per-block VN degree = wt(h_i)
    to_cn_idx: np.ndarray = field(repr=False)  # (R, Q): vn-col for each cn-col
    to_vn_idx: np.ndarray = field(repr=False)  # (R, Q): cn-col for each vn-col

    @classmethod
    def from_private_key(cls, priv: PrivateKey) -> "TannerGraph":
        q = priv.params.q
        shifts = []
        blocks = []
        starts = []
        for i, h in enumerate(priv.h):
            starts.append(len(shifts))
            for a in h.support():
                shifts.append(a)
                blocks.append(i)
        row_shift = np.asarray(shifts, dtype=np.int64)
        row_block = np.asarray(blocks, dtype=np.int64)
        cols = np.arange(q, dtype=np.int64)
        to_cn_idx = (cols[None, :] - row_shift[:, None]) % q
        to_vn_idx = (cols[None, :] + row_shift[:, None]) % q
        return cls(
            q=q,
            n0=priv.params.n0,
            row_block=row_block,
            row_shift=row_shift,
            block_starts=np.asarray(starts, dtype=np.int64),
            vn_degrees=tuple(h.weight() for h in priv.h),
            to_cn_idx=to_cn_idx.astype(np.int32),
            to_vn_idx=to_vn_idx.astype(np.int32),
        )

    @property
    def n(self) -> int:
        return self.n0 * self.q

    @property
    def r(self) -> int:
        return self.q

    @property
    def cn_degree(self) -> int:
        return int(self.row_block.shape[0])

    @property
    def vn_degree_max(self) -> int:
        return max(self.vn_degrees)

    @property
    def num_edges(self) -> int:
        return self.cn_degree * self.q

    # layout conversions --------------------------------------------------

    def cn_view(self, arr_vn: np.ndarray) -> np.ndarray:
        """Reindex a (R, Q) VN-ordered array into CN order."""
        return np.take_along_axis(arr_vn, self.to_cn_idx, axis=1)

    def vn_view(self, arr_cn: np.ndarray) -> np.ndarray:
        """Reindex a (R, Q) CN-ordered array into VN order."""
        return np.take_along_axis(arr_cn, self.to_vn_idx, axis=1)

    def spread_word(self, word: np.ndarray) -> np.ndarray:
        """Per-edge copy (VN order) of a length-n per-variable array."""
        return word.reshape(self.n0, self.q)[self.row_block]

    def vn_sum(self, arr_vn: np.ndarray) -> np.ndarray:
        """Per-variable sum of a VN-ordered array, as an (n0, Q) array."""
        return np.add.reduceat(arr_vn, self.block_starts, axis=0)

    # syndrome ------------------------------------------------------------

    def syndrome_bits(self, word_bits: np.ndarray) -> np.ndarray:
        """Parity of each check for a 0/1 word; equals the ring syndrome."""
        spread = self.spread_word(word_bits.astype(np.uint8))
        return np.bitwise_xor.reduce(self.cn_view(spread), axis=0)

    def syndrome_is_zero(self, word_bits: np.ndarray) -> bool:
        return not self.syndrome_bits(word_bits).any()
