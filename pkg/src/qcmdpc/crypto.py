"""QC-MDPC McEliece primitives: key generation, encryption, decryption.

The parity-check matrix is a single row of N0 circulant blocks given by
polynomials h_0 .. h_{N0-1}; the public key is the systematic generator
whose parity column is g_i = h_i * h_{N0-1}^{-1}.

Syndrome convention: a length-n word is read as N0 block polynomials
c_0 .. c_{N0-1} and its syndrome is the ring sum s = sum_i h_i * c_i.
The public parity blocks are derived to annihilate exactly this sum, so
codewords of the public code always satisfy s = 0; every consumer of H
(dense oracles in the tests, the Tanner graph) uses the same convention.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import ring
from .ring import BitPolynomial

KEY_MAGIC = b"QCMDPC1"
_KIND_PRIVATE = b"S"
_KIND_PUBLIC = b"P"


class ParameterError(ValueError):
    """Infeasible or inconsistent code parameters."""


class KeygenError(RuntimeError):
    """No invertible last block found within the retry budget."""


class KeyFormatError(ValueError):
    """Malformed or truncated key file."""


@dataclass(frozen=True)
class CodeParams:
    q: int
    n0: int
    block_weights: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "block_weights", tuple(int(w) for w in self.block_weights))
        if self.q < 1:
            raise ParameterError(f"circulant size must be >= 1, got {self.q}")
        if self.n0 < 2:
            raise ParameterError(f"need at least 2 blocks, got {self.n0}")
        if len(self.block_weights) != self.n0:
            raise ParameterError("need one block weight per block")
        if any(not 1 <= w <= self.q for w in self.block_weights):
            raise ParameterError("block weights must satisfy 1 <= w <= Q")

    @property
    def n(self) -> int:
        return self.n0 * self.q

    @property
    def k(self) -> int:
        return (self.n0 - 1) * self.q

    @property
    def r(self) -> int:
        return self.q

    @property
    def row_weight(self) -> int:
        return sum(self.block_weights)


@dataclass(frozen=True)
class PrivateKey:
    params: CodeParams
    h: tuple[BitPolynomial, ...]

    def __post_init__(self):
        object.__setattr__(self, "h", tuple(self.h))
        if len(self.h) != self.params.n0:
            raise ParameterError("wrong number of parity blocks")
        for hi, w in zip(self.h, self.params.block_weights):
            if hi.q != self.params.q:
                raise ParameterError("block modulus does not match params")
            if hi.weight() != w:
                raise ParameterError(
                    f"block weight {hi.weight()} does not match declared {w}"
                )


@dataclass(frozen=True)
class PublicKey:
    params: CodeParams
    g: tuple[BitPolynomial, ...]

    def __post_init__(self):
        object.__setattr__(self, "g", tuple(self.g))
        if len(self.g) != self.params.n0 - 1:
            raise ParameterError("wrong number of generator parity blocks")
        if any(gi.q != self.params.q for gi in self.g):
            raise ParameterError("block modulus does not match params")


@dataclass(frozen=True)
class DecodeFailure:
    """Value-level decryption failure: the observable a reaction attack exploits."""

    iterations: int
    reason: str = "decode"  # "decode" or "weight"


def _rng_from_seed(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(seed)
    return np.random.default_rng(seed)


def sample_weight_poly(q: int, weight: int, rng: np.random.Generator) -> BitPolynomial:
    """Uniformly random polynomial of exact Hamming weight."""
    positions = rng.choice(q, size=weight, replace=False)
    return ring.from_support(positions, q)


def keygen(
    params: CodeParams,
    seed,
    max_retries: int = 100,
    require_odd_last: bool = True,
) -> tuple[PrivateKey, PublicKey]:
    """Draw parity blocks of the configured weights; the last must be invertible.

    Deterministic given the seed.  An even-weight last block can never be
    invertible (it vanishes at X=1), so that is rejected up front unless the
    caller opts into burning retries on it.
    """
    if require_odd_last and params.block_weights[-1] % 2 == 0:
        raise ParameterError(
            "last block weight must be odd: even-weight polynomials are never invertible"
        )
    rng = _rng_from_seed(seed)
    blocks = [sample_weight_poly(params.q, w, rng) for w in params.block_weights[:-1]]
    last_weight = params.block_weights[-1]
    for _ in range(max_retries):
        h_last = sample_weight_poly(params.q, last_weight, rng)
        h_last_inv = h_last.inverse()
        if h_last_inv is not None:
            priv = PrivateKey(params, tuple(blocks) + (h_last,))
            pub = PublicKey(params, tuple(hi * h_last_inv for hi in blocks))
            return priv, pub
    raise KeygenError(
        f"no invertible last block of weight {last_weight} found in {max_retries} tries"
    )


def split_blocks(word: np.ndarray, params: CodeParams) -> list[BitPolynomial]:
    word = np.asarray(word)
    if word.shape != (params.n,):
        raise ValueError(f"expected word of length {params.n}, got {word.shape}")
    out = []
    for i in range(params.n0):
        block = word[i * params.q : (i + 1) * params.q]
        out.append(ring.from_support(np.flatnonzero(block), params.q))
    return out


def join_blocks(blocks, params: CodeParams) -> np.ndarray:
    word = np.zeros(params.n, dtype=np.uint8)
    for i, b in enumerate(blocks):
        word[i * params.q : (i + 1) * params.q] = b.coeffs()
    return word


def syndrome(priv: PrivateKey, word: np.ndarray) -> BitPolynomial:
    """s = sum_i h_i * c_i over the ring; zero exactly for codewords."""
    blocks = split_blocks(word, priv.params)
    s = ring.zero(priv.params.q)
    for hi, ci in zip(priv.h, blocks):
        s = s + hi * ci
    return s


def encode(pub: PublicKey, u: np.ndarray) -> np.ndarray:
    """Systematic encoding: message blocks pass through, parity block appended."""
    params = pub.params
    u = np.asarray(u)
    if u.shape != (params.k,):
        raise ValueError(f"expected plaintext of length {params.k}, got {u.shape}")
    q = params.q
    parity = ring.zero(q)
    for i in range(params.n0 - 1):
        ui = ring.from_support(np.flatnonzero(u[i * q : (i + 1) * q]), q)
        parity = parity + ui * pub.g[i]
    cw = np.zeros(params.n, dtype=np.uint8)
    cw[: params.k] = u
    cw[params.k :] = parity.coeffs()
    return cw


def encrypt(pub: PublicKey, u: np.ndarray, e: np.ndarray) -> np.ndarray:
    e = np.asarray(e)
    if e.shape != (pub.params.n,):
        raise ValueError(f"expected error vector of length {pub.params.n}, got {e.shape}")
    return (encode(pub, u) ^ e.astype(np.uint8)).astype(np.uint8)


def sample_error(n: int, t: int, seed) -> np.ndarray:
    """Uniform weight-t error vector; deterministic given the seed."""
    if not 0 <= t <= n:
        raise ValueError(f"error weight {t} out of range for length {n}")
    rng = _rng_from_seed(seed)
    e = np.zeros(n, dtype=np.uint8)
    e[rng.choice(n, size=t, replace=False)] = 1
    return e


def decrypt(
    priv: PrivateKey,
    ciphertext: np.ndarray,
    decoder_config,
    error_weight: int | None = None,
    graph=None,
):
    """Run the configured decoder; returns the plaintext or a DecodeFailure.

    When error_weight is given, a successful decode whose implied error
    pattern has a different weight is rejected (reported as a failure), so
    over- or under-weight ciphertexts cannot leak through.
    """
    from .decoders import decode
    from .tanner import TannerGraph

    params = priv.params
    ciphertext = np.asarray(ciphertext)
    if ciphertext.shape != (params.n,):
        raise ValueError(f"expected ciphertext of length {params.n}, got {ciphertext.shape}")
    if graph is None:
        graph = TannerGraph.from_private_key(priv)
    outcome = decode(graph, bits_to_bipolar(ciphertext), decoder_config)
    if not outcome.success:
        return DecodeFailure(iterations=outcome.iterations, reason="decode")
    if error_weight is not None:
        implied = int(np.count_nonzero(outcome.word ^ ciphertext.astype(np.uint8)))
        if implied != error_weight:
            return DecodeFailure(iterations=outcome.iterations, reason="weight")
    return outcome.word[: params.k].copy()


def bits_to_bipolar(bits: np.ndarray) -> np.ndarray:
    """Bit 0 -> +1, bit 1 -> -1."""
    return (1 - 2 * bits.astype(np.int8)).astype(np.int8)


def bipolar_to_bits(bipolar: np.ndarray) -> np.ndarray:
    return (bipolar < 0).astype(np.uint8)


# key files ---------------------------------------------------------------


def _header(params: CodeParams, kind: bytes) -> bytes:
    out = bytearray()
    out += KEY_MAGIC
    out += kind
    out += params.q.to_bytes(4, "little")
    out += params.n0.to_bytes(4, "little")
    for w in params.block_weights:
        out += int(w).to_bytes(4, "little")
    return bytes(out)


def _parse_header(data: bytes, kind: bytes) -> tuple[CodeParams, int]:
    if len(data) < len(KEY_MAGIC) + 1:
        raise KeyFormatError("truncated key file: missing magic")
    if data[: len(KEY_MAGIC)] != KEY_MAGIC:
        raise KeyFormatError("bad magic: not a key file")
    got_kind = data[len(KEY_MAGIC) : len(KEY_MAGIC) + 1]
    if got_kind != kind:
        raise KeyFormatError(f"wrong key kind {got_kind!r}")
    off = len(KEY_MAGIC) + 1
    if len(data) < off + 8:
        raise KeyFormatError("truncated key file: missing parameters")
    q = int.from_bytes(data[off : off + 4], "little")
    n0 = int.from_bytes(data[off + 4 : off + 8], "little")
    off += 8
    if n0 < 2 or n0 > 2**16:
        raise KeyFormatError(f"implausible block count {n0}")
    if len(data) < off + 4 * n0:
        raise KeyFormatError("truncated key file: missing block weights")
    weights = tuple(
        int.from_bytes(data[off + 4 * i : off + 4 * i + 4], "little") for i in range(n0)
    )
    off += 4 * n0
    try:
        params = CodeParams(q, n0, weights)
    except ParameterError as exc:
        raise KeyFormatError(f"inconsistent key parameters: {exc}") from exc
    return params, off


def _parse_polys(data: bytes, off: int, count: int, q: int) -> list[BitPolynomial]:
    polys = []
    for _ in range(count):
        try:
            poly, used = BitPolynomial.from_bytes(data[off:])
        except ValueError as exc:
            raise KeyFormatError(f"bad polynomial block: {exc}") from exc
        if poly.q != q:
            raise KeyFormatError("polynomial modulus does not match header")
        polys.append(poly)
        off += used
    if off != len(data):
        raise KeyFormatError("trailing bytes after key data")
    return polys


def private_key_to_bytes(priv: PrivateKey) -> bytes:
    return _header(priv.params, _KIND_PRIVATE) + b"".join(h.to_bytes() for h in priv.h)


def private_key_from_bytes(data: bytes) -> PrivateKey:
    params, off = _parse_header(data, _KIND_PRIVATE)
    polys = _parse_polys(data, off, params.n0, params.q)
    try:
        return PrivateKey(params, tuple(polys))
    except ParameterError as exc:
        raise KeyFormatError(str(exc)) from exc


def public_key_to_bytes(pub: PublicKey) -> bytes:
    return _header(pub.params, _KIND_PUBLIC) + b"".join(g.to_bytes() for g in pub.g)


def public_key_from_bytes(data: bytes) -> PublicKey:
    params, off = _parse_header(data, _KIND_PUBLIC)
    polys = _parse_polys(data, off, params.n0 - 1, params.q)
    return PublicKey(params, tuple(polys))


def bits_to_file_bytes(bits: np.ndarray) -> bytes:
    """Length-prefixed little-endian packed bit vector (CLI file format)."""
    bits = np.asarray(bits).astype(np.uint8)
    length = len(bits)
    value = 0
    for i in np.flatnonzero(bits):
        value |= 1 << int(i)
    return length.to_bytes(4, "little") + value.to_bytes((length + 7) // 8, "little")


def bits_from_file_bytes(data: bytes) -> np.ndarray:
    if len(data) < 4:
        raise ValueError("truncated bit-vector file")
    length = int.from_bytes(data[:4], "little")
    nbytes = (length + 7) // 8
    if len(data) != 4 + nbytes:
        raise ValueError("bit-vector file length mismatch")
    value = int.from_bytes(data[4:], "little")
    if value >> length:
        raise ValueError("bit-vector file has nonzero padding")
    out = np.zeros(length, dtype=np.uint8)
    while value:
        low = value & -value
        out[low.bit_length() - 1] = 1
        value ^= low
    return out
