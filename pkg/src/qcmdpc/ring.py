"""Arithmetic in the ring F2[X]/(X^Q - 1).

Elements double as Q x Q binary circulant matrices: the polynomial
a(X) = a_0 + a_1 X + ... + a_{Q-1} X^{Q-1} corresponds to the circulant
whose first row is (a_0, ..., a_{Q-1}) and whose row j is the first row
cyclically right-shifted j times.

Coefficients are stored packed in a Python int (bit i = coefficient of
X^i), which keeps the multiply loop a plain shift/xor accumulation over
the set bits of the lighter operand.
"""

from __future__ import annotations

import numpy as np

__all__ = ["BitPolynomial", "zero", "one", "monomial", "from_support", "from_coeffs"]


def _poly_divmod(a: int, b: int) -> tuple[int, int]:
    """Division with remainder of binary polynomials packed into ints."""
    if b == 0:
        raise ZeroDivisionError("polynomial division by zero")
    db = b.bit_length() - 1
    quo = 0
    while a and a.bit_length() - 1 >= db:
        shift = (a.bit_length() - 1) - db
        quo |= 1 << shift
        a ^= b << shift
    return quo, a


class BitPolynomial:
    """Element of F2[X]/(X^Q - 1), immutable."""

    __slots__ = ("bits", "q")

    def __init__(self, bits: int, q: int):
        if q < 1:
            raise ValueError(f"modulus Q must be >= 1, got {q}")
        if bits < 0 or bits >> q:
            raise ValueError("coefficient bits out of range for given Q")
        object.__setattr__(self, "bits", bits)
        object.__setattr__(self, "q", q)

    def __setattr__(self, name, value):
        raise AttributeError("BitPolynomial is immutable")

    def _check_same_ring(self, other: "BitPolynomial") -> None:
        if self.q != other.q:
            raise ValueError(f"mismatched ring moduli: Q={self.q} vs Q={other.q}")

    # ring operations ----------------------------------------------------

    def __add__(self, other: "BitPolynomial") -> "BitPolynomial":
        self._check_same_ring(other)
        return BitPolynomial(self.bits ^ other.bits, self.q)

    __sub__ = __add__  # characteristic 2

    def __mul__(self, other: "BitPolynomial") -> "BitPolynomial":
        self._check_same_ring(other)
        q = self.q
        # accumulate shifts of the denser operand over the lighter one's support
        a, b = self.bits, other.bits
        if a.bit_count() > b.bit_count():
            a, b = b, a
        acc = 0
        while a:
            low = a & -a
            acc ^= b << (low.bit_length() - 1)
            a ^= low
        mask = (1 << q) - 1
        return BitPolynomial((acc & mask) ^ (acc >> q), q)

    def shift(self, s: int) -> "BitPolynomial":
        """Cyclic shift: multiplication by X^s (s taken mod Q)."""
        q = self.q
        s %= q
        if s == 0:
            return self
        mask = (1 << q) - 1
        return BitPolynomial(((self.bits << s) & mask) | (self.bits >> (q - s)), q)

    def inverse(self) -> "BitPolynomial | None":
        """Multiplicative inverse, or None when gcd(a, X^Q - 1) != 1.

        Extended Euclidean algorithm over F2[X].
        """
        q = self.q
        modulus = (1 << q) | 1  # X^Q + 1
        r0, r1 = modulus, self.bits
        t0, t1 = 0, 1
        while r1:
            quo, rem = _poly_divmod(r0, r1)
            r0, r1 = r1, rem
            # t update: t0 - quo*t1 over F2[X]
            prod = 0
            qq = quo
            while qq:
                low = qq & -qq
                prod ^= t1 << (low.bit_length() - 1)
                qq ^= low
            t0, t1 = t1, t0 ^ prod
        if r0 != 1:  # gcd != 1, includes the zero polynomial
            return None
        _, t0 = _poly_divmod(t0, modulus)
        return BitPolynomial(t0, q)

    def weight(self) -> int:
        """Hamming weight of the coefficient vector."""
        return self.bits.bit_count()

    # views ---------------------------------------------------------------

    def support(self) -> list[int]:
        """Sorted exponents of the nonzero coefficients."""
        out = []
        b = self.bits
        while b:
            low = b & -b
            out.append(low.bit_length() - 1)
            b ^= low
        return out

    def coeffs(self) -> np.ndarray:
        """Coefficient vector as a length-Q uint8 array."""
        out = np.zeros(self.q, dtype=np.uint8)
        for i in self.support():
            out[i] = 1
        return out

    def reversed(self) -> "BitPolynomial":
        """a(X^-1): coefficient i moves to position (-i) mod Q."""
        bits = 0
        for i in self.support():
            bits |= 1 << ((-i) % self.q)
        return BitPolynomial(bits, self.q)

    def to_dense_circulant(self) -> np.ndarray:
        """Q x Q circulant matrix; row j is the first row right-shifted j times.

        Test oracle only; quadratic in Q.
        """
        row0 = self.coeffs()
        return np.stack([np.roll(row0, j) for j in range(self.q)])

    # serialization --------------------------------------------------------

    def to_bytes(self) -> bytes:
        """Little-endian packed bits, length-prefixed by Q (4-byte unsigned)."""
        nbytes = (self.q + 7) // 8
        return self.q.to_bytes(4, "little") + self.bits.to_bytes(nbytes, "little")

    @classmethod
    def from_bytes(cls, data: bytes) -> tuple["BitPolynomial", int]:
        """Parse one serialized polynomial; returns (poly, bytes consumed)."""
        if len(data) < 4:
            raise ValueError("truncated polynomial: missing Q prefix")
        q = int.from_bytes(data[:4], "little")
        if q < 1:
            raise ValueError(f"invalid polynomial modulus Q={q}")
        nbytes = (q + 7) // 8
        if len(data) < 4 + nbytes:
            raise ValueError("truncated polynomial: missing coefficient bytes")
        bits = int.from_bytes(data[4 : 4 + nbytes], "little")
        if bits >> q:
            raise ValueError("polynomial has nonzero padding bits")
        return cls(bits, q), 4 + nbytes

    # misc ------------------------------------------------------------------

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, BitPolynomial)
            and self.q == other.q
            and self.bits == other.bits
        )

    def __hash__(self) -> int:
        return hash((self.bits, self.q))

    def __bool__(self) -> bool:
        return self.bits != 0

    def __repr__(self) -> str:
        if self.weight() <= 8:
            return f"BitPolynomial(support={self.support()}, q={self.q})"
        return f"BitPolynomial(weight={self.weight()}, q={self.q})"


def zero(q: int) -> BitPolynomial:
    return BitPolynomial(0, q)


def one(q: int) -> BitPolynomial:
    return BitPolynomial(1, q)


def monomial(k: int, q: int) -> BitPolynomial:
    """X^k mod (X^Q - 1)."""
    return BitPolynomial(1 << (k % q), q)


def from_support(positions, q: int) -> BitPolynomial:
    bits = 0
    for i in positions:
        i = int(i)
        if not 0 <= i < q:
            raise ValueError(f"exponent {i} out of range for Q={q}")
        if bits >> i & 1:
            raise ValueError(f"duplicate exponent {i}")
        bits |= 1 << i
    return BitPolynomial(bits, q)


def from_coeffs(coeffs, q: int | None = None) -> BitPolynomial:
    coeffs = list(coeffs)
    if q is None:
        q = len(coeffs)
    if len(coeffs) != q:
        raise ValueError(f"expected {q} coefficients, got {len(coeffs)}")
    bits = 0
    for i, c in enumerate(coeffs):
        if c not in (0, 1):
            raise ValueError("coefficients must be 0 or 1")
        bits |= int(c) << i
    return BitPolynomial(bits, q)
