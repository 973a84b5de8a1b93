"""Phaseless Pauli-string algebra and packed GF(2) linear algebra.

Pauli strings are stored as a pair of bit-vectors (x, z): qubit i carries
X iff x[i], Z iff z[i], Y iff both, I iff neither.  Overall phases are not
represented anywhere in this package; every implemented quantity
(entropies, mutual information, endpoint counts) is phase-independent.

Bit-vectors are packed into uint64 words, little-endian within each word:
qubit i lives in word i // 64, bit i % 64.
"""

from __future__ import annotations

import numpy as np

WORD_BITS = 64

_PAULI_CHARS = "IXZY"  # index = x_bit * 1 + z_bit * 2


def n_words(n_bits: int) -> int:
    """Number of uint64 words needed to hold n_bits bits."""
    return (n_bits + WORD_BITS - 1) // WORD_BITS


def pack_bits(bits: np.ndarray) -> np.ndarray:
    """Pack a (..., L) array of 0/1 values into (..., n_words(L)) uint64."""
    bits = np.asarray(bits, dtype=np.uint8)
    length = bits.shape[-1]
    pad = n_words(length) * WORD_BITS - length
    if pad:
        bits = np.concatenate(
            [bits, np.zeros(bits.shape[:-1] + (pad,), dtype=np.uint8)], axis=-1
        )
    packed = np.ascontiguousarray(np.packbits(bits, axis=-1, bitorder="little"))
    return packed.view(np.uint64)


def unpack_bits(words: np.ndarray, length: int) -> np.ndarray:
    """Inverse of pack_bits: (..., W) uint64 -> (..., length) uint8."""
    as_bytes = np.ascontiguousarray(words).view(np.uint8)
    bits = np.unpackbits(as_bytes, axis=-1, bitorder="little")
    return bits[..., :length]


def get_bit(words: np.ndarray, i: int) -> int:
    w, b = divmod(i, WORD_BITS)
    return int((words[..., w] >> np.uint64(b)) & np.uint64(1))


def set_bit(words: np.ndarray, i: int, value: int) -> None:
    w, b = divmod(i, WORD_BITS)
    mask = np.uint64(1) << np.uint64(b)
    if value:
        words[..., w] |= mask
    else:
        words[..., w] &= ~mask


def bit_column(words: np.ndarray, i: int) -> np.ndarray:
    """Bit i of every row of a (K, W) word array, as a uint64 0/1 vector."""
    w, b = divmod(i, WORD_BITS)
    return (words[:, w] >> np.uint64(b)) & np.uint64(1)


def gather_bits(words: np.ndarray, cols: np.ndarray) -> np.ndarray:
    """Extract the given bit columns of a (K, W) word array as (K, len(cols)) uint8."""
    cols = np.asarray(cols, dtype=np.int64)
    if cols.size == 0:
        return np.zeros((words.shape[0], 0), dtype=np.uint8)
    w = cols // WORD_BITS
    b = (cols % WORD_BITS).astype(np.uint64)
    return ((words[:, w] >> b[None, :]) & np.uint64(1)).astype(np.uint8)


def popcount(words: np.ndarray) -> np.ndarray:
    return np.bitwise_count(words)


def parity_of_and(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Parity of popcount(a & b) along the last axis."""
    return (popcount(a & b).sum(axis=-1) & 1).astype(np.uint8)


def words_to_int(words: np.ndarray) -> int:
    """One row of words -> arbitrary-precision integer (bit i of row = bit i of int)."""
    return int.from_bytes(np.ascontiguousarray(words).tobytes(), "little")


class Gf2Basis:
    """Incremental row basis over GF(2), rows held as Python ints.

    Reduction against the basis is O(rank) big-int XORs per insert, which
    beats per-bit elimination by the machine word width.
    """

    def __init__(self) -> None:
        self._pivots: dict[int, int] = {}  # leading bit -> reduced row

    @property
    def rank(self) -> int:
        return len(self._pivots)

    def reduce(self, vec: int) -> int:
        while vec:
            h = vec.bit_length() - 1
            row = self._pivots.get(h)
            if row is None:
                return vec
            vec ^= row
        return 0

    def insert(self, vec: int) -> bool:
        """Insert vec; returns True iff it enlarged the span."""
        vec = self.reduce(vec)
        if vec == 0:
            return False
        self._pivots[vec.bit_length() - 1] = vec
        return True

    def contains(self, vec: int) -> bool:
        return self.reduce(vec) == 0


class Gf2Matrix:
    """Rectangular matrix over GF(2), rows packed into uint64 words."""

    def __init__(self, words: np.ndarray, ncols: int):
        words = np.atleast_2d(np.asarray(words, dtype=np.uint64))
        if ncols > words.shape[1] * WORD_BITS:
            raise ValueError("ncols exceeds packed width")
        self.words = words
        self.ncols = int(ncols)

    @classmethod
    def from_bits(cls, bits) -> "Gf2Matrix":
        bits = np.atleast_2d(np.asarray(bits, dtype=np.uint8))
        return cls(pack_bits(bits), bits.shape[1])

    @property
    def nrows(self) -> int:
        return self.words.shape[0]

    def row_ints(self) -> list[int]:
        return [words_to_int(self.words[i]) for i in range(self.nrows)]


def gf2_rank(m: Gf2Matrix | np.ndarray) -> int:
    """Rank over GF(2); the input is not modified."""
    if isinstance(m, np.ndarray):
        m = Gf2Matrix.from_bits(m)
    basis = Gf2Basis()
    for vec in m.row_ints():
        basis.insert(vec)
    return basis.rank


class PauliString:
    """Phaseless N-qubit Pauli operator as paired packed X/Z bit-vectors."""

    __slots__ = ("n", "x", "z")

    def __init__(self, n: int, x: np.ndarray, z: np.ndarray):
        if x.shape != (n_words(n),) or z.shape != (n_words(n),):
            raise ValueError("bit-vector width does not match qubit count")
        self.n = int(n)
        self.x = x.astype(np.uint64, copy=False)
        self.z = z.astype(np.uint64, copy=False)

    @classmethod
    def identity(cls, n: int) -> "PauliString":
        w = n_words(n)
        return cls(n, np.zeros(w, dtype=np.uint64), np.zeros(w, dtype=np.uint64))

    @classmethod
    def from_bits(cls, x_bits, z_bits) -> "PauliString":
        x_bits = np.asarray(x_bits, dtype=np.uint8)
        z_bits = np.asarray(z_bits, dtype=np.uint8)
        if x_bits.shape != z_bits.shape or x_bits.ndim != 1:
            raise ValueError("x and z bit-vectors must be 1-d and equal length")
        n = x_bits.shape[0]
        if n == 0:
            return cls.identity(0)
        return cls(n, pack_bits(x_bits), pack_bits(z_bits))

    @classmethod
    def from_string(cls, s: str) -> "PauliString":
        """Parse a string over {I, X, Y, Z}; site i is character i."""
        n = len(s)
        x = np.zeros(n, dtype=np.uint8)
        z = np.zeros(n, dtype=np.uint8)
        for i, ch in enumerate(s):
            if ch == "I":
                continue
            elif ch == "X":
                x[i] = 1
            elif ch == "Z":
                z[i] = 1
            elif ch == "Y":
                x[i] = 1
                z[i] = 1
            else:
                raise ValueError(f"invalid Pauli character {ch!r}")
        return cls.from_bits(x, z)

    @classmethod
    def single(cls, n: int, q: int, kind: str) -> "PauliString":
        """The operator `kind` on qubit q, identity elsewhere."""
        if not 0 <= q < n:
            raise ValueError("qubit index out of range")
        p = cls.identity(n)
        if kind in ("X", "Y"):
            set_bit(p.x, q, 1)
        if kind in ("Z", "Y"):
            set_bit(p.z, q, 1)
        if kind not in ("X", "Y", "Z", "I"):
            raise ValueError(f"invalid Pauli kind {kind!r}")
        return p

    def x_bits(self) -> np.ndarray:
        return unpack_bits(self.x, self.n)

    def z_bits(self) -> np.ndarray:
        return unpack_bits(self.z, self.n)

    def is_identity(self) -> bool:
        return not (self.x.any() or self.z.any())

    def weight(self) -> int:
        return int(popcount(self.x | self.z).sum())

    def restrict(self, region: np.ndarray) -> "PauliString":
        """Sub-string on the given (sorted) qubit indices, reindexed from 0."""
        region = np.asarray(region, dtype=np.int64)
        return PauliString.from_bits(
            gather_bits(self.x[None, :], region)[0],
            gather_bits(self.z[None, :], region)[0],
        )

    def embed(self, n: int, region: np.ndarray) -> "PauliString":
        """Place this string on qubits `region` of an n-qubit system."""
        region = np.asarray(region, dtype=np.int64)
        if region.shape[0] != self.n:
            raise ValueError("region size must equal string length")
        x = np.zeros(n, dtype=np.uint8)
        z = np.zeros(n, dtype=np.uint8)
        x[region] = self.x_bits()
        z[region] = self.z_bits()
        return PauliString.from_bits(x, z)

    def to_string(self) -> str:
        codes = self.x_bits() + 2 * self.z_bits()
        return "".join(_PAULI_CHARS[c] for c in codes)

    def __str__(self) -> str:
        return self.to_string()

    def __repr__(self) -> str:
        return f"PauliString({self.to_string()!r})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, PauliString):
            return NotImplemented
        return (
            self.n == other.n
            and np.array_equal(self.x, other.x)
            and np.array_equal(self.z, other.z)
        )

    def __hash__(self) -> int:
        return hash((self.n, self.x.tobytes(), self.z.tobytes()))

    def __mul__(self, other: "PauliString") -> "PauliString":
        return multiply(self, other)


def symplectic_product(a: PauliString, b: PauliString) -> int:
    """0 iff a and b commute, 1 iff they anticommute.

    Standard symplectic form over GF(2): a.x . b.z + a.z . b.x mod 2.
    """
    if a.n != b.n:
        raise ValueError("Pauli strings have mismatched lengths")
    return int(parity_of_and(a.x, b.z) ^ parity_of_and(a.z, b.x))


def multiply(a: PauliString, b: PauliString) -> PauliString:
    """Phaseless product: componentwise XOR of the x and z bit-vectors."""
    if a.n != b.n:
        raise ValueError("Pauli strings have mismatched lengths")
    return PauliString(a.n, a.x ^ b.x, a.z ^ b.z)
