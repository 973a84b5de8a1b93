"""Stabilizer-state engine.

A state is tracked as K generator rows on N qubits (a stabilizer tableau).
Phases are disregarded throughout, so a Clifford gate acts as a symplectic
transformation of the packed (x, z) bits, complete depolarization removes
0/1/2 rows, and entropies reduce to GF(2) rank counts.

Symplectic convention: vectors over a k-qubit support are interleaved
(x_0, z_0, x_1, z_1, ...); a matrix m acts on row vectors, v -> v m, and
preserves the pairing J = diag_blocks([[0,1],[1,0]]), i.e. m J m^T = J.
"""

from __future__ import annotations

import numpy as np

from .pauli import (
    Gf2Basis,
    PauliString,
    WORD_BITS,
    bit_column,
    gather_bits,
    n_words,
    pack_bits,
    parity_of_and,
    popcount,
    unpack_bits,
    words_to_int,
)

# When True, every mutating tableau operation re-validates the invariants
# (pairwise commutation, GF(2) independence).  Costs O(K^2) per mutation;
# enabled in tests, off in production sweeps.
VALIDATE_MUTATIONS = False


class InvariantError(AssertionError):
    """A tableau or symplectic invariant was violated."""


# ---------------------------------------------------------------------------
# Regions


def as_region(indices, n: int) -> np.ndarray:
    """Normalize a qubit-index set: sorted, duplicate-free, in range."""
    region = np.unique(np.asarray(list(indices), dtype=np.int64))
    if region.size and (region[0] < 0 or region[-1] >= n):
        raise ValueError(f"region indices out of range for n={n}")
    return region


def region_complement(region: np.ndarray, n: int) -> np.ndarray:
    mask = np.ones(n, dtype=bool)
    mask[region] = False
    return np.nonzero(mask)[0].astype(np.int64)


def _check_disjoint(*regions: np.ndarray) -> None:
    total = sum(r.size for r in regions)
    if total and np.unique(np.concatenate(regions)).size != total:
        raise ValueError("regions overlap")


# ---------------------------------------------------------------------------
# Symplectic matrices and random sampling


def symplectic_form(k: int) -> np.ndarray:
    """Interleaved pairing J for k qubits: block-diagonal [[0,1],[1,0]]."""
    j = np.zeros((2 * k, 2 * k), dtype=np.uint8)
    for i in range(k):
        j[2 * i, 2 * i + 1] = 1
        j[2 * i + 1, 2 * i] = 1
    return j


class SymplecticMatrix:
    """Element of Sp(2k, GF(2)) in the interleaved (x, z) convention."""

    def __init__(self, mat: np.ndarray, check: bool = False):
        mat = np.asarray(mat, dtype=np.uint8) & 1
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1] or mat.shape[0] % 2:
            raise ValueError("symplectic matrix must be square of even size")
        self.mat = mat
        self.k = mat.shape[0] // 2
        if check and not self.is_symplectic():
            raise InvariantError("matrix does not preserve the symplectic form")

    def is_symplectic(self) -> bool:
        j = symplectic_form(self.k)
        return bool(np.array_equal(self.mat @ j @ self.mat.T % 2, j))

    @classmethod
    def identity(cls, k: int) -> "SymplecticMatrix":
        return cls(np.eye(2 * k, dtype=np.uint8))

    @classmethod
    def hadamard(cls) -> "SymplecticMatrix":
        # x <-> z on one qubit
        return cls(np.array([[0, 1], [1, 0]], dtype=np.uint8))

    @classmethod
    def phase_gate(cls) -> "SymplecticMatrix":
        # X -> Y, Z -> Z
        return cls(np.array([[1, 1], [0, 1]], dtype=np.uint8))

    @classmethod
    def cnot(cls) -> "SymplecticMatrix":
        # control = qubit 0, target = qubit 1:
        # X0 -> X0 X1, Z0 -> Z0, X1 -> X1, Z1 -> Z0 Z1
        m = np.array(
            [
                [1, 0, 1, 0],
                [0, 1, 0, 0],
                [0, 0, 1, 0],
                [0, 1, 0, 1],
            ],
            dtype=np.uint8,
        )
        return cls(m)

    @classmethod
    def cnot_reversed(cls) -> "SymplecticMatrix":
        # control = qubit 1, target = qubit 0
        m = np.array(
            [
                [1, 0, 0, 0],
                [0, 1, 0, 1],
                [1, 0, 1, 0],
                [0, 0, 0, 1],
            ],
            dtype=np.uint8,
        )
        return cls(m)

    def __matmul__(self, other: "SymplecticMatrix") -> "SymplecticMatrix":
        if self.k != other.k:
            raise ValueError("size mismatch")
        return SymplecticMatrix(self.mat @ other.mat % 2)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SymplecticMatrix):
            return NotImplemented
        return np.array_equal(self.mat, other.mat)

    def __hash__(self) -> int:
        return hash(self.mat.tobytes())


def sp_group_order(k: int) -> int:
    """|Sp(2k, GF(2))| = 2^{k^2} * prod_{i=1..k} (4^i - 1)."""
    order = 1 << (k * k)
    for i in range(1, k + 1):
        order *= (1 << (2 * i)) - 1
    return order


def _sp_coset_count(j: int) -> int:
    return (1 << (2 * j - 1)) * ((1 << (2 * j)) - 1)


def _swap_pairs(v: int, nn: int) -> int:
    """Swap the x/z bits of each interleaved pair of an nn-bit vector."""
    even = int("5" * ((nn + 3) // 4), 16) & ((1 << nn) - 1)
    return ((v & even) << 1) | ((v >> 1) & even)


def _symp_inner_int(v: int, w: int, nn: int) -> int:
    return (v & _swap_pairs(w, nn)).bit_count() & 1


def _transvect_int(h: int, v: int, nn: int) -> int:
    return v ^ (h if _symp_inner_int(h, v, nn) else 0)


def _find_transvections_int(x: int, y: int, nn: int) -> tuple[int, int]:
    """Two transvections h1, h2 with T_{h2} T_{h1} x = y (either may be zero)."""
    if x == y:
        return 0, 0
    if _symp_inner_int(x, y, nn) == 1:
        return x ^ y, 0
    pair = lambda v, i: (v >> (2 * i)) & 3
    z = 0
    for i in range(nn // 2):
        px, py = pair(x, i), pair(y, i)
        if px and py:
            zz = px ^ py
            if zz == 0:
                # same letter at the site: any other nonzero letter anticommutes
                zz = 2 if px == 3 else 3
            z = zz << (2 * i)
            return x ^ z, y ^ z
    for i in range(nn // 2):
        px, py = pair(x, i), pair(y, i)
        if px and not py:
            z |= (2 if px == 3 else (3 if px == 2 else 2)) << (2 * i)
            break
    for i in range(nn // 2):
        px, py = pair(x, i), pair(y, i)
        if not px and py:
            z |= (2 if py == 3 else (3 if py == 2 else 2)) << (2 * i)
            break
    return x ^ z, y ^ z


def _int_to_words(v: int, n_w: int) -> np.ndarray:
    return np.frombuffer(v.to_bytes(n_w * 8, "little"), dtype=np.uint64).copy()


def _transvect_rows(h: int, rows: np.ndarray, nn: int) -> None:
    """Batch transvection on packed rows (in place)."""
    n_w = rows.shape[1]
    hw = _int_to_words(h, n_w)
    sw = _int_to_words(_swap_pairs(h, nn), n_w)
    ip = (popcount(rows & sw[None, :]).sum(axis=1) & np.uint64(1)).astype(bool)
    rows[ip] ^= hw[None, :]


def _symplectic_from_index(index: int, k: int) -> np.ndarray:
    """Koenig-Smolin index-to-element map onto Sp(2k, GF(2)), row convention.

    Rows are packed into uint64 words; each level's transvections are a
    handful of vectorized masked XORs.
    """
    # peel the per-level index chunks from the outermost level inward
    chunks: list[tuple[int, int]] = []
    for j in range(k, 0, -1):
        nn = 2 * j
        s = (1 << nn) - 1
        c_f1 = index % s
        index //= s
        c_bits = index & ((1 << (nn - 1)) - 1)
        index >>= nn - 1
        chunks.append((c_f1, c_bits))

    n_w = n_words(2 * k)
    rows = np.zeros((2, n_w), dtype=np.uint64)
    rows[0, 0] = 1
    rows[1, 0] = 2
    for j, (c_f1, c_bits) in zip(range(1, k + 1), reversed(chunks)):
        nn = 2 * j
        if j > 1:
            # direct sum: shift the existing block past a fresh identity pair
            shifted = rows << np.uint64(2)
            shifted[:, 1:] |= rows[:, :-1] >> np.uint64(62)
            rows = np.concatenate(
                [np.zeros((2, n_w), dtype=np.uint64), shifted], axis=0
            )
            rows[0, 0] = 1
            rows[1, 0] = 2
        f1 = c_f1 + 1
        e1 = 1
        t1, t2 = _find_transvections_int(e1, f1, nn)
        eprime = 1 | ((c_bits >> 1) << 2)
        h0 = _transvect_int(t1, eprime, nn)
        h0 = _transvect_int(t2, h0, nn)
        if c_bits & 1:
            f1 = 0
        for h in (t1, t2, h0, f1):
            if h:
                _transvect_rows(h, rows, nn)
    return unpack_bits(rows, 2 * k)


def sample_random_clifford(k: int, rng: np.random.Generator) -> SymplecticMatrix:
    """Uniform draw from Sp(2k, GF(2)) by index-to-element enumeration."""
    if k < 1:
        raise ValueError("need at least one qubit")
    order = sp_group_order(k)
    nbytes = (order.bit_length() + 7) // 8
    while True:
        index = int.from_bytes(rng.bytes(nbytes), "little")
        index &= (1 << order.bit_length()) - 1
        if index < order:
            break
    return SymplecticMatrix(_symplectic_from_index(index, k))


# ---------------------------------------------------------------------------
# Tableau


class MeasureResult:
    """Outcome record of a Pauli measurement."""

    __slots__ = ("outcome", "case", "deterministic")

    def __init__(self, outcome: int, case: int, deterministic: bool):
        self.outcome = outcome
        self.case = case
        self.deterministic = deterministic


class StabilizerTableau:
    """K pairwise-commuting, GF(2)-independent generator rows on n qubits.

    Rows are packed bit matrices: x_words and z_words have shape
    (K, n_words(n)).  Mutating operations work in place and return self.
    """

    def __init__(self, n: int, x_words: np.ndarray, z_words: np.ndarray):
        self.n = int(n)
        self.x_words = np.atleast_2d(np.asarray(x_words, dtype=np.uint64))
        self.z_words = np.atleast_2d(np.asarray(z_words, dtype=np.uint64))
        w = n_words(n)
        if self.x_words.shape[1] != w or self.z_words.shape[1] != w:
            raise ValueError("word width does not match qubit count")
        if self.x_words.shape != self.z_words.shape:
            raise ValueError("x/z shape mismatch")

    # -- construction ------------------------------------------------------

    @classmethod
    def empty(cls, n: int) -> "StabilizerTableau":
        w = n_words(n)
        return cls(n, np.zeros((0, w), np.uint64), np.zeros((0, w), np.uint64))

    @classmethod
    def from_product_state(cls, n: int) -> "StabilizerTableau":
        """|0>^n: row i is Z on qubit i, identity elsewhere."""
        if n < 0:
            raise ValueError("negative qubit count")
        if n == 0:
            return cls.empty(0)
        z_bits = np.eye(n, dtype=np.uint8)
        x_words = np.zeros((n, n_words(n)), dtype=np.uint64)
        return cls(n, x_words, pack_bits(z_bits))

    @classmethod
    def from_rows(cls, rows: list[PauliString], n: int | None = None) -> "StabilizerTableau":
        if n is None:
            if not rows:
                raise ValueError("qubit count required for an empty row list")
            n = rows[0].n
        if not rows:
            return cls.empty(n)
        if any(r.n != n for r in rows):
            raise ValueError("row lengths differ")
        x = np.stack([r.x for r in rows])
        z = np.stack([r.z for r in rows])
        return cls(n, x, z)

    @classmethod
    def from_strings(cls, strings: list[str], n: int | None = None) -> "StabilizerTableau":
        return cls.from_rows([PauliString.from_string(s) for s in strings], n)

    # -- basic accessors ---------------------------------------------------

    @property
    def k(self) -> int:
        return self.x_words.shape[0]

    def copy(self) -> "StabilizerTableau":
        return StabilizerTableau(self.n, self.x_words.copy(), self.z_words.copy())

    def row(self, i: int) -> PauliString:
        return PauliString(self.n, self.x_words[i].copy(), self.z_words[i].copy())

    def rows(self) -> list[PauliString]:
        return [self.row(i) for i in range(self.k)]

    def row_ints(self) -> list[int]:
        """Rows as 2n-bit integers (x block in the low n bits)."""
        shift = self.n
        out = []
        for i in range(self.k):
            x = words_to_int(self.x_words[i])
            z = words_to_int(self.z_words[i])
            out.append(x | (z << shift))
        return out

    def __eq__(self, other) -> bool:
        if not isinstance(other, StabilizerTableau):
            return NotImplemented
        return (
            self.n == other.n
            and np.array_equal(self.x_words, other.x_words)
            and np.array_equal(self.z_words, other.z_words)
        )

    # -- validation / serialization ----------------------------------------

    def validate(self) -> None:
        """Raise InvariantError unless rows pairwise commute and are independent."""
        k = self.k
        if k == 0:
            return
        # pairwise symplectic products via parity of ANDed word blocks
        for i in range(k):
            t = parity_of_and(self.x_words[i], self.z_words) ^ parity_of_and(
                self.z_words[i], self.x_words
            )
            if t.any():
                j = int(np.nonzero(t)[0][0])
                raise InvariantError(f"rows {i} and {j} anticommute")
        basis = Gf2Basis()
        for i, vec in enumerate(self.row_ints()):
            if not basis.insert(vec):
                raise InvariantError(f"row {i} is GF(2)-dependent on earlier rows")

    def _post_mutation(self) -> None:
        if VALIDATE_MUTATIONS:
            self.validate()

    def to_text(self) -> str:
        lines = [f"n={self.n} k={self.k}"]
        lines.extend(r.to_string() for r in self.rows())
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "StabilizerTableau":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines or not lines[0].startswith("n="):
            raise ValueError("missing tableau header")
        head = dict(part.split("=") for part in lines[0].split())
        n, k = int(head["n"]), int(head["k"])
        rows = [PauliString.from_string(ln.strip()) for ln in lines[1 : 1 + k]]
        if len(rows) != k:
            raise ValueError("row count does not match header")
        return cls.from_rows(rows, n)

    # -- Clifford action -----------------------------------------------------

    def apply_clifford(self, u: SymplecticMatrix, support) -> "StabilizerTableau":
        """Conjugate every row by the Clifford u acting on `support`.

        The support is a region (sorted); the gate's qubit ordering follows
        ascending qubit index.
        """
        support = as_region(support, self.n)
        if support.size != u.k:
            raise ValueError("support size does not match gate size")
        if self.k == 0 or u.k == 0:
            return self
        xb = gather_bits(self.x_words, support)
        zb = gather_bits(self.z_words, support)
        v = np.empty((self.k, 2 * u.k), dtype=np.uint8)
        v[:, 0::2] = xb
        v[:, 1::2] = zb
        # float32 matmul hits BLAS; sums <= 2k << 2^24 stay exact
        new = (v.astype(np.float32) @ u.mat.astype(np.float32)) % 2
        new = new.astype(np.uint8)
        self._scatter_bits(support, new[:, 0::2], new[:, 1::2])
        self._post_mutation()
        return self

    def _scatter_bits(self, qubits: np.ndarray, xb: np.ndarray, zb: np.ndarray) -> None:
        for col, q in enumerate(qubits):
            w, b = divmod(int(q), WORD_BITS)
            mask = np.uint64(1) << np.uint64(b)
            for words, bits in ((self.x_words, xb), (self.z_words, zb)):
                word = words[:, w] & ~mask
                words[:, w] = word | (bits[:, col].astype(np.uint64) << np.uint64(b))

    # -- channels ------------------------------------------------------------

    def depolarize_qubit(self, q: int) -> "StabilizerTableau":
        """Complete depolarization of qubit q: rho -> Tr_q rho (x) I_q / 2.

        Case 1: column q all-identity -> unchanged.
        Case 2: a single nontrivial Pauli kind in column q -> row-reduce with
                the first such row, then remove it.
        Case 3: two or more kinds -> row-reduce with the first two rows of
                different kinds, then remove both.
        """
        if not 0 <= q < self.n:
            raise ValueError("qubit index out of range")
        xb = bit_column(self.x_words, q).astype(np.uint8)
        zb = bit_column(self.z_words, q).astype(np.uint8)
        nz = (xb | zb).astype(bool)
        if not nz.any():
            return self
        idx = np.nonzero(nz)[0]
        k1 = int(idx[0])
        l1 = (xb[k1], zb[k1])
        diff = idx[(xb[idx] != l1[0]) | (zb[idx] != l1[1])]
        if diff.size == 0:
            # Case 2: clear the column with row k1, then drop it
            targets = nz.copy()
            targets[k1] = False
            self._xor_rows(targets, k1)
            self._delete_rows([k1])
        else:
            # Case 3: rows k1, k2 carry independent letters at q
            k2 = int(diff[0])
            l2 = (xb[k2], zb[k2])
            others = nz.copy()
            others[k1] = others[k2] = False
            # coefficients of each letter in the {l1, l2} basis (det = 1)
            ca = ((xb & l2[1]) ^ (zb & l2[0])).astype(bool) & others
            cb = ((xb & l1[1]) ^ (zb & l1[0])).astype(bool) & others
            self._xor_rows(ca, k1)
            self._xor_rows(cb, k2)
            self._delete_rows([k1, k2])
        self._post_mutation()
        return self

    def _xor_rows(self, targets: np.ndarray, source: int) -> None:
        if targets.any():
            self.x_words[targets] ^= self.x_words[source]
            self.z_words[targets] ^= self.z_words[source]

    def _delete_rows(self, rows: list[int]) -> None:
        keep = np.ones(self.k, dtype=bool)
        keep[rows] = False
        self.x_words = self.x_words[keep]
        self.z_words = self.z_words[keep]

    # -- measurement -----------------------------------------------------------

    def measure_pauli(self, g: PauliString, rng: np.random.Generator) -> MeasureResult:
        """Measure the Pauli observable g; updates the group in place.

        Case 1: +-g already in the group -> unchanged, outcome reported +1
                (phases untracked) with deterministic=True.
        Case 2: g commutes with all rows but is not in the span -> appended.
        Case 3: g anticommutes with some rows -> all but the first are
                multiplied by the first, which is replaced by g.
        """
        if g.n != self.n:
            raise ValueError("observable length mismatch")
        if g.is_identity():
            raise ValueError("cannot measure the identity")
        anti = np.zeros(self.k, dtype=bool)
        if self.k:
            anti = (
                parity_of_and(g.x[None, :], self.z_words)
                ^ parity_of_and(g.z[None, :], self.x_words)
            ).astype(bool)
        if anti.any():
            k1 = int(np.nonzero(anti)[0][0])
            rest = anti.copy()
            rest[k1] = False
            self._xor_rows(rest, k1)
            self.x_words[k1] = g.x
            self.z_words[k1] = g.z
            outcome = 1 if rng.integers(2) == 0 else -1
            self._post_mutation()
            return MeasureResult(outcome, 3, False)
        basis = Gf2Basis()
        for vec in self.row_ints():
            basis.insert(vec)
        gvec = words_to_int(g.x) | (words_to_int(g.z) << self.n)
        if basis.contains(gvec):
            return MeasureResult(1, 1, True)
        self.x_words = np.vstack([self.x_words, g.x[None, :]])
        self.z_words = np.vstack([self.z_words, g.z[None, :]])
        outcome = 1 if rng.integers(2) == 0 else -1
        self._post_mutation()
        return MeasureResult(outcome, 2, False)

    # -- entropies ----------------------------------------------------------

    def _restricted_rank(self, region: np.ndarray) -> int:
        """GF(2) rank of the rows restricted to `region` (as 2|region|-bit rows)."""
        if self.k == 0 or region.size == 0:
            return 0
        xb = gather_bits(self.x_words, region)
        zb = gather_bits(self.z_words, region)
        packed = pack_bits(np.concatenate([xb, zb], axis=1))
        basis = Gf2Basis()
        for i in range(self.k):
            basis.insert(words_to_int(packed[i]))
        return basis.rank

    def entropy(self, region) -> int:
        """Von Neumann entropy of the region, in bits (exact integer).

        S(A) = |A| - (K - rank of rows restricted to the complement of A):
        the subtrahend counts the independent group elements supported
        entirely inside A.
        """
        region = as_region(region, self.n)
        comp = region_complement(region, self.n)
        inside = self.k - self._restricted_rank(comp)
        return int(region.size - inside)

    def mutual_information(self, a, b) -> int:
        a = as_region(a, self.n)
        b = as_region(b, self.n)
        _check_disjoint(a, b)
        ab = np.union1d(a, b)
        return self.entropy(a) + self.entropy(b) - self.entropy(ab)

    def cmi(self, a, b, c) -> int:
        """I(A:C|B) = S(AB) + S(BC) - S(B) - S(ABC)."""
        a = as_region(a, self.n)
        b = as_region(b, self.n)
        c = as_region(c, self.n)
        _check_disjoint(a, b, c)
        ab = np.union1d(a, b)
        bc = np.union1d(b, c)
        abc = np.union1d(ab, c)
        return (
            self.entropy(ab) + self.entropy(bc) - self.entropy(b) - self.entropy(abc)
        )


# Module-level functional aliases matching the operation contracts.


def from_product_state(n: int) -> StabilizerTableau:
    return StabilizerTableau.from_product_state(n)


def apply_clifford(tab: StabilizerTableau, u: SymplecticMatrix, support) -> StabilizerTableau:
    return tab.apply_clifford(u, support)


def depolarize_qubit(tab: StabilizerTableau, q: int) -> StabilizerTableau:
    return tab.depolarize_qubit(q)


def measure_pauli(
    tab: StabilizerTableau, g: PauliString, rng: np.random.Generator
) -> tuple[StabilizerTableau, MeasureResult]:
    res = tab.measure_pauli(g, rng)
    return tab, res


def entropy(tab: StabilizerTableau, region) -> int:
    return tab.entropy(region)


def mutual_information(tab: StabilizerTableau, a, b) -> int:
    return tab.mutual_information(a, b)


def cmi(tab: StabilizerTableau, a, b, c) -> int:
    return tab.cmi(a, b, c)
