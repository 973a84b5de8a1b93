"""Clipped-gauge computation and endpoint-based correlation measures.

A generating set is in the clipped gauge when (i) every qubit column hosts
at most two row endpoints in total and (ii) two rows ending (or starting)
at the same column carry different Pauli letters there.  In that gauge,
mutual information across a cut counts the rows straddling it, and the CMI
of a contiguous A|B|C partition counts the rows reaching from A to C.

The construction is two sweeps of Gaussian elimination:

1. Left sweep: reduced row echelon form over the interleaved bit columns
   (x_0, z_0, x_1, z_1, ...).  Afterwards at most two rows start at any
   column, with independent letters, and the rows starting at column >= s
   span exactly the subgroup supported on [s, n).

2. Right sweep: mirrored elimination from the right, where the pivot for a
   bit column is the candidate row with the *largest left endpoint*.  Every
   row operation then has l(source) >= l(target), which provably never
   moves a left endpoint, so the left structure survives while right
   endpoints become maximally packed as well.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .pauli import bit_column
from .tableau import StabilizerTableau, sample_random_clifford

_PAULI_CHARS = "IXZY"


@dataclass
class ClippedTableau:
    """Tableau in the clipped gauge with per-row endpoints and lengths.

    Rows are sorted so l(k) + r(k) is non-decreasing.
    """

    base: StabilizerTableau
    left: np.ndarray
    right: np.ndarray

    @property
    def lengths(self) -> np.ndarray:
        return self.right - self.left + 1

    @property
    def k(self) -> int:
        return self.base.k

    @property
    def n(self) -> int:
        return self.base.n


def _endpoint_sites(tab: StabilizerTableau) -> tuple[np.ndarray, np.ndarray]:
    """First and last nontrivial site of each row (rows must be nonzero)."""
    support = tab.x_words | tab.z_words
    k, w = support.shape
    nonzero = support != 0
    first_w = np.argmax(nonzero, axis=1)
    last_w = w - 1 - np.argmax(nonzero[:, ::-1], axis=1)
    first_word = support[np.arange(k), first_w]
    last_word = support[np.arange(k), last_w]
    lowest = first_word & (~first_word + np.uint64(1))
    left = first_w * 64 + _floor_log2(lowest)
    right = last_w * 64 + _floor_log2(last_word)
    return left.astype(np.int64), right.astype(np.int64)


def _floor_log2(words: np.ndarray) -> np.ndarray:
    # split into 32-bit halves so the float conversion is exact
    hi = (words >> np.uint64(32)).astype(np.float64)
    lo = (words & np.uint64(0xFFFFFFFF)).astype(np.float64)
    out = np.where(hi > 0, 32 + np.floor(np.log2(np.maximum(hi, 1))), 0)
    out = np.where((hi == 0), np.floor(np.log2(np.maximum(lo, 1))), out)
    return out.astype(np.int64)


def clip(tab: StabilizerTableau) -> ClippedTableau:
    """Bring a tableau to the clipped gauge (the group is unchanged)."""
    if tab.n < 1:
        raise ValueError("clipping needs at least one qubit")
    work = tab.copy()
    if work.k == 0:
        empty = np.zeros(0, dtype=np.int64)
        return ClippedTableau(work, empty, empty)
    xw, zw = work.x_words, work.z_words
    k = work.k

    # --- left sweep: RREF over columns x_0, z_0, x_1, z_1, ...
    left = np.zeros(k, dtype=np.int64)
    pivot = 0
    for site in range(work.n):
        for words in (xw, zw):
            col = bit_column(words, site).astype(bool)
            if not col[pivot:].any():
                continue
            src = pivot + int(np.argmax(col[pivot:]))
            if src != pivot:
                xw[[pivot, src]] = xw[[src, pivot]]
                zw[[pivot, src]] = zw[[src, pivot]]
                col[[pivot, src]] = col[[src, pivot]]
            col[pivot] = False
            if col.any():
                xw[col] ^= xw[pivot]
                zw[col] ^= zw[pivot]
            left[pivot] = site
            pivot += 1
            if pivot == k:
                break
        if pivot == k:
            break

    # --- right sweep: mirrored elimination, pivot = max left endpoint
    right = np.zeros(k, dtype=np.int64)
    frozen = np.zeros(k, dtype=bool)
    lkey = left - left.min() + 1  # strictly positive keys for masked argmax
    for site in range(work.n - 1, -1, -1):
        for words in (zw, xw):
            col = bit_column(words, site).astype(bool) & ~frozen
            if not col.any():
                continue
            p = int(np.argmax(np.where(col, lkey, 0)))
            col[p] = False
            if col.any():
                xw[col] ^= xw[p]
                zw[col] ^= zw[p]
            frozen[p] = True
            right[p] = site
        if frozen.all():
            break

    order = np.lexsort((np.arange(k), left, left + right))
    clipped = StabilizerTableau(work.n, xw[order], zw[order])
    return ClippedTableau(clipped, left[order], right[order])


def validate_clipped(ct: ClippedTableau) -> list[str]:
    """Check clipped-gauge conditions; returns a list of violation messages."""
    violations: list[str] = []
    k, n = ct.k, ct.n
    if k == 0:
        return violations
    left, right = _endpoint_sites(ct.base)
    for i in range(k):
        if left[i] != ct.left[i] or right[i] != ct.right[i]:
            violations.append(f"row {i}: stored endpoints disagree with support")
    rho_l = np.bincount(left, minlength=n)
    rho_r = np.bincount(right, minlength=n)
    over = np.nonzero(rho_l + rho_r > 2)[0]
    for col in over:
        violations.append(
            f"column {col}: {rho_l[col] + rho_r[col]} endpoints (condition (i))"
        )
    for col in range(n):
        for ends, name in ((left, "left"), (right, "right")):
            rows = np.nonzero(ends == col)[0]
            if rows.size == 2:
                letters = {_letter(ct.base, r, col) for r in rows}
                if len(letters) != 2:
                    violations.append(
                        f"column {col}: equal {name}-endpoint letters (condition (ii))"
                    )
    mid = ct.left + ct.right
    if np.any(np.diff(mid) < 0):
        bad = int(np.nonzero(np.diff(mid) < 0)[0][0])
        violations.append(f"rows {bad},{bad + 1}: midpoints not sorted")
    return violations


def _letter(tab: StabilizerTableau, row: int, col: int) -> str:
    x = int(bit_column(tab.x_words[row : row + 1], col)[0])
    z = int(bit_column(tab.z_words[row : row + 1], col)[0])
    return _PAULI_CHARS[x + 2 * z]


def mi_endpoints(ct: ClippedTableau, cut: int) -> int:
    """I(A:B) for A = [0, cut), B = [cut, n): rows straddling the cut."""
    if not 1 <= cut <= ct.n - 1:
        raise ValueError("cut out of range")
    return int(np.count_nonzero((ct.left < cut) & (ct.right >= cut)))


def cmi_endpoints(ct: ClippedTableau, x_left: int, x_right: int) -> int:
    """I(A:C|B) for contiguous A = [0, x_left), B, C = [x_right, n)."""
    if not (1 <= x_left < x_right <= ct.n - 1):
        raise ValueError("cut positions out of range")
    return int(np.count_nonzero((ct.left < x_left) & (ct.right >= x_right)))


def sample_random_stabilizer_state(
    n: int, k: int, rng: np.random.Generator
) -> StabilizerTableau:
    """Uniformly random stabilizer state of n qubits with k generators.

    |0>^n truncated to k rows, followed by an n-qubit uniform Clifford.
    """
    if not 0 <= k <= n:
        raise ValueError("need 0 <= k <= n")
    tab = StabilizerTableau.from_product_state(n)
    tab.x_words = tab.x_words[:k]
    tab.z_words = tab.z_words[:k]
    if n >= 1:
        tab.apply_clifford(sample_random_clifford(n, rng), np.arange(n))
    return tab


@dataclass
class LengthStats:
    """Histogram of row-length deviations from the ideal scrambled length."""

    n: int
    k: int
    samples: int
    len_ideal: float  # exact value n - k/2 + 1 (half-integer when k is odd)
    reference: int  # len_ideal rounded half-up; deviations measured from this
    counts: dict[int, int] = field(default_factory=dict)

    @property
    def total_rows(self) -> int:
        return sum(self.counts.values())

    def mean_abs_delta(self) -> float:
        total = self.total_rows
        if total == 0:
            return 0.0
        return sum(abs(d) * c for d, c in self.counts.items()) / total

    def tail_fraction(self, threshold: int = 10) -> float:
        total = self.total_rows
        if total == 0:
            return 0.0
        tail = sum(c for d, c in self.counts.items() if abs(d) > threshold)
        return tail / total


def length_deviation_stats(
    samples: int, n: int, k: int, rng: np.random.Generator
) -> LengthStats:
    """Clip `samples` random stabilizer states and histogram len - len_ideal."""
    if samples < 1:
        raise ValueError("need at least one sample")
    len_ideal = n - k / 2 + 1
    reference = int(np.floor(len_ideal + 0.5))
    stats = LengthStats(n=n, k=k, samples=samples, len_ideal=len_ideal, reference=reference)
    for _ in range(samples):
        ct = clip(sample_random_stabilizer_state(n, k, rng))
        deltas, counts = np.unique(ct.lengths - reference, return_counts=True)
        for d, c in zip(deltas, counts):
            stats.counts[int(d)] = stats.counts.get(int(d), 0) + int(c)
    return stats
