"""Exact density-matrix simulator used as the brute-force oracle.

Capped at 10 qubits.  Provides Haar unitaries, the true (convex-mixture)
depolarizing channel next to its heralded variant, von Neumann and
Renyi-2 entropies, and the four-qubit toy circuit comparing the two
channel kinds.  All logarithms are base 2.
"""

from __future__ import annotations

import numpy as np

from .pauli import PauliString
from .tableau import StabilizerTableau, as_region, region_complement, _check_disjoint

MAX_QUBITS = 10

_HERM_TOL = 1e-12
_PSD_TOL = 1e-9

_PAULI_MATS = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

H_GATE = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
S_GATE = np.array([[1, 0], [0, 1j]], dtype=complex)
CNOT_GATE = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)
# control = second listed qubit
CNOT_REV_GATE = np.array(
    [[1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0]], dtype=complex
)


class DensityMatrix:
    """n-qubit density matrix; Hermitian, unit-trace, PSD within tolerance."""

    def __init__(self, n: int, mat: np.ndarray, check: bool = False):
        if n > MAX_QUBITS:
            raise ValueError(f"dense oracle is capped at {MAX_QUBITS} qubits")
        dim = 1 << n
        mat = np.asarray(mat, dtype=complex)
        if mat.shape != (dim, dim):
            raise ValueError("matrix shape does not match qubit count")
        self.n = n
        self.mat = mat
        if check:
            self.validate()

    def validate(self) -> None:
        if np.abs(self.mat - self.mat.conj().T).max() > _HERM_TOL:
            raise ValueError("not Hermitian within tolerance")
        if abs(np.trace(self.mat).real - 1.0) > 1e-10:
            raise ValueError("trace differs from 1")
        if np.linalg.eigvalsh(self.mat).min() < -_PSD_TOL:
            raise ValueError("negative eigenvalue beyond tolerance")

    def copy(self) -> "DensityMatrix":
        return DensityMatrix(self.n, self.mat.copy())


def zero_state(n: int) -> DensityMatrix:
    dim = 1 << n
    mat = np.zeros((dim, dim), dtype=complex)
    mat[0, 0] = 1.0
    return DensityMatrix(n, mat)


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary: QR of a complex Ginibre matrix, phases fixed."""
    if dim < 2:
        raise ValueError("dimension must be at least 2")
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(g)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def apply_unitary(rho: DensityMatrix, u: np.ndarray, qubits) -> DensityMatrix:
    """Apply a unitary on the given qubits: rho -> U rho U^dag."""
    qubits = list(qubits)
    k = len(qubits)
    if u.shape != (1 << k, 1 << k):
        raise ValueError("unitary size does not match qubit count")
    n = rho.n
    tensor = rho.mat.reshape((2,) * (2 * n))
    u_t = u.reshape((2,) * (2 * k))
    # ket side
    tensor = np.tensordot(u_t, tensor, axes=(list(range(k, 2 * k)), qubits))
    tensor = np.moveaxis(tensor, range(k), qubits)
    # bra side
    bra_axes = [n + q for q in qubits]
    tensor = np.tensordot(tensor, u_t.conj(), axes=(bra_axes, list(range(k, 2 * k))))
    tensor = np.moveaxis(tensor, range(2 * n - k, 2 * n), bra_axes)
    return DensityMatrix(n, tensor.reshape(rho.mat.shape))


def partial_trace(rho: DensityMatrix, keep) -> DensityMatrix:
    """Trace out everything except the (sorted) kept qubits."""
    keep = as_region(keep, rho.n)
    n = rho.n
    traced = sorted(set(range(n)) - set(int(q) for q in keep), reverse=True)
    tensor = rho.mat.reshape((2,) * (2 * n))
    m = n
    for q in traced:
        tensor = np.trace(tensor, axis1=q, axis2=m + q)
        m -= 1
    dim = 1 << len(keep)
    return DensityMatrix(len(keep), tensor.reshape(dim, dim))


def depolarize(rho: DensityMatrix, q: int, p: float) -> DensityMatrix:
    """True depolarizing channel: (1-p) rho + p Tr_q rho (x) I_q / 2."""
    if not 0 <= q < rho.n:
        raise ValueError("qubit index out of range")
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    return DensityMatrix(rho.n, (1 - p) * rho.mat + p * _traced_out(rho, q).mat)


def herald_depolarize(
    rho: DensityMatrix, q: int, p: float, rng: np.random.Generator
) -> DensityMatrix:
    """Heralded variant: full depolarization of q with probability p."""
    if not 0 <= q < rho.n:
        raise ValueError("qubit index out of range")
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    if rng.random() < p:
        return _traced_out(rho, q)
    return rho.copy()


def _traced_out(rho: DensityMatrix, q: int) -> DensityMatrix:
    keep = [i for i in range(rho.n) if i != q]
    reduced = partial_trace(rho, keep) if keep else None
    n = rho.n
    if reduced is None:
        return DensityMatrix(1, np.eye(2, dtype=complex) / 2)
    # reinsert a maximally mixed qubit at position q
    tensor = np.kron(reduced.mat, np.eye(2, dtype=complex) / 2)
    out = DensityMatrix(n, tensor)
    # qubit q currently sits last; rotate it back into place
    if q != n - 1:
        perm = list(range(n))
        perm.remove(n - 1)
        perm.insert(q, n - 1)
        out = _permute_qubits(out, perm)
    return out


def _permute_qubits(rho: DensityMatrix, perm: list[int]) -> DensityMatrix:
    """perm[i] = current position of the qubit that should sit at slot i."""
    n = rho.n
    tensor = rho.mat.reshape((2,) * (2 * n))
    axes = perm + [n + p for p in perm]
    tensor = tensor.transpose(axes)
    return DensityMatrix(n, tensor.reshape(rho.mat.shape))


def von_neumann_entropy(rho: DensityMatrix, region) -> float:
    """S(region) in bits, with 0 log 0 = 0."""
    region = as_region(region, rho.n)
    if region.size == 0:
        return 0.0
    reduced = partial_trace(rho, region)
    evals = np.linalg.eigvalsh(reduced.mat)
    if evals.min() < -_PSD_TOL:
        raise ValueError("reduced state not PSD within tolerance")
    evals = evals[evals > 1e-14]
    return float(-(evals * np.log2(evals)).sum())


def renyi2_entropy(rho: DensityMatrix, region) -> float:
    """S^(2)(region) = -log2 Tr(rho_region^2)."""
    region = as_region(region, rho.n)
    if region.size == 0:
        return 0.0
    reduced = partial_trace(rho, region)
    purity = np.trace(reduced.mat @ reduced.mat).real
    return float(-np.log2(purity))


def renyi2_cmi(rho: DensityMatrix, a, b, c) -> float:
    a = as_region(a, rho.n)
    b = as_region(b, rho.n)
    c = as_region(c, rho.n)
    _check_disjoint(a, b, c)
    ab = np.union1d(a, b)
    bc = np.union1d(b, c)
    abc = np.union1d(ab, c)
    return (
        renyi2_entropy(rho, ab)
        + renyi2_entropy(rho, bc)
        - renyi2_entropy(rho, b)
        - renyi2_entropy(rho, abc)
    )


def vn_cmi(rho: DensityMatrix, a, b, c) -> float:
    a = as_region(a, rho.n)
    b = as_region(b, rho.n)
    c = as_region(c, rho.n)
    _check_disjoint(a, b, c)
    ab = np.union1d(a, b)
    bc = np.union1d(b, c)
    abc = np.union1d(ab, c)
    return (
        von_neumann_entropy(rho, ab)
        + von_neumann_entropy(rho, bc)
        - von_neumann_entropy(rho, b)
        - von_neumann_entropy(rho, abc)
    )


def pauli_matrix(p: PauliString) -> np.ndarray:
    mat = np.array([[1.0 + 0j]])
    for ch in p.to_string():
        mat = np.kron(mat, _PAULI_MATS[ch])
    return mat


def tableau_to_density(tab: StabilizerTableau) -> DensityMatrix:
    """Uniform mixture over the +1 eigenspace of the (phaseless) generators.

    Each generator is realized with +1 phase; region entropies are
    independent of this choice.
    """
    n = tab.n
    if n > MAX_QUBITS:
        raise ValueError(f"dense oracle is capped at {MAX_QUBITS} qubits")
    dim = 1 << n
    mat = np.eye(dim, dtype=complex)
    for row in tab.rows():
        mat = mat @ (np.eye(dim, dtype=complex) + pauli_matrix(row)) / 2
    return DensityMatrix(n, mat / (1 << (n - tab.k)))


def random_clifford_noise_ops(
    n: int, n_ops: int, depol_fraction: float, rng: np.random.Generator
) -> list[tuple]:
    """Sample an elementary-gate circuit with heralded depolarization events.

    The event locations are fixed in the op list, so the stabilizer and
    dense engines see the identical error configuration.  Two-qubit gates
    are listed with ascending qubit order; direction is part of the name.
    """
    ops: list[tuple] = []
    for _ in range(n_ops):
        if rng.random() < depol_fraction:
            ops.append(("depol", int(rng.integers(n))))
            continue
        kind = int(rng.integers(3))
        if kind == 0:
            ops.append(("h", int(rng.integers(n))))
        elif kind == 1:
            ops.append(("s", int(rng.integers(n))))
        else:
            q = sorted(int(v) for v in rng.choice(n, size=2, replace=False))
            name = "cx_rev" if rng.integers(2) else "cx"
            ops.append((name, q[0], q[1]))
    return ops


def apply_ops_to_tableau(tab: StabilizerTableau, ops: list[tuple]) -> StabilizerTableau:
    from .tableau import SymplecticMatrix

    gates = {
        "h": SymplecticMatrix.hadamard(),
        "s": SymplecticMatrix.phase_gate(),
        "cx": SymplecticMatrix.cnot(),
        "cx_rev": SymplecticMatrix.cnot_reversed(),
    }
    for op in ops:
        if op[0] == "depol":
            tab.depolarize_qubit(op[1])
        else:
            tab.apply_clifford(gates[op[0]], list(op[1:]))
    return tab


def apply_ops_to_density(rho: DensityMatrix, ops: list[tuple]) -> DensityMatrix:
    gates = {"h": H_GATE, "s": S_GATE, "cx": CNOT_GATE, "cx_rev": CNOT_REV_GATE}
    for op in ops:
        if op[0] == "depol":
            rho = _traced_out(rho, op[1])
        else:
            rho = apply_unitary(rho, gates[op[0]], list(op[1:]))
    return rho


def toy_four_qudit(p: float, channel: str, rng: np.random.Generator) -> float:
    """One sample of the Renyi-2 CMI for the 4-qubit Haar toy circuit.

    |0000>, gates on (0,1) and (2,3), then one on (1,2), then the chosen
    channel on the two middle qubits; returns I^(2)(A:C|B) with A = {0},
    B = {1, 2}, C = {3}.
    """
    if channel not in ("depolarizing", "heralded"):
        raise ValueError("channel must be 'depolarizing' or 'heralded'")
    rho = zero_state(4)
    rho = apply_unitary(rho, haar_unitary(4, rng), [0, 1])
    rho = apply_unitary(rho, haar_unitary(4, rng), [2, 3])
    rho = apply_unitary(rho, haar_unitary(4, rng), [1, 2])
    for q in (1, 2):
        if channel == "depolarizing":
            rho = depolarize(rho, q, p)
        else:
            rho = herald_depolarize(rho, q, p, rng)
    return renyi2_cmi(rho, [0], [1, 2], [3])
