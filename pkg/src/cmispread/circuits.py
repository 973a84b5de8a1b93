"""Experiment drivers: the coarse-grained noisy brickwork circuit, the
heralded depolarizing channel, and the four-block selective-erasure example.

Determinism: every realization draws from counter-based Philox streams
keyed by (root seed, realization index, purpose), so results are identical
for a fixed (seed, config) regardless of scheduling or thread count.
"""

from __future__ import annotations

import concurrent.futures
from dataclasses import dataclass

import numpy as np

from .clipped import clip, cmi_endpoints
from .pauli import pack_bits, unpack_bits
from .tableau import (
    StabilizerTableau,
    sample_random_clifford,
)

_STREAM_GATES = 0
_STREAM_NOISE = 1
_STREAM_CHECK = 2


def realization_rng(seed: int, realization: int, stream: int) -> np.random.Generator:
    key = ((seed & 0xFFFFFFFFFFFFFFFF) << 64) | (realization << 2) | stream
    return np.random.Generator(np.random.Philox(key=key))


@dataclass(frozen=True)
class RealizationStreams:
    gates: np.random.Generator
    noise: np.random.Generator
    check: np.random.Generator

    @classmethod
    def for_realization(cls, seed: int, realization: int) -> "RealizationStreams":
        return cls(
            gates=realization_rng(seed, realization, _STREAM_GATES),
            noise=realization_rng(seed, realization, _STREAM_NOISE),
            check=realization_rng(seed, realization, _STREAM_CHECK),
        )


@dataclass(frozen=True)
class CircuitConfig:
    """Coarse-grained circuit sweep parameters (x values in block units)."""

    n_blocks: int
    m: int
    p: float
    t_max: int
    x_values: tuple[int, ...]
    realizations: int
    seed: int

    def __post_init__(self):
        if self.n_blocks % 2 or self.n_blocks < 2:
            raise ValueError("n_blocks must be even and >= 2")
        if self.m < 1:
            raise ValueError("m must be >= 1")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError("p must lie in [0, 1]")
        if self.t_max < 1:
            raise ValueError("t_max must be >= 1")
        if self.realizations < 1:
            raise ValueError("realizations must be >= 1")
        for x in self.x_values:
            if not 1 <= x < self.n_blocks // 2:
                raise ValueError("each x must satisfy 1 <= x < n_blocks / 2")

    @property
    def n_qubits(self) -> int:
        return self.n_blocks * self.m


@dataclass
class ErrorConfiguration:
    """Spacetime bit-mask of heralded depolarization events, (t, qubit)."""

    mask: np.ndarray  # (t_max, n) bool

    @property
    def weight(self) -> int:
        return int(self.mask.sum())

    def to_rle(self) -> list[int]:
        """Run lengths of alternating 0/1 spans of the flattened mask,
        starting with the length of the initial 0-run (possibly zero)."""
        flat = self.mask.ravel().astype(np.int8)
        if flat.size == 0:
            return []
        edges = np.nonzero(np.diff(flat))[0] + 1
        bounds = np.concatenate([[0], edges, [flat.size]])
        runs = np.diff(bounds).tolist()
        if flat[0] == 1:
            runs = [0] + runs
        return [int(r) for r in runs]

    @classmethod
    def from_rle(cls, runs: list[int], shape: tuple[int, int]) -> "ErrorConfiguration":
        flat = np.zeros(shape[0] * shape[1], dtype=bool)
        pos = 0
        for i, run in enumerate(runs):
            if i % 2 == 1:
                flat[pos : pos + run] = True
            pos += run
        if pos != flat.size:
            raise ValueError("run lengths do not match shape")
        return cls(flat.reshape(shape))


@dataclass
class SpreadingField:
    """Realization-averaged normalized CMI on a (t, x) grid."""

    t_values: np.ndarray
    x_values: np.ndarray
    mean: np.ndarray  # (T, X)
    stderr: np.ndarray  # (T, X)
    realizations: int
    p: float
    m: int
    n_blocks: int


def heralded_layer(
    tab: StabilizerTableau, p: float, rng: np.random.Generator
) -> tuple[StabilizerTableau, np.ndarray]:
    """Depolarize each qubit independently with probability p (in place).

    Returns the tableau and the per-qubit event mask (one
    ErrorConfiguration row).
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    mask = rng.random(tab.n) < p
    for q in np.nonzero(mask)[0]:
        tab.depolarize_qubit(int(q))
    return tab, mask


def brickwork_layer(
    tab: StabilizerTableau, m: int, parity: int, rng: np.random.Generator
) -> None:
    """One layer of 2m-qubit uniform Cliffords on even (parity 0) or odd
    (parity 1) pairs of adjacent blocks; open boundaries, edge blocks idle
    on odd layers."""
    n = tab.n
    n_blocks = n // m
    start_block = parity % 2
    n_gates = (n_blocks - start_block) // 2
    if n_gates == 0 or tab.k == 0:
        return
    mats = np.stack(
        [sample_random_clifford(2 * m, rng).mat for _ in range(n_gates)]
    ).astype(np.float32)
    k = tab.k
    lo = start_block * m
    hi = lo + n_gates * 2 * m
    xb = unpack_bits(tab.x_words, n)
    zb = unpack_bits(tab.z_words, n)
    v = np.empty((k, n_gates, 4 * m), dtype=np.float32)
    v[:, :, 0::2] = xb[:, lo:hi].reshape(k, n_gates, 2 * m)
    v[:, :, 1::2] = zb[:, lo:hi].reshape(k, n_gates, 2 * m)
    new = np.matmul(v.transpose(1, 0, 2), mats) % 2  # (G, K, 4m)
    new = new.transpose(1, 0, 2).astype(np.uint8)
    xb[:, lo:hi] = new[:, :, 0::2].reshape(k, hi - lo)
    zb[:, lo:hi] = new[:, :, 1::2].reshape(k, hi - lo)
    tab.x_words = pack_bits(xb)
    tab.z_words = pack_bits(zb)


def run_coarse_grained(
    cfg: CircuitConfig,
    streams: RealizationStreams,
    spot_check: bool = True,
) -> tuple[SpreadingField, ErrorConfiguration]:
    """One circuit realization; field rows are timesteps t = 1 .. t_max."""
    n = cfg.n_qubits
    half = cfg.n_blocks // 2
    tab = StabilizerTableau.from_product_state(n)
    values = np.zeros((cfg.t_max, len(cfg.x_values)))
    err = np.zeros((cfg.t_max, n), dtype=bool)
    x_arr = np.asarray(cfg.x_values)
    for step in range(cfg.t_max):
        brickwork_layer(tab, cfg.m, step % 2, streams.gates)
        _, err[step] = heralded_layer(tab, cfg.p, streams.noise)
        if tab.k == 0:
            continue
        ct = clip(tab)
        counts = (ct.left[:, None] < (half - x_arr)[None, :] * cfg.m) & (
            ct.right[:, None] >= (half + x_arr)[None, :] * cfg.m
        )
        values[step] = counts.sum(axis=0) / cfg.m
        if spot_check:
            xi = int(streams.check.integers(len(cfg.x_values)))
            x = int(x_arr[xi])
            lo, hi = (half - x) * cfg.m, (half + x) * cfg.m
            by_rank = tab.cmi(np.arange(lo), np.arange(lo, hi), np.arange(hi, n))
            by_ends = cmi_endpoints(ct, lo, hi)
            if by_rank != by_ends:
                raise AssertionError(
                    f"endpoint CMI {by_ends} != rank CMI {by_rank} at t={step + 1}, x={x}"
                )
    field = SpreadingField(
        t_values=np.arange(1, cfg.t_max + 1),
        x_values=x_arr.copy(),
        mean=values,
        stderr=np.zeros_like(values),
        realizations=1,
        p=cfg.p,
        m=cfg.m,
        n_blocks=cfg.n_blocks,
    )
    return field, ErrorConfiguration(err)


def _one_realization(args) -> np.ndarray:
    cfg, index, spot_check = args
    streams = RealizationStreams.for_realization(cfg.seed, index)
    field, _ = run_coarse_grained(cfg, streams, spot_check=spot_check)
    return field.mean


def average_realizations(
    cfg: CircuitConfig, threads: int = 1, spot_check: bool = True
) -> SpreadingField:
    """Mean and standard error over seeded realizations.

    The merge runs in realization-index order, so the result is identical
    for any thread count.
    """
    jobs = [(cfg, i, spot_check) for i in range(cfg.realizations)]
    if threads > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=threads) as pool:
            samples = list(pool.map(_one_realization, jobs, chunksize=1))
    else:
        samples = [_one_realization(job) for job in jobs]
    total = np.zeros_like(samples[0])
    total_sq = np.zeros_like(samples[0])
    for sample in samples:  # fixed order: deterministic float sums
        total += sample
        total_sq += sample * sample
    r = cfg.realizations
    mean = total / r
    if r > 1:
        var = np.maximum(total_sq / r - mean * mean, 0.0) * (r / (r - 1))
        stderr = np.sqrt(var / r)
    else:
        stderr = np.zeros_like(mean)
    return SpreadingField(
        t_values=np.arange(1, cfg.t_max + 1),
        x_values=np.asarray(cfg.x_values),
        mean=mean,
        stderr=stderr,
        realizations=r,
        p=cfg.p,
        m=cfg.m,
        n_blocks=cfg.n_blocks,
    )


def four_block_experiment(
    m: int, p: float, rng: np.random.Generator
) -> dict[str, int]:
    """Selective removal of short-range correlation on four m-qubit blocks.

    U1 on blocks 1-2, U2 on blocks 3-4, U3 on B, then complete
    depolarization of the last floor(2 m p) qubits of B.  Returns the four
    rank-based measures.
    """
    if not 0.0 <= p < 0.5:
        raise ValueError("p must lie in [0, 1/2)")
    n = 4 * m
    tab = StabilizerTableau.from_product_state(n)
    tab.apply_clifford(sample_random_clifford(2 * m, rng), np.arange(0, 2 * m))
    tab.apply_clifford(sample_random_clifford(2 * m, rng), np.arange(2 * m, 4 * m))
    tab.apply_clifford(sample_random_clifford(2 * m, rng), np.arange(m, 3 * m))
    n_err = int(np.floor(2 * m * p))
    for q in range(3 * m - n_err, 3 * m):
        tab.depolarize_qubit(q)
    a = np.arange(0, m)
    b = np.arange(m, 3 * m)
    c = np.arange(3 * m, 4 * m)
    return {
        "i_ab": tab.mutual_information(a, b),
        "i_bc": tab.mutual_information(b, c),
        "i_abc": tab.mutual_information(a, np.concatenate([b, c])),
        "cmi": tab.cmi(a, b, c),
    }
