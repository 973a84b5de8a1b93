import numpy as np
import pytest
from scipy import stats

from cmispread.clipped import (
    ClippedTableau,
    clip,
    cmi_endpoints,
    length_deviation_stats,
    mi_endpoints,
    sample_random_stabilizer_state,
    validate_clipped,
)
from cmispread.pauli import Gf2Basis
from cmispread.tableau import StabilizerTableau


def test_clip_product_state():
    ct = clip(StabilizerTableau.from_product_state(5))
    assert validate_clipped(ct) == []
    assert np.array_equal(ct.lengths, np.ones(5, dtype=np.int64))


def test_clip_bell_pair():
    ct = clip(StabilizerTableau.from_strings(["XX", "ZZ"]))
    assert validate_clipped(ct) == []
    assert list(ct.left) == [0, 0]
    assert list(ct.right) == [1, 1]
    assert mi_endpoints(ct, 1) == 2


def test_clip_empty_tableau():
    ct = clip(StabilizerTableau.empty(4))
    assert validate_clipped(ct) == []
    assert ct.k == 0


def test_validate_clipped_flags_handbuilt_violation():
    # both rows start at column 0 with the same letter Z
    tab = StabilizerTableau.from_strings(["ZI", "ZZ"])
    left = np.array([0, 0])
    right = np.array([0, 1])
    bad = ClippedTableau(tab, left, right)
    violations = validate_clipped(bad)
    assert any("condition (ii)" in v and "column 0" in v for v in violations)


def test_clip_preserves_group_and_satisfies_conditions():
    rng = np.random.default_rng(0)
    for _ in range(500):
        n = int(rng.integers(2, 14))
        k = int(rng.integers(0, n + 1))
        tab = sample_random_stabilizer_state(n, k, rng)
        ct = clip(tab)
        assert validate_clipped(ct) == []
        basis = Gf2Basis()
        for vec in tab.row_ints():
            basis.insert(vec)
        assert all(basis.contains(v) for v in ct.base.row_ints())
        basis2 = Gf2Basis()
        for vec in ct.base.row_ints():
            basis2.insert(vec)
        assert basis2.rank == k


def test_endpoint_sum_rule():
    rng = np.random.default_rng(1)
    for _ in range(100):
        n = int(rng.integers(2, 16))
        k = int(rng.integers(1, n + 1))
        ct = clip(sample_random_stabilizer_state(n, k, rng))
        rho_l = np.bincount(ct.left, minlength=n)
        rho_r = np.bincount(ct.right, minlength=n)
        assert rho_l.sum() == k and rho_r.sum() == k
        assert (rho_l + rho_r).max() <= 2


def test_endpoint_measures_match_rank_measures():
    # exact equality on random contiguous cuts, >= 10^4 instances; every
    # clip output satisfies the gauge conditions
    rng = np.random.default_rng(2)
    instances = 0
    while instances < 10_000:
        n = int(rng.integers(3, 10))
        k = int(rng.integers(0, n + 1))
        tab = sample_random_stabilizer_state(n, k, rng)
        ct = clip(tab)
        assert validate_clipped(ct) == []
        cut = int(rng.integers(1, n))
        assert mi_endpoints(ct, cut) == tab.mutual_information(
            np.arange(cut), np.arange(cut, n)
        )
        if n >= 4:
            xl, xr = sorted(rng.choice(np.arange(1, n), size=2, replace=False))
            if xl < xr:
                assert cmi_endpoints(ct, int(xl), int(xr)) == tab.cmi(
                    np.arange(xl), np.arange(xl, xr), np.arange(xr, n)
                )
        instances += 1


def test_ghz_cmi_endpoints():
    ct = clip(StabilizerTableau.from_strings(["XXX", "ZZI", "IZZ"]))
    assert cmi_endpoints(ct, 1, 2) == 1


def test_endpoint_cut_bounds():
    ct = clip(StabilizerTableau.from_product_state(4))
    with pytest.raises(ValueError):
        mi_endpoints(ct, 0)
    with pytest.raises(ValueError):
        mi_endpoints(ct, 4)
    with pytest.raises(ValueError):
        cmi_endpoints(ct, 2, 2)


def test_sample_random_stabilizer_state_edges():
    rng = np.random.default_rng(3)
    assert sample_random_stabilizer_state(5, 0, rng).k == 0
    with pytest.raises(ValueError):
        sample_random_stabilizer_state(3, 4, rng)


def test_two_qubit_pure_states_uniform():
    # 60 two-qubit pure stabilizer states = 15 groups modulo phase (4 sign
    # choices each); the phaseless engine draws the 15 groups uniformly
    rng = np.random.default_rng(4)
    draws = 6000
    counts: dict[frozenset, int] = {}
    for _ in range(draws):
        tab = sample_random_stabilizer_state(2, 2, rng)
        rows = tab.row_ints()
        group = frozenset([0, rows[0], rows[1], rows[0] ^ rows[1]])
        counts[group] = counts.get(group, 0) + 1
    assert len(counts) == 15
    obs = np.array(list(counts.values()), dtype=float)
    expected = draws / 15
    chi2 = ((obs - expected) ** 2 / expected).sum()
    assert stats.chi2.sf(chi2, 14) > 0.01


def test_half_cut_entropy_maximal_scrambling():
    rng = np.random.default_rng(5)
    ents = []
    for _ in range(30):
        tab = sample_random_stabilizer_state(40, 40, rng)
        ents.append(tab.entropy(np.arange(20)))
    assert np.mean(ents) > 20 - 2  # maximal up to O(1)


def test_random_state_lengths_near_ideal():
    # N=100, K=70: lengths within +-10 of len_ideal = 66
    rng = np.random.default_rng(6)
    ct = clip(sample_random_stabilizer_state(100, 70, rng))
    assert np.all(np.abs(ct.lengths - 66) <= 10)


def test_length_deviation_stats_small():
    rng = np.random.default_rng(7)
    stats_ = length_deviation_stats(20, 64, 64, rng)
    assert stats_.len_ideal == 33.0
    assert stats_.reference == 33
    assert stats_.total_rows == 20 * 64
    assert stats_.mean_abs_delta() <= 2.0
    assert stats_.tail_fraction(10) < 1e-3


def test_length_deviation_stats_odd_k_reference():
    rng = np.random.default_rng(8)
    stats_ = length_deviation_stats(2, 9, 5, rng)
    assert stats_.len_ideal == 9 - 2.5 + 1
    assert stats_.reference == 8  # half-up rounding of 7.5


def test_length_deviation_stats_degenerate():
    rng = np.random.default_rng(9)
    stats_ = length_deviation_stats(3, 8, 0, rng)
    assert stats_.counts == {}
    assert stats_.mean_abs_delta() == 0.0


def test_histograms_agree_across_sizes():
    # distribution of delta is independent of (n, k); two-sample chi-square
    rng = np.random.default_rng(10)
    s1 = length_deviation_stats(150, 64, 32, rng)
    s2 = length_deviation_stats(150, 128, 64, rng)
    assert _two_sample_chi2_pvalue(s1.counts, s2.counts) > 0.01


def _two_sample_chi2_pvalue(c1: dict, c2: dict) -> float:
    deltas = sorted(set(c1) | set(c2))
    a = np.array([c1.get(d, 0) for d in deltas], dtype=float)
    b = np.array([c2.get(d, 0) for d in deltas], dtype=float)
    # pool sparse bins from both tails so expected counts stay >= 5
    def pooled(v, mask_groups):
        return np.array([v[g].sum() for g in mask_groups])

    groups = []
    current = []
    for i in range(len(deltas)):
        current.append(i)
        if a[current].sum() + b[current].sum() >= 10:
            groups.append(np.array(current))
            current = []
    if current:
        if groups:
            groups[-1] = np.concatenate([groups[-1], np.array(current)])
        else:
            groups.append(np.array(current))
    ka, kb = pooled(a, groups), pooled(b, groups)
    na, nb = ka.sum(), kb.sum()
    total = ka + kb
    exp_a = total * na / (na + nb)
    exp_b = total * nb / (na + nb)
    chi2 = ((ka - exp_a) ** 2 / exp_a).sum() + ((kb - exp_b) ** 2 / exp_b).sum()
    return float(stats.chi2.sf(chi2, len(groups) - 1))
