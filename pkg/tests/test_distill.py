import numpy as np
import pytest

from cmispread.circuits import RealizationStreams, brickwork_layer, heralded_layer
from cmispread.distill import (
    bell_witness_count,
    distill,
    find_bell_candidates,
    verify_distillation,
)
from cmispread.pauli import Gf2Basis, PauliString, symplectic_product
from cmispread.tableau import StabilizerTableau


def near_critical_state(seed: int, trial: int, n_blocks=16, m=4, p=1 / 32):
    streams = RealizationStreams.for_realization(seed, trial)
    n = n_blocks * m
    tab = StabilizerTableau.from_product_state(n)
    t_stop = int(round(1 / (2 * p))) - 1
    for t in range(t_stop):
        brickwork_layer(tab, m, t % 2, streams.gates)
        heralded_layer(tab, p, streams.noise)
    return tab, streams


def quarters(n):
    q = n // 4
    return np.arange(q), np.arange(q, n - q), np.arange(n - q, n)


def test_worked_example_end_to_end():
    tab = StabilizerTableau.from_strings(["XXIX", "ZIXZ"])
    a, b, c = [0], [1, 2], [3]
    plan = find_bell_candidates(tab, a, b, c)
    assert plan.n_bell == 1
    g1, g2 = (plan.elements[i] for i in plan.pairs[0])
    assert symplectic_product(g1.restrict(a), g2.restrict(a)) == 1
    assert symplectic_product(g1.restrict(c), g2.restrict(c)) == 1
    assert symplectic_product(g1.restrict(b), g2.restrict(b)) == 0
    assert [o.to_string() for o in plan.observables] == ["IXII", "IIXI"]

    pre = tab.copy()
    post, n_bell = distill(tab, plan, np.random.default_rng(0))
    assert n_bell == 1
    # the post group contains the Bell-pair operators XIIX and ZIIZ
    basis = Gf2Basis()
    for v in post.row_ints():
        basis.insert(v)
    for s in ("XIIX", "ZIIZ"):
        g = PauliString.from_string(s)
        vec = int.from_bytes(g.x.tobytes(), "little") | (
            int.from_bytes(g.z.tobytes(), "little") << 4
        )
        assert basis.contains(vec)
    cert = verify_distillation(pre, post, a, c, n_bell)
    assert cert.ok
    assert cert.values["mi_ac_post"] == 2


def test_ghz_plan_is_empty():
    ghz = StabilizerTableau.from_strings(["XXX", "ZZI", "IZZ"])
    plan = find_bell_candidates(ghz, [0], [1], [2])
    assert plan.n_bell == 0
    post, n_bell = distill(ghz, plan, np.random.default_rng(0))
    cert = verify_distillation(ghz, post, [0], [2], n_bell)
    assert cert.ok  # vacuous pass at n_bell = 0


def test_product_state_plan_is_empty():
    prod = StabilizerTableau.from_product_state(6)
    plan = find_bell_candidates(prod, [0, 1], [2, 3], [4, 5])
    assert plan.n_bell == 0


def test_empty_tableau_rejected():
    with pytest.raises(ValueError):
        find_bell_candidates(StabilizerTableau.empty(4), [0], [1, 2], [3])


def test_regions_must_cover():
    tab = StabilizerTableau.from_product_state(5)
    with pytest.raises(ValueError):
        find_bell_candidates(tab, [0], [1], [2])
    with pytest.raises(ValueError):
        find_bell_candidates(tab, [0, 1], [1, 2], [3, 4])


def test_plan_conditions_and_bound_on_random_states():
    rng = np.random.default_rng(1)
    from cmispread.clipped import sample_random_stabilizer_state

    for trial in range(150):
        n = int(rng.integers(6, 12))
        k = int(rng.integers(1, n + 1))
        tab = sample_random_stabilizer_state(n, k, rng)
        a, b, c = quarters(n)
        if a.size + b.size + c.size != n:
            b = np.arange(a.size, n - a.size)
        plan = find_bell_candidates(tab, a, b, c)
        cmi = tab.cmi(a, b, c)
        assert plan.n_bell <= cmi // 2
        # all observables commute pairwise and are supported on B
        for i, u in enumerate(plan.observables):
            assert u.restrict(a).is_identity() and u.restrict(c).is_identity()
            for v in plan.observables[i + 1:]:
                assert symplectic_product(u, v) == 0
        # within-pair anticommuting, across-pair commuting restrictions
        for t1 in range(len(plan.elements)):
            for t2 in range(t1 + 1, len(plan.elements)):
                want = 1 if t2 == t1 + 1 and t1 % 2 == 0 else 0
                e1, e2 = plan.elements[t1], plan.elements[t2]
                assert symplectic_product(e1.restrict(a), e2.restrict(a)) == want
                assert symplectic_product(e1.restrict(c), e2.restrict(c)) == want


def test_soundness_on_near_critical_states():
    hits = 0
    for trial in range(60):
        tab, streams = near_critical_state(123, trial)
        if tab.k == 0:
            continue
        a, b, c = quarters(tab.n)
        plan = find_bell_candidates(tab, a, b, c)
        pre = tab.copy()
        post, n_bell = distill(tab, plan, streams.check)
        cert = verify_distillation(pre, post, a, c, n_bell)
        assert cert.ok, cert.clauses
        assert post.mutual_information(a, c) >= 2 * n_bell
        if n_bell:
            hits += 1
    assert hits > 0


def test_witness_monotone_under_b_measurements():
    for trial in range(25):
        tab, streams = near_critical_state(321, trial, n_blocks=8, m=2, p=1 / 16)
        if tab.k == 0:
            continue
        a, b, c = quarters(tab.n)
        before = bell_witness_count(tab, a, c)
        plan = find_bell_candidates(tab, a, b, c)
        post, _ = distill(tab, plan, streams.check)
        assert bell_witness_count(post, a, c) >= before


def test_distill_rejects_noncommuting_observables():
    from cmispread.distill import BellPairPlan

    plan = BellPairPlan(
        elements=[],
        pairs=[],
        observables=[PauliString.from_string("XI"), PauliString.from_string("ZI")],
    )
    with pytest.raises(AssertionError):
        distill(StabilizerTableau.from_product_state(2), plan, np.random.default_rng(0))


def test_certificate_names_failing_clause():
    bell = StabilizerTableau.from_strings(["XX", "ZZ"])
    # claim one pair without measuring anything on a product state
    prod = StabilizerTableau.from_product_state(2)
    cert = verify_distillation(prod, prod, [0], [1], 1)
    assert not cert.ok
    assert "mi_at_least_2n" in cert.failing
    # a genuine Bell pair passes with n_bell = 1 claimed post hoc
    cert2 = verify_distillation(bell, bell, [0], [1], 0)
    assert cert2.ok
