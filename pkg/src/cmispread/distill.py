"""Bell-pair distillation between distant regions by measuring the middle.

A pair of group elements whose restrictions to A anticommute (and likewise
to C) can be reduced to a Bell pair shared by A and C by measuring the
B-restrictions of both elements.  The number of distillable pairs is
bounded by half the conditional mutual information I(A:C|B).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .pauli import Gf2Basis, PauliString, symplectic_product
from .tableau import StabilizerTableau, as_region, region_complement, _check_disjoint


@dataclass
class BellPairPlan:
    """Selected group elements, their pairing, and the B-observables to measure.

    Within a pair the A- and C-restrictions anticommute; across pairs they
    commute; all B-restrictions commute (automatic for commuting group
    elements, asserted anyway).
    """

    elements: list[PauliString]
    pairs: list[tuple[int, int]]
    observables: list[PauliString] = field(default_factory=list)

    @property
    def n_bell(self) -> int:
        return len(self.pairs)


@dataclass
class DistillCertificate:
    clauses: dict[str, bool]
    values: dict[str, int]

    @property
    def ok(self) -> bool:
        return all(self.clauses.values())

    @property
    def failing(self) -> list[str]:
        return [name for name, passed in self.clauses.items() if not passed]


def _restriction_ints(p: PauliString, region: np.ndarray) -> tuple[int, int]:
    sub = p.restrict(region)
    xb = sub.x_bits()
    zb = sub.z_bits()
    x = int.from_bytes(np.packbits(xb, bitorder="little").tobytes(), "little")
    z = int.from_bytes(np.packbits(zb, bitorder="little").tobytes(), "little")
    return x, z


def _sp(u: tuple[int, int], v: tuple[int, int]) -> int:
    return ((u[0] & v[1]).bit_count() + (u[1] & v[0]).bit_count()) & 1


def _full_int(p: PauliString) -> int:
    x = int.from_bytes(np.ascontiguousarray(p.x).tobytes(), "little")
    z = int.from_bytes(np.ascontiguousarray(p.z).tobytes(), "little")
    return x | (z << p.n)


def find_bell_candidates(
    tab: StabilizerTableau,
    a,
    b,
    c,
    max_candidates: int = 256,
) -> BellPairPlan:
    """Greedy search for compatible anticommuting-restriction pairs.

    The search space is the group: raw generator rows first, then pairwise
    row products, capped at `max_candidates` elements.  Pairs are accepted
    in discovery order; each acceptance keeps the across-pair commutation
    conditions and GF(2) independence of all chosen elements intact.

    The plan size is capped at floor(I(A:C|B) / 2): the conditional mutual
    information is the distillation budget, and an unconstrained maximal
    pairing can exceed it away from the critical regime.
    """
    a = as_region(a, tab.n)
    b = as_region(b, tab.n)
    c = as_region(c, tab.n)
    _check_disjoint(a, b, c)
    if a.size + b.size + c.size != tab.n:
        raise ValueError("regions must cover the system")
    if tab.k == 0:
        raise ValueError("tableau has no generators")
    budget = tab.cmi(a, b, c) // 2
    if budget == 0:
        return BellPairPlan(elements=[], pairs=[])

    candidates: list[PauliString] = tab.rows()
    k = tab.k
    for i in range(k):
        if len(candidates) >= max_candidates:
            break
        for j in range(i + 1, k):
            if len(candidates) >= max_candidates:
                break
            candidates.append(candidates[i] * candidates[j])

    ra = [_restriction_ints(g, a) for g in candidates]
    rc = [_restriction_ints(g, c) for g in candidates]
    full = [_full_int(g) for g in candidates]

    chosen: list[int] = []  # candidate indices, two per accepted pair
    basis = Gf2Basis()

    def compatible(idx: int) -> bool:
        return all(
            _sp(ra[idx], ra[e]) == 0 and _sp(rc[idx], rc[e]) == 0 for e in chosen
        )

    for i in range(len(candidates)):
        if len(chosen) // 2 >= budget:
            break
        if not compatible(i) or basis.contains(full[i]):
            continue
        for j in range(i + 1, len(candidates)):
            if _sp(ra[i], ra[j]) != 1 or _sp(rc[i], rc[j]) != 1:
                continue
            if not compatible(j):
                continue
            if basis.contains(full[j]) or basis.reduce(full[i] ^ full[j]) == 0:
                continue
            chosen.extend([i, j])
            basis.insert(full[i])
            basis.insert(full[j])
            _recheck_conditions(chosen, ra, rc)
            break

    elements = [candidates[i] for i in chosen]
    pairs = [(2 * t, 2 * t + 1) for t in range(len(chosen) // 2)]
    observables = [g.restrict(b).embed(tab.n, b) for g in elements]
    return BellPairPlan(elements=elements, pairs=pairs, observables=observables)


def _recheck_conditions(chosen, ra, rc) -> None:
    """Re-verify the full pairwise condition matrix of the accepted set."""
    for s in range(len(chosen)):
        for t in range(s + 1, len(chosen)):
            want = 1 if (s // 2 == t // 2) else 0
            i, j = chosen[s], chosen[t]
            if _sp(ra[i], ra[j]) != want or _sp(rc[i], rc[j]) != want:
                raise AssertionError("pair compatibility violated after acceptance")


def distill(
    tab: StabilizerTableau, plan: BellPairPlan, rng: np.random.Generator
) -> tuple[StabilizerTableau, int]:
    """Measure every B-restriction in the plan; returns (tableau, n_bell)."""
    for i, u in enumerate(plan.observables):
        for v in plan.observables[i + 1 :]:
            if symplectic_product(u, v) != 0:
                raise AssertionError("plan observables do not pairwise commute")
    for obs in plan.observables:
        if obs.is_identity():
            continue  # element already supported on A u C only
        tab.measure_pauli(obs, rng)
    return tab, plan.n_bell


def ac_supported_subgroup(tab: StabilizerTableau, a, c) -> list[PauliString]:
    """Basis of the subgroup supported on A u C, as full-width strings.

    Computed by eliminating the B-columns: group elements whose B-part
    reduces to zero are exactly the A u C-supported ones.
    """
    a = as_region(a, tab.n)
    c = as_region(c, tab.n)
    ac = np.union1d(a, c)
    b = region_complement(ac, tab.n)
    collected: list[PauliString] = []
    pivots: dict[int, tuple[int, PauliString]] = {}
    for row in tab.rows():
        bx, bz = _restriction_ints(row, b)
        bvec = bx | (bz << int(b.size))
        elem = row
        while bvec:
            h = bvec.bit_length() - 1
            if h not in pivots:
                pivots[h] = (bvec, elem)
                break
            pb, pelem = pivots[h]
            bvec ^= pb
            elem = elem * pelem
        else:
            collected.append(elem)
    return collected


def bell_witness_count(tab: StabilizerTableau, a, c) -> int:
    """Number of hyperbolic pairs in the A-restriction symplectic form of
    the A u C-supported subgroup (each pair is one distilled Bell pair)."""
    a = as_region(a, tab.n)
    c = as_region(c, tab.n)
    sub = ac_supported_subgroup(tab, a, c)
    if not sub:
        return 0
    restr_a = [_restriction_ints(g, a) for g in sub]
    d = len(restr_a)
    gram_rows = []
    for i in range(d):
        bits = 0
        for j in range(d):
            bits |= _sp(restr_a[i], restr_a[j]) << j
        gram_rows.append(bits)
    basis = Gf2Basis()
    for rowbits in gram_rows:
        basis.insert(rowbits)
    return basis.rank // 2


def verify_distillation(
    pre_tab: StabilizerTableau,
    post_tab: StabilizerTableau,
    a,
    c,
    n_bell: int,
) -> DistillCertificate:
    """Certify a distillation run; failing clauses are named, not raised."""
    a = as_region(a, pre_tab.n)
    c = as_region(c, pre_tab.n)
    b = region_complement(np.union1d(a, c), pre_tab.n)
    mi_ac = post_tab.mutual_information(a, c)
    witness = bell_witness_count(post_tab, a, c)
    cmi_pre = pre_tab.cmi(a, b, c)
    clauses = {
        "mi_at_least_2n": mi_ac >= 2 * n_bell,
        "bell_subgroup_witness": witness >= n_bell,
        "cmi_bound": 2 * n_bell <= cmi_pre,
    }
    values = {"mi_ac_post": mi_ac, "witness_pairs": witness, "cmi_pre": cmi_pre, "n_bell": n_bell}
    return DistillCertificate(clauses=clauses, values=values)
