import itertools

import pytest

from conftest import one_in_k_gadget
from satphase.errors import UsageError
from satphase.instances import (
    AppliedConstraint,
    Cnf,
    Instance,
    gen_ksat,
    gen_kxorsat,
    gen_molloy,
    to_cnf,
)
from satphase.solver import solve_instance
from satphase.spine import (
    MusReport,
    backbone,
    extract_mus,
    is_minimally_unsat,
    spine,
    spine_literals,
    spine_mus_lower_bound,
    verify_certificate,
)
from satphase.templates import (
    ConstraintDistribution,
    clause_templates,
    template_from_name,
)


def two_cnf_instance(clauses):
    """Clauses over {+,-}^2 sign patterns as applied 2-clause templates."""
    temps = {i: t for i, t in enumerate(clause_templates(2))}
    cons = []
    for lits in clauses:
        (l1, l2) = lits
        mask = (l1 < 0) | ((l2 < 0) << 1)
        # sign order of clause_templates(2): ++, +-, -+, --  (slot1 major)
        tid = {0: 0, 1: 2, 2: 1, 3: 3}[mask]
        cons.append(AppliedConstraint(tid, (abs(l1), abs(l2))))
    return Instance(2, temps, cons)


FOUR_CLAUSE = [(1, 2), (-1, 2), (1, -2), (-1, -2)]


def test_spine_single_clause_empty(dist2sat):
    inst = two_cnf_instance([(1, 2)])
    rep = spine(inst, dist2sat)
    assert rep.variables == () and rep.fraction == 0.0


def test_spine_four_clause_full(dist2sat):
    inst = two_cnf_instance(FOUR_CLAUSE)
    rep = spine(inst, dist2sat)
    assert rep.variables == (1, 2)
    assert rep.fraction == 1.0
    assert rep.method == "exact-definition"
    for v in rep.variables:
        assert verify_certificate(inst, v, rep.certificates[v])


def test_spine_mus_vars_subset_of_exact(dist3sat):
    checked = 0
    for s in range(60):
        inst = gen_ksat(3, 12, 70, seed=s)
        if solve_instance(inst).is_sat:
            continue
        rep_mus = spine(inst, dist3sat, mode="mus")
        rep_exact = spine(inst, dist3sat, mode="exact")
        assert set(rep_mus.variables) <= set(rep_exact.variables)
        checked += 1
        if checked >= 8:
            break
    assert checked >= 5


def test_spine_monotone_under_added_constraint(dist2sat):
    base = two_cnf_instance([(1, 2), (-1, 2), (1, -2)])
    bigger = two_cnf_instance(FOUR_CLAUSE)
    s1 = spine(base, dist2sat).variables
    s2 = spine(bigger, dist2sat).variables
    assert set(s1) <= set(s2)


def test_spine_exact_cap():
    inst = gen_ksat(3, 80, 560, seed=0)  # unsatisfiable at c=7
    d = ConstraintDistribution.uniform(clause_templates(3))
    with pytest.raises(UsageError) as e:
        spine(inst, d, mode="exact")
    assert "mus" in str(e.value)


def test_spine_exact_solver_route_matches_bitset(dist3sat):
    # satisfiable instance: the n<=24 bitset answer equals the solver sweep
    from satphase.spine import _spine_exact_solver

    for s in range(6):
        inst = gen_ksat(3, 9, 22, seed=100 + s)
        if not solve_instance(inst).is_sat:
            continue
        a = spine(inst, dist3sat)
        b = _spine_exact_solver(inst, dist3sat)
        assert set(a.variables) == set(b.variables)


def test_spine_literals_examples():
    assert spine_literals(Cnf(1, [(1,)])) == (1,)
    assert spine_literals(Cnf(0, [])) == ()


def test_spine_literals_consistency_small():
    # on 2- and 3-variable CNFs with <= 4 clauses whose literal spine has
    # >= 3 members, generalized-spine membership == some polarity present
    d2 = ConstraintDistribution.uniform(clause_templates(2))
    all_2clauses = [
        (s1 * a, s2 * b)
        for a, b in itertools.combinations((1, 2, 3), 2)
        for s1 in (1, -1) for s2 in (1, -1)
    ]
    checked = 0
    import random

    rng = random.Random(5)
    for _ in range(1200):
        m = rng.randrange(1, 5)
        clauses = [rng.choice(all_2clauses) for _ in range(m)]
        lit_spine = spine_literals(Cnf(3, clauses))
        if len(lit_spine) < 3:
            continue
        temps = {i: t for i, t in enumerate(clause_templates(2))}
        cons = []
        for (l1, l2) in clauses:
            mask = (l1 < 0) | ((l2 < 0) << 1)
            tid = {0: 0, 1: 2, 2: 1, 3: 3}[mask]
            cons.append(AppliedConstraint(tid, (abs(l1), abs(l2))))
        gen_spine = spine(Instance(3, temps, cons), d2).variables
        lit_vars = {abs(l) for l in lit_spine}
        assert lit_vars == set(gen_spine)
        checked += 1
    assert checked >= 20


def test_backbone_examples():
    assert backbone(Cnf(2, [(1, 2), (-2,)])) == (1, -2)
    assert backbone(Cnf(2, [(1, 2)])) == ()
    with pytest.raises(UsageError):
        backbone(Cnf(1, [(1,), (-1,)]))


def test_backbone_probing_equals_enumeration():
    agree = 0
    for s in range(200):
        inst = gen_ksat(3, 14, 50, seed=s)
        f = to_cnf(inst)
        if not solve_instance(inst).is_sat:
            continue
        assert backbone(f, "enumeration") == backbone(f, "probing")
        agree += 1
    assert agree >= 100


def test_extract_mus_unit_pair():
    temps = {0: template_from_name("CLAUSE1:+"),
             1: template_from_name("CLAUSE1:-"),
             2: clause_templates(2)[0]}
    inst = Instance(3, temps, [
        AppliedConstraint(0, (1,)),
        AppliedConstraint(1, (1,)),
        AppliedConstraint(2, (2, 3)),
    ])
    rep = extract_mus(inst)
    assert rep.core == (0, 1)
    assert rep.core_vars == (1,)
    assert rep.sizes == (2, 1)


def test_extract_mus_four_clause():
    inst = two_cnf_instance(FOUR_CLAUSE)
    rep = extract_mus(inst)
    assert rep.core == (0, 1, 2, 3)
    assert rep.core_vars == (1, 2)


def test_extract_mus_requires_unsat():
    with pytest.raises(UsageError):
        extract_mus(two_cnf_instance([(1, 2)]))


def test_extract_mus_minimal_and_deterministic():
    done = 0
    for s in range(60):
        inst = gen_ksat(3, 14, 75, seed=s)
        if solve_instance(inst).is_sat:
            continue
        rep1 = extract_mus(inst)
        rep2 = extract_mus(inst)
        assert rep1 == rep2
        assert is_minimally_unsat(inst.subset(rep1.core))
        done += 1
        if done >= 10:
            break
    assert done >= 5


def test_extract_mus_xor_uses_gauss():
    done = 0
    for s in range(40):
        inst = gen_kxorsat(3, 20, 28, seed=s)
        if solve_instance(inst).is_sat:
            continue
        rep = extract_mus(inst)
        assert is_minimally_unsat(inst.subset(rep.core))
        # parity cores: every variable appears an even number of times
        counts = {}
        for i in rep.core:
            for v in inst.constraints[i].vars:
                counts[v] = counts.get(v, 0) + 1
        assert all(c % 2 == 0 for c in counts.values())
        done += 1
        if done >= 6:
            break
    assert done >= 3


def test_is_minimally_unsat_examples():
    assert not is_minimally_unsat(two_cnf_instance([(1, 2)]))
    mu = two_cnf_instance(FOUR_CLAUSE)
    assert is_minimally_unsat(mu)
    redundant = two_cnf_instance(FOUR_CLAUSE + [(1, 2)])
    assert not is_minimally_unsat(redundant)


def test_one_in_k_gadget_minimally_unsat():
    # brute-force verification of the reconstructed gadget (spec fixture)
    for k in (3, 4):
        gadget = one_in_k_gadget(k)
        assert gadget.n <= 12
        assert is_minimally_unsat(gadget)


def test_claim_core_vars_in_spine(dist3sat, dist3xor):
    checked = 0
    for s in range(80):
        d = dist3xor if s % 2 else dist3sat
        inst = gen_molloy(d, 11, 60 if s % 2 == 0 else 16, seed=s)
        if solve_instance(inst).is_sat:
            continue
        core_vars = set(extract_mus(inst).core_vars)
        exact = set(spine(inst, d).variables)
        assert core_vars <= exact, s
        checked += 1
        if checked >= 10:
            break
    assert checked >= 6


def test_spine_report_small_satisfiable(dist2sat):
    # a satisfiable instance can still have spine variables
    inst = two_cnf_instance([(1, 2), (-1, 2), (1, -2)])
    rep = spine(inst, dist2sat)
    assert rep.variables == (1, 2)
    for v, cert in rep.certificates.items():
        assert verify_certificate(inst, v, cert)


def test_mus_lower_bound_on_sat_instance(dist2sat):
    rep = spine_mus_lower_bound(two_cnf_instance([(1, 2)]))
    assert rep.variables == () and rep.fraction == 0.0
