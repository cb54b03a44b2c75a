import itertools
import math
import random
from fractions import Fraction

import mpmath
import pytest

from conftest import one_in_k_gadget
from satphase.errors import UsageError
from satphase.hypergraph import (
    Hypergraph,
    SparsityResult,
    c_star,
    c_star_witness,
    cs_sparsity_params,
    deficiency,
    densest_lower_bound,
    format_12sig,
    is_xy_sparse,
    max_deficiency,
    private_variable_ordering,
    verify_private_ordering,
)
from satphase.instances import AppliedConstraint, Instance, gen_ksat, gen_molloy
from satphase.templates import ConstraintDistribution, clause_templates, template_from_name


def inst_from_edges(n, edges, k=None):
    """Edges as generic OR-clause applications (tables are irrelevant to
    the hypergraph quantities)."""
    temps = {}
    cons = []
    for e in edges:
        kk = len(e)
        if kk not in temps:
            temps[kk] = clause_templates(kk)[0]
    tid = {kk: i for i, kk in enumerate(sorted(temps))}
    templates = {tid[kk]: temps[kk] for kk in temps}
    for e in edges:
        cons.append(AppliedConstraint(tid[len(e)], tuple(e)))
    return Instance(n, templates, cons)


# --- independent oracles -----------------------------------------------------


def oracle_c_star(inst):
    best = Fraction(0)
    m = len(inst.constraints)
    for r in range(1, m + 1):
        for sub in itertools.combinations(range(m), r):
            vs = {v for i in sub for v in inst.constraints[i].vars}
            best = max(best, Fraction(len(sub), len(vs)))
    return best


def oracle_max_deficiency(inst, r):
    best = None
    m = len(inst.constraints)
    for size in range(1, m + 1):
        for sub in itertools.combinations(range(m), size):
            vs = {v for i in sub for v in inst.constraints[i].vars}
            val = r * len(sub) - len(vs)
            best = val if best is None else max(best, val)
    return best


def oracle_xy_sparse(h, x, y):
    s_max = int(Fraction(x) * h.n)
    for size in range(1, s_max + 1):
        for sub in itertools.combinations(range(1, h.n + 1), size):
            s = set(sub)
            cnt = sum(1 for e in h.edges if set(e) <= s)
            if cnt > Fraction(y) * size:
                return False
    return True


# --- c*, deficiency ----------------------------------------------------------


def test_c_star_single_clause():
    inst = inst_from_edges(5, [(1, 2, 3)])
    assert c_star(inst) == Fraction(1, 3)


def test_c_star_four_clause_mu():
    inst = inst_from_edges(2, [(1, 2)] * 4)
    assert c_star(inst) == 2


def test_c_star_rejects_empty_and_big():
    with pytest.raises(UsageError):
        c_star(inst_from_edges(3, []))
    with pytest.raises(UsageError):
        c_star(inst_from_edges(50, [(i + 1, i + 2, i + 3) for i in range(21)]))


def test_one_in_k_gadget_ratio():
    # reconstructed gadget: densest subformula is the whole formula,
    # 4 constraints over 2 + 4(k-2) variables
    for k in (3, 4):
        g = one_in_k_gadget(k)
        whole = Fraction(4, 2 + 4 * (k - 2))
        got = c_star(g)
        assert got == whole == Fraction(2, 2 * k - 3)
        # the nominal whole-formula ratio 1/(k-1) claimed for the original
        # indexing differs from what the reconstruction realises
        assert got != Fraction(1, k - 1)


def test_deficiency_single_k_clause():
    for k in (2, 3, 4, 5):
        inst = inst_from_edges(k, [tuple(range(1, k + 1))])
        assert deficiency(inst, 2 * k - 3) == k - 3


def test_max_deficiency_four_clause():
    inst = inst_from_edges(2, [(1, 2)] * 4)
    assert max_deficiency(inst, 1) == 2


def test_against_subset_oracles():
    rng = random.Random(11)
    for trial in range(60):
        n = rng.randrange(4, 9)
        m = rng.randrange(1, 9)
        edges = []
        for _ in range(m):
            size = rng.choice((2, 3))
            edges.append(tuple(rng.sample(range(1, n + 1), size)))
        inst = inst_from_edges(n, edges)
        assert c_star(inst) == oracle_c_star(inst)
        for r in (Fraction(1), Fraction(3, 2), Fraction(2), Fraction(5, 3)):
            assert max_deficiency(inst, r) == oracle_max_deficiency(inst, r)


def test_deficiency_identity():
    rng = random.Random(2)
    for s in range(40):
        inst = gen_ksat(3, 10, rng.randrange(1, 16), seed=s)
        for r in (Fraction(1, 2), Fraction(1), Fraction(3, 2), Fraction(3)):
            assert (max_deficiency(inst, r) >= 0) == (c_star(inst) >= 1 / r)


def test_densest_lower_bound_is_bound():
    rng = random.Random(4)
    for s in range(30):
        inst = gen_ksat(3, 10, rng.randrange(1, 14), seed=s)
        assert densest_lower_bound(inst) <= c_star(inst)


def test_c_star_witness():
    inst = inst_from_edges(4, [(1, 2), (1, 2), (3, 4)])
    ratio, idx = c_star_witness(inst)
    assert ratio == 1
    assert idx == (0, 1)


# --- sparsity ----------------------------------------------------------------


def test_sparse_edgeless():
    h = Hypergraph(6, ())
    assert is_xy_sparse(h, Fraction(1), Fraction(1, 100)).sparse is True


def test_sparse_boundary_inclusive():
    h = Hypergraph(6, ((1, 2, 3),))
    at = is_xy_sparse(h, Fraction(1, 2), Fraction(1, 3))
    assert at.sparse is True  # 1 edge == y*s at s=3 is allowed
    below = is_xy_sparse(h, Fraction(1, 2), Fraction(32, 100))
    assert below.sparse is False
    assert below.witness == (1, 2, 3)


def test_sparse_matches_oracle():
    rng = random.Random(9)
    for _ in range(40):
        n = rng.randrange(4, 8)
        m = rng.randrange(0, 7)
        edges = tuple(tuple(sorted(rng.sample(range(1, n + 1), 2))) for _ in range(m))
        h = Hypergraph(n, edges)
        for x, y in ((Fraction(1), Fraction(1, 2)), (Fraction(1, 2), Fraction(2, 3)),
                     (Fraction(3, 4), Fraction(1))):
            got = is_xy_sparse(h, x, y)
            assert got.sparse == oracle_xy_sparse(h, x, y)
            if got.sparse is False:
                s = set(got.witness)
                cnt = sum(1 for e in h.edges if set(e) <= s)
                assert len(s) <= x * n and cnt > y * len(s)


def test_sparse_heuristic_mode():
    edges = tuple((i + 1, i + 2) for i in range(30)) + ((1, 2), (1, 2), (1, 2))
    h = Hypergraph(40, edges)
    res = is_xy_sparse(h, Fraction(1, 2), Fraction(1, 10))
    assert res.sparse in (False, None)  # heuristic may give a witness or punt
    dense_core = Hypergraph(30, ((1, 2),) * 9)
    res = is_xy_sparse(dense_core, Fraction(1), Fraction(2))
    assert isinstance(res, SparsityResult)


def test_cs_sparsity_params_reference_point():
    p = cs_sparsity_params(3, 1.0, Fraction(1))
    assert p.epsilon == pytest.approx(0.5, rel=1e-12)
    assert p.x == pytest.approx(1 / (4 * math.e ** 4), rel=1e-12)
    assert format_12sig(p.x) == "0.00457890972218"


def test_cs_sparsity_hypothesis_boundary():
    with pytest.raises(UsageError) as e:
        cs_sparsity_params(3, 1.0, Fraction(1, 2))
    assert "(k-1)*y" in str(e.value)
    with pytest.raises(UsageError):
        cs_sparsity_params(3, 0.0, Fraction(1))


def test_cs_sparsity_monotone_in_c():
    xs = [cs_sparsity_params(3, c, Fraction(1)).x for c in (0.5, 1.0, 2.0, 4.0)]
    assert all(a > b for a, b in zip(xs, xs[1:]))


def test_cs_sparsity_extended_precision_oracle():
    # independent high-precision evaluation on a small grid
    rng = random.Random(1)
    for _ in range(10):
        k = rng.choice((3, 4, 5))
        c = rng.choice((0.5, 1.0, 1.7, 3.0))
        y = Fraction(rng.randrange(6, 20), 10)
        if (k - 1) * y <= 1:
            continue
        p = cs_sparsity_params(k, c, y)
        with mpmath.workdps(80):
            ym = mpmath.mpf(y.numerator) / y.denominator
            eps = ym - mpmath.mpf(1) / (k - 1)
            x = ((1 / (2 * mpmath.e)) * (ym / (c * mpmath.e)) ** ym) ** (1 / eps)
            assert abs(p.x - float(x)) <= 1e-9 * abs(float(x))


# --- private-variable peeling ------------------------------------------------


def test_ordering_disjoint_clauses():
    inst = inst_from_edges(6, [(1, 2, 3), (4, 5, 6)])
    order, stuck = private_variable_ordering(inst)
    assert stuck == ()
    assert verify_private_ordering(inst, order)


def test_ordering_vacuous_for_k2():
    inst = inst_from_edges(2, [(1, 2)] * 4)
    order, stuck = private_variable_ordering(inst)
    assert order is not None and verify_private_ordering(inst, order)


def test_ordering_chain():
    inst = inst_from_edges(7, [(1, 2, 3), (3, 4, 5), (5, 6, 7)])
    order, stuck = private_variable_ordering(inst)
    assert order is not None
    assert verify_private_ordering(inst, order)


def test_ordering_blocks_on_dense_core():
    # every variable in two constraints: no constraint has a private var
    inst = inst_from_edges(3, [(1, 2, 3), (1, 2, 3)])
    order, stuck = private_variable_ordering(inst)
    assert order is None
    assert set(stuck) == {0, 1}


def test_ordering_guaranteed_under_density_hypothesis():
    # when every subformula stays below ratio 2/(2k-3), peeling succeeds
    rng = random.Random(21)
    found = 0
    for s in range(80):
        inst = gen_ksat(3, 9, rng.randrange(1, 7), seed=s)
        if c_star(inst) < Fraction(2, 2 * 3 - 3):
            order, _ = private_variable_ordering(inst)
            assert order is not None
            assert verify_private_ordering(inst, order)
            found += 1
    assert found >= 30
