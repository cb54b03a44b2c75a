"""Shared fixtures: distributions, canonical templates, gadget builders."""

from __future__ import annotations

import pytest

from satphase.instances import AppliedConstraint, Instance
from satphase.templates import (
    ConstraintDistribution,
    ConstraintTemplate,
    clause_templates,
    template_from_name,
    xor_template,
)


@pytest.fixture(scope="session")
def dist3sat():
    return ConstraintDistribution.uniform(clause_templates(3))


@pytest.fixture(scope="session")
def dist2sat():
    return ConstraintDistribution.uniform(clause_templates(2))


@pytest.fixture(scope="session")
def dist3xor():
    return ConstraintDistribution.uniform([xor_template(3, 0), xor_template(3, 1)])


def signed_one_in_k(k: int, neg_mask: int) -> ConstraintTemplate:
    """Exactly-one constraint after flipping the slots in neg_mask."""
    table = 0
    for a in range(1 << k):
        if bin(a ^ neg_mask).count("1") == 1:
            table |= 1 << a
    return ConstraintTemplate(k, table, f"ONE_IN_{k}~{neg_mask:0{k}b}")


def one_in_k_gadget(k: int) -> Instance:
    """Four exactly-one constraints sharing variables 1 and 2 (the paper
    pair), each with k-2 private middles; the four sign patterns on the
    shared pair are all distinct, which forbids every joint value."""
    pats = [(0, 0), (0, 1), (1, 1), (1, 0)]  # (sign of var1, sign of var2)
    templates = {}
    constraints = []
    n = 2 + 4 * (k - 2)
    next_private = 3
    for i, (s1, s2) in enumerate(pats):
        neg_mask = (s1 << 0) | (s2 << (k - 1))
        templates[i] = signed_one_in_k(k, neg_mask)
        middles = tuple(range(next_private, next_private + (k - 2)))
        next_private += k - 2
        constraints.append(AppliedConstraint(i, (1,) + middles + (2,)))
    return Instance(n, templates, constraints)


def unit_pair_distribution() -> ConstraintDistribution:
    """Arity-3 templates forcing the first slot true resp. false; the
    canonical coarse unit-implicate model."""
    force_true = ConstraintTemplate(3, 0xAA, "FORCE1_TRUE")
    force_false = ConstraintTemplate(3, 0x55, "FORCE1_FALSE")
    return ConstraintDistribution.uniform([force_true, force_false])


def xor_pair_free_var() -> ConstraintDistribution:
    """x1 != x2 with a free third slot; the canonical coarse 2-XOR model."""
    table = 0
    for a in range(8):
        if ((a >> 0) & 1) != ((a >> 1) & 1):
            table |= 1 << a
    return ConstraintDistribution.uniform(
        [ConstraintTemplate(3, table, "NEQ12_FREE3")]
    )
