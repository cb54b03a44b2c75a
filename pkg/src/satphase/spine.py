"""Order parameters (spine, literal spine, backbone) and minimal
unsatisfiable cores.

A variable x is in the spine of an instance when some satisfiable
subformula becomes unsatisfiable after adding one more constraint of
the model that mentions x.  Exact computation enumerates, over the full
assignment space, the maximal satisfiable subformulas (every satisfiable
subformula lies inside one, and adding a constraint keeps unsatisfiable
supersets unsatisfiable, so checking maximal ones is exact) and then
scans every candidate constraint application.  The deletion-extracted
minimal unsatisfiable core gives the scalable lower bound used by the
sweep harness: each core variable is a spine member by construction.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels
from .errors import UsageError
from .instances import (
    AppliedConstraint,
    Cnf,
    Instance,
    constraint_clause_blocks,
    to_cnf,
)
from .solver import (
    SAT,
    cnf_arrays,
    dpll_solve,
    solve_instance,
    xor_system,
)
from .templates import ConstraintDistribution, ConstraintTemplate

EXACT_MAX_VARS = 24       # full assignment-space machinery
EXACT_SAT_MAX_VARS = 60   # satisfiable instances: per-candidate solver sweep
_MASK_BYTES_LIMIT = 1_500_000_000


@dataclass(frozen=True)
class SpineCertificate:
    """Satisfiable subformula (constraint positions) plus the offending
    constraint application that makes it unsatisfiable."""

    xi: tuple[int, ...]
    template: ConstraintTemplate
    vars: tuple[int, ...]


@dataclass
class SpineReport:
    n: int
    variables: tuple[int, ...]
    fraction: float
    method: str  # "exact-definition" | "mus-lower-bound"
    certificates: dict[int, SpineCertificate]


@dataclass
class MusReport:
    core: tuple[int, ...]       # constraint positions in the original instance
    core_vars: tuple[int, ...]
    sizes: tuple[int, int]      # (|core|, |core_vars|)


# ---------------------------------------------------------------------------
# assignment-space machinery


def _items_from_instance(inst: Instance) -> list[tuple[tuple[int, ...], int]]:
    return [
        (c.vars, inst.templates[c.template_id].table) for c in inst.constraints
    ]


def _clause_item(cl: tuple[int, ...]) -> tuple[tuple[int, ...], int]:
    vars_ = tuple(abs(l) for l in cl)
    k = len(cl)
    falsifier = sum(1 << i for i, l in enumerate(cl) if l < 0)
    table = ((1 << (1 << k)) - 1) ^ (1 << falsifier)
    return vars_, table


def _table_bits(table: int, k: int) -> np.ndarray:
    return np.array([(table >> a) & 1 for a in range(1 << k)], dtype=bool)


def _sat_column(codes: np.ndarray, vars_: tuple[int, ...], table: int) -> np.ndarray:
    idx = np.zeros(codes.shape, dtype=np.int64)
    for j, v in enumerate(vars_):
        idx |= ((codes >> (v - 1)) & 1) << j
    return _table_bits(table, len(vars_))[idx]


def _check_space(n: int, words: int) -> None:
    if n > EXACT_MAX_VARS:
        raise UsageError(
            f"assignment-space analysis capped at n <= {EXACT_MAX_VARS}, got {n}"
        )
    if (1 << n) * words * 8 > _MASK_BYTES_LIMIT:
        raise UsageError("instance too large for assignment-space analysis")


def satisfied_masks(items, n: int) -> np.ndarray:
    """(2^n, ceil(M/64)) uint64: bit j of row a set iff assignment a
    satisfies constraint j."""
    m = len(items)
    words = max(1, (m + 63) // 64)
    _check_space(n, words)
    masks = np.zeros((1 << n, words), dtype=np.uint64)
    chunk = 1 << 20
    for lo in range(0, 1 << n, chunk):
        hi = min(lo + chunk, 1 << n)
        codes = np.arange(lo, hi, dtype=np.int64)
        for j, (vars_, table) in enumerate(items):
            col = _sat_column(codes, vars_, table)
            masks[lo:hi, j >> 6] |= col.astype(np.uint64) << np.uint64(j & 63)
    return masks


def models_of_items(items, n: int) -> np.ndarray:
    """Codes of assignments satisfying every item, ascending."""
    _check_space(n, 1)
    out = []
    chunk = 1 << 20
    for lo in range(0, 1 << n, chunk):
        hi = min(lo + chunk, 1 << n)
        codes = np.arange(lo, hi, dtype=np.int64)
        acc = np.ones(hi - lo, dtype=bool)
        for vars_, table in items:
            acc &= _sat_column(codes, vars_, table)
        out.append(codes[acc])
    return np.concatenate(out) if out else np.zeros(0, np.int64)


def maximal_rows(masks_unique: np.ndarray) -> np.ndarray:
    """Rows not strictly contained (bitwise) in any other row."""
    pc = np.bitwise_count(masks_unique).sum(axis=1)
    order = np.argsort(-pc, kind="stable")
    kept: list[int] = []
    for idx in order:
        row = masks_unique[idx]
        if kept:
            sup = masks_unique[kept]
            if bool(np.any(np.all((row & ~sup) == 0, axis=1))):
                continue
        kept.append(int(idx))
    return masks_unique[sorted(kept)]


def _mask_indices(row: np.ndarray) -> tuple[int, ...]:
    out = []
    for w, word in enumerate(row):
        word = int(word)
        for b in range(64):
            if (word >> b) & 1:
                out.append(64 * w + b)
    return tuple(out)


# ---------------------------------------------------------------------------
# candidate constraint applications


def permuted_tables(d: ConstraintDistribution) -> dict[int, tuple[ConstraintTemplate, tuple[int, ...]]]:
    """Distinct truth tables of support templates applied to every slot
    permutation, re-indexed over an ascending variable subset.

    Key: table over sorted-subset coordinates.  Value: a representative
    (template, perm) with perm[i] = sorted position of tuple slot i+1.
    """
    k = d.arity
    out: dict[int, tuple[ConstraintTemplate, tuple[int, ...]]] = {}
    for t in d.templates:
        for perm in itertools.permutations(range(k)):
            table = 0
            for code in range(1 << k):
                tuple_code = 0
                for i in range(k):
                    tuple_code |= ((code >> perm[i]) & 1) << i
                if (t.table >> tuple_code) & 1:
                    table |= 1 << code
            out.setdefault(table, (t, perm))
    return out


def _candidate_vars(subset: tuple[int, ...], perm: tuple[int, ...]) -> tuple[int, ...]:
    return tuple(subset[p] for p in perm)


def _presence_per_subset(models: np.ndarray, subsets: np.ndarray, k: int) -> list[int]:
    if k <= 6:
        return [int(x) for x in _kernels.subset_presence(models, subsets, k)]
    out = []
    for s in range(subsets.shape[0]):
        codes = np.zeros(models.shape, dtype=np.int64)
        for j in range(k):
            codes |= ((models >> (int(subsets[s, j]) - 1)) & 1) << j
        mask = 0
        for c in np.unique(codes):
            mask |= 1 << int(c)
        out.append(mask)
    return out


def _sweep_mss(
    models: np.ndarray,
    xi: tuple[int, ...],
    subsets: np.ndarray,
    tables: dict[int, tuple[ConstraintTemplate, tuple[int, ...]]],
    k: int,
    certificates: dict[int, SpineCertificate],
    pending: set[int],
) -> None:
    """Certify every variable of a subset whose presence mask some
    candidate table annihilates; updates certificates/pending in place."""
    if subsets.size == 0:
        return
    presence = _presence_per_subset(models, subsets, k)
    for s, pres in enumerate(presence):
        subset = tuple(int(v) for v in subsets[s])
        if not any(v in pending for v in subset):
            continue
        for table, (tmpl, perm) in tables.items():
            if table & pres == 0:
                cert = SpineCertificate(xi, tmpl, _candidate_vars(subset, perm))
                for v in subset:
                    if v in pending:
                        certificates[v] = cert
                        pending.discard(v)
                break


# ---------------------------------------------------------------------------
# spine


def spine(inst: Instance, d: ConstraintDistribution, mode: str = "exact") -> SpineReport:
    """Spine of an instance under the model's constraint support.

    ``exact`` quantifies candidate constraints over every support
    template applied to every ordered tuple that meets the instance's
    variables; ``mus`` reports the variables of the deletion-extracted
    minimal unsatisfiable core (a lower bound on the spine).
    """
    if mode == "mus":
        return spine_mus_lower_bound(inst)
    if mode != "exact":
        raise UsageError(f"unknown spine mode {mode!r}")
    return _spine_exact(inst, d)


def spine_mus_lower_bound(inst: Instance) -> SpineReport:
    res = solve_instance(inst, heuristic="moms")
    if res.is_sat:
        return SpineReport(inst.n, (), 0.0, "mus-lower-bound", {})
    rep = extract_mus(inst, _presolved=True)
    certs: dict[int, SpineCertificate] = {}
    core_set = set(rep.core)
    for v in rep.core_vars:
        holder = next(
            i for i in rep.core if v in inst.constraints[i].vars
        )
        xi = tuple(i for i in rep.core if i != holder)
        c = inst.constraints[holder]
        certs[v] = SpineCertificate(xi, inst.templates[c.template_id], c.vars)
    frac = len(rep.core_vars) / inst.n if inst.n else 0.0
    return SpineReport(inst.n, rep.core_vars, frac, "mus-lower-bound", certs)


def _spine_exact(inst: Instance, d: ConstraintDistribution) -> SpineReport:
    k = d.arity
    n = inst.n
    if n < k:
        return SpineReport(n, (), 0.0, "exact-definition", {})
    sat = solve_instance(inst, heuristic="moms").is_sat
    if n <= EXACT_MAX_VARS:
        return _spine_exact_bitset(inst, d, sat)
    if sat and n <= EXACT_SAT_MAX_VARS:
        return _spine_exact_solver(inst, d)
    if sat:
        raise UsageError(
            f"exact spine capped at n <= {EXACT_SAT_MAX_VARS}; use mode='mus'"
        )
    raise UsageError(
        f"exact spine for unsatisfiable instances capped at n <= {EXACT_MAX_VARS};"
        " use mode='mus'"
    )


def _subsets_array(n: int, k: int) -> np.ndarray:
    combos = list(itertools.combinations(range(1, n + 1), k))
    return np.array(combos, dtype=np.int64).reshape(len(combos), k)


def _spine_exact_bitset(inst: Instance, d: ConstraintDistribution, sat: bool) -> SpineReport:
    k = d.arity
    n = inst.n
    items = _items_from_instance(inst)
    tables = permuted_tables(d)
    subsets = _subsets_array(n, k)
    certificates: dict[int, SpineCertificate] = {}
    pending = set(range(1, n + 1))
    if sat:
        models = models_of_items(items, n)
        xi = tuple(range(len(inst.constraints)))
        _sweep_mss(models, xi, subsets, tables, k, certificates, pending)
    else:
        masks = satisfied_masks(items, n)
        uniq = np.unique(masks, axis=0)
        for row in maximal_rows(uniq):
            if not pending:
                break
            beta = row[np.newaxis, :]
            sel = np.all((masks & beta) == beta, axis=1)
            models = np.nonzero(sel)[0].astype(np.int64)
            _sweep_mss(models, _mask_indices(row), subsets, tables, k,
                       certificates, pending)
    variables = tuple(sorted(certificates))
    frac = len(variables) / n if n else 0.0
    return SpineReport(n, variables, frac, "exact-definition", certificates)


def _spine_exact_solver(inst: Instance, d: ConstraintDistribution) -> SpineReport:
    """Satisfiable instances above the bitset cap: the whole instance is
    the unique maximal satisfiable subformula, so one solver call per
    candidate application decides membership."""
    k = d.arity
    n = inst.n
    base = to_cnf(inst).clauses
    tables = permuted_tables(d)
    certificates: dict[int, SpineCertificate] = {}
    pending = set(range(1, n + 1))
    xi = tuple(range(len(inst.constraints)))
    for subset in itertools.combinations(range(1, n + 1), k):
        if not any(v in pending for v in subset):
            continue
        for table, (tmpl, perm) in tables.items():
            extra = [
                tuple(-subset[j] if (a >> j) & 1 else subset[j] for j in range(k))
                for a in range(1 << k)
                if not (table >> a) & 1
            ]
            res = dpll_solve(Cnf(n, base + extra), heuristic="moms")
            if not res.is_sat:
                cert = SpineCertificate(xi, tmpl, _candidate_vars(subset, perm))
                for v in subset:
                    if v in pending:
                        certificates[v] = cert
                        pending.discard(v)
                break
    variables = tuple(sorted(certificates))
    return SpineReport(n, variables, len(variables) / n, "exact-definition",
                       certificates)


def verify_certificate(inst: Instance, var: int, cert: SpineCertificate) -> bool:
    """Independent re-check: xi satisfiable, xi plus the offending
    constraint unsatisfiable, and the constraint mentions the variable."""
    if var not in cert.vars:
        return False
    sub = inst.subset(cert.xi)
    if not solve_instance(sub, method="dpll", heuristic="moms").is_sat:
        return False
    tid = max(sub.templates) + 1
    sub.templates = dict(sub.templates)
    sub.templates[tid] = cert.template
    sub.constraints = list(sub.constraints) + [AppliedConstraint(tid, cert.vars)]
    return not solve_instance(sub, method="dpll", heuristic="moms").is_sat


# ---------------------------------------------------------------------------
# literal spine and backbone


def spine_literals(f: Cnf) -> tuple[int, ...]:
    """Literals x with a satisfiable subset of clauses that x's negation
    contradicts: exactly the literals fixed true by some maximal
    satisfiable subset of f."""
    items = [_clause_item(cl) for cl in f.clauses]
    res = dpll_solve(f, heuristic="moms")
    if f.n <= EXACT_MAX_VARS:
        out: set[int] = set()
        if res.is_sat:
            models = models_of_items(items, f.n)
            out |= _fixed_literals(models, f.n)
        else:
            masks = satisfied_masks(items, f.n)
            uniq = np.unique(masks, axis=0)
            for row in maximal_rows(uniq):
                beta = row[np.newaxis, :]
                sel = np.all((masks & beta) == beta, axis=1)
                models = np.nonzero(sel)[0].astype(np.int64)
                out |= _fixed_literals(models, f.n)
        return tuple(sorted(out, key=lambda l: (abs(l), l < 0)))
    if not res.is_sat:
        raise UsageError(
            f"literal spine of unsatisfiable formulas capped at n <= {EXACT_MAX_VARS}"
        )
    if f.n > EXACT_SAT_MAX_VARS:
        raise UsageError(f"literal spine capped at n <= {EXACT_SAT_MAX_VARS}")
    out = set()
    for v in range(1, f.n + 1):
        for lit in (v, -v):
            probe = Cnf(f.n, f.clauses + [(-lit,)])
            if not dpll_solve(probe, heuristic="moms").is_sat:
                out.add(lit)
    return tuple(sorted(out, key=lambda l: (abs(l), l < 0)))


def _fixed_literals(models: np.ndarray, n: int) -> set[int]:
    if models.size == 0:
        return set()
    out: set[int] = set()
    for v in range(1, n + 1):
        bits = (models >> (v - 1)) & 1
        if bits.all():
            out.add(v)
        elif not bits.any():
            out.add(-v)
    return out


def backbone(f: Cnf, mode: str = "auto") -> tuple[int, ...]:
    """Literals true in every satisfying assignment of a satisfiable f.

    ``enumeration`` walks all models (n <= 24); ``probing`` adds the
    negation and asks the solver, one literal at a time."""
    res = dpll_solve(f, heuristic="moms")
    if not res.is_sat:
        raise UsageError("backbone is defined here for satisfiable formulas only")
    if mode == "auto":
        mode = "enumeration" if f.n <= EXACT_MAX_VARS else "probing"
    if mode == "enumeration":
        if f.n > EXACT_MAX_VARS:
            raise UsageError(f"enumeration backbone capped at n <= {EXACT_MAX_VARS}")
        items = [_clause_item(cl) for cl in f.clauses]
        models = models_of_items(items, f.n)
        fixed = _fixed_literals(models, f.n)
        return tuple(sorted(fixed, key=lambda l: (abs(l), l < 0)))
    if mode != "probing":
        raise UsageError(f"unknown backbone mode {mode!r}")
    out = []
    for v in range(1, f.n + 1):
        for lit in (v, -v):
            probe = Cnf(f.n, f.clauses + [(-lit,)])
            if not dpll_solve(probe, heuristic="moms").is_sat:
                out.append(lit)
                break
    return tuple(sorted(out, key=lambda l: (abs(l), l < 0)))


# ---------------------------------------------------------------------------
# minimal unsatisfiable cores


def _unsat_checker(inst: Instance):
    """Callable deciding unsatisfiability of a constraint-position subset."""
    if inst.all_parity:
        rows, rhs = xor_system(inst)

        def check(keep: list[int]) -> bool:
            sub_rows = rows[keep].copy()
            sub_rhs = rhs[keep].copy()
            status, _, _, _ = _kernels.gf2_solve(sub_rows, sub_rhs, inst.n)
            return status == 0

        return check

    blocks = constraint_clause_blocks(inst)

    def check(keep: list[int]) -> bool:
        clauses = [cl for i in keep for cl in blocks[i]]
        lits, starts = cnf_arrays(Cnf(inst.n, clauses))
        status, _, _, _ = _kernels.dpll_search(lits, starts, inst.n, -1, 2)
        return status == 0

    return check


def extract_mus(inst: Instance, _presolved: bool = False) -> MusReport:
    """Deletion-based core: scan constraints in index order, dropping
    each whose removal keeps the rest unsatisfiable.  Deterministic."""
    check = _unsat_checker(inst)
    m = len(inst.constraints)
    if not _presolved and solve_instance(inst, heuristic="moms").is_sat:
        raise UsageError("satisfiable instance has no unsatisfiable core")
    if _presolved and not check(list(range(m))):
        raise UsageError("satisfiable instance has no unsatisfiable core")
    kept = list(range(m))
    for i in range(m):
        trial = [j for j in kept if j != i]
        if check(trial):
            kept = trial
    core_vars = tuple(sorted({v for i in kept for v in inst.constraints[i].vars}))
    return MusReport(tuple(kept), core_vars, (len(kept), len(core_vars)))


def is_minimally_unsat(inst: Instance) -> bool:
    """Unsatisfiable, and deleting any single constraint is satisfiable."""
    check = _unsat_checker(inst)
    m = len(inst.constraints)
    if m == 0 or not check(list(range(m))):
        return False
    for i in range(m):
        if check([j for j in range(m) if j != i]):
            return False
    return True
