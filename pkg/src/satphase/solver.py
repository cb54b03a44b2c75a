"""Satisfiability deciders: instrumented DPLL, GF(2) elimination for
parity instances, and an exhaustive oracle for desk-scale verification.

DPLL tree size (branch nodes; unit propagations are free) is the
reported search-cost statistic.  With the default lowest-index branch
rule it is a deterministic function of the CNF, so exact regression
tests are possible; the max-occurrence rule is available for runs that
only need the SAT/UNSAT answer faster.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels
from .errors import UsageError
from .instances import Cnf, Instance, to_cnf
from .templates import eval_template

SAT = "SAT"
UNSAT = "UNSAT"
BUDGET_EXCEEDED = "BUDGET_EXCEEDED"

BRUTE_MAX_VARS = 24

_HEURISTICS = {"index": 0, "maxocc": 1, "moms": 2}


@dataclass
class SolveResult:
    status: str
    witness: Optional[np.ndarray]  # int8[n], values of variables 1..n
    tree_size: int
    max_depth: int
    method: str
    ops: int = 0  # bit-operation count (gauss method only)

    @property
    def is_sat(self) -> bool:
        return self.status == SAT

    def witness_str(self) -> str:
        if self.witness is None:
            return ""
        return "".join(str(int(b)) for b in self.witness)


def cnf_arrays(f: Cnf) -> tuple[np.ndarray, np.ndarray]:
    """Flatten clauses into (literals, clause start offsets)."""
    starts = np.zeros(len(f.clauses) + 1, np.int32)
    for i, cl in enumerate(f.clauses):
        starts[i + 1] = starts[i] + len(cl)
    lits = np.zeros(int(starts[-1]), np.int32)
    pos = 0
    for cl in f.clauses:
        for l in cl:
            lits[pos] = l
            pos += 1
    return lits, starts


def dpll_solve(
    f: Cnf,
    budget: Optional[int] = None,
    heuristic: str = "index",
) -> SolveResult:
    """Complete DPLL; budget exhaustion is a status, not an error."""
    if heuristic not in _HEURISTICS:
        raise UsageError(f"unknown heuristic {heuristic!r}")
    lits, starts = cnf_arrays(f)
    b = -1 if budget is None else int(budget)
    status, assign, tree, depth = _kernels.dpll_search(
        lits, starts, f.n, b, _HEURISTICS[heuristic]
    )
    witness = np.array(assign[1:], dtype=np.int8) if status == 1 else None
    return SolveResult(
        (UNSAT, SAT, BUDGET_EXCEEDED)[status], witness, int(tree), int(depth), "dpll"
    )


def xor_system(inst: Instance) -> tuple[np.ndarray, np.ndarray]:
    """Bit-packed GF(2) system (rows, rhs) of an all-parity instance."""
    W = max(1, (inst.n + 63) // 64)
    rows = np.zeros((len(inst.constraints), W), np.uint64)
    rhs = np.zeros(len(inst.constraints), np.uint8)
    for i, c in enumerate(inst.constraints):
        t = inst.templates[c.template_id]
        if not t.is_parity:
            raise UsageError(
                f"constraint {i} uses non-parity template {t.label()}"
            )
        for v in c.vars:
            rows[i, (v - 1) >> 6] ^= np.uint64(1) << np.uint64((v - 1) & 63)
        rhs[i] = t.parity_rhs
    return rows, rhs


def gauss_solve_xor(inst: Instance) -> SolveResult:
    """Decide an all-parity instance by Gaussian elimination over GF(2).

    Free variables are set to 0 in the witness; tree_size is 0 by
    convention and ops counts logical bit operations performed."""
    rows, rhs = xor_system(inst)
    status, _rank, ops, x = _kernels.gf2_solve(rows, rhs, inst.n)
    witness = np.array(x, dtype=np.int8) if status == 1 else None
    return SolveResult((UNSAT, SAT)[status], witness, 0, 0, "gauss", ops=int(ops))


def brute_force_solve(f: Cnf) -> SolveResult:
    """Exhaustive scan of all 2^n assignments in ascending code order
    (bit i of the code = variable i+1); n <= 24 enforced."""
    if f.n > BRUTE_MAX_VARS:
        raise UsageError(f"brute force capped at n <= {BRUTE_MAX_VARS}, got {f.n}")
    lits, starts = cnf_arrays(f)
    code = _kernels.brute_first_sat(lits, starts, f.n)
    if code < 0:
        return SolveResult(UNSAT, None, 0, 0, "brute")
    witness = np.array(
        [(int(code) >> i) & 1 for i in range(f.n)], dtype=np.int8
    )
    return SolveResult(SAT, witness, 0, 0, "brute")


def solve_instance(
    inst: Instance,
    method: str = "auto",
    budget: Optional[int] = None,
    heuristic: str = "index",
) -> SolveResult:
    """Dispatch: gauss for all-parity instances under 'auto', else DPLL
    on the CNF expansion."""
    if method == "auto":
        method = "gauss" if inst.all_parity and inst.constraints else "dpll"
    if method == "gauss":
        return gauss_solve_xor(inst)
    if method == "dpll":
        return dpll_solve(to_cnf(inst), budget=budget, heuristic=heuristic)
    if method == "brute":
        return brute_force_solve(to_cnf(inst))
    raise UsageError(f"unknown method {method!r}")


def witness_satisfies_cnf(f: Cnf, witness: np.ndarray) -> bool:
    for cl in f.clauses:
        if not any(
            (l > 0 and witness[l - 1]) or (l < 0 and not witness[-l - 1])
            for l in cl
        ):
            return False
    return True


def witness_satisfies_instance(inst: Instance, witness: np.ndarray) -> bool:
    """Check a witness against the original constraints via template
    evaluation, not the CNF expansion."""
    for c in inst.constraints:
        t = inst.templates[c.template_id]
        bits = [int(witness[v - 1]) for v in c.vars]
        if not eval_template(t, bits):
            return False
    return True


def is_unsat(inst: Instance, heuristic: str = "moms") -> bool:
    """Exact SAT/UNSAT answer, fastest available method."""
    return not solve_instance(inst, method="auto", heuristic=heuristic).is_sat
