"""Structural quantities of formula hypergraphs: densest-subformula
ratio, r-deficiency, (x,y)-sparsity with witnesses, the random-hypergraph
sparsity bound, and private-variable peeling orders.

Exact computations enumerate subformulas and are capped at desk scale;
a degree-peeling heuristic gives bounds (never verdicts) beyond the cap.
All ratio arithmetic is exact rational.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

import mpmath
import numpy as np

from . import _kernels
from .errors import UsageError
from .instances import Instance

SUBSET_ENUM_MAX = 20      # constraints, for c*/deficiency maxima
SPARSE_ENUM_MAX = 24      # vertices, for exact (x,y)-sparsity
_INT64_GUARD = 1 << 40

Rational = Union[Fraction, int, str, float]


def as_fraction(x: Rational) -> Fraction:
    """Exact conversion; floats convert by their exact binary value."""
    if isinstance(x, Fraction):
        return x
    return Fraction(x)


@dataclass(frozen=True)
class Hypergraph:
    n: int
    edges: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        for e in self.edges:
            if len(set(e)) != len(e):
                raise UsageError(f"edge {e} repeats a vertex")
            if any(not 1 <= v <= self.n for v in e):
                raise UsageError(f"edge {e} leaves 1..{self.n}")

    @classmethod
    def from_instance(cls, inst: Instance) -> "Hypergraph":
        return cls(inst.n, tuple(tuple(sorted(c.vars)) for c in inst.constraints))


@dataclass(frozen=True)
class SparsityParams:
    k: int
    c: float
    y: float
    epsilon: float
    x: float


@dataclass(frozen=True)
class SparsityResult:
    """sparse=True/False is an exact verdict; None means the heuristic
    found no violation inside its peeling order."""

    sparse: Optional[bool]
    witness: Optional[tuple[int, ...]]


# ---------------------------------------------------------------------------
# subformula maxima


def _edge_var_masks(inst: Instance) -> tuple[np.ndarray, list[int]]:
    """Per-constraint vertex bitmask over a compact variable relabeling."""
    order: list[int] = sorted(inst.variables_used())
    pos = {v: i for i, v in enumerate(order)}
    if len(order) > 64:
        raise UsageError(
            f"subset enumeration supports at most 64 distinct variables, got {len(order)}"
        )
    masks = np.zeros(len(inst.constraints), np.uint64)
    for i, c in enumerate(inst.constraints):
        for v in c.vars:
            masks[i] |= np.uint64(1) << np.uint64(pos[v])
    return masks, order


def _scan(inst: Instance, r: Fraction):
    m = len(inst.constraints)
    if m == 0:
        raise UsageError("empty instance has no nonempty subformula")
    if m > SUBSET_ENUM_MAX:
        raise UsageError(
            f"exact subformula maxima capped at {SUBSET_ENUM_MAX} constraints, got {m};"
            " use densest_lower_bound for a peeling bound"
        )
    if abs(r.numerator) >= _INT64_GUARD or r.denominator >= _INT64_GUARD:
        raise UsageError("deficiency ratio too large for exact scan")
    masks, _ = _edge_var_masks(inst)
    return _kernels.subset_density_scan(masks, r.numerator, r.denominator)


def c_star(inst: Instance) -> Fraction:
    """Maximum constraints-to-variables ratio over nonempty subformulas,
    exact; requires at most 20 constraints."""
    cnt, nv, _sub, _d, _ds = _scan(inst, Fraction(1))
    return Fraction(int(cnt), int(nv))


def c_star_witness(inst: Instance) -> tuple[Fraction, tuple[int, ...]]:
    cnt, nv, sub, _d, _ds = _scan(inst, Fraction(1))
    idx = tuple(i for i in range(len(inst.constraints)) if (int(sub) >> i) & 1)
    return Fraction(int(cnt), int(nv)), idx


def deficiency(inst: Instance, r: Rational) -> Fraction:
    """r*|constraints| - |vars| for the whole instance."""
    if not inst.constraints:
        raise UsageError("empty instance has no deficiency")
    rr = as_fraction(r)
    return rr * len(inst.constraints) - len(inst.variables_used())


def max_deficiency(inst: Instance, r: Rational) -> Fraction:
    """Maximum of r*|G| - |vars(G)| over nonempty subformulas G."""
    rr = as_fraction(r)
    _c, _v, _s, delta_num, _ds = _scan(inst, rr)
    return Fraction(int(delta_num), rr.denominator)


def densest_lower_bound(inst: Instance) -> Fraction:
    """Peeling bound on c_star for instances beyond the exact cap:
    repeatedly delete a minimum-degree variable and keep the best
    whole-subformula ratio seen.  A bound, not the exact maximum."""
    if not inst.constraints:
        raise UsageError("empty instance has no nonempty subformula")
    alive = set(range(len(inst.constraints)))
    best = Fraction(0)
    while alive:
        var_deg: dict[int, list[int]] = {}
        for i in alive:
            for v in inst.constraints[i].vars:
                var_deg.setdefault(v, []).append(i)
        ratio = Fraction(len(alive), len(var_deg))
        if ratio > best:
            best = ratio
        v_min = min(var_deg, key=lambda v: (len(var_deg[v]), v))
        alive -= set(var_deg[v_min])
    return best


# ---------------------------------------------------------------------------
# (x,y)-sparsity


def _vertex_masks(h: Hypergraph) -> np.ndarray:
    masks = np.zeros(len(h.edges), np.uint64)
    for i, e in enumerate(h.edges):
        for v in e:
            masks[i] |= np.uint64(1) << np.uint64(v - 1)
    return masks


def _edges_inside(h: Hypergraph, vertex_set: set[int]) -> int:
    return sum(1 for e in h.edges if set(e) <= vertex_set)


def is_xy_sparse(h: Hypergraph, x: Rational, y: Rational) -> SparsityResult:
    """Exact check (n <= 24) that every vertex set of size s <= x*n spans
    at most y*s edges; 'at most' is inclusive.  Returns a violating set
    as witness otherwise.  Beyond the cap a peeling heuristic looks for
    violations along its removal order only."""
    xf, yf = as_fraction(x), as_fraction(y)
    s_max = int(xf * h.n)  # floor: sizes s with s <= x*n
    if h.n <= SPARSE_ENUM_MAX:
        if yf.numerator >= _INT64_GUARD or yf.denominator >= _INT64_GUARD:
            sub = _xy_scan_py(h, s_max, yf)
        else:
            masks = _vertex_masks(h)
            sub = int(_kernels.xy_sparse_scan(masks, h.n, s_max,
                                              yf.numerator, yf.denominator))
        if sub == 0:
            return SparsityResult(True, None)
        witness = tuple(v for v in range(1, h.n + 1) if (sub >> (v - 1)) & 1)
        return SparsityResult(False, witness)
    return _xy_sparse_peel(h, s_max, yf)


def _xy_scan_py(h: Hypergraph, s_max: int, y: Fraction) -> int:
    masks = [sum(1 << (v - 1) for v in e) for e in h.edges]
    for S in range(1, 1 << h.n):
        sz = bin(S).count("1")
        if sz > s_max:
            continue
        cnt = sum(1 for em in masks if em & ~S == 0)
        if cnt > y * sz:
            return S
    return 0


def _xy_sparse_peel(h: Hypergraph, s_max: int, y: Fraction) -> SparsityResult:
    alive = set(range(1, h.n + 1))
    deg = {v: 0 for v in alive}
    for e in h.edges:
        for v in e:
            deg[v] += 1
    while alive:
        if len(alive) <= s_max:
            cnt = _edges_inside(h, alive)
            if cnt > y * len(alive):
                return SparsityResult(False, tuple(sorted(alive)))
        v_min = min(alive, key=lambda v: (deg[v], v))
        alive.discard(v_min)
        for e in h.edges:
            if v_min in e and all(u in alive or u == v_min for u in e):
                for u in e:
                    if u in alive:
                        deg[u] -= 1
    return SparsityResult(None, None)


def cs_sparsity_params(k: int, c: float, y: Rational) -> SparsityParams:
    """Sparsity guarantee of the random k-uniform hypergraph with c*n
    edges: epsilon = y - 1/(k-1) and x = ((1/2e) * (y/(ce))^y)^(1/epsilon),
    evaluated in 50-digit precision."""
    if k < 2:
        raise UsageError("need arity k >= 2")
    if c <= 0:
        raise UsageError("need density c > 0")
    yf = as_fraction(y)
    if (k - 1) * yf <= 1:
        raise UsageError(f"hypothesis (k-1)*y > 1 fails: ({k}-1)*{yf} <= 1")
    with mpmath.workdps(50):
        ym = mpmath.mpf(yf.numerator) / yf.denominator
        eps = ym - mpmath.mpf(1) / (k - 1)
        x = ((1 / (2 * mpmath.e)) * (ym / (c * mpmath.e)) ** ym) ** (1 / eps)
        return SparsityParams(k, float(c), float(ym), float(eps), float(x))


def format_12sig(v: float) -> str:
    return f"{v:.12g}"


# ---------------------------------------------------------------------------
# private-variable peeling


def private_variable_ordering(
    inst: Instance,
) -> tuple[Optional[tuple[int, ...]], tuple[int, ...]]:
    """Greedy peel: repeatedly place last a constraint having at least
    arity-2 variables of degree 1 in the remainder.  Returns (ordering,
    stuck): ordering of constraint positions such that each one brings
    at least arity-2 fresh variables relative to its predecessors, or
    None plus the sub-instance where peeling blocked.

    Succeeds whenever every nonempty subformula keeps its
    constraints-to-variables ratio below 2/(2k-3): then degree counting
    yields more than (k-3)*|G| degree-1 variables in any remainder G, so
    some constraint always qualifies."""
    remaining = list(range(len(inst.constraints)))
    reversed_order: list[int] = []
    while remaining:
        deg: dict[int, int] = {}
        for i in remaining:
            for v in inst.constraints[i].vars:
                deg[v] = deg.get(v, 0) + 1
        pick = -1
        for i in remaining:
            vars_i = inst.constraints[i].vars
            private = sum(1 for v in vars_i if deg[v] == 1)
            if private >= len(vars_i) - 2:
                pick = i
                break
        if pick < 0:
            return None, tuple(remaining)
        reversed_order.append(pick)
        remaining.remove(pick)
    return tuple(reversed(reversed_order)), ()


def verify_private_ordering(inst: Instance, ordering: tuple[int, ...]) -> bool:
    """Independent recount: each constraint in the ordering has at least
    arity-2 variables unseen in all earlier ones."""
    if sorted(ordering) != list(range(len(inst.constraints))):
        return False
    seen: set[int] = set()
    for i in ordering:
        vars_i = inst.constraints[i].vars
        fresh = sum(1 for v in vars_i if v not in seen)
        if fresh < len(vars_i) - 2:
            return False
        seen.update(vars_i)
    return True
