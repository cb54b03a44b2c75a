"""Random instance generation, text serialization, and CNF export.

Instances pair a template dictionary with a list of applied constraints
(template id + ordered tuple of distinct variables).  Generation is a
pure function of the parameters and a 64-bit seed: constraint ``j``
draws from the counter stream keyed by ``(seed, j)`` (variables first,
then the template), so instances with more constraints extend shorter
ones with the same seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Optional

from .errors import ParseError, UsageError
from .rng import Stream
from .templates import (
    ConstraintDistribution,
    ConstraintTemplate,
    clause_templates,
    xor_template,
)


@dataclass(frozen=True)
class AppliedConstraint:
    template_id: int
    vars: tuple[int, ...]


@dataclass(frozen=True)
class InstanceMeta:
    generator: Optional[str] = None
    seed: Optional[int] = None
    density: Optional[float] = None


@dataclass
class Instance:
    n: int
    templates: dict[int, ConstraintTemplate]
    constraints: list[AppliedConstraint]
    meta: InstanceMeta = field(default_factory=InstanceMeta)

    def validate(self) -> None:
        for idx, c in enumerate(self.constraints):
            t = self.templates.get(c.template_id)
            if t is None:
                raise UsageError(f"constraint {idx}: unknown template id {c.template_id}")
            if len(c.vars) != t.arity:
                raise UsageError(
                    f"constraint {idx}: {len(c.vars)} variables for arity {t.arity}"
                )
            if len(set(c.vars)) != len(c.vars):
                raise UsageError(f"constraint {idx}: repeated variable in {c.vars}")
            if any(not 1 <= v <= self.n for v in c.vars):
                raise UsageError(f"constraint {idx}: variable outside 1..{self.n}")
        if self.meta.density is not None and self.n > 0:
            if abs(self.meta.density - len(self.constraints) / self.n) > 1e-9:
                raise UsageError("density metadata disagrees with constraint count")

    def template_of(self, idx: int) -> ConstraintTemplate:
        return self.templates[self.constraints[idx].template_id]

    def max_arity(self) -> int:
        return max((t.arity for t in self.templates.values()), default=0)

    def variables_used(self) -> set[int]:
        used: set[int] = set()
        for c in self.constraints:
            used.update(c.vars)
        return used

    def subset(self, indices) -> "Instance":
        """Sub-instance keeping the given constraint positions (in order)."""
        cons = [self.constraints[i] for i in indices]
        meta = replace(self.meta, density=None)
        return Instance(self.n, self.templates, cons, meta)

    @property
    def all_parity(self) -> bool:
        return bool(self.templates) and all(
            t.is_parity for t in self.templates.values()
        )


@dataclass
class Cnf:
    n: int
    clauses: list[tuple[int, ...]]

    def validate(self) -> None:
        for i, cl in enumerate(self.clauses):
            if len({abs(l) for l in cl}) != len(cl):
                raise UsageError(f"clause {i} mentions a variable twice")
            if any(l == 0 or abs(l) > self.n for l in cl):
                raise UsageError(f"clause {i} has an out-of-range literal")


# ---------------------------------------------------------------------------
# generators


def _draw_template(stream: Stream, thresholds: list[int]) -> int:
    u = stream.next64()
    for i, t in enumerate(thresholds):
        if u < t:
            return i
    return len(thresholds) - 1


def _prob_thresholds(d: ConstraintDistribution) -> list[int]:
    cum = Fraction(0)
    out = []
    for p in d.probs:
        cum += p
        out.append(int(cum * (1 << 64)))
    return out


def gen_molloy(
    d: ConstraintDistribution, n: int, M: int, seed: int
) -> Instance:
    """M constraints, each a d-random template applied to a uniformly
    random ordered k-tuple of distinct variables (repetition across
    constraints allowed)."""
    k = d.arity
    if n < k:
        raise UsageError(f"need n >= k, got n={n}, k={k}")
    if M < 0:
        raise UsageError("M must be nonnegative")
    thresholds = _prob_thresholds(d)
    templates = dict(enumerate(d.templates))
    constraints = []
    for j in range(M):
        s = Stream(seed, j)
        vars_ = s.distinct_tuple(n, k)
        tid = _draw_template(s, thresholds)
        constraints.append(AppliedConstraint(tid, vars_))
    meta = InstanceMeta(generator=f"molloy_k{k}", seed=seed,
                        density=M / n if n else None)
    return Instance(n, templates, constraints, meta)


def gen_ksat(k: int, n: int, m: int, seed: int) -> Instance:
    """Random k-SAT: uniform over the 2^k clause sign patterns."""
    d = ConstraintDistribution.uniform(clause_templates(k))
    inst = gen_molloy(d, n, m, seed)
    inst.meta = replace(inst.meta, generator=f"ksat{k}")
    return inst


def gen_2p_sat(p: float, c: float, n: int, seed: int) -> Instance:
    """Mixture of 3-clauses and 2-clauses: round(p*c*n) 3-clauses and
    the remainder of round(c*n) as 2-clauses."""
    if not 0 <= p <= 1:
        raise UsageError("p must lie in [0,1]")
    if c < 0:
        raise UsageError("c must be nonnegative")
    if n < 3:
        raise UsageError("need n >= 3")
    total = int(c * n + 0.5)
    m3 = int(p * c * n + 0.5)
    m2 = total - m3
    t3 = clause_templates(3)
    t2 = clause_templates(2)
    templates = dict(enumerate(t3 + t2))
    constraints = []
    for j in range(m3):
        s = Stream(seed, j)
        vars_ = s.distinct_tuple(n, 3)
        constraints.append(AppliedConstraint(s.below(8), vars_))
    for j in range(m2):
        s = Stream(seed, m3 + j)
        vars_ = s.distinct_tuple(n, 2)
        constraints.append(AppliedConstraint(8 + s.below(4), vars_))
    meta = InstanceMeta(generator=f"2p{p:g}", seed=seed, density=total / n)
    return Instance(n, templates, constraints, meta)


def gen_kxorsat(k: int, n: int, m: int, seed: int) -> Instance:
    """Random parity constraints: uniform k-tuples, fair coin for the
    even/odd right-hand side."""
    if n < k:
        raise UsageError(f"need n >= k, got n={n}, k={k}")
    templates = {0: xor_template(k, 0), 1: xor_template(k, 1)}
    constraints = []
    for j in range(m):
        s = Stream(seed, j)
        vars_ = s.distinct_tuple(n, k)
        constraints.append(AppliedConstraint(s.coin(), vars_))
    meta = InstanceMeta(generator=f"kxor{k}", seed=seed, density=m / n)
    return Instance(n, templates, constraints, meta)


# ---------------------------------------------------------------------------
# CNF conversion


def to_cnf(inst: Instance) -> Cnf:
    """Maxterm expansion: one clause per falsifying assignment of each
    applied constraint, mapped through the constraint's variable tuple.
    No auxiliary variables; clause order follows constraint order, then
    ascending falsifier code."""
    clauses: list[tuple[int, ...]] = []
    for c in inst.constraints:
        t = inst.templates[c.template_id]
        for a in t.falsifying():
            clauses.append(
                tuple(-v if (a >> i) & 1 else v for i, v in enumerate(c.vars))
            )
    return Cnf(inst.n, clauses)


def constraint_clause_blocks(inst: Instance) -> list[list[tuple[int, ...]]]:
    """CNF clauses grouped per constraint, in constraint order."""
    blocks = []
    for c in inst.constraints:
        t = inst.templates[c.template_id]
        blocks.append([
            tuple(-v if (a >> i) & 1 else v for i, v in enumerate(c.vars))
            for a in t.falsifying()
        ])
    return blocks


# ---------------------------------------------------------------------------
# text formats


def serialize_instance(inst: Instance) -> str:
    lines = [f"p gsat {inst.n} {len(inst.constraints)} {inst.max_arity()}"]
    for tid in sorted(inst.templates):
        t = inst.templates[tid]
        lines.append(f"t {tid} {t.arity} {t.table:x}")
    for c in inst.constraints:
        lines.append("c " + str(c.template_id) + " " + " ".join(map(str, c.vars)))
    if inst.meta.generator is not None:
        lines.append(f"m generator {inst.meta.generator}")
    if inst.meta.seed is not None:
        lines.append(f"m seed {inst.meta.seed}")
    if inst.meta.density is not None:
        lines.append(f"m density {inst.meta.density!r}")
    return "\n".join(lines) + "\n"


def parse_instance(text: str) -> Instance:
    n = None
    declared_m = None
    templates: dict[int, ConstraintTemplate] = {}
    constraints: list[AppliedConstraint] = []
    meta_kv: dict[str, str] = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        tag = fields[0]
        if tag == "p":
            if n is not None:
                raise ParseError(line_no, "duplicate header line")
            if len(fields) != 5 or fields[1] != "gsat":
                raise ParseError(line_no, f"bad header {line!r}")
            try:
                n, declared_m = int(fields[2]), int(fields[3])
                int(fields[4])
            except ValueError:
                raise ParseError(line_no, "non-integer field in header")
        elif tag == "t":
            if len(fields) != 4:
                raise ParseError(line_no, "template line needs: t <id> <arity> <hex>")
            try:
                tid, arity, table = int(fields[1]), int(fields[2]), int(fields[3], 16)
            except ValueError:
                raise ParseError(line_no, "bad template fields")
            if tid in templates:
                raise ParseError(line_no, f"duplicate template id {tid}")
            try:
                templates[tid] = ConstraintTemplate(arity, table)
            except UsageError as e:
                raise ParseError(line_no, str(e))
        elif tag == "c":
            if n is None:
                raise ParseError(line_no, "constraint before header")
            try:
                tid = int(fields[1])
                vars_ = tuple(int(v) for v in fields[2:])
            except ValueError:
                raise ParseError(line_no, "non-integer field in constraint")
            t = templates.get(tid)
            if t is None:
                raise ParseError(line_no, f"unknown template id {tid}")
            if len(vars_) != t.arity:
                raise ParseError(
                    line_no, f"{len(vars_)} variables for arity-{t.arity} template"
                )
            if len(set(vars_)) != len(vars_):
                raise ParseError(line_no, "repeated variable in constraint")
            if any(not 1 <= v <= n for v in vars_):
                raise ParseError(line_no, f"variable outside 1..{n}")
            constraints.append(AppliedConstraint(tid, vars_))
        elif tag == "m":
            if len(fields) < 3:
                raise ParseError(line_no, "metadata line needs: m <key> <value>")
            meta_kv[fields[1]] = " ".join(fields[2:])
        else:
            raise ParseError(line_no, f"unknown line tag {tag!r}")
    if n is None:
        raise ParseError(0, "missing header line")
    if declared_m != len(constraints):
        raise ParseError(0, f"header declares {declared_m} constraints, found {len(constraints)}")
    meta = InstanceMeta(
        generator=meta_kv.get("generator"),
        seed=int(meta_kv["seed"]) if "seed" in meta_kv else None,
        density=float(meta_kv["density"]) if "density" in meta_kv else None,
    )
    inst = Instance(n, templates, constraints, meta)
    inst.validate()
    return inst


def cnf_to_dimacs(cnf: Cnf) -> str:
    lines = [f"p cnf {cnf.n} {len(cnf.clauses)}"]
    for cl in cnf.clauses:
        lines.append(" ".join(map(str, cl)) + " 0")
    return "\n".join(lines) + "\n"
