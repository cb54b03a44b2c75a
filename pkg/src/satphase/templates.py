"""k-ary boolean constraint templates and their threshold classification.

A template is a relation over k boolean slots stored as a truth table:
bit ``a`` of ``table`` is set iff the assignment whose binary encoding is
``a`` satisfies the relation (bit ``i`` of ``a`` is the value of slot
``i+1``).  Distributions over templates define a random-formula model;
``classify_threshold`` decides from the support alone whether that model
has a sharp satisfiability threshold or a coarse one, and in the coarse
case reports the witnessing template and implicate.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .errors import UsageError

MAX_ARITY = 8

# classification kinds
TRIVIALLY_SATISFIABLE = "TriviallySatisfiable"
COARSE_UNIT = "Coarse-UnitImplicate"
COARSE_2XOR = "Coarse-TwoXorImplicate"
SHARP = "Sharp"


@dataclass(frozen=True)
class Clause:
    """Disjunction of literals as signed 1-based ints; () is the empty clause."""

    lits: tuple[int, ...]

    def __post_init__(self):
        seen = set()
        for l in self.lits:
            if l == 0:
                raise UsageError("literal 0 is not allowed")
            if abs(l) in seen:
                raise UsageError(f"duplicate variable {abs(l)} in clause")
            seen.add(abs(l))

    def __str__(self) -> str:
        return " ".join(str(l) for l in self.lits) if self.lits else "<empty>"


@dataclass(frozen=True)
class ConstraintTemplate:
    arity: int
    table: int
    name: Optional[str] = field(default=None, compare=False)

    def __post_init__(self):
        if not 1 <= self.arity <= MAX_ARITY:
            raise UsageError(f"arity must be in 1..{MAX_ARITY}, got {self.arity}")
        size = 1 << self.arity
        if not 0 < self.table < (1 << size):
            raise UsageError(
                f"table must be a nonzero {size}-bit value, got {self.table:#x}"
            )

    def label(self) -> str:
        return self.name if self.name else f"k{self.arity}:{self.table:x}"

    def satisfying(self) -> tuple[int, ...]:
        """Encoded assignments satisfying the template, ascending."""
        return tuple(a for a in range(1 << self.arity) if (self.table >> a) & 1)

    def falsifying(self) -> tuple[int, ...]:
        return tuple(a for a in range(1 << self.arity) if not (self.table >> a) & 1)

    @property
    def is_parity(self) -> bool:
        """True iff the template is the even or the odd parity relation."""
        return self.table in (parity_table(self.arity, 0), parity_table(self.arity, 1))

    @property
    def parity_rhs(self) -> int:
        """0 for even parity, 1 for odd; UsageError otherwise."""
        if self.table == parity_table(self.arity, 0):
            return 0
        if self.table == parity_table(self.arity, 1):
            return 1
        raise UsageError(f"template {self.label()} is not a parity relation")


def encode_assignment(bits: Sequence[int]) -> int:
    code = 0
    for i, b in enumerate(bits):
        if b not in (0, 1, True, False):
            raise UsageError(f"assignment entries must be 0/1, got {b!r}")
        if b:
            code |= 1 << i
    return code


def eval_template(t: ConstraintTemplate, assignment: Sequence[int]) -> bool:
    """Evaluate ``t`` on an assignment given as k bits (slot 1 first)."""
    if len(assignment) != t.arity:
        raise UsageError(
            f"assignment length {len(assignment)} != arity {t.arity}"
        )
    return bool((t.table >> encode_assignment(assignment)) & 1)


def _clause_satisfied_by_code(lits: tuple[int, ...], code: int) -> bool:
    for l in lits:
        bit = (code >> (abs(l) - 1)) & 1
        if (l > 0 and bit) or (l < 0 and not bit):
            return True
    return False


def is_implicate(t: ConstraintTemplate, clause: Clause) -> bool:
    """True iff every satisfying assignment of ``t`` satisfies ``clause``."""
    for l in clause.lits:
        if not 1 <= abs(l) <= t.arity:
            raise UsageError(f"clause literal {l} outside slots 1..{t.arity}")
    return all(_clause_satisfied_by_code(clause.lits, a) for a in t.satisfying())


def implicates_up_to(
    t: ConstraintTemplate, max_len: int, minimal_only: bool = False
) -> list[Clause]:
    """All clauses over slots 1..k with at most ``max_len`` literals that
    are implicates of ``t``, ordered by length then lexicographically.

    With ``minimal_only`` set, implicates subsumed by a shorter (or equal
    length, earlier) implicate are dropped.
    """
    if not 0 <= max_len <= t.arity:
        raise UsageError(f"max_len must be in 0..{t.arity}, got {max_len}")
    sat = t.satisfying()
    found: list[Clause] = []
    found_sets: list[set[int]] = []
    for length in range(1, max_len + 1):
        for positions in itertools.combinations(range(1, t.arity + 1), length):
            for signs in itertools.product((1, -1), repeat=length):
                lits = tuple(s * p for p, s in zip(positions, signs))
                if not all(_clause_satisfied_by_code(lits, a) for a in sat):
                    continue
                if minimal_only:
                    litset = set(lits)
                    if any(prev <= litset for prev in found_sets):
                        continue
                    found_sets.append(litset)
                found.append(Clause(lits))
    return found


def strongly_depends_on_literal(
    t: ConstraintTemplate,
) -> Optional[tuple[int, bool]]:
    """(slot, value) fixed across all satisfying assignments, if any."""
    sat = t.satisfying()
    for i in range(t.arity):
        ones = [(a >> i) & 1 for a in sat]
        if all(ones):
            return (i + 1, True)
        if not any(ones):
            return (i + 1, False)
    return None


def strongly_depends_on_2xor(
    t: ConstraintTemplate,
) -> Optional[tuple[int, int]]:
    """(i, j) with i < j such that every satisfying assignment has
    slot i != slot j, if any such pair exists."""
    if t.arity < 2:
        return None
    sat = t.satisfying()
    for i in range(t.arity):
        for j in range(i + 1, t.arity):
            if all(((a >> i) & 1) != ((a >> j) & 1) for a in sat):
                return (i + 1, j + 1)
    return None


@dataclass(frozen=True)
class ConstraintDistribution:
    """Support templates plus exact rational probabilities summing to 1."""

    templates: tuple[ConstraintTemplate, ...]
    probs: tuple[Fraction, ...]

    def __post_init__(self):
        if not self.templates:
            raise UsageError("distribution needs at least one template")
        if len(self.templates) != len(self.probs):
            raise UsageError("templates and probs length mismatch")
        k = self.templates[0].arity
        if any(t.arity != k for t in self.templates):
            raise UsageError("all templates in a distribution share one arity")
        for p in self.probs:
            if not 0 < p <= 1:
                raise UsageError(f"probabilities must lie in (0,1], got {p}")
        if sum(self.probs, Fraction(0)) != 1:
            raise UsageError("probabilities must sum to exactly 1")

    @property
    def arity(self) -> int:
        return self.templates[0].arity

    @classmethod
    def uniform(cls, templates: Iterable[ConstraintTemplate]) -> "ConstraintDistribution":
        ts = tuple(templates)
        if not ts:
            raise UsageError("distribution needs at least one template")
        return cls(ts, tuple(Fraction(1, len(ts)) for _ in ts))


@dataclass(frozen=True)
class ThresholdClass:
    """Outcome of the sharp/coarse decision.

    ``template`` plus ``unit`` or ``xor_pair`` witness a coarse verdict.
    ``other_coarse_witness`` flags that templates of the other coarse kind
    also exist in the support (the priority order picked this one).
    """

    kind: str
    template: Optional[ConstraintTemplate] = None
    unit: Optional[tuple[int, bool]] = None
    xor_pair: Optional[tuple[int, int]] = None
    other_coarse_witness: bool = False

    def __post_init__(self):
        coarse = self.kind in (COARSE_UNIT, COARSE_2XOR)
        if coarse != (self.template is not None):
            raise UsageError("witness present iff classification is coarse")


def is_trivially_satisfiable(d: ConstraintDistribution) -> bool:
    """True iff all-zeros satisfies every support template, or all-ones does."""
    top = (1 << d.arity) - 1
    return all(t.table & 1 for t in d.templates) or all(
        (t.table >> top) & 1 for t in d.templates
    )


def classify_threshold(d: ConstraintDistribution) -> ThresholdClass:
    """Sharp/coarse classification of the model defined by ``d``.

    Checks run in fixed priority order: trivial satisfiability, then a
    unit-clause implicate in some support template, then a two-slot XOR
    implicate, else sharp.  Only the support matters, not the weights.
    """
    if is_trivially_satisfiable(d):
        return ThresholdClass(TRIVIALLY_SATISFIABLE)
    units = [(t, strongly_depends_on_literal(t)) for t in d.templates]
    xors = [(t, strongly_depends_on_2xor(t)) for t in d.templates]
    has_unit = any(u for _, u in units)
    has_xor = any(x for _, x in xors)
    if has_unit:
        t, u = next((t, u) for t, u in units if u)
        return ThresholdClass(COARSE_UNIT, template=t, unit=u,
                              other_coarse_witness=has_xor)
    if has_xor:
        t, x = next((t, x) for t, x in xors if x)
        return ThresholdClass(COARSE_2XOR, template=t, xor_pair=x)
    return ThresholdClass(SHARP)


# ---------------------------------------------------------------------------
# standard template constructions and the text shorthand


def clause_table(k: int, negated_mask: int) -> int:
    """Truth table of the OR-clause whose slot i is negated iff bit i-1
    of ``negated_mask`` is set: everything except the one falsifier."""
    falsifier = negated_mask  # slot false under its literal iff bit set
    return ((1 << (1 << k)) - 1) ^ (1 << falsifier)


def clause_signs(k: int, negated_mask: int) -> str:
    return "".join("-" if (negated_mask >> i) & 1 else "+" for i in range(k))


def clause_templates(k: int) -> list[ConstraintTemplate]:
    """The 2^k OR-clause relations over k slots, in lexicographic sign
    order ('+' before '-', slot 1 most significant)."""
    if not 1 <= k <= MAX_ARITY:
        raise UsageError(f"k must be in 1..{MAX_ARITY}")
    out = []
    for i in range(1 << k):
        mask = 0
        for j in range(k):  # bit j of i, MSB-first over slots
            if (i >> (k - 1 - j)) & 1:
                mask |= 1 << j
        out.append(
            ConstraintTemplate(k, clause_table(k, mask), f"CLAUSE{k}:{clause_signs(k, mask)}")
        )
    return out


def parity_table(k: int, rhs: int) -> int:
    """Truth table of x1 xor ... xor xk = rhs."""
    table = 0
    for a in range(1 << k):
        if bin(a).count("1") % 2 == rhs:
            table |= 1 << a
    return table


def xor_template(k: int, rhs: int) -> ConstraintTemplate:
    suffix = "ODD" if rhs else "EVEN"
    return ConstraintTemplate(k, parity_table(k, rhs), f"XOR{k}_{suffix}")


def nae_table(k: int) -> int:
    top = (1 << k) - 1
    return ((1 << (1 << k)) - 1) ^ 1 ^ (1 << top)


def one_in_k_table(k: int) -> int:
    table = 0
    for i in range(k):
        table |= 1 << (1 << i)
    return table


_NAMED = {
    "OR3": lambda: ConstraintTemplate(3, clause_table(3, 0), "OR3"),
    "NAE3": lambda: ConstraintTemplate(3, nae_table(3), "NAE3"),
    "XOR3_EVEN": lambda: xor_template(3, 0),
    "XOR3_ODD": lambda: xor_template(3, 1),
    "ONE_IN_3": lambda: ConstraintTemplate(3, one_in_k_table(3), "ONE_IN_3"),
}


def parse_distribution_text(text: str) -> ConstraintDistribution:
    """Distribution config: one template per line, either
    ``t <id> <arity> <hex-table> [prob]`` or ``t <id> <name> [prob]``
    with probabilities as rationals like 1/3 (uniform when omitted).
    Blank lines and ``#`` comments are ignored."""
    from fractions import Fraction as _F

    templates: list[ConstraintTemplate] = []
    probs: list[Optional[Fraction]] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if fields[0] != "t":
            raise UsageError(f"line {line_no}: expected a template line, got {line!r}")
        rest = fields[1:]
        if len(rest) >= 3 and rest[1].isdigit():
            arity = int(rest[1])
            try:
                table = int(rest[2], 16)
            except ValueError:
                raise UsageError(f"line {line_no}: bad hex table {rest[2]!r}")
            templates.append(ConstraintTemplate(arity, table))
            tail = rest[3:]
        elif len(rest) >= 2:
            templates.append(template_from_name(rest[1]))
            tail = rest[2:]
        else:
            raise UsageError(f"line {line_no}: malformed template line")
        probs.append(_F(tail[0]) if tail else None)
    if not templates:
        raise UsageError("distribution config declares no templates")
    if all(p is None for p in probs):
        return ConstraintDistribution.uniform(templates)
    if any(p is None for p in probs):
        raise UsageError("give probabilities for all templates or none")
    return ConstraintDistribution(tuple(templates), tuple(probs))


def template_from_name(name: str) -> ConstraintTemplate:
    """Resolve a named shorthand: OR3, NAE3, XOR3_EVEN, XOR3_ODD,
    ONE_IN_3, or CLAUSE<k>:<signs> with signs in {+,-}."""
    if name in _NAMED:
        return _NAMED[name]()
    if name.startswith("CLAUSE"):
        head, _, signs = name.partition(":")
        try:
            k = int(head[len("CLAUSE"):])
        except ValueError:
            raise UsageError(f"bad template name {name!r}")
        if len(signs) != k or any(c not in "+-" for c in signs):
            raise UsageError(f"bad sign string in {name!r}")
        mask = sum(1 << i for i, c in enumerate(signs) if c == "-")
        return ConstraintTemplate(k, clause_table(k, mask), f"CLAUSE{k}:{signs}")
    raise UsageError(f"unknown template name {name!r}")
