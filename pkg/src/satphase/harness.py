"""Monte Carlo sweeps over random-formula models: satisfiability
probability, threshold location and window width, order-parameter
fractions, and search-tree statistics, emitted as CSV.

Everything is reproducible: trial seeds derive from the master seed via
the fixed mix (master, n, density index, trial index), so identical
configs give byte-identical CSV and any single trial can be re-run in
isolation.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .errors import UsageError
from .instances import Instance, gen_2p_sat, gen_ksat, gen_kxorsat, gen_molloy, to_cnf
from .rng import mix_parts
from .solver import BUDGET_EXCEEDED, dpll_solve, solve_instance
from .spine import spine, spine_mus_lower_bound
from .templates import (
    COARSE_2XOR,
    COARSE_UNIT,
    TRIVIALLY_SATISFIABLE,
    ConstraintDistribution,
    ConstraintTemplate,
    ThresholdClass,
    classify_threshold,
    clause_table,
    clause_templates,
    parse_distribution_text,
    xor_template,
)

CSV_HEADER = (
    "model,n,density,trials,sat_count,sat_prob,spine_mode,"
    "spine_mean,spine_median,tree_median,budget_exceeded,seed"
)


@dataclass(frozen=True)
class ModelSpec:
    """A named random-formula family over a density knob.

    scale 'linear' draws round(density*n) constraints, 'sqrt' draws
    round(density*sqrt(n)) (the regime where unit-forcing models show
    their non-vanishing transition window)."""

    kind: str  # ksat | 2p | kxor | dist
    label: str
    k: int = 0
    p: float = 0.0
    dist: Optional[ConstraintDistribution] = None
    scale: str = "linear"

    @classmethod
    def ksat(cls, k: int) -> "ModelSpec":
        return cls("ksat", f"{k}sat", k=k)

    @classmethod
    def kxor(cls, k: int) -> "ModelSpec":
        return cls("kxor", f"{k}xor", k=k)

    @classmethod
    def two_plus_p(cls, p: float) -> "ModelSpec":
        return cls("2p", f"2p{p:g}", p=p)

    @classmethod
    def from_distribution(
        cls, d: ConstraintDistribution, label: str = "dist",
        scale: Optional[str] = None,
    ) -> "ModelSpec":
        if scale is None:
            scale = "sqrt" if classify_threshold(d).kind == COARSE_UNIT else "linear"
        return cls("dist", label, dist=d, scale=scale)

    def distribution(self) -> ConstraintDistribution:
        """The template distribution (for exact spine candidates)."""
        if self.kind == "ksat":
            return ConstraintDistribution.uniform(clause_templates(self.k))
        if self.kind == "kxor":
            return ConstraintDistribution.uniform(
                [xor_template(self.k, 0), xor_template(self.k, 1)]
            )
        if self.kind == "dist":
            assert self.dist is not None
            return self.dist
        raise UsageError(f"model {self.label} has no single-arity distribution")

    def classification(self) -> ThresholdClass:
        if self.kind == "2p":
            # embed the 2-clauses as 3-ary templates with a free slot
            threes = clause_templates(3)
            twos = []
            for mask in range(4):
                tab2 = clause_table(2, mask)
                tab3 = 0
                for a in range(8):
                    if (tab2 >> (a & 3)) & 1:
                        tab3 |= 1 << a
                twos.append(ConstraintTemplate(3, tab3, f"PAD2:{mask}"))
            return classify_threshold(
                ConstraintDistribution.uniform(threes + twos)
            )
        return classify_threshold(self.distribution())

    def clause_count(self, n: int, density: float) -> int:
        base = n if self.scale == "linear" else math.sqrt(n)
        return int(density * base + 0.5)

    def generate(self, n: int, density: float, seed: int) -> Instance:
        if self.kind == "ksat":
            return gen_ksat(self.k, n, self.clause_count(n, density), seed)
        if self.kind == "kxor":
            return gen_kxorsat(self.k, n, self.clause_count(n, density), seed)
        if self.kind == "2p":
            if self.scale != "linear":
                raise UsageError("2p model supports linear scale only")
            return gen_2p_sat(self.p, density, n, seed)
        assert self.dist is not None
        return gen_molloy(self.dist, n, self.clause_count(n, density), seed)


@dataclass
class SweepConfig:
    model: ModelSpec
    n_list: list[int]
    densities: list[float]
    trials: int
    seed: int
    budget: Optional[int] = None
    spine_mode: str = "none"  # none | mus | exact
    force_dpll_tree: bool = False  # run DPLL on parity instances too
    allow_coarse: bool = False

    def validate(self) -> None:
        if self.trials < 1:
            raise UsageError("trials must be >= 1")
        if any(b <= a for a, b in zip(self.densities, self.densities[1:])):
            raise UsageError("densities must be strictly increasing")
        if self.spine_mode not in ("none", "mus", "exact"):
            raise UsageError(f"unknown spine mode {self.spine_mode!r}")


@dataclass
class SweepRow:
    model: str
    n: int
    density: float
    trials: int
    sat_count: int
    sat_prob: float
    spine_mode: str
    spine_mean: Optional[float]
    spine_median: Optional[float]
    tree_median: Optional[float]
    budget_exceeded: int
    seed: int
    gauss_ops_median: Optional[float] = None  # parity models; not a CSV column


def trial_seed(master: int, n: int, density_index: int, trial_index: int) -> int:
    """The fixed per-trial seed mix; re-run any trial from these four."""
    return mix_parts(master, n, density_index, trial_index)


def run_sweep(cfg: SweepConfig, log: Callable[[str], None] = lambda s: None) -> list[SweepRow]:
    """Run the full grid; rows in (n, density) grid order."""
    cfg.validate()
    cls = cfg.model.classification()
    if cls.kind == TRIVIALLY_SATISFIABLE:
        raise UsageError(
            f"model {cfg.model.label} is trivially satisfiable; there is no"
            " satisfiability transition to sweep"
        )
    if cls.kind in (COARSE_UNIT, COARSE_2XOR) and not cfg.allow_coarse:
        raise UsageError(
            f"model {cfg.model.label} has a coarse threshold ({cls.kind});"
            " pass allow_coarse to sweep it anyway"
        )
    rows: list[SweepRow] = []
    for n in cfg.n_list:
        for d_idx, density in enumerate(cfg.densities):
            rows.append(_run_point(cfg, n, d_idx, density, log))
    return rows


def _run_point(
    cfg: SweepConfig, n: int, d_idx: int, density: float,
    log: Callable[[str], None],
) -> SweepRow:
    sat_count = 0
    budget_exceeded = 0
    trees: list[int] = []
    spines: list[float] = []
    gauss_ops: list[int] = []
    exact_dist = cfg.model.distribution() if cfg.spine_mode == "exact" else None
    for t in range(cfg.trials):
        seed = trial_seed(cfg.seed, n, d_idx, t)
        inst = cfg.model.generate(n, density, seed)
        res = solve_instance(inst, method="auto", budget=cfg.budget)
        if res.method == "gauss":
            gauss_ops.append(res.ops)
            if cfg.force_dpll_tree:
                dres = dpll_solve(to_cnf(inst), budget=cfg.budget)
                if dres.status == BUDGET_EXCEEDED:
                    budget_exceeded += 1
                elif not dres.is_sat:
                    trees.append(dres.tree_size)
        elif res.status == BUDGET_EXCEEDED:
            budget_exceeded += 1
        elif not res.is_sat:
            trees.append(res.tree_size)
        if res.is_sat:
            sat_count += 1
        if cfg.spine_mode == "mus":
            if res.status != BUDGET_EXCEEDED and not res.is_sat:
                spines.append(spine_mus_lower_bound(inst).fraction)
        elif cfg.spine_mode == "exact":
            assert exact_dist is not None
            spines.append(spine(inst, exact_dist, mode="exact").fraction)
    if budget_exceeded * 2 > cfg.trials:
        log(
            f"warning: {budget_exceeded}/{cfg.trials} trials exceeded the budget"
            f" at n={n}, density={density:g}"
        )
    row = SweepRow(
        model=cfg.model.label,
        n=n,
        density=density,
        trials=cfg.trials,
        sat_count=sat_count,
        sat_prob=sat_count / cfg.trials,
        spine_mode=cfg.spine_mode,
        spine_mean=float(np.mean(spines)) if spines else None,
        spine_median=float(np.median(spines)) if spines else None,
        tree_median=float(np.median(trees)) if trees else None,
        budget_exceeded=budget_exceeded,
        seed=cfg.seed,
        gauss_ops_median=float(np.median(gauss_ops)) if gauss_ops else None,
    )
    log(f"{row.model} n={n} c={density:g}: sat {row.sat_prob:.3f}")
    return row


def sweep_sat_probability(cfg: SweepConfig, **kw) -> list[SweepRow]:
    return run_sweep(replace_cfg(cfg, spine_mode="none"), **kw)


def sweep_spine_fraction(cfg: SweepConfig, **kw) -> list[SweepRow]:
    if cfg.spine_mode == "none":
        cfg = replace_cfg(cfg, spine_mode="mus")
    return run_sweep(cfg, **kw)


def sweep_tree_size(cfg: SweepConfig, **kw) -> list[SweepRow]:
    return run_sweep(replace_cfg(cfg, force_dpll_tree=True), **kw)


def replace_cfg(cfg: SweepConfig, **changes) -> SweepConfig:
    out = SweepConfig(**{**cfg.__dict__, **changes})
    return out


# ---------------------------------------------------------------------------
# CSV


def _fmt(v) -> str:
    if v is None:
        return "nan"
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def render_csv(rows: list[SweepRow]) -> str:
    lines = [CSV_HEADER]
    for r in rows:
        lines.append(",".join(_fmt(v) for v in (
            r.model, r.n, r.density, r.trials, r.sat_count, r.sat_prob,
            r.spine_mode, r.spine_mean, r.spine_median, r.tree_median,
            r.budget_exceeded, r.seed,
        )))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# threshold location and window width


def wilson_interval(successes: int, trials: int, z: float = 1.959963984540054) -> tuple[float, float]:
    """95% score interval for a binomial proportion."""
    if trials == 0:
        return 0.0, 1.0
    phat = successes / trials
    z2 = z * z
    denom = 1 + z2 / trials
    center = (phat + z2 / (2 * trials)) / denom
    half = z * math.sqrt(phat * (1 - phat) / trials + z2 / (4 * trials * trials)) / denom
    return center - half, center + half


def _sat_prob_probe(model: ModelSpec, n: int, trials: int, master: int):
    """Seeded satisfiability-probability estimator; probe_index keeps
    repeated densities on distinct substreams."""
    counter = [0]

    def probe(density: float) -> tuple[float, float, float]:
        idx = counter[0]
        counter[0] += 1
        sat = 0
        for t in range(trials):
            seed = mix_parts(master, n, idx, t)
            inst = model.generate(n, density, seed)
            if solve_instance(inst, method="auto", heuristic="moms").is_sat:
                sat += 1
        lo, hi = wilson_interval(sat, trials)
        return sat / trials, lo, hi

    return probe


def estimate_threshold_location(
    model: ModelSpec,
    n: int,
    target_prob: float,
    tolerance: float,
    trials: int = 200,
    seed: int = 0,
    bracket: Optional[tuple[float, float]] = None,
    max_expand: int = 12,
) -> float:
    """Density where the satisfiability probability crosses target_prob,
    by bisection.  A probe whose Wilson interval contains the target
    ends the search at that midpoint; otherwise the bracket halves until
    narrower than tolerance."""
    if not 0 < target_prob < 1:
        raise UsageError("target_prob must lie strictly between 0 and 1")
    probe = _sat_prob_probe(model, n, trials, seed)
    if bracket is None:
        lo, hi = 0.25, 1.0
    else:
        lo, hi = bracket
    for attempt in range(max_expand + 1):
        _, _, ci_hi = probe(hi)
        if ci_hi < target_prob:
            break
        if attempt == max_expand:
            raise UsageError(
                f"could not bracket the threshold from above: sat probability at"
                f" density {hi:g} still reaches {ci_hi:.3f} >= target {target_prob}"
            )
        hi *= 2
    for attempt in range(max_expand + 1):
        _, ci_lo, _ = probe(lo)
        if ci_lo > target_prob:
            break
        if attempt == max_expand:
            raise UsageError(
                f"could not bracket the threshold from below: sat probability at"
                f" density {lo:g} stays at most {ci_lo:.3f} <= target {target_prob}"
            )
        lo /= 2
    while hi - lo > tolerance:
        mid = (lo + hi) / 2
        _, ci_lo, ci_hi = probe(mid)
        if ci_lo > target_prob:
            lo = mid
        elif ci_hi < target_prob:
            hi = mid
        else:
            return mid
    return (lo + hi) / 2


def estimate_window_width(
    model: ModelSpec,
    n: int,
    epsilon: float,
    tolerance: float = 0.02,
    trials: int = 200,
    seed: int = 0,
    bracket: Optional[tuple[float, float]] = None,
) -> float:
    """Transition window, normalized by the midpoint: the density gap
    between satisfiability probabilities 1-epsilon and epsilon, divided
    by the density at 1/2.  Sub-seeds depend only on the target, so the
    two endpoints coincide exactly at epsilon = 1/2."""
    if not 0 < epsilon <= 0.5:
        raise UsageError("epsilon must lie in (0, 1/2]")

    def loc(q: float) -> float:
        return estimate_threshold_location(
            model, n, q, tolerance, trials=trials,
            seed=mix_parts(seed, int(q * (1 << 32))), bracket=bracket,
        )

    c_mid = loc(0.5)
    c_high = loc(epsilon)        # mostly-unsatisfiable side
    c_low = loc(1.0 - epsilon)   # mostly-satisfiable side
    return (c_high - c_low) / c_mid


# ---------------------------------------------------------------------------
# config files


def parse_sweep_config(text: str, read_file: Optional[Callable[[str], str]] = None) -> SweepConfig:
    """Key-value sweep config; '#' comments.  Keys: model, n, density,
    trials, seed, budget, spine, scale, allow-coarse."""
    model: Optional[ModelSpec] = None
    kv: dict[str, list[str]] = {}
    scale_override: Optional[str] = None
    allow_coarse = False
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        key = fields[0]
        if key == "model":
            model = _parse_model(fields[1:], line_no, read_file)
        elif key == "allow-coarse":
            allow_coarse = True
        elif key == "scale":
            scale_override = fields[1]
        elif key in ("n", "density", "trials", "seed", "budget", "spine"):
            kv[key] = fields[1:]
        else:
            raise UsageError(f"line {line_no}: unknown config key {key!r}")
    if model is None:
        raise UsageError("config does not name a model")
    if scale_override is not None:
        if scale_override not in ("linear", "sqrt"):
            raise UsageError(f"unknown scale {scale_override!r}")
        model = ModelSpec(model.kind, model.label, model.k, model.p,
                          model.dist, scale_override)
    missing = [k for k in ("n", "density", "trials", "seed") if k not in kv]
    if missing:
        raise UsageError(f"config is missing keys: {', '.join(missing)}")
    cfg = SweepConfig(
        model=model,
        n_list=[int(v) for v in kv["n"]],
        densities=[float(v) for v in kv["density"]],
        trials=int(kv["trials"][0]),
        seed=int(kv["seed"][0]),
        budget=int(kv["budget"][0]) if "budget" in kv else None,
        spine_mode=kv["spine"][0] if "spine" in kv else "none",
        allow_coarse=allow_coarse,
    )
    cfg.validate()
    return cfg


def _parse_model(fields: list[str], line_no: int,
                 read_file: Optional[Callable[[str], str]]) -> ModelSpec:
    if not fields:
        raise UsageError(f"line {line_no}: empty model spec")
    kind = fields[0]
    args = dict(f.split("=", 1) for f in fields[1:] if "=" in f)
    if kind == "ksat":
        return ModelSpec.ksat(int(args.get("k", "3")))
    if kind == "kxor":
        return ModelSpec.kxor(int(args.get("k", "3")))
    if kind == "2p":
        return ModelSpec.two_plus_p(float(args.get("p", "0.5")))
    if kind == "dist":
        if len(fields) < 2:
            raise UsageError(f"line {line_no}: dist model needs a path")
        if read_file is None:
            raise UsageError("dist model paths need a file reader")
        d = parse_distribution_text(read_file(fields[1]))
        return ModelSpec.from_distribution(d, label=f"dist:{fields[1]}")
    raise UsageError(f"line {line_no}: unknown model kind {kind!r}")
