"""Command-line interface: generate, solve, analyze, sweep.

Every subcommand prints machine-parseable output (single-line JSON
records or labeled lines with exact rationals next to decimals).
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from .errors import ParseError, UsageError
from .harness import ModelSpec, parse_sweep_config, render_csv, run_sweep
from .hypergraph import (
    Hypergraph,
    c_star,
    cs_sparsity_params,
    deficiency,
    format_12sig,
    is_xy_sparse,
    max_deficiency,
)
from .instances import (
    cnf_to_dimacs,
    gen_2p_sat,
    gen_ksat,
    gen_kxorsat,
    gen_molloy,
    parse_instance,
    serialize_instance,
    to_cnf,
)
from .solver import brute_force_solve, dpll_solve, gauss_solve_xor
from .spine import extract_mus, spine
from .templates import classify_threshold, parse_distribution_text


def _read(path: str) -> str:
    return Path(path).read_text()


def _load_instance(path: str):
    inst = parse_instance(_read(path))
    return inst


def cmd_gen(args) -> int:
    if args.model == "ksat":
        inst = gen_ksat(args.k, args.n, args.m, args.seed)
    elif args.model == "kxor":
        inst = gen_kxorsat(args.k, args.n, args.m, args.seed)
    elif args.model == "2p":
        inst = gen_2p_sat(args.p, args.c, args.n, args.seed)
    else:
        if not args.dist:
            raise UsageError("gen --model dist needs --dist <config>")
        d = parse_distribution_text(_read(args.dist))
        inst = gen_molloy(d, args.n, args.m, args.seed)
    text = serialize_instance(inst)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    if args.cnf_out:
        Path(args.cnf_out).write_text(cnf_to_dimacs(to_cnf(inst)))
    return 0


def cmd_solve(args) -> int:
    inst = _load_instance(getattr(args, "in"))
    if args.method == "gauss":
        res = gauss_solve_xor(inst)
    elif args.method == "brute":
        res = brute_force_solve(to_cnf(inst))
    else:
        res = dpll_solve(to_cnf(inst), budget=args.budget, heuristic=args.heuristic)
    print(json.dumps({
        "status": res.status,
        "tree_size": res.tree_size,
        "max_depth": res.max_depth,
        "witness": res.witness_str(),
        "method": res.method,
    }))
    return 0


def cmd_spine(args) -> int:
    inst = _load_instance(getattr(args, "in"))
    if args.mode == "exact":
        if not args.dist:
            raise UsageError("exact spine needs --dist <distribution config>")
        d = parse_distribution_text(_read(args.dist))
        rep = spine(inst, d, mode="exact")
    else:
        from .spine import spine_mus_lower_bound

        rep = spine_mus_lower_bound(inst)
    print(json.dumps({
        "n": rep.n,
        "method": rep.method,
        "fraction": rep.fraction,
        "variables": list(rep.variables),
        "certificates": len(rep.certificates),
    }))
    if args.emit_certs:
        _write_certs(inst, rep, args.emit_certs)
    return 0


def _write_certs(inst, rep, path: str) -> None:
    from .instances import AppliedConstraint, Instance

    blocks = []
    for v in rep.variables:
        cert = rep.certificates[v]
        sub = inst.subset(cert.xi)
        templates = dict(sub.templates)
        tid = max(templates, default=-1) + 1
        templates[tid] = cert.template
        combined = Instance(
            inst.n, templates,
            list(sub.constraints) + [AppliedConstraint(tid, cert.vars)],
            sub.meta,
        )
        blocks.append(f"# certificate var {v}\n" + serialize_instance(combined))
    Path(path).write_text("\n".join(blocks))


def cmd_mus(args) -> int:
    inst = _load_instance(getattr(args, "in"))
    rep = extract_mus(inst)
    print(json.dumps({
        "core": list(rep.core),
        "core_vars": list(rep.core_vars),
        "size": rep.sizes[0],
        "vars": rep.sizes[1],
    }))
    return 0


def _kv_pairs(spec: str) -> dict[str, str]:
    out = {}
    for part in spec.split(","):
        if "=" not in part:
            raise UsageError(f"expected key=value, got {part!r}")
        k, v = part.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def cmd_analyze(args) -> int:
    inst = _load_instance(getattr(args, "in"))
    did = False
    if args.cstar:
        v = c_star(inst)
        print(f"cstar {v.numerator}/{v.denominator} {float(v):.6g}")
        did = True
    if args.deficiency:
        kv = _kv_pairs(args.deficiency)
        r = Fraction(kv["r"])
        d = deficiency(inst, r)
        md = max_deficiency(inst, r)
        print(f"deficiency[r={r}] {d.numerator}/{d.denominator} {float(d):.6g}")
        print(f"max_deficiency[r={r}] {md.numerator}/{md.denominator} {float(md):.6g}")
        did = True
    if args.sparse:
        kv = _kv_pairs(args.sparse)
        x, y = Fraction(kv["x"]), Fraction(kv["y"])
        res = is_xy_sparse(Hypergraph.from_instance(inst), x, y)
        verdict = {True: "true", False: "false", None: "unknown"}[res.sparse]
        tail = ""
        if res.witness:
            tail = " witness=" + ",".join(map(str, res.witness))
        print(f"sparse[x={x},y={y}] {verdict}{tail}")
        did = True
    if args.cs_bound:
        kv = _kv_pairs(args.cs_bound)
        p = cs_sparsity_params(int(kv["k"]), float(Fraction(kv["c"])), Fraction(kv["y"]))
        print(f"cs_bound[k={kv['k']},c={kv['c']},y={kv['y']}] "
              f"epsilon={p.epsilon:.6g} x={format_12sig(p.x)}")
        did = True
    if not did:
        raise UsageError("analyze: pick at least one of --cstar, --deficiency,"
                         " --sparse, --cs-bound")
    return 0


def cmd_classify(args) -> int:
    d = parse_distribution_text(_read(args.dist))
    cls = classify_threshold(d)
    rec = {"kind": cls.kind}
    if cls.template is not None:
        rec["template"] = cls.template.label()
        if cls.unit is not None:
            rec["unit"] = {"slot": cls.unit[0], "value": int(cls.unit[1])}
        if cls.xor_pair is not None:
            rec["xor_pair"] = list(cls.xor_pair)
        rec["other_coarse_witness"] = cls.other_coarse_witness
    print(json.dumps(rec))
    return 0


def cmd_sweep(args) -> int:
    cfg = parse_sweep_config(_read(args.config), read_file=_read)
    rows = run_sweep(cfg, log=lambda s: print(s, file=sys.stderr))
    csv = render_csv(rows)
    if args.out:
        Path(args.out).write_text(csv)
        print(f"wrote {len(rows)} rows to {args.out}", file=sys.stderr)
    else:
        sys.stdout.write(csv)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="satphase",
        description="random satisfiability models: generation, solving,"
                    " order parameters, threshold sweeps",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a random instance")
    g.add_argument("--model", choices=["ksat", "kxor", "2p", "dist"], required=True)
    g.add_argument("--k", type=int, default=3)
    g.add_argument("--p", type=float, default=0.5, help="3-clause share for 2p")
    g.add_argument("--c", type=float, default=1.0, help="density for 2p")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--m", type=int, default=0, help="constraint count")
    g.add_argument("--dist", help="distribution config (model=dist)")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", help="instance file (default: stdout)")
    g.add_argument("--cnf-out", help="also export DIMACS CNF here")
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("solve", help="decide satisfiability of an instance file")
    s.add_argument("--in", required=True)
    s.add_argument("--method", choices=["dpll", "gauss", "brute"], default="dpll")
    s.add_argument("--budget", type=int, default=None, help="DPLL node limit")
    s.add_argument("--heuristic", choices=["index", "maxocc", "moms"], default="index")
    s.set_defaults(func=cmd_solve)

    sp = sub.add_parser("spine", help="spine order parameter of an instance")
    sp.add_argument("--in", required=True)
    sp.add_argument("--mode", choices=["exact", "mus"], default="exact")
    sp.add_argument("--dist", help="distribution config (candidate constraints)")
    sp.add_argument("--emit-certs", help="dump certificates in instance format")
    sp.set_defaults(func=cmd_spine)

    m = sub.add_parser("mus", help="deletion-minimal unsatisfiable core")
    m.add_argument("--in", required=True)
    m.set_defaults(func=cmd_mus)

    a = sub.add_parser("analyze", help="hypergraph analytics of an instance")
    a.add_argument("--in", required=True)
    a.add_argument("--cstar", action="store_true")
    a.add_argument("--deficiency", metavar="r=<rational>")
    a.add_argument("--sparse", metavar="x=<rational>,y=<rational>")
    a.add_argument("--cs-bound", metavar="k=<int>,c=<rational>,y=<rational>")
    a.set_defaults(func=cmd_analyze)

    c = sub.add_parser("classify", help="sharp/coarse threshold classification")
    c.add_argument("--dist", required=True)
    c.set_defaults(func=cmd_classify)

    w = sub.add_parser("sweep", help="Monte Carlo sweep from a config file")
    w.add_argument("--config", required=True)
    w.add_argument("--out", help="CSV path (default: stdout)")
    w.set_defaults(func=cmd_sweep)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ParseError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
