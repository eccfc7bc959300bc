"""qprism command-line interface.

Subcommands wire charts, modules and tasks to the computational
kernels:

  qprism check SUITE ...        run a named property suite (exit 1 on a
                                failed invariant, 2 on bad input, 3 on
                                precision/budget exhaustion)
  qprism envelope ...           print a rewrite table and basis sample
  qprism pd ...                 print the divided-power dictionary
  qprism qhiggs ...             module tasks: integrable, complex,
                                tensor, frobenius, pullback
  qprism strat ...              stratification tasks: build, cocycle,
                                roundtrip, frobenius, ca-h0
  qprism cohomology ...         q-de Rham / divided-power tables, with
                                optional figures rendered next to the
                                delimited output

All structured output is JSON with sorted keys (byte-identical for
identical config and seed); --format table renders an aligned text
table instead.  QPRISM_BUDGET caps global monomial counts.
"""

from __future__ import annotations

import argparse
import json
import sys

from .base import BaseRing
from .chart import ChartRing, chart_elt_from_json
from .envelope import EnvRing, env_elt_from_json
from .errors import (
    BudgetExceeded,
    DepthExceeded,
    PrecisionExhausted,
    QPrismError,
    WeightCapTooSmall,
)
from .qhiggs import QHiggsComplex, QHiggsModule, frobenius_chain_map
from .report import Report
from .suites import SUITES

EXIT_OK = 0
EXIT_INVARIANT = 1
EXIT_BAD_INPUT = 2
EXIT_EXHAUSTED = 3


def _emit(data, args):
    if getattr(args, "format", "json") == "table":
        text = _as_table(data)
    else:
        text = json.dumps(data, sort_keys=True, indent=2, default=repr)
    out = getattr(args, "output", None)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _as_table(data, prefix=""):
    lines = []

    def walk(d, pre):
        if isinstance(d, dict):
            for k in sorted(d, key=str):
                walk(d[k], f"{pre}{k}.")
        elif isinstance(d, list) and all(not isinstance(x, (dict, list)) for x in d):
            lines.append(f"{pre[:-1]:<40} {' '.join(str(x) for x in d)}")
        elif isinstance(d, list):
            for t, x in enumerate(d):
                walk(x, f"{pre}{t}.")
        else:
            lines.append(f"{pre[:-1]:<40} {d}")

    walk(data, prefix)
    return "\n".join(lines)


def _parse_centers(text, d):
    if not text:
        return [("zero",)] * d
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        if tok in ("0", ""):
            out.append(("zero",))
        else:
            out.append(("int", int(tok)))
    if len(out) != d:
        raise ValueError(f"expected {d} centers, got {len(out)}")
    return out


def _host_from_json(h):
    kind = h["kind"]
    base = BaseRing(h["p"], h["n"], h.get("mode", "q"))
    if kind == "chart":
        return ChartRing(base, h["d"], degree_cap=h.get("degree_cap", 64))
    if kind == "envelope":
        centers = [tuple(c) for c in h["centers"]]
        return EnvRing(base, centers, weight_cap=h.get("weight_cap", 3 * base.p**2))
    raise ValueError(f"unknown host kind {kind!r}")


def _module_from_json(d):
    host = _host_from_json(d["host"])
    rank = d["rank"]
    order = d.get("order", list(range(host.d)))
    loader = chart_elt_from_json if isinstance(host, ChartRing) else env_elt_from_json
    theta = {}
    for i_s, rows in d["theta"].items():
        theta[int(i_s)] = [[loader(host, e) for e in row] for row in rows]
    return QHiggsModule(host, rank, theta, order)


def cmd_check(args):
    if args.suite not in SUITES:
        print(f"unknown suite {args.suite!r}; known: {', '.join(sorted(SUITES))}",
              file=sys.stderr)
        return EXIT_BAD_INPUT
    kwargs = dict(p=args.p, prec=args.prec, seed=args.seed, corrupt=args.corrupt)
    if args.samples is not None:
        kwargs["samples"] = args.samples
    if args.d is not None:
        kwargs["d"] = args.d
    if args.depth is not None:
        kwargs["depth"] = args.depth
    if args.degree is not None:
        kwargs["degree"] = args.degree
    rep = SUITES[args.suite](**kwargs)
    payload = rep.to_json()
    payload["config"] = {k: v for k, v in sorted(kwargs.items())}
    _emit(payload, args)
    return EXIT_OK if rep.passed else EXIT_INVARIANT


def cmd_envelope(args):
    base = BaseRing(args.p, args.prec, "q1" if args.q1 else "q")
    centers = _parse_centers(args.centers, args.vars)
    E = EnvRing(base, centers, weight_cap=args.weight_cap)
    table = {}
    for i in range(E.d):
        for k in range(min(args.prec, args.max_level) + 1):
            raw = E.rule(i, k)
            table[f"delta^{k}(tau_{i})^{E.p}"] = [
                {"mono": [[a, b, e] for (a, b), e in m], "coeff": c.to_json()}
                for m, c in sorted(raw.items())
            ]
    sample = {}
    for mono in E.basis_monomials(min(E.weight_cap, 2 * E.p)):
        sq = E.monomial(mono) * E.monomial(mono)
        sample["*".join(f"d^{k}tau{i}^{e}" for (i, k), e in mono) or "1"] = sq.to_json()
    payload = {
        "ring": {"p": args.p, "n": args.prec, "mode": base.mode,
                 "centers": [list(c) for c in centers]},
        "rewrite_table": table,
        "basis_squares": sample,
    }
    _emit(payload, args)
    return EXIT_OK


def cmd_pd(args):
    from .divided import PDConversion

    N, K = args.prec, args.depth
    base = BaseRing(args.p, N + K, "q1")
    E = EnvRing(base, [("zero",)] * args.vars, weight_cap=2 * args.p ** (K + 1))
    conv = PDConversion(E, [base.zero()] * args.vars, K, N)
    _emit(conv.dictionary_json(), args)
    return EXIT_OK


def cmd_qhiggs(args):
    with open(args.input) as fh:
        spec = json.load(fh)
    M = _module_from_json(spec)
    if args.task == "integrable":
        rep = M.check_integrability()
        nilp = M.check_quasi_nilpotent(args.nilpotence_bound)
        payload = rep.to_json()
        payload["quasi_nilpotent"] = nilp.to_json()
        _emit(payload, args)
        return EXIT_OK if rep.passed else EXIT_INVARIANT
    if args.task == "complex":
        cx = QHiggsComplex(M, weight_cap=args.weight_cap)
        pg = cx.to_pgroup_complex()
        per_degree = {q: pg.cohomology(q) for q in range(pg.lo, pg.hi + 1)}
        payload = {"cohomology": {str(q): v for q, v in per_degree.items()}}
        if args.figure:
            from .plotting import cohomology_figure

            cohomology_figure(per_degree, M.host.p, args.figure,
                              title="q-Higgs complex cohomology")
            payload["figure"] = args.figure
        _emit(payload, args)
        return EXIT_OK
    if args.task == "tensor":
        T = M.tensor(M)
        _emit(T.to_json(), args)
        return EXIT_OK
    if args.task == "frobenius":
        F = M.frobenius_pullback()
        cx = QHiggsComplex(M, weight_cap=args.weight_cap)
        fm = frobenius_chain_map(cx, pulled=F)
        gens = [cx.generator(j, m, I) for q in (0, 1)
                for (j, m, I) in cx.bases()[q][:4]]
        rep = fm.commutes_with_differential(gens)
        payload = {"pullback": F.to_json(), "chain_map_check": rep.to_json()}
        _emit(payload, args)
        return EXIT_OK if rep.passed else EXIT_INVARIANT
    if args.task == "pullback":
        # Frobenius realized as a scalar-extension datum (cross-check path)
        from .qhiggs import frobenius_pullback_spec

        S = frobenius_pullback_spec(M.host)
        S.validate(order=M.order)
        F1 = M.frobenius_pullback()
        F2 = S.scalar_extension(M, target_order=M.order)
        ok = all(
            F1.theta[i][a][b] == F2.theta[i][a][b]
            for i in M.order for a in range(M.rank) for b in range(M.rank)
        )
        rep = Report("pullback-crosscheck", "frobenius-as-scalar-extension",
                     passed=ok)
        _emit(rep.to_json(), args)
        return EXIT_OK if ok else EXIT_INVARIANT
    print(f"unknown task {args.task!r}", file=sys.stderr)
    return EXIT_BAD_INPUT


def cmd_strat(args):
    from .strat import (
        SimplicialEnvelope,
        StratContext,
        ca_h0_compare,
        cocycle_check,
        frobenius_strat_check,
        higgs_from_strat,
        strat_from_higgs,
    )

    with open(args.module) as fh:
        spec = json.load(fh)
    host_spec = spec["host"]
    if host_spec["kind"] != "envelope":
        print("stratifications need an envelope host", file=sys.stderr)
        return EXIT_BAD_INPUT
    base = BaseRing(host_spec["p"], host_spec["n"], host_spec.get("mode", "q"))
    centers = [tuple(c) for c in host_spec["centers"]]
    S = SimplicialEnvelope(base, centers,
                           weight_cap=host_spec.get("weight_cap", 3 * base.p**2))
    spec = dict(spec)
    M = QHiggsModule(
        S.D,
        spec["rank"],
        {
            int(i): [[env_elt_from_json(S.D, e) for e in row] for row in rows]
            for i, rows in spec["theta"].items()
        },
        spec.get("order", list(range(S.d))),
    )
    ctx = StratContext(S, M)
    st = strat_from_higgs(ctx)
    if args.task == "build":
        payload = {"epsilon": [[a.to_json() for a in row] for row in st.eps]}
        _emit(payload, args)
        return EXIT_OK
    if args.task == "cocycle":
        rep = cocycle_check(ctx, st)
    elif args.task == "roundtrip":
        back = higgs_from_strat(ctx, st)
        ok = True
        for i in range(S.d):
            for a in range(M.rank):
                for b in range(M.rank):
                    lv = back.theta[i][a][b].level
                    if not (back.theta[i][a][b] == M.theta[i][a][b].at_level(lv)):
                        ok = False
        rep = Report("roundtrip", "strat-higgs-roundtrip", passed=ok)
    elif args.task == "frobenius":
        rep = frobenius_strat_check(ctx, st)
    elif args.task == "ca-h0":
        rep = ca_h0_compare(ctx, st)
    else:
        print(f"unknown task {args.task!r}", file=sys.stderr)
        return EXIT_BAD_INPUT
    _emit(rep.to_json(), args)
    return EXIT_OK if rep.passed else EXIT_INVARIANT


def cmd_cohomology(args):
    if args.task == "qdr":
        from .suites import suite_qde_rham

        rep = suite_qde_rham(p=args.p, prec=args.prec, degree=args.degree)
        payload = rep.to_json()
        if rep.passed and args.figure:
            from .plotting import torsion_figure

            torsion_figure(getattr(rep, "data", {}).get("per_degree", {}),
                           args.p, args.figure,
                           title=f"A^1 q-de Rham torsion (p={args.p}, n={args.prec})")
            payload["figure"] = args.figure
        _emit(payload, args)
        return EXIT_OK if rep.passed else EXIT_INVARIANT
    if args.task == "poincare":
        from .homalg import pd_poincare_complex, poincare_check

        rep = poincare_check(args.p, args.prec, args.d, args.depth)
        payload = rep.to_json()
        cx, _bands = pd_poincare_complex(args.p, args.prec, args.d, args.depth)
        per_degree = {q: cx.cohomology(q) for q in range(cx.lo, cx.hi + 1)}
        payload["cohomology"] = {str(q): v for q, v in per_degree.items()}
        if args.figure:
            from .plotting import cohomology_figure

            cohomology_figure(per_degree, args.p, args.figure,
                              title=f"PD resolution defects (p={args.p}, depth={args.depth})")
            payload["figure"] = args.figure
        _emit(payload, args)
        return EXIT_OK if rep.passed else EXIT_INVARIANT
    print(f"unknown task {args.task!r}", file=sys.stderr)
    return EXIT_BAD_INPUT


def build_parser():
    ap = argparse.ArgumentParser(prog="qprism", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--format", choices=["json", "table"], default="json")
        sp.add_argument("--output", default=None)

    c = sub.add_parser("check", help="run a named property suite")
    c.add_argument("suite")
    c.add_argument("--p", type=int, default=2)
    c.add_argument("--prec", type=int, default=2)
    c.add_argument("--d", type=int, default=None)
    c.add_argument("--depth", type=int, default=None)
    c.add_argument("--degree", type=int, default=None)
    c.add_argument("--samples", type=int, default=None)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--corrupt", action="store_true")
    common(c)
    c.set_defaults(fn=cmd_check)

    e = sub.add_parser("envelope", help="rewrite table and basis sample")
    e.add_argument("--p", type=int, default=2)
    e.add_argument("--prec", type=int, default=2)
    e.add_argument("--vars", type=int, default=1)
    e.add_argument("--centers", default="")
    e.add_argument("--weight-cap", type=int, default=None)
    e.add_argument("--max-level", type=int, default=2)
    e.add_argument("--q1", action="store_true")
    common(e)
    e.set_defaults(fn=cmd_envelope)

    d = sub.add_parser("pd", help="divided-power dictionary")
    d.add_argument("--p", type=int, default=2)
    d.add_argument("--prec", type=int, default=1)
    d.add_argument("--depth", type=int, default=2)
    d.add_argument("--vars", type=int, default=1)
    common(d)
    d.set_defaults(fn=cmd_pd)

    q = sub.add_parser("qhiggs", help="q-Higgs module tasks")
    q.add_argument("--input", required=True)
    q.add_argument("--task", required=True,
                   choices=["integrable", "complex", "tensor", "frobenius", "pullback"])
    q.add_argument("--weight-cap", type=int, default=6)
    q.add_argument("--nilpotence-bound", type=int, default=16)
    q.add_argument("--figure", default=None)
    common(q)
    q.set_defaults(fn=cmd_qhiggs)

    s = sub.add_parser("strat", help="stratification tasks")
    s.add_argument("--module", required=True)
    s.add_argument("--task", required=True,
                   choices=["build", "cocycle", "roundtrip", "frobenius", "ca-h0"])
    common(s)
    s.set_defaults(fn=cmd_strat)

    h = sub.add_parser("cohomology", help="cohomology tables and figures")
    h.add_argument("--task", required=True, choices=["qdr", "poincare"])
    h.add_argument("--p", type=int, default=2)
    h.add_argument("--prec", type=int, default=1)
    h.add_argument("--degree", type=int, default=8)
    h.add_argument("--depth", type=int, default=4)
    h.add_argument("--d", type=int, default=1)
    h.add_argument("--figure", default=None)
    common(h)
    h.set_defaults(fn=cmd_cohomology)

    return ap


def main(argv=None):
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_BAD_INPUT if e.code else EXIT_OK
    try:
        return args.fn(args)
    except (PrecisionExhausted, BudgetExceeded, DepthExceeded, WeightCapTooSmall) as e:
        print(f"exhausted: {e}", file=sys.stderr)
        return EXIT_EXHAUSTED
    except (QPrismError, ValueError, KeyError, OSError, json.JSONDecodeError) as e:
        print(f"bad input: {e}", file=sys.stderr)
        return EXIT_BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
