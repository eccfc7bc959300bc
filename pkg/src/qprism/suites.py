"""Named property suites behind `qprism check`.

Each suite runs a family of exact identities on seeded random samples
and returns a Report; with corrupt=True it runs its designated
corrupted-spec negative control instead, which must fail (the CLI turns
that into exit code 1).  Identical (config, seed) yield byte-identical
reports.
"""

from __future__ import annotations

import random

from .base import BaseRing, Witt2Elt, binom_p_over_p, witt2_of
from .chart import ChartRing
from .divided import PDConversion, sigma_of, sigma_antisym_check, sigma_cocycle_check
from .envelope import EnvRing
from .errors import BadBeta, PreconditionViolated, QPrismError
from .homalg import PGroupComplex, poincare_check, smith_normal_form
from .instances import random_integrable, random_quasi_nilpotent
from .qhiggs import (
    QHiggsComplex,
    QHiggsModule,
    PullbackSpec,
    frobenius_chain_map,
    frobenius_pullback_spec,
    product_chain_map,
)
from .report import Report, describe
from .strat import (
    SimplicialEnvelope,
    StratContext,
    ca_h0_compare,
    cocycle_check,
    frobenius_strat_check,
    gamma_compat_check,
    higgs_from_strat,
    strat_from_higgs,
    tensor_strat_check,
)
from . import twisted as tw


def suite_delta_axioms(p=2, prec=3, seed=0, samples=200, corrupt=False):
    """W2 homomorphism, the power formula, and phi delta = delta phi."""
    rep = Report("delta-axioms", "delta-ring-axioms", seed=seed, samples=samples)
    R = BaseRing(p, prec)
    rng = random.Random(seed)
    for _ in range(samples):
        x, y = R.random(rng), R.random(rng)
        wx, wy = witt2_of(x), witt2_of(y)
        bad = R.one() if corrupt else R.zero()
        if not ((wx * wy).x1 + bad == (x * y).delta()):
            return rep.fail(
                witness={"x": describe(x), "y": describe(y)}, note="W2 mult failed"
            )
        if not ((wx + wy).x1 == (x + y).delta()):
            return rep.fail(
                witness={"x": describe(x), "y": describe(y)}, note="W2 add failed"
            )
        n = 2 + (rng.randrange(5))
        lhs = (x**n).delta()
        rhs = None
        for j in range(1, n + 1):
            from math import comb

            term = comb(n, j) * p ** (j - 1) * x ** (p * (n - j)) * x.delta() ** j
            rhs = term if rhs is None else rhs + term
        if not (lhs == rhs):
            return rep.fail(witness={"x": describe(x), "n": n}, note="power formula")
        if prec >= 2 and not (x.phi().delta() == x.delta().phi()):
            return rep.fail(witness={"x": describe(x)}, note="phi delta != delta phi")
    return rep


def suite_base_identities(p=2, prec=3, seed=0, corrupt=False, **_):
    """delta(mu) = eta mu, phi(mu) = [p]_q mu, and the base [p]_q identity."""
    rep = Report("base-identities", "q-base-structural-identities", seed=seed)
    R = BaseRing(p, prec)
    mu, eta, xi = R.mu(), R.eta(), R.xi()
    if not (mu.delta() == eta * mu):
        return rep.fail(note="delta(mu) != eta mu")
    if not (mu.phi() == xi * mu):
        return rep.fail(note="phi(mu) != [p]_q mu")
    lhs = (mu ** (p - 1) + p * eta) * xi.delta() + eta * xi**p
    for v in range(1, p):
        lhs = lhs - binom_p_over_p(p, v) * mu ** (v - 1) * xi**v
    if corrupt:
        lhs = lhs + R.one()
    if not lhs.is_zero():
        return rep.fail(note="[p]_q compatibility identity failed",
                        witness={"residual": describe(lhs)})
    return rep


def suite_envelope(p=2, prec=2, d=1, seed=0, samples=200, corrupt=False, **_):
    """Normal-form commutativity/associativity, delta(t_i) = 0 exact."""
    rep = Report("envelope", "envelope-normal-form", seed=seed, samples=samples)
    centers = [("zero",)] if d == 1 else [("zero",), ("int", 1)]
    E = EnvRing(BaseRing(p, prec), centers[:d], weight_cap=3 * p * p)
    rng = random.Random(seed)
    for i in range(E.d):
        dt = E.t(i).delta()
        if corrupt:
            dt = dt + E.one(dt.level)
        if not dt.is_zero():
            return rep.fail(witness={"i": i, "delta_t": describe(dt)},
                            note="delta(t_i) != 0")
        if not (E.t(i).phi() == E.t(i) ** p):
            return rep.fail(note="phi(t) != t^p")
    for _ in range(samples):
        x = E.random(rng, nterms=2)
        y = E.random(rng, nterms=2)
        z = E.random(rng, nterms=2)
        if not (x * y == y * x):
            return rep.fail(witness={"x": describe(x), "y": describe(y)},
                            note="commutativity failed")
        if not ((x * y) * z == x * (y * z)):
            return rep.fail(witness={"x": describe(x)}, note="associativity failed")
        w = Witt2Elt(p, x, x.delta()) * Witt2Elt(p, y, y.delta())
        if not (w.x1 == (x * y).delta()):
            return rep.fail(witness={"x": describe(x)}, note="W2 envelope failed")
    return rep


def suite_qhiggs_derivations(p=2, prec=3, d=2, seed=0, samples=100, corrupt=False, **_):
    """theta commutation, delta-compatibility, gamma(t) = q^p t, Frobenius."""
    rep = Report("qhiggs-derivations", "qhiggs-derivation-identities",
                 seed=seed, samples=samples)
    # the corrupted control runs on a unit-center chart (visible corruption)
    centers = [("int", 1)] * d if corrupt else [("zero",)] * min(d, 1) + [("int", 1)] * max(0, d - 1)
    E = EnvRing(BaseRing(p, prec), centers, weight_cap=3 * p * p)
    rng = random.Random(seed)
    sampler = lambda r: E.random(r, nterms=2)
    qp = E.const(E.scalar(E.prime_base.q().phi()))
    for i in range(E.d):
        th = E.qhiggs_derivation(i)
        if corrupt:
            th = th.with_corrupt("linear")
        r1 = tw.section_check(th, rng, samples=max(4, samples // 10), sampler=sampler)
        rep.merge(r1)
        if not rep.passed:
            return rep
        try:
            rep.merge(tw.delta_compat_check(th, rng, samples=max(3, samples // 20),
                                            sampler=sampler))
            rep.merge(tw.frobenius_relation_check(th, rng, samples=max(3, samples // 20),
                                                  sampler=sampler))
        except BadBeta as e:
            return rep.fail(note=f"BadBeta: {e}")
        if not rep.passed:
            return rep
        if not (th.gamma(E.t(i)) == qp * E.t(i)):
            return rep.fail(note="gamma(t) != q^p t")
    for i in range(E.d):
        for j in range(i + 1, E.d):
            rep.merge(tw.commute_check(E.qhiggs_derivation(i), E.qhiggs_derivation(j),
                                       rng, samples=max(3, samples // 20),
                                       sampler=sampler))
            if not rep.passed:
                return rep
    return rep


def suite_pd(p=2, prec=1, depth=2, seed=0, samples=60, corrupt=False, **_):
    """tau^p = p sigma; env_to_pd multiplicative and theta-intertwining."""
    rep = Report("pd", "divided-power-comparison", seed=seed, samples=samples)
    N, K = prec, depth
    Rq = BaseRing(p, N + K, "q1")
    E = EnvRing(Rq, [("zero",)], weight_cap=2 * p ** (K + 1))
    sd = sigma_of(E, 0, Rq.zero())
    lhs = E.tau(0) ** p
    rhs = p * sd.sigma
    if corrupt:
        rhs = rhs + E.one(rhs.level)
    if not (lhs == rhs):
        return rep.fail(note="tau^p != p sigma",
                        witness={"lhs": describe(lhs), "rhs": describe(rhs)})
    conv = PDConversion(E, [Rq.zero()], K, N)
    th = E.qhiggs_derivation(0)
    rng = random.Random(seed)
    for _ in range(samples):
        x = E.random(rng, max_weight=(p ** (K + 1) - 1) // 2, nterms=2)
        y = E.random(rng, max_weight=(p ** (K + 1) - 1) // 2, nterms=2)
        if not (conv.convert(x * y) == conv.convert(x) * conv.convert(y)):
            return rep.fail(witness={"x": describe(x), "y": describe(y)},
                            note="conversion not multiplicative")
        if not (conv.convert(th.apply(x)) == conv.pd.derive(0, conv.convert(x)).at_level(N)):
            return rep.fail(witness={"x": describe(x)},
                            note="theta does not match the PD shift")
    return rep


def suite_sigma(p=2, prec=2, seed=0, corrupt=False, **_):
    """Antisymmetry and the correction cocycle on D(2) mod mu."""
    rep = Report("sigma", "sigma-identities-on-self-products", seed=seed)
    Rq = BaseRing(p, prec, "q1")
    S = SimplicialEnvelope(Rq, [("zero",)], weight_cap=3 * p * p)
    tau12 = S.tau2(1, 0, 0)     # p tau = t_1 - t_0
    tau13 = S.tau2(2, 0, 0)
    t0 = S.t_of(2, 0, 0)
    t1 = S.t_of(2, 1, 0)
    if corrupt:
        from .divided import sigma_pair

        s12 = sigma_pair(tau12, t0) + S.D2.one()
        s21 = sigma_pair(-tau12, t1)
        if s21 == ((-1) ** p) * s12:
            return rep  # perturbation invisible: the control is broken
        return rep.fail(note="perturbed sigma_12 breaks antisymmetry (negative control)")
    rep.merge(sigma_antisym_check(tau12, t0, t1))
    if not rep.passed:
        return rep
    rep.merge(sigma_cocycle_check(tau12, tau13, t0, t1))
    return rep


def suite_complexes(p=2, prec=2, seed=0, samples=50, corrupt=False, **_):
    """d^2 = 0; Frobenius/pullback/product chain maps commute with d;
    the composite-pullback equality."""
    rep = Report("complexes", "qhiggs-complex-chain-maps", seed=seed, samples=samples)
    R = BaseRing(p, prec)
    A2 = ChartRing(R, 2, degree_cap=64)
    A1 = ChartRing(R, 1, degree_cap=64)
    rng = random.Random(seed)

    def fold(x):
        out = A1.zero(x.level)
        for mono, c in x.sorted_terms():
            e = sum(e for _v, e in mono)
            out = out + A1.const(c) * A1.tau(0) ** e
        return out

    fold_spec = PullbackSpec(A2, A1, fold, {0: 0, 1: 0},
                             {0: A1.one(), 1: A1.one()}, name="fold")
    fold_spec.validate()
    frob1 = frobenius_pullback_spec(A1)
    comp = frob1.compose(fold_spec)
    for t in range(samples):
        rank = 1 + rng.randrange(3)
        M = random_integrable(A2, rank, rng)
        cx = QHiggsComplex(M, weight_cap=4, degree_weight_shift=1)
        gens = [cx.generator(j, m, I) for q in (0, 1)
                for (j, m, I) in cx.bases()[q][: 2 + rank]]
        for g in gens[:3]:
            dd = cx.differential(cx.differential(g))
            if corrupt:
                key = next(iter(g))
                dd = cx.add(dd, {key: A2.one()})
            if not all(v.is_zero() for v in dd.values()):
                return rep.fail(witness={"gen": describe(g)}, note="d^2 != 0")
        fm = frobenius_chain_map(cx)
        r = fm.commutes_with_differential(gens[:4])
        rep.merge(r)
        if not rep.passed:
            return rep
        pm = fold_spec.chain_map(cx)
        rep.merge(pm.commutes_with_differential(gens[:4]))
        if not rep.passed:
            return rep
        # composite equality
        cm_direct = comp.chain_map(cx)
        cm2 = frob1.chain_map(pm.target)
        for g in gens[:3]:
            lhs, rhs = cm_direct(g), cm2(pm(g))
            diff = {k: lhs.get(k, A1.zero()) - rhs.get(k, A1.zero())
                    for k in set(lhs) | set(rhs)}
            if not all(v.is_zero() for v in diff.values()):
                return rep.fail(witness={"gen": describe(g)},
                                note="composite pullback mismatch")
        # product pairing Leibniz on one pair
        Mp = random_integrable(A2, 1, rng)
        cxp = QHiggsComplex(Mp, weight_cap=4, degree_weight_shift=1)
        pair, cxT = product_chain_map(cx, cxp)
        gx = gens[0]
        gy = cxp.generator(0, (), (0,))
        lhs = cxT.differential(pair(gx, gy))
        q0 = len(next(iter(gx))[1])
        term = pair(gx, cxp.differential(gy))
        term = {k: (v if q0 % 2 == 0 else -v) for k, v in term.items()}
        rhs = cxT.add(pair(cx.differential(gx), gy), term)
        if not cxT.eq(lhs, rhs):
            return rep.fail(witness={"gen": describe(gx)},
                            note="product pairing Leibniz failed")
        rep.samples += 1
    return rep


def _strat_population(p, prec, seed, count, generic_every=4):
    """Mixed q=1 / generic-q quasi-nilpotent instances with their towers."""
    rng = random.Random(seed)
    out = []
    towers = {}
    for t in range(count):
        generic = (t % generic_every == generic_every - 1)
        mode = "q" if generic else "q1"
        d = 1 + (t % 2)
        rank = 1 + (t % 3) if not generic else 1 + (t % 2)
        if generic and d == 2:
            rank = 1
        key = (mode, d)
        if key not in towers:
            base = BaseRing(p, prec, mode)
            towers[key] = SimplicialEnvelope(
                base, [("zero",)] * d, weight_cap=3 * p * p
            )
        S = towers[key]
        mmode = "upper" if t % 2 == 0 else "scaled"
        M = random_quasi_nilpotent(S.D, rank, rng, mode=mmode)
        out.append((S, M))
    return out


def suite_strat(p=2, prec=2, seed=0, samples=10, corrupt=False, **_):
    """The stratification dictionary on a quasi-nilpotent population."""
    rep = Report("strat", "stratification-qhiggs-dictionary", seed=seed,
                 samples=samples)
    pop = _strat_population(p, prec, seed, samples)
    for S, M in pop:
        ctx = StratContext(S, M)
        st = strat_from_higgs(ctx)
        if corrupt:
            st.eps[0][0] = st.eps[0][0] + S.D1.one(st.eps[0][0].level)
            r = cocycle_check(ctx, st)
            if r.passed:
                return rep  # perturbation invisible: the control is broken
            return rep.fail(note="corrupted eps rejected (negative control)",
                            witness=r.witness)
        r = cocycle_check(ctx, st)
        rep.merge(r)
        if not rep.passed:
            return rep
        back = higgs_from_strat(ctx, st)
        for i in range(S.d):
            for a in range(M.rank):
                for b in range(M.rank):
                    lv = back.theta[i][a][b].level
                    if not (back.theta[i][a][b] == M.theta[i][a][b].at_level(lv)):
                        return rep.fail(witness={"i": i, "entry": (a, b)},
                                        note="roundtrip mismatch")
        rep.merge(gamma_compat_check(ctx, st))
        rep.merge(frobenius_strat_check(ctx, st))
        if not rep.passed:
            return rep
    return rep


def suite_ca_h0(p=2, prec=2, seed=0, samples=6, corrupt=False, **_):
    """H^0 comparison on the stratification population."""
    rep = Report("ca-h0", "cech-alexander-h0", seed=seed, samples=samples)
    pop = _strat_population(p, prec, seed, samples)
    for S, M in pop:
        ctx = StratContext(S, M)
        st = strat_from_higgs(ctx)
        if corrupt:
            st.eps[0][0] = st.eps[0][0] + S.D1.const(S.D.tau(0))
            r = ca_h0_compare(ctx, st)
            if r.passed:
                return rep  # perturbation invisible: the control is broken
            return rep.fail(note="corrupted eps rejected (negative control)",
                            witness=r.witness)
        rep.merge(ca_h0_compare(ctx, st))
        if not rep.passed:
            return rep
    return rep


def suite_poincare(p=2, prec=1, depth=None, d=1, corrupt=False, **_):
    """The divided-power resolution at truncation."""
    depth = depth if depth is not None else p * p
    if corrupt:
        rep = Report("poincare", "pd-poincare-resolution")
        from .errors import NotAComplex
        from .homalg import pd_poincare_complex

        cx, _bands = pd_poincare_complex(p, prec, d, depth)
        cx.diffs[0][0][0] += 1  # break d^2 = 0 / exactness
        try:
            PGroupComplex(p, 0, cx.moduli, cx.diffs)
        except NotAComplex:
            return rep.fail(note="tampered differential detected (negative control)")
        inv = cx.cohomology(1)
        return rep.fail(witness={"H1": inv},
                        note="tampered complex has wrong cohomology (negative control)")
    return poincare_check(p, prec, d, depth)


def suite_qde_rham(p=2, prec=1, degree=8, corrupt=False, **_):
    """Affine-line q-de Rham cohomology against the diagonal oracle."""
    rep = Report("qde-rham", "affine-line-qde-rham", samples=degree)
    R = BaseRing(p, prec)
    A = ChartRing(R, 1, degree_cap=4 * degree + 8)
    M = QHiggsModule.trivial(A, 1)
    cx = QHiggsComplex(M, weight_cap=degree, degree_weight_shift=1)
    pg = cx.to_pgroup_complex()
    h0, h1 = pg.cohomology(0), pg.cohomology(1)

    def mult_matrix(R, elt):
        nb = R.deg_bound(R.n)
        cols = []
        for k in range(nb):
            basis = [0] * nb
            basis[k] = 1
            cols.append(list((R.elt(basis) * elt).coeffs))
        return [[cols[j][i] for j in range(nb)] for i in range(nb)]

    def cokernel_invariants(elt):
        nb = R.deg_bound(R.n)
        mat = mult_matrix(R, elt)
        for k in range(nb):
            for i in range(nb):
                mat[i].append(R.p ** R.emod(k, R.n) if i == k else 0)
        U, Sm, V = smith_normal_form(mat)
        return [abs(Sm[i][i]) for i in range(min(len(Sm), len(Sm[0])))
                if abs(Sm[i][i]) > 1]

    def kernel_invariants(elt):
        nb = R.deg_bound(R.n)
        mods = [R.p ** R.emod(k, R.n) for k in range(nb)]
        cx2 = PGroupComplex(R.p, 0, [mods, mods], [mult_matrix(R, elt)])
        return cx2.cohomology(0)

    oracle1, oracle0 = [], [R.p ** R.emod(k, R.n) for k in range(R.deg_bound(R.n))]
    for m in range(1, degree + 1):
        oracle1.extend(cokernel_invariants(R.qint(p * m)))
        oracle0.extend(kernel_invariants(R.qint(p * m)))
    oracle1 = sorted(oracle1, reverse=True)
    oracle0 = sorted([x for x in oracle0 if x > 1], reverse=True)
    if corrupt:
        oracle1 = oracle1 + [p]
    if h1 != oracle1:
        return rep.fail(witness={"H1": h1, "oracle": oracle1}, note="H1 mismatch")
    if h0 != oracle0:
        return rep.fail(witness={"H0": h0, "oracle": oracle0}, note="H0 mismatch")
    rep.note(f"H0 {h0}")
    rep.note(f"H1 {h1}")
    rep.data = {"H0": h0, "H1": h1, "per_degree": {}}
    for m in range(1, degree + 1):
        rep.data["per_degree"][m] = cokernel_invariants(R.qint(p * m))
    return rep


SUITES = {
    "delta-axioms": suite_delta_axioms,
    "base-identities": suite_base_identities,
    "envelope": suite_envelope,
    "qhiggs-derivations": suite_qhiggs_derivations,
    "pd": suite_pd,
    "sigma": suite_sigma,
    "complexes": suite_complexes,
    "strat": suite_strat,
    "ca-h0": suite_ca_h0,
    "poincare": suite_poincare,
    "qde-rham": suite_qde_rham,
}
