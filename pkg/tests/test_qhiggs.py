"""q-Higgs modules, complexes, and the chain-map calculus."""

import random

import pytest

from qprism.base import BaseRing
from qprism.chart import ChartRing
from qprism.envelope import EnvRing
from qprism.errors import WeightCapTooSmall
from qprism.homalg import PGroupComplex, smith_normal_form
from qprism.instances import random_integrable, random_quasi_nilpotent
from qprism.qhiggs import (
    PullbackSpec,
    QHiggsComplex,
    QHiggsModule,
    frobenius_chain_map,
    frobenius_pullback_spec,
    product_chain_map,
)


@pytest.fixture(scope="module")
def chart2():
    return ChartRing(BaseRing(2, 2), 2, degree_cap=64)


@pytest.fixture(scope="module")
def chart1():
    return ChartRing(BaseRing(2, 2), 1, degree_cap=64)


def fold_map(A2, A1):
    def fold(x):
        out = A1.zero(x.level)
        for mono, c in x.sorted_terms():
            e = sum(e for _v, e in mono)
            out = out + A1.const(c) * A1.tau(0) ** e
        return out

    return fold


def test_integrability(chart2):
    rng = random.Random(1)
    M = random_integrable(chart2, 3, rng)
    assert M.check_integrability().passed
    # non-commuting pair fails with a witness
    bad = QHiggsModule(
        chart2, 2,
        {0: [[chart2.zero(), chart2.one()], [chart2.zero(), chart2.zero()]],
         1: [[chart2.zero(), chart2.zero()], [chart2.one(), chart2.zero()]]},
    )
    rep = bad.check_integrability()
    assert not rep.passed and rep.witness is not None


def test_quasi_nilpotence(chart2):
    rng = random.Random(2)
    M = random_quasi_nilpotent(chart2, 3, rng, mode="upper")
    rep = M.check_quasi_nilpotent(8)
    assert rep.passed
    # identity Theta fails
    ident = QHiggsModule(chart2, 1, {0: [[chart2.one()]], 1: [[chart2.one()]]})
    assert not ident.check_quasi_nilpotent(6).passed
    # zero module passes with bound 1
    z = QHiggsModule.trivial(chart2, 1)
    assert z.check_quasi_nilpotent(2).passed


def test_d_squared_zero(chart2):
    rng = random.Random(3)
    for _ in range(6):
        M = random_integrable(chart2, 2, rng)
        cx = QHiggsComplex(M, weight_cap=4, degree_weight_shift=1)
        for (j, m, I) in cx.bases()[0][:5]:
            dd = cx.differential(cx.differential(cx.generator(j, m, I)))
            assert all(v.is_zero() for v in dd.values())


def test_tensor_laws(chart2):
    rng = random.Random(4)
    Ma = random_integrable(chart2, 2, rng)
    Mb = random_integrable(chart2, 1, rng)
    al = chart2.alpha_i
    # rank-1 x rank-1: Theta'' = u + v + alpha u v
    u = Ma.theta[0][0][0]
    T = Ma.tensor(Mb)
    assert T.check_integrability().passed
    # unit
    unit = QHiggsModule.trivial(chart2, 1)
    MU = Ma.tensor(unit)
    for i in range(2):
        for a in range(2):
            for b in range(2):
                assert MU.theta[i][a][b] == Ma.theta[i][a][b]
    # swap braiding
    Tab, Tba = Ma.tensor(Mb), Mb.tensor(Ma)
    r, s = Ma.rank, Mb.rank
    for i in range(2):
        for j in range(r):
            for k in range(s):
                for l in range(r):
                    for m in range(s):
                        assert Tab.theta[i][l * s + m][j * s + k] == \
                            Tba.theta[i][m * r + l][k * r + j]


def test_rank1_tensor_formula(chart1):
    R = chart1.base
    u = chart1.const(R.random(random.Random(5)))
    v = chart1.const(R.random(random.Random(6)))
    Mu = QHiggsModule(chart1, 1, {0: [[u]]})
    Mv = QHiggsModule(chart1, 1, {0: [[v]]})
    T = Mu.tensor(Mv)
    assert T.theta[0][0][0] == u + v + chart1.alpha_i(0) * u * v


def test_frobenius_pullback_formula(chart1):
    R = chart1.base
    u = chart1.const(R.random(random.Random(7)))
    M = QHiggsModule(chart1, 1, {0: [[u]]})
    F = M.frobenius_pullback()
    assert F.theta[0][0][0] == chart1.xi() * chart1.tau(0) ** (R.p - 1) * u.phi()
    z = QHiggsModule.trivial(chart1, 2).frobenius_pullback()
    assert all(z.theta[0][a][b].is_zero() for a in range(2) for b in range(2))


def test_frobenius_chain_map(chart2):
    rng = random.Random(8)
    M = random_integrable(chart2, 2, rng)
    cx = QHiggsComplex(M, weight_cap=4, degree_weight_shift=1)
    fm = frobenius_chain_map(cx)
    gens = [cx.generator(j, m, I) for q in (0, 1) for (j, m, I) in cx.bases()[q][:6]]
    assert fm.commutes_with_differential(gens).passed


def test_fold_pullback(chart2, chart1):
    rng = random.Random(9)
    fold = fold_map(chart2, chart1)
    S = PullbackSpec(chart2, chart1, fold, {0: 0, 1: 0},
                     {0: chart1.one(), 1: chart1.one()}, name="fold")
    S.validate()
    M = random_integrable(chart2, 2, rng)
    Mf = S.scalar_extension(M)
    assert Mf.check_integrability().passed
    cx = QHiggsComplex(M, weight_cap=4, degree_weight_shift=1)
    cm = S.chain_map(cx, extended=Mf)
    gens = [cx.generator(j, m, I) for q in (0, 1) for (j, m, I) in cx.bases()[q][:6]]
    assert cm.commutes_with_differential(gens).passed
    # rank-1 fold formula: theta'(m x 1) = (th0 + th1)(m) + th0 th1(m) alpha'
    M1 = random_integrable(chart2, 1, rng)
    Mf1 = S.scalar_extension(M1)
    e = M1.basis_vec(0)
    expect = fold(M1.theta_vec(0, e)[0] + M1.theta_vec(1, e)[0]) \
        + fold(M1.theta_vec(0, M1.theta_vec(1, e))[0]) * chart1.alpha_i(0)
    assert Mf1.theta[0][0][0] == expect


def test_injective_psi_plain_base_change(chart1):
    # psi injective, c = 1, g = identity: nothing changes
    S = PullbackSpec(chart1, chart1, lambda x: x, {0: 0}, {0: chart1.one()})
    S.validate()
    M = random_integrable(chart1, 2, random.Random(10))
    Mp = S.scalar_extension(M)
    for a in range(2):
        for b in range(2):
            assert Mp.theta[0][a][b] == M.theta[0][a][b]


def test_composite_pullbacks(chart2, chart1):
    rng = random.Random(11)
    fold = fold_map(chart2, chart1)
    S = PullbackSpec(chart2, chart1, fold, {0: 0, 1: 0},
                     {0: chart1.one(), 1: chart1.one()}, name="fold")
    F1 = frobenius_pullback_spec(chart1)
    comp = F1.compose(S)
    comp.validate()
    M = random_integrable(chart2, 2, rng)
    direct = comp.scalar_extension(M)
    two = F1.scalar_extension(S.scalar_extension(M))
    for a in range(2):
        for b in range(2):
            assert direct.theta[0][a][b] == two.theta[0][a][b]
    cx = QHiggsComplex(M, weight_cap=4, degree_weight_shift=1)
    gens = [cx.generator(j, m, I) for q in (0, 1) for (j, m, I) in cx.bases()[q][:5]]
    cm1 = S.chain_map(cx)
    cm2 = F1.chain_map(cm1.target)
    cmc = comp.chain_map(cx, extended=direct)
    for g in gens:
        lhs, rhs = cmc(g), cm2(cm1(g))
        diff = {k: lhs.get(k, chart1.zero()) - rhs.get(k, chart1.zero())
                for k in set(lhs) | set(rhs)}
        assert all(v.is_zero() for v in diff.values())


def test_frobenius_as_pullback_spec(chart2):
    M = random_integrable(chart2, 2, random.Random(12))
    F1 = M.frobenius_pullback()
    spec = frobenius_pullback_spec(chart2)
    spec.validate()
    F2 = spec.scalar_extension(M)
    for i in range(2):
        for a in range(2):
            for b in range(2):
                assert F1.theta[i][a][b] == F2.theta[i][a][b]


def test_product_chain_map(chart2):
    rng = random.Random(13)
    M = random_integrable(chart2, 2, rng)
    Mp = random_integrable(chart2, 1, rng)
    cx = QHiggsComplex(M, weight_cap=4, degree_weight_shift=1)
    cxp = QHiggsComplex(Mp, weight_cap=4, degree_weight_shift=1)
    pair, cxT = product_chain_map(cx, cxp)
    for q1 in (0, 1):
        for q2 in (0, 1):
            for (j, m, I) in cx.bases()[q1][:3]:
                for (k, m2, J) in cxp.bases()[q2][:3]:
                    gx, gy = cx.generator(j, m, I), cxp.generator(k, m2, J)
                    lhs = cxT.differential(pair(gx, gy))
                    t2 = pair(gx, cxp.differential(gy))
                    t2 = {kk: (v if q1 % 2 == 0 else -v) for kk, v in t2.items()}
                    rhs = cxT.add(pair(cx.differential(gx), gy), t2)
                    assert cxT.eq(lhs, rhs)


def test_dga_product_instances(chart2):
    T = QHiggsModule.trivial(chart2, 1)
    cx = QHiggsComplex(T, weight_cap=4, degree_weight_shift=1)
    pair, cxT = product_chain_map(cx, cx)
    t = chart2.tau(0)
    # (t w0).(t w0) = 0
    z = pair({(0, (0,)): t}, {(0, (0,)): t})
    assert all(v.is_zero() for v in z.values())
    # (t w0).(t w1) = t gamma_0(t) w0 ^ w1
    z2 = pair({(0, (0,)): t}, {(0, (1,)): t})
    assert z2[(0, (0, 1))] == t * chart2.gamma_i(0, t)


def test_scalar_extension_preserves_tensor(chart2, chart1):
    rng = random.Random(14)
    fold = fold_map(chart2, chart1)
    S = PullbackSpec(chart2, chart1, fold, {0: 0, 1: 0},
                     {0: chart1.one(), 1: chart1.one()})
    Ma = random_integrable(chart2, 2, rng)
    Mb = random_integrable(chart2, 1, rng)
    lhs = S.scalar_extension(Ma.tensor(Mb))
    rhs = S.scalar_extension(Ma).tensor(S.scalar_extension(Mb))
    for a in range(2):
        for b in range(2):
            assert lhs.theta[0][a][b] == rhs.theta[0][a][b]


def test_envelope_host_complex():
    R = BaseRing(2, 2)
    E = EnvRing(R, [("zero",)], weight_cap=12)
    M = random_integrable(E, 2, random.Random(15))
    assert M.check_integrability().passed
    cx = QHiggsComplex(M, weight_cap=4)
    gens = [cx.generator(j, m, I) for q in (0, 1) for (j, m, I) in cx.bases()[q][:4]]
    for g in gens:
        if len(next(iter(g))[1]) == 0:
            dd = cx.differential(cx.differential(g))
            assert all(v.is_zero() for v in dd.values())
    fm = frobenius_chain_map(cx)
    assert fm.commutes_with_differential(gens[:4]).passed


def test_weight_cap_escape():
    A = ChartRing(BaseRing(2, 1), 1, degree_cap=64)
    u = A.tau(0) * A.const(A.base.mu())  # degree-raising Theta
    M = QHiggsModule(A, 1, {0: [[u]]})
    cx = QHiggsComplex(M, weight_cap=3, degree_weight_shift=1)
    with pytest.raises(WeightCapTooSmall):
        cx.to_pgroup_complex()


def test_a1_qde_rham_oracle():
    """H^1 of the affine line vs. the diagonal cokernel oracle."""
    for p, n in [(2, 1), (2, 2)]:
        DEG = 8
        R = BaseRing(p, n)
        A = ChartRing(R, 1, degree_cap=64)
        M = QHiggsModule.trivial(A, 1)
        pg = QHiggsComplex(M, weight_cap=DEG, degree_weight_shift=1).to_pgroup_complex()
        h1 = pg.cohomology(1)
        oracle = []
        nb = R.deg_bound(R.n)
        for m in range(1, DEG + 1):
            elt = R.qint(p * m)
            cols = []
            for k in range(nb):
                basis = [0] * nb
                basis[k] = 1
                cols.append(list((R.elt(basis) * elt).coeffs))
            mat = [[cols[j][i] for j in range(nb)] for i in range(nb)]
            for k in range(nb):
                for i in range(nb):
                    mat[i].append(R.p ** R.emod(k, R.n) if i == k else 0)
            _u, Sm, _v = smith_normal_form(mat)
            oracle.extend(
                abs(Sm[i][i]) for i in range(min(len(Sm), len(Sm[0])))
                if abs(Sm[i][i]) > 1
            )
        assert h1 == sorted(oracle, reverse=True)
