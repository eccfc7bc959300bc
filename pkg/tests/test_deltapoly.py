"""Free delta-polynomial rings: axioms, the power lemma, iterated deltas."""

import random

import pytest

from qprism.base import BaseRing, Witt2Elt, binom_p_over_p
from qprism.deltapoly import DeltaPolyRing
from qprism.errors import BudgetExceeded, DeltaIncoherent, PrecisionExhausted


def rand_poly(ring, P, rng, nterms=3):
    out = P.zero()
    for _ in range(nterms):
        m = P.one()
        for _ in range(rng.randrange(3)):
            which = rng.randrange(3)
            if which == 0:
                m = m * P.var(0, rng.randrange(2))
            elif which == 1 and P.cvars:
                m = m * P.tvar(0)
        out = out + P.const(ring.random(rng)) * m
    return out


def test_construction_delta_of_variables():
    R = BaseRing(2, 3)
    P = DeltaPolyRing(R, 1, cvars=1)
    S = P.var(0)
    assert S.delta() == P.var(0, 1)
    assert P.tvar(0).delta().is_zero()
    assert P.tvar(0).phi() == P.tvar(0) ** 2
    assert P.var(0).phi() == S**2 + 2 * P.var(0, 1)


def test_power_lemma_instance():
    # p = 2: delta(S^2) = 2 S^2 V11 + 2 V11^2
    R = BaseRing(2, 3)
    P = DeltaPolyRing(R, 1)
    S, V = P.var(0), P.var(0, 1)
    assert (S * S).delta() == 2 * S**2 * V + 2 * V**2


def test_delta_of_relation_p2():
    R = BaseRing(2, 3)
    P = DeltaPolyRing(R, 1, cvars=1)
    S, t = P.var(0), P.tvar(0)
    xi = P.const(R.xi())
    lhs = (xi * S - t).delta()
    rhs = (
        P.const(R.xi().phi()) * P.var(0, 1)
        + P.const(R.xi().delta()) * S**2
        - t * t
        + xi * t * S
    )
    assert lhs == rhs


@pytest.mark.parametrize("p,n", [(2, 2), (3, 2)])
def test_axioms_random(p, n):
    R = BaseRing(p, n)
    P = DeltaPolyRing(R, 1, cvars=1)
    rng = random.Random(7)
    for _ in range(25):
        x, y = rand_poly(R, P, rng), rand_poly(R, P, rng)
        lhs = (x + y).delta()
        rhs = x.delta() + y.delta()
        for i in range(1, p):
            rhs = rhs - binom_p_over_p(p, i) * x**i * y ** (p - i)
        assert lhs == rhs
        assert (x * y).delta() == x.delta() * y**p + x**p * y.delta() + p * (
            x.delta() * y.delta()
        )
        assert x.phi().delta() == x.delta().phi()
        w = Witt2Elt(p, x, x.delta()) * Witt2Elt(p, y, y.delta())
        assert w.x1 == (x * y).delta()


@pytest.mark.parametrize("p,nprec", [(2, 3), (3, 2)])
def test_iteration_lemma_coefficients(p, nprec):
    R = BaseRing(p, nprec)
    P = DeltaPolyRing(R, 1, cvars=1)
    S, t = P.var(0), P.tvar(0)
    cur = P.const(R.xi()) * S - t
    for m in range(1, nprec + 1):
        cur = cur.delta()
        # c_{p,m} = (sum_{j<m} p^(j(p-1))) phi^(m-1)(delta(xi))
        cpm = R.zero()
        dxi = R.xi().delta()
        for j in range(m):
            cpm = cpm + R.from_int(p ** (j * (p - 1)))
            if j:
                dxi = dxi.phi()
        cpm = cpm * dxi
        got = cur.terms.get(((("S", 0, m - 1), p),), R.zero(cur.level))
        assert got == cpm
        # top coefficient phi^m(xi)
        e = R.xi()
        for _ in range(m):
            e = e.phi()
        top = cur.terms.get(((("S", 0, m), 1),), R.zero(cur.level))
        assert top == e


def test_substitution():
    R = BaseRing(2, 3)
    P = DeltaPolyRing(R, 1, cvars=1)
    S, t = P.var(0), P.tvar(0)
    xi = P.const(R.xi())
    # S -> 0 in xi S - t + a
    a = P.const(R.from_int(5))
    expr = xi * S - t + a
    out = expr.substitute({("S", 0, 0): P.zero(), ("t", 0, 0): t}, coeff_map=P.const)
    assert out == a - t
    # identity substitution
    idsub = expr.substitute({("S", 0, 0): S, ("t", 0, 0): t}, coeff_map=P.const)
    assert idsub == expr
    # t -> xi*S (center 0) in delta(xi S - t): the tau^2 rewrite source
    P1 = (xi * S - t).delta()
    sub = P1.substitute(
        {("t", 0, 0): xi * S, ("S", 0, 0): S},
        coeff_map=P.const,
        check_coherence=False,
    )
    expect = P.const(R.xi().delta()) * S**2 + P.const(R.xi().phi()) * P.var(0, 1)
    assert sub == expect


def test_substitution_coherence_check():
    R = BaseRing(2, 3)
    P = DeltaPolyRing(R, 1)
    S = P.var(0)
    expr = S + P.var(0, 1)
    with pytest.raises(DeltaIncoherent):
        expr.substitute(
            {("S", 0, 0): S, ("S", 0, 1): S},  # wrong: delta(S) != S
            coeff_map=P.const,
        )


def test_budget():
    R = BaseRing(2, 2)
    P = DeltaPolyRing(R, 2, budget=12)
    x = P.var(0) + P.var(1) + P.one()
    with pytest.raises(BudgetExceeded):
        y = x
        for _ in range(6):
            y = y * x


def test_precision_guard():
    R = BaseRing(2, 1)
    P = DeltaPolyRing(R, 1)
    d = P.var(0).delta()
    with pytest.raises(PrecisionExhausted):
        d.delta()


def test_sexpr_deterministic():
    R = BaseRing(2, 2)
    P = DeltaPolyRing(R, 1, cvars=1)
    x = P.var(0) * P.tvar(0) + P.const(R.mu()) * P.var(0, 1)
    assert x.to_sexpr() == x.to_sexpr()
    assert "poly" in x.to_sexpr()
