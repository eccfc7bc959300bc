"""Framed polynomial charts: the q-derivative calculus."""

import random

from qprism.base import BaseRing, Witt2Elt
from qprism.chart import ChartRing, chart_elt_from_json


def test_q_derivative_formula():
    R = BaseRing(2, 2)
    A = ChartRing(R, 1, degree_cap=64)
    t = A.tau(0)
    for m in range(1, 7):
        assert A.theta_i(0, t**m) == A.const(R.qint(2 * m)) * t ** (m - 1)
    assert A.theta_i(0, A.one()).is_zero()


def test_gamma_scales_monomials():
    R = BaseRing(3, 1)
    A = ChartRing(R, 2, degree_cap=32)
    t0, t1 = A.tau(0), A.tau(1)
    x = t0**2 * t1
    assert A.gamma_i(0, x) == A.const(R.q() ** 6) * x
    assert A.gamma_i(1, x) == A.const(R.q() ** 3) * x


def test_cross_validation_with_generic_derivation():
    R = BaseRing(2, 2)
    A = ChartRing(R, 2, degree_cap=64)
    rng = random.Random(5)
    for i in range(2):
        th = A.qhiggs_derivation(i)
        for _ in range(10):
            x = A.random(rng)
            assert th.apply(x) == A.theta_i(i, x)
            assert th.gamma(x) == A.gamma_i(i, x)


def test_frobenius_exchange_on_chart():
    R = BaseRing(2, 2)
    A = ChartRing(R, 1, degree_cap=64)
    rng = random.Random(6)
    t = A.tau(0)
    for _ in range(10):
        x = A.random(rng)
        lhs = A.theta_i(0, x.phi())
        rhs = A.xi() * t ** (R.p - 1) * A.theta_i(0, x).phi()
        assert lhs == rhs


def test_chart_delta_w2():
    R = BaseRing(2, 2)
    A = ChartRing(R, 1, degree_cap=64)
    rng = random.Random(7)
    for _ in range(10):
        x, y = A.random(rng), A.random(rng)
        w = Witt2Elt(2, x, x.delta()) * Witt2Elt(2, y, y.delta())
        assert w.x1 == (x * y).delta()
    assert A.tau(0).delta().is_zero()


def test_serialization():
    R = BaseRing(3, 1)
    A = ChartRing(R, 2, degree_cap=32)
    rng = random.Random(8)
    for _ in range(6):
        x = A.random(rng)
        assert chart_elt_from_json(A, x.to_json()) == x
