"""Truncated divided delta-envelopes: rewrite rules, normal form, theta."""

import json
import pathlib
import random

import pytest

from qprism.base import BaseRing, Witt2Elt
from qprism.envelope import EnvRing, env_elt_from_json
from qprism.errors import BudgetExceeded, WeightCapTooSmall

GOLDEN = pathlib.Path(__file__).parent / "golden"


def test_rewrite_tau_square_p2_oracle():
    # delta([2]_q tau) = 0 forces tau^2 = q^{-1}(1+q^2) delta(tau)
    R = BaseRing(2, 2)
    E = EnvRing(R, [("zero",)], weight_cap=16)
    coef = R.q().invert() * (R.one() + R.q() * R.q())
    assert E.tau(0) * E.tau(0) == E._elt({(((0, 1), 1),): coef}, 2)


def test_rewrite_p3():
    R = BaseRing(3, 2)
    E = EnvRing(R, [("zero",)], weight_cap=27)
    cube = E.tau(0) ** 3
    # single delta-term with unit-times-phi(xi)/delta(xi) coefficient
    assert set(cube.terms) == {(((0, 1), 1),)}
    c = cube.terms[(((0, 1), 1),)]
    assert c == -(R.xi().delta().invert() * R.xi().phi())


def test_d0_envelope_is_coefficient_ring():
    R = BaseRing(2, 2)
    E = EnvRing(R, [])
    assert E.one() * E.one() == E.one()
    assert E.from_int(3) + E.from_int(4) == E.from_int(7)


def test_frame_constant():
    for p, centers in [(2, [("zero",)]), (2, [("int", 1)]), (3, [("zero",)])]:
        R = BaseRing(p, 2)
        E = EnvRing(R, centers, weight_cap=3 * p * p)
        t = E.t(0)
        assert t.delta().is_zero()
        assert t.phi() == t**p
        # t = a + xi tau
        assert t == E.const(E.centers[0]) + E.xi() * E.tau(0)


@pytest.mark.parametrize("p,d", [(2, 1), (2, 2), (3, 1), (3, 2)])
def test_commutativity_associativity(p, d):
    R = BaseRing(p, 2)
    centers = [("zero",), ("int", 1)][:d]
    E = EnvRing(R, centers, weight_cap=3 * p * p)
    rng = random.Random(11)
    for _ in range(25):
        x, y, z = (E.random(rng, nterms=2) for _ in range(3))
        assert x * y == y * x
        assert (x * y) * z == x * (y * z)


@pytest.mark.parametrize("p", [2, 3])
def test_delta_w2_on_envelope(p):
    R = BaseRing(p, 2)
    E = EnvRing(R, [("zero",)], weight_cap=3 * p * p)
    rng = random.Random(4)
    for _ in range(15):
        x, y = E.random(rng, nterms=2), E.random(rng, nterms=2)
        w = Witt2Elt(p, x, x.delta()) * Witt2Elt(p, y, y.delta())
        assert w.x1 == (x * y).delta()


def test_normalize_idempotent():
    R = BaseRing(2, 2)
    E = EnvRing(R, [("zero",)], weight_cap=16)
    rng = random.Random(9)
    for _ in range(20):
        x = E.random(rng, nterms=3)
        renorm = E.normalize(dict(x.terms), x.level)
        assert renorm == x
        assert all(e < E.p for m in x.terms for _v, e in m)


def test_relative_envelope():
    R = BaseRing(2, 2)
    D = EnvRing(R, [("zero",)], weight_cap=16)
    D1 = EnvRing(D, [("tvar", 0)], weight_cap=16)
    tt = D1.t(0)
    assert tt.delta().is_zero()
    # freeness: tau^(1) products stay in digit normal form over D
    x = D1.tau(0) * D1.tau(0)
    assert all(e < 2 for m in x.terms for _v, e in m)
    rng = random.Random(2)
    for _ in range(8):
        a, b = D1.random(rng, nterms=2), D1.random(rng, nterms=2)
        assert a * b == b * a


def test_theta_exact_images():
    R = BaseRing(2, 3)
    E = EnvRing(R, [("zero",), ("zero",)], weight_cap=16)
    th0 = E.qhiggs_derivation(0)
    # theta(delta tau) computed through the escalated twin: full level
    img = th0.gen_image(0, 1)
    assert img.level == E.n
    # p = 2 oracle: theta(dtau) = beta - tau = t*eta - tau = t - tau
    assert img == E.t(0) - E.tau(0)
    assert th0.apply(E.t(0)) == E.xi()
    assert th0.apply(E.t(1)).is_zero()
    assert th0.apply(E.from_int(9)).is_zero()


def test_theta_preserves_ideal_multiples():
    R = BaseRing(2, 3)
    E = EnvRing(R, [("zero",)], weight_cap=16)
    th = E.qhiggs_derivation(0)
    rng = random.Random(21)
    x = E.random(rng, nterms=2)
    assert th.apply(E.mu() * x) == E.mu() * th.apply(x)


def test_weight_cap_failure():
    R = BaseRing(2, 2)
    E = EnvRing(R, [("zero",)], weight_cap=3)
    # normalizing (delta^2 tau)^2 needs weight-8 monomials: over 2 * cap
    with pytest.raises((WeightCapTooSmall, BudgetExceeded)):
        E.normalize({(((0, 2), 2),): E.C.one()}, E.n)


def test_gamma_values():
    R = BaseRing(3, 2)
    E = EnvRing(R, [("zero",)], weight_cap=27)
    qp = E.const(E.scalar(R.q().phi()))
    assert E.gamma_i(0, E.t(0)) == qp * E.t(0)
    assert E.gamma_i(0, E.from_int(5)) == E.from_int(5)
    assert E.gamma_i(0, E.tau(0)) == E.tau(0) + E.t(0) * E.mu()


def test_serialization_roundtrip():
    R = BaseRing(2, 2)
    E = EnvRing(R, [("zero",)], weight_cap=16)
    rng = random.Random(31)
    for _ in range(8):
        x = E.random(rng, nterms=2)
        assert env_elt_from_json(E, x.to_json()) == x


@pytest.mark.parametrize("p", [2, 3])
def test_golden_rewrite_tables(p):
    """Regression lock: the CLI-rendered rewrite tables are frozen."""
    from qprism.cli import main

    out = GOLDEN / f"envelope_p{p}.json"
    tmp = out.parent / f"_regen_p{p}.json"
    rc = main([
        "envelope", "--p", str(p), "--prec", "2", "--vars", "1",
        "--max-level", "2", "--output", str(tmp),
    ])
    assert rc == 0
    got = json.loads(tmp.read_text())
    want = json.loads(out.read_text())
    tmp.unlink()
    assert got == want
