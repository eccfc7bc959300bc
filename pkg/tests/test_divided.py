"""Divided powers: sigma data, the PD comparison, the sigma identities."""

import json
import pathlib
import random

import pytest

from qprism.base import BaseRing
from qprism.divided import (
    PDConversion,
    PDRing,
    legendre_unit,
    pd_to_env_table,
    sigma_antisym_check,
    sigma_cocycle_check,
    sigma_of,
    sigma_pair,
)
from qprism.envelope import EnvRing
from qprism.errors import BadCenter, DepthExceeded
from qprism.strat import SimplicialEnvelope

GOLDEN = pathlib.Path(__file__).parent / "golden"


def test_pd_ring_laws():
    P = PDRing(2, 3, 1, depth_cap=10)
    X1, X2 = P.gen(0, 1), P.gen(0, 2)
    assert X1 * X1 == P.monomial((2,), 2)
    assert X2 * X2 == P.monomial((4,), 6)
    assert P.derive(0, P.gen(0, 3)) == X2
    assert P.derive(0, P.one()).is_zero()


@pytest.mark.parametrize("p", [2, 3, 5])
def test_legendre_units(p):
    for n in range(1, 40):
        legendre_unit(p, n)  # raises if the valuations disagree


def test_sigma_zero_center_p2():
    Rq = BaseRing(2, 3, "q1")
    E = EnvRing(Rq, [("zero",)], weight_cap=16)
    sd = sigma_of(E, 0, Rq.zero())
    assert sd.sigma == E.tau(0).delta()
    assert E.tau(0) ** 2 == 2 * sd.sigma


def test_sigma_nonzero_center():
    Rq = BaseRing(2, 3, "q1")
    # delta(4) = (4 - 16)/2 = -6 = 2 * (-3)
    E = EnvRing(Rq, [("int", 4)], weight_cap=16)
    sd = sigma_of(E, 0, Rq.from_int(-3))
    assert E.tau(0) ** 2 == 2 * sd.sigma


def test_bad_center():
    Rq = BaseRing(2, 3, "q1")
    E = EnvRing(Rq, [("int", 2)], weight_cap=16)  # delta(2) = -1, odd
    with pytest.raises(BadCenter):
        sigma_of(E, 0, Rq.zero())


@pytest.mark.parametrize("p,K", [(2, 2), (3, 1)])
def test_conversion_contract(p, K):
    N = 1
    Rq = BaseRing(p, N + K, "q1")
    E = EnvRing(Rq, [("zero",)], weight_cap=2 * p ** (K + 1))
    conv = PDConversion(E, [Rq.zero()], K, N)
    assert conv.convert(E.tau(0)) == conv.pd.gen(0, 1).at_level(N)
    th = E.qhiggs_derivation(0)
    rng = random.Random(9)
    halfw = (p ** (K + 1) - 1) // 2
    for _ in range(25):
        x = E.random(rng, max_weight=halfw, nterms=2)
        y = E.random(rng, max_weight=halfw, nterms=2)
        assert conv.convert(x * y) == conv.convert(x) * conv.convert(y)
        assert conv.convert(th.apply(x)) == conv.pd.derive(0, conv.convert(x)).at_level(N)


def test_conversion_examples_p2():
    N, K = 1, 2
    Rq = BaseRing(2, N + K, "q1")
    E = EnvRing(Rq, [("zero",)], weight_cap=16)
    conv = PDConversion(E, [Rq.zero()], K, N)
    # delta(tau) |-> sigma = X^[2] at p = 2
    assert conv.convert(E.tau(0, 1)) == conv.pd.gen(0, 2).at_level(N)
    # tau * delta(tau) |-> X^[1] X^[2] = 3 X^[3]
    assert conv.convert(E.tau(0) * E.tau(0, 1)) == (conv.pd.gen(0, 3) * 3).at_level(N)


def test_depth_exceeded():
    Rq = BaseRing(2, 3, "q1")
    E = EnvRing(Rq, [("zero",)], weight_cap=32)
    conv = PDConversion(E, [Rq.zero()], 1, 2)
    with pytest.raises(DepthExceeded):
        conv.convert(E.tau(0, 2))
    with pytest.raises(DepthExceeded):
        PDConversion(E, [Rq.zero()], 5, 2)


def test_inverse_dictionary_shift():
    """theta(tau^[n+1]) = tau^[n] through the inverse dictionary."""
    N, K = 1, 2
    Rq = BaseRing(2, N + K, "q1")
    E = EnvRing(Rq, [("zero",)], weight_cap=16)
    conv = PDConversion(E, [Rq.zero()], K, N)
    inv = pd_to_env_table(conv, max_weight=7)
    th = E.qhiggs_derivation(0)

    def env_of(n):
        out = E.zero()
        for mono, c in inv[(n,)].items():
            out = out + E.monomial(mono) * c
        return out

    for n in range(1, 7):
        lhs = th.apply(env_of(n + 1))
        assert conv.convert(lhs) == conv.convert(env_of(n))


@pytest.mark.parametrize("p", [2, 3])
def test_sigma_identities_on_self_products(p):
    Rq = BaseRing(p, 2, "q1")
    S = SimplicialEnvelope(Rq, [("zero",)], weight_cap=3 * p * p)
    tau12 = S.tau2(1, 0, 0)
    tau13 = S.tau2(2, 0, 0)
    t0, t1 = S.t_of(2, 0, 0), S.t_of(2, 1, 0)
    rep = sigma_antisym_check(tau12, t0, t1)
    assert rep.passed, rep.dumps()
    rep = sigma_cocycle_check(tau12, tau13, t0, t1)
    assert rep.passed, rep.dumps()


def test_sigma_zero_difference():
    # tau = 0: both sides vanish
    Rq = BaseRing(2, 2, "q1")
    S = SimplicialEnvelope(Rq, [("zero",)], weight_cap=12)
    z = S.D2.zero()
    t0 = S.t_of(2, 0, 0)
    assert sigma_pair(z, t0).is_zero()


def test_sigma_negative_control():
    Rq = BaseRing(2, 2, "q1")
    S = SimplicialEnvelope(Rq, [("zero",)], weight_cap=12)
    tau12 = S.tau2(1, 0, 0)
    t0, t1 = S.t_of(2, 0, 0), S.t_of(2, 1, 0)
    s12 = sigma_pair(tau12, t0) + S.D2.one()
    s21 = sigma_pair(-tau12, t1)
    assert not (s21 == s12)  # (-1)^2 = 1 at p = 2


@pytest.mark.parametrize("p", [2, 3])
def test_golden_pd_dictionary(p):
    from qprism.cli import main

    out = GOLDEN / f"pd_p{p}.json"
    tmp = out.parent / f"_regen_pd{p}.json"
    rc = main(["pd", "--p", str(p), "--prec", "1", "--depth", "2",
               "--output", str(tmp)])
    assert rc == 0
    got = json.loads(tmp.read_text())
    want = json.loads(out.read_text())
    tmp.unlink()
    assert got == want
