"""Twisted extensions and alpha-derivations: sections, compatibility."""

import random

import pytest

from qprism.base import BaseRing
from qprism.envelope import EnvRing
from qprism.errors import BadBeta, PreconditionViolated
from qprism import twisted as tw
from qprism.twisted import TwistedExtElt


@pytest.fixture(scope="module")
def env2():
    R = BaseRing(2, 3)
    return EnvRing(R, [("zero",), ("zero",)], weight_cap=16)


@pytest.fixture(scope="module")
def env3():
    R = BaseRing(3, 2)
    return EnvRing(R, [("zero",)], weight_cap=27)


def sampler_for(E):
    return lambda r: E.random(r, nterms=2)


def test_extension_ring_laws(env2):
    E = env2
    al = E.alpha_i(0)
    x = TwistedExtElt(al, E.random(random.Random(0), nterms=2), E.zero())
    y = TwistedExtElt(al, E.random(random.Random(1), nterms=2), E.zero())
    # iota is a ring map
    assert (x * y).x1.is_zero()
    # T^2 = alpha T
    T = TwistedExtElt(al, E.zero(), E.one())
    assert (T * T) == TwistedExtElt(al, E.zero(), al)
    # pi_alpha(x0, x1) = x0 + alpha x1
    e = TwistedExtElt(al, E.tau(0), E.tau(1))
    assert e.pi_alpha() == E.tau(0) + al * E.tau(1)
    assert e.pi0() == E.tau(0)
    assert e.D() == E.tau(1)


def test_derivation_values(env2):
    E = env2
    th = E.qhiggs_derivation(0)
    # power formula instance: d(x^2) = 2x dx + alpha dx^2
    x = E.tau(0) + E.t(1)
    dx = th.apply(x)
    assert th.apply(x * x) == 2 * x * dx + th.alpha * dx * dx
    assert th.apply(E.from_int(5)).is_zero()
    # theta(t^2) = [4]_q t
    lhs = th.apply(E.t(0) ** 2)
    assert lhs == E.const(E.scalar(E.prime_base.qint(4))) * E.t(0)


def test_section_check(env2):
    E = env2
    rng = random.Random(2)
    rep = tw.section_check(E.qhiggs_derivation(0), rng, samples=10,
                           sampler=sampler_for(E))
    assert rep.passed
    # zero derivation passes trivially
    zero = tw.DerivationSpec(E, E.alpha_i(0), E.t(0) * E.eta(),
                             {i: E.zero() for i in range(E.d)})
    rep = tw.section_check(zero, rng, samples=5, sampler=sampler_for(E))
    assert rep.passed


def test_section_negative_control():
    # corruption must be visible: unit-center chart
    R = BaseRing(2, 3)
    E = EnvRing(R, [("int", 1)], weight_cap=16)
    rng = random.Random(3)
    bad = E.qhiggs_derivation(0).with_corrupt("linear")
    rep = tw.section_check(bad, rng, samples=10, sampler=sampler_for(E))
    assert not rep.passed
    assert rep.witness is not None


def test_delta_compat(env2, env3):
    rng = random.Random(5)
    for E in (env2, env3):
        th = E.qhiggs_derivation(0)
        rep = tw.delta_compat_check(th, rng, samples=4, sampler=sampler_for(E))
        assert rep.passed, rep.dumps()


def test_delta_compat_beta_for_frame():
    # beta for alpha = t mu is t^(p-1) eta; the frame generator passes
    R = BaseRing(3, 2)
    E = EnvRing(R, [("zero",)], weight_cap=27)
    th = E.qhiggs_derivation(0)
    assert th.alpha == E.t(0) * E.mu()
    assert th.beta == E.t(0) ** 2 * E.eta()
    assert th.alpha.delta() == th.alpha * th.beta


def test_bad_beta(env2):
    E = env2
    rng = random.Random(6)
    bad = E.qhiggs_derivation(0).with_corrupt("beta")
    with pytest.raises(BadBeta):
        tw.delta_compat_check(bad, rng, samples=2, sampler=sampler_for(E))


def test_frobenius_relation(env2, env3):
    rng = random.Random(7)
    for E in (env2, env3):
        p = E.p
        th = E.qhiggs_derivation(0)
        # alpha^(p-1) + p beta = t^(p-1) [p]_q exactly
        assert th.alpha ** (p - 1) + p * th.beta == E.t(0) ** (p - 1) * E.xi()
        rep = tw.frobenius_relation_check(th, rng, samples=4, sampler=sampler_for(E))
        assert rep.passed, rep.dumps()


def test_commute(env2):
    E = env2
    rng = random.Random(8)
    rep = tw.commute_check(E.qhiggs_derivation(0), E.qhiggs_derivation(1),
                           rng, samples=4, sampler=sampler_for(E))
    assert rep.passed
    # zero derivation commutes with anything
    zero = tw.DerivationSpec(E, E.alpha_i(1), E.t(1) * E.eta(),
                             {i: E.zero() for i in range(E.d)})
    rep = tw.commute_check(E.qhiggs_derivation(0), zero, rng, samples=3,
                           sampler=sampler_for(E))
    assert rep.passed


def test_commute_precondition():
    # d1(alpha_2) != 0 must be rejected
    R = BaseRing(2, 3)
    E = EnvRing(R, [("zero",), ("zero",)], weight_cap=16)
    th0 = E.qhiggs_derivation(0)
    weird = tw.DerivationSpec(E, E.alpha_i(1), E.t(1) * E.eta(),
                              {0: E.t(1), 1: E.zero()})
    with pytest.raises(PreconditionViolated):
        tw.commute_check(weird, th0, random.Random(0), samples=1,
                         sampler=lambda r: E.random(r, nterms=1))


def test_vanishing_propagates_through_delta(env2):
    # d(x) = 0 implies d(delta(x)) = 0
    E = env2
    th = E.qhiggs_derivation(0)
    x = E.t(1) + E.from_int(3)  # theta_0 kills it
    assert th.apply(x).is_zero()
    assert th.apply(x.delta()).is_zero()


def test_ext_delta_ring(env2):
    rng = random.Random(9)
    rep = tw.ext_delta_ring_check(env2.qhiggs_derivation(0), rng, samples=4,
                                  sampler=sampler_for(env2))
    assert rep.passed, rep.dumps()


def test_xi_identity_instance(env2):
    """The delta-compat equation at x = t reduces to the base identity."""
    E = env2
    th = E.qhiggs_derivation(0)
    p = E.p
    t = E.t(0)
    lhs = th.apply(t.delta())
    from qprism.base import binom_p_over_p

    dt = th.apply(t)
    rhs = (th.alpha ** (p - 1) + p * th.beta) * dt.delta() + th.beta * dt**p
    for v in range(1, p):
        rhs = rhs - binom_p_over_p(p, v) * t ** (p - v) * th.alpha ** (v - 1) * dt**v
    assert lhs.is_zero() and lhs == rhs
