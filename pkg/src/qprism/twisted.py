"""alpha-derivations, twisted extensions, and their verification toolkit.

An alpha-derivation is an additive map with

    d(x y) = d(x) y + x d(y) + alpha d(x) d(y),

equivalently a section x |-> (x, d(x)) of the square-zero-like extension
E^alpha(A) = A[T]/(T^2 - alpha T).  When the host is a delta-ring and
delta(alpha) = alpha*beta, the derivation is delta-compatible (with
respect to beta) when

    d(delta(x)) = (alpha^(p-1) + p beta) delta(d(x)) + beta d(x)^p
                  - sum_{v=1}^{p-1} (C(p,v)/p) x^(p-v) alpha^(v-1) d(x)^v,

which is exactly what makes 1 + alpha*d a delta-endomorphism; E^alpha
then carries the delta-structure with delta(0,1) = (0,beta), and

    D o phi = (alpha^(p-1) + p beta) phi o D.

Derivations are stored as generator images plus structural closure:
the host rings here have infinite module rank, but the compatibility
lemmas guarantee generator data determines everything.  d(delta^k(gen))
is materialized lazily from the displayed equation (one precision level
per unfolding) and memoized.

Negative controls are first class: a corrupted spec (Leibniz closure
disabled, or beta shifted) exercises each check's failure path.
"""

from __future__ import annotations

import math

from .base import binom_p_over_p
from .errors import (
    BadBeta,
    HostMismatch,
    NotDeltaCompatible,
    PreconditionViolated,
    RingMismatch,
)
from .report import Report, describe

# ---------------------------------------------------------------------------
# the twisted extension E^alpha(A), with optional delta-structure


class TwistedExtElt:
    """Element (x0, x1) of E^alpha(A) = A[T]/(T^2 - alpha T)."""

    __slots__ = ("alpha", "x0", "x1")

    def __init__(self, alpha, x0, x1):
        self.alpha = alpha
        self.x0 = x0
        self.x1 = x1

    def _chk(self, other):
        if not (self.alpha == other.alpha):
            raise HostMismatch("twisted extensions with different alpha")

    def __add__(self, other):
        self._chk(other)
        return TwistedExtElt(self.alpha, self.x0 + other.x0, self.x1 + other.x1)

    def __sub__(self, other):
        self._chk(other)
        return TwistedExtElt(self.alpha, self.x0 - other.x0, self.x1 - other.x1)

    def __mul__(self, other):
        self._chk(other)
        return TwistedExtElt(
            self.alpha,
            self.x0 * other.x0,
            self.x0 * other.x1 + self.x1 * other.x0 + self.alpha * (self.x1 * other.x1),
        )

    def __pow__(self, e):
        out = TwistedExtElt(self.alpha, self.x0 * 0 + 1, self.x0 * 0)
        b = self
        while e:
            if e & 1:
                out = out * b
            e >>= 1
            if e:
                b = b * b
        return out

    def __eq__(self, other):
        return self.x0 == other.x0 and self.x1 == other.x1

    def pi0(self):
        return self.x0

    def pi_alpha(self):
        return self.x0 + self.alpha * self.x1

    def D(self):
        return self.x1

    def delta(self, beta, p):
        """delta-structure of E^(alpha,beta)_delta: delta(0,1) = (0,beta)."""
        a = self.alpha
        y = (a ** (p - 1) + p * beta) * self.x1.delta() + beta * self.x1**p
        for v in range(1, p):
            y = y - binom_p_over_p(p, v) * self.x0 ** (p - v) * a ** (v - 1) * self.x1**v
        return TwistedExtElt(a, self.x0.delta(), y)

    def __repr__(self):
        return f"E({self.x0!r}, {self.x1!r})"


# ---------------------------------------------------------------------------


class DerivationSpec:
    """An alpha-derivation given by generator images and structural closure.

    host must provide: p, sorted_terms()-style elements whose monomials
    are tuples of ((i, k), e) factor pairs, embedding of coefficients,
    and delta on elements.  Works for EnvRing and ChartRing hosts.

    coeff_derivation: action on the coefficient ring (None = C-linear);
    used for the simplicial directions that differentiate the inner
    envelope.
    """

    def __init__(
        self,
        host,
        alpha,
        beta,
        var_images,
        coeff_derivation=None,
        delta_compatible=True,
        corrupt=None,
        name="",
        image_loader=None,
    ):
        self.host = host
        self.alpha = alpha
        self.beta = beta
        self.var_images = dict(var_images)
        self.coeff_derivation = coeff_derivation
        self.delta_compatible = delta_compatible
        self.corrupt = corrupt
        self.name = name
        # optional exact-image source (escalated-twin unfolding)
        self.image_loader = image_loader if corrupt is None else None
        self._gen_memo = {}

    @property
    def p(self):
        return self.host.p

    # -- generator images -------------------------------------------------------

    def gen_image(self, i, k):
        """d(delta^k(tau_i)), unfolding the compatibility equation."""
        key = (i, k)
        got = self._gen_memo.get(key)
        if got is not None:
            return got
        if k == 0:
            img = self.var_images[i]
        elif self.image_loader is not None:
            img = self.image_loader(i, k)
        else:
            if not self.delta_compatible and self.corrupt is None:
                raise NotDeltaCompatible(
                    f"{self.name or 'derivation'} has no delta-compatibility data"
                )
            p = self.p
            a, b = self.alpha, self.beta
            y = self._basis_gen(i, k - 1)
            dy = self.gen_image(i, k - 1)
            img = (a ** (p - 1) + p * b) * dy.delta() + b * dy**p
            for v in range(1, p):
                img = img - binom_p_over_p(p, v) * y ** (p - v) * a ** (v - 1) * dy**v
        self._gen_memo[key] = img
        return img

    def _basis_gen(self, i, k):
        return self.host.tau(i, k)

    # -- application -----------------------------------------------------------------

    def apply(self, x):
        if x.ring != self.host:
            raise HostMismatch("derivation applied to foreign element")
        out = None
        for mono, c in x.sorted_terms():
            val, dval = self._term_pair(mono, c)
            out = dval if out is None else out + dval
        return self.host.zero(x.level) if out is None else out

    def _leibniz(self, u, du, v, dv):
        # d(uv) = du*v + u*dv (+ alpha du dv unless the corrupted control)
        out = du * v + u * dv
        if self.corrupt != "linear":
            out = out + self.alpha * (du * dv)
        return out

    def _term_pair(self, mono, c):
        """(value, derivative) of one term c * prod factors."""
        val = self.host.const(c)
        if self.coeff_derivation is None:
            dval = self.host.zero(c.level)
        else:
            dval = self.host.const(self.coeff_derivation.apply(c))
        for (i, k), e in mono:
            f = self._basis_gen(i, k)
            fe = f**e
            dfe = self._power_image(i, k, e)
            val, dval = val * fe, self._leibniz(val, dval, fe, dfe)
        return val, dval

    def _power_image(self, i, k, e):
        # d(F^e) = sum_{m=1}^e C(e,m) F^(e-m) alpha^(m-1) dF^m
        f = self._basis_gen(i, k)
        df = self.gen_image(i, k)
        if self.corrupt == "linear":
            # classical power rule: wrong for a twisted derivation
            return e * f ** (e - 1) * df
        out = None
        for m in range(1, e + 1):
            term = math.comb(e, m) * f ** (e - m) * self.alpha ** (m - 1) * df**m
            out = term if out is None else out + term
        return out if out is not None else self.host.zero()

    def gamma(self, x):
        """The ring endomorphism 1 + alpha * d."""
        return x + self.alpha * self.apply(x)

    def section(self, x):
        return TwistedExtElt(self.alpha, x, self.apply(x))

    def with_corrupt(self, mode):
        """Corrupted twins used as negative controls: 'linear' disables the
        twisted Leibniz closure, 'beta' shifts beta by one, 'image' bumps the
        first generator image so the envelope relations are violated."""
        images = dict(self.var_images)
        if mode == "image" and images:
            i0 = sorted(images)[0]
            images[i0] = images[i0] + self.host.tau(i0, 0) + 1
        d = DerivationSpec(
            self.host,
            self.alpha,
            self.beta + 1 if mode == "beta" else self.beta,
            images,
            self.coeff_derivation,
            self.delta_compatible,
            corrupt=mode,
            name=f"{self.name}!{mode}",
        )
        return d

    def to_json(self):
        return {
            "alpha": describe(self.alpha),
            "beta": describe(self.beta),
            "images": {str(i): describe(v) for i, v in sorted(self.var_images.items())},
            "delta_compatible": self.delta_compatible,
        }


# ---------------------------------------------------------------------------
# check operations


def section_check(D, rng, samples=40, sampler=None, name="section-hom"):
    """s(x) = (x, d(x)) must be an algebra homomorphism into E^alpha."""
    rep = Report(name, "twisted-section-ring-homomorphism", samples=samples)
    sample = sampler or (lambda r: D.host.random(r))
    host = D.host
    gens = []
    for i in range(host.d):
        gens.append(host.tau(i, 0))
        if host.n >= 1:
            gens.append(host.tau(i, 1))
    pairs = [(a, b) for a in gens for b in gens]
    pairs += [(sample(rng), sample(rng)) for _ in range(samples)]
    for x, y in pairs:
        if not (D.section(x) * D.section(y) == D.section(x * y)):
            return rep.fail(
                witness={"x": describe(x), "y": describe(y)},
                note="s(xy) != s(x)s(y)",
            )
        if not (D.section(x) + D.section(y) == D.section(x + y)):
            return rep.fail(
                witness={"x": describe(x), "y": describe(y)},
                note="s(x+y) != s(x)+s(y)",
            )
    return rep


def delta_compat_check(D, rng, samples=20, sampler=None, gens=True, name="delta-compat"):
    """Verify the delta-compatibility equation on generators and samples."""
    rep = Report(name, "twisted-derivation-delta-compatibility", samples=samples)
    host = D.host
    p = D.p
    if not (D.alpha.delta() == D.alpha * D.beta):
        raise BadBeta("delta(alpha) != alpha*beta")
    targets = []
    if gens:
        targets += [host.tau(i, 0) for i in range(host.d)]
    sample = sampler or (lambda r: host.random(r))
    targets += [sample(rng) for _ in range(samples)]
    for x in targets:
        lhs = D.apply(x.delta())
        a, b = D.alpha, D.beta
        dx = D.apply(x)
        rhs = (a ** (p - 1) + p * b) * dx.delta() + b * dx**p
        for v in range(1, p):
            rhs = rhs - binom_p_over_p(p, v) * x ** (p - v) * a ** (v - 1) * dx**v
        if not (lhs == rhs):
            return rep.fail(
                witness={"x": describe(x), "lhs": describe(lhs), "rhs": describe(rhs)},
                note="compat equation failed",
            )
    return rep


def frobenius_relation_check(D, rng, samples=20, sampler=None, name="frobenius-relation"):
    """d(phi(x)) = (alpha^(p-1) + p*beta) phi(d(x))."""
    rep = Report(name, "twisted-derivation-frobenius-exchange", samples=samples)
    host, p = D.host, D.p
    factor = D.alpha ** (p - 1) + p * D.beta
    sample = sampler or (lambda r: host.random(r))
    for _ in range(samples):
        x = sample(rng)
        lhs = D.apply(x.phi())
        rhs = factor * D.apply(x).phi()
        if not (lhs == rhs):
            return rep.fail(
                witness={"x": describe(x), "lhs": describe(lhs), "rhs": describe(rhs)},
                note="Frobenius exchange failed",
            )
    return rep


def commute_check(D1, D2, rng, samples=15, sampler=None, name="commutation"):
    """d1 d2 = d2 d1, certified on generators, spot-checked on samples."""
    rep = Report(name, "twisted-derivation-commutation", samples=samples)
    if D1.host != D2.host:
        raise HostMismatch("derivations on different hosts")
    if not D1.apply(D2.alpha).is_zero() or not D2.apply(D1.alpha).is_zero():
        raise PreconditionViolated("d_i(alpha_j) != 0")
    host = D1.host
    targets = [host.tau(i, 0) for i in range(host.d)]
    sample = sampler or (lambda r: host.random(r))
    targets += [sample(rng) for _ in range(samples)]
    for x in targets:
        lhs = D1.apply(D2.apply(x))
        rhs = D2.apply(D1.apply(x))
        if not (lhs == rhs):
            return rep.fail(
                witness={"x": describe(x), "lhs": describe(lhs), "rhs": describe(rhs)},
                note="derivations do not commute",
            )
    return rep


def ext_delta_ring_check(D, rng, samples=15, sampler=None, name="ext-delta-ring"):
    """E^(alpha,beta)_delta: (e, delta e) is multiplicative; projections are
    delta-homomorphisms."""
    rep = Report(name, "twisted-extension-delta-structure", samples=samples)
    host, p = D.host, D.p
    if not (D.alpha.delta() == D.alpha * D.beta):
        raise BadBeta("delta(alpha) != alpha*beta")
    sample = sampler or (lambda r: host.random(r))
    pconst = TwistedExtElt(D.alpha, host.from_int(p), host.zero())
    for _ in range(samples):
        e1 = TwistedExtElt(D.alpha, sample(rng), sample(rng))
        e2 = TwistedExtElt(D.alpha, sample(rng), sample(rng))
        prod = e1 * e2
        d1, d2 = e1.delta(D.beta, p), e2.delta(D.beta, p)
        rhs = d1 * e2**p + e1**p * d2 + pconst * d1 * d2
        if not (prod.delta(D.beta, p) == rhs):
            return rep.fail(
                witness={"e1": describe(e1), "e2": describe(e2)},
                note="delta product rule failed on the extension",
            )
        ssum = e1 + e2
        rhs = d1 + d2
        for v in range(1, p):
            corr = binom_p_over_p(p, v)
            rhs = rhs - TwistedExtElt(D.alpha, host.from_int(corr), host.zero()) * e1**v * e2 ** (p - v)
        if not (ssum.delta(D.beta, p) == rhs):
            return rep.fail(
                witness={"e1": describe(e1), "e2": describe(e2)},
                note="delta sum rule failed on the extension",
            )
        # pi0 and pi_alpha are delta-homomorphisms
        if not (prod.delta(D.beta, p).pi0() == prod.pi0().delta()):
            return rep.fail(witness={"e": describe(prod)}, note="pi0 not a delta-hom")
        if not (prod.delta(D.beta, p).pi_alpha() == prod.pi_alpha().delta()):
            return rep.fail(witness={"e": describe(prod)}, note="pi_alpha not a delta-hom")
    return rep
