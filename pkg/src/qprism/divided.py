"""Divided powers on delta-rings and the q = 1 comparison.

At q = 1 the envelope relation becomes p*tau_i = t_i - a_i, and with
delta(a_i) = p b_i the element

    sigma_i = (1 - p^(p-1))^(-1) ( -b_i - delta(tau_i)
              + sum_{v=1}^{p-1} (C(p,v)/p) a_i^(p-v) p^(v-1) tau_i^v )

satisfies tau_i^p = p sigma_i, which seeds a full divided-power
structure: the envelope is (p-adically) a PD polynomial ring on the
tau_i, with theta_i acting as the shift X^[n+1] |-> X^[n].

env_to_pd realizes the comparison at finite precision.  Division by p
is exact on canonical representatives but costs one p-digit, so the
conversion carries an escalated-precision contract: a dictionary of
depth K (images of delta^k(tau), k <= K) delivering output precision N
is built from an envelope at precision N + K.  tau^[n] is assembled
multiplicatively from tau^[p^k] blocks: the correcting unit
prod (p^k!)^(a_k) * a_k! / n! is a p-adic unit by Legendre's formula.

The antisymmetry and cocycle identities of the difference torsors
(sigma_21 = (-1)^p sigma_12 and the correction-term cocycle) are
verified by dedicated checkers, used on the self-product envelopes.
"""

from __future__ import annotations

import math

from .base import BaseRing, binom_p_over_p
from .envelope import EnvRing
from .errors import (
    BadCenter,
    DepthExceeded,
    PreconditionViolated,
    PrecisionExhausted,
    RingMismatch,
)
from .report import Report, describe

# ---------------------------------------------------------------------------
# PD polynomial rings with integer coefficients mod p^E


class PDRing:
    """Z/p^E [X_1..X_d]_PD truncated at per-variable weight < depth_cap."""

    def __init__(self, p, E, d, depth_cap):
        self.p = p
        self.E = E
        self.mod = p**E
        self.d = d
        self.depth_cap = depth_cap

    def __eq__(self, other):
        return (
            isinstance(other, PDRing)
            and (self.p, self.E, self.d, self.depth_cap)
            == (other.p, other.E, other.d, other.depth_cap)
        )

    def __hash__(self):
        return hash(("PDRing", self.p, self.E, self.d, self.depth_cap))

    def __repr__(self):
        return f"PD(Z/{self.p}^{self.E}; d={self.d}, depth<{self.depth_cap})"

    def zero(self):
        return PDElt(self, {})

    def one(self):
        return PDElt(self, {(0,) * self.d: 1})

    def from_int(self, c):
        c %= self.mod
        return PDElt(self, {(0,) * self.d: c} if c else {})

    def gen(self, v, n=1):
        exp = [0] * self.d
        exp[v] = n
        return PDElt(self, {tuple(exp): 1})

    def monomial(self, exps, c=1):
        c %= self.mod
        return PDElt(self, {tuple(exps): c} if c else {})

    def derive(self, v, x):
        """The PD shift: X_v^[n] |-> X_v^[n-1]."""
        out = {}
        for n, c in x.terms.items():
            if n[v] == 0:
                continue
            n2 = tuple(e - 1 if t == v else e for t, e in enumerate(n))
            out[n2] = (out.get(n2, 0) + c) % self.mod
        return PDElt(self, {k: v2 for k, v2 in out.items() if v2})


class PDElt:
    __slots__ = ("ring", "terms")

    def __init__(self, ring, terms):
        self.ring = ring
        self.terms = terms

    def is_zero(self):
        return not self.terms

    def __eq__(self, other):
        if isinstance(other, int):
            other = self.ring.from_int(other)
        if self.ring.p != other.ring.p:
            return NotImplemented
        mod = min(self.ring.mod, other.ring.mod)
        keys = set(self.terms) | set(other.terms)
        return all(
            (self.terms.get(k, 0) - other.terms.get(k, 0)) % mod == 0 for k in keys
        )

    def __add__(self, other):
        if isinstance(other, int):
            other = self.ring.from_int(other)
        if self.ring != other.ring:
            raise RingMismatch("PD elements over different rings")
        out = dict(self.terms)
        for k, c in other.terms.items():
            s = (out.get(k, 0) + c) % self.ring.mod
            if s:
                out[k] = s
            elif k in out:
                del out[k]
        return PDElt(self.ring, out)

    def __neg__(self):
        return PDElt(self.ring, {k: self.ring.mod - c for k, c in self.terms.items()})

    def __sub__(self, other):
        if isinstance(other, int):
            other = self.ring.from_int(other)
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, int):
            out = {}
            for k, c in self.terms.items():
                c = (c * other) % self.ring.mod
                if c:
                    out[k] = c
            return PDElt(self.ring, out)
        if self.ring != other.ring:
            raise RingMismatch("PD elements over different rings")
        ring = self.ring
        out = {}
        for na, ca in self.terms.items():
            for nb, cb in other.terms.items():
                n = tuple(a + b for a, b in zip(na, nb))
                if any(e >= ring.depth_cap for e in n):
                    continue
                c = ca * cb
                for a, b in zip(na, nb):
                    c *= math.comb(a + b, a)
                c %= ring.mod
                if not c:
                    continue
                s = (out.get(n, 0) + c) % ring.mod
                if s:
                    out[n] = s
                elif n in out:
                    del out[n]
        return PDElt(ring, out)

    __rmul__ = __mul__

    def __pow__(self, e):
        out = self.ring.one()
        b = self
        while e:
            if e & 1:
                out = out * b
            e >>= 1
            if e:
                b = b * b
        return out

    def reduce_to(self, ring):
        """Reduce coefficients into a smaller-modulus PD ring."""
        out = {}
        for k, c in self.terms.items():
            c %= ring.mod
            if c and all(e < ring.depth_cap for e in k):
                out[k] = c
        return PDElt(ring, out)

    def __repr__(self):
        if not self.terms:
            return "0"
        bits = []
        for n, c in sorted(self.terms.items()):
            mono = "*".join(f"X{v}^[{e}]" for v, e in enumerate(n) if e) or "1"
            bits.append(f"{c}*{mono}")
        return " + ".join(bits)

    def to_json(self):
        return {"terms": [[list(n), str(c)] for n, c in sorted(self.terms.items())]}


# ---------------------------------------------------------------------------
# sigma data


class PDSigmaData:
    """(tau, a, b, sigma) with delta(a) = p b and tau^p = p sigma."""

    def __init__(self, tau, a, b, sigma):
        self.tau = tau
        self.a = a
        self.b = b
        self.sigma = sigma


def sigma_of(E, i, b):
    """sigma_i for the i-th envelope generator at q = 1; verifies
    delta(a_i) = p b_i and tau_i^p = p sigma_i."""
    if E.mode != "q1":
        raise PreconditionViolated("sigma_of needs a q=1 envelope")
    p = E.p
    a = E.centers[i]
    if not (a.delta() == p * b):
        raise BadCenter("delta(a) != p*b")
    tau = E.tau(i)
    unit_inv = E.scalar(E.prime_base.from_int(1 - p ** (p - 1)).invert())
    acc = E.const(-b) - tau.delta()
    for v in range(1, p):
        acc = acc + binom_p_over_p(p, v) * E.const(a ** (p - v)) * p ** (v - 1) * tau**v
    sigma = E.const(unit_inv) * acc
    if not (tau**p == p * sigma):
        raise BadCenter("tau^p != p sigma (internal inconsistency)")
    return PDSigmaData(tau, a, b, sigma)


def sigma_pair(tau, t_first):
    """sigma for a difference torsor: delta(t) = 0, p tau = t' - t,
    using the first-index frame constant t.  Verifies tau^p = p sigma."""
    E = tau.ring
    p = E.p
    unit_inv = E.scalar(E.prime_base.from_int(1 - p ** (p - 1)).invert())
    acc = -tau.delta()
    for v in range(1, p):
        acc = acc + binom_p_over_p(p, v) * t_first ** (p - v) * p ** (v - 1) * tau**v
    sigma = unit_inv * acc
    if not (tau**p == p * sigma):
        raise PreconditionViolated("tau^p != p sigma for the difference torsor")
    return sigma


def sigma_antisym_check(tau12, t1, t2, name="sigma-antisymmetry"):
    """sigma_21 = (-1)^p sigma_12 for tau_21 = -tau_12."""
    rep = Report(name, "sigma-antisymmetry")
    E = tau12.ring
    p = E.p
    tau21 = -tau12
    s12 = sigma_pair(tau12, t1)
    s21 = sigma_pair(tau21, t2)
    want = s12 if p % 2 == 0 else -s12
    want = ((-1) ** p) * s12
    if not (s21 == want):
        return rep.fail(
            witness={"s21": describe(s21), "s12": describe(s12)},
            note="antisymmetry failed",
        )
    return rep


def sigma_cocycle_check(tau12, tau13, t1, t2, name="sigma-cocycle"):
    """sigma_23 = sigma_13 + (-1)^p sigma_12
    + sum_v (C(p,v)/p) tau_13^v (-tau_12)^(p-v), with tau_23 = tau_13 - tau_12."""
    rep = Report(name, "sigma-cocycle")
    E = tau12.ring
    p = E.p
    tau23 = tau13 - tau12
    s12 = sigma_pair(tau12, t1)
    s13 = sigma_pair(tau13, t1)
    s23 = sigma_pair(tau23, t2)
    rhs = s13 + ((-1) ** p) * s12
    for v in range(1, p):
        rhs = rhs + binom_p_over_p(p, v) * tau13**v * (-tau12) ** (p - v)
    if not (s23 == rhs):
        return rep.fail(
            witness={"s23": describe(s23), "rhs": describe(rhs)},
            note="cocycle correction failed",
        )
    return rep


# ---------------------------------------------------------------------------
# the envelope -> PD dictionary


def legendre_unit(p, n):
    """(prod_k (p^k!)^(a_k) * a_k!) / n! for n = sum a_k p^k: a p-adic unit."""
    num = 1
    m = n
    k = 0
    while m:
        a = m % p
        m //= p
        num *= math.factorial(p**k) ** a * math.factorial(a)
        k += 1
    den = math.factorial(n)
    vnum = _vp(num, p)
    vden = _vp(den, p)
    assert vnum == vden, "Legendre bookkeeping"
    return num // p**vnum, den // p**vden


def _vp(x, p):
    v = 0
    while x % p == 0:
        x //= p
        v += 1
    return v


def _ring_div_p(c, p):
    """Exact division by p of a q=1 coefficient (canonical representatives
    are divisible whenever the true value is); costs one level."""
    if hasattr(c, "coeffs"):
        if c.level < 1:
            raise PrecisionExhausted("division by p needs level >= 1")
        x = c.coeffs[0]
        assert x % p == 0, "exact p-division must hold on canonical reps"
        return c.ring.elt([x // p], c.level - 1)
    out = {m: _ring_div_p(v, p) for m, v in c.terms.items()}
    return c.ring._elt(out, c.level - 1)


class CoeffPD:
    """PD polynomial ring over a q=1 coefficient ring (base or envelope),
    truncated at per-variable weight < depth_cap."""

    def __init__(self, C, d, depth_cap):
        self.C = C
        self.p = C.p
        self.d = d
        self.depth_cap = depth_cap

    def zero(self, level=None):
        return CoeffPDElt(self, {})

    def one(self, level=None):
        return CoeffPDElt(self, {(0,) * self.d: self.C.one(level)})

    def from_coeff(self, c):
        if c.is_zero():
            return CoeffPDElt(self, {})
        return CoeffPDElt(self, {(0,) * self.d: c})

    def gen(self, v, n=1, level=None):
        exp = [0] * self.d
        exp[v] = n
        return CoeffPDElt(self, {tuple(exp): self.C.one(level)})

    def derive(self, v, x):
        out = {}
        for n, c in x.terms.items():
            if n[v] == 0:
                continue
            n2 = tuple(e - 1 if t == v else e for t, e in enumerate(n))
            out[n2] = out[n2] + c if n2 in out else c
        return CoeffPDElt(self, {k: c for k, c in out.items() if not c.is_zero()})


class CoeffPDElt:
    __slots__ = ("ring", "terms")

    def __init__(self, ring, terms):
        self.ring = ring
        self.terms = terms

    @property
    def level(self):
        return min((c.level for c in self.terms.values()), default=self.ring.C.n)

    def at_level(self, lv):
        out = {m: c.at_level(min(c.level, lv)) for m, c in self.terms.items()}
        return CoeffPDElt(self.ring, {m: c for m, c in out.items() if not c.is_zero()})

    def is_zero(self):
        return not self.terms

    def __eq__(self, other):
        if not isinstance(other, CoeffPDElt):
            return NotImplemented
        keys = set(self.terms) | set(other.terms)
        z = self.ring.C.zero(min(self.level, other.level))
        for k in keys:
            if not (self.terms.get(k, z) == other.terms.get(k, z)):
                return False
        return True

    def __add__(self, other):
        if not isinstance(other, CoeffPDElt):
            return NotImplemented
        out = dict(self.terms)
        for k, c in other.terms.items():
            s = out[k] + c if k in out else c
            if s.is_zero():
                out.pop(k, None)
            else:
                out[k] = s
        return CoeffPDElt(self.ring, out)

    def __neg__(self):
        return CoeffPDElt(self.ring, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        ring = self.ring
        if isinstance(other, int):
            out = {}
            for k, c in self.terms.items():
                c = c * other
                if not c.is_zero():
                    out[k] = c
            return CoeffPDElt(ring, out)
        if not isinstance(other, CoeffPDElt):
            # coefficient scalar
            out = {}
            for k, c in self.terms.items():
                c = c * other
                if not c.is_zero():
                    out[k] = c
            return CoeffPDElt(ring, out)
        out = {}
        for na, ca in self.terms.items():
            for nb, cb in other.terms.items():
                n = tuple(a + b for a, b in zip(na, nb))
                if any(e >= ring.depth_cap for e in n):
                    continue
                mult = 1
                for a, b in zip(na, nb):
                    mult *= math.comb(a + b, a)
                c = ca * cb * mult
                if c.is_zero():
                    continue
                s = out[n] + c if n in out else c
                if s.is_zero():
                    out.pop(n, None)
                else:
                    out[n] = s
        return CoeffPDElt(ring, out)

    __rmul__ = __mul__

    def __pow__(self, e):
        out = self.ring.one(self.level)
        b = self
        while e:
            if e & 1:
                out = out * b
            e >>= 1
            if e:
                b = b * b
        return out

    def __repr__(self):
        if not self.terms:
            return "0"
        bits = []
        for n, c in sorted(self.terms.items()):
            mono = "*".join(f"X{v}^[{e}]" for v, e in enumerate(n) if e) or "1"
            bits.append(f"({c!r})*{mono}")
        return " + ".join(bits)

    def to_json(self):
        return {"terms": [[list(n), c.to_json()] for n, c in sorted(self.terms.items())]}


class PDConversion:
    """Dictionary delta^k(tau_i) -> PD expression over the coefficient ring,
    depth K, target precision N, from an envelope at precision >= N + K."""

    def __init__(self, E, bs, K, N, depth_cap=None):
        if E.mode != "q1":
            raise PreconditionViolated("PD conversion needs a q=1 envelope")
        if E.n < N + K:
            raise DepthExceeded(
                f"need envelope precision >= N+K = {N + K}, have {E.n}"
            )
        self.E = E
        self.K = K
        self.N = N
        p = E.p
        self.p = p
        cap = depth_cap if depth_cap is not None else 2 * p ** (K + 1) + 1
        self.pd = CoeffPD(E.C, E.d, depth_cap=cap)
        self.sig = [sigma_of(E, i, bs[i]) for i in range(E.d)]
        # images of delta^k(tau_i); img[i][k] trusted at coefficient level E.n - k
        self.img = []
        for i in range(E.d):
            a = E.centers[i]
            b = bs[i]
            imgs = [self.pd.gen(i, 1)]
            sigma_img = self.pd.gen(i, p) * math.factorial(p - 1)
            d1 = sigma_img * (p ** (p - 1) - 1) - self.pd.from_coeff(b)
            for v in range(1, p):
                scale = binom_p_over_p(p, v) * p ** (v - 1) * math.factorial(v)
                d1 = d1 + self.pd.gen(i, v) * (a ** (p - v)) * scale
            imgs.append(d1)
            # phi(tau_i) = tau^p + p delta(tau) = p (sigma + delta tau) = p*s
            s = sigma_img + d1
            for k in range(2, K + 1):
                prev = imgs[k - 1]
                ph = self._phi_pd(prev, i, s)
                diff = ph - prev**p
                imgs.append(self._divide_p(diff))
            self.img.append(imgs)

    def _phi_pd(self, f, i, s):
        """phi(X_i^[n]) = unit(n!)^(-1) p^(n - v_p(n!)) s^n, s = sigma + delta(tau)."""
        p = self.p
        out = self.pd.zero()
        powers = {0: self.pd.one()}

        def spow(n):
            if n not in powers:
                powers[n] = spow(n - 1) * s
            return powers[n]

        bigmod = p ** (self.E.n + 1)
        for n, c in f.terms.items():
            term = self.pd.from_coeff(c.phi())
            for v, e in enumerate(n):
                if not e:
                    continue
                if v != i:
                    raise DepthExceeded("cross-variable phi not needed")
                vfac = _vp(math.factorial(e), p)
                unit = math.factorial(e) // p**vfac
                uinv = pow(unit, -1, bigmod)
                term = term * spow(e) * (p ** (e - vfac) * uinv)
            out = out + term
        return out

    def _divide_p(self, f):
        return CoeffPDElt(
            self.pd, {n: _ring_div_p(c, self.p) for n, c in f.terms.items()}
        )

    def convert(self, x):
        """Image of an envelope element; trusted at coefficient level N."""
        out = self.pd.zero()
        for mono, c in x.sorted_terms():
            term = self.pd.from_coeff(c)
            for (i, k), e in mono:
                if k > self.K:
                    raise DepthExceeded(f"delta-level {k} exceeds depth {self.K}")
                term = term * self.img[i][k] ** e
            out = out + term
        return out.at_level(self.N)

    def dictionary_json(self):
        return {
            "p": self.p,
            "N": self.N,
            "K": self.K,
            "normalization_unit": "tau^[n] = tau^n / n!, sigma = (p-1)! tau^[p]",
            "images": {
                f"delta^{k}(tau_{i})": self.img[i][k].at_level(self.N).to_json()
                for i in range(self.E.d)
                for k in range(self.K + 1)
            },
        }


def pd_basis_matrix(conv, max_weight):
    """Images of the envelope digit basis in the PD basis, with the
    triangular Legendre units on the diagonal (as an index map)."""
    E = conv.E
    table = {}
    for mono in E.basis_monomials(max_weight):
        img = conv.convert(E.monomial(mono))
        table[mono] = img
    return table


def pd_to_env_table(conv, max_weight):
    """Envelope expressions of the X^[n] basis (inverse dictionary):
    {pd-exponent: {envelope digit monomial: coefficient-ring value}},
    by weight-triangular back-substitution (Legendre units on the diagonal)."""
    E = conv.E
    p = conv.p

    def pd_index(mono):
        n = [0] * E.d
        for (i, k), e in mono:
            n[i] += e * p**k
        return tuple(n)

    monos = sorted(E.basis_monomials(max_weight), key=E.weight)
    img = {m: conv.convert(E.monomial(m)) for m in monos}
    inv = {}
    for m in monos:
        n = pd_index(m)
        lead = img[m].terms.get(n)
        if lead is None or not lead.is_unit():
            raise DepthExceeded("dictionary lost triangularity (cap too big)")
        lead_inv = lead.invert()
        rest = dict(img[m].terms)
        del rest[n]
        expr = {m: lead_inv}
        for n2, c2 in sorted(rest.items(), key=lambda t: sum(t[0])):
            if n2 not in inv:
                raise DepthExceeded(f"missing inverse entry for {n2}")
            for m2, c3 in inv[n2].items():
                dlt = lead_inv * c2 * c3
                expr[m2] = expr[m2] - dlt if m2 in expr else -dlt
        inv[n] = {k: v for k, v in expr.items() if not v.is_zero()}
    return inv
