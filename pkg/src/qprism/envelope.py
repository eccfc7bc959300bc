"""Truncated divided delta-envelopes with their normal-form calculus.

An EnvRing adjoins variables tau_1..tau_d to a coefficient delta-ring C
subject to xi*tau_i = t_i - a_i, where xi = [p]_q, the t_i are fresh
delta-constants and the a_i are chosen centers.  Modulo I^(n+1) the ring
is a free C-module on the digit monomials

    prod_{i,k} delta^k(tau_i)^(a_{ik}),   0 <= a_{ik} < p,

and the p-th power of each delta^k(tau_i) rewrites to one-higher
delta-level: from the vanishing of the (k+1)-st delta of the defining
relation,

    delta^k(tau_i)^p = -c^{-1} ( phi^(k+1)(xi) * delta^(k+1)(tau_i)
                                 + sum_{v<p} c_v * delta^k(tau_i)^v ),

with c = (sum_{m<=k} p^(m(p-1))) phi^k(delta(xi)) a unit.  The c_v are
extracted symbolically (deltapoly) after substituting t = a + xi*S, so
normal forms carry coefficients in C only.

Precision discipline: rewrite-rule coefficients are computed in an
escalated-precision twin of the coefficient tower (extra levels =
max rule depth + 1) and reduced back, so every stored rule is exact at
the ring's own precision and normalization never costs levels beyond
the one delta itself consumes.

Rewrite termination: every right-hand-side term either has strictly
smaller tau-weight (sum a_{ik} p^k) than the eliminated p-th power, or
equal weight with coefficient in the structure ideal; both facts are
asserted at rule-build time, which makes the worklist normalization
terminate at finite truncation.

Coefficient rings may themselves be EnvRings (relative envelopes with
centers t_j), which is how the self-product envelopes used by
stratifications are built.
"""

from __future__ import annotations

import math

from .base import BaseElt, BaseRing, binom_p_over_p
from .deltapoly import DeltaPolyRing, default_budget
from .errors import (
    BudgetExceeded,
    NotInvertible,
    PrecisionExhausted,
    RingMismatch,
    WeightCapTooSmall,
)

# ---------------------------------------------------------------------------
# center descriptors: exact data, liftable to any precision


def resolve_center(spec, ring):
    """Evaluate a center descriptor in a coefficient ring at full level."""
    kind = spec[0]
    if kind == "zero":
        return ring.zero()
    if kind == "int":
        return ring.from_int(spec[1])
    if kind == "base":
        if isinstance(ring, BaseRing):
            return ring.elt(list(spec[1]))
        return ring.scalar(resolve_center(spec, ring.prime_base))
    if kind == "tvar":
        if isinstance(ring, EnvRing):
            return ring.t(spec[1])
        raise ValueError("center ('tvar', j) needs an EnvRing coefficient ring")
    raise ValueError(f"unknown center spec {spec!r}")


def _escalate_coeff_ring(C, extra):
    if isinstance(C, BaseRing):
        return BaseRing(C.p, C.n + extra, C.mode)
    return EnvRing(
        _escalate_coeff_ring(C.C, extra),
        C.center_specs,
        weight_cap=C.weight_cap,
        _escalate=False,
    )


def _reduce_coeff(x, target_ring):
    """Map an escalated-twin coefficient down to the working precision."""
    if isinstance(target_ring, BaseRing):
        lv = min(x.level, target_ring.n)
        return target_ring.elt(list(x.coeffs), lv)
    out = {}
    for m, c in x.terms.items():
        out[m] = _reduce_coeff(c, target_ring.C)
    lv = min(x.level, target_ring.n)
    return target_ring._elt(out, lv)


def reduce_env(x, target):
    """Map an escalated-twin envelope element down to the working ring."""
    return target._elt({m: _reduce_coeff(c, target.C) for m, c in x.terms.items()},
                       min(x.level, target.n))


# ---------------------------------------------------------------------------


class EnvRing:
    """Truncated divided delta-envelope over a coefficient delta-ring."""

    def __init__(self, C, center_specs, weight_cap=None, budget=None, _escalate=True):
        self.C = C
        self.center_specs = tuple(center_specs)
        self.d = len(self.center_specs)
        self.weight_cap = weight_cap if weight_cap is not None else 3 * C.p ** 2
        self.budget = budget or default_budget()
        self.centers = tuple(resolve_center(s, C) for s in self.center_specs)
        base = C
        while isinstance(base, EnvRing):
            base = base.C
        self.prime_base = base
        self.p = base.p
        self.n = base.n
        self.mode = base.mode
        # highest delta-level that can ever need a rewrite rule under the cap
        self.kmax = max(self.n, self._level_of_weight(2 * self.weight_cap) + 1)
        self._escalate = _escalate
        self._twin = None
        self._rules = {}
        self._mono_delta_memo = {}
        self._xi_C = self.scalar(self.prime_base.xi())

    def _level_of_weight(self, w):
        k = 0
        while self.p ** (k + 1) <= w:
            k += 1
        return k

    # -- identity ----------------------------------------------------------------

    def __eq__(self, other):
        return (
            isinstance(other, EnvRing)
            and self.C == other.C
            and self.center_specs == other.center_specs
        )

    def __hash__(self):
        return hash(("EnvRing", self.C, self.center_specs))

    def __repr__(self):
        return f"Env(d={self.d} over {self.C!r})"

    # -- scalars -------------------------------------------------------------------

    def scalar(self, b):
        """Embed a prime-base element as a coefficient-ring element."""
        if isinstance(self.C, BaseRing):
            return b
        return self.C.const(self.C.scalar(b))

    def const(self, c):
        """Coefficient-ring element as a constant envelope element."""
        if c.is_zero():
            return EnvElt(self, c.level, {})
        return EnvElt(self, c.level, {(): c})

    def zero(self, level=None):
        return EnvElt(self, self.n if level is None else level, {})

    def one(self, level=None):
        lv = self.n if level is None else level
        return EnvElt(self, lv, {(): self.C.one(lv)})

    def from_int(self, c, level=None):
        lv = self.n if level is None else level
        return self.const(self.C.from_int(c, lv))

    def tau(self, i, k=0, level=None):
        if not 0 <= i < self.d:
            raise ValueError(f"no variable index {i}")
        lv = self.n if level is None else level
        return EnvElt(self, lv, {(((i, k), 1),): self.C.one(lv)})

    def t(self, i):
        """The frame constant t_i = a_i + xi * tau_i (a delta-constant)."""
        return self.const(self.centers[i]) + self.const(self._xi_C) * self.tau(i)

    def xi(self, level=None):
        lv = self.n if level is None else level
        return self.const(self._xi_C.at_level(lv))

    def mu(self, level=None):
        lv = self.n if level is None else level
        return self.const(self.scalar(self.prime_base.mu()).at_level(lv))

    def eta(self, level=None):
        lv = self.n if level is None else level
        return self.const(self.scalar(self.prime_base.eta()).at_level(lv))

    def _elt(self, terms, level):
        for c in terms.values():
            if c.level < level:
                level = c.level
        clean = {}
        for m, c in terms.items():
            c = c.at_level(level)
            if not c.is_zero():
                clean[m] = c
        if len(clean) > self.budget:
            raise BudgetExceeded(f"{len(clean)} monomials > budget {self.budget}")
        return EnvElt(self, level, clean)

    def random(self, rng, level=None, max_weight=None, nterms=3):
        lv = self.n if level is None else level
        cap = max_weight if max_weight is not None else self.weight_cap // 2
        terms = {}
        for _ in range(nterms):
            mono = {}
            w = 0
            for _ in range(rng.randrange(3)):
                i = rng.randrange(self.d)
                k = rng.randrange(min(3, self.kmax))
                if w + self.p**k > cap:
                    continue
                key = (i, k)
                if mono.get(key, 0) + 1 < self.p:
                    mono[key] = mono.get(key, 0) + 1
                    w += self.p**k
            key = tuple(sorted(mono.items()))
            c = self.C.random(rng, lv) if isinstance(self.C, BaseRing) else self.C.random(
                rng, lv, max_weight=cap, nterms=2
            )
            if key in terms:
                terms[key] = terms[key] + c
            else:
                terms[key] = c
        return self._elt(terms, lv)

    # -- structure-ideal membership (termination certificates) ---------------------

    def coeff_in_ideal(self, c):
        if isinstance(self.C, BaseRing):
            if self.C.mode == "q1":
                return c.coeffs[0] % self.C.p == 0
            return all(c.coeffs[k] % self.C.p == 0 for k in range(min(len(c.coeffs), self.C.p - 1)))
        return all(self.C.coeff_in_ideal(cc) for cc in c.terms.values())

    def invert_coeff(self, c):
        if isinstance(self.C, BaseRing):
            return c.invert()
        # constant monomials only: the structural units live in the base
        if set(c.terms) <= {()}:
            inner = c.terms.get(())
            if inner is None:
                raise NotInvertible("zero is not invertible")
            return self.C.const(self.C.invert_coeff(inner))
        raise NotInvertible("envelope inversion supports constant monomials only")

    # -- the rewrite table ------------------------------------------------------------

    def rule(self, i, k):
        """Raw rewrite of delta^k(tau_i)^p as {monomial: C-coefficient}."""
        key = (i, k)
        got = self._rules.get(key)
        if got is not None:
            return got
        if k > self.kmax:
            raise BudgetExceeded(
                f"rewrite level {k} exceeds kmax={self.kmax} for the weight cap"
            )
        if self._escalate:
            raw = self._ensure_twin()._build_rule(i, k)
            raw = {m: _reduce_coeff(c, self.C) for m, c in raw.items()}
            raw = {m: c for m, c in raw.items() if not c.is_zero()}
        else:
            raw = self._build_rule(i, k)
        self._check_rule_terms(i, k, raw)
        self._rules[key] = raw
        return raw

    def _ensure_twin(self):
        if self._twin is None:
            extra = self.kmax + 1
            self._twin = EnvRing(
                _escalate_coeff_ring(self.C, extra),
                self.center_specs,
                weight_cap=self.weight_cap,
                budget=self.budget,
                _escalate=False,
            )
        return self._twin

    def _build_rule(self, i, k):
        C = self.C
        P = DeltaPolyRing(C, dvars=1, cvars=1, budget=self.budget)
        S, t = P.var(0), P.tvar(0)
        a = self.centers[i]
        xiC = self._xi_C
        rel = P.const(xiC) * S - t + P.const(a)
        for _ in range(k + 1):
            rel = rel.delta()
        rel = rel.substitute(
            {("t", 0, 0): P.const(a) + P.const(xiC) * S, ("S", 0, 0): S},
            coeff_map=P.const,
            check_coherence=False,
        )
        top_mono = ((("S", 0, k + 1), 1),)
        p_mono = ((("S", 0, k), self.p),)
        c_top = rel.terms.get(top_mono, C.zero(rel.level))
        c_p = rel.terms.get(p_mono)
        if c_p is None:
            raise NotInvertible("leading rewrite coefficient vanished")
        # cross-check against the closed form for the leading coefficient
        expect = None
        acc = self.prime_base.zero()
        dxi = self.prime_base.xi().delta()
        for m in range(k + 1):
            acc = acc + self.prime_base.from_int(self.p ** (m * (self.p - 1)))
            if m:
                dxi = dxi.phi()
        expect = self.scalar(acc * dxi)
        if not (c_p == expect):
            raise NotInvertible(f"rewrite coefficient mismatch at (i={i}, k={k})")
        c_inv = self.invert_coeff(c_p)
        neg_inv = -c_inv
        raw = {}
        if not c_top.is_zero():
            raw[(((i, k + 1), 1),)] = (neg_inv * c_top).at_level(rel.level)
        for mono, c in rel.terms.items():
            if mono in (top_mono, p_mono):
                continue
            env_mono = tuple(
                sorted(((i, kk), e) for (kind, _zero, kk), e in mono)
            )
            cc = neg_inv * c
            if env_mono in raw:
                cc = raw[env_mono] + cc
            if cc.is_zero():
                raw.pop(env_mono, None)
            else:
                raw[env_mono] = cc.at_level(rel.level)
        return raw

    def _check_rule_terms(self, i, k, raw):
        # weight never increases across a rewrite; equal-weight terms decay
        # I-adically through the escalation coefficients, so the worklist
        # terminates at finite truncation (fuel guards the invariant).
        lhs_w = self.p ** (k + 1)
        for m, _c in raw.items():
            if self.weight(m) > lhs_w:
                raise NotInvertible(
                    f"rewrite rule ({i},{k}) increases tau-weight at {m}"
                )

    # -- the q-Higgs derivations --------------------------------------------------------

    def qhiggs_derivation(self, i):
        """theta_i: the t_i*mu-derivation with theta_i(tau_i) = 1, theta_i(tau_j) = 0,
        C-linear, delta-compatible with respect to t_i^(p-1)*eta.

        Images of delta^k(tau_i) are unfolded in the escalated twin and
        reduced back, so applying theta costs no precision levels."""
        from .twisted import DerivationSpec

        key = ("qhiggs", i)
        got = self._rules.get(key)
        if got is not None:
            return got
        t = self.t(i)
        alpha = t * self.mu()
        beta = t ** (self.p - 1) * self.eta()
        images = {j: self.one() if j == i else self.zero() for j in range(self.d)}
        loader = None
        if self._escalate:
            ring = self

            def loader(ii, kk):
                twin = ring._ensure_twin()
                twin_img = twin.qhiggs_derivation(i).gen_image(ii, kk)
                return reduce_env(twin_img, ring)

        spec = DerivationSpec(
            self, alpha, beta, images, delta_compatible=True, name=f"theta_{i}",
            image_loader=loader,
        )
        self._rules[key] = spec
        return spec

    def gamma_i(self, i, x):
        """gamma_i(x) = x + t_i*mu*theta_i(x)."""
        spec = self.qhiggs_derivation(i)
        return spec.gamma(x)

    def theta_i(self, i, x):
        return self.qhiggs_derivation(i).apply(x)

    def alpha_i(self, i):
        return self.t(i) * self.mu()

    def basis_monomials(self, max_weight):
        """All digit monomials of tau-weight <= max_weight (sorted)."""
        levels = []
        k = 0
        while self.p**k <= max_weight:
            levels.append(k)
            k += 1
        monos = [()]
        for i in range(self.d):
            for k in levels:
                new = []
                for m in monos:
                    w = self.weight(m)
                    for e in range(self.p):
                        if e and w + e * self.p**k > max_weight:
                            break
                        new.append(m + (((i, k), e),) if e else m)
                monos = new
        out = sorted({tuple(sorted((v, e) for v, e in m if e)) for m in monos})
        return out

    def monomial(self, mono, level=None):
        lv = self.n if level is None else level
        return EnvElt(self, lv, {tuple(sorted(mono)): self.C.one(lv)}) if mono else self.one(lv)

    # -- monomial helpers ----------------------------------------------------------------

    @staticmethod
    def mono_mul(a, b):
        if not a:
            return b
        if not b:
            return a
        d = dict(a)
        for v, e in b:
            d[v] = d.get(v, 0) + e
        return tuple(sorted(d.items()))

    def weight(self, mono):
        return sum(e * self.p**k for (_i, k), e in mono)

    def mono_delta_raw(self, mono):
        """Integer-coefficient raw expansion of delta(monomial)."""
        memo = self._mono_delta_memo
        if mono in memo:
            return memo[mono]
        p = self.p
        if not mono:
            out = {}
        else:
            (v, e), rest = mono[0], mono[1:]
            i, k = v
            dF = {(((i, k + 1), 1),): 1}
            dFe = {}
            dFj = {(): 1}
            for j in range(1, e + 1):
                dFj = {self.mono_mul(m, (((i, k + 1), 1),)): c for m, c in dFj.items()}
                scale = math.comb(e, j) * p ** (j - 1)
                base = () if e == j else ((v, p * (e - j)),)
                for m, c in dFj.items():
                    mm = self.mono_mul(base, m)
                    dFe[mm] = dFe.get(mm, 0) + scale * c
            phiFe = {((v, p * e),): 1}
            for m, c in dFe.items():
                phiFe[m] = phiFe.get(m, 0) + p * c
            dR = self.mono_delta_raw(rest)
            out = {}
            restp = tuple((vv, p * ee) for vv, ee in rest)
            for m, c in dFe.items():
                mm = self.mono_mul(m, restp)
                out[mm] = out.get(mm, 0) + c
            for mR, cR in dR.items():
                for mF, cF in phiFe.items():
                    mm = self.mono_mul(mF, mR)
                    out[mm] = out.get(mm, 0) + cF * cR
            out = {m: c for m, c in out.items() if c}
        memo[mono] = out
        return out

    # -- normalization ----------------------------------------------------------------------

    def normalize(self, raw, level):
        """Reduce a raw {monomial: C-coeff} dict to the digit normal form."""
        work = [(m, c) for m, c in raw.items()]
        out = {}
        fuel = 64 * self.budget
        while work:
            fuel -= 1
            if fuel < 0:
                raise BudgetExceeded("normalization fuel exhausted")
            mono, c = work.pop()
            if c.is_zero():
                continue
            over = None
            for (i, k), e in mono:
                if e >= self.p:
                    over = (i, k)
                    break
            if over is None:
                if self.weight(mono) > 2 * self.weight_cap:
                    raise WeightCapTooSmall(
                        f"monomial of weight {self.weight(mono)} exceeds cap "
                        f"{self.weight_cap} (offending: {mono})"
                    )
                if mono in out:
                    s = out[mono] + c
                    if s.is_zero():
                        del out[mono]
                    else:
                        out[mono] = s
                else:
                    out[mono] = c
                continue
            i, k = over
            rest = tuple(
                (v, e - self.p if v == over else e)
                for v, e in mono
                if not (v == over and e == self.p)
            )
            for rm, rc in self.rule(i, k).items():
                work.append((self.mono_mul(rest, rm), c * rc))
        return self._elt(out, level)


class EnvElt:
    """Envelope element in digit normal form (all exponents < p)."""

    __slots__ = ("ring", "level", "terms")

    def __init__(self, ring, level, terms):
        self.ring = ring
        self.level = level
        self.terms = terms

    def _coeff_or_self(self):
        return self

    # -- housekeeping ---------------------------------------------------------------

    def at_level(self, level):
        if level > self.level:
            raise PrecisionExhausted(
                f"element trusted at level {self.level}, asked for {level}"
            )
        if level == self.level:
            return self
        return self.ring._elt(self.terms, level)

    def is_zero(self):
        return not self.terms

    def sorted_terms(self):
        return sorted(self.terms.items())

    def weight(self):
        return max((self.ring.weight(m) for m in self.terms), default=0)

    def max_delta_level(self):
        return max((k for m in self.terms for (_i, k), _e in m), default=0)

    def __eq__(self, other):
        if isinstance(other, int):
            other = self.ring.from_int(other, self.level)
        if not isinstance(other, EnvElt) or self.ring != other.ring:
            return NotImplemented
        return (self - other).is_zero()

    # -- ring operations ----------------------------------------------------------------

    def __add__(self, other):
        if isinstance(other, int):
            other = self.ring.from_int(other, self.level)
        if self.ring != other.ring:
            raise RingMismatch("envelope elements over different rings")
        lv = min(self.level, other.level)
        out = dict(self.at_level(lv).terms)
        for m, c in other.at_level(lv).terms.items():
            if m in out:
                s = out[m] + c
                if s.is_zero():
                    del out[m]
                else:
                    out[m] = s
            else:
                out[m] = c
        return EnvElt(self.ring, lv, out)

    def __neg__(self):
        return EnvElt(self.ring, self.level, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        if isinstance(other, int):
            other = self.ring.from_int(other, self.level)
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, int):
            if not other:
                return self.ring.zero(self.level)
            out = {}
            for m, c in self.terms.items():
                c = c * other
                if not c.is_zero():
                    out[m] = c
            return EnvElt(self.ring, self.level, out)
        if not isinstance(other, EnvElt) or (
            other.ring != self.ring and other.ring == self.ring.C
        ):
            # coefficient-ring scalar
            lv = min(self.level, other.level)
            return self.ring._elt({m: c * other for m, c in self.terms.items()}, lv)
        if self.ring != other.ring:
            if self.ring == other.ring.C:
                return other * self
            raise RingMismatch("envelope elements over different rings")
        lv = min(self.level, other.level)
        raw = {}
        for ma, ca in self.terms.items():
            for mb, cb in other.terms.items():
                m = self.ring.mono_mul(ma, mb)
                c = ca * cb
                if m in raw:
                    raw[m] = raw[m] + c
                else:
                    raw[m] = c
        return self.ring.normalize(raw, lv)

    __rmul__ = __mul__

    def __pow__(self, e):
        out = self.ring.one(self.level)
        base = self
        while e:
            if e & 1:
                out = out * base
            e >>= 1
            if e:
                base = base * base
        return out

    # -- delta structure --------------------------------------------------------------------

    def delta(self):
        if self.level < 1:
            raise PrecisionExhausted("delta needs level >= 1")
        items = self.sorted_terms()
        if not items:
            return self.ring.zero(self.level - 1)
        return self._delta_rec(items)

    def _delta_rec(self, items):
        ring = self.ring
        p = ring.p
        if len(items) == 1:
            mono, c = items[0]
            out = ring.zero(self.level - 1)
            dc = c.delta()
            if not dc.is_zero():
                mp = tuple((v, p * e) for v, e in mono)
                out = out + ring.normalize({mp: dc}, self.level - 1)
            dM = ring.mono_delta_raw(mono)
            if dM:
                phic = c.phi().at_level(self.level - 1)
                raw = {}
                for m, z in dM.items():
                    cc = phic * z
                    if not cc.is_zero():
                        raw[m] = cc
                out = out + ring.normalize(raw, self.level - 1)
            return out
        half = len(items) // 2
        left, right = items[:half], items[half:]
        dl = self._delta_rec(left)
        dr = self._delta_rec(right)
        x = EnvElt(self.ring, self.level, dict(left))
        y = EnvElt(self.ring, self.level, dict(right))
        out = dl + dr
        for i in range(1, p):
            out = out - binom_p_over_p(p, i) * (x**i) * (y ** (p - i))
        return out

    def phi(self):
        d = self.delta() if self.level >= 1 else None
        if d is None or d.is_zero():
            pp = self ** self.ring.p
            if d is None:
                return pp
            return pp.at_level(d.level)
        return self ** self.ring.p + self.ring.p * d

    # -- units -----------------------------------------------------------------------------------

    def is_unit(self):
        c0 = self.terms.get(())
        return c0 is not None and c0.is_unit()

    def invert(self):
        """Newton inversion; the non-constant part is nilpotent at truncation."""
        c0 = self.terms.get(())
        if c0 is None or not c0.is_unit():
            raise NotInvertible("constant term is not a unit")
        v = self.ring.const(c0.invert())
        one = self.ring.one(self.level)
        for _ in range(64):
            err = one - self * v
            if err.is_zero():
                return v
            v = v * (one + err)
        raise NotInvertible("Newton inversion did not converge")

    # -- io --------------------------------------------------------------------------------------

    def __repr__(self):
        if not self.terms:
            return f"0(level={self.level})"
        bits = []
        for m, c in self.sorted_terms():
            factors = []
            for (i, k), e in m:
                name = f"tau{i}" if k == 0 else f"d^{k}tau{i}"
                factors.append(name if e == 1 else f"{name}^{e}")
            mono_s = "*".join(factors) if factors else "1"
            bits.append(f"({c!r})*{mono_s}")
        return " + ".join(bits) + f" @lv{self.level}"

    def to_json(self):
        return {
            "level": self.level,
            "terms": [
                {"mono": [[i, k, e] for (i, k), e in m], "coeff": c.to_json()}
                for m, c in self.sorted_terms()
            ],
        }


def env_elt_from_json(ring, d):
    from .base import BaseElt, BaseRing

    out = ring.zero(d["level"])
    for term in d["terms"]:
        mono = tuple(sorted(((i, k), e) for i, k, e in term["mono"]))
        if isinstance(ring.C, BaseRing):
            c = BaseElt.from_json(ring.C, term["coeff"])
        else:
            c = env_elt_from_json(ring.C, term["coeff"])
        out = out + ring._elt({mono: c}, d["level"])
    return out


# ---------------------------------------------------------------------------
# ring maps between envelopes (face/degeneracy maps of the simplicial tower)


class EnvMap:
    """Ring map E -> F determined by a coefficient map and tau-images.

    Images of delta^k(tau_i) are derived with F's delta (delta-coherence
    by construction).  When an image_loader is wired (computing the same
    images on an escalated-precision twin tower and reducing back), the
    map is exact at the working precision; otherwise applying it to an
    element with delta-level k contracts the result to F.n - k at worst.
    """

    def __init__(self, source, target, tau_images, coeff_map=None, name="",
                 image_loader=None):
        self.source = source
        self.target = target
        self.tau_images = list(tau_images)
        self.coeff_map = coeff_map
        self.name = name
        self.image_loader = image_loader
        self._memo = {}

    def _var_image(self, i, k):
        key = (i, k)
        got = self._memo.get(key)
        if got is None:
            if k == 0:
                got = self.tau_images[i]
            elif self.image_loader is not None:
                got = self.image_loader(i, k)
            else:
                got = self._var_image(i, k - 1).delta()
            self._memo[key] = got
        return got

    def coeff(self, c):
        if self.coeff_map is None:
            return self.target.const(c)
        return self.coeff_map(c)

    def __call__(self, x):
        if x.ring != self.source:
            raise RingMismatch(f"EnvMap {self.name} applied to foreign element")
        out = self.target.zero(x.level)
        for mono, c in x.sorted_terms():
            term = self.coeff(c)
            for (i, k), e in mono:
                term = term * (self._var_image(i, k) ** e)
            out = out + term
        return out

    def compose(self, other, name=""):
        """self after other (other: E->F, self: F->G)."""
        if other.target != self.source:
            raise RingMismatch("non-composable EnvMaps")
        return EnvMap(
            other.source,
            self.target,
            [self(img) for img in other.tau_images],
            coeff_map=lambda c: self(other.coeff(c)),
            name=name or f"{self.name}.{other.name}",
        )
