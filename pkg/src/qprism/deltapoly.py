"""Free delta-polynomial rings over an implemented coefficient delta-ring.

C[S_1,...,S_d]_delta is the polynomial ring on leveled variables
V_{i,k} (k = number of applied deltas, delta(V_{i,k}) = V_{i,k+1}),
optionally extended by frame constants t_j with delta(t_j) = 0.  This is
the symbolic engine behind envelope relation computation: the rewrite
tables are extracted from iterated deltas of xi*S - t + a here.

delta of a product/power is structural:

    delta(x*y)  = delta(x) y^p + x^p delta(y) + p delta(x) delta(y)
    delta(x^n)  = sum_{j=1}^n C(n,j) p^(j-1) x^(p(n-j)) delta(x)^j
    delta(x+y)  = delta(x) + delta(y) - sum_{i=1}^{p-1} (C(p,i)/p) x^i y^(p-i)

delta of a big sum uses binary splitting of the summand list in the
canonical monomial order, so outputs are bit-for-bit reproducible.
delta of a *monomial* has integer coefficients and is memoized
independently of levels.
"""

from __future__ import annotations

import math
import os

from .base import binom_p_over_p
from .errors import BudgetExceeded, DeltaIncoherent, PrecisionExhausted, RingMismatch


def default_budget():
    try:
        return int(os.environ.get("QPRISM_BUDGET", "200000"))
    except ValueError:
        return 200000


# variable keys: ("S", i, k) delta-variables, ("t", j, 0) frame constants
def _var_sort_key(v):
    kind, i, k = v
    return (0 if kind == "S" else 1, i, k)


def mono_key(mono):
    """Graded lexicographic key on (variable, exponent) tables."""
    return (
        sum(e for _, e in mono),
        tuple((_var_sort_key(v), e) for v, e in mono),
    )


def _mono_mul(a, b):
    if not a:
        return b
    if not b:
        return a
    d = dict(a)
    for v, e in b:
        d[v] = d.get(v, 0) + e
    return tuple(sorted(d.items(), key=lambda t: _var_sort_key(t[0])))


def _mono_pow(a, e):
    return tuple((v, x * e) for v, x in a)


def _idict_add(out, other, scale=1):
    for m, c in other.items():
        c = c * scale
        nc = out.get(m, 0) + c
        if nc:
            out[m] = nc
        elif m in out:
            del out[m]
    return out


def _idict_mul(a, b):
    out = {}
    for ma, ca in a.items():
        for mb, cb in b.items():
            m = _mono_mul(ma, mb)
            nc = out.get(m, 0) + ca * cb
            if nc:
                out[m] = nc
            elif m in out:
                del out[m]
    return out


def _idict_pow(a, e):
    out = {(): 1}
    base = dict(a)
    while e:
        if e & 1:
            out = _idict_mul(out, base)
        e >>= 1
        if e:
            base = _idict_mul(base, base)
    return out


class DeltaPolyRing:
    """Descriptor: coefficient delta-ring, d delta-variables, frame constants."""

    def __init__(self, coeff, dvars, cvars=0, budget=None):
        self.coeff = coeff
        self.p = coeff.p
        self.dvars = dvars
        self.cvars = cvars
        self.budget = budget or default_budget()
        self._mono_delta_memo = {}

    def __eq__(self, other):
        return (
            isinstance(other, DeltaPolyRing)
            and self.coeff == other.coeff
            and (self.dvars, self.cvars) == (other.dvars, other.cvars)
        )

    def __hash__(self):
        return hash(("DeltaPolyRing", self.coeff, self.dvars, self.cvars))

    # -- constructors --------------------------------------------------------

    def elt(self, terms, level):
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
        return DeltaPoly(self, level, clean)

    def zero(self, level=None):
        return DeltaPoly(self, self._lv(level), {})

    def one(self, level=None):
        lv = self._lv(level)
        return DeltaPoly(self, lv, {(): self.coeff.one(lv)})

    def _lv(self, level):
        return self.coeff.n if level is None else level

    def const(self, c):
        return DeltaPoly(self, c.level, {} if c.is_zero() else {(): c})

    def from_int(self, c, level=None):
        return self.const(self.coeff.from_int(c, self._lv(level)))

    def var(self, i, k=0, level=None):
        if not 0 <= i < self.dvars:
            raise ValueError(f"no delta-variable index {i}")
        lv = self._lv(level)
        return DeltaPoly(self, lv, {((("S", i, k), 1),): self.coeff.one(lv)})

    def tvar(self, j, level=None):
        if not 0 <= j < self.cvars:
            raise ValueError(f"no frame constant index {j}")
        lv = self._lv(level)
        return DeltaPoly(self, lv, {((("t", j, 0), 1),): self.coeff.one(lv)})

    # -- structural delta of monomials (integer coefficients, level-free) ------

    def mono_delta(self, mono):
        memo = self._mono_delta_memo
        if mono in memo:
            return memo[mono]
        p = self.p
        if not mono:
            out = {}
        else:
            (v, e), rest = mono[0], mono[1:]
            kind, i, k = v
            if kind == "t":
                dF = {}
            else:
                dF = {((("S", i, k + 1), 1),): 1}
            # delta(F^e) by the power formula
            dFe = {}
            if dF:
                dFj = {(): 1}
                for j in range(1, e + 1):
                    dFj = _idict_mul(dFj, dF)
                    scale = math.comb(e, j) * p ** (j - 1)
                    base = {(): 1} if e == j else {((v, p * (e - j)),): 1}
                    _idict_add(dFe, _idict_mul(base, dFj), scale)
            # phi(F^e) = F^(pe) + p*delta(F^e)
            phiFe = {((v, p * e),): 1}
            _idict_add(phiFe, dFe, p)
            dR = self.mono_delta(rest)
            out = {}
            if dFe:
                _idict_add(out, _idict_mul(dFe, {_mono_pow(rest, p): 1}))
            if dR:
                _idict_add(out, _idict_mul(phiFe, dR))
        memo[mono] = out
        return out


class DeltaPoly:
    """Polynomial in leveled delta-variables with delta-ring coefficients."""

    __slots__ = ("ring", "level", "terms")

    def __init__(self, ring, level, terms):
        self.ring = ring
        self.level = level
        self.terms = terms

    # -- housekeeping -----------------------------------------------------------

    def at_level(self, level):
        if level > self.level:
            raise PrecisionExhausted(
                f"element trusted at level {self.level}, asked for {level}"
            )
        if level == self.level:
            return self
        return self.ring.elt(self.terms, level)

    def is_zero(self):
        return not self.terms

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda t: mono_key(t[0]))

    def __eq__(self, other):
        if isinstance(other, int):
            other = self.ring.from_int(other, self.level)
        if not isinstance(other, DeltaPoly) or self.ring != other.ring:
            return NotImplemented
        return (self - other).is_zero()

    # -- ring operations ---------------------------------------------------------

    def __add__(self, other):
        if isinstance(other, int):
            other = self.ring.from_int(other, self.level)
        if self.ring != other.ring:
            raise RingMismatch("delta-polynomials over different rings")
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
        return self.ring.elt(out, lv)

    def __neg__(self):
        return DeltaPoly(self.ring, self.level, {m: -c for m, c in self.terms.items()})

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
            return DeltaPoly(self.ring, self.level, out)
        if not isinstance(other, DeltaPoly):
            # coefficient-ring scalar
            lv = min(self.level, other.level)
            return self.ring.elt({m: c * other for m, c in self.terms.items()}, lv)
        if self.ring != other.ring:
            raise RingMismatch("delta-polynomials over different rings")
        lv = min(self.level, other.level)
        out = {}
        for ma, ca in self.at_level(lv).terms.items():
            for mb, cb in other.at_level(lv).terms.items():
                m = _mono_mul(ma, mb)
                c = ca * cb
                if m in out:
                    s = out[m] + c
                    if s.is_zero():
                        del out[m]
                    else:
                        out[m] = s
                elif not c.is_zero():
                    out[m] = c
        return self.ring.elt(out, lv)

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

    # -- delta structure ------------------------------------------------------------

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
            # delta(c*M) = delta(c) M^p + phi(c) delta(M)
            out = ring.zero(self.level - 1)
            dc = c.delta()
            if not dc.is_zero():
                out = out + DeltaPoly(ring, dc.level, {_mono_pow(mono, p) or (): dc})
            dM = ring.mono_delta(mono)
            if dM:
                phic = c.phi().at_level(self.level - 1)
                terms = {}
                for m, z in dM.items():
                    cc = phic * z
                    if not cc.is_zero():
                        terms[m] = cc
                out = out + ring.elt(terms, self.level - 1)
            return out
        half = len(items) // 2
        left, right = items[:half], items[half:]
        dl = self._delta_rec(left)
        dr = self._delta_rec(right)
        x = DeltaPoly(ring, self.level, dict(left))
        y = DeltaPoly(ring, self.level, dict(right))
        out = dl + dr
        for i in range(1, p):
            out = out - binom_p_over_p(p, i) * (x**i) * (y ** (p - i))
        return out

    def phi(self):
        d = self.delta() if self.level >= 1 else None
        if d is None or d.is_zero():
            # delta-constant at this level: phi is just the p-th power rule
            pp = self ** self.ring.p
            if d is None:
                return pp
            return pp.at_level(d.level)
        return self ** self.ring.p + self.ring.p * d

    # -- substitution ------------------------------------------------------------------

    def substitute(self, images, coeff_map=None, check_coherence=True):
        """Ring-homomorphic evaluation.

        images maps variable keys ("S", i, 0)/("S", i, k)/("t", j, 0) to
        elements of a common target ring; images of higher delta-levels
        not supplied explicitly are derived by the target's delta
        (costing target precision).  Explicitly supplied images of
        consecutive levels are checked for delta-coherence unless
        check_coherence is False.
        """
        images = dict(images)
        if check_coherence:
            for (kind, i, k), img in list(images.items()):
                if kind == "S" and (kind, i, k + 1) in images:
                    if not (img.delta() == images[(kind, i, k + 1)]):
                        raise DeltaIncoherent(
                            f"image of V_{i},{k + 1} is not delta(image of V_{i},{k})"
                        )

        def image_of(v):
            if v in images:
                return images[v]
            kind, i, k = v
            if kind == "S" and k > 0:
                lower = image_of((kind, i, k - 1))
                images[v] = lower.delta()
                return images[v]
            raise KeyError(f"no image supplied for variable {v}")

        out = None
        for mono, c in self.sorted_terms():
            term = None
            for v, e in mono:
                f = image_of(v) ** e
                term = f if term is None else term * f
            cc = coeff_map(c) if coeff_map else c
            term = cc if term is None else term * cc
            out = term if out is None else out + term
        if out is None:
            # evaluate zero in the target: need any image to know the target ring
            for v in images:
                z = images[v]
                return z * 0
            raise ValueError("cannot locate target ring for empty substitution")
        return out

    # -- io ----------------------------------------------------------------------------------

    def __repr__(self):
        if not self.terms:
            return f"0(level={self.level})"
        bits = []
        for m, c in self.sorted_terms():
            factors = []
            for (kind, i, k), e in m:
                name = f"S{i}" if kind == "S" and k == 0 else (
                    f"d^{k}S{i}" if kind == "S" else f"t{i}"
                )
                factors.append(name if e == 1 else f"{name}^{e}")
            mono_s = "*".join(factors) if factors else "1"
            bits.append(f"({c!r})*{mono_s}")
        return " + ".join(bits) + f" @lv{self.level}"

    def to_sexpr(self):
        """Deterministic S-expression rendering for golden tests."""
        parts = []
        for m, c in self.sorted_terms():
            mono = " ".join(
                f"({kind}{i}.{k}^{e})" for (kind, i, k), e in m
            ) or "1"
            coeff = ",".join(f"{k}:{v}" for k, v in enumerate(c.coeffs) if v) if hasattr(c, "coeffs") else repr(c)
            parts.append(f"(term ({coeff}) {mono})")
        return f"(poly lv{self.level} " + " ".join(parts) + ")"

    def to_json(self):
        return {
            "level": self.level,
            "terms": [
                {
                    "mono": [[kind, i, k, e] for (kind, i, k), e in m],
                    "coeff": c.to_json(),
                }
                for m, c in self.sorted_terms()
            ],
        }
