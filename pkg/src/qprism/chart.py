"""Framed polynomial charts: the q-de Rham side of the calculus.

A ChartRing models R_n[t_1..t_d] (degree-truncated) with the frame
delta-structure delta(t_i) = 0, so phi(t_i) = t_i^p and the q-Higgs
derivations act by the q-derivative

    theta_i(t_i^m) = [pm]_q t_i^(m-1),      gamma_i(t_i^m) = q^(pm) t_i^m,

theta_i(t_j) = 0 for j != i, both C-linear over the base.  theta and
gamma are exact closed formulas here (no precision cost), which is what
makes the affine-line cohomology oracle of the acceptance suite cheap.

Elements expose the same factor interface as envelope elements
(monomials are tuples of ((i, 0), e)), so the generic twisted-derivation
machinery can cross-validate the closed formulas.
"""

from __future__ import annotations

from .base import BaseRing, binom_p_over_p
from .errors import BudgetExceeded, PrecisionExhausted, RingMismatch


class ChartRing:
    """R_n[t_1..t_d] with delta(t_i) = 0, truncated at a total t-degree cap."""

    def __init__(self, base, d, degree_cap=64):
        self.base = base
        self.C = base
        self.d = d
        self.degree_cap = degree_cap
        self.p = base.p
        self.n = base.n
        self.mode = base.mode
        self.prime_base = base

    def __eq__(self, other):
        return (
            isinstance(other, ChartRing)
            and self.base == other.base
            and self.d == other.d
        )

    def __hash__(self):
        return hash(("ChartRing", self.base, self.d))

    def __repr__(self):
        return f"Chart(d={self.d} over {self.base!r})"

    # -- constructors -------------------------------------------------------------

    def const(self, c):
        if c.is_zero():
            return ChartElt(self, c.level, {})
        return ChartElt(self, c.level, {(): c})

    def scalar(self, b):
        return b

    def zero(self, level=None):
        return ChartElt(self, self.n if level is None else level, {})

    def one(self, level=None):
        lv = self.n if level is None else level
        return ChartElt(self, lv, {(): self.base.one(lv)})

    def from_int(self, c, level=None):
        lv = self.n if level is None else level
        return self.const(self.base.from_int(c, lv))

    def tau(self, i, k=0, level=None):
        """The frame generator t_i (delta-level 0 only: delta(t_i) = 0)."""
        if k != 0:
            raise ValueError("chart generators have no higher delta-levels")
        if not 0 <= i < self.d:
            raise ValueError(f"no variable index {i}")
        lv = self.n if level is None else level
        return ChartElt(self, lv, {(((i, 0), 1),): self.base.one(lv)})

    t = tau

    def xi(self, level=None):
        return self.const(self.base.xi(level))

    def mu(self, level=None):
        return self.const(self.base.mu(level))

    def monomial(self, mono, level=None):
        """Monomial from a canonical key tuple(((i,0), e), ...) or an {i: e} dict."""
        lv = self.n if level is None else level
        if isinstance(mono, dict):
            mono = tuple(sorted(((i, 0), e) for i, e in mono.items() if e))
        if not mono:
            return self.one(lv)
        return ChartElt(self, lv, {tuple(sorted(mono)): self.base.one(lv)})

    def random(self, rng, level=None, max_degree=4, nterms=3):
        lv = self.n if level is None else level
        terms = {}
        for _ in range(nterms):
            exps = {}
            deg = 0
            for _ in range(rng.randrange(3)):
                i = rng.randrange(self.d)
                if deg < max_degree:
                    exps[i] = exps.get(i, 0) + 1
                    deg += 1
            key = tuple(sorted(((i, 0), e) for i, e in exps.items()))
            c = self.base.random(rng, lv)
            terms[key] = terms[key] + c if key in terms else c
        return self._elt(terms, lv)

    def _elt(self, terms, level):
        for c in terms.values():
            if c.level < level:
                level = c.level
        clean = {}
        for m, c in terms.items():
            if sum(e for _v, e in m) > self.degree_cap:
                raise BudgetExceeded(
                    f"chart degree cap {self.degree_cap} exceeded"
                )
            c = c.at_level(level)
            if not c.is_zero():
                clean[m] = c
        return ChartElt(self, level, clean)

    # -- the q-Higgs action --------------------------------------------------------

    def theta_i(self, i, x):
        """theta_i(c t^m) = c [p*m_i]_q t^(m - 1_i); exact, level-preserving."""
        out = {}
        for mono, c in x.terms.items():
            md = dict(mono)
            e = md.get((i, 0), 0)
            if not e:
                continue
            if e == 1:
                del md[(i, 0)]
            else:
                md[(i, 0)] = e - 1
            key = tuple(sorted(md.items()))
            cc = c * self.base.qint(self.p * e, c.level)
            if key in out:
                out[key] = out[key] + cc
            else:
                out[key] = cc
        return self._elt(out, x.level)

    def gamma_i(self, i, x):
        """gamma_i(c t^m) = c q^(p*m_i) t^m."""
        out = {}
        for mono, c in x.terms.items():
            e = dict(mono).get((i, 0), 0)
            if e:
                c = c * (self.base.q(c.level) ** (self.p * e))
            out[mono] = out[mono] + c if mono in out else c
        return self._elt(out, x.level)

    def alpha_i(self, i):
        return self.tau(i) * self.mu()

    def qhiggs_derivation(self, i):
        """Generic DerivationSpec view of theta_i (for cross-validation)."""
        from .twisted import DerivationSpec

        t = self.tau(i)
        alpha = t * self.mu()
        beta = t ** (self.p - 1) * self.const(self.base.eta())
        images = {j: self.xi() if j == i else self.zero() for j in range(self.d)}
        return DerivationSpec(self, alpha, beta, images, name=f"theta_chart_{i}")

    def basis_monomials(self, max_degree):
        """All monomial keys of total degree <= max_degree (sorted)."""
        monos = [{}]
        for i in range(self.d):
            new = []
            for m in monos:
                used = sum(m.values())
                for e in range(0, max_degree - used + 1):
                    mm = dict(m)
                    if e:
                        mm[i] = e
                    new.append(mm)
            monos = new
        keys = [tuple(sorted(((i, 0), e) for i, e in m.items())) for m in monos]
        return sorted(set(keys))


class ChartElt:
    """Chart element: finite map from t-monomials to base coefficients."""

    __slots__ = ("ring", "level", "terms")

    def __init__(self, ring, level, terms):
        self.ring = ring
        self.level = level
        self.terms = terms

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

    def degree(self):
        return max((sum(e for _v, e in m) for m in self.terms), default=0)

    def __eq__(self, other):
        if isinstance(other, int):
            other = self.ring.from_int(other, self.level)
        if not isinstance(other, ChartElt) or self.ring != other.ring:
            return NotImplemented
        return (self - other).is_zero()

    def __add__(self, other):
        if isinstance(other, int):
            other = self.ring.from_int(other, self.level)
        if self.ring != other.ring:
            raise RingMismatch("chart elements over different rings")
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
        return ChartElt(self.ring, lv, out)

    def __neg__(self):
        return ChartElt(self.ring, self.level, {m: -c for m, c in self.terms.items()})

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
            return ChartElt(self.ring, self.level, out)
        if not isinstance(other, ChartElt):
            lv = min(self.level, other.level)
            return self.ring._elt({m: c * other for m, c in self.terms.items()}, lv)
        if self.ring != other.ring:
            raise RingMismatch("chart elements over different rings")
        lv = min(self.level, other.level)
        out = {}
        for ma, ca in self.terms.items():
            for mb, cb in other.terms.items():
                md = dict(ma)
                for v, e in mb:
                    md[v] = md.get(v, 0) + e
                m = tuple(sorted(md.items()))
                c = ca * cb
                if m in out:
                    s = out[m] + c
                    if s.is_zero():
                        del out[m]
                    else:
                        out[m] = s
                elif not c.is_zero():
                    out[m] = c
        return self.ring._elt(out, lv)

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
            dc = c.delta()
            if dc.is_zero():
                return ring.zero(self.level - 1)
            mp = tuple((v, p * e) for v, e in mono)
            return ChartElt(ring, dc.level, {mp: dc})
        half = len(items) // 2
        left, right = items[:half], items[half:]
        x = ChartElt(ring, self.level, dict(left))
        y = ChartElt(ring, self.level, dict(right))
        out = self._delta_rec(left) + self._delta_rec(right)
        for i in range(1, p):
            out = out - binom_p_over_p(p, i) * (x**i) * (y ** (p - i))
        return out

    def phi(self):
        """phi(sum c t^m) = sum phi(c) t^(pm): a ring map, level-preserving."""
        out = {}
        for mono, c in self.terms.items():
            mp = tuple((v, self.ring.p * e) for v, e in mono)
            out[mp] = c.phi()
        return self.ring._elt(out, self.level)

    def __repr__(self):
        if not self.terms:
            return f"0(level={self.level})"
        bits = []
        for m, c in self.sorted_terms():
            mono_s = "*".join(
                f"t{i}" if e == 1 else f"t{i}^{e}" for (i, _k), e in m
            ) or "1"
            bits.append(f"({c!r})*{mono_s}")
        return " + ".join(bits) + f" @lv{self.level}"

    def to_json(self):
        return {
            "level": self.level,
            "terms": [
                {"mono": [[i, e] for (i, _k), e in m], "coeff": c.to_json()}
                for m, c in self.sorted_terms()
            ],
        }


def chart_elt_from_json(ring, d):
    from .base import BaseElt

    out = ring.zero(d["level"])
    for term in d["terms"]:
        mono = tuple(sorted(((i, 0), e) for i, e in term["mono"]))
        c = BaseElt.from_json(ring.base, term["coeff"])
        out = out + ChartElt(ring, d["level"], {mono: c.at_level(d["level"])})
    return out
