"""Exact arithmetic in truncations of the q-crystalline base ring.

The generic ring is Z[q]/(p, [p]_q)^(n+1) with mu = q - 1, [p]_q =
(q^p - 1)/(q - 1) and structure ideal I = (p, [p]_q) = (p, mu^(p-1)).
Since I is monomially generated in mu, the quotient has Z-module basis
mu^k for 0 <= k < (p-1)(n+1), the mu^k-coefficient living mod p^(e(k))
with e(k) = n + 1 - floor(k/(p-1)).  An element additionally carries a
*level* L <= n: it is trusted modulo I^(L+1) only, and every operation's
output level is part of its contract (add/mul keep the min level, the
delta operator costs one level).

The q = 1 specialization reuses the same element type with mu-degree
bound one; the ring is then Z/p^(n+1).

delta is computed on the canonical integral lift via the Frobenius lift
q |-> q^p, i.e. delta(x) = (phi(x) - x^p)/p with exact division; the
result is independent of the lift at the output level because
delta(I^(m+1)) c I^m.

Length-2 Witt vectors are provided generically: the component formulas
only use ring operations, so the same functions serve the base ring,
delta-polynomial rings and envelopes.  (x, delta x) |-> ring
homomorphism into W_2 is the working definition of a delta-structure
and the backbone of the property suites.
"""

from __future__ import annotations

import math
from functools import lru_cache

from .errors import NotAUnit, PrecisionExhausted, RingMismatch

# ---------------------------------------------------------------------------
# integer polynomial helpers (dense lists, index = mu-degree)


def _poly_mul(a, b):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                if bj:
                    out[i + j] += ai * bj
    return out


def _poly_add(a, b):
    n = max(len(a), len(b))
    out = [0] * n
    for i, ai in enumerate(a):
        out[i] += ai
    for i, bi in enumerate(b):
        out[i] += bi
    return out


def _poly_pow(a, e):
    out = [1]
    base = list(a)
    while e:
        if e & 1:
            out = _poly_mul(out, base)
        e >>= 1
        if e:
            base = _poly_mul(base, base)
    return out


@lru_cache(maxsize=None)
def _q_power_in_mu(p, m):
    """(1+mu)^m as a coefficient tuple."""
    return tuple(math.comb(m, k) for k in range(m + 1))


def binom_p_over_p(p, i):
    """The integer C(p, i)/p for 0 < i < p."""
    return math.comb(p, i) // p


# ---------------------------------------------------------------------------


class BaseRing:
    """Descriptor of Z[q]/(p,[p]_q)^(n+1)  (mode 'q')  or Z/p^(n+1) (mode 'q1')."""

    __slots__ = ("p", "n", "mode")

    def __init__(self, p, n, mode="q"):
        if p < 2:
            raise ValueError("p must be a prime >= 2")
        if n < 0:
            raise ValueError("precision n must be >= 0")
        if mode not in ("q", "q1"):
            raise ValueError("mode must be 'q' or 'q1'")
        self.p = p
        self.n = n
        self.mode = mode

    # -- structural data ----------------------------------------------------

    def deg_bound(self, level):
        """Number of mu-coefficients carried at the given level."""
        if self.mode == "q1":
            return 1
        return (self.p - 1) * (level + 1)

    def emod(self, k, level):
        """Exponent e with mu^k-coefficient stored mod p^e at the level."""
        if self.mode == "q1":
            return level + 1
        return level + 1 - k // (self.p - 1)

    # -- constructors ---------------------------------------------------------

    def elt(self, coeffs, level=None):
        """Element from an int list/tuple of mu-coefficients (reduced here)."""
        if level is None:
            level = self.n
        return BaseElt(self, level, self._reduce(coeffs, level))

    def _reduce(self, coeffs, level):
        bound = self.deg_bound(level)
        out = [0] * bound
        for k, c in enumerate(coeffs):
            if k >= bound:
                break
            out[k] = c % (self.p ** self.emod(k, level))
        return tuple(out)

    def zero(self, level=None):
        return self.elt([], level)

    def one(self, level=None):
        return self.elt([1], level)

    def from_int(self, c, level=None):
        return self.elt([c], level)

    def q(self, level=None):
        """q = 1 + mu."""
        if self.mode == "q1":
            return self.one(level)
        return self.elt([1, 1], level)

    def mu(self, level=None):
        if self.mode == "q1":
            return self.zero(level)
        return self.elt([0, 1], level)

    def qint(self, m, level=None):
        """The q-integer [m]_q = 1 + q + ... + q^(m-1)."""
        if m < 0:
            raise ValueError("qint expects m >= 0")
        if self.mode == "q1":
            return self.from_int(m, level)
        acc = []
        for j in range(m):
            acc = _poly_add(acc, _q_power_in_mu(self.p, j))
        return self.elt(acc, level)

    def xi(self, level=None):
        """The structure-ideal generator [p]_q."""
        return self.qint(self.p, level)

    def eta(self, level=None):
        """eta = delta(mu)/mu = sum_{v=1}^{p-1} (C(p,v)/p) mu^(v-1)."""
        return self.elt([binom_p_over_p(self.p, v) for v in range(1, self.p)], level)

    def random(self, rng, level=None):
        if level is None:
            level = self.n
        return self.elt(
            [rng.randrange(self.p ** self.emod(k, level)) for k in range(self.deg_bound(level))],
            level,
        )

    # -- misc ----------------------------------------------------------------

    def __eq__(self, other):
        return (
            isinstance(other, BaseRing)
            and (self.p, self.n, self.mode) == (other.p, other.n, other.mode)
        )

    def __hash__(self):
        return hash(("BaseRing", self.p, self.n, self.mode))

    def __repr__(self):
        if self.mode == "q1":
            return f"Z/{self.p}^{self.n + 1}"
        return f"Z[q]/(({self.p},[{self.p}]_q)^{self.n + 1})"

    def to_json(self):
        return {"p": self.p, "n": self.n, "mode": self.mode}

    @staticmethod
    def from_json(d):
        return BaseRing(d["p"], d["n"], {"q": "q", "q1": "q1"}[d["mode"]])


class BaseElt:
    """Element of a BaseRing at an explicit precision level."""

    __slots__ = ("ring", "level", "coeffs")

    def __init__(self, ring, level, coeffs):
        self.ring = ring
        self.level = level
        self.coeffs = coeffs

    # -- level management ------------------------------------------------------

    def at_level(self, level):
        if level > self.level:
            raise PrecisionExhausted(
                f"element trusted at level {self.level}, asked for {level}"
            )
        if level == self.level:
            return self
        return self.ring.elt(self.coeffs, level)

    def _join(self, other):
        if not isinstance(other, BaseElt):
            raise TypeError(f"cannot combine BaseElt with {type(other).__name__}")
        if self.ring != other.ring:
            raise RingMismatch(f"{self.ring} vs {other.ring}")
        lv = min(self.level, other.level)
        return lv

    # -- ring operations -------------------------------------------------------

    def __add__(self, other):
        if isinstance(other, int):
            other = self.ring.from_int(other, self.level)
        lv = self._join(other)
        return self.ring.elt(_poly_add(self.coeffs, other.coeffs), lv)

    __radd__ = __add__

    def __neg__(self):
        return self.ring.elt([-c for c in self.coeffs], self.level)

    def __sub__(self, other):
        if isinstance(other, int):
            other = self.ring.from_int(other, self.level)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, int):
            return self.ring.elt([other * c for c in self.coeffs], self.level)
        lv = self._join(other)
        return self.ring.elt(_poly_mul(self.coeffs, other.coeffs), lv)

    __rmul__ = __mul__

    def __pow__(self, e):
        if e < 0:
            raise ValueError("negative powers via invert()")
        out = self.ring.one(self.level)
        base = self
        while e:
            if e & 1:
                out = out * base
            e >>= 1
            if e:
                base = base * base
        return out

    def is_zero(self):
        return all(c == 0 for c in self.coeffs)

    def __eq__(self, other):
        """Level-aware equality: compare at the minimum of the two levels."""
        if isinstance(other, int):
            other = self.ring.from_int(other, self.level)
        if not isinstance(other, BaseElt) or self.ring != other.ring:
            return NotImplemented
        lv = min(self.level, other.level)
        return self.at_level(lv).coeffs == other.at_level(lv).coeffs

    def __hash__(self):
        return hash((self.ring, self.level, self.coeffs))

    # -- delta structure ---------------------------------------------------------

    def delta(self):
        """delta(x) = (phi(lift) - lift^p)/p, exact, at level - 1."""
        if self.level < 1:
            raise PrecisionExhausted("delta needs level >= 1")
        p = self.ring.p
        lift = list(self.coeffs)
        if self.ring.mode == "q1":
            c = lift[0]
            return self.ring.elt([(c - c**p) // p], self.level - 1)
        fphi = self._phi_lift(lift)
        fp = _poly_pow(lift, p)
        diff = _poly_add(fphi, [-c for c in fp])
        assert all(c % p == 0 for c in diff), "Frobenius lift must be congruent to p-th power"
        return self.ring.elt([c // p for c in diff], self.level - 1)

    def phi(self):
        """Frobenius lift: substitute q -> q^p; preserves the level."""
        if self.ring.mode == "q1":
            return self
        return self.ring.elt(self._phi_lift(list(self.coeffs)), self.level)

    def _phi_lift(self, lift):
        # mu |-> (1+mu)^p - 1, exact in Z[mu]
        p = self.ring.p
        sub = [c for c in _q_power_in_mu(p, p)]
        sub[0] -= 1
        out = []
        power = [1]
        for k, c in enumerate(lift):
            if c:
                out = _poly_add(out, [c * x for x in power])
            if k + 1 < len(lift):
                power = _poly_mul(power, sub)
        return out

    # -- units ---------------------------------------------------------------------

    def is_unit(self):
        return self.coeffs and self.coeffs[0] % self.ring.p != 0

    def invert(self):
        """Inverse by Newton lifting from the residue field; exact at level."""
        if not self.is_unit():
            raise NotAUnit(f"{self} has mu^0-coefficient divisible by p")
        p = self.ring.p
        v = self.ring.from_int(pow(self.coeffs[0] % p, -1, p), self.level)
        one = self.ring.one(self.level)
        for _ in range(64):
            err = one - self * v
            if err.is_zero():
                return v
            v = v * (one + err)
        raise NotAUnit("Newton iteration failed to converge (not a unit?)")

    # -- io --------------------------------------------------------------------------

    def __repr__(self):
        if self.is_zero():
            return f"0(level={self.level})"
        terms = []
        for k, c in enumerate(self.coeffs):
            if c:
                terms.append(f"{c}" if k == 0 else (f"mu^{k}" if c == 1 else f"{c}*mu^{k}"))
        return " + ".join(terms) + f" (level={self.level})"

    def to_json(self):
        return {
            "level": self.level,
            "coeffs": [[k, str(c)] for k, c in enumerate(self.coeffs) if c],
        }

    @staticmethod
    def from_json(ring, d):
        coeffs = [0] * ring.deg_bound(d["level"])
        for k, c in d["coeffs"]:
            coeffs[k] = int(c)
        return ring.elt(coeffs, d["level"])


# ---------------------------------------------------------------------------
# length-2 Witt vectors, generic over any implemented delta-ring's elements


class Witt2Elt:
    """Pair (x0, x1) with ghost components (x0, x0^p + p*x1)."""

    __slots__ = ("p", "x0", "x1")

    def __init__(self, p, x0, x1):
        self.p = p
        self.x0 = x0
        self.x1 = x1

    def __add__(self, other):
        if self.p != other.p:
            raise RingMismatch("Witt vectors over different primes")
        p = self.p
        corr = None
        for i in range(1, p):
            term = binom_p_over_p(p, i) * (self.x0**i) * (other.x0 ** (p - i))
            corr = term if corr is None else corr + term
        x1 = self.x1 + other.x1
        if corr is not None:
            x1 = x1 - corr
        return Witt2Elt(p, self.x0 + other.x0, x1)

    def __mul__(self, other):
        if self.p != other.p:
            raise RingMismatch("Witt vectors over different primes")
        p = self.p
        return Witt2Elt(
            p,
            self.x0 * other.x0,
            (self.x0**p) * other.x1 + self.x1 * (other.x0**p) + p * (self.x1 * other.x1),
        )

    def __eq__(self, other):
        return self.p == other.p and self.x0 == other.x0 and self.x1 == other.x1

    def __repr__(self):
        return f"W2({self.x0!r}, {self.x1!r})"


def witt2_of(x, p=None):
    """The canonical lift (x, delta(x)) of a delta-ring element."""
    if p is None:
        p = x.ring.p
    return Witt2Elt(p, x, x.delta())
