"""q-Higgs modules, their complexes, and the chain-map calculus.

A QHiggsModule is a finite free module over a host carrying commuting
twisted derivations theta_i (an envelope or a framed chart), with
matrices Theta_i defining theta_{M,i}(e_j) = sum_k (Theta_i)_{kj} e_k
and the connection rule theta_M(a x) = gamma_i(a) theta_M(x) +
theta_i(a) x.  Matrices act on column vectors; the semilinear extension
applies gamma to coefficients before the matrix.

The associated complex has degree-q part M tensor Omega^q on symbols
omega_I (strictly increasing I), differential

    m tensor omega_I  |->  sum_i theta_{M,i}(m) tensor omega_i ^ omega_I,

and three families of chain maps:

  * the Frobenius pullback (psi = id, c_i = [p]_q t_i^(p-1), module
    map m tensor omega_I |-> m tensor 1 tensor c_I omega_I);
  * scalar extensions along (g, psi, c) with the gamma^< twists,
    m tensor a omega_I |-> gamma^<_{M,psi,I}(m a) tensor c_I
    omega_(psi I), composing via c''_i = c'_(psi(i)) g'(c_i);
  * the product pairing (m tensor omega_I) . (m' tensor omega_I') =
    (m tensor gamma_{M',I}(m')) tensor omega_I ^ omega_I', which for
    M = M' = host recovers the twisted DGA product.

theta_i is linear over the host's coefficient ring, so complexes
flatten to integer matrices block-by-block on the weight-filtered
monomial basis; cohomology is delegated to homalg.
"""

from __future__ import annotations

from .base import BaseRing
from .errors import (
    FrobeniusRelationFailed,
    HostMismatch,
    InvalidPullbackSpec,
    OrderViolation,
    WeightCapTooSmall,
)
from .homalg import PGroupComplex
from .report import Report, describe


def _wedge_insert(i, I):
    """omega_i ^ omega_I with I strictly increasing; (sign, tuple) or (0, None)."""
    if i in I:
        return 0, None
    pos = 0
    while pos < len(I) and I[pos] < i:
        pos += 1
    sign = -1 if pos % 2 else 1
    return sign, I[:pos] + (i,) + I[pos:]


def _wedge_concat(I, J):
    """omega_I ^ omega_J: (sign, sorted tuple) or (0, None)."""
    sign, out = 1, tuple(I)
    for j in J:
        if j in out:
            return 0, None
        pos = 0
        while pos < len(out) and out[pos] < j:
            pos += 1
        # omega_j enters from the right: it crosses len(out) - pos symbols
        if (len(out) - pos) % 2:
            sign = -sign
        out = out[:pos] + (j,) + out[pos:]
    return sign, out


def subsets_of(order):
    out = [()]
    for i in sorted(order):
        out += [s + (i,) for s in out]
    return sorted(out, key=lambda s: (len(s), s))


def coord_elt(ring, key, level):
    """The ring element with a single Z-coordinate set to 1."""
    if isinstance(ring, BaseRing):
        coeffs = [0] * ring.deg_bound(level)
        coeffs[key] = 1
        return ring.elt(coeffs, level)
    mono, sub = key
    inner = coord_elt(ring.C, sub, level)
    return ring._elt({mono: inner}, level)


class QHiggsModule:
    """Finite free module with commuting connection matrices over a host."""

    def __init__(self, host, rank, theta, order=None, name=""):
        self.host = host
        self.rank = rank
        self.order = list(order) if order is not None else list(range(host.d))
        self.theta = {i: [list(row) for row in theta[i]] for i in self.order}
        self.name = name

    def _chk(self, other):
        if self.host != other.host or self.order != other.order:
            raise HostMismatch("q-Higgs modules over different hosts/orders")

    # -- basic constructors ---------------------------------------------------------

    @staticmethod
    def trivial(host, rank=1, order=None):
        z = host.zero()
        idx = order if order is not None else range(host.d)
        theta = {i: [[z for _ in range(rank)] for _ in range(rank)] for i in idx}
        return QHiggsModule(host, rank, theta, order)

    def zero_vec(self, level=None):
        return [self.host.zero(level) for _ in range(self.rank)]

    def basis_vec(self, j, level=None):
        v = self.zero_vec(level)
        v[j] = self.host.one(level)
        return v

    def vec_eq(self, u, v):
        return all(a == b for a, b in zip(u, v))

    # -- the connection --------------------------------------------------------------

    def theta_vec(self, i, vec):
        host = self.host
        out = self.zero_vec(min(a.level for a in vec) if vec else None)
        for j, a in enumerate(vec):
            if a.is_zero():
                continue
            ga = host.gamma_i(i, a)
            for k in range(self.rank):
                m = self.theta[i][k][j]
                if not m.is_zero():
                    out[k] = out[k] + ga * m
            out[j] = out[j] + host.theta_i(i, a)
        return out

    def gamma_vec(self, i, vec):
        al = self.host.alpha_i(i)
        tv = self.theta_vec(i, vec)
        return [a + al * b for a, b in zip(vec, tv)]

    def theta_many(self, subset, vec):
        for i in sorted(subset):
            vec = self.theta_vec(i, vec)
        return vec

    # -- checks -------------------------------------------------------------------------

    def check_integrability(self, name="integrability"):
        rep = Report(name, "qhiggs-integrability")
        for j in range(self.rank):
            e = self.basis_vec(j)
            for a in self.order:
                for b in self.order:
                    if a >= b:
                        continue
                    lhs = self.theta_vec(a, self.theta_vec(b, e))
                    rhs = self.theta_vec(b, self.theta_vec(a, e))
                    if not self.vec_eq(lhs, rhs):
                        return rep.fail(
                            witness={"i": a, "j": b, "basis": j},
                            note="theta_i theta_j != theta_j theta_i",
                        )
        return rep

    def check_quasi_nilpotent(self, n_max=16, name="quasi-nilpotence"):
        rep = Report(name, "qhiggs-quasi-nilpotence")
        bounds = {}
        for i in self.order:
            worst = 1
            for j in range(self.rank):
                v = self.basis_vec(j)
                steps = 0
                while not all(x.is_zero() for x in v):
                    v = self.theta_vec(i, v)
                    steps += 1
                    if steps > n_max:
                        return rep.fail(
                            witness={"i": i, "basis": j, "n_max": n_max},
                            note="theta iterate did not vanish",
                        )
                worst = max(worst, steps)
            bounds[i] = worst
        rep.note(f"nilpotence bounds {sorted(bounds.items())}")
        rep.bounds = bounds
        return rep

    # -- functors ----------------------------------------------------------------------------

    def tensor(self, other):
        self._chk(other)
        r, s = self.rank, other.rank
        host = self.host
        theta = {}
        for i in self.order:
            al = host.alpha_i(i)
            T = [[host.zero() for _ in range(r * s)] for _ in range(r * s)]
            for j in range(r):
                for k in range(s):
                    col = j * s + k
                    for l in range(r):
                        a = self.theta[i][l][j]
                        if not a.is_zero():
                            T[l * s + k][col] = T[l * s + k][col] + a
                    for m in range(s):
                        b = other.theta[i][m][k]
                        if not b.is_zero():
                            T[j * s + m][col] = T[j * s + m][col] + b
                    for l in range(r):
                        a = self.theta[i][l][j]
                        if a.is_zero():
                            continue
                        for m in range(s):
                            b = other.theta[i][m][k]
                            if not b.is_zero():
                                T[l * s + m][col] = T[l * s + m][col] + al * a * b
            theta[i] = T
        return QHiggsModule(host, r * s, theta, self.order,
                            name=f"{self.name}(x){other.name}")

    def frobenius_pullback(self, check_host=True):
        """phi^* M with theta'_i = [p]_q t_i^(p-1) phi(Theta_i)."""
        host = self.host
        if check_host:
            self._require_frobenius_relation()
        theta = {}
        for i in self.order:
            c = host.xi() * host.t(i) ** (host.p - 1)
            theta[i] = [[c * a.phi() for a in row] for row in self.theta[i]]
        return QHiggsModule(host, self.rank, theta, self.order,
                            name=f"phi*{self.name}")

    def _require_frobenius_relation(self):
        host = self.host
        for i in self.order:
            c = host.xi() * host.t(i) ** (host.p - 1)
            for j in range(host.d):
                gen = host.tau(j, 0)
                lhs = host.theta_i(i, gen.phi())
                rhs = c * host.theta_i(i, gen).phi()
                if not (lhs == rhs):
                    raise FrobeniusRelationFailed(
                        f"host fails theta_{i} phi = [p]_q t^(p-1) phi theta_{i}"
                    )

    def to_json(self):
        return {
            "host": repr(self.host),
            "order": list(self.order),
            "rank": self.rank,
            "theta": {
                str(i): [[describe(a) for a in row] for row in self.theta[i]]
                for i in self.order
            },
        }


# ---------------------------------------------------------------------------
# complexes: elements are dicts (j, I) -> host element


class QHiggsComplex:
    """The q-Higgs complex of a module on a weight-filtered monomial basis."""

    def __init__(self, module, weight_cap, degree_cap=None, degree_weight_shift=0):
        self.M = module
        self.host = module.host
        self.weight_cap = weight_cap
        self.degree_cap = (
            degree_cap if degree_cap is not None else len(module.order)
        )
        # on charts theta drops the monomial degree by exactly one, so the
        # degree-q part is capped at weight_cap - q to avoid truncation junk
        self.degree_weight_shift = degree_weight_shift

    # -- element algebra ----------------------------------------------------------

    def add(self, x, y):
        out = dict(x)
        for k, v in y.items():
            if k in out:
                s = out[k] + v
                if s.is_zero():
                    del out[k]
                else:
                    out[k] = s
            else:
                out[k] = v
        return out

    def neg(self, x):
        return {k: -v for k, v in x.items()}

    def generator(self, j, mono, I=()):
        return {(j, tuple(I)): self.host.monomial(mono)}

    def eq(self, x, y):
        diff = self.add(x, self.neg(y))
        return all(v.is_zero() for v in diff.values())

    def differential(self, x):
        M = self.M
        out = {}
        by_I = {}
        for (j, I), a in x.items():
            by_I.setdefault(I, {})[j] = a
        for I, comp in by_I.items():
            vec = [comp.get(j, self.host.zero()) for j in range(M.rank)]
            for i in M.order:
                sign, newI = _wedge_insert(i, I)
                if sign == 0:
                    continue
                tv = M.theta_vec(i, vec)
                for k, v in enumerate(tv):
                    if v.is_zero():
                        continue
                    key = (k, newI)
                    w = v if sign == 1 else -v
                    if key in out:
                        s = out[key] + w
                        if s.is_zero():
                            del out[key]
                        else:
                            out[key] = s
                    else:
                        out[key] = w
        return out

    # -- flattening to homalg -------------------------------------------------------------

    def bases(self):
        subs = subsets_of(self.M.order)
        bases = {}
        for q in range(self.degree_cap + 1):
            monos = self.host.basis_monomials(
                self.weight_cap - self.degree_weight_shift * q
            )
            bases[q] = [
                (j, mono, I)
                for I in subs
                if len(I) == q
                for mono in monos
                for j in range(self.M.rank)
            ]
        return bases

    def to_pgroup_complex(self, level=None):
        """Flatten to an integer complex; validates d^2 = 0 and the
        theta-stability of the weight cap."""
        host = self.host
        C = host.C
        lv = host.n if level is None else level
        bases = self.bases()
        # images of all degree-q generators under the differential
        images = {}
        minlv = lv
        for q in range(self.degree_cap):
            for g in bases[q]:
                img = self.differential(self.generator(*g))
                for v in img.values():
                    minlv = min(minlv, v.level)
                images[(q, g)] = img
        from .flatten import flatten_ring_elt, ring_coord_list

        if isinstance(C, BaseRing):
            coords = [
                (k, C.p ** C.emod(k, minlv)) for k in range(C.deg_bound(minlv))
            ]
        else:
            coords = ring_coord_list(C, minlv, self.weight_cap)
        ckeys = [k for k, _m in coords]
        cpos = {k: t for t, k in enumerate(ckeys)}
        nC = len(coords)
        mono_list = host.basis_monomials(self.weight_cap)
        mono_pos = {m: t for t, m in enumerate(mono_list)}
        gen_pos = {}
        moduli = []
        for q in range(self.degree_cap + 1):
            mods_q = []
            for t, g in enumerate(bases[q]):
                gen_pos[(q, g)] = t
                mods_q.extend(m for _k, m in coords)
            moduli.append(mods_q)
        # multiplication-by-c tables on C-coordinates, cached per c
        mult_cache = {}

        def mult_table(c):
            key = id(c)
            got = mult_cache.get(key)
            if got is None:
                table = []
                for ck in ckeys:
                    prod = c * coord_elt(C, ck, minlv)
                    table.append(flatten_ring_elt(prod, minlv))
                mult_cache[key] = (c, table)  # keep c alive: id-keyed cache
                return table
            return got[1]

        diffs = []
        for q in range(self.degree_cap):
            D = [[0] * len(moduli[q]) for _ in range(len(moduli[q + 1]))]
            for g in bases[q]:
                j, mono, I = g
                img = images[(q, g)]
                colbase = gen_pos[(q, g)] * nC
                for (k, newI), v in img.items():
                    for mono2, c in v.terms.items():
                        g2 = (k, mono2, newI)
                        if (q + 1, g2) not in gen_pos:
                            raise WeightCapTooSmall(
                                f"image monomial {mono2} escapes the cap"
                            )
                        rowbase = gen_pos[(q + 1, g2)] * nC
                        table = mult_table(c)
                        for s, flat in enumerate(table):
                            for key2, coeffint in flat.items():
                                D[rowbase + cpos[key2]][colbase + s] += coeffint
            diffs.append(D)
        labels = {q: bases[q] for q in range(self.degree_cap + 1)}
        cx = PGroupComplex(host.p, 0, moduli, diffs)
        cx.labels = labels
        cx.coord_keys = ckeys
        return cx


# ---------------------------------------------------------------------------
# chain maps


class ChainMap:
    """Degree-preserving map of q-Higgs complexes, given per-element."""

    def __init__(self, source, target, fn, name=""):
        self.source = source
        self.target = target
        self.fn = fn
        self.name = name

    def __call__(self, x):
        return self.fn(x)

    def commutes_with_differential(self, test_generators, name=None):
        rep = Report(name or f"chain-map-{self.name}", "chain-map-commutes-with-d")
        for g in test_generators:
            lhs = self.target.differential(self(g))
            rhs = self(self.source.differential(g))
            if not self.target.eq(lhs, rhs):
                return rep.fail(
                    witness={"generator": describe(g)},
                    note="map does not commute with the differentials",
                )
            rep.samples += 1
        return rep


def frobenius_chain_map(cx, pulled=None):
    """M tensor omega_I -> phi^*M tensor [p]_q^r prod t_i^(p-1) omega_I."""
    M = cx.M
    host = M.host
    target_mod = pulled if pulled is not None else M.frobenius_pullback()
    target = QHiggsComplex(target_mod, cx.weight_cap, cx.degree_cap)

    def fn(x):
        out = {}
        for (j, I), a in x.items():
            c = a.phi()
            for i in I:
                c = c * (host.xi() * host.t(i) ** (host.p - 1))
            if not c.is_zero():
                key = (j, I)
                out[key] = out[key] + c if key in out else c
        return out

    return ChainMap(cx, target, fn, name="frobenius")


class PullbackSpec:
    """Scalar-extension datum (g, psi, c) between q-Higgs hosts.

    g: ring map (callable on host elements), psi: order-preserving map
    of direction indices, c_i constants in the target with
    g(alpha_i) = c_i alpha'_(psi(i)) and theta'_(i')(c_i) = 0 for
    i' != psi(i).
    """

    def __init__(self, source_host, target_host, g, psi, c, name=""):
        self.source_host = source_host
        self.target_host = target_host
        self.g = g
        self.psi = dict(psi)
        self.c = dict(c)
        self.name = name

    def validate(self, order=None):
        src, tgt = self.source_host, self.target_host
        order = list(order) if order is not None else list(range(src.d))
        for a, b in zip(order, order[1:]):
            if self.psi[a] > self.psi[b]:
                raise OrderViolation("psi does not preserve the total order")
        for i in order:
            lhs = self.g(src.alpha_i(i))
            rhs = self.c[i] * tgt.alpha_i(self.psi[i])
            if not (lhs == rhs):
                raise InvalidPullbackSpec(f"g(alpha_{i}) != c_{i} alpha'_psi({i})")
            for ip in range(tgt.d):
                if ip != self.psi[i] and not tgt.theta_i(ip, self.c[i]).is_zero():
                    raise InvalidPullbackSpec(f"theta'_{ip}(c_{i}) != 0")
        # bialgebra condition on the host generators
        gens = [src.tau(j, 0) for j in range(src.d)]
        for a in gens:
            for ip in range(tgt.d):
                fiber = [i for i in order if self.psi[i] == ip]
                rhs = tgt.zero()
                for S in subsets_of(fiber):
                    if not S:
                        continue
                    da = a
                    for i in S:
                        da = src.theta_i(i, da)
                    cc = self.g(da)
                    for i in S:
                        cc = cc * self.c[i]
                    rhs = rhs + cc * tgt.alpha_i(ip) ** (len(S) - 1)
                lhs = tgt.theta_i(ip, self.g(a))
                if not (lhs == rhs):
                    raise InvalidPullbackSpec(
                        f"bialgebra condition fails at generator tau_{gens.index(a)}, "
                        f"direction {ip}"
                    )
        return True

    def scalar_extension(self, M, target_order=None):
        """The extended module with
        theta'_(i')(m tensor 1) = sum_S theta_S(m) tensor c_S alpha'^(|S|-1)."""
        tgt = self.target_host
        t_order = list(target_order) if target_order is not None else list(range(tgt.d))
        theta = {}
        for ip in t_order:
            fiber = [i for i in M.order if self.psi[i] == ip]
            T = [[tgt.zero() for _ in range(M.rank)] for _ in range(M.rank)]
            for j in range(M.rank):
                for S in subsets_of(fiber):
                    if not S:
                        continue
                    vec = M.theta_many(S, M.basis_vec(j))
                    scale = tgt.one()
                    for i in S:
                        scale = scale * self.c[i]
                    scale = scale * tgt.alpha_i(ip) ** (len(S) - 1)
                    for k in range(M.rank):
                        if not vec[k].is_zero():
                            T[k][j] = T[k][j] + self.g(vec[k]) * scale
            theta[ip] = T
        return QHiggsModule(tgt, M.rank, theta, t_order,
                            name=f"{self.name}*{M.name}")

    def gamma_less(self, M, i, vec):
        """gamma^<_{M,psi,i} = prod of gamma_{M,j} over j in the psi-fiber
        of i that precede i."""
        for j in M.order:
            if j < i and self.psi[j] == self.psi[i]:
                vec = M.gamma_vec(j, vec)
        return vec

    def chain_map(self, cx, extended=None, target_order=None):
        M = cx.M
        tgt = self.target_host
        Mp = extended if extended is not None else self.scalar_extension(M, target_order)
        target = QHiggsComplex(Mp, cx.weight_cap, cx.degree_cap)

        def fn(x):
            out = {}
            for (j, I), a in x.items():
                # psi must stay strictly increasing on I, else the wedge dies
                newI = tuple(self.psi[i] for i in I)
                if any(newI[t] >= newI[t + 1] for t in range(len(newI) - 1)):
                    continue
                vec = [M.host.zero()] * M.rank
                vec[j] = a
                for i in I:
                    vec = self.gamma_less(M, i, vec)
                cI = tgt.one()
                for i in I:
                    cI = cI * self.c[i]
                for k, v in enumerate(vec):
                    if v.is_zero():
                        continue
                    w = self.g(v) * cI
                    if w.is_zero():
                        continue
                    key = (k, newI)
                    out[key] = out[key] + w if key in out else w
            return out

        return ChainMap(cx, target, fn, name=self.name or "pullback")

    def compose(self, other, name=""):
        """self after other: other (A -> A'), self (A' -> A'')."""
        if other.target_host != self.source_host:
            raise InvalidPullbackSpec("non-composable pullback specs")
        psi = {i: self.psi[other.psi[i]] for i in other.psi}
        # psi of `other` must be order-preserving for the twist bookkeeping
        src_order = sorted(other.psi)
        for a, b in zip(src_order, src_order[1:]):
            if other.psi[a] > other.psi[b]:
                raise OrderViolation("inner psi does not preserve orders")
        c = {
            i: self.c[other.psi[i]] * self.g(other.c[i])
            for i in other.psi
        }
        return PullbackSpec(
            other.source_host,
            self.target_host,
            lambda x: self.g(other.g(x)),
            psi,
            c,
            name=name or f"{self.name}.{other.name}",
        )


def frobenius_pullback_spec(host):
    """The Frobenius as a PullbackSpec: psi = id, c_i = [p]_q t_i^(p-1)."""
    return PullbackSpec(
        host,
        host,
        lambda x: x.phi(),
        {i: i for i in range(host.d)},
        {i: host.xi() * host.t(i) ** (host.p - 1) for i in range(host.d)},
        name="frobenius",
    )


def product_chain_map(cxM, cxMp, tensor_cx=None):
    """Pairing into the complex of M tensor M':
    (m tensor omega_I, m' tensor omega_I') |->
    (m tensor gamma_{M',I}(m')) tensor omega_I ^ omega_I'."""
    M, Mp = cxM.M, cxMp.M
    M._chk(Mp)
    MT = tensor_cx.M if tensor_cx is not None else M.tensor(Mp)
    target = tensor_cx or QHiggsComplex(MT, cxM.weight_cap, cxM.degree_cap)

    def pair(x, y):
        out = {}
        for (j, I), a in x.items():
            for (k, J), b in y.items():
                sign, IJ = _wedge_concat(I, J)
                if sign == 0:
                    continue
                vec = [Mp.host.zero()] * Mp.rank
                vec[k] = b
                for i in I:
                    vec = Mp.gamma_vec(i, vec)
                for k2, v in enumerate(vec):
                    if v.is_zero():
                        continue
                    w = a * v
                    if sign == -1:
                        w = -w
                    if w.is_zero():
                        continue
                    key = (j * Mp.rank + k2, IJ)
                    out[key] = out[key] + w if key in out else w
        return out

    return pair, target
