"""Simplicial envelopes, stratifications, and the q-Higgs dictionary.

The self-product tower D = D(0), D(1), D(2) is modeled by relative
envelopes: D(1) adjoins tau^(1)_i with xi*tau^(1)_i = t^(1)_{1;i} - t_i
over D (centers t_i), and D(2) adjoins two families the same way.  The
face/degeneracy maps are generator-level ring maps; the non-monotone
maps (iota swaps) realize inverses of descent data without matrix
inversion.

A stratification on a rank-r module M is an r x r matrix epsilon over
D(1) (columns = epsilon(1 tensor e_j) in p_0^*M) with Delta(epsilon) =
identity and the D(2) cocycle p_01(eps) p_12(eps) = p_02(eps).

Dictionary:
  * higgs_from_strat: Theta_i = Delta of theta_(1;i) applied entrywise
    to epsilon.
  * strat_from_higgs: columns are the flat sections of p_0^*M for the
    inner directions theta_(0;i), normalized by the augmentation.  At
    q = 1 these have the closed form
        sum_n tau^(1)[n] tensor (prod theta_i^(n_i))(x)
    through the divided-power dictionary; over generic q they are found
    by an exact linear solve on the weight-filtered basis (residuals
    are re-verified with full arithmetic).

The Cech-Alexander H^0 comparison checks ker(theta_M) =
ker(eps(1 tensor .) - (.) tensor 1) as subgroups of the flattened
module, with matching invariant factors.

Everything here is built twice, once at working precision and once on
an escalated twin tower, so face maps and the inner derivations are
exact at the working precision.
"""

from __future__ import annotations

from .base import BaseRing
from .divided import PDConversion, sigma_pair
from .envelope import EnvMap, EnvRing, reduce_env
from .errors import (
    AugmentationFailed,
    NotQuasiNilpotent,
    PrecisionExhausted,
    WeightCapTooSmall,
)
from .flatten import flatten_ring_elt, ring_coord_list
from .homalg import kernel_lattice, lattice_basis, solve_integer
from .qhiggs import QHiggsModule
from .report import Report, describe
from .twisted import DerivationSpec

# ---------------------------------------------------------------------------


class SimplicialEnvelope:
    """The tower D, D(1), D(2) with face maps and q-Higgs derivations."""

    def __init__(self, base_ring, center_specs, weight_cap=None, _escalate=True):
        self.C0 = base_ring
        self.center_specs = tuple(center_specs)
        self.d = len(self.center_specs)
        d = self.d
        self.D = EnvRing(base_ring, center_specs, weight_cap=weight_cap,
                         _escalate=_escalate)
        wcap = self.D.weight_cap
        self.D1 = EnvRing(self.D, [("tvar", i) for i in range(d)],
                          weight_cap=wcap, _escalate=_escalate)
        self.D2 = EnvRing(self.D, [("tvar", i % d) for i in range(2 * d)],
                          weight_cap=wcap, _escalate=_escalate)
        self.p = self.D.p
        self.n = self.D.n
        self.mode = self.D.mode
        self._twin = None
        if _escalate:
            extra = self.D.kmax + 1
            esc_base = BaseRing(base_ring.p, base_ring.n + extra, base_ring.mode)
            self._twin = SimplicialEnvelope(
                esc_base, center_specs, weight_cap=weight_cap, _escalate=False
            )
        self._maps = {}
        self._thetas = {}

    # -- face and degeneracy maps -------------------------------------------------------

    def _mk_map(self, name, source, target, tau_images, coeff_map):
        loader = None
        if self._twin is not None:
            twin = self._twin

            def loader(i, k, _name=name):
                tm = twin.map(_name)
                img = tm._var_image(i, k)
                return reduce_env(img, self.ring_of(tm.target, twin))

            # the twin's targets correspond positionally; resolve via names
        m = EnvMap(source, target, tau_images, coeff_map, name=name,
                   image_loader=loader)
        return m

    def ring_of(self, twin_ring, twin):
        if twin_ring == twin.D:
            return self.D
        if twin_ring == twin.D1:
            return self.D1
        return self.D2

    def map(self, name):
        got = self._maps.get(name)
        if got is not None:
            return got
        d = self.d
        D, D1, D2 = self.D, self.D1, self.D2
        if name == "p0":
            m = self._mk_map("p0", D, D1,
                             [D1.const(D.tau(i)) for i in range(d)],
                             lambda c: D1.const(D.const(c)))
        elif name == "p1":
            m = self._mk_map("p1", D, D1,
                             [D1.const(D.tau(i)) + D1.tau(i) for i in range(d)],
                             lambda c: D1.const(D.const(c)))
        elif name == "Delta":
            m = self._mk_map("Delta", D1, D, [D.zero() for _ in range(d)],
                             lambda c: c)
        elif name == "q0":
            m = self._mk_map("q0", D, D2,
                             [D2.const(D.tau(i)) for i in range(d)],
                             lambda c: D2.const(D.const(c)))
        elif name == "q1":
            m = self._mk_map("q1", D, D2,
                             [D2.const(D.tau(i)) + D2.tau(i) for i in range(d)],
                             lambda c: D2.const(D.const(c)))
        elif name == "q2":
            m = self._mk_map("q2", D, D2,
                             [D2.const(D.tau(i)) + D2.tau(d + i) for i in range(d)],
                             lambda c: D2.const(D.const(c)))
        elif name == "p01":
            m = self._mk_map("p01", D1, D2,
                             [D2.tau(i) for i in range(d)],
                             lambda c: D2.const(c))
        elif name == "p12":
            q1 = self.map("q1")
            m = self._mk_map("p12", D1, D2,
                             [D2.tau(d + i) - D2.tau(i) for i in range(d)],
                             lambda c: q1(c))
        elif name == "p02":
            m = self._mk_map("p02", D1, D2,
                             [D2.tau(d + i) for i in range(d)],
                             lambda c: D2.const(c))
        elif name == "Delta2":
            m = self._mk_map("Delta2", D2, D, [D.zero() for _ in range(2 * d)],
                             lambda c: c)
        elif name == "iota":
            p1 = self.map("p1")
            m = self._mk_map("iota", D1, D1,
                             [-D1.tau(i) for i in range(d)],
                             lambda c: p1(c))
        elif name == "iota0":
            m = self._mk_map("iota0", D2, D1,
                             [D1.tau(i) for i in range(d)]
                             + [D1.zero() for _ in range(d)],
                             lambda c: D1.const(c))
        elif name == "iota1":
            p1 = self.map("p1")
            m = self._mk_map("iota1", D2, D1,
                             [-D1.tau(i) for i in range(d)]
                             + [D1.zero() for _ in range(d)],
                             lambda c: p1(c))
        else:
            raise KeyError(name)
        self._maps[name] = m
        return m

    # -- derivations ----------------------------------------------------------------------

    def theta1(self, i):
        """theta_{D(1),1;i}: the D-linear derivation on the adjoined direction."""
        return self.D1.qhiggs_derivation(i)

    def theta0(self, i):
        """theta_{D(1),0;i}: acts as theta_{D,i} on coefficients, -1 on tau^(1)_i."""
        key = ("theta0", i)
        got = self._thetas.get(key)
        if got is not None:
            return got
        D, D1 = self.D, self.D1
        t = D1.const(D.t(i))
        alpha = t * D1.mu()
        beta = t ** (self.p - 1) * D1.eta()
        images = {j: -D1.one() if j == i else D1.zero() for j in range(self.d)}
        loader = None
        if self._twin is not None:
            twin = self._twin

            def loader(ii, kk):
                img = twin.theta0(i).gen_image(ii, kk)
                return reduce_env(img, self.D1)

        spec = DerivationSpec(
            D1, alpha, beta, images,
            coeff_derivation=D.qhiggs_derivation(i),
            delta_compatible=True,
            name=f"theta0_{i}",
            image_loader=loader,
        )
        self._thetas[key] = spec
        return spec

    def theta2(self, l, i):
        """theta_{D(2),l;i} for l = 1, 2 (adjoined directions of D(2))."""
        return self.D2.qhiggs_derivation((l - 1) * self.d + i)

    def theta2_0(self, i):
        """theta_{D(2),0;i}."""
        key = ("theta2_0", i)
        got = self._thetas.get(key)
        if got is not None:
            return got
        D, D2 = self.D, self.D2
        t = D2.const(D.t(i))
        alpha = t * D2.mu()
        beta = t ** (self.p - 1) * D2.eta()
        images = {
            j: -D2.one() if j % self.d == i else D2.zero()
            for j in range(2 * self.d)
        }
        loader = None
        if self._twin is not None:
            twin = self._twin

            def loader(ii, kk):
                img = twin.theta2_0(i).gen_image(ii, kk)
                return reduce_env(img, self.D2)

        spec = DerivationSpec(
            D2, alpha, beta, images,
            coeff_derivation=D.qhiggs_derivation(i),
            delta_compatible=True,
            name=f"theta2_0_{i}",
            image_loader=loader,
        )
        self._thetas[key] = spec
        return spec

    # -- sigma data on the self-products (q = 1) -------------------------------------------

    def tau1(self, i):
        """tau^(1)_{1,0;i} in D(1)."""
        return self.D1.tau(i)

    def tau2(self, l, m, i):
        """tau^(2)_{l,m;i} in D(2), l, m in {0,1,2}."""
        def up(l):
            if l == 0:
                return self.D2.zero()
            return self.D2.tau((l - 1) * self.d + i)
        return up(l) - up(m)

    def t_of(self, ring_level, l, i):
        """t^(r)_{l;i} as an element of D(r)."""
        if ring_level == 1:
            if l == 0:
                return self.D1.const(self.D.t(i))
            return self.D1.t(i)
        if l == 0:
            return self.D2.const(self.D.t(i))
        return self.D2.t((l - 1) * self.d + i)

    def sigma2(self, l, m, i):
        """sigma^(2)_{l,m;i} (q = 1 mode only)."""
        return sigma_pair(self.tau2(l, m, i), self.t_of(2, m, i))


# ---------------------------------------------------------------------------
# module-side operators on p_0^* M (r-vectors over D(1))


class StratContext:
    """Couples a module over D with the simplicial tower."""

    def __init__(self, tower, module):
        if module.host != tower.D:
            raise WeightCapTooSmall("module host must be the tower's D")
        self.S = tower
        self.M = module
        self.r = module.rank
        self.p0 = tower.map("p0")
        self.p1 = tower.map("p1")
        self.Delta = tower.map("Delta")

    def theta0_module(self, i, vec):
        """theta_{p_0^*M,0;i} on an r-vector over D(1)."""
        S, M = self.S, self.M
        spec = S.theta0(i)
        out = [S.D1.zero() for _ in range(self.r)]
        for k, a in enumerate(vec):
            if a.is_zero():
                continue
            ga = spec.gamma(a)
            for l in range(self.r):
                m = M.theta[i][l][k]
                if not m.is_zero():
                    out[l] = out[l] + ga * self.p0(m)
            out[k] = out[k] + spec.apply(a)
        return out

    def theta1_module(self, i, vec):
        """theta_{p_0^*M,1;i} = id tensor theta_{D(1),1;i} (D-linear)."""
        spec = self.S.theta1(i)
        return [spec.apply(a) for a in vec]

    def delta_module(self, vec):
        """Delta_M: p_0^*M -> M."""
        return [self.Delta(a) for a in vec]

    def include_p1(self, vec_over_D):
        """M -> p_1^*M (= r-vectors over D(1) with p1-pushed coefficients)."""
        return [self.p1(a) for a in vec_over_D]

    def include_p0(self, vec_over_D):
        return [self.p0(a) for a in vec_over_D]


# ---------------------------------------------------------------------------


class Stratification:
    """epsilon: p_1^*M -> p_0^*M as an r x r matrix over D(1) (columns =
    images of 1 tensor e_j)."""

    def __init__(self, ctx, matrix):
        self.ctx = ctx
        self.eps = [list(row) for row in matrix]

    def col(self, j):
        return [self.eps[k][j] for k in range(self.ctx.r)]

    def apply_to(self, vec_over_D):
        """epsilon(1 tensor x) for x given by D-coordinates."""
        ctx = self.ctx
        out = [ctx.S.D1.zero() for _ in range(ctx.r)]
        for l, a in enumerate(vec_over_D):
            pa = ctx.p1(a)
            for k in range(ctx.r):
                if not self.eps[k][l].is_zero():
                    out[k] = out[k] + pa * self.eps[k][l]
        return out

    def matrix_map(self, ring_map):
        return [[ring_map(a) for a in row] for row in self.eps]


def _mat_mul(A, B, zero):
    r = len(A)
    out = [[zero for _ in range(r)] for _ in range(r)]
    for i in range(r):
        for j in range(r):
            acc = zero
            for k in range(r):
                if not A[i][k].is_zero() and not B[k][j].is_zero():
                    acc = acc + A[i][k] * B[k][j]
            out[i][j] = acc
    return out


def _mat_eq(A, B):
    return all(a == b for ra, rb in zip(A, B) for a, b in zip(ra, rb))


def _identity(ring, r):
    return [[ring.one() if i == j else ring.zero() for j in range(r)] for i in range(r)]


# -- building epsilon -------------------------------------------------------------------


def strat_from_higgs(ctx, n_max=16, pd_depth=None, zeta_cap=None):
    """The stratification of a quasi-nilpotent module.

    q = 1 mode: closed flat-section formula through the divided-power
    dictionary.  Generic q: exact linear solve of the flatness system
    with augmentation, verified by full-arithmetic residuals.
    """
    M, S = ctx.M, ctx.S
    rep = M.check_quasi_nilpotent(n_max)
    if not rep.passed:
        raise NotQuasiNilpotent(str(rep.witness))
    bound = max(rep.bounds.values(), default=1)
    if S.mode == "q1":
        eps = _strat_pd_closed_form(ctx, bound, pd_depth)
    else:
        eps = _strat_linear_solve(ctx, zeta_cap)
    st = Stratification(ctx, eps)
    # Delta^*(eps) = id is part of the construction contract
    for j in range(ctx.r):
        col = ctx.delta_module(st.col(j))
        for k in range(ctx.r):
            want = ctx.S.D.one() if k == j else ctx.S.D.zero()
            if not (col[k] == want):
                raise AugmentationFailed(f"Delta(eps) != id at column {j}")
    return st


def _strat_pd_closed_form(ctx, bound, pd_depth):
    S, M = ctx.S, ctx.M
    p = S.p
    # need tau^[e] for per-direction exponents e < bound + 1 <= p^(K+1)
    K = pd_depth if pd_depth is not None else max(
        1, _ceil_log(p, max(2, bound + 1)) - 1
    )
    while p ** (K + 1) < bound + 1:
        K += 1
    N = S.n - K
    if N < 0:
        raise PrecisionExhausted("base precision too small for the PD depth")
    conv = PDConversion(S.D1, [S.D.zero() for _ in range(S.d)], K, N)
    from .divided import pd_to_env_table

    inv = pd_to_env_table(conv, max_weight=p ** (K + 1) - 1)

    def tau_bracket(exps):
        """tau^(1)[n] as a D(1) element (from the inverse dictionary)."""
        out = None
        for i, e in enumerate(exps):
            key = tuple(e if t == i else 0 for t in range(S.d))
            piece = S.D1.zero(N)
            for mono, c in inv[key].items():
                piece = piece + S.D1.monomial(mono, level=N) * c
            out = piece if out is None else out * piece
        return out if out is not None else S.D1.one(N)

    r = ctx.r
    eps = [[S.D1.zero(N) for _ in range(r)] for _ in range(r)]
    for j in range(r):
        stack = [((0,) * S.d, M.basis_vec(j))]
        seen = {}
        while stack:
            exps, vec = stack.pop()
            if all(v.is_zero() for v in vec):
                continue
            if exps in seen:
                continue
            seen[exps] = vec
            for i in range(S.d):
                if exps[i] + 1 >= p ** (K + 1):
                    raise WeightCapTooSmall("PD depth too small for nilpotence bound")
                e2 = tuple(exps[t] + (1 if t == i else 0) for t in range(S.d))
                if e2 not in seen:
                    stack.append((e2, M.theta_vec(i, vec)))
        for exps, vec in seen.items():
            zeta = tau_bracket(exps)
            for k in range(r):
                if not vec[k].is_zero():
                    eps[k][j] = eps[k][j] + zeta * ctx.p0(vec[k]).at_level(N)
    return eps


def _ceil_log(p, x):
    k = 0
    while p**k < x:
        k += 1
    return k


def _module_support(ctx):
    """D-monomials reachable by theta-products of the basis vectors."""
    M, S = ctx.M, ctx.S
    support = {()}
    for j in range(ctx.r):
        stack = [((0,) * S.d, M.basis_vec(j))]
        seen = set()
        while stack:
            exps, vec = stack.pop()
            if all(v.is_zero() for v in vec):
                continue
            if exps in seen:
                continue
            seen.add(exps)
            for v in vec:
                support.update(v.terms.keys())
            for i in range(S.d):
                e2 = tuple(exps[t] + (1 if t == i else 0) for t in range(S.d))
                if e2 not in seen:
                    stack.append((e2, M.theta_vec(i, vec)))
    return support


def _strat_linear_solve(ctx, zeta_cap=None):
    S = ctx.S
    p = S.p
    base_w = max((S.D.weight(m) for m in _module_support(ctx)), default=0)
    zcaps = [zeta_cap] if zeta_cap else [p * p, 2 * p * p]
    last_err = None
    for zcap in zcaps:
        for margin in (p, 2 * p):
            try:
                return _strat_solve_at_cap(ctx, zcap, base_w + margin)
            except WeightCapTooSmall as e:
                last_err = e
    raise last_err


def _strat_solve_at_cap(ctx, zeta_cap, mono_cap):
    S, M, r = ctx.S, ctx.M, ctx.r
    D, D1 = S.D, S.D1
    p, E = S.p, S.n + 1
    base = S.D.prime_base
    zetas = D1.basis_monomials(zeta_cap)
    if isinstance(D.C, BaseRing):
        dcoords = [(k, D.C.p ** D.C.emod(k, S.n)) for k in range(D.C.deg_bound(S.n))]
    else:
        dcoords = ring_coord_list(D.C, S.n, mono_cap)
    dmonos = D.basis_monomials(mono_cap)
    mcoords = [(mono, key, mod) for mono in dmonos for key, mod in dcoords]
    nM = len(mcoords) * r
    nU = len(zetas) * nM

    from .qhiggs import coord_elt

    def m_coord_elt(t):
        mono, key, _mod = mcoords[t % len(mcoords)]
        j = t // len(mcoords)
        vec = [D.zero() for _ in range(r)]
        vec[j] = D._elt({mono: coord_elt(D.C, key, S.n)}, S.n)
        return j, vec

    def base_mod(key):
        k = key
        while isinstance(k, tuple):
            k = k[-1]
        return base.p ** base.emod(k, S.n)

    def flatten_vec_D1(vec):
        """r-vector over D(1) -> {(k, zeta, dmono-key): int} at level n."""
        out = {}
        for k, a in enumerate(vec):
            a = a.at_level(min(a.level, S.n))
            if a.level < S.n:
                raise PrecisionExhausted("flatness operator lost precision")
            for zmono, c in a.terms.items():
                for key, v in flatten_ring_elt(c, S.n).items():
                    out[(k, zmono, key)] = v
        return out

    rows_index = {}
    row_mods = {}
    cols = []
    for zi, zeta in enumerate(zetas):
        zelt = D1.monomial(zeta)
        for t in range(nM):
            j, vec = m_coord_elt(t)
            s_vec = [zelt * D1.const(v) if not v.is_zero() else D1.zero() for v in vec]
            colmap = {}
            for i in range(S.d):
                img = ctx.theta0_module(i, s_vec)
                for key, v in flatten_vec_D1(img).items():
                    rk = ("flat", i) + key
                    colmap[rk] = colmap.get(rk, 0) + v
                    row_mods[rk] = base_mod(key[-1])
            dvec = ctx.delta_module(s_vec)
            for k, a in enumerate(dvec):
                for key, v in flatten_ring_elt(a.at_level(S.n), S.n).items():
                    rk = ("aug", k, key)
                    colmap[rk] = colmap.get(rk, 0) + v
                    row_mods[rk] = base_mod(key)
            cols.append(colmap)
            for rk in colmap:
                rows_index.setdefault(rk, len(rows_index))

    def solve_for(x_vec):
        rhs = {}
        for k, a in enumerate(x_vec):
            for key, v in flatten_ring_elt(a.at_level(S.n), S.n).items():
                rk = ("aug", k, key)
                rhs[rk] = v
                rows_index.setdefault(rk, len(rows_index))
                row_mods[rk] = base_mod(key)
        nrows = len(rows_index)
        A = [[0] * nU for _ in range(nrows)]
        b = [0] * nrows
        scale = {rk: p**E // row_mods[rk] for rk in rows_index}
        for ci, colmap in enumerate(cols):
            for rk, v in colmap.items():
                A[rows_index[rk]][ci] = v * scale[rk]
        for rk, v in rhs.items():
            b[rows_index[rk]] = v * scale[rk]
        sol = solve_p_power(A, b, p, E)
        if sol is None:
            raise WeightCapTooSmall("flatness system inconsistent at this cap")
        return sol

    eps = [[D1.zero() for _ in range(r)] for _ in range(r)]
    for j in range(r):
        sol = solve_for(M.basis_vec(j))
        svec = [D1.zero() for _ in range(r)]
        for u, coeffint in enumerate(sol):
            if coeffint % p**E == 0:
                continue
            zi, t = divmod(u, nM)
            _j, vec = m_coord_elt(t)
            zelt = D1.monomial(zetas[zi])
            for k, v in enumerate(vec):
                if not v.is_zero():
                    svec[k] = svec[k] + coeffint * (zelt * D1.const(v))
        # exact residual verification with full arithmetic
        for i in range(S.d):
            resid = ctx.theta0_module(i, svec)
            if not all(a.is_zero() for a in resid):
                raise WeightCapTooSmall(
                    f"flat section residual nonzero in direction {i}"
                )
        delt = ctx.delta_module(svec)
        for k in range(r):
            want = D.one() if k == j else D.zero()
            if not (delt[k] == want):
                raise WeightCapTooSmall("augmentation failed after solve")
        for k in range(r):
            eps[k][j] = svec[k]
    return eps


def solve_p_power(A, b, p, E):
    """One solution of A x = b over Z/p^E, or None.

    Dense diagonalization over the local ring Z/p^E: repeatedly pick the
    globally minimal-valuation entry of the remaining block, normalize
    its row by the unit part, and clear the row and column.  Column
    operations are tracked as x = V y."""
    mod = p**E
    nrows = len(A)
    ncols = len(A[0]) if nrows else 0
    M = [[A[i][j] % mod for j in range(ncols)] for i in range(nrows)]
    rhs = [b[i] % mod for i in range(nrows)]
    # Vcols[j] = column j of the transform; x = sum_j y_j * Vcols[j]
    Vcols = [[int(i == j) for i in range(ncols)] for j in range(ncols)]

    def valp(a):
        v = 0
        while a % p == 0:
            a //= p
            v += 1
        return v

    t = 0
    lim = min(nrows, ncols)
    pivots = []
    while t < lim:
        best, bestv = None, E + 1
        for i in range(t, nrows):
            Mi = M[i]
            for j in range(t, ncols):
                a = Mi[j]
                if a:
                    v = valp(a)
                    if v < bestv:
                        best, bestv = (i, j), v
                        if v == 0:
                            break
            if bestv == 0:
                break
        if best is None:
            break
        bi, bj = best
        M[t], M[bi] = M[bi], M[t]
        rhs[t], rhs[bi] = rhs[bi], rhs[t]
        if bj != t:
            for row in M:
                row[t], row[bj] = row[bj], row[t]
            Vcols[t], Vcols[bj] = Vcols[bj], Vcols[t]
        v = bestv
        piv = p**v
        unit = M[t][t] // piv
        uinv = pow(unit % mod, -1, mod)
        M[t] = [(x * uinv) % mod for x in M[t]]
        rhs[t] = (rhs[t] * uinv) % mod
        for i in range(nrows):
            if i != t and M[i][t]:
                f = M[i][t] // piv  # exact: the pivot has minimal valuation
                M[i] = [(x - f * y) % mod for x, y in zip(M[i], M[t])]
                rhs[i] = (rhs[i] - f * rhs[t]) % mod
        for j in range(ncols):
            if j != t and M[t][j]:
                f = M[t][j] // piv
                for i in range(nrows):
                    M[i][j] = (M[i][j] - f * M[i][t]) % mod
                Vcols[j] = [(x - f * y) % mod for x, y in zip(Vcols[j], Vcols[t])]
                M[t][j] %= mod
        pivots.append((t, v))
        t += 1
    y = [0] * ncols
    for t2, v in pivots:
        if rhs[t2] % p**v:
            return None
        y[t2] = rhs[t2] // p**v
    for i in range(len(pivots), nrows):
        if rhs[i] % mod:
            return None
    x = [0] * ncols
    for t2 in range(ncols):
        if y[t2]:
            col = Vcols[t2]
            for i in range(ncols):
                if col[i]:
                    x[i] = (x[i] + y[t2] * col[i]) % mod
    for i in range(nrows):
        s = sum(A[i][j] * x[j] for j in range(ncols)) % mod
        if s != b[i] % mod:
            return None
    return x


# -- the inverse construction --------------------------------------------------------------


def higgs_from_strat(ctx, st):
    """Theta_i = Delta_M(theta_{p_0^*M,1;i}(eps(1 tensor e_j)))."""
    S, r = ctx.S, ctx.r
    # Delta(eps) = id is required
    for j in range(r):
        col = ctx.delta_module(st.col(j))
        for k in range(r):
            want = S.D.one() if k == j else S.D.zero()
            if not (col[k] == want):
                raise AugmentationFailed("Delta(eps) != id")
    theta = {}
    for i in range(S.d):
        T = [[S.D.zero() for _ in range(r)] for _ in range(r)]
        for j in range(r):
            v = ctx.theta1_module(i, st.col(j))
            dv = ctx.delta_module(v)
            for k in range(r):
                T[k][j] = dv[k]
        theta[i] = T
    return QHiggsModule(S.D, r, theta, list(range(S.d)), name="from-strat")


# -- checks ------------------------------------------------------------------------------------


def cocycle_check(ctx, st, name="strat-cocycle"):
    """Delta^*(eps) = id, the D(2) cocycle, and invertibility via iota."""
    rep = Report(name, "stratification-cocycle")
    S, r = ctx.S, ctx.r
    for j in range(r):
        col = ctx.delta_module(st.col(j))
        for k in range(r):
            want = S.D.one() if k == j else S.D.zero()
            if not (col[k] == want):
                return rep.fail(witness={"col": j, "row": k}, note="Delta(eps) != id")
    p01, p12, p02 = S.map("p01"), S.map("p12"), S.map("p02")
    A01 = st.matrix_map(p01)
    A12 = st.matrix_map(p12)
    A02 = st.matrix_map(p02)
    comp = _mat_mul(A01, A12, S.D2.zero())
    if not _mat_eq(comp, A02):
        return rep.fail(note="p01(eps) p12(eps) != p02(eps)")
    iota = S.map("iota")
    Ainv = st.matrix_map(iota)
    prod = _mat_mul(st.eps, Ainv, S.D1.zero())
    if not _mat_eq(prod, _identity(S.D1, r)):
        return rep.fail(note="eps * iota(eps) != id")
    return rep


def gamma_compat_check(ctx, st, name="strat-gamma-compat"):
    """M -> p_1^*M -> eps -> p_0^*M intertwines gamma_{M,i} with
    id tensor gamma_{D(1),1;i}."""
    rep = Report(name, "stratification-gamma-compatibility")
    S, M, r = ctx.S, ctx.M, ctx.r
    for i in range(S.d):
        spec = S.theta1(i)
        for j in range(r):
            gv = M.gamma_vec(i, M.basis_vec(j))
            lhs = st.apply_to(gv)
            rhs = [spec.gamma(a) for a in st.col(j)]
            if not all(x == y for x, y in zip(lhs, rhs)):
                return rep.fail(
                    witness={"i": i, "col": j},
                    note="gamma compatibility failed",
                )
    return rep


def frobenius_strat_check(ctx, st, name="strat-frobenius"):
    """The stratification of phi^*M is the entrywise Frobenius of eps."""
    rep = Report(name, "stratification-frobenius-compatibility")
    S, M = ctx.S, ctx.M
    eps_phi = [[a.phi() for a in row] for row in st.eps]
    stf = Stratification(ctx, eps_phi)
    Mf = M.frobenius_pullback()
    got = higgs_from_strat(ctx, stf)
    for i in range(S.d):
        for a in range(ctx.r):
            for b in range(ctx.r):
                if not (got.theta[i][a][b] == Mf.theta[i][a][b]):
                    return rep.fail(
                        witness={"i": i, "entry": (a, b),
                                 "got": describe(got.theta[i][a][b]),
                                 "want": describe(Mf.theta[i][a][b])},
                        note="frobenius pullback does not match phi(eps)",
                    )
    return rep


def tensor_strat_check(ctxA, stA, ctxB, stB, name="strat-tensor"):
    """eps_(M tensor M') = eps_M tensor eps_M' (Kronecker over D(1))."""
    rep = Report(name, "stratification-tensor-compatibility")
    S = ctxA.S
    MT = ctxA.M.tensor(ctxB.M)
    ctxT = StratContext(S, MT)
    stT = strat_from_higgs(ctxT)
    rA, rB = ctxA.r, ctxB.r
    for a in range(rA):
        for b in range(rB):
            for c in range(rA):
                for e in range(rB):
                    lhs = stT.eps[a * rB + b][c * rB + e]
                    rhs = stA.eps[a][c] * stB.eps[b][e]
                    if not (lhs == rhs):
                        return rep.fail(
                            witness={"entry": (a, b, c, e)},
                            note="tensor stratification mismatch",
                        )
    return rep


def _base_coord_mod(key, base, lv):
    k = key
    while isinstance(k, tuple):
        k = k[-1]
    return base.p ** base.emod(k, lv)


def ca_h0_compare(ctx, st, name="ca-h0", mono_cap=None):
    """ker(theta_M) = ker(eps(1 tensor .) - (.) tensor 1), with matching
    invariant factors, on the weight-capped model of the module."""
    rep = Report(name, "cech-alexander-h0-comparison")
    S, M, r = ctx.S, ctx.M, ctx.r
    D = S.D
    base = D.prime_base
    from .qhiggs import coord_elt

    cap = mono_cap if mono_cap is not None else (S.p ** 2 if S.d == 1 else S.p)
    if isinstance(D.C, BaseRing):
        dcoords = [(k, D.C.p ** D.C.emod(k, S.n)) for k in range(D.C.deg_bound(S.n))]
    else:
        dcoords = ring_coord_list(D.C, S.n, cap)
    dmonos = D.basis_monomials(cap)
    mcoords = [(mono, key, mod) for mono in dmonos for key, mod in dcoords]
    nM = len(mcoords) * r

    def m_unit(t):
        mono, key, _mod = mcoords[t % len(mcoords)]
        j = t // len(mcoords)
        vec = [D.zero() for _ in range(r)]
        vec[j] = D._elt({mono: coord_elt(D.C, key, S.n)}, S.n)
        return vec

    # map 1: theta in all directions; map 2: eps(1 tensor .) - (.) tensor 1
    imgs1, imgs2 = [], []
    lv = S.n
    for t in range(nM):
        vec = m_unit(t)
        img1 = [M.theta_vec(i, vec) for i in range(S.d)]
        dif = [a - b for a, b in zip(st.apply_to(vec), ctx.include_p0(vec))]
        for iv in img1:
            for a in iv:
                lv = min(lv, a.level)
        for a in dif:
            lv = min(lv, a.level)
        imgs1.append(img1)
        imgs2.append(dif)

    rows1, cols1 = {}, []
    for img in imgs1:
        colmap = {}
        for i, iv in enumerate(img):
            for k, a in enumerate(iv):
                for key, v in flatten_ring_elt(a.at_level(lv), lv).items():
                    rk = (i, k, key)
                    colmap[rk] = v
                    rows1.setdefault(rk, len(rows1))
        cols1.append(colmap)
    A1 = [[0] * nM for _ in range(len(rows1))]
    mods1 = [0] * len(rows1)
    for ci, col in enumerate(cols1):
        for rk, v in col.items():
            A1[rows1[rk]][ci] = v
    for rk, idx in rows1.items():
        mods1[idx] = _base_coord_mod(rk[-1], base, lv)

    rows2, cols2 = {}, []
    for dif in imgs2:
        colmap = {}
        for k, a in enumerate(dif):
            for zmono, c in a.at_level(lv).terms.items():
                for key, v in flatten_ring_elt(c, lv).items():
                    rk = (k, zmono, key)
                    colmap[rk] = v
                    rows2.setdefault(rk, len(rows2))
        cols2.append(colmap)
    A2 = [[0] * nM for _ in range(len(rows2))]
    mods2 = [0] * len(rows2)
    for ci, col in enumerate(cols2):
        for rk, v in col.items():
            A2[rows2[rk]][ci] = v
    for rk, idx in rows2.items():
        mods2[idx] = _base_coord_mod(rk[-1], base, lv)

    # source moduli at the comparison level
    src_mods = []
    for t in range(nM):
        key = mcoords[t % len(mcoords)][1]
        src_mods.append(_base_coord_mod(key, base, lv))
    K1 = kernel_lattice(A1, mods1, nM)
    K2 = kernel_lattice(A2, mods2, nM)
    inv1 = _quotient_invariants(K1, src_mods)
    inv2 = _quotient_invariants(K2, src_mods)
    if inv1 != inv2:
        return rep.fail(
            witness={"theta-kernel": inv1, "ca-kernel": inv2},
            note="invariant factors differ",
        )
    # mutual containment, checked on the defining congruences directly
    def in_kernel(A, mods, v):
        for i, row in enumerate(A):
            s = sum(row[j] * v[j] for j in range(len(v)))
            if (s % mods[i]) if mods[i] else s:
                return False
        return True

    for v in K1:
        if not in_kernel(A2, mods2, v):
            return rep.fail(note="theta-kernel not contained in CA-kernel")
    for v in K2:
        if not in_kernel(A1, mods1, v):
            return rep.fail(note="CA-kernel not contained in theta-kernel")
    rep.note(f"kernel invariants {inv1}")
    return rep


def _quotient_invariants(K, src_mods):
    """Invariant factors of the subgroup K/modsLat of the finite module
    (K a lattice containing the moduli lattice)."""
    from .homalg import smith_normal_form

    n = len(src_mods)
    gens = list(K)
    for i, m in enumerate(src_mods):
        col = [0] * n
        col[i] = m
        gens.append(col)
    basisK = lattice_basis(gens, n)
    mods_in_K = []
    BK = [[basisK[j][i] for j in range(len(basisK))] for i in range(n)]
    for i, m in enumerate(src_mods):
        col = [0] * n
        col[i] = m
        z = solve_integer(BK, col)
        if z is None:
            raise WeightCapTooSmall("moduli lattice escapes the kernel lattice")
        mods_in_K.append(z)
    Z = [[mods_in_K[j][i] for j in range(len(mods_in_K))] for i in range(len(basisK))]
    _u2, S2, _v2 = smith_normal_form(Z)
    out = []
    for i in range(min(len(Z), len(Z[0]) if Z else 0)):
        d = abs(S2[i][i])
        if d > 1:
            out.append(d)
    return sorted(out, reverse=True)
