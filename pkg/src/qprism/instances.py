"""Seeded random instance generators for the property suites.

Integrable families are built as polynomials in a single strictly
upper-triangular matrix with base-ring entries: base entries are fixed
by every gamma_i, so the integrability obstruction is exactly the
commutator, which vanishes by construction.  Quasi-nilpotent instances
either stay strictly upper triangular or carry mu- (or p-) scaled
entries, whose iterates die at the truncation.
"""

from __future__ import annotations

from .qhiggs import QHiggsModule


def _matmul(host, A, B):
    r = len(A)
    return [
        [sum((A[i][k] * B[k][j] for k in range(r)), host.zero()) for j in range(r)]
        for i in range(r)
    ]


def random_integrable(host, rank, rng, nilpotent=False, scale=None):
    """Commuting family Theta_i = c_i1 N + c_i2 N^2 (+ c_i0 I), N strictly
    upper triangular with base entries; optionally scaled for nilpotence."""
    N = [[host.zero() for _ in range(rank)] for _ in range(rank)]
    for i in range(rank):
        for j in range(i + 1, rank):
            N[i][j] = host.const(host.C.random(rng))
    N2 = _matmul(host, N, N)
    theta = {}
    for i in range(host.d):
        c1 = host.const(host.C.random(rng))
        c2 = host.const(host.C.random(rng))
        T = [
            [c1 * N[a][b] + c2 * N2[a][b] for b in range(rank)]
            for a in range(rank)
        ]
        if not nilpotent:
            c0 = host.const(host.C.random(rng))
            for a in range(rank):
                T[a][a] = T[a][a] + c0
        if scale is not None:
            T = [[scale * x for x in row] for row in T]
        theta[i] = T
    return QHiggsModule(host, rank, theta, name=f"rand-r{rank}")


def random_quasi_nilpotent(host, rank, rng, mode="upper"):
    """Quasi-nilpotent instance: 'upper' (strictly triangular) or 'scaled'
    (entries multiplied by mu at generic q, by p at q = 1)."""
    if mode == "upper":
        return random_integrable(host, rank, rng, nilpotent=True)
    if host.mode == "q1":
        scale = host.from_int(host.p)
    else:
        scale = host.mu()
    return random_integrable(host, rank, rng, nilpotent=False, scale=scale)
