"""Z-coordinate flattening of ring and module elements.

Feeds the homalg layer: every finite host (base ring, chart, envelope,
relative envelope) is a finite direct sum of Z/p^e summands once the
monomial support is capped, and all module operators are Z-linear on
those coordinates.
"""

from __future__ import annotations

from .base import BaseRing


def ring_coord_list(ring, level, mono_cap):
    """[(key, modulus)] for elements of `ring` at the level, with monomial
    support bounded by mono_cap (tau-weight for envelopes, degree for
    charts)."""
    if isinstance(ring, BaseRing):
        return [
            (k, ring.p ** ring.emod(k, level))
            for k in range(ring.deg_bound(level))
        ]
    inner = ring_coord_list(ring.C, level, mono_cap) if hasattr(ring, "C") else []
    out = []
    for mono in ring.basis_monomials(mono_cap):
        for key, mod in inner:
            out.append(((mono, key), mod))
    return out


def flatten_ring_elt(x, level):
    """dict key -> int for a base/chart/envelope element at the level."""
    if not hasattr(x, "terms"):  # BaseElt
        return {k: c for k, c in enumerate(x.at_level(level).coeffs) if c}
    out = {}
    for mono, c in x.at_level(level).terms.items():
        for key, v in flatten_ring_elt(c, level).items():
            out[(mono, key)] = v
    return out
