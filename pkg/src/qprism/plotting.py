"""Figure rendering for the report path.

Cohomology reports render as log_p-order bar charts per degree;
affine-line torsion tables render as exponent-versus-monomial plots.
Figures are written next to the delimited output, never shown
interactively; matplotlib is imported lazily so that headless check
runs never touch it.
"""

from __future__ import annotations

import math


def _agg_plt():
    import matplotlib

    matplotlib.use("Agg", force=True)
    import matplotlib.pyplot as plt

    return plt


def cohomology_figure(per_degree, p, path, title="cohomology"):
    """Bar chart: for each degree q, stacked log_p orders of the invariant
    factors of H^q."""
    plt = _agg_plt()
    degrees = sorted(per_degree)
    fig, ax = plt.subplots(figsize=(6, 3.4))
    for q in degrees:
        invs = per_degree[q]
        bottom = 0
        for d in invs:
            h = math.log(d, p)
            ax.bar([q], [h], bottom=bottom, width=0.6,
                   edgecolor="black", linewidth=0.4, color="#5a7bb0")
            bottom += h
        if not invs:
            ax.bar([q], [0], width=0.6)
    ax.set_xticks(degrees)
    ax.set_xlabel("degree q")
    ax.set_ylabel(f"log_{p} |H^q| (stacked invariant factors)")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, metadata=_clean_metadata(path))
    plt.close(fig)
    return path


def torsion_figure(per_index, p, path, title="q-de Rham torsion"):
    """Exponent plot: for each monomial index m, the p-exponents of the
    invariant factors of the m-th cokernel summand."""
    plt = _agg_plt()
    fig, ax = plt.subplots(figsize=(6, 3.4))
    xs, ys = [], []
    for m in sorted(per_index):
        for d in per_index[m]:
            xs.append(m)
            ys.append(round(math.log(d, p)))
    ax.plot(xs, ys, "o", color="#a0522d")
    ax.set_xlabel("monomial index m")
    ax.set_ylabel(f"v_{p} of invariant factors")
    ax.set_title(title)
    ax.set_xticks(sorted(set(xs)) if xs else [])
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, metadata=_clean_metadata(path))
    plt.close(fig)
    return path


def _clean_metadata(path):
    # strip volatile metadata so repeated runs produce stable files
    if str(path).endswith(".svg"):
        return {"Date": None}
    if str(path).endswith(".png"):
        return {"Software": "qprism"}
    return None
