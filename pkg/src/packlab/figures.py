"""Matplotlib renderers for the command-line report paths.

Everything draws through the Agg backend into a file; no interactive state.
PNG output strips the writer's software tag so repeated runs with the same
inputs produce byte-identical files.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from matplotlib.collections import EllipseCollection, LineCollection, PolyCollection

_SAVE = {"dpi": 150, "metadata": {"Software": None}}


def _finish(fig, path):
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    if out.suffix.lower() == ".png":
        fig.savefig(out, **_SAVE)
    else:
        fig.savefig(out, dpi=_SAVE["dpi"])
    plt.close(fig)


def _edge_coords(emb):
    return emb.coords[emb.tri.edges]


def render_embedding(emb, path, u=None, title=None):
    """Wireframe of the embedding; with u, faces are shaded by vertex mean."""
    fig, ax = plt.subplots(figsize=(6.0, 6.0))
    if u is not None:
        polys = emb.coords[emb.tri.faces]
        vals = np.asarray(u, dtype=float)[emb.tri.faces].mean(axis=1)
        pc = PolyCollection(polys, array=vals, cmap="viridis",
                            edgecolors="none")
        ax.add_collection(pc)
        fig.colorbar(pc, ax=ax, shrink=0.8)
    segs = _edge_coords(emb)
    ax.add_collection(LineCollection(segs, colors="0.3", linewidths=0.5))
    bmask = emb.tri.boundary_edge_mask
    if bmask.any():
        ax.add_collection(LineCollection(segs[bmask], colors="crimson",
                                         linewidths=1.2))
    ax.autoscale_view()
    ax.set_aspect("equal")
    ax.set_axis_off()
    if title:
        ax.set_title(title)
    _finish(fig, path)


def render_packing(layout, path, title=None):
    """Tangent circles plus the carrier edges."""
    fig, ax = plt.subplots(figsize=(6.0, 6.0))
    c = layout.centers
    d = 2.0 * layout.radii
    ax.add_collection(EllipseCollection(
        d, d, np.zeros_like(d), units="xy", offsets=c,
        transOffset=ax.transData, facecolors="none", edgecolors="steelblue",
        linewidths=0.6))
    segs = c[layout.tri.edges]
    ax.add_collection(LineCollection(segs, colors="0.75", linewidths=0.4))
    lo = (c - layout.radii[:, None]).min(axis=0)
    hi = (c + layout.radii[:, None]).max(axis=0)
    ax.set_xlim(lo[0], hi[0])
    ax.set_ylim(lo[1], hi[1])
    ax.set_aspect("equal")
    ax.set_axis_off()
    if title:
        ax.set_title(title)
    _finish(fig, path)


def render_capacity(traces, path, title=None):
    """Capacity against member index, log-log, one line per labeled trace."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for label, trace in traces:
        ax.plot(trace.ks, trace.caps, marker="o", markersize=3, label=label)
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("member index k")
    ax.set_ylabel("capacity")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    if title:
        ax.set_title(title)
    _finish(fig, path)


def render_polarity(sweep, path, title=None):
    """Hitting probability against eps with 2-sigma error bars."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    eps = [t.eps for t in sweep["table"]]
    p = [t.p_hit for t in sweep["table"]]
    se = [2.0 * t.stderr for t in sweep["table"]]
    ax.errorbar(eps, p, yerr=se, marker="o", markersize=4, capsize=3)
    ax.set_xscale("log")
    ax.invert_xaxis()
    ax.set_ylim(0.0, 1.0)
    ax.set_xlabel("eps")
    ax.set_ylabel("hit probability")
    ax.grid(True, alpha=0.3)
    ax.annotate(sweep["verdict"], xy=(0.02, 0.95), xycoords="axes fraction",
                va="top")
    if title:
        ax.set_title(title)
    _finish(fig, path)
