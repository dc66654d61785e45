"""Straight-line embeddings and their quality measurements.

An Embedding pins each vertex of a triangulation to a point in the plane
with positively oriented faces. Embeddings come from circle packing centers
or from files. Quality is measured by the minimum corner angle (eta), the
adjacent edge length ratio, and the observed separation constant between
non-adjacent edges; the polygonal domain (union of faces) and its boundary
polylines are extracted for downstream capacity and hitting runs.

Multi-boundary complexes (tube, tree of tubes) cannot be packed directly;
fill_holes caps every boundary cycle but one with a cone apex, the capped
disk is packed, and the apex coordinates are dropped again.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import rng as _rng
from .errors import (
    DegenerateFace,
    InvalidEmbedding,
    NotADisk,
    ParamOutOfRange,
)
from .packing import PackedLayout, pack
from .triangulation import Triangulation, build_from_faces


@dataclass(frozen=True)
class Embedding:
    tri: Triangulation
    coords: np.ndarray          # (nv, 2)

    def __post_init__(self):
        c = np.asarray(self.coords, dtype=float)
        if c.shape != (self.tri.nv, 2):
            raise ParamOutOfRange(
                f"coords shape {c.shape} does not match nv={self.tri.nv}")
        object.__setattr__(self, "coords", c)

    def face_areas(self) -> np.ndarray:
        p = self.coords[self.tri.faces]
        a = p[:, 1] - p[:, 0]
        b = p[:, 2] - p[:, 0]
        return 0.5 * (a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0])

    def edge_lengths(self) -> np.ndarray:
        e = self.tri.edges
        d = self.coords[e[:, 0]] - self.coords[e[:, 1]]
        return np.hypot(d[:, 0], d[:, 1])

    def min_incident_edge(self) -> np.ndarray:
        """Per vertex, the length of its shortest incident edge (r_x)."""
        e = self.tri.edges
        ln = self.edge_lengths()
        out = np.full(self.tri.nv, np.inf)
        np.minimum.at(out, e[:, 0], ln)
        np.minimum.at(out, e[:, 1], ln)
        return out


@dataclass(frozen=True)
class GoodEmbeddingReport:
    eta_min: float                      # radians
    max_adjacent_length_ratio: float
    c_obs: float | None = None          # filled in by sausage_check callers

    def with_sausage(self, c_obs: float) -> "GoodEmbeddingReport":
        return replace(self, c_obs=c_obs)


@dataclass(frozen=True)
class DomainApprox:
    """Union-of-faces polygonal domain and its boundary polylines."""

    embedding: Embedding
    boundary_cycles: list            # vertex index cycles
    bbox: tuple                      # (xmin, ymin, xmax, ymax)

    def boundary_segments(self) -> np.ndarray:
        segs = []
        pts = self.embedding.coords
        for cyc in self.boundary_cycles:
            for i, v in enumerate(cyc):
                w = cyc[(i + 1) % len(cyc)]
                segs.append((pts[v], pts[w]))
        return np.asarray(segs)

    def area(self) -> float:
        return float(self.embedding.face_areas().sum())


def embedding_from_layout(layout: PackedLayout) -> Embedding:
    """Vertex coordinates = circle centers."""
    emb = Embedding(layout.tri, layout.centers.copy())
    areas = emb.face_areas()
    scale = np.zeros(len(areas))
    p = layout.tri.faces
    for k in range(3):
        d = emb.coords[p[:, (k + 1) % 3]] - emb.coords[p[:, k]]
        scale = np.maximum(scale, np.hypot(d[:, 0], d[:, 1]))
    bad = areas <= 1e-14 * scale ** 2
    if bad.any():
        i = int(np.argmax(bad))
        raise DegenerateFace(
            f"face {tuple(layout.tri.faces[i])} has area {areas[i]:.3e}")
    return emb


def goodness_report(emb: Embedding) -> GoodEmbeddingReport:
    """Minimum corner angle and max within-face adjacent length ratio."""
    p = emb.coords[emb.tri.faces]
    eta = np.inf
    sides = []
    for k in range(3):
        a = p[:, (k + 1) % 3] - p[:, k]
        b = p[:, (k + 2) % 3] - p[:, k]
        dot = (a * b).sum(axis=1)
        cross = a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0]
        ang = np.arctan2(np.abs(cross), dot)
        eta = min(eta, float(ang.min()))
        sides.append(np.hypot(a[:, 0], a[:, 1]))
    s = np.stack(sides)
    ratio = float((s.max(axis=0) / s.min(axis=0)).max())
    return GoodEmbeddingReport(eta_min=eta, max_adjacent_length_ratio=ratio)


# --------------------------------------------------------------------------
# segment distance kernels
# --------------------------------------------------------------------------

def _point_seg_dist2(px, py, ax, ay, bx, by):
    dx, dy = bx - ax, by - ay
    ln2 = dx * dx + dy * dy
    t = ((px - ax) * dx + (py - ay) * dy) / np.where(ln2 > 0, ln2, 1.0)
    t = np.clip(t, 0.0, 1.0)
    cx, cy = ax + t * dx, ay + t * dy
    return (px - cx) ** 2 + (py - cy) ** 2


def _seg_seg_dist(a0, a1, b0, b1) -> np.ndarray:
    """Pairwise distances between segments a0->a1 and b0->b1, vectorized.

    All inputs are (n, 2). Proper crossings yield distance 0.
    """
    d = np.minimum(
        _point_seg_dist2(a0[:, 0], a0[:, 1], b0[:, 0], b0[:, 1], b1[:, 0], b1[:, 1]),
        _point_seg_dist2(a1[:, 0], a1[:, 1], b0[:, 0], b0[:, 1], b1[:, 0], b1[:, 1]))
    d = np.minimum(d, _point_seg_dist2(
        b0[:, 0], b0[:, 1], a0[:, 0], a0[:, 1], a1[:, 0], a1[:, 1]))
    d = np.minimum(d, _point_seg_dist2(
        b1[:, 0], b1[:, 1], a0[:, 0], a0[:, 1], a1[:, 0], a1[:, 1]))
    d = np.sqrt(d)
    cross = _segments_cross(a0, a1, b0, b1)
    d[cross] = 0.0
    return d


def _segments_cross(a0, a1, b0, b1) -> np.ndarray:
    def orient(p, q, r):
        return ((q[:, 0] - p[:, 0]) * (r[:, 1] - p[:, 1])
                - (q[:, 1] - p[:, 1]) * (r[:, 0] - p[:, 0]))
    d1 = orient(b0, b1, a0)
    d2 = orient(b0, b1, a1)
    d3 = orient(a0, a1, b0)
    d4 = orient(a0, a1, b1)
    return (d1 * d2 < 0) & (d3 * d4 < 0)


def sausage_check(emb: Embedding, sample_cap: int = 10 ** 7,
                  seed: int | None = None) -> dict:
    """Observed separation constant over non-adjacent edge pairs.

    c_obs = min over pairs of d(e, f) / max(|e|, |f|). Exhaustive when the
    pair count fits under sample_cap; otherwise every pair within 3
    combinatorial hops is checked plus a seeded random sample of far pairs.
    Returns {"c_obs": float, "witness": (edge_i, edge_j), "pairs_checked": n}.
    """
    e = emb.tri.edges
    n = len(e)
    total = n * (n - 1) // 2
    if total <= sample_cap:
        ii, jj = np.triu_indices(n, k=1)
    else:
        ii, jj = _near_pairs(emb.tri, hops=3)
        # near pairs may already exceed the cap on dense meshes
        want = max(0, min(sample_cap - len(ii), sample_cap // 10))
        g = _rng.stream(_rng.default_seed() if seed is None else seed, 0x5A)
        ri = g.integers(0, n, size=want)
        rj = g.integers(0, n, size=want)
        keep = ri < rj
        ii = np.concatenate([ii, ri[keep]])
        jj = np.concatenate([jj, rj[keep]])
    # drop adjacent pairs (shared endpoint)
    share = ((e[ii, 0] == e[jj, 0]) | (e[ii, 0] == e[jj, 1])
             | (e[ii, 1] == e[jj, 0]) | (e[ii, 1] == e[jj, 1]))
    ii, jj = ii[~share], jj[~share]

    ln = emb.edge_lengths()
    best = np.inf
    witness = (-1, -1)
    chunk = 1 << 18
    pts = emb.coords
    for s in range(0, len(ii), chunk):
        a, b = ii[s:s + chunk], jj[s:s + chunk]
        d = _seg_seg_dist(pts[e[a, 0]], pts[e[a, 1]],
                          pts[e[b, 0]], pts[e[b, 1]])
        ratio = d / np.maximum(ln[a], ln[b])
        k = int(np.argmin(ratio))
        if ratio[k] < best:
            best = float(ratio[k])
            witness = (int(a[k]), int(b[k]))
    return {"c_obs": best, "witness": witness, "pairs_checked": int(len(ii))}


def _near_pairs(tri: Triangulation, hops: int) -> tuple[np.ndarray, np.ndarray]:
    """Edge pairs whose endpoint sets lie within `hops` of each other."""
    out_i, out_j = [], []
    edge_ids_at = [[] for _ in range(tri.nv)]
    for k, (a, b) in enumerate(tri.edges):
        edge_ids_at[a].append(k)
        edge_ids_at[b].append(k)
    for k, (a, b) in enumerate(tri.edges):
        seen = {int(a), int(b)}
        frontier = [int(a), int(b)]
        for _ in range(hops):
            nxt = []
            for u in frontier:
                for w in tri.neighbors(u):
                    w = int(w)
                    if w not in seen:
                        seen.add(w)
                        nxt.append(w)
            frontier = nxt
        cand = set()
        for u in seen:
            cand.update(edge_ids_at[u])
        for j in cand:
            if j > k:
                out_i.append(k)
                out_j.append(j)
    return np.asarray(out_i, dtype=np.int64), np.asarray(out_j, dtype=np.int64)


def validate_embedding(emb: Embedding) -> None:
    """Raise InvalidEmbedding on duplicate vertices, flipped faces, or
    crossings between non-adjacent edges; bounding-box sweep over edges."""
    pts = emb.coords
    if len(np.unique(pts, axis=0)) != len(pts):
        raise InvalidEmbedding("two vertices share coordinates")
    areas = emb.face_areas()
    if (areas <= 0).any():
        i = int(np.argmax(areas <= 0))
        raise InvalidEmbedding(
            f"face {tuple(emb.tri.faces[i])} not positively oriented "
            f"(area {areas[i]:.3e})")

    e = emb.tri.edges
    a, b = pts[e[:, 0]], pts[e[:, 1]]
    lo = np.minimum(a, b)
    hi = np.maximum(a, b)
    order = np.argsort(lo[:, 0], kind="stable")
    active: list[int] = []
    for idx in order:
        idx = int(idx)
        x0 = lo[idx, 0]
        active = [j for j in active if hi[j, 0] >= x0]
        for j in active:
            if lo[idx, 1] > hi[j, 1] or lo[j, 1] > hi[idx, 1]:
                continue
            u = {int(e[idx, 0]), int(e[idx, 1])}
            w = {int(e[j, 0]), int(e[j, 1])}
            if u & w:
                continue
            if _segments_cross(a[idx:idx + 1], b[idx:idx + 1],
                               a[j:j + 1], b[j:j + 1])[0]:
                raise InvalidEmbedding(
                    f"edges {tuple(e[idx])} and {tuple(e[j])} cross")
        active.append(idx)


def build_domain(emb: Embedding) -> DomainApprox:
    pts = emb.coords
    bbox = (float(pts[:, 0].min()), float(pts[:, 1].min()),
            float(pts[:, 0].max()), float(pts[:, 1].max()))
    return DomainApprox(emb, [list(c) for c in emb.tri.boundary_cycles], bbox)


# --------------------------------------------------------------------------
# packing-backed embeddings for arbitrary genus-zero complexes
# --------------------------------------------------------------------------

def fill_holes(tri: Triangulation) -> tuple[Triangulation, int]:
    """Cap every boundary cycle except the one with the lowest vertex index.

    Each capped cycle gains a cone apex joined to all its vertices. Returns
    the capped triangulation and the original vertex count (apexes occupy
    indices >= that count).
    """
    cycles = tri.boundary_cycles
    if len(cycles) <= 1:
        return tri, tri.nv
    keep = min(range(len(cycles)), key=lambda i: min(cycles[i]))
    faces = [tuple(int(x) for x in f) for f in tri.faces]
    apex = tri.nv
    for i, cyc in enumerate(cycles):
        if i == keep:
            continue
        for t, v in enumerate(cyc):
            w = cyc[(t + 1) % len(cyc)]
            faces.append((apex, v, w))
        apex += 1
    return build_from_faces(faces), tri.nv


def embed_complex(tri: Triangulation, tol: float = 1e-10,
                  closure_factor: float = 100.0) -> Embedding:
    """Embedding via circle packing; non-disk complexes get capped first."""
    capped, nv_orig = fill_holes(tri)
    if len(capped.boundary_cycles) != 1:
        raise NotADisk("complex has no boundary to keep")
    layout = pack(capped, tol=tol)
    emb_full = embedding_from_layout(layout)
    if capped.nv == tri.nv:
        return emb_full
    return Embedding(tri, emb_full.coords[:nv_orig].copy())


def embed_exhaustion(seq, tol: float = 1e-10) -> list[Embedding]:
    """One embedding per member, inherited from the largest member's packing.

    The largest member is packed once; smaller members take the coordinate
    prefix, so all members share one geometry and stay strictly nested.
    """
    big = embed_complex(seq.largest, tol=tol)
    out = []
    for m in seq.members:
        out.append(Embedding(m, big.coords[:m.nv].copy()))
    return out


# --------------------------------------------------------------------------
# .emb files and SVG
# --------------------------------------------------------------------------

def write_emb(emb: Embedding, path: str | Path) -> None:
    lines = [str(emb.tri.nv)]
    lines.extend(f"{x:.17g} {y:.17g}" for x, y in emb.coords)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_emb(path: str | Path, tri: Triangulation) -> Embedding:
    rows = [ln for ln in Path(path).read_text(encoding="utf-8").split("\n")
            if ln.strip()]
    nv = int(rows[0])
    if nv != tri.nv:
        raise ValueError(f"{path}: {nv} vertices, triangulation has {tri.nv}")
    data = np.array([[float(t) for t in ln.split()] for ln in rows[1:]])
    if data.shape != (nv, 2):
        raise ValueError(f"{path}: malformed rows")
    return Embedding(tri, data)


def to_svg(emb: Embedding, path: str | Path,
           radii: np.ndarray | None = None, size: int = 1000) -> None:
    """Deterministic SVG: faces, optional circles, boundary highlighted."""
    pts = emb.coords
    lo = pts.min(axis=0)
    hi = pts.max(axis=0)
    span = float(max(hi[0] - lo[0], hi[1] - lo[1], 1e-300))
    pad = 0.03 * span

    def sx(x):
        return (x - lo[0] + pad) / (span + 2 * pad) * size

    def sy(y):
        # flip y so the picture is not mirrored
        return size - (y - lo[1] + pad) / (span + 2 * pad) * size

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {size} {size}">'
    ]
    for f in emb.tri.faces:
        p = " ".join(f"{sx(pts[v, 0]):.4f},{sy(pts[v, 1]):.4f}" for v in f)
        parts.append(
            f'<polygon points="{p}" fill="#e8eef7" stroke="#46618c" '
            f'stroke-width="0.6"/>')
    if radii is not None:
        scale = size / (span + 2 * pad)
        for v in range(emb.tri.nv):
            parts.append(
                f'<circle cx="{sx(pts[v, 0]):.4f}" cy="{sy(pts[v, 1]):.4f}" '
                f'r="{radii[v] * scale:.4f}" fill="none" stroke="#c2622d" '
                f'stroke-width="0.5"/>')
    for cyc in emb.tri.boundary_cycles:
        p = " ".join(f"{sx(pts[v, 0]):.4f},{sy(pts[v, 1]):.4f}" for v in cyc)
        parts.append(
            f'<polygon points="{p}" fill="none" stroke="#a8232e" '
            f'stroke-width="1.4"/>')
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts) + "\n", encoding="utf-8")


