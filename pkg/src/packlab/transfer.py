"""Energy transfer between a vertex function and its linear interpolation.

Forward direction: interpolate u barycentrically over the embedded faces,
integrate the squared gradient in closed form, and measure the per-face
gradient constant (observed C with respect to the face's stored first edge).
Backward direction: average the interpolation over small balls around each
vertex (Monte Carlo or polar quadrature) to get back a vertex function whose
discrete energy is compared against the integral.

Ball radii are a fixed fraction of r_x, the shortest edge at x. The fraction
must keep every ball inside the closed star of its vertex, which also keeps
averaging segments between adjacent vertices inside the domain when the
fraction is at most the observed edge-separation constant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import rng as _rng
from .capacity import discrete_energy
from .embedding import Embedding, goodness_report
from .errors import (
    BallEscapesDomain,
    DegenerateFace,
    ParamOutOfRange,
    PointOutsideDomain,
)

_BARY_SLACK = 1e-12


@dataclass(frozen=True)
class PLFunction:
    """Barycentric-linear extension of vertex values over an embedding."""

    emb: Embedding
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.emb.tri.nv,):
            raise ParamOutOfRange("values must cover all vertices")
        object.__setattr__(self, "values", v)

    def __call__(self, points: np.ndarray, hint: int | None = None) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        faces, bary = locate(self.emb, pts, hint=hint)
        vals = self.values[self.emb.tri.faces[faces]]
        out = (bary * vals).sum(axis=1)
        return out if np.asarray(points).ndim == 2 else float(out[0])


def interpolate(u: np.ndarray, emb: Embedding) -> PLFunction:
    return PLFunction(emb, u)


def _face_frames(emb: Embedding):
    f = emb.tri.faces
    p0 = emb.coords[f[:, 0]]
    e1 = emb.coords[f[:, 1]] - p0
    e2 = emb.coords[f[:, 2]] - p0
    det = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
    return p0, e1, e2, det


def bary_coords(emb: Embedding, face_ids: np.ndarray,
                pts: np.ndarray) -> np.ndarray:
    """Barycentric coordinates of pts w.r.t. the given faces, (n,3)."""
    f = emb.tri.faces[face_ids]
    a = emb.coords[f[:, 0]]
    b = emb.coords[f[:, 1]]
    c = emb.coords[f[:, 2]]
    v0 = b - a
    v1 = c - a
    v2 = pts - a
    den = v0[:, 0] * v1[:, 1] - v0[:, 1] * v1[:, 0]
    l1 = (v2[:, 0] * v1[:, 1] - v2[:, 1] * v1[:, 0]) / den
    l2 = (v0[:, 0] * v2[:, 1] - v0[:, 1] * v2[:, 0]) / den
    return np.stack([1.0 - l1 - l2, l1, l2], axis=1)


def locate(emb: Embedding, pts: np.ndarray,
           hint: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Containing face and barycentric coordinates for each point.

    Walks across shared edges from the hint face; falls back to a scan of
    all faces. Raises PointOutsideDomain when no face contains a point.
    """
    tri = emb.tri
    n = len(pts)
    faces = np.full(n, -1, dtype=np.int64)
    out_bary = np.zeros((n, 3))
    neighbor = _face_neighbors(tri)
    start = 0 if hint is None else int(hint)
    for i in range(n):
        fi = _walk_one(emb, neighbor, start, pts[i])
        if fi < 0:
            fi = _scan_one(emb, pts[i])
        if fi < 0:
            raise PointOutsideDomain(f"point {tuple(pts[i])} outside the domain")
        faces[i] = fi
        start = fi
        out_bary[i] = bary_coords(emb, np.array([fi]), pts[i:i + 1])[0]
    return faces, out_bary


def _face_neighbors(tri) -> np.ndarray:
    key = {}
    nb = np.full((len(tri.faces), 3), -1, dtype=np.int64)
    for fi, (a, b, c) in enumerate(tri.faces):
        for k, (u, v) in enumerate(((a, b), (b, c), (c, a))):
            key[(u, v)] = (fi, k)
    for (u, v), (fi, k) in key.items():
        other = key.get((v, u))
        if other is not None:
            nb[fi, k] = other[0]
    return nb


def _walk_one(emb: Embedding, neighbor: np.ndarray, start: int,
              p: np.ndarray, max_steps: int = 10000) -> int:
    fi = start
    for _ in range(max_steps):
        lam = bary_coords(emb, np.array([fi]), p[None, :])[0]
        if (lam >= -_BARY_SLACK).all():
            return fi
        k = int(np.argmin(lam))
        # barycentric index k corresponds to the edge opposite vertex k
        side = (k + 1) % 3
        nxt = neighbor[fi, side]
        if nxt < 0:
            return -1
        fi = int(nxt)
    return -1


def _scan_one(emb: Embedding, p: np.ndarray) -> int:
    f = emb.tri.faces
    lam = bary_coords(emb, np.arange(len(f)), np.broadcast_to(p, (len(f), 2)))
    ok = (lam >= -_BARY_SLACK).all(axis=1)
    idx = np.flatnonzero(ok)
    return int(idx[0]) if len(idx) else -1


def face_gradients(emb: Embedding, u: np.ndarray) -> np.ndarray:
    """Constant gradient of the interpolation on each face, (F, 2)."""
    f = emb.tri.faces
    p0, e1, e2, det = _face_frames(emb)
    scale = np.maximum(np.hypot(*e1.T), np.hypot(*e2.T))
    if (np.abs(det) <= 1e-14 * scale ** 2).any():
        i = int(np.argmin(np.abs(det) / np.maximum(scale, 1e-300) ** 2))
        raise DegenerateFace(f"face {tuple(f[i])} is numerically degenerate")
    d1 = u[f[:, 1]] - u[f[:, 0]]
    d2 = u[f[:, 2]] - u[f[:, 0]]
    gx = (d1 * e2[:, 1] - d2 * e1[:, 1]) / det
    gy = (d2 * e1[:, 0] - d1 * e2[:, 0]) / det
    return np.stack([gx, gy], axis=1)


def pl_energy(f: PLFunction) -> float:
    """Integral of |grad| squared over the embedded domain."""
    g = face_gradients(f.emb, f.values)
    areas = f.emb.face_areas()
    return float(((g ** 2).sum(axis=1) * areas).sum())


def gradient_bound_check(f: PLFunction) -> dict:
    """Observed constant in |grad| <= C |v1 v2|^-1 max|u_i - u_j| per face.

    v1 v2 is the face's first stored edge. Faces with equal vertex values
    are skipped. Returns the max constant and the maximizing face.
    """
    emb = f.emb
    u = f.values
    fc = emb.tri.faces
    g = face_gradients(emb, u)
    gn = np.hypot(g[:, 0], g[:, 1])
    e1 = emb.coords[fc[:, 1]] - emb.coords[fc[:, 0]]
    le1 = np.hypot(e1[:, 0], e1[:, 1])
    vals = u[fc]
    maxdiff = vals.max(axis=1) - vals.min(axis=1)
    ok = maxdiff > 0
    if not ok.any():
        return {"C_obs": 0.0, "face_index": -1, "face": None}
    c = np.where(ok, gn * le1 / np.where(ok, maxdiff, 1.0), -np.inf)
    i = int(np.argmax(c))
    return {"C_obs": float(c[i]), "face_index": i, "face": tuple(fc[i])}


# --------------------------------------------------------------------------
# ball-average smoothing
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SmoothingConfig:
    """Ball fraction, sampling method, and seed for the averaging smoother."""

    c_ball: float | None = None      # None = geometric default for the instance
    samples: int = 4096
    seed: int | None = None
    quadrature: bool = False
    n_radial: int = 8
    n_angular: int = 16

    def resolved_seed(self) -> int:
        return _rng.default_seed() if self.seed is None else int(self.seed)


def star_clearance(emb: Embedding) -> np.ndarray:
    """Per vertex, distance lower bound from the vertex to its link edges.

    Uses the altitude of each incident face from the vertex, which bounds
    the distance to the opposite closed edge.
    """
    tri = emb.tri
    pts = emb.coords
    out = np.full(tri.nv, np.inf)
    f = tri.faces
    areas2 = np.abs(
        (pts[f[:, 1]] - pts[f[:, 0]])[:, 0] * (pts[f[:, 2]] - pts[f[:, 0]])[:, 1]
        - (pts[f[:, 1]] - pts[f[:, 0]])[:, 1] * (pts[f[:, 2]] - pts[f[:, 0]])[:, 0])
    for k in range(3):
        v = f[:, k]
        opp = pts[f[:, (k + 2) % 3]] - pts[f[:, (k + 1) % 3]]
        h = areas2 / np.hypot(opp[:, 0], opp[:, 1])
        np.minimum.at(out, v, h)
    return out


def safe_ball_fraction(emb: Embedding, c_obs: float | None = None) -> float:
    """Largest safe c so B(x, c r_x) stays in the closed star at interior x,
    with a 5% margin, optionally clipped by an observed separation constant."""
    interior = ~emb.tri.is_boundary_vertex
    if not interior.any():
        raise ParamOutOfRange("embedding has no interior vertices")
    r = emb.min_incident_edge()
    frac = 0.95 * float((star_clearance(emb)[interior] / r[interior]).min())
    if c_obs is not None:
        frac = min(frac, float(c_obs))
    if frac <= 0:
        raise ParamOutOfRange("no positive safe ball fraction")
    return frac


def _ball_offsets(cfg: SmoothingConfig, vertex: int) -> np.ndarray:
    """Unit-disk sample offsets for one vertex, deterministic per seed."""
    if cfg.quadrature:
        i = np.arange(cfg.n_radial) + 0.5
        j = np.arange(cfg.n_angular) + 0.5
        rad = np.sqrt(i / cfg.n_radial)
        ang = 2.0 * np.pi * j / cfg.n_angular
        rr, aa = np.meshgrid(rad, ang, indexing="ij")
        return np.stack([(rr * np.cos(aa)).ravel(),
                         (rr * np.sin(aa)).ravel()], axis=1)
    g = _rng.stream(cfg.resolved_seed(), 0xBA11, vertex)
    u = g.random(cfg.samples)
    v = g.random(cfg.samples)
    rad = np.sqrt(u)
    ang = 2.0 * np.pi * v
    return np.stack([rad * np.cos(ang), rad * np.sin(ang)], axis=1)


def smoothing_operator(emb: Embedding, cfg: SmoothingConfig) -> sp.csr_matrix:
    """Sparse row-stochastic matrix S with (S u)(x) = ball average of the
    interpolation of u around x; boundary rows copy the vertex value.

    Every sample point is located within the closed star of its vertex, so
    rows touch only the star's vertices. Raises BallEscapesDomain when the
    configured fraction does not fit inside some star.
    """
    tri = emb.tri
    c = cfg.c_ball if cfg.c_ball is not None else safe_ball_fraction(emb)
    if c <= 0:
        raise ParamOutOfRange("c_ball must be positive")
    r = emb.min_incident_edge()
    clear = star_clearance(emb)
    interior = np.flatnonzero(~tri.is_boundary_vertex)
    bad = [int(x) for x in interior if c * r[x] > clear[x] * (1 + 1e-12)]
    if bad:
        raise BallEscapesDomain(
            f"ball fraction {c:g} exceeds star clearance at vertex {bad[0]}")

    star_faces = [[] for _ in range(tri.nv)]
    for fi, face in enumerate(tri.faces):
        for v in face:
            star_faces[v].append(fi)

    rows, cols, vals = [], [], []
    for x in interior:
        x = int(x)
        offs = _ball_offsets(cfg, x) * (c * r[x])
        pts = emb.coords[x] + offs
        fids = np.asarray(star_faces[x], dtype=np.int64)
        lam = np.stack([bary_coords(emb, np.full(len(pts), fi), pts)
                        for fi in fids], axis=0)      # (nf, n, 3)
        inside = (lam >= -1e-9).all(axis=2)           # (nf, n)
        choice = inside.argmax(axis=0)
        found = inside.any(axis=0)
        if not found.all():
            raise BallEscapesDomain(
                f"sample point left the star of vertex {x}")
        lam_sel = lam[choice, np.arange(len(pts))]
        # clip tiny negatives from edge-grazing samples, keep row sums exact
        lam_sel = np.clip(lam_sel, 0.0, None)
        lam_sel /= lam_sel.sum(axis=1, keepdims=True)
        fv = tri.faces[fids[choice]]
        w = lam_sel / len(pts)
        rows.extend([x] * (3 * len(pts)))
        cols.extend(fv.ravel())
        vals.extend(w.ravel())
    for x in np.flatnonzero(tri.is_boundary_vertex):
        rows.append(int(x))
        cols.append(int(x))
        vals.append(1.0)
    S = sp.csr_matrix((vals, (rows, cols)), shape=(tri.nv, tri.nv))
    S.sum_duplicates()
    return S


def smooth(f: PLFunction, cfg: SmoothingConfig) -> np.ndarray:
    """Ball-averaged vertex function of the interpolation."""
    return smoothing_operator(f.emb, cfg) @ f.values


# --------------------------------------------------------------------------
# density of the segment point Z
# --------------------------------------------------------------------------

def density_check(emb: Embedding, edge: tuple[int, int],
                  cfg: SmoothingConfig, grid: int = 10) -> dict:
    """Empirical density bound for the uniform point on the segment X Y.

    X and Y are uniform in the balls around the edge's endpoints, Z uniform
    on the segment between them. Cell masses on a grid of side r_x/grid give
    C_emp = max mass * grid^2; the support check verifies every Z lies in
    the union of faces touching x or y.

    The default ball fraction is clipped to half the sine of the worst
    corner angle: the tube of that radius around the edge stays below the
    opposite vertex of each incident face, so the whole segment X Y remains
    inside the two closed stars, not just its endpoints.
    """
    x, y = int(edge[0]), int(edge[1])
    tri = emb.tri
    if (min(x, y), max(x, y)) not in tri.edge_set():
        raise ParamOutOfRange(f"({x}, {y}) is not an edge")
    c = cfg.c_ball
    if c is None:
        c = min(safe_ball_fraction(emb),
                0.5 * math.sin(goodness_report(emb).eta_min))
    r = emb.min_incident_edge()
    seed = cfg.resolved_seed()
    gx = _rng.stream(seed, 0xD5, x)
    gy = _rng.stream(seed, 0xD5, y)
    gz = _rng.stream(seed, 0xD5, x, y)
    n = cfg.samples

    def ball(center, rad, g):
        u, v = g.random(n), g.random(n)
        rr = rad * np.sqrt(u)
        aa = 2.0 * np.pi * v
        return center + np.stack([rr * np.cos(aa), rr * np.sin(aa)], axis=1)

    X = ball(emb.coords[x], c * r[x], gx)
    Y = ball(emb.coords[y], c * r[y], gy)
    t = gz.random(n)[:, None]
    Z = X + t * (Y - X)

    delta = r[x] / grid
    ij = np.floor(Z / delta).astype(np.int64)
    _, counts = np.unique(ij, axis=0, return_counts=True)
    c_emp = float(counts.max()) / n * grid * grid

    touching = sorted({fi for fi, face in enumerate(tri.faces)
                       if x in face or y in face})
    inside = np.zeros(n, dtype=bool)
    for fi in touching:
        lam = bary_coords(emb, np.full(n, fi), Z)
        inside |= (lam >= -1e-9).all(axis=1)
    return {
        "C_emp": c_emp,
        "support_ok": bool(inside.all()),
        "inside_fraction": float(inside.mean()),
        "samples": n,
        "c_ball": float(c),
    }


# --------------------------------------------------------------------------
# two-sided comparison
# --------------------------------------------------------------------------

def forward_bound_factor(emb: Embedding, c_obs_grad: float) -> float:
    """Instance constant with pl_energy <= factor * discrete_energy:
    C^2 times twice the worst area / first-edge-length^2 shape ratio."""
    f = emb.tri.faces
    e1 = emb.coords[f[:, 1]] - emb.coords[f[:, 0]]
    shape = emb.face_areas() / np.hypot(e1[:, 0], e1[:, 1]) ** 2
    return c_obs_grad ** 2 * 2.0 * float(shape.max())


def comparison_suite(emb: Embedding, trials: int = 100,
                     seed: int | None = None,
                     cfg: SmoothingConfig | None = None) -> dict:
    """Worst-case two-sided energy ratios over seeded Gaussian functions.

    C_fwd = max pl / discrete, C_bwd = max discrete(smoothed) / pl. Draws
    with zero discrete energy are skipped. Also reports the per-instance
    forward guarantee factor and the worst observed gradient constant.
    """
    tri = emb.tri
    seed = _rng.default_seed() if seed is None else int(seed)
    if cfg is None:
        cfg = SmoothingConfig(seed=seed, quadrature=True)
    S = smoothing_operator(emb, cfg)
    c_fwd = 0.0
    c_bwd = 0.0
    c_grad = 0.0
    wit_fwd = wit_bwd = -1
    guarantee_ok = True
    ratios_fwd = []
    ratios_bwd = []
    for t in range(trials):
        g = _rng.stream(seed, 0xC0, t)
        u = g.standard_normal(tri.nv)
        de = discrete_energy(tri, u)
        if de == 0.0:
            continue
        f = PLFunction(emb, u)
        pe = pl_energy(f)
        gb = gradient_bound_check(f)
        c_grad = max(c_grad, gb["C_obs"])
        ratios_fwd.append(pe / de)
        if pe / de > c_fwd:
            c_fwd = pe / de
            wit_fwd = t
        us = S @ u
        if pe > 0:
            b = discrete_energy(tri, us) / pe
            ratios_bwd.append(b)
            if b > c_bwd:
                c_bwd = b
                wit_bwd = t
        if pe > forward_bound_factor(emb, gb["C_obs"]) * de * (1 + 1e-9):
            guarantee_ok = False
    return {
        "C_fwd": c_fwd,
        "C_bwd": c_bwd,
        "ratios_fwd": ratios_fwd,
        "ratios_bwd": ratios_bwd,
        "C_obs_grad": c_grad,
        "witness_fwd": wit_fwd,
        "witness_bwd": wit_bwd,
        "forward_guarantee_ok": guarantee_ok,
        "trials": trials,
        "seed": seed,
        "c_ball": float(cfg.c_ball) if cfg.c_ball is not None
                  else safe_ball_fraction(emb),
    }
