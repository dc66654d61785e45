"""Euclidean circle packings of disk triangulations.

Radii come from the classical angle-sum iteration: at each interior vertex
the incident corner angles are summed and the radius is moved to the value
that would give angle sum 2*pi if all neighbors matched the uniform-neighbor
radius. Sweeps update all interior vertices simultaneously from the previous
iterate, which keeps the solver deterministic and lets numpy do the work;
a standard error-ratio extrapolation accelerates the contraction.

Centers are then laid out face by face from the root, and the quality of the
result (tangency residuals, laid-out angle sums, ring ratios) is measured
rather than corrected.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import LayoutInconsistent, NoConvergence, NotADisk, ParamOutOfRange
from .triangulation import Triangulation

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class PackingLabel:
    """Solved radii for a disk triangulation, boundary radii prescribed."""

    tri: Triangulation
    radii: np.ndarray
    tol: float
    sweeps: int
    angle_error: float          # sup-norm interior angle-sum residual

    def interior_angle_sums(self) -> np.ndarray:
        v, p, q = _corners(self.tri)
        ang = _corner_angles(self.radii, v, p, q)
        return np.bincount(v, weights=ang, minlength=self.tri.nv)


@dataclass(frozen=True)
class PackedLayout:
    """Packing label plus center coordinates."""

    label: PackingLabel
    centers: np.ndarray
    closure_error: float        # max interior |laid-out angle sum - 2*pi|

    @property
    def tri(self) -> Triangulation:
        return self.label.tri

    @property
    def radii(self) -> np.ndarray:
        return self.label.radii


def _corners(tri: Triangulation) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    f = tri.faces
    v = np.concatenate([f[:, 0], f[:, 1], f[:, 2]])
    p = np.concatenate([f[:, 1], f[:, 2], f[:, 0]])
    q = np.concatenate([f[:, 2], f[:, 0], f[:, 1]])
    return v, p, q


def _corner_angles(r: np.ndarray, v, p, q) -> np.ndarray:
    rv, rp, rq = r[v], r[p], r[q]
    s = rp * rq / ((rv + rp) * (rv + rq))
    return 2.0 * np.arcsin(np.sqrt(s))


def solve_radii(tri: Triangulation,
                boundary_radii=None,
                tol: float = 1e-10,
                max_sweeps: int = 10 ** 6) -> PackingLabel:
    """Find interior radii with angle sums 2*pi at every interior vertex.

    boundary_radii may be None (all 1), a scalar, a full array, or a dict
    over boundary vertex indices. Raises NotADisk for non-disk input and
    NoConvergence when the sweep cap is hit.
    """
    if len(tri.boundary_cycles) != 1:
        raise NotADisk(
            f"packing needs a single boundary cycle, got "
            f"{len(tri.boundary_cycles)}")
    r = np.ones(tri.nv)
    bnd = tri.is_boundary_vertex
    if boundary_radii is None:
        pass
    elif np.isscalar(boundary_radii):
        r[bnd] = float(boundary_radii)
    elif isinstance(boundary_radii, dict):
        for v, rad in boundary_radii.items():
            if not bnd[v]:
                raise ParamOutOfRange(f"vertex {v} is not on the boundary")
            r[v] = float(rad)
    else:
        vals = np.asarray(boundary_radii, dtype=float)
        if vals.shape != (tri.nv,):
            raise ParamOutOfRange("boundary radii array must cover all vertices")
        r[bnd] = vals[bnd]
    if (r <= 0).any():
        raise ParamOutOfRange("radii must be positive")

    interior = np.flatnonzero(~bnd)
    v, p, q = _corners(tri)
    if len(interior) == 0:
        return PackingLabel(tri, r, tol, 0, 0.0)

    k = np.bincount(v, minlength=tri.nv)[interior].astype(float)
    delta = np.sin(np.pi / k)
    target = delta / (1.0 - delta)

    err_prev = np.inf
    lam_prev = -1.0
    accelerated = True          # suppress extrapolation on the first pass
    sweeps = 0
    while True:
        ang = _corner_angles(r, v, p, q)
        theta = np.bincount(v, weights=ang, minlength=tri.nv)[interior]
        resid = theta - TWO_PI
        err = float(np.abs(resid).max())
        if err <= tol:
            return PackingLabel(tri, r, tol, sweeps, err)
        sweeps += 1
        if sweeps > max_sweeps:
            raise NoConvergence(
                f"angle residual {err:.3e} after {max_sweeps} sweeps")

        beta = np.sin(theta / (2.0 * k))
        rhat = r[interior] * beta / (1.0 - beta)
        rnew = rhat / target
        err_l2 = float(np.linalg.norm(resid))
        lam = err_l2 / err_prev if err_prev > 0 else 0.0
        dr = rnew - r[interior]
        r_int = rnew
        if (not accelerated and 0 < lam < 1
                and abs(lam - lam_prev) < 0.2 * lam):
            factor = lam / (1.0 - lam)
            neg = dr < 0
            if neg.any():
                # keep radii positive under extrapolation
                cap = 0.5 * np.min(-rnew[neg] / dr[neg])
                factor = min(factor, float(cap))
            r_int = rnew + factor * dr
            accelerated = True
        else:
            accelerated = False
        r[interior] = r_int
        err_prev = err_l2
        lam_prev = lam


def layout_centers(tri: Triangulation, label: PackingLabel,
                   closure_factor: float = 100.0) -> PackedLayout:
    """Place centers by breadth-first face traversal from the root.

    Root (vertex 0) goes to the origin and its lowest-index neighbor on the
    positive x axis; each face then determines its third center by rotating
    at the tangency angle. Closure error is the worst interior angle-sum
    residual recomputed from the laid-out centers; it is measured, never
    repaired, and must stay below closure_factor * tol.
    """
    r = label.radii
    third: dict[tuple[int, int], int] = {}
    for a, b, c in tri.faces:
        third[(a, b)] = c
        third[(b, c)] = a
        third[(c, a)] = b

    pos = np.full((tri.nv, 2), np.nan)
    root = 0
    u0 = int(tri.neighbors(root).min())
    pos[root] = (0.0, 0.0)
    pos[u0] = (r[root] + r[u0], 0.0)
    placed = np.zeros(tri.nv, dtype=bool)
    placed[[root, u0]] = True

    done: set[tuple[int, int, int]] = set()
    queue: deque[tuple[int, int]] = deque([(root, u0), (u0, root)])
    while queue:
        u, v = queue.popleft()
        w = third.get((u, v))
        if w is None:
            continue
        key = tuple(sorted((u, v, w)))
        if key in done:
            continue
        done.add(key)
        d = pos[v] - pos[u]
        d /= np.hypot(*d)
        ru, rv, rw = r[u], r[v], r[w]
        s = rv * rw / ((ru + rv) * (ru + rw))
        alpha = 2.0 * math.asin(math.sqrt(s))
        ca, sa = math.cos(alpha), math.sin(alpha)
        rot = np.array([ca * d[0] - sa * d[1], sa * d[0] + ca * d[1]])
        cand = pos[u] + (ru + rw) * rot
        if not placed[w]:
            pos[w] = cand
            placed[w] = True
        queue.extend([(v, u), (w, v), (u, w)])

    if not placed.all():
        raise LayoutInconsistent(
            f"{int((~placed).sum())} vertices never reached by face traversal")

    closure = float(np.abs(
        _laid_out_angle_sums(tri, pos)[~tri.is_boundary_vertex] - TWO_PI
    ).max()) if (~tri.is_boundary_vertex).any() else 0.0
    if closure > closure_factor * label.tol:
        raise LayoutInconsistent(
            f"closure error {closure:.3e} exceeds "
            f"{closure_factor:g} * tol = {closure_factor * label.tol:.3e}")
    return PackedLayout(label, pos, closure)


def _laid_out_angle_sums(tri: Triangulation, pos: np.ndarray) -> np.ndarray:
    v, p, q = _corners(tri)
    a = pos[p] - pos[v]
    b = pos[q] - pos[v]
    dot = (a * b).sum(axis=1)
    cross = a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0]
    ang = np.arctan2(np.abs(cross), dot)
    return np.bincount(v, weights=ang, minlength=tri.nv)


def pack(tri: Triangulation, boundary_radii=None, tol: float = 1e-10,
         max_sweeps: int = 10 ** 6) -> PackedLayout:
    """solve_radii followed by layout_centers."""
    return layout_centers(tri, solve_radii(tri, boundary_radii, tol,
                                           max_sweeps))


def verify_layout(layout: PackedLayout) -> dict:
    """Quality report: tangency residuals, angle sums, pair separation.

    All quantities are relative, computed from the laid-out centers. The
    separation check covers vertex pairs at graph distance two.
    """
    tri = layout.tri
    r = layout.radii
    pos = layout.centers
    e = tri.edges
    d = np.hypot(*(pos[e[:, 0]] - pos[e[:, 1]]).T)
    rsum = r[e[:, 0]] + r[e[:, 1]]
    tangency = float(np.abs(d - rsum).max())
    rel_tangency = float(np.abs((d - rsum) / rsum).max())

    interior = ~tri.is_boundary_vertex
    sums = _laid_out_angle_sums(tri, pos)
    angle_res = float(np.abs(sums[interior] - TWO_PI).max()) \
        if interior.any() else 0.0

    worst_sep = np.inf
    for u in range(tri.nv):
        hops2 = set()
        for n1 in tri.neighbors(u):
            hops2.update(int(x) for x in tri.neighbors(int(n1)))
        hops2.discard(u)
        hops2.difference_update(int(x) for x in tri.neighbors(u))
        for w in hops2:
            if w < u:
                continue
            gap = np.hypot(*(pos[u] - pos[w])) - (r[u] + r[w])
            worst_sep = min(worst_sep, float(gap / (r[u] + r[w])))
    return {
        "max_tangency_rel": rel_tangency,
        "max_tangency_abs": tangency,
        "max_angle_residual": angle_res,
        "min_two_hop_separation_rel": worst_sep,
        "closure_error": layout.closure_error,
    }


def ring_report(label: PackingLabel) -> dict:
    """Max adjacent radius ratio overall and bucketed by endpoint degree."""
    tri = label.tri
    r = label.radii
    e = tri.edges
    ratio = np.maximum(r[e[:, 0]] / r[e[:, 1]], r[e[:, 1]] / r[e[:, 0]])
    bucket = np.maximum(tri.degrees[e[:, 0]], tri.degrees[e[:, 1]])
    by_degree = {}
    for d in np.unique(bucket):
        by_degree[int(d)] = float(ratio[bucket == d].max())
    return {"max_ratio": float(ratio.max()), "by_degree": by_degree}


# --------------------------------------------------------------------------
# .pack files
# --------------------------------------------------------------------------

def write_pack(layout: PackedLayout, path: str | Path) -> None:
    lines = [str(layout.tri.nv)]
    for (x, y), rad in zip(layout.centers, layout.radii):
        lines.append(f"{x:.17g} {y:.17g} {rad:.17g}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_pack(path: str | Path) -> tuple[np.ndarray, np.ndarray]:
    """Returns (centers, radii)."""
    rows = Path(path).read_text(encoding="utf-8").split("\n")
    rows = [ln for ln in rows if ln.strip()]
    nv = int(rows[0])
    if len(rows) != nv + 1:
        raise ValueError(f"{path}: expected {nv} rows, got {len(rows) - 1}")
    data = np.array([[float(t) for t in ln.split()] for ln in rows[1:]])
    if data.shape != (nv, 3):
        raise ValueError(f"{path}: malformed rows")
    return data[:, :2].copy(), data[:, 2].copy()
