"""Independent oracle computations the tests check the library against.

Deliberately different algorithms from the package: vertex elimination
instead of conjugate gradients, bisection instead of the closed-form radius
update, plain O(n^2) loops instead of chunked vectorized scans, exact line
search descent instead of a linear solver.
"""

import math

import numpy as np


def kron_capacity(n, edges, ones, zeros, weights=None):
    """Effective conductance between clamp groups by star-mesh elimination.

    Eliminating vertex v with conductances w_1..w_d replaces its star with
    the mesh w_i*w_j / sum(w). After all free vertices are gone, the energy
    of the 1/0 clamp is the total conductance running between the groups.
    """
    g = [dict() for _ in range(n)]
    for idx, (a, b) in enumerate(edges):
        w = 1.0 if weights is None else float(weights[idx])
        g[a][b] = g[a].get(b, 0.0) + w
        g[b][a] = g[b].get(a, 0.0) + w
    ones = set(ones)
    zeros = set(zeros)
    free = [v for v in range(n) if v not in ones and v not in zeros]
    free.sort(key=lambda v: len(g[v]))
    while free:
        # min-degree keeps the fill small on tube-like graphs
        free.sort(key=lambda v: len(g[v]))
        v = free.pop(0)
        nb = list(g[v].items())
        total = sum(w for _, w in nb)
        for u, _ in nb:
            del g[u][v]
        g[v] = {}
        if total <= 0:
            continue
        for i in range(len(nb)):
            ui, wi = nb[i]
            for j in range(i + 1, len(nb)):
                uj, wj = nb[j]
                w = wi * wj / total
                g[ui][uj] = g[ui].get(uj, 0.0) + w
                g[uj][ui] = g[uj].get(ui, 0.0) + w
    cap = 0.0
    for u in ones:
        for v, w in g[u].items():
            if v in zeros:
                cap += w
    return cap


def descent_capacity(n, edges, ones, zeros, iters=200000, tol=1e-14):
    """Dirichlet energy minimum by steepest descent with exact line search."""
    u = np.full(n, 0.5)
    u[list(ones)] = 1.0
    u[list(zeros)] = 0.0
    clamped = np.zeros(n, dtype=bool)
    clamped[list(ones)] = True
    clamped[list(zeros)] = True
    ea = np.array([a for a, _ in edges])
    eb = np.array([b for _, b in edges])
    for _ in range(iters):
        d = u[ea] - u[eb]
        grad = np.zeros(n)
        np.add.at(grad, ea, 2.0 * d)
        np.add.at(grad, eb, -2.0 * d)
        grad[clamped] = 0.0
        gg = float(grad @ grad)
        if gg == 0.0:
            break
        gd = grad[ea] - grad[eb]
        curv = 2.0 * float(gd @ gd)
        t = gg / curv
        u -= t * grad
        if t * math.sqrt(gg) < tol:
            break
    d = u[ea] - u[eb]
    return float(d @ d)


def wheel_hub_radius_bisect(spokes, lo=1e-6, hi=100.0):
    """Hub radius making the unit-spoke wheel close up, by bisection.

    The corner angle at the hub between consecutive unit circles is
    2*asin(1/(1+r)); the sum over all spokes must be 2*pi.
    """
    def excess(r):
        return 2 * spokes * math.asin(1.0 / (1.0 + r)) - 2.0 * math.pi

    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if excess(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _seg_dist(p1, p2, q1, q2):
    """Plain segment-to-segment distance, no vectorization."""
    def pt_seg(p, a, b):
        ab = (b[0] - a[0], b[1] - a[1])
        ln2 = ab[0] ** 2 + ab[1] ** 2
        if ln2 == 0:
            return math.hypot(p[0] - a[0], p[1] - a[1])
        t = ((p[0] - a[0]) * ab[0] + (p[1] - a[1]) * ab[1]) / ln2
        t = max(0.0, min(1.0, t))
        c = (a[0] + t * ab[0], a[1] + t * ab[1])
        return math.hypot(p[0] - c[0], p[1] - c[1])

    def orient(a, b, c):
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])

    if (orient(p1, p2, q1) * orient(p1, p2, q2) < 0
            and orient(q1, q2, p1) * orient(q1, q2, p2) < 0):
        return 0.0
    return min(pt_seg(q1, p1, p2), pt_seg(q2, p1, p2),
               pt_seg(p1, q1, q2), pt_seg(p2, q1, q2))


def brute_sausage(coords, edges):
    """min over non-adjacent edge pairs of separation / longer edge length."""
    best = math.inf
    n = len(edges)
    for i in range(n):
        a, b = edges[i]
        p1, p2 = coords[a], coords[b]
        li = math.hypot(p2[0] - p1[0], p2[1] - p1[1])
        for j in range(i + 1, n):
            c, d = edges[j]
            if a in (c, d) or b in (c, d):
                continue
            q1, q2 = coords[c], coords[d]
            lj = math.hypot(q2[0] - q1[0], q2[1] - q1[1])
            r = _seg_dist(p1, p2, q1, q2) / max(li, lj)
            if r < best:
                best = r
    return best
