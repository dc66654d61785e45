"""Oriented planar triangulations, generator families, and exhaustions.

A Triangulation is a genus-zero simplicial surface given by counterclockwise
vertex triples. Vertices are dense integers 0..nv-1. All structure (edges,
degrees, boundary cycles) is derived from the face list at construction and
validated: simple, connected, manifold, consistently oriented, genus zero.

The four generator families (lattice_ball, hyperbolic_ball, tube,
tree_of_tubes) index vertices so that the k-th exhaustion member occupies the
index prefix 0..n_k-1, which keeps members nested with stable indices.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    Disconnected,
    IndexOutOfRange,
    NonManifold,
    NonSimple,
    OrientationInconsistent,
    ParamOutOfRange,
)

FAMILIES = ("lattice_ball", "hyperbolic_ball", "tube", "tree_of_tubes")


@dataclass(frozen=True)
class SourceSet:
    """Vertex set that gets clamped to potential 1 in capacity runs."""

    vertices: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(sorted(set(self.vertices))))
        if not self.vertices or self.vertices[0] < 0:
            raise ParamOutOfRange("source set must be nonempty, indices >= 0")


class Triangulation:
    """Validated oriented triangulation. Construct via build_from_faces."""

    def __init__(self, faces: np.ndarray, _token=None):
        if _token is not _BUILD_TOKEN:
            raise TypeError("use build_from_faces()")
        self.faces = faces                      # (F,3) int32, CCW, canonical
        self.nv = int(faces.max()) + 1
        self._derive()

    # derived structure -----------------------------------------------------

    def _derive(self):
        f = self.faces
        ea = np.concatenate([f[:, [0, 1]], f[:, [1, 2]], f[:, [2, 0]]])
        und = np.sort(ea, axis=1)
        self.edges, inv, counts = np.unique(
            und, axis=0, return_inverse=True, return_counts=True
        )
        self.edge_face_count = counts
        self.boundary_edge_mask = counts == 1
        self.is_boundary_vertex = np.zeros(self.nv, dtype=bool)
        self.is_boundary_vertex[self.edges[self.boundary_edge_mask].ravel()] = True
        self.degrees = np.bincount(self.edges.ravel(), minlength=self.nv)
        # adjacency in CSR-ish shape, neighbors sorted
        two = np.concatenate([self.edges, self.edges[:, ::-1]])
        order = np.lexsort((two[:, 1], two[:, 0]))
        two = two[order]
        self.nbr_indptr = np.searchsorted(two[:, 0], np.arange(self.nv + 1))
        self.nbr_data = two[:, 1].copy()
        self.boundary_cycles = self._walk_boundary()

    def neighbors(self, v: int) -> np.ndarray:
        return self.nbr_data[self.nbr_indptr[v]:self.nbr_indptr[v + 1]]

    def _walk_boundary(self) -> list[list[int]]:
        # boundary is traversed opposite to the unique incident face
        nxt = {}
        face_dir = set()
        for a, b, c in self.faces:
            face_dir.update({(a, b), (b, c), (c, a)})
        for (a, b), cnt in zip(self.edges, self.edge_face_count):
            if cnt != 1:
                continue
            if (a, b) in face_dir:
                nxt[b] = a
            else:
                nxt[a] = b
        cycles = []
        seen = set()
        for start in sorted(nxt):
            if start in seen:
                continue
            cyc = [start]
            seen.add(start)
            v = nxt[start]
            while v != start:
                cyc.append(v)
                seen.add(v)
                v = nxt[v]
            cycles.append(cyc)
        return cycles

    # convenience ------------------------------------------------------------

    @property
    def num_faces(self) -> int:
        return len(self.faces)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @property
    def interior_vertices(self) -> np.ndarray:
        return np.flatnonzero(~self.is_boundary_vertex)

    @property
    def max_degree(self) -> int:
        return int(self.degrees.max())

    def euler_characteristic(self) -> int:
        return self.nv - self.num_edges + self.num_faces

    def edge_set(self) -> set[tuple[int, int]]:
        return {(int(a), int(b)) for a, b in self.edges}

    def __repr__(self):
        return (f"Triangulation(nv={self.nv}, ne={self.num_edges}, "
                f"nf={self.num_faces}, b={len(self.boundary_cycles)})")


_BUILD_TOKEN = object()


def build_from_faces(faces: Iterable[Sequence[int]],
                     max_degree: int | None = None) -> Triangulation:
    """Validate a face list and build a Triangulation.

    Raises NonSimple, NonManifold, OrientationInconsistent or Disconnected
    when the complex is not a connected oriented genus-zero triangulated
    surface, and ValueError for malformed input.
    """
    fl = [tuple(int(v) for v in f) for f in faces]
    if not fl:
        raise ValueError("need at least one face")
    for f in fl:
        if len(f) != 3:
            raise ValueError(f"face {f} is not a triangle")
        if min(f) < 0:
            raise ValueError(f"negative vertex index in {f}")
        if len(set(f)) != 3:
            raise NonSimple(f"face {f} repeats a vertex")

    canon = [_rotate_min(f) for f in fl]
    if len({tuple(sorted(f)) for f in canon}) != len(canon):
        raise NonManifold("duplicate face")
    canon.sort()
    arr = np.asarray(canon, dtype=np.int32)
    nv = int(arr.max()) + 1

    directed = set()
    und_count: dict[tuple[int, int], int] = {}
    for a, b, c in canon:
        for u, v in ((a, b), (b, c), (c, a)):
            if (u, v) in directed:
                raise OrientationInconsistent(
                    f"edge {u}->{v} traversed twice in the same direction")
            directed.add((u, v))
            key = (u, v) if u < v else (v, u)
            und_count[key] = und_count.get(key, 0) + 1
            if und_count[key] > 2:
                raise NonManifold(f"edge {key} borders >2 faces")

    link: dict[int, list[tuple[int, int]]] = {}
    for a, b, c in canon:
        link.setdefault(a, []).append((b, c))
        link.setdefault(b, []).append((c, a))
        link.setdefault(c, []).append((a, b))
    for v in range(nv):
        if v not in link:
            raise Disconnected(f"vertex {v} has no incident face")
        _check_link(v, link[v])

    # connectivity over vertices
    t = Triangulation(arr, _token=_BUILD_TOKEN)
    seen = np.zeros(nv, dtype=bool)
    stack = [0]
    seen[0] = True
    while stack:
        u = stack.pop()
        for w in t.neighbors(u):
            if not seen[w]:
                seen[w] = True
                stack.append(int(w))
    if not seen.all():
        raise Disconnected(f"{int((~seen).sum())} vertices unreachable from 0")

    b = len(t.boundary_cycles)
    if t.euler_characteristic() != 2 - b:
        raise NonManifold(
            f"not genus zero: V-E+F={t.euler_characteristic()} with {b} "
            f"boundary cycles")
    if max_degree is not None and t.max_degree > max_degree:
        raise ParamOutOfRange(
            f"degree {t.max_degree} exceeds bound {max_degree}")
    return t


def _rotate_min(f: tuple[int, int, int]) -> tuple[int, int, int]:
    i = f.index(min(f))
    return f[i:] + f[:i]


def _check_link(v: int, arcs: list[tuple[int, int]]):
    out = {}
    indeg: dict[int, int] = {}
    nodes = set()
    for a, b in arcs:
        if a in out:
            raise NonManifold(f"vertex {v}: link branches at {a}")
        out[a] = b
        indeg[b] = indeg.get(b, 0) + 1
        if indeg[b] > 1:
            raise NonManifold(f"vertex {v}: link merges at {b}")
        nodes.update((a, b))
    starts = [a for a in out if indeg.get(a, 0) == 0]
    if len(starts) > 1:
        raise NonManifold(f"vertex {v}: link has {len(starts)} fan pieces")
    start = starts[0] if starts else next(iter(out))
    cur = start
    walked = {start}
    while cur in out:
        cur = out[cur]
        if cur == start:
            break
        walked.add(cur)
    if len(walked) < len(nodes):
        raise NonManifold(f"vertex {v}: link is not a single fan")


# --------------------------------------------------------------------------
# exhaustions
# --------------------------------------------------------------------------

@dataclass
class ExhaustionSequence:
    """Nested members T_1 .. T_n sharing the index prefix property."""

    family: str
    params: dict
    members: list[Triangulation]
    source: SourceSet
    root: int = 0

    def __len__(self):
        return len(self.members)

    def member(self, k: int) -> Triangulation:
        if not 1 <= k <= len(self.members):
            raise IndexOutOfRange(f"member {k} not in 1..{len(self.members)}")
        return self.members[k - 1]

    @property
    def largest(self) -> Triangulation:
        return self.members[-1]


def complement_components(seq: ExhaustionSequence, k: int) -> int:
    """Components of T_{k+1} minus T_k that touch the boundary of T_{k+1}."""
    if not 1 <= k < len(seq.members):
        raise IndexOutOfRange(f"need 1 <= k < {len(seq.members)}")
    small = seq.member(k)
    big = seq.member(k + 1)
    fresh = np.arange(small.nv, big.nv)
    if len(fresh) == 0:
        return 0
    comp = {int(v): -1 for v in fresh}
    n_comp = 0
    touches = []
    for s in fresh:
        s = int(s)
        if comp[s] >= 0:
            continue
        label = n_comp
        n_comp += 1
        touch = False
        stack = [s]
        comp[s] = label
        while stack:
            u = stack.pop()
            if big.is_boundary_vertex[u]:
                touch = True
            for w in big.neighbors(u):
                w = int(w)
                if w >= small.nv and comp[w] < 0:
                    comp[w] = label
                    stack.append(w)
        touches.append(touch)
    return sum(touches)


# --------------------------------------------------------------------------
# families
# --------------------------------------------------------------------------

def generate(family: str, **params) -> ExhaustionSequence:
    """Build a family exhaustion. See FAMILIES for names."""
    try:
        builder = _BUILDERS[family]
    except KeyError:
        raise ParamOutOfRange(
            f"unknown family {family!r}, expected one of {FAMILIES}") from None
    return builder(**params)


def _hexdist(i: int, j: int) -> int:
    return (abs(i) + abs(j) + abs(i + j)) // 2


def lattice_ball(R: int) -> ExhaustionSequence:
    """Combinatorial balls of the triangular lattice around the origin."""
    R = int(R)
    if R < 1:
        raise ParamOutOfRange("lattice_ball needs R >= 1")
    pts = []
    for i in range(-R, R + 1):
        for j in range(-R, R + 1):
            d = _hexdist(i, j)
            if d <= R:
                pts.append((d, i, j))
    pts.sort()
    index = {(i, j): n for n, (_, i, j) in enumerate(pts)}
    dist = {(i, j): d for d, i, j in pts}
    sizes = np.cumsum(np.bincount([d for d, _, _ in pts], minlength=R + 1))

    faces = []
    for i in range(-R - 1, R + 1):
        for j in range(-R - 1, R + 1):
            # up and down unit triangles of the cell anchored at (i,j);
            # the down anchor is no vertex of its triangle, so the scan
            # box is one step wider than the ball
            up = [(i, j), (i + 1, j), (i, j + 1)]
            dn = [(i + 1, j), (i + 1, j + 1), (i, j + 1)]
            for tri in (up, dn):
                if all(p in index for p in tri):
                    faces.append(tuple(index[p] for p in tri))
    faces = sorted(faces)

    members = _prefix_members(faces, sizes[1:])
    return ExhaustionSequence("lattice_ball", {"R": R}, members,
                              SourceSet((0,)))


def hyperbolic_ball(deg: int, R: int) -> ExhaustionSequence:
    """Balls of the degree-7 hyperbolic triangulation."""
    if int(deg) != 7:
        raise ParamOutOfRange("only deg=7 is supported")
    R = int(R)
    if R < 1:
        raise ParamOutOfRange("hyperbolic_ball needs R >= 1")

    faces: list[tuple[int, int, int]] = []
    ring = list(range(1, 8))
    d_down = [1] * 7
    nxt = 8
    for t in range(7):
        faces.append((0, ring[t], ring[(t + 1) % 7]))
    sizes = [8]
    for _ in range(1, R):
        n = len(ring)
        child_of: list[list[int]] = [[] for _ in range(n)]
        new_ring: list[int] = []
        new_down: list[int] = []
        # exclusive children then the child shared with the next vertex
        shared_next = [0] * n
        for t in range(n):
            c_t = 7 - 2 - d_down[t]
            n_excl = c_t - 2
            for _ in range(n_excl):
                child_of[t].append(nxt)
                new_ring.append(nxt)
                new_down.append(1)
                nxt += 1
            shared_next[t] = nxt
            new_ring.append(nxt)
            new_down.append(2)
            nxt += 1
        full_children = []
        for t in range(n):
            full_children.append(
                [shared_next[(t - 1) % n]] + child_of[t] + [shared_next[t]])
        for t in range(n):
            ws = full_children[t]
            for m in range(len(ws) - 1):
                faces.append((ring[t], ws[m], ws[m + 1]))
            faces.append((ring[(t + 1) % n], ring[t], shared_next[t]))
        ring = new_ring
        d_down = new_down
        sizes.append(nxt)

    members = _prefix_members(faces, sizes)
    return ExhaustionSequence("hyperbolic_ball", {"deg": 7, "R": R}, members,
                              SourceSet((0,)))


def _ring_cells(a: Sequence[int], b: Sequence[int]) -> list[tuple[int, int, int]]:
    """Triangulated cylinder layer between two aligned rings."""
    c = len(a)
    out = []
    for j in range(c):
        jn = (j + 1) % c
        out.append((a[j], a[jn], b[jn]))
        out.append((a[j], b[jn], b[j]))
    return out


def tube(circumf: int, length: int) -> ExhaustionSequence:
    """Triangulated cylinder, exhausted by axial slabs around the middle."""
    c, L = int(circumf), int(length)
    if c < 3 or L < 2:
        raise ParamOutOfRange("tube needs circumf >= 3, length >= 2")
    m = L // 2
    order = sorted(((abs(i - m), i, j) for i in range(L + 1)
                    for j in range(c)))
    index = {(i, j): n for n, (_, i, j) in enumerate(order)}
    k_max = max(m, L - m)
    sizes = []
    for k in range(1, k_max + 1):
        sizes.append(sum(1 for (d, _, _) in order if d <= k))

    faces = []
    for i in range(L):
        ra = [index[(i, j)] for j in range(c)]
        rb = [index[(i + 1, j)] for j in range(c)]
        faces.extend(_ring_cells(ra, rb))

    members = _prefix_members(faces, sizes)
    mid = SourceSet(tuple(index[(m, j)] for j in range(c)))
    return ExhaustionSequence("tube", {"circumf": c, "length": L}, members,
                              mid, root=index[(m, 0)])


def tree_of_tubes(circumf: int, segment_len: int, depth: int) -> ExhaustionSequence:
    """Binary tree of tubes glued at fixed junction templates.

    The trunk is capped by a cone whose apex is the root. Junction: the
    incoming ring A (c vertices) meets a ring D of 2c-2 vertices through a
    two-pointer annulus; a neck chord d_0--d_{c-1} splits D into two
    c-cycles seeding the child tubes. Max degree stays <= 12.
    """
    c, Ls, depth = int(circumf), int(segment_len), int(depth)
    if c < 3 or Ls < 1 or depth < 1:
        raise ParamOutOfRange(
            "tree_of_tubes needs circumf >= 3, segment_len >= 1, depth >= 1")

    faces: list[tuple[int, int, int]] = []
    nxt = 0
    apex = nxt
    nxt += 1
    rings = []
    for _ in range(Ls + 1):
        rings.append(list(range(nxt, nxt + c)))
        nxt += c
    for j in range(c):
        faces.append((apex, rings[0][(j + 1) % c], rings[0][j]))
    for i in range(Ls):
        faces.extend(_ring_cells(rings[i], rings[i + 1]))

    pending = [rings[-1]]
    sizes = []
    for _ in range(depth):
        grown = []
        for a_ring in pending:
            d_ring = list(range(nxt, nxt + 2 * c - 2))
            nxt += 2 * c - 2
            faces.extend(_annulus(a_ring, d_ring))
            # neck chord d_0--d_{c-1}: one child per side of the chord
            b0 = d_ring[0:c]
            c0 = d_ring[c - 1:] + [d_ring[0]]
            for base in (b0, c0):
                ring = base
                for _ in range(Ls):
                    new = list(range(nxt, nxt + c))
                    nxt += c
                    faces.extend(_ring_cells(ring, new))
                    ring = new
                grown.append(ring)
        pending = grown
        sizes.append(nxt)

    members = _prefix_members(faces, sizes)
    return ExhaustionSequence(
        "tree_of_tubes",
        {"circumf": c, "segment_len": Ls, "depth": depth},
        members, SourceSet((apex,)), root=apex)


def _annulus(inner: Sequence[int], outer: Sequence[int]) -> list[tuple[int, int, int]]:
    """Two-pointer triangulation between rings of different length.

    Inner ring traversed forward, outer backward, matching _ring_cells
    conventions on both sides.
    """
    p, q = len(inner), len(outer)
    out = []
    i = j = 0
    while i < p or j < q:
        adv_inner = j >= q or (i < p and (i + 1) * q <= (j + 1) * p)
        if adv_inner:
            out.append((inner[i % p], inner[(i + 1) % p], outer[j % q]))
            i += 1
        else:
            out.append((inner[i % p], outer[(j + 1) % q], outer[j % q]))
            j += 1
    return out


def _prefix_members(faces: list[tuple[int, int, int]],
                    sizes: Sequence[int]) -> list[Triangulation]:
    arr = np.asarray(faces, dtype=np.int64)
    mx = arr.max(axis=1)
    members = []
    for n_k in sizes:
        sub = arr[mx < n_k]
        members.append(build_from_faces(sub.tolist(), max_degree=12))
    return members


_BUILDERS = {
    "lattice_ball": lattice_ball,
    "hyperbolic_ball": hyperbolic_ball,
    "tube": tube,
    "tree_of_tubes": tree_of_tubes,
}


def wheel(n: int) -> Triangulation:
    """Fan of n triangles around a hub, hub index 0."""
    if n < 3:
        raise ParamOutOfRange("wheel needs n >= 3")
    # hub degree equals n; every complex in this package keeps degree <= 12
    return build_from_faces(
        [(0, 1 + t, 1 + (t + 1) % n) for t in range(n)], max_degree=12)


# --------------------------------------------------------------------------
# face augmentation
# --------------------------------------------------------------------------

def face_augment(tri: Triangulation,
                 coords: np.ndarray | None = None
                 ) -> tuple[Triangulation, np.ndarray | None]:
    """Add one vertex per face at its barycenter, splitting it in three.

    Returns the refined triangulation and, when coords are supplied, the
    extended coordinate array (new vertices appended in face order).
    """
    f = tri.faces
    fresh = np.arange(tri.nv, tri.nv + len(f))
    new_faces = np.concatenate([
        np.stack([f[:, 0], f[:, 1], fresh], axis=1),
        np.stack([f[:, 1], f[:, 2], fresh], axis=1),
        np.stack([f[:, 2], f[:, 0], fresh], axis=1),
    ])
    out = build_from_faces(new_faces.tolist())
    if coords is None:
        return out, None
    coords = np.asarray(coords, dtype=float)
    cent = coords[f].mean(axis=1)
    return out, np.concatenate([coords, cent])


# --------------------------------------------------------------------------
# .tri files
# --------------------------------------------------------------------------

def write_tri(tri: Triangulation, path: str | Path) -> None:
    lines = [f"{tri.nv} {tri.num_faces}"]
    lines.extend(f"{a} {b} {c}" for a, b, c in tri.faces)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_tri(path: str | Path) -> Triangulation:
    text = Path(path).read_text(encoding="utf-8")
    rows = text.split()
    if len(rows) < 2:
        raise ValueError(f"{path}: truncated header")
    nv, nf = int(rows[0]), int(rows[1])
    vals = rows[2:]
    if len(vals) != 3 * nf:
        raise ValueError(f"{path}: expected {3 * nf} indices, got {len(vals)}")
    faces = [tuple(int(x) for x in vals[3 * i:3 * i + 3]) for i in range(nf)]
    t = build_from_faces(faces)
    if t.nv != nv:
        raise ValueError(f"{path}: header says {nv} vertices, faces span {t.nv}")
    return t
