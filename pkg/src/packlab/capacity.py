"""Dirichlet energies, harmonic solves, and capacity along exhaustions.

Discrete capacity of a source set K inside a member T_k is the energy of the
harmonic function clamped to 1 on K and 0 on the member boundary. The
piecewise-linear variant uses the same solve with cotangent stiffness
weights computed from an embedding, which makes its energy equal to the
integral of |grad u|^2 over the embedded domain.

The recurrence classifier fits the resistance 1/cap_k against affine models
in log k and in k (offsets allowed: a finite neck contributes a constant
series resistance that plain c/log k or c/k shapes cannot absorb) and calls
the trace recurrent-consistent only when a growing-resistance model clearly
beats the constant fit and the capacity has actually dropped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .embedding import Embedding
from .errors import (
    NoConvergence,
    ParamOutOfRange,
    SingularSystem,
    TooShort,
)
from .triangulation import ExhaustionSequence, SourceSet, Triangulation


def discrete_energy(tri: Triangulation, u: np.ndarray,
                    weights: np.ndarray | None = None) -> float:
    """Sum over edges of w * (u(x) - u(y))^2, unit weights by default."""
    u = np.asarray(u, dtype=float)
    e = tri.edges
    d = u[e[:, 0]] - u[e[:, 1]]
    if weights is None:
        return float(np.dot(d, d))
    return float(np.dot(weights, d * d))


def cotan_weights(emb: Embedding) -> np.ndarray:
    """Piecewise-linear stiffness weight per edge: half cotangent of each
    opposite angle, summed over the one or two incident faces. Can be
    negative for obtuse opposite angles."""
    tri = emb.tri
    pts = emb.coords
    nv = tri.nv
    enc = tri.edges[:, 0].astype(np.int64) * nv + tri.edges[:, 1]
    w = np.zeros(len(enc))
    f = tri.faces
    for k in range(3):
        a = f[:, k]
        b = f[:, (k + 1) % 3]
        c = f[:, (k + 2) % 3]
        # angle at c, opposite edge (a, b)
        va = pts[a] - pts[c]
        vb = pts[b] - pts[c]
        dot = (va * vb).sum(axis=1)
        cross = va[:, 0] * vb[:, 1] - va[:, 1] * vb[:, 0]
        cot = dot / np.abs(cross)
        lo = np.minimum(a, b).astype(np.int64)
        hi = np.maximum(a, b).astype(np.int64)
        idx = np.searchsorted(enc, lo * nv + hi)
        np.add.at(w, idx, 0.5 * cot)
    return w


def harmonic_solve_network(n: int,
                           edges: np.ndarray,
                           weights: np.ndarray | None,
                           ones: set[int] | frozenset,
                           zeros: set[int] | frozenset,
                           rtol: float = 1e-12) -> np.ndarray:
    """Solve the clamped weighted Laplace problem on an explicit edge list.

    Returns the vertex vector with value 1 on `ones`, 0 on `zeros`, and
    weighted-harmonic elsewhere. This is the shared core for triangulation
    solves and plain network (chain) problems.
    """
    edges = np.asarray(edges, dtype=np.int64)
    if weights is None:
        weights = np.ones(len(edges))
    ones = set(int(v) for v in ones)
    zeros = set(int(v) for v in zeros)
    if ones & zeros:
        raise ParamOutOfRange("clamp sets overlap")
    if not ones or not zeros:
        raise SingularSystem("need non-empty source and boundary")

    clamped = np.zeros(n, dtype=bool)
    val = np.zeros(n)
    for v in ones:
        clamped[v] = True
        val[v] = 1.0
    for v in zeros:
        clamped[v] = True
    free = np.flatnonzero(~clamped)
    if len(free) == 0:
        return val

    pos = -np.ones(n, dtype=np.int64)
    pos[free] = np.arange(len(free))
    a, b = edges[:, 0], edges[:, 1]
    w = np.asarray(weights, dtype=float)

    diag = np.zeros(n)
    np.add.at(diag, a, w)
    np.add.at(diag, b, w)

    ff = (~clamped[a]) & (~clamped[b])
    rows = np.concatenate([pos[a[ff]], pos[b[ff]], np.arange(len(free))])
    cols = np.concatenate([pos[b[ff]], pos[a[ff]], np.arange(len(free))])
    vals = np.concatenate([-w[ff], -w[ff], diag[free]])
    A = sp.csr_matrix((vals, (rows, cols)), shape=(len(free), len(free)))

    rhs = np.zeros(len(free))
    fc = (~clamped[a]) & clamped[b]
    np.add.at(rhs, pos[a[fc]], w[fc] * val[b[fc]])
    cf = clamped[a] & (~clamped[b])
    np.add.at(rhs, pos[b[cf]], w[cf] * val[a[cf]])

    d = A.diagonal()
    if (d == 0).any():
        raise SingularSystem("isolated free vertex in the clamped system")
    M = sp.diags(1.0 / d)
    x, info = spla.cg(A, rhs, rtol=rtol, atol=0.0,
                      maxiter=20 * len(free) + 200, M=M)
    if info != 0:
        raise NoConvergence(f"conjugate gradient returned info={info}")
    res = A @ x - rhs
    if np.abs(res).max() > 1e-10 * max(1.0, float(np.abs(rhs).max())):
        raise NoConvergence(
            f"harmonicity residual {np.abs(res).max():.3e} over tolerance")
    val[free] = x
    return val


def harmonic_solve(tri: Triangulation, K: SourceSet,
                   weights: np.ndarray | None = None) -> np.ndarray:
    """Harmonic vertex function with u=1 on K, u=0 on the boundary."""
    bnd = np.flatnonzero(tri.is_boundary_vertex)
    for v in K.vertices:
        if v >= tri.nv or tri.is_boundary_vertex[v]:
            raise ParamOutOfRange(f"source vertex {v} not interior")
    return harmonic_solve_network(tri.nv, tri.edges, weights,
                                  set(K.vertices), set(int(x) for x in bnd))


def capacity_of(tri: Triangulation, K: SourceSet,
                weights: np.ndarray | None = None) -> float:
    u = harmonic_solve(tri, K, weights)
    return discrete_energy(tri, u, weights)


@dataclass(frozen=True)
class CapacityTrace:
    ks: tuple[int, ...]
    caps: tuple[float, ...]
    method: str                      # "discrete" | "pl-continuous"
    source: SourceSet | None
    flags: tuple[str, ...] = ()

    def __post_init__(self):
        if len(self.ks) != len(self.caps):
            raise ParamOutOfRange("ks and caps length mismatch")

    def write_csv(self, path: str | Path) -> None:
        flags = self.flags or ("",) * len(self.ks)
        lines = ["k,cap,method,flags"]
        for k, c, fl in zip(self.ks, self.caps, flags):
            lines.append(f"{k},{c:.17g},{self.method},{fl}")
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_trace_csv(path: str | Path) -> CapacityTrace:
    lines = Path(path).read_text(encoding="utf-8").strip().split("\n")
    if not lines or lines[0] != "k,cap,method,flags":
        raise ParamOutOfRange(f"{path}: not a capacity trace file")
    ks, caps, flags = [], [], []
    method = "discrete"
    for ln in lines[1:]:
        k, c, method, fl = ln.split(",")
        ks.append(int(k))
        caps.append(float(c))
        flags.append(fl)
    return CapacityTrace(tuple(ks), tuple(caps), method, None, tuple(flags))


@dataclass(frozen=True)
class Verdict:
    classification: str              # recurrent-consistent | transient-consistent | inconclusive
    best_model: str | None
    residual_factor: float | None    # const_resid / best growing resid
    drop_observed: float             # cap_last / cap_first
    flat_observed: float             # cap_last / cap_half
    thresholds: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "classification": self.classification,
            "best_model": self.best_model,
            "residual_factor": self.residual_factor,
            "drop_observed": self.drop_observed,
            "flat_observed": self.flat_observed,
            "thresholds": dict(self.thresholds),
        }


def capacity_trace(seq: ExhaustionSequence, K: SourceSet | None = None,
                   method: str = "discrete",
                   embeddings: list[Embedding] | None = None) -> CapacityTrace:
    """cap_k for every member of the exhaustion.

    method "discrete" uses unit weights; "pl-continuous" needs one embedding
    per member and uses cotangent stiffness weights (negative weights are
    recorded in the flags, the solve proceeds). Monotonicity of the trace is
    asserted up to solver slack.
    """
    if K is None:
        K = seq.source
    if method not in ("discrete", "pl-continuous"):
        raise ParamOutOfRange(f"unknown method {method!r}")
    if method == "pl-continuous":
        if embeddings is None or len(embeddings) != len(seq.members):
            raise ParamOutOfRange("pl-continuous needs one embedding per member")
    ks, caps, flags = [], [], []
    for i, member in enumerate(seq.members):
        w = None
        fl = ""
        if method == "pl-continuous":
            w = cotan_weights(embeddings[i])
            if (w < 0).any():
                fl = "negweight"
        caps.append(capacity_of(member, K, w))
        ks.append(i + 1)
        flags.append(fl)
    if method == "discrete":
        # zero-extension argument: unit-weight caps cannot grow with k
        for a, b in zip(caps, caps[1:]):
            if b > a * (1 + 1e-8):
                raise NoConvergence(
                    f"capacity trace not monotone: {a} -> {b}")
    return CapacityTrace(tuple(ks), tuple(caps), method, K, tuple(flags))


def _affine_fit(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    """Least squares y ~ a + b x; returns (a, b, rms residual)."""
    A = np.stack([np.ones_like(x), x], axis=1)
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    return float(coef[0]), float(coef[1]), float(np.sqrt(np.mean(resid ** 2)))


def classify(trace: CapacityTrace, factor: float = 2.0,
             drop_ratio: float = 0.5, flat_ratio: float = 0.8) -> Verdict:
    """Decision rule on a capacity trace.

    Fit the resistance r_k = 1/cap_k on the last half of the trace against
    {a + b log k, a + b k, a}. recurrent-consistent when the best growing
    fit (b > 0) beats the constant fit by `factor` in rms residual and
    cap_last/cap_first <= drop_ratio; transient-consistent when
    cap_last >= flat_ratio * cap_half > 0; otherwise inconclusive.
    """
    n = len(trace.ks)
    if n < 4:
        raise TooShort(f"need >= 4 trace entries, got {n}")
    caps = np.asarray(trace.caps)
    if (caps < 0).any():
        raise ParamOutOfRange("negative capacity in trace")
    thresholds = {"factor": factor, "drop_ratio": drop_ratio,
                  "flat_ratio": flat_ratio}
    cap_first, cap_last = float(caps[0]), float(caps[-1])
    cap_half = float(caps[n // 2])
    drop = cap_last / cap_first if cap_first > 0 else 0.0
    flat = cap_last / cap_half if cap_half > 0 else 0.0

    half = slice(n // 2, None)
    ks = np.asarray(trace.ks, dtype=float)[half]
    r = 1.0 / np.maximum(caps[half], 1e-300)

    _, b_log, res_log = _affine_fit(np.log(ks), r)
    _, b_lin, res_lin = _affine_fit(ks, r)
    res_const = float(np.sqrt(np.mean((r - r.mean()) ** 2)))

    grow = [(res, name) for res, b, name in
            [(res_log, b_log, "resistance ~ a + b log k"),
             (res_lin, b_lin, "resistance ~ a + b k")] if b > 0]
    best_res, best_name = min(grow) if grow else (math.inf, None)
    rf = res_const / best_res if best_res > 0 else math.inf

    if best_name is not None and rf >= factor and drop <= drop_ratio:
        cls = "recurrent-consistent"
    elif cap_last > 0 and flat >= flat_ratio:
        cls = "transient-consistent"
    else:
        cls = "inconclusive"
    return Verdict(cls, best_name, rf if best_name else None, drop, flat,
                   thresholds)
