"""Walk-on-spheres estimates of Brownian hitting probabilities.

Each path jumps from its current point to a uniform point on the largest
circle that avoids both the target's epsilon-neighborhood and the outer kill
circle. A path terminates as a hit when it lands within a thin shell around
the epsilon-neighborhood and as an escape when it lands within the same
shell of the kill circle; the shell is a fixed small fraction of epsilon, so
the classification bias stays far below the Monte Carlo noise at the path
counts used here.

Paths are processed in fixed-size chunks with one counter-based stream per
(seed, chunk); every step draws angles for the whole chunk and masks the
finished paths, so results do not depend on scheduling or how many chunks
run concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import rng as _rng
from .errors import ParamOutOfRange

CHUNK = 8192
SHELL_FRACTION = 1e-3
MAX_STEPS = 100_000


class Target:
    """Closed planar set supporting vectorized distance queries."""

    def dist(self, z: np.ndarray) -> np.ndarray:  # pragma: no cover
        raise NotImplementedError

    def describe(self) -> str:  # pragma: no cover
        raise NotImplementedError


class PointsTarget(Target):
    def __init__(self, points):
        self.points = np.atleast_2d(np.asarray(points, dtype=float))
        if self.points.shape[1] != 2 or len(self.points) == 0:
            raise ParamOutOfRange("need a nonempty (n, 2) point array")

    def dist(self, z):
        d = z[:, None, :] - self.points[None, :, :]
        return np.sqrt((d * d).sum(axis=2)).min(axis=1)

    def describe(self):
        return f"points[{len(self.points)}]"


class SegmentsTarget(Target):
    def __init__(self, segments):
        s = np.asarray(segments, dtype=float)
        if s.ndim != 3 or s.shape[1:] != (2, 2) or len(s) == 0:
            raise ParamOutOfRange("need a nonempty (m, 2, 2) segment array")
        self.a = s[:, 0]
        self.b = s[:, 1]

    def dist(self, z):
        out = np.full(len(z), np.inf)
        group = 256
        for s in range(0, len(self.a), group):
            a = self.a[s:s + group]
            b = self.b[s:s + group]
            ab = b - a                                  # (m, 2)
            ln2 = (ab * ab).sum(axis=1)
            ln2 = np.where(ln2 > 0, ln2, 1.0)
            az = z[:, None, :] - a[None, :, :]          # (n, m, 2)
            t = (az * ab[None, :, :]).sum(axis=2) / ln2
            t = np.clip(t, 0.0, 1.0)
            c = a[None, :, :] + t[:, :, None] * ab[None, :, :]
            d2 = ((z[:, None, :] - c) ** 2).sum(axis=2)
            out = np.minimum(out, np.sqrt(d2.min(axis=1)))
        return out

    def describe(self):
        return f"segments[{len(self.a)}]"


class DiskTarget(Target):
    def __init__(self, center, radius: float):
        self.center = np.asarray(center, dtype=float)
        self.radius = float(radius)
        if self.radius <= 0:
            raise ParamOutOfRange("disk radius must be positive")

    def dist(self, z):
        return np.maximum(
            np.hypot(z[:, 0] - self.center[0], z[:, 1] - self.center[1])
            - self.radius, 0.0)

    def describe(self):
        return f"disk(r={self.radius:g})"


@dataclass(frozen=True)
class BrownianConfig:
    start: tuple
    target: Target
    eps: float
    r_out: float
    paths: int = 100_000
    seed: int | None = None

    def __post_init__(self):
        if self.eps <= 0:
            raise ParamOutOfRange("eps must be positive")
        if self.paths < 1:
            raise ParamOutOfRange("need at least one path")
        s = np.asarray(self.start, dtype=float)
        d0 = float(self.target.dist(s[None, :])[0])
        if d0 <= 0:
            raise ParamOutOfRange("start point must be off the target")
        if np.hypot(s[0], s[1]) >= self.r_out:
            raise ParamOutOfRange("start outside the kill circle")
        if self.r_out <= d0:
            raise ParamOutOfRange("kill radius must exceed start-target distance")

    def resolved_seed(self) -> int:
        return _rng.default_seed() if self.seed is None else int(self.seed)


@dataclass(frozen=True)
class HittingEstimate:
    p_hit: float
    stderr: float
    eps: float
    paths: int
    stalled: int = 0

    def as_dict(self) -> dict:
        return {"p_hit": self.p_hit, "stderr": self.stderr, "eps": self.eps,
                "paths": self.paths, "stalled": self.stalled}


def _run_chunk(cfg: BrownianConfig, seed: int, ci: int, n: int) -> tuple[int, int]:
    """One independent chunk of paths; returns (hits, stalled)."""
    h = SHELL_FRACTION * cfg.eps
    g = _rng.stream(seed, 0xB0, ci)
    # live paths stay compacted; finished ones only contribute a count
    z = np.broadcast_to(np.asarray(cfg.start, dtype=float), (n, 2)).copy()
    hits = 0
    steps = 0
    while len(z) and steps < MAX_STEPS:
        ang = 2.0 * np.pi * g.random(len(z))
        d_in = cfg.target.dist(z) - cfg.eps
        d_out = cfg.r_out - np.hypot(z[:, 0], z[:, 1])
        step = np.minimum(d_in, d_out)
        done = step <= h
        hits += int((done & (d_in <= h)).sum())
        keep = ~done
        z = z[keep]
        s = step[keep]
        a = ang[keep]
        z[:, 0] += s * np.cos(a)
        z[:, 1] += s * np.sin(a)
        steps += 1
    # paths still wandering at the cap count as hits, reported separately
    return hits + len(z), len(z)


def hit_probability(cfg: BrownianConfig, workers: int = 1) -> HittingEstimate:
    """P(reach the eps-neighborhood of the target before leaving B(0, r_out)).

    Chunks carry independent streams and are summed, so any worker count
    produces identical results.
    """
    seed = cfg.resolved_seed()
    n_chunks = (cfg.paths + CHUNK - 1) // CHUNK
    sizes = [CHUNK] * (n_chunks - 1) + [cfg.paths - CHUNK * (n_chunks - 1)]
    if workers > 1 and n_chunks > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda ci: _run_chunk(cfg, seed, ci, sizes[ci]),
                                  range(n_chunks)))
    else:
        parts = [_run_chunk(cfg, seed, ci, sizes[ci]) for ci in range(n_chunks)]
    hits = sum(p[0] for p in parts)
    stalled = sum(p[1] for p in parts)
    p = hits / cfg.paths
    se = math.sqrt(p * (1.0 - p) / cfg.paths)
    return HittingEstimate(p, se, cfg.eps, cfg.paths, stalled)


def polarity_sweep(cfg: BrownianConfig, eps_list,
                   decay_factor: float = 1.5, small: float = 0.1,
                   sigma: float = 2.0, workers: int = 1) -> dict:
    """Hitting estimates over a decreasing eps schedule plus a trend verdict.

    polar-consistent: p drops by decay_factor across the sweep and ends
    below `small`. non-polar-consistent: the last two estimates agree within
    sigma combined standard errors and sit above 1/2. Otherwise inconclusive.
    """
    eps = [float(e) for e in eps_list]
    if len(eps) < 4:
        raise ParamOutOfRange("need at least 4 eps values")
    if any(b >= a for a, b in zip(eps, eps[1:])):
        raise ParamOutOfRange("eps values must be strictly decreasing")
    table = []
    for i, e in enumerate(eps):
        sub = BrownianConfig(cfg.start, cfg.target, e, cfg.r_out,
                             cfg.paths, cfg.resolved_seed() + i)
        table.append(hit_probability(sub, workers=workers))

    p = [t.p_hit for t in table]
    se = [t.stderr for t in table]
    verdict = "inconclusive"
    if p[-1] < small and p[0] >= decay_factor * p[-1]:
        verdict = "polar-consistent"
    else:
        gap = abs(p[-1] - p[-2])
        tol = sigma * math.hypot(se[-1], se[-2])
        if p[-1] > 0.5 and p[-2] > 0.5 and gap <= tol:
            verdict = "non-polar-consistent"
    return {"table": table, "verdict": verdict,
            "thresholds": {"decay_factor": decay_factor, "small": small,
                           "sigma": sigma}}


def write_sweep_csv(sweep: dict, path: str | Path) -> None:
    lines = ["eps,p_hit,stderr"]
    for t in sweep["table"]:
        lines.append(f"{t.eps:.17g},{t.p_hit:.17g},{t.stderr:.17g}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def annulus_hit_probability(r_start: float, r_kill: float, eps: float) -> float:
    """Closed form for a point target at the origin: ln(R/r) / ln(R/eps)."""
    if not 0 < eps < r_start < r_kill:
        raise ParamOutOfRange("need eps < r_start < r_kill")
    return math.log(r_kill / r_start) / math.log(r_kill / eps)


def cantor_points(level: int, n_per_gap: int = 1) -> np.ndarray:
    """Endpoints of the level-k middle-thirds construction on [0, 1] x {0}.

    A finite stand-in for a Cantor-like limit set: 2^level intervals, both
    endpoints of each kept interval, as a point cloud on the x axis.
    """
    if level < 0:
        raise ParamOutOfRange("level must be >= 0")
    intervals = [(0.0, 1.0)]
    for _ in range(level):
        nxt = []
        for a, b in intervals:
            t = (b - a) / 3.0
            nxt.append((a, a + t))
            nxt.append((b - t, b))
        intervals = nxt
    xs = sorted({x for ab in intervals for x in ab})
    return np.array([[x, 0.0] for x in xs])
