"""Command line entry point tying the pipeline together.

Subcommands: generate, pack, embed, validate, capacity, transfer, polarity,
theorem-check, render. Every run that writes artifacts also writes a JSON
manifest recording the argv tail, resolved seed, version, and input/output
digests; re-running the recorded argv reproduces the artifacts byte for
byte (see manifest.replay).

Exit codes: 0 success, 1 invariant failure, 2 usage error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from . import brownian as bw
from . import capacity as cap_mod
from . import embedding as emb_mod
from . import figures
from . import manifest as man_mod
from . import packing as pack_mod
from . import rng
from . import transfer as xfer
from . import triangulation as tri_mod
from .errors import PacklabError, ParamOutOfRange

EXIT_OK = 0
EXIT_INVARIANT = 1
EXIT_USAGE = 2
EXIT_IO = 3

_FAMILIES = ("lattice_ball", "hyperbolic_ball", "tube", "tree_of_tubes")

# families expected recurrent pair with polar surrogates, transient with
# non-polar ones; embed depth caps keep packings within float64 range
_EXPECTED = {"lattice_ball": "recurrent", "hyperbolic_ball": "transient",
             "tube": "recurrent", "tree_of_tubes": "transient"}
_EMBED_CAP = {"lattice_ball": 8, "hyperbolic_ball": 5, "tube": 16,
              "tree_of_tubes": 3}


class _Ctx:
    """Collects file paths touched by a subcommand for the manifest."""

    def __init__(self):
        self.inputs: list[Path] = []
        self.outputs: list[Path] = []
        self.manifest_path: Path | None = None


def _seed_of(args) -> int:
    s = getattr(args, "seed", None)
    return rng.default_seed() if s is None else int(s)


def _json_default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def _write_json(obj, path: Path) -> None:
    path.write_text(
        json.dumps(obj, sort_keys=True, indent=2, default=_json_default)
        + "\n", encoding="utf-8")


def _tri_for(path: Path, override: str | None):
    """Resolve the triangulation paired with an .emb/.pack file."""
    tri_path = Path(override) if override else path.with_suffix(".tri")
    return tri_mod.read_tri(tri_path), tri_path


def _build_family(family: str, R: int, deg: int, c: int, seg_len: int):
    if family == "lattice_ball":
        return tri_mod.lattice_ball(R)
    if family == "hyperbolic_ball":
        return tri_mod.hyperbolic_ball(deg, R)
    if family == "tube":
        return tri_mod.tube(c, R)
    if family == "tree_of_tubes":
        return tri_mod.tree_of_tubes(c, seg_len, R)
    raise ParamOutOfRange(f"unknown family {family!r}")


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------

def _cmd_generate(args, ctx: _Ctx) -> int:
    if args.family == "wheel":
        if args.k is None:
            raise ParamOutOfRange("wheel needs --k")
        t = tri_mod.wheel(args.k)
    else:
        seq = _build_family(args.family, args.R, args.deg, args.c,
                            args.seg_len)
        t = seq.member(args.member) if args.member else seq.largest
    out = Path(args.out)
    tri_mod.write_tri(t, out)
    ctx.outputs.append(out)
    print(f"{args.family}: {t.nv} vertices, {t.num_faces} faces -> {out}")
    return EXIT_OK


def _cmd_pack(args, ctx: _Ctx) -> int:
    inp = Path(args.input)
    tri = tri_mod.read_tri(inp)
    ctx.inputs.append(inp)
    label = pack_mod.solve_radii(tri, args.boundary_radius, args.tol,
                                 args.max_sweeps)
    layout = pack_mod.layout_centers(tri, label)
    out = Path(args.out)
    pack_mod.write_pack(layout, out)
    ctx.outputs.append(out)
    print(f"packed {tri.nv} circles: sweeps={label.sweeps} "
          f"angle_error={label.angle_error:.3e} "
          f"closure={layout.closure_error:.3e} -> {out}")
    return EXIT_OK


def _cmd_embed(args, ctx: _Ctx) -> int:
    inp = Path(args.input)
    tri = tri_mod.read_tri(inp)
    ctx.inputs.append(inp)
    if args.pack:
        centers, _ = pack_mod.read_pack(args.pack)
        ctx.inputs.append(Path(args.pack))
        emb = emb_mod.Embedding(tri, centers)
    else:
        emb = emb_mod.embed_complex(tri, tol=args.tol)
    out = Path(args.out)
    emb_mod.write_emb(emb, out)
    ctx.outputs.append(out)
    print(f"embedded {tri.nv} vertices -> {out}")
    return EXIT_OK


def _cmd_validate(args, ctx: _Ctx) -> int:
    inp = Path(args.input)
    tri, tri_path = _tri_for(inp, args.tri)
    emb = emb_mod.read_emb(inp, tri)
    ctx.inputs += [inp, tri_path]
    report: dict = {"file": str(inp), "vertices": tri.nv}
    ok = True
    try:
        emb_mod.validate_embedding(emb)
        report["planar"] = True
    except PacklabError as exc:
        report["planar"] = False
        report["reason"] = str(exc)
        ok = False
    if report["planar"]:
        g = emb_mod.goodness_report(emb)
        report["eta_min"] = g.eta_min
        report["max_adjacent_length_ratio"] = g.max_adjacent_length_ratio
        if args.sausage:
            s = emb_mod.sausage_check(emb)
            report["c_obs"] = s["c_obs"]
            report["pairs_checked"] = s["pairs_checked"]
        ok = ok and g.eta_min > args.eta_floor
    report["eta_floor"] = args.eta_floor
    report["ok"] = ok
    out = Path(args.report) if args.report else inp.with_suffix(".report.json")
    _write_json(report, out)
    ctx.outputs.append(out)
    if report["planar"]:
        print(f"{inp}: planar, eta_min={report['eta_min']:.6f} "
              f"(floor {args.eta_floor:g}) -> {'ok' if ok else 'FAIL'}")
    else:
        print(f"{inp}: invalid ({report['reason']})")
    return EXIT_OK if ok else EXIT_INVARIANT


def _capacity_pair(family, R, deg, c, seg_len, source, embed_R):
    """Discrete trace at full depth plus pl trace at embeddable depth."""
    seq = _build_family(family, R, deg, c, seg_len)
    K = tri_mod.SourceSet(frozenset(source)) if source else seq.source
    td = cap_mod.capacity_trace(seq, K)
    depth = min(embed_R if embed_R else _EMBED_CAP[family], R)
    seq_e = _build_family(family, depth, deg, c, seg_len)
    embs = emb_mod.embed_exhaustion(seq_e)
    tp = cap_mod.capacity_trace(seq_e, K, method="pl-continuous",
                                embeddings=embs)
    te = cap_mod.capacity_trace(seq_e, K)
    ratios = [a / b for a, b in zip(te.caps, tp.caps)]
    return seq, td, tp, ratios, embs


def _cmd_capacity(args, ctx: _Ctx) -> int:
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    ctx.manifest_path = outdir / "manifest.json"
    source = [int(t) for t in args.source.split(",")] if args.source else None
    seq = _build_family(args.family, args.R, args.deg, args.c, args.seg_len)
    K = tri_mod.SourceSet(frozenset(source)) if source else seq.source
    td = cap_mod.capacity_trace(seq, K)
    td.write_csv(outdir / "discrete.cap")
    ctx.outputs.append(outdir / "discrete.cap")
    verdict = cap_mod.classify(td)
    traces = [("discrete", td)]
    report = {"family": args.family, "R": args.R,
              "source": list(K.vertices),
              "caps_discrete": list(td.caps),
              "verdict": verdict.as_dict()}
    if args.mode in ("pl", "both"):
        _, _, tp, ratios, _ = _capacity_pair(
            args.family, args.R, args.deg, args.c, args.seg_len, source,
            args.embed_R)
        tp.write_csv(outdir / "pl.cap")
        ctx.outputs.append(outdir / "pl.cap")
        traces.append(("pl-continuous", tp))
        report["caps_pl"] = list(tp.caps)
        report["ratio_range"] = [min(ratios), max(ratios)]
    _write_json(report, outdir / "verdict.json")
    ctx.outputs.append(outdir / "verdict.json")
    figures.render_capacity(traces, outdir / "capacity.png",
                            title=f"{args.family} R={args.R}")
    ctx.outputs.append(outdir / "capacity.png")
    print(f"{args.family} R={args.R}: "
          f"{verdict.classification} (drop {verdict.drop_observed:.3g}) "
          f"-> {outdir}")
    return EXIT_OK


def _cmd_transfer(args, ctx: _Ctx) -> int:
    inp = Path(args.input)
    tri, tri_path = _tri_for(inp, args.tri)
    emb = emb_mod.read_emb(inp, tri)
    ctx.inputs += [inp, tri_path]
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    ctx.manifest_path = outdir / "manifest.json"
    seed = _seed_of(args)
    suite = xfer.comparison_suite(emb, trials=args.trials, seed=seed)
    if args.edge:
        edge = (args.edge[0], args.edge[1])
    else:
        interior = np.nonzero(~emb.tri.boundary_edge_mask)[0]
        if len(interior) == 0:
            raise ParamOutOfRange("embedding has no interior edge")
        edge = tuple(int(v) for v in emb.tri.edges[interior[0]])
    cfg = xfer.SmoothingConfig(seed=seed, samples=args.samples)
    dens = xfer.density_check(emb, edge, cfg)
    report = {k: v for k, v in suite.items()
              if k not in ("ratios_fwd", "ratios_bwd")}
    report["density"] = dens
    report["edge"] = list(edge)
    _write_json(report, outdir / "transfer.json")
    ctx.outputs.append(outdir / "transfer.json")
    rows = ["trial,pl_over_discrete,discrete_smooth_over_pl"]
    for i, (a, b) in enumerate(zip(suite["ratios_fwd"], suite["ratios_bwd"])):
        rows.append(f"{i},{a:.17g},{b:.17g}")
    (outdir / "transfer.csv").write_text("\n".join(rows) + "\n",
                                         encoding="utf-8")
    ctx.outputs.append(outdir / "transfer.csv")
    _render_transfer(suite, outdir / "transfer.png")
    ctx.outputs.append(outdir / "transfer.png")
    ok = suite["forward_guarantee_ok"] and suite["C_bwd"] < 100.0
    print(f"{inp}: C_fwd={suite['C_fwd']:.4f} C_bwd={suite['C_bwd']:.4f} "
          f"C_emp={dens['C_emp']:.3f} -> {'ok' if ok else 'FAIL'}")
    return EXIT_OK if ok else EXIT_INVARIANT


def _render_transfer(suite, path):
    import matplotlib.pyplot as plt
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(suite["ratios_fwd"], marker=".", linestyle="none",
            label="pl / discrete")
    ax.plot(suite["ratios_bwd"], marker="x", linestyle="none",
            label="discrete(smoothed) / pl")
    ax.set_xlabel("trial")
    ax.set_ylabel("energy ratio")
    ax.grid(True, alpha=0.3)
    ax.legend()
    figures._finish(fig, path)


def _parse_target(args, ctx: _Ctx):
    chosen = [x for x in (args.target_emb, args.target_disk,
                          args.target_points) if x]
    if len(chosen) != 1:
        raise ParamOutOfRange(
            "exactly one of --target-emb/--target-disk/--target-points")
    if args.target_disk:
        cx, cy, r = args.target_disk
        return bw.DiskTarget((cx, cy), r)
    if args.target_points:
        p = Path(args.target_points)
        text = p.read_text(encoding="utf-8")
        delim = "," if "," in text.split("\n", 1)[0] else None
        pts = np.loadtxt(p, delimiter=delim, ndmin=2)
        ctx.inputs.append(p)
        return bw.PointsTarget(pts)
    p = Path(args.target_emb)
    tri, tri_path = _tri_for(p, args.tri)
    emb = emb_mod.read_emb(p, tri)
    ctx.inputs += [p, tri_path]
    return bw.SegmentsTarget(emb_mod.build_domain(emb).boundary_segments())


def _cmd_polarity(args, ctx: _Ctx) -> int:
    target = _parse_target(args, ctx)
    eps = [float(t) for t in args.eps.split(",")]
    cfg = bw.BrownianConfig(tuple(args.start), target, eps[0], args.r_out,
                            paths=args.paths, seed=_seed_of(args))
    sweep = bw.polarity_sweep(cfg, eps, workers=args.workers)
    out = Path(args.out)
    bw.write_sweep_csv(sweep, out)
    ctx.outputs.append(out)
    fig = out.with_suffix(".png")
    figures.render_polarity(sweep, fig, title=target.describe())
    ctx.outputs.append(fig)
    print(f"{target.describe()}: {sweep['verdict']} "
          f"(p {sweep['table'][0].p_hit:.4f} -> "
          f"{sweep['table'][-1].p_hit:.4f}) -> {out}")
    return EXIT_OK


def _surrogate(family: str):
    """Analytically understood stand-in for each family's limit set.

    One-point and two-point sets have zero logarithmic capacity; a disk and
    a middle-thirds endpoint cloud (at eps above its finest gap) have
    positive capacity. Start points and kill radii chosen so the decaying
    sweeps actually decay by a visible factor at these eps scales.
    """
    if family == "lattice_ball":
        return (bw.PointsTarget([(0.0, 0.0)]), (20.0, 0.0), 50.0,
                [1e-1, 1e-2, 1e-3, 1e-4, 1e-5])
    if family == "tube":
        return (bw.PointsTarget([(-1.0, 0.0), (1.0, 0.0)]), (15.0, 0.0),
                20.0, [1e-1, 1e-2, 1e-3, 1e-4, 1e-5])
    if family == "hyperbolic_ball":
        return (bw.DiskTarget((0.0, 0.0), 1.0), (2.0, 0.0), 50.0,
                [0.1, 0.03, 0.01, 0.0012, 0.001])
    if family == "tree_of_tubes":
        return (bw.PointsTarget(bw.cantor_points(6)), (0.5, 0.3), 40.0,
                [1e-2, 6e-3, 4e-3, 2.4e-3, 2e-3])
    raise ParamOutOfRange(f"no surrogate for family {family!r}")


def _cmd_theorem_check(args, ctx: _Ctx) -> int:
    family = args.family
    expected = _EXPECTED[family]
    outdir = Path(args.out) if args.out else Path(
        f"theorem-check-{family}-R{args.R}")
    outdir.mkdir(parents=True, exist_ok=True)
    ctx.manifest_path = outdir / "manifest.json"
    seed = _seed_of(args)
    checks: dict[str, bool] = {}
    report: dict = {"family": family, "R": args.R, "expected": expected,
                    "seed": seed, "version": __version__}

    # discrete capacity at full depth, pl capacity where embeddable
    seq, td, tp, ratios, embs = _capacity_pair(
        family, args.R, args.deg, args.c, args.seg_len, None, None)
    verdict = cap_mod.classify(td)
    report["capacity"] = {"discrete": list(td.caps), "pl": list(tp.caps),
                          "ratio_range": [min(ratios), max(ratios)],
                          "verdict": verdict.as_dict()}
    checks["classifier"] = verdict.classification == f"{expected}-consistent"
    checks["comparability"] = all(0.1 <= r <= 10.0 for r in ratios)
    td.write_csv(outdir / "discrete.cap")
    tp.write_csv(outdir / "pl.cap")
    figures.render_capacity([("discrete", td), ("pl-continuous", tp)],
                            outdir / "capacity.png",
                            title=f"{family} R={args.R}")
    ctx.outputs += [outdir / "discrete.cap", outdir / "pl.cap",
                    outdir / "capacity.png"]

    # geometry of the largest embeddable member
    emb = embs[-1]
    emb_mod.validate_embedding(emb)
    g = emb_mod.goodness_report(emb)
    s = emb_mod.sausage_check(emb)
    ring = float(np.arcsin(1.0 / (1.0 + g.max_adjacent_length_ratio)))
    report["embedding"] = {"vertices": emb.tri.nv, "eta_min": g.eta_min,
                           "max_adjacent_length_ratio":
                               g.max_adjacent_length_ratio,
                           "c_obs": s["c_obs"],
                           "ring_lower_bound": ring}
    checks["embedding"] = g.eta_min > args.eta_floor
    checks["ring_bound"] = g.eta_min >= ring - 1e-12
    checks["sausage"] = s["c_obs"] > 0 and s["c_obs"] >= 0.05 * np.sin(g.eta_min)
    figures.render_embedding(emb, outdir / "embedding.png",
                             title=f"{family} member {len(embs)}")
    ctx.outputs.append(outdir / "embedding.png")

    # energy transfer on the same member
    suite = xfer.comparison_suite(emb, trials=args.trials, seed=seed)
    report["transfer"] = {k: v for k, v in suite.items()
                          if k not in ("ratios_fwd", "ratios_bwd")}
    checks["transfer"] = (suite["forward_guarantee_ok"]
                          and suite["C_bwd"] < 100.0
                          and suite["C_obs_grad"]
                          <= 2.0 / np.sin(g.eta_min) + 1e-12)

    # polarity of the family's limit-set surrogate
    target, start, r_out, eps = _surrogate(family)
    cfg = bw.BrownianConfig(start, target, eps[0], r_out, paths=args.paths,
                            seed=seed)
    sweep = bw.polarity_sweep(cfg, eps, workers=args.workers)
    bw.write_sweep_csv(sweep, outdir / "polarity.csv")
    figures.render_polarity(sweep, outdir / "polarity.png",
                            title=f"{family} surrogate: {target.describe()}")
    ctx.outputs += [outdir / "polarity.csv", outdir / "polarity.png"]
    want = "polar-consistent" if expected == "recurrent" else \
        "non-polar-consistent"
    report["polarity"] = {"surrogate": target.describe(),
                          "verdict": sweep["verdict"], "expected": want,
                          "p_hit": [t.p_hit for t in sweep["table"]],
                          "eps": [t.eps for t in sweep["table"]]}
    checks["polarity"] = sweep["verdict"] == want

    ok = all(checks.values())
    report["checks"] = checks
    report["verdict"] = f"{expected}-consistent" if ok else "inconsistent"
    _write_json(report, outdir / "report.json")
    ctx.outputs.append(outdir / "report.json")
    for name in sorted(checks):
        print(f"  check {name}: {'ok' if checks[name] else 'FAIL'}")
    print(f"theorem-check {family} R={args.R}: {report['verdict']} -> {outdir}")
    return EXIT_OK if ok else EXIT_INVARIANT


def _cmd_render(args, ctx: _Ctx) -> int:
    inp = Path(args.input)
    out = Path(args.out)
    suffix = inp.suffix.lower()
    if suffix == ".emb":
        tri, tri_path = _tri_for(inp, args.tri)
        emb = emb_mod.read_emb(inp, tri)
        ctx.inputs += [inp, tri_path]
        if out.suffix.lower() == ".svg":
            radii = None
            if args.pack:
                _, radii = pack_mod.read_pack(args.pack)
                ctx.inputs.append(Path(args.pack))
            emb_mod.to_svg(emb, out, radii=radii)
        else:
            figures.render_embedding(emb, out)
    elif suffix == ".tri":
        tri = tri_mod.read_tri(inp)
        ctx.inputs.append(inp)
        try:
            layout = pack_mod.pack(tri)
        except PacklabError:
            emb = emb_mod.embed_complex(tri)
            figures.render_embedding(emb, out)
        else:
            if out.suffix.lower() == ".svg":
                emb_mod.to_svg(emb_mod.embedding_from_layout(layout), out,
                               radii=layout.radii)
            else:
                figures.render_packing(layout, out)
    elif suffix == ".cap":
        trace = cap_mod.read_trace_csv(inp)
        ctx.inputs.append(inp)
        figures.render_capacity([(trace.method, trace)], out)
    elif suffix == ".csv":
        ctx.inputs.append(inp)
        rows = [ln.split(",") for ln in
                inp.read_text(encoding="utf-8").strip().split("\n")[1:]]
        table = [bw.HittingEstimate(float(p), float(se), float(e), 0)
                 for e, p, se in rows]
        figures.render_polarity({"table": table, "verdict": ""}, out)
    else:
        raise ParamOutOfRange(f"cannot render {suffix!r} files")
    ctx.outputs.append(out)
    print(f"rendered {inp} -> {out}")
    return EXIT_OK


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------

def _add_family_opts(p, with_member=False):
    p.add_argument("--family", required=True,
                   choices=_FAMILIES + (("wheel",) if with_member else ()))
    p.add_argument("--R", type=int, default=4,
                   help="radius / length / depth, family dependent")
    p.add_argument("--deg", type=int, default=7,
                   help="hyperbolic_ball interior degree")
    p.add_argument("--c", type=int, default=5, help="tube circumference")
    p.add_argument("--seg-len", type=int, default=4,
                   help="tree_of_tubes rings per branch segment")
    if with_member:
        p.add_argument("--k", type=int, help="wheel spoke count")
        p.add_argument("--member", type=int,
                       help="exhaustion member (default largest)")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="packlab",
        description="circle packings, good embeddings, capacities, and "
                    "Brownian hitting estimates on triangulation families")
    p.add_argument("--version", action="version",
                   version=f"packlab {__version__}")
    sub = p.add_subparsers(dest="cmd", required=True)

    g = sub.add_parser("generate", help="write a family member as .tri")
    _add_family_opts(g, with_member=True)
    g.add_argument("-o", "--out", required=True)
    g.set_defaults(func=_cmd_generate)

    g = sub.add_parser("pack", help="solve tangency radii and lay out centers")
    g.add_argument("input", help=".tri file (single boundary cycle)")
    g.add_argument("-o", "--out", required=True, help=".pack output")
    g.add_argument("--tol", type=float, default=1e-10)
    g.add_argument("--max-sweeps", type=int, default=10 ** 6)
    g.add_argument("--boundary-radius", type=float, default=None)
    g.set_defaults(func=_cmd_pack)

    g = sub.add_parser("embed", help="straight-line embedding from a packing")
    g.add_argument("input", help=".tri file; extra boundary cycles get capped")
    g.add_argument("-o", "--out", required=True, help=".emb output")
    g.add_argument("--pack", help="reuse centers from a .pack file")
    g.add_argument("--tol", type=float, default=1e-10)
    g.set_defaults(func=_cmd_embed)

    g = sub.add_parser("validate", help="planarity and goodness report")
    g.add_argument("input", help=".emb file (pairs with sibling .tri)")
    g.add_argument("--tri", help="triangulation file if not the sibling .tri")
    g.add_argument("--eta-floor", type=float, default=0.0)
    g.add_argument("--no-sausage", dest="sausage", action="store_false")
    g.add_argument("--report", help="JSON output (default input.report.json)")
    g.set_defaults(func=_cmd_validate)

    g = sub.add_parser("capacity", help="capacity trace along an exhaustion")
    _add_family_opts(g)
    g.add_argument("-o", "--out", required=True, help="output directory")
    g.add_argument("--mode", choices=("discrete", "pl", "both"),
                   default="discrete")
    g.add_argument("--source", help="comma list of clamped vertices")
    g.add_argument("--embed-R", type=int, default=None,
                   help="depth for the pl trace (default family cap)")
    g.set_defaults(func=_cmd_capacity)

    g = sub.add_parser("transfer", help="two-sided energy comparison suite")
    g.add_argument("input", help=".emb file (pairs with sibling .tri)")
    g.add_argument("--tri")
    g.add_argument("-o", "--out", required=True, help="output directory")
    g.add_argument("--trials", type=int, default=100)
    g.add_argument("--samples", type=int, default=100_000,
                   help="density check sample count")
    g.add_argument("--edge", type=int, nargs=2,
                   help="edge for the density check (default first interior)")
    g.add_argument("--seed", type=int, default=None)
    g.set_defaults(func=_cmd_transfer)

    g = sub.add_parser("polarity", help="walk-on-spheres hitting sweep")
    g.add_argument("--target-emb", help=".emb whose boundary is the target")
    g.add_argument("--target-disk", type=float, nargs=3,
                   metavar=("CX", "CY", "R"))
    g.add_argument("--target-points", help="text file of x y rows")
    g.add_argument("--tri", help="triangulation for --target-emb")
    g.add_argument("--eps", required=True,
                   help="comma list, strictly decreasing, >= 4 values")
    g.add_argument("--start", type=float, nargs=2, required=True,
                   metavar=("X", "Y"))
    g.add_argument("--r-out", type=float, required=True)
    g.add_argument("--paths", type=int, default=100_000)
    g.add_argument("--seed", type=int, default=None)
    g.add_argument("--workers", type=int, default=1)
    g.add_argument("-o", "--out", required=True, help="CSV output")
    g.set_defaults(func=_cmd_polarity)

    g = sub.add_parser("theorem-check",
                       help="full pipeline plus expected-verdict checks")
    _add_family_opts(g)
    g.add_argument("-o", "--out", help="output directory")
    g.add_argument("--paths", type=int, default=30_000)
    g.add_argument("--trials", type=int, default=40)
    g.add_argument("--eta-floor", type=float, default=0.01)
    g.add_argument("--seed", type=int, default=None)
    g.add_argument("--workers", type=int, default=1)
    g.set_defaults(func=_cmd_theorem_check)

    g = sub.add_parser("render", help="figure from .tri/.emb/.cap/.csv")
    g.add_argument("input")
    g.add_argument("-o", "--out", required=True, help=".png or .svg")
    g.add_argument("--tri", help="triangulation for .emb input")
    g.add_argument("--pack", help="circle radii for svg output")
    g.set_defaults(func=_cmd_render)
    return p


def run(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code is None else int(exc.code)
    ctx = _Ctx()
    t0 = time.time()
    try:
        code = args.func(args, ctx)
    except ParamOutOfRange as exc:
        print(f"packlab: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PacklabError as exc:
        print(f"packlab: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (OSError, ValueError) as exc:
        print(f"packlab: {exc}", file=sys.stderr)
        return EXIT_IO
    if ctx.outputs:
        rec = list(argv)
        if hasattr(args, "seed") and not any(
                a == "--seed" or a.startswith("--seed=") for a in rec):
            rec += ["--seed", str(_seed_of(args))]
        m = man_mod.RunManifest(
            subcommand=args.cmd, argv=rec, seed=_seed_of(args),
            version=__version__, workers=getattr(args, "workers", 1),
            exit_code=code,
            inputs={str(p): man_mod.file_digest(p) for p in ctx.inputs},
            outputs={str(p): man_mod.file_digest(p) for p in ctx.outputs},
            wall_clock=round(time.time() - t0, 3))
        mp = ctx.manifest_path or Path(
            str(ctx.outputs[0]) + ".manifest.json")
        man_mod.write_manifest(m, mp)
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
