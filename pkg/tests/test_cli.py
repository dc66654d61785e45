"""End-to-end command tests, run in-process against tmp directories."""

import json
from pathlib import Path

import numpy as np
import pytest

import packlab.triangulation as tr
from packlab.capacity import read_trace_csv
from packlab.cli import run
from packlab.embedding import Embedding, read_emb, write_emb
from packlab.manifest import read_manifest, replay
from packlab.packing import read_pack


def _sorted_keys_everywhere(path):
    def hook(pairs):
        keys = [k for k, _ in pairs]
        assert keys == sorted(keys), f"{path}: unsorted keys {keys}"
        return dict(pairs)
    return json.loads(Path(path).read_text(), object_pairs_hook=hook)


def _spiral_strip():
    n = 6
    ang = np.deg2rad(90.0 * np.arange(n))
    ra = 1.0 + 0.02 * np.arange(n)
    rb = 2.0 + 0.02 * np.arange(n)
    a = np.c_[ra * np.cos(ang), ra * np.sin(ang)]
    b = np.c_[rb * np.cos(ang), rb * np.sin(ang)]
    faces = []
    for i in range(n - 1):
        faces.append((i, n + i, i + 1))
        faces.append((n + i, n + i + 1, i + 1))
    return tr.build_from_faces(faces), np.vstack([a, b])


# -- parser level ----------------------------------------------------------------

def test_version_and_usage_codes(capsys):
    assert run(["--version"]) == 0
    assert run(["--no-such-flag"]) == 2
    assert run(["generate", "--family", "klein_bottle"]) == 2
    capsys.readouterr()


# -- generate ---------------------------------------------------------------------

def test_generate_writes_tri_and_manifest(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert run(["generate", "--family", "lattice_ball", "--R", "2",
                "-o", "a.tri"]) == 0
    t = tr.read_tri(tmp_path / "a.tri")
    assert t.nv == 1 + 3 * 2 * 3
    m = read_manifest(tmp_path / "a.tri.manifest.json")
    assert m.subcommand == "generate"
    assert m.exit_code == 0
    assert str(tmp_path / "a.tri") in m.outputs or "a.tri" in m.outputs
    _sorted_keys_everywhere(tmp_path / "a.tri.manifest.json")


def test_generate_member_selection(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert run(["generate", "--family", "lattice_ball", "--R", "3",
                "--member", "2", "-o", "m.tri"]) == 0
    assert tr.read_tri(tmp_path / "m.tri").nv == 1 + 3 * 2 * 3
    assert run(["generate", "--family", "lattice_ball", "--R", "3",
                "--member", "9", "-o", "x.tri"]) != 0


def test_generate_wheel(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert run(["generate", "--family", "wheel", "--k", "9",
                "-o", "w.tri"]) == 0
    assert tr.read_tri(tmp_path / "w.tri").nv == 10


# -- pack / embed / validate chain ------------------------------------------------

def test_pack_embed_validate_chain(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    run(["generate", "--family", "lattice_ball", "--R", "3", "-o", "l.tri"])
    assert run(["pack", "l.tri", "-o", "l.pack"]) == 0
    out = capsys.readouterr().out
    assert "angle_error" in out
    centers, radii = read_pack(tmp_path / "l.pack")
    assert len(radii) == 1 + 3 * 3 * 4
    assert run(["embed", "l.tri", "--pack", "l.pack", "-o", "l.emb"]) == 0
    emb = read_emb(tmp_path / "l.emb", tr.read_tri(tmp_path / "l.tri"))
    assert np.array_equal(emb.coords, centers)
    assert run(["validate", "l.emb"]) == 0
    rep = _sorted_keys_everywhere(tmp_path / "l.report.json")
    assert rep["planar"] is True
    assert rep["ok"] is True
    assert rep["eta_min"] == pytest.approx(np.pi / 3, abs=1e-9)
    assert "c_obs" in rep


def test_pack_missing_input_no_partial_outputs(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    assert run(["pack", "missing.tri", "-o", "out.pack"]) == 3
    assert not (tmp_path / "out.pack").exists()
    assert not (tmp_path / "out.pack.manifest.json").exists()
    assert "packlab:" in capsys.readouterr().err


def test_pack_invariant_exit(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    # a tube keeps two boundary cycles, which the radius solver refuses
    assert run(["generate", "--family", "tube", "--R", "2",
                "-o", "t.tri"]) == 0
    assert run(["pack", "t.tri", "-o", "t.pack"]) == 1
    assert not (tmp_path / "t.pack").exists()
    capsys.readouterr()


def test_validate_detects_bad_embedding(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    t, coords = _spiral_strip()
    tr.write_tri(t, tmp_path / "s.tri")
    write_emb(Embedding(t, coords), tmp_path / "s.emb")
    assert run(["validate", "s.emb", "--report", "r.json"]) == 1
    rep = _sorted_keys_everywhere(tmp_path / "r.json")
    assert rep["planar"] is False
    assert "cross" in rep["reason"]
    capsys.readouterr()


def test_validate_eta_floor(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    run(["generate", "--family", "lattice_ball", "--R", "2", "-o", "l.tri"])
    run(["pack", "l.tri", "-o", "l.pack"])
    run(["embed", "l.tri", "--pack", "l.pack", "-o", "l.emb"])
    # the lattice corner angle is pi/3; an impossible floor must fail
    assert run(["validate", "l.emb", "--eta-floor", "1.5"]) == 1
    rep = _sorted_keys_everywhere(tmp_path / "l.report.json")
    assert rep["planar"] is True and rep["ok"] is False
    capsys.readouterr()


# -- capacity ------------------------------------------------------------------------

def test_capacity_outputs(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    assert run(["capacity", "--family", "lattice_ball", "--R", "8",
                "--mode", "both", "-o", "capdir"]) == 0
    d = tmp_path / "capdir"
    for name in ("discrete.cap", "pl.cap", "verdict.json",
                 "capacity.png", "manifest.json"):
        assert (d / name).exists(), name
    td = read_trace_csv(d / "discrete.cap")
    assert td.ks == tuple(range(1, 9))
    verdict = _sorted_keys_everywhere(d / "verdict.json")
    assert verdict["verdict"]["classification"] == "recurrent-consistent"
    lo, hi = verdict["ratio_range"]
    assert 0.1 <= lo <= hi <= 10.0
    capsys.readouterr()


# -- transfer -------------------------------------------------------------------------

def test_transfer_outputs(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    run(["generate", "--family", "lattice_ball", "--R", "2", "-o", "l.tri"])
    run(["pack", "l.tri", "-o", "l.pack"])
    run(["embed", "l.tri", "--pack", "l.pack", "-o", "l.emb"])
    assert run(["transfer", "l.emb", "-o", "tdir", "--trials", "10",
                "--seed", "5"]) == 0
    d = tmp_path / "tdir"
    rep = _sorted_keys_everywhere(d / "transfer.json")
    assert rep["forward_guarantee_ok"] is True
    assert rep["C_bwd"] < 100.0
    assert rep["density"]["support_ok"] is True
    rows = (d / "transfer.csv").read_text().strip().split("\n")
    assert rows[0] == "trial,pl_over_discrete,discrete_smooth_over_pl"
    assert len(rows) == 11
    assert (d / "transfer.png").exists()
    capsys.readouterr()


# -- polarity --------------------------------------------------------------------------

def test_polarity_sweep_files(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    (tmp_path / "pts.txt").write_text("0 0\n")
    assert run(["polarity", "--target-points", "pts.txt",
                "--eps", "0.5,0.1,0.05,0.01", "--start", "1", "0",
                "--r-out", "10", "--paths", "2000", "--seed", "7",
                "-o", "sweep.csv"]) == 0
    lines = (tmp_path / "sweep.csv").read_text().strip().split("\n")
    assert lines[0] == "eps,p_hit,stderr"
    assert len(lines) == 5
    assert (tmp_path / "sweep.png").exists()
    m = read_manifest(tmp_path / "sweep.csv.manifest.json")
    assert m.seed == 7
    assert "--seed" in m.argv
    capsys.readouterr()


def test_polarity_target_exclusivity(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    (tmp_path / "pts.txt").write_text("0 0\n")
    base = ["polarity", "--eps", "0.5,0.1,0.05,0.01", "--start", "1", "0",
            "--r-out", "10", "--paths", "100", "-o", "s.csv"]
    assert run(base) == 2
    assert run(base + ["--target-points", "pts.txt",
                       "--target-disk", "0,0,1"]) == 2
    capsys.readouterr()


def test_polarity_env_seed_recorded(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    monkeypatch.setenv("PACKLAB_SEED", "123")
    (tmp_path / "pts.txt").write_text("0 0\n")
    assert run(["polarity", "--target-points", "pts.txt",
                "--eps", "0.5,0.1,0.05,0.01", "--start", "1", "0",
                "--r-out", "10", "--paths", "500", "-o", "e.csv"]) == 0
    m = read_manifest(tmp_path / "e.csv.manifest.json")
    assert m.seed == 123
    i = m.argv.index("--seed")
    assert m.argv[i + 1] == "123"
    capsys.readouterr()


# -- render -----------------------------------------------------------------------------

def test_render_every_input_kind(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    run(["generate", "--family", "lattice_ball", "--R", "2", "-o", "l.tri"])
    run(["pack", "l.tri", "-o", "l.pack"])
    run(["embed", "l.tri", "--pack", "l.pack", "-o", "l.emb"])
    run(["capacity", "--family", "lattice_ball", "--R", "4",
         "--mode", "discrete", "-o", "capdir"])
    (tmp_path / "pts.txt").write_text("0 0\n")
    run(["polarity", "--target-points", "pts.txt",
         "--eps", "0.5,0.1,0.05,0.01", "--start", "1", "0",
         "--r-out", "10", "--paths", "500", "--seed", "3",
         "-o", "sweep.csv"])
    assert run(["render", "l.tri", "-o", "tri.png"]) == 0
    assert run(["render", "l.emb", "-o", "emb.svg"]) == 0
    assert run(["render", "l.emb", "-o", "emb.png"]) == 0
    assert run(["render", "capdir/discrete.cap", "-o", "cap.png"]) == 0
    assert run(["render", "sweep.csv", "-o", "pol.png"]) == 0
    for f in ("tri.png", "emb.svg", "emb.png", "cap.png", "pol.png"):
        assert (tmp_path / f).stat().st_size > 0, f
    capsys.readouterr()


def test_render_bytes_deterministic(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    run(["generate", "--family", "lattice_ball", "--R", "2", "-o", "l.tri"])
    run(["pack", "l.tri", "-o", "l.pack"])
    run(["embed", "l.tri", "--pack", "l.pack", "-o", "l.emb"])
    assert run(["render", "l.emb", "-o", "a.png"]) == 0
    assert run(["render", "l.emb", "-o", "b.png"]) == 0
    assert (tmp_path / "a.png").read_bytes() == (tmp_path / "b.png").read_bytes()
    capsys.readouterr()


# -- theorem-check ------------------------------------------------------------------------

def test_theorem_check_small_lattice(tmp_path, monkeypatch, capsys):
    # R=8 keeps the run fast while leaving the capacity tail long enough
    # for the trend fit
    monkeypatch.chdir(tmp_path)
    assert run(["theorem-check", "--family", "lattice_ball", "--R", "8",
                "--paths", "2000", "--trials", "10", "--seed", "20080",
                "-o", "chk"]) == 0
    out = capsys.readouterr().out
    assert "classifier" in out
    d = tmp_path / "chk"
    for name in ("discrete.cap", "pl.cap", "capacity.png", "embedding.png",
                 "polarity.csv", "polarity.png", "report.json",
                 "manifest.json"):
        assert (d / name).exists(), name
    rep = _sorted_keys_everywhere(d / "report.json")
    assert rep["verdict"] == "recurrent-consistent"
    assert all(rep["checks"].values())


# -- manifests and replay -------------------------------------------------------------------

def test_manifest_replay_generate(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    run(["generate", "--family", "hyperbolic_ball", "--R", "2",
         "-o", "h.tri"])
    rep = replay(tmp_path / "h.tri.manifest.json")
    assert rep["all_match"] is True
    assert rep["exit_code"] == rep["exit_code_expected"] == 0
    capsys.readouterr()


def test_manifest_replay_polarity_without_env(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    monkeypatch.setenv("PACKLAB_SEED", "55")
    (tmp_path / "pts.txt").write_text("0 0\n")
    run(["polarity", "--target-points", "pts.txt",
         "--eps", "0.5,0.1,0.05,0.01", "--start", "1", "0",
         "--r-out", "10", "--paths", "500", "-o", "p.csv"])
    monkeypatch.delenv("PACKLAB_SEED")
    rep = replay(tmp_path / "p.csv.manifest.json")
    assert rep["all_match"] is True
    capsys.readouterr()
