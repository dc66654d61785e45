"""Energy transfer between vertex functions and their interpolations."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import packlab.rng as _rng
from packlab.capacity import cotan_weights, discrete_energy
from packlab.embedding import Embedding
from packlab.errors import (
    BallEscapesDomain,
    ParamOutOfRange,
    PointOutsideDomain,
)
from packlab.transfer import (
    PLFunction,
    SmoothingConfig,
    comparison_suite,
    density_check,
    face_gradients,
    gradient_bound_check,
    interpolate,
    locate,
    pl_energy,
    safe_ball_fraction,
    smooth,
    smoothing_operator,
    star_clearance,
)

SQRT3 = math.sqrt(3.0)


def _affine(emb, a, b, c):
    return interpolate(a * emb.coords[:, 0] + b * emb.coords[:, 1] + c, emb)


# -- exact identities on the unit lattice --------------------------------------

def test_equilateral_gradient_constant(lat4_emb):
    # apex indicator realizes the extremal gradient on an equilateral face
    u = np.zeros(lat4_emb.tri.nv)
    u[0] = 1.0
    out = gradient_bound_check(PLFunction(lat4_emb, u))
    assert out["C_obs"] == pytest.approx(2.0 / SQRT3, abs=1e-10)
    g = _rng.stream(11, 0xF)
    for _ in range(25):
        w = g.standard_normal(lat4_emb.tri.nv)
        got = gradient_bound_check(PLFunction(lat4_emb, w))["C_obs"]
        assert got <= 2.0 / SQRT3 + 1e-9


def test_pl_energy_equals_cotan_energy(hyp75_embs):
    emb = hyp75_embs[2]
    g = _rng.stream(3, 0xE)
    u = g.standard_normal(emb.tri.nv)
    pe = pl_energy(PLFunction(emb, u))
    ce = discrete_energy(emb.tri, u, cotan_weights(emb))
    assert pe == pytest.approx(ce, rel=1e-12)


def test_lattice_safe_ball_fraction(lat4_emb):
    # equilateral star: clearance is the altitude sqrt(3), edges are 2
    assert safe_ball_fraction(lat4_emb) \
        == pytest.approx(0.95 * SQRT3 / 2.0, abs=1e-9)
    assert safe_ball_fraction(lat4_emb, c_obs=0.5) == 0.5
    clear = star_clearance(lat4_emb)
    interior = ~lat4_emb.tri.is_boundary_vertex
    assert clear[interior] == pytest.approx(SQRT3, abs=1e-9)


# -- interpolation ---------------------------------------------------------------

def test_affine_reproduction(lat4_emb):
    f = _affine(lat4_emb, 0.3, -1.2, 0.7)
    g = face_gradients(lat4_emb, f.values)
    assert np.abs(g - [0.3, -1.2]).max() <= 1e-12
    pts = np.array([[0.1, 0.2], [1.5, -0.4], [-2.0, 1.0]])
    want = 0.3 * pts[:, 0] - 1.2 * pts[:, 1] + 0.7
    assert np.abs(f(pts) - want).max() <= 1e-12


def test_locate_reconstructs_points(lat4_emb):
    pts = np.array([[0.05, 0.1], [3.1, 2.2], [-4.0, -0.5]])
    faces, bary = locate(lat4_emb, pts, hint=len(lat4_emb.tri.faces) - 1)
    corners = lat4_emb.coords[lat4_emb.tri.faces[faces]]
    rec = (bary[:, :, None] * corners).sum(axis=1)
    assert np.abs(rec - pts).max() <= 1e-12
    assert (bary >= -1e-12).all()


def test_locate_rejects_outside(lat4_emb):
    with pytest.raises(PointOutsideDomain):
        locate(lat4_emb, np.array([[500.0, 0.0]]))


def test_plfunction_shape_guard(lat4_emb):
    with pytest.raises(ParamOutOfRange):
        PLFunction(lat4_emb, np.zeros(3))


# -- smoothing -------------------------------------------------------------------

def test_smoothing_rows_stochastic_and_local(lat4_emb):
    cfg = SmoothingConfig(seed=4, samples=256)
    S = smoothing_operator(lat4_emb, cfg)
    sums = np.asarray(S.sum(axis=1)).ravel()
    assert np.abs(sums - 1.0).max() <= 1e-12
    tri = lat4_emb.tri
    for x in range(tri.nv):
        row = S.getrow(x)
        support = set(row.indices.tolist())
        if tri.is_boundary_vertex[x]:
            assert support == {x}
            continue
        star = {x} | {int(v) for v in tri.neighbors(x)}
        assert support <= star


def test_smoothing_quadrature_exact_on_affine(lat4_emb):
    f = _affine(lat4_emb, 1.1, 0.4, -2.0)
    cfg = SmoothingConfig(quadrature=True)
    out = smooth(f, cfg)
    interior = ~lat4_emb.tri.is_boundary_vertex
    assert np.abs(out[interior] - f.values[interior]).max() <= 1e-9


def test_smoothing_deterministic(lat4_emb):
    cfg = SmoothingConfig(seed=9, samples=128)
    a = smoothing_operator(lat4_emb, cfg)
    b = smoothing_operator(lat4_emb, cfg)
    assert (a != b).nnz == 0


def test_ball_fraction_too_large(lat4_emb):
    with pytest.raises(BallEscapesDomain):
        smoothing_operator(lat4_emb, SmoothingConfig(c_ball=10.0))


# -- segment point density ----------------------------------------------------------

def _interior_edge(emb):
    tri = emb.tri
    for a, b in tri.edges:
        if not tri.is_boundary_vertex[a] and not tri.is_boundary_vertex[b]:
            return int(a), int(b)
    raise AssertionError("no interior edge")


def test_density_support_and_stability(lat4_emb):
    edge = _interior_edge(lat4_emb)
    r1 = density_check(lat4_emb, edge, SmoothingConfig(seed=1, samples=4096))
    r2 = density_check(lat4_emb, edge, SmoothingConfig(seed=2, samples=4096))
    assert r1["support_ok"] and r2["support_ok"]
    assert r1["inside_fraction"] == 1.0
    assert r1["C_emp"] > 0
    assert abs(math.log(r1["C_emp"] / r2["C_emp"])) <= math.log(2.0)


def test_density_rejects_non_edge(lat4_emb):
    far = lat4_emb.tri.nv - 1
    with pytest.raises(ParamOutOfRange):
        density_check(lat4_emb, (0, far), SmoothingConfig(seed=1))


# -- two-sided comparison --------------------------------------------------------------

def test_comparison_suite_lattice(lat4_emb):
    out = comparison_suite(lat4_emb, trials=40, seed=13)
    assert out["forward_guarantee_ok"]
    assert 0 < out["C_fwd"]
    assert 0 < out["C_bwd"] < 100.0
    assert out["C_obs_grad"] <= 2.0 / SQRT3 + 1e-9
    assert len(out["ratios_fwd"]) == 40
    assert len(out["ratios_bwd"]) == 40
    assert 0 <= out["witness_fwd"] < 40
    assert 0 <= out["witness_bwd"] < 40
    again = comparison_suite(lat4_emb, trials=40, seed=13)
    assert again["C_fwd"] == out["C_fwd"]
    assert again["C_bwd"] == out["C_bwd"]


def test_comparison_suite_hyperbolic(hyp75_embs):
    out = comparison_suite(hyp75_embs[2], trials=25, seed=13)
    assert out["forward_guarantee_ok"]
    assert out["C_bwd"] < 100.0


# -- randomized affine property ----------------------------------------------------------

@settings(max_examples=25, deadline=None)
@given(
    a=st.floats(min_value=-3, max_value=3),
    b=st.floats(min_value=-3, max_value=3),
    c=st.floats(min_value=-5, max_value=5),
)
def test_affine_energy_formula(lat4_emb, a, b, c):
    f = _affine(lat4_emb, a, b, c)
    area = float(lat4_emb.face_areas().sum())
    assert pl_energy(f) == pytest.approx((a * a + b * b) * area,
                                         rel=1e-9, abs=1e-9)
