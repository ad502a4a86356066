import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import regular_tetrahedron
from lagint.geometry import (
    DegenerateInputError,
    WeightedPoint,
    cap_heights,
    edge_characteristic,
    normalized_dihedral_angle,
    normalized_solid_angle,
    power_distance,
    tetra_characteristic,
    tetra_volume,
    triangle_characteristic,
)

coord = st.floats(-100, 100, allow_nan=False)
vec = st.tuples(coord, coord, coord).map(np.array)
weight = st.floats(0.5, 9.0)


def wp(c, w):
    return WeightedPoint(np.asarray(c, float), w)


@pytest.mark.parametrize(
    "center, w, x, expected",
    [((0, 0, 0), 1.0, (2, 0, 0), 3.0), ((0, 0, 0), 0.0, (0, 0, 0), 0.0), ((1, 1, 1), 2.0, (1, 1, 1), -2.0)],
)
def test_power_distance(center, w, x, expected):
    assert power_distance(wp(center, w), x) == expected


@given(vec, weight, vec, st.floats(-5, 5))
def test_power_distance_shift(c, w, x, s):
    p = wp(c, w)
    assert power_distance(p.shifted(s), x) == pytest.approx(power_distance(p, x) - s, abs=1e-9)


def test_weighted_point_validation():
    with pytest.raises(ValueError):
        wp((np.nan, 0, 0), 1.0)
    with pytest.raises(DegenerateInputError):
        wp((0, 0, 0), -1.0).radius
    assert WeightedPoint.from_radius((0, 0, 0), 1.5).weight == 2.25


@pytest.mark.parametrize(
    "wi, wj, t, x, size",
    [(1.0, 1.0, 0.5, 0.5, -0.75), (4.0, 1.0, 0.875, 1.75, -0.9375)],
)
def test_edge_characteristic(wi, wj, t, x, size):
    d = 1.0 if wi == wj else 2.0
    chp = edge_characteristic(wp((0, 0, 0), wi), wp((d, 0, 0), wj))
    assert chp.t == pytest.approx(t)
    assert np.allclose(chp.center, (x, 0, 0))
    assert chp.size == pytest.approx(size)


def test_edge_characteristic_engulfing():
    chp = edge_characteristic(wp((0, 0, 0), 9.0), wp((2, 0, 0), 1.0))
    assert chp.t == 1.5 and np.allclose(chp.center, (3, 0, 0))


def test_edge_characteristic_coincident():
    with pytest.raises(DegenerateInputError):
        edge_characteristic(wp((1, 2, 3), 1.0), wp((1, 2, 3), 2.0))


@given(vec, vec, weight, weight)
def test_edge_equal_powers(a, b, wa, wb):
    if np.linalg.norm(a - b) < 1e-3:
        return
    pi, pj = wp(a, wa), wp(b, wb)
    chp = edge_characteristic(pi, pj)
    tol = 1e-10 * max(1.0, float(np.abs(chp.center).max()) ** 2)
    assert power_distance(pi, chp.center) == pytest.approx(chp.size, abs=tol)
    assert power_distance(pj, chp.center) == pytest.approx(chp.size, abs=tol)


def test_triangle_equilateral():
    P = [(0, 0, 0), (1, 0, 0), (0.5, np.sqrt(3) / 2, 0)]
    chp, n, h = triangle_characteristic(*(wp(p, 1.0) for p in P))
    assert np.allclose(chp.center, np.mean(P, axis=0))
    assert chp.size == pytest.approx(-2.0 / 3.0)
    assert h == pytest.approx(0.816496580927726)
    assert np.allclose(np.abs(n), (0, 0, 1))
    apex = chp.center + h * n
    for p in P:
        assert np.linalg.norm(apex - p) == pytest.approx(1.0)


def test_triangle_heavier_vertex_repels():
    # a larger ball pushes every radical plane through it away from its center
    P = [(0, 0, 0), (1, 0, 0), (0.5, np.sqrt(3) / 2, 0)]
    base, _, _ = triangle_characteristic(*(wp(p, 1.0) for p in P))
    heavy, _, _ = triangle_characteristic(wp(P[0], 1.2), wp(P[1], 1.0), wp(P[2], 1.0))
    assert np.linalg.norm(heavy.center) > np.linalg.norm(base.center)


def test_triangle_no_apex():
    P = np.array([(0, 0, 0), (1, 0, 0), (0.5, np.sqrt(3) / 2, 0)]) * 3
    chp, _, h = triangle_characteristic(*(wp(p, 1.0) for p in P))
    assert chp.size == pytest.approx(2.0) and h is None


def test_triangle_collinear():
    with pytest.raises(DegenerateInputError):
        triangle_characteristic(wp((0, 0, 0), 1), wp((1, 0, 0), 1), wp((2, 0, 0), 1))


@pytest.mark.parametrize("w", [0.0, 0.3, 1.0])
def test_tetra_regular(w):
    P = regular_tetrahedron()
    chp = tetra_characteristic(*(wp(p, w) for p in P))
    assert np.allclose(chp.center, 0.0, atol=1e-14)
    assert chp.size == pytest.approx(3.0 / 8.0 - w)


def test_tetra_coplanar():
    with pytest.raises(DegenerateInputError):
        tetra_characteristic(*(wp(p, 1) for p in [(0, 0, 0), (1, 0, 0), (0, 1, 0), (1, 1, 0)]))


@given(st.lists(st.tuples(vec, weight), min_size=4, max_size=4), st.floats(-2, 2))
def test_tetra_equal_powers_and_shift(pts, s):
    P = np.array([p for p, _ in pts])
    if abs(np.linalg.det(P[1:] - P[0])) < 1.0:
        return
    gens = [wp(p, w) for p, w in pts]
    chp = tetra_characteristic(*gens)
    pw = [power_distance(g, chp.center) for g in gens]
    scale = max(1.0, float(np.abs(chp.center).max()) ** 2)
    assert np.ptp(pw) <= 1e-8 * scale
    shifted = tetra_characteristic(*(g.shifted(s) for g in gens))
    assert np.allclose(shifted.center, chp.center, rtol=1e-12, atol=1e-9)
    assert shifted.size == pytest.approx(chp.size - s, abs=1e-8 * scale)


def test_solid_angle_octant():
    assert normalized_solid_angle(*np.eye(3)) == pytest.approx(0.125)


def test_solid_angle_regular_tetrahedron():
    P = regular_tetrahedron()
    a, b, c = P[1:] - P[0]
    assert normalized_solid_angle(a, b, c) == pytest.approx(np.arccos(23 / 27) / (4 * np.pi), rel=1e-12)
    assert normalized_solid_angle(a, b, c) == pytest.approx(0.0438699140, abs=1e-10)


def test_solid_angle_obtuse_branch():
    # three nearly coplanar directions spanning most of a hemisphere
    ang = np.deg2rad([0, 120, 240])
    V = np.stack([np.cos(ang), np.sin(ang), np.full(3, -0.05)], axis=1)
    om = normalized_solid_angle(*V)
    assert 0.25 < om < 0.5
    # Monte-Carlo over directions: fraction of the cone spanned by V
    rng = np.random.default_rng(1)
    g = rng.standard_normal((400_000, 3))
    coef = np.linalg.solve(V.T, g.T).T
    frac = np.mean((coef > 0).all(axis=1))
    assert om == pytest.approx(frac, abs=4e-3)


@given(st.integers(0, 10_000))
def test_solid_angle_octants_partition(seed):
    rng = np.random.default_rng(seed)
    F = rng.standard_normal((3, 3))
    if abs(np.linalg.det(F)) < 0.1:
        return
    total = sum(
        normalized_solid_angle(sx * F[0], sy * F[1], sz * F[2])
        for sx in (1, -1) for sy in (1, -1) for sz in (1, -1)
    )
    assert total == pytest.approx(1.0, abs=1e-12)


def test_dihedral():
    assert normalized_dihedral_angle((1, 0, 0), (0, 1, 0)) == pytest.approx(0.25)
    assert normalized_dihedral_angle((0, 0, 1), (0, 0, 2)) == 0.0
    P = regular_tetrahedron()
    a, b, c = P[1] - P[0], P[2] - P[0], P[3] - P[0]
    phi = normalized_dihedral_angle(np.cross(a, b), np.cross(a, c))
    assert phi == pytest.approx(np.arccos(1 / 3) / (2 * np.pi))
    assert phi == pytest.approx(0.195913, abs=1e-6)
    with pytest.raises(DegenerateInputError):
        normalized_dihedral_angle((0, 0, 0), (1, 0, 0))


def test_tetra_volume():
    assert tetra_volume(*np.eye(3)) == pytest.approx(1 / 6)
    P = regular_tetrahedron()
    assert tetra_volume(*(P[1:] - P[0])) == pytest.approx(0.1178511, abs=1e-7)
    assert tetra_volume((1, 0, 0), (0, 1, 0), (1, 1, 0)) == 0.0


@pytest.mark.parametrize(
    "wi, wj, d, hi, hj",
    [
        (1.0, 1.0, 1.0, 0.5, 0.5),
        (4.0, 1.0, 2.0, 0.25, 0.75),
        # internal tangency: ball j lies entirely on i's side of the plane x = 3
        (9.0, 1.0, 2.0, 0.0, 2.0),
    ],
)
def test_cap_heights(wi, wj, d, hi, hj):
    a, b = cap_heights(wp((0, 0, 0), wi), wp((d, 0, 0), wj))
    assert a == pytest.approx(hi, abs=1e-15) and b == pytest.approx(hj, abs=1e-15)


def test_cap_heights_disc_radius():
    hi, hj = cap_heights(wp((0, 0, 0), 4.0), wp((2, 0, 0), 1.0))
    assert hi * (4 - hi) == pytest.approx(0.9375)
    assert hj * (2 - hj) == pytest.approx(0.9375)


@given(vec, st.floats(0.5, 3), st.floats(0.5, 3), st.floats(0.05, 1.0), st.floats(0.0, 2.0))
def test_cap_heights_shared_disc(c, ri, rj, frac, w):
    d = frac * (ri + rj)
    pi = wp(c, ri * ri)
    pj = wp(c + np.array([d, 0, 0]), rj * rj)
    if edge_characteristic(pi, pj).size - w > 0:
        return
    hi, hj = cap_heights(pi, pj, w)
    Ri, Rj = np.sqrt(ri * ri + w), np.sqrt(rj * rj + w)
    assert -1e-12 <= hi <= 2 * Ri + 1e-12 and -1e-12 <= hj <= 2 * Rj + 1e-12
    assert hi * (2 * Ri - hi) == pytest.approx(hj * (2 * Rj - hj), abs=1e-10)


def test_cap_heights_disjoint():
    with pytest.raises(DegenerateInputError):
        cap_heights(wp((0, 0, 0), 1.0), wp((3, 0, 0), 1.0))
