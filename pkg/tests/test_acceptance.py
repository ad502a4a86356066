"""Acceptance criteria, one test each; every test prints a PASS/FAIL line."""

import time

import numpy as np
import pytest

from oracles import planar_contact_area
from lagint.alpha import angle_coefficients, classify_at, compute_filtration, tetrarings
from lagint.geometry import WeightedPoint, signed_area
from lagint.intersection import (
    arc_points,
    assemble,
    compute_report,
    edge_cap,
    edge_contribution,
    triangle_contribution,
)
from lagint.laguerre import facet_contributions, interior_cell_quantities
from lagint.montecarlo import ci_bound, mc_all
from lagint.solvent import ParameterGrid, li_quantities, sweep
from lagint.synthetic import compact_molecule, jitter_frames, random_cluster
from lagint.triangulation import build, lookup_edges
from lagint.union import union_of_balls


def report(capsys, k, ok, detail, elapsed=None):
    t = "" if elapsed is None else f" [{elapsed:.2f} s]"
    with capsys.disabled():
        print(f"\nCRITERION {k}: {'PASS' if ok else 'FAIL'} - {detail}{t}")
    assert ok, detail


def close(a, b, rel):
    return abs(a - b) <= rel * abs(b)


def test_criterion_01_closed_forms(capsys):
    t0 = time.perf_counter()
    ok = True
    for r in (0.8, 1.0, 1.7, 3.0):
        rep = compute_report(np.zeros((1, 3)), [r * r])
        ok &= close(rep.volume[0], 4 * np.pi / 3 * r ** 3, 1e-9)
        ok &= close(rep.area[0], 4 * np.pi * r ** 2, 1e-9)
    rep = compute_report([[0.0, 0, 0], [1.0, 0, 0]], [1.0, 1.0])
    liv = 4 * np.pi / 3 - np.pi * 0.25 * (1 - 0.5 / 3)
    for k in range(2):
        ok &= close(rep.volume[k], liv, 1e-9) and close(rep.volume[k], 3.534292, 1e-6)
        ok &= close(rep.sphere[k], 3 * np.pi, 1e-9) and close(rep.sphere[k], 9.424778, 1e-6)
        ok &= close(rep.planar[k], 0.75 * np.pi, 1e-9) and close(rep.planar[k], 2.356194, 1e-6)
    dt = time.perf_counter() - t0
    report(capsys, 1, ok and dt < 1.0, f"LIV {rep.volume[0]:.9f} SAS {rep.sphere[0]:.9f} pLIS {rep.planar[0]:.9f}", dt)


def test_criterion_02_partition_identity(capsys):
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    worst = 0.0
    for c in range(25):
        n = int(rng.integers(10, 101))
        fr = random_cluster(n, box=20.0, rmin=1.0, rmax=2.0, seed=c)
        f = compute_filtration(build(fr.centers, fr.weights))
        for w in (0.0, 0.5, 1.4 ** 2, 4.0):
            rep = assemble(f, w)
            vol, area = union_of_balls(f, w)
            worst = max(worst, abs(rep.volume.sum() - vol) / vol, abs(rep.sphere.sum() - area) / area)
    dt = time.perf_counter() - t0
    report(capsys, 2, worst <= 1e-9 and dt < 30, f"25 clusters x 4 weights, max rel deviation {worst:.2e}", dt)


def test_criterion_03_monte_carlo(capsys):
    t0 = time.perf_counter()
    fr = random_cluster(20, box=8.0, seed=0)
    w = 0.5
    rep = compute_report(fr.centers, fr.weights, w)
    est = mc_all(fr.centers, fr.weights, w, n=10 ** 6, seed=0, alpha=0.01)
    analytic = {"liv": rep.volume, "sas": rep.sphere, "plis": rep.planar}
    misses, rel = [], []
    for q, vals in analytic.items():
        for j, (e, a) in enumerate(zip(est[q], vals)):
            if not e.contains(a):
                misses.append(f"{q}[{j}]")
            if a > 0:
                rel.append(abs(e.value - a) / a)
    mean_rel = float(np.mean(rel))
    dt = time.perf_counter() - t0
    ok = not misses and mean_rel <= 3e-3 and dt < 300
    detail = f"{3 * len(fr) - len(misses)}/{3 * len(fr)} in 99% CI, mean rel {mean_rel:.2e}, max rel {max(rel):.2e}"
    if misses:
        detail += f", outside: {', '.join(misses)}"
    report(capsys, 3, ok, detail, dt)


def test_criterion_04_ci_pins(capsys):
    a = ci_bound(0.174, 10 ** 7, 0.01)
    b = ci_bound(0.056, 10 ** 7, 0.01)
    ok = float(f"{a:.3g}") == 1.77e-3 and float(f"{b:.3g}") == 3.34e-3
    report(capsys, 4, ok, f"ci(0.174) = {a:.4e}, ci(0.056) = {b:.4e}")


def test_criterion_05_engulfing(capsys):
    t0 = time.perf_counter()
    rep = compute_report([[0.0, 0, 0], [2.0, 0, 0]], [9.0, 1.0])
    ok = abs(rep.volume[1]) <= 1e-9 and abs(rep.volume[0] - 113.097336) <= 1e-6
    # signed vs unsigned pyramids: a third atom closes the facet of the pair
    # at x = 3, beyond the center of j (t = 1.5); a far shell bounds the cells
    shell = 20.0 * np.array([p for p in np.ndindex(3, 3, 3) if p != (1, 1, 1)], float) - 20.0
    P = np.vstack([[[0.0, 0, 0], [2.0, 0, 0], [4.0, 0, 0]], shell])
    W = np.concatenate([[9.0, 1.0, 1.0], np.ones(len(shell))])
    solvent = np.arange(len(P)) >= 3
    f = compute_filtration(build(P, W))
    fc = facet_contributions(f)
    naive = np.zeros(len(P))
    np.add.at(naive, fc.edges[:, 0], fc.height_i * fc.area / 3)
    np.add.at(naive, fc.edges[:, 1], fc.height_j * fc.area / 3)
    signed = interior_cell_quantities(P, W, solvent=solvent).volume
    e = lookup_edges(f.tri, [[0, 1]])[0]
    ok &= abs(signed[1]) <= 1e-9 and naive[1] > 1.0 and abs(f.edge_t[e] - 1.5) < 1e-12
    dt = time.perf_counter() - t0
    detail = (f"LIV_j = {rep.volume[1]:.1e}, LIV_i = {rep.volume[0]:.6f}; "
              f"t = {f.edge_t[e]:.2f}, signed LV_j = {signed[1]:.1e}, unsigned LV_j = {naive[1]:.4f}")
    report(capsys, 5, ok and dt < 1.0, detail, dt)


def test_criterion_06_weight_invariance(capsys):
    t0 = time.perf_counter()
    ok, n_int, drift = True, 0, 0.0
    for c in range(10):
        fr = random_cluster(60, box=8.0, seed=100 + c)
        a = build(fr.centers, fr.weights)
        b = build(fr.centers, fr.weights + 2.0)
        ok &= np.array_equal(a.tets, b.tets) and np.array_equal(a.edges, b.edges)
        f = compute_filtration(a)
        before = facet_contributions(f)
        r0, r2 = assemble(f, 0.0), assemble(f, 2.0)
        after = facet_contributions(f)
        ok &= all(np.array_equal(getattr(before, k), getattr(after, k)) for k in ("area", "volume_i", "volume_j"))
        # edges whose whole tetraring is in the complex at both weights: their
        # assembled facet parts coincide bitwise
        rings0 = {r.edge: r for r in tetrarings(a, classify_at(f, 0.0)) if r.complete and r.arc_cyclic[:1] == (True,)}
        rings2 = {r.edge: r for r in tetrarings(a, classify_at(f, 2.0)) if r.complete and r.arc_cyclic[:1] == (True,)}
        for e in rings0.keys() & rings2.keys():
            ok &= edge_cap(f, rings0[e]) == edge_cap(f, rings2[e])
            n_int += 1
        ok &= r2.volume.sum() >= r0.volume.sum()
        fb = facet_contributions(compute_filtration(b))
        m = before.complete
        drift = max(drift, float(np.max(np.abs(fb.area[m] - before.area[m]) / np.maximum(before.area[m], 1e-300))))
    dt = time.perf_counter() - t0
    detail = (f"identical tetrahedra, {n_int} interior facet parts bitwise equal; "
              f"rebuild on shifted weights differs by rel {drift:.1e} (rounding of w_i + w)")
    report(capsys, 6, ok and dt < 10, detail, dt)


def _wp(P, W, i):
    return WeightedPoint(P[i], W[i])


def edge_fixtures(count=100):
    """Open-ring edges of random clusters, disconnected and outside-node cases first."""
    special, plain = [], []
    for seed in range(40):
        fr = random_cluster(15, box=7.0, seed=seed)
        f = compute_filtration(build(fr.centers, fr.weights))
        for w in (0.0, 0.5, 1.5):
            c = classify_at(f, w)
            for r in tetrarings(f.tri, c):
                if not r.arcs or (r.complete and r.arc_cyclic[0]):
                    continue
                i, j = r.vertices
                P = f.tri.centers
                axis = (P[j] - P[i]) / np.linalg.norm(P[j] - P[i])
                chains, _ = arc_points(f, r)
                neg = any((signed_area(f.edge_center[r.edge], ch[:-1], ch[1:], axis) < 0).any() for ch in chains)
                item = (f, c, w, r, len(r.arcs) > 1, neg)
                (special if item[4] or item[5] else plain).append(item)
        if sum(x[4] for x in special) >= 4 and len(special) + len(plain) >= 3 * count:
            break
    disc = [x for x in special if x[4]]
    rest = [x for x in special if not x[4]]
    picked = disc[: count // 4] + rest[: count // 2]
    return picked + plain[: count - len(picked)]


def oracle_cap(f, c, w, r):
    P, W = f.tri.centers, f.tri.weights
    _, phi, ct = angle_coefficients(f, c)
    i, j = r.vertices
    base = 0.0
    if phi[r.edge]:
        base += edge_contribution(_wp(P, W, i), _wp(P, W, j), phi[r.edge], w, (i, j)).pair_planar[(i, j)]
    for T in np.flatnonzero((f.tri.triangle_edges == r.edge).any(axis=1)):
        if ct[T] and f.triangle_size[T] - w < -1e-12:
            a, b, k = f.tri.triangles[T]
            tc = triangle_contribution(_wp(P, W, a), _wp(P, W, b), _wp(P, W, k), ct[T], w, (a, b, k))
            base += tc.pair_planar[(i, j)]
    return planar_contact_area(P, W, i, j, w) - base


def test_criterion_07_exterior_cap(capsys):
    fixtures = edge_fixtures(100)
    t0 = time.perf_counter()
    worst = 0.0
    for f, c, w, r, _, _ in fixtures:
        F, _, _ = edge_cap(f, r)
        ref = oracle_cap(f, c, w, r)
        worst = max(worst, abs(F - ref) / max(abs(ref), 1e-12))
    dt = time.perf_counter() - t0
    n_disc = sum(x[4] for x in fixtures)
    n_neg = sum(x[5] for x in fixtures)
    ok = len(fixtures) == 100 and n_disc > 0 and n_neg > 0 and worst <= 1e-8 and dt < 10
    detail = (f"{len(fixtures)} edges ({n_disc} disconnected arcs, {n_neg} with outside nodes), "
              f"max rel deviation {worst:.1e}")
    report(capsys, 7, ok, detail, dt)


def test_criterion_08_optimizer_recovery(capsys):
    t0 = time.perf_counter()
    base = compact_molecule(200, seed=8)
    frames = jitter_frames(base, 20, sigma=0.2, seed=9)
    grid = ParameterGrid(0.1, 40)
    k_star = 14
    w_star = float(grid.values[k_star])
    ref = [li_quantities(compute_report(fr.centers, fr.weights, w_star, fr.labels)) for fr in frames]
    res = sweep(frames, ref, grid)
    ok = True
    lines = []
    for fam in res.families:
        tr = res.trace(fam)
        settled = next((i for i in range(len(tr)) if (np.abs(tr[i:] - k_star) <= 1).all()), None)
        ok &= res.optimum(fam) == k_star and res.E1(fam)[k_star] == 0.0
        ok &= settled is not None and settled + 1 <= 5
        lines.append(f"{fam} k={res.optimum(fam)}")
    dt = time.perf_counter() - t0
    report(capsys, 8, ok and dt < 120, f"k* = {k_star}, E1(k*) = 0, trace settled at frame 1; " + ", ".join(lines), dt)


def test_criterion_09_performance(capsys):
    fr = compact_molecule(5000, seed=0)
    t0 = time.perf_counter()
    rep = compute_report(fr.centers, fr.weights, 1.96, fr.labels)
    dt = time.perf_counter() - t0
    report(capsys, 9, dt < 5.0 and np.isfinite(rep.volume).all(), f"5000 atoms, {len(rep.pairs)} contacts", dt)


def test_criterion_10_not_reproducible(capsys):
    with capsys.disabled():
        print("\nCRITERION 10: NOT REPRODUCIBLE - error ratios and fitted parameters of an explicit-water "
              "protein trajectory need that trajectory and an external tool; covered by criteria 2, 3, 7 and 8")
    pytest.skip("requires external trajectory data")
