"""Acceptance suite: eleven headline guarantees, one printed PASS line each.

Every test seeds its own instances and verifies against the independent
oracles in tests/_oracles.py wherever an oracle exists.  Wall-time budgets
are asserted where the contract states one.
"""

import dataclasses
import math
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

import _oracles
from rfimlab import animal, bench, curve, ising, polygrow, rng
from rfimlab.field import box_sites, sample_field
from rfimlab.ising import Region

INF = math.inf


def _unit(master, seed, n):
    """n deterministic uniforms keyed on (master, seed)."""
    xs = np.arange(n, dtype=np.int64)
    return rng.uniforms(rng.derive_seed(master, seed), xs,
                        np.zeros(n, dtype=np.int64))


def _grow_set(master, seed, lo, hi, box_n=3):
    """Deterministic connected site set with lo..hi sites inside Λ_box_n."""
    u = _unit(master, seed, 6 * hi + 8)
    want = lo + int(u[0] * (hi - lo + 1)) % (hi - lo + 1)
    cur = {(0, 0)}
    j = 1
    while len(cur) < want and j < len(u):
        frontier = sorted({(v[0] + dx, v[1] + dy)
                           for v in cur for dx, dy in _oracles.NBRS
                           if abs(v[0] + dx) <= box_n
                           and abs(v[1] + dy) <= box_n} - cur)
        if not frontier:
            break
        cur.add(frontier[int(u[j] * len(frontier)) % len(frontier)])
        j += 1
    return frozenset(cur)


# --- 1. ground-state oracle ------------------------------------------------

def test_criterion_01_ground_state_oracle():
    t0 = time.time()
    block = frozenset((x, y) for x in range(4) for y in range(4))
    lam1 = frozenset(box_sites(1))
    checks = 0
    for seed in range(200):
        fld = sample_field(3, seed, 1.0)
        for omega in (lam1, block):
            for bc in ("plus", "minus"):
                gs = ising.ground_state(Region(omega, bc), fld)
                spins, energy = _oracles.exhaustive_ground(
                    omega, fld.value_at, 1.0, bc)
                assert gs.spins == spins
                assert gs.energy == energy  # bit-for-bit
                checks += 1
    elapsed = time.time() - t0
    assert elapsed < 30.0
    print("ACCEPTANCE 1/11 PASS: min-cut ground state == exhaustive minimum "
          "(energy and configuration exact) on %d/%d instances in %.1fs"
          % (checks, checks, elapsed))


# --- 2. flip-condition soundness -------------------------------------------

def test_criterion_02_flip_condition_soundness():
    t0 = time.time()
    omega = frozenset(box_sites(8))
    certs = 0
    for seed in range(500):
        fld = sample_field(8, seed, 1.0)
        gs = ising.ground_state(Region(omega, "minus"), fld)
        cert = animal.flip_certificate(fld, 8)  # raises on any violation
        assert (cert is not None) == (gs.spins[(0, 0)] == 1)
        if cert is None:
            continue
        S = set(cert.sites)
        assert (0, 0) in S and _oracles.connected(S)
        lhs = 1.0 * math.fsum(fld.value_at(v) for v in sorted(S))
        assert lhs >= _oracles.edge_boundary_size(S)
        certs += 1
    print("ACCEPTANCE 2/11 PASS: flip inequality eps*sum(h) >= |boundary| "
          "held on all %d plus-origin certificates out of 500 seeds (%.1fs)"
          % (certs, time.time() - t0))


# --- 3. free-energy difference bound ----------------------------------------

def test_criterion_03_gamma_boundary_bound():
    t0 = time.time()
    eps_cycle = (0.5, 1.0, 2.0)
    worst = INF
    for seed in range(100):
        omega = _grow_set(3101, seed, 4, 16)
        u = _unit(3102, seed, len(omega))
        sites = sorted(omega)
        A = frozenset(v for v, x in zip(sites, u) if x < 0.45)
        if A == omega:
            A = frozenset(sites[:-1])
        fld = sample_field(3, seed, eps_cycle[seed % 3])
        bound = 2.0 * _oracles.edge_boundary_size(omega - A)
        for beta in (0.5, 2.0, INF):
            gamma = ising.gamma(A, omega, fld, beta)
            slack = bound - abs(gamma)
            worst = min(worst, slack)
            assert slack >= -1e-9
    print("ACCEPTANCE 3/11 PASS: |Gamma| <= 2|boundary(Omega\\A)| on 100 "
          "instances x 3 betas, worst slack %.3g (%.1fs)"
          % (worst, time.time() - t0))


# --- 4. increment derivative signs and magnitude ----------------------------

def test_criterion_04_increment_derivative_signs():
    t0 = time.time()
    step = 1e-4
    checked = 0
    for seed in range(50):
        omega = _grow_set(3401, seed, 6, 12)
        sites = sorted(omega)
        u = _unit(3402, seed, len(sites))
        A = {v for v, x in zip(sites, u) if x < 1.0 / 3.0}
        B = {v for v, x in zip(sites, u) if 1.0 / 3.0 <= x < 2.0 / 3.0}
        if not A:
            A = {sites[0]}
            B.discard(sites[0])
        if not B:
            B = {sites[-1]} - A
        if not B:
            continue
        A, B = frozenset(A), frozenset(B - A)
        fld = sample_field(3, seed, 1.0)
        for v in sites + [(4, 4), (-4, -4)]:
            h = fld.value_at(v)
            up = ising.gamma_increment(
                A, B, omega, fld.with_overrides({v: h + step}), 1.0)
            dn = ising.gamma_increment(
                A, B, omega, fld.with_overrides({v: h - step}), 1.0)
            d = (up - dn) / (2.0 * step)
            assert abs(d) <= 2.0 + 1e-4
            if v in B:
                assert d >= -1e-6
            elif v in A:
                assert abs(d) <= 1e-6
            else:
                assert d <= 1e-6
            checked += 1
    print("ACCEPTANCE 4/11 PASS: central-difference derivative of the "
          "increment matched the sign pattern and |d| <= 2 at %d probes "
          "over 50 instances (%.1fs)" % (checked, time.time() - t0))


# --- 5. reduction identity ---------------------------------------------------

def test_criterion_05_reduction_identity():
    t0 = time.time()
    gaps = []
    for seed in range(10):
        fld = sample_field(1, seed, 1.0)
        max_sc, max_c = animal.reduction_identity_check(
            fld, 1, 9, anchored=True)
        assert abs(max_sc - max_c) <= 1e-12  # hull always fits at N=1
        gaps.append(abs(max_sc - max_c))
    exact = 0
    for seed in range(20):
        fld = sample_field(2, 100 + seed, 1.0)
        max_sc, max_c = animal.reduction_identity_check(fld, 2, 8)
        if abs(max_sc - max_c) <= 1e-12:
            exact += 1
    print("ACCEPTANCE 5/11 PASS: simply-connected and connected maxima "
          "agree to 1e-12 on 10/10 exhaustive anchored instances (worst gap "
          "%.3g) and on %d/20 seeded hull-filtered instances, zero "
          "violations (%.1fs)" % (max(gaps), exact, time.time() - t0))


# --- 6. growth validators -----------------------------------------------------

_C6_EPS = (0.2, 0.5, 1.0)


def _c6_worker(i):
    eps = _C6_EPS[i % 3]
    seed = 60000 + i
    fld = sample_field(256, seed, eps)
    state = polygrow.init_growth(256, eps, 0.5, seed=seed)
    report = polygrow.run(state, fld, validators=True)  # raises on violation
    violations = polygrow.validate(state)
    P = report.P_star
    min_side = min(math.hypot(b[0] - a[0], b[1] - a[1])
                   for a, b in zip(P, P[1:] + P[:1]))
    fresh = polygrow.init_growth(256, eps, 0.5, seed=seed)
    replay = polygrow.run(fresh, fld, validators=False)
    same = (replay.P_star == P and fresh.Z == state.Z)
    return list(violations), min_side, same


def test_criterion_06_growth_validators():
    t0 = time.time()
    with ProcessPoolExecutor(max_workers=8) as pool:
        results = list(pool.map(_c6_worker, range(500), chunksize=16))
    assert all(v == [] for v, _m, _s in results)
    min_side = min(m for _v, m, _s in results)
    assert min_side >= 1.0
    assert all(s for _v, _m, s in results)
    print("ACCEPTANCE 6/11 PASS: 500 growth runs at N=256 with zero "
          "validator violations, min final side length %.3g >= 1, and exact "
          "replay reconstruction on every run (%.1fs)"
          % (min_side, time.time() - t0))


# --- 7. curve identities -------------------------------------------------------

def _changing_arc_instance(trial):
    u = _unit(7007, trial, 16)
    p0 = (0.0, 0.0)
    j1 = (4.0 + u[0], 2.0 * u[1] - 1.0)
    j2 = (2.0 * u[2] - 1.0, 4.0 + u[3])
    prefix = curve.Curve((p0, (2.0 + u[4], -1.0 - u[5]), j1))
    arc_a = curve.Curve((j1, (3.0 + 2.0 * u[6], 3.0 + 2.0 * u[7]), j2))
    arc_b = curve.Curve((j1, (1.0 + u[8], 1.0 + u[9]),
                         (2.0 + u[10], 2.0 + u[11]), j2))
    suffix = curve.Curve((j2, (-2.0 - u[12], 1.0 + u[13]), p0))
    return prefix, arc_a, arc_b, suffix


def test_criterion_07_curve_identities():
    t0 = time.time()
    mu = curve.signed_area_measure()
    mug = curve.gaussian_measure(sample_field(10, 2026, 1.0))
    for trial in range(200):
        eta, bps = curve.gen_decomposition(701, trial)
        _c, _s, res = curve.decompose_check(eta, bps, mu)
        assert res == 0.0
        _c, _s, res_g = curve.decompose_check(eta, bps, mug)
        assert abs(res_g) <= 1e-9
    for trial in range(100):
        prefix, arc_a, arc_b, suffix = _changing_arc_instance(trial)
        assert curve.changing_arc_residual(prefix, arc_a, arc_b, suffix,
                                           mu) == 0.0
        assert abs(curve.changing_arc_residual(prefix, arc_a, arc_b, suffix,
                                               mug)) <= 1e-9
    for trial in range(100):
        eta, S = curve.gen_splitting(702, trial)
        assert curve.is_splitting(eta, S)
        assert curve.probe_max_winding(eta, step=0.45) <= 1
        eta, wit = curve.gen_good(703, trial)
        assert curve.is_good(eta, wit)
        assert curve.probe_max_winding(eta, step=0.45) <= 3
    print("ACCEPTANCE 7/11 PASS: 200 coarsenings and 100 changing-arc "
          "instances with signed residual exactly 0 and gaussian residual "
          "<= 1e-9; winding bounds held on 200 certified curves (%.1fs)"
          % (time.time() - t0))


# --- 8. canonical-distance bound ----------------------------------------------

def test_criterion_08_distance_interpolation_bound():
    t0 = time.time()
    worst = 0.0
    for trial in range(200):
        v, w = curve.gen_pair_sequences(801, trial)
        d = curve.d_nu_raster(curve.Curve(tuple(v)), curve.Curve(tuple(w)), 8)
        bound = curve.interpolation_bound(v, w)
        assert d <= bound * 1.02
        worst = max(worst, d / bound)
    print("ACCEPTANCE 8/11 PASS: d_nu_raster <= interpolation bound x 1.02 "
          "on 200/200 pairs, worst ratio %.3f (%.1fs)"
          % (worst, time.time() - t0))


# --- 9. skeleton-length inequality ---------------------------------------------

def test_criterion_09_skeleton_length():
    t0 = time.time()
    checked = 0
    worst = INF
    for kappa in range(2, 65, 2):
        for rho in (0.01, 0.05, 0.1):
            floor = 1.0 + rho * rho * kappa / 40.0
            for trial in range(100):
                v = curve.gen_skeleton(901, trial, kappa, rho)
                lhs, ok = curve.skeleton_length_check(v, rho, 1.0)
                assert ok and lhs >= floor
                worst = min(worst, lhs - floor)
                checked += 1
    print("ACCEPTANCE 9/11 PASS: skeleton length >= 1 + rho^2*kappa/40 on "
          "%d admissible sequences (all even kappa in 2..64 x 3 rhos x 100), "
          "worst margin %.3g (%.1fs)" % (checked, worst, time.time() - t0))


# --- 10. magnetization behavior --------------------------------------------------

def test_criterion_10_magnetization_trend():
    t0 = time.time()
    zero = bench.ExperimentConfig(experiment="mag", N=[4, 8], eps=[0.0],
                                  beta=[INF], samples=25, seed=1001,
                                  workers=4)
    recs = bench.run_experiment(zero)
    assert all(r["m_plus"] == 1.0 and r["m_minus"] == -1.0 for r in recs)
    for _cell, mean, stderr, _n in bench.summarize(recs):
        assert mean == 1.0 and stderr == 0.0

    cfg = bench.ExperimentConfig(experiment="mag", N=[4, 8, 16, 32],
                                 eps=[1.0], beta=[INF], samples=2000,
                                 seed=424242, workers=8)
    rows = bench.summarize(bench.run_experiment(cfg))
    stats = [(cell["N"], mean, se) for cell, mean, se, _n in rows]
    assert [n for n, _m, _s in stats] == [4, 8, 16, 32]
    for (_n1, m1, s1), (_n2, m2, s2) in zip(stats, stats[1:]):
        assert m2 - m1 <= 2.0 * math.hypot(s1, s2)
    elapsed = time.time() - t0
    assert elapsed < 300.0
    print("ACCEPTANCE 10/11 PASS: eps=0 gives m_hat exactly 1; at eps=1 "
          "m_hat(N) = %s is weakly decreasing within 2 stderr over "
          "N=4,8,16,32 (2000 samples, 8 workers, %.0fs < 300s)"
          % (["%.3f" % m for _n, m, _s in stats], elapsed))


# --- 11. trend reports -------------------------------------------------------------

def test_criterion_11_trend_reports(tmp_path):
    t0 = time.time()
    scan = bench.ExperimentConfig(experiment="animal_scan",
                                  N=[8, 16, 32, 64], samples=40,
                                  seed=20260814, workers=8)
    rows = bench.summarize(bench.run_experiment(scan))
    ns = [cell["N"] for cell, _m, _s, _k in rows]
    means = [m for _c, m, _s, _k in rows]
    rho = bench.spearman_rho(ns, means)
    assert rho > 0.0

    psi_cfg = bench.ExperimentConfig(experiment="psi",
                                     eps=[1.5, 1.25, 1.0], beta=[INF],
                                     m_target=0.9, samples=300, n_max=64,
                                     seed=20260815, workers=3)
    psi_recs = bench.run_experiment(psi_cfg)
    psis = [r["psi"] for r in psi_recs]
    assert all(isinstance(p, int) for p in psis)
    assert psis[0] <= psis[1] <= psis[2]  # nondecreasing as eps decreases

    points = [(eps, float(p)) for eps, p in zip((1.5, 1.25, 1.0), psis)]
    fit43 = bench.fit_scaling(points, "eps43")
    fit2 = bench.fit_scaling(points, "eps2")
    assert 0.0 <= fit43.r_squared <= 1.0 and 0.0 <= fit2.r_squared <= 1.0

    # determinism: identical bytes across worker counts and a rerun
    small = bench.ExperimentConfig(experiment="animal_scan", N=[4, 8],
                                   samples=6, seed=515, workers=1)
    blobs = []
    for cfg in (small, dataclasses.replace(small, workers=8), small):
        path = tmp_path / ("scan%d.jsonl" % len(blobs))
        bench.write_records(bench.run_experiment(cfg), path)
        blobs.append(path.read_bytes())
    assert blobs[0] == blobs[1] == blobs[2]
    psmall = bench.ExperimentConfig(experiment="psi", eps=[1.5, 1.25],
                                    beta=[INF], m_target=0.9, samples=60,
                                    n_max=16, seed=616, workers=1)
    pblobs = []
    for cfg in (psmall, dataclasses.replace(psmall, workers=2)):
        path = tmp_path / ("psi%d.jsonl" % len(pblobs))
        bench.write_records(bench.run_experiment(cfg), path)
        pblobs.append(path.read_bytes())
    assert pblobs[0] == pblobs[1]
    print("ACCEPTANCE 11/11 PASS: animal means %s over N=%s (Spearman "
          "rho=%.2f > 0); psi=%s nondecreasing as eps drops 1.5->1.0; "
          "R^2(eps^-4/3)=%.3f R^2(eps^-2)=%.3f; output bytes identical "
          "across reruns and worker counts (%.0fs)"
          % (["%.3f" % m for m in means], ns, rho, psis,
             fit43.r_squared, fit2.r_squared, time.time() - t0))
