"""Randomized polygon growth: geometry, decisions, replay, validators."""

import math

import numpy as np
import pytest

from rfimlab import geom, polygrow
from rfimlab.errors import DomainError, PreconditionError, ValidationViolation
from rfimlab.field import sample_field, zero_field


def _state(N=256, eps=1.0, m=0.5, seed=0, mode="lattice_simplified"):
    return polygrow.init_growth(N, eps, m, seed=seed, mode=mode)


def test_delta_formula():
    st = _state(N=16, eps=0.1, m=0.5)
    assert st.delta == pytest.approx(1e-2 * 0.05 ** (2.0 / 3.0), rel=1e-12)
    assert st.delta == pytest.approx(1.3572088082974532e-3, rel=1e-9)


def test_n_star_examples():
    for N, want in ((256, 2), (16, 1), (4096, 3), (15, 1), (1, 1),
                    (65536, 4)):
        assert _state(N=N).n_star == want


def test_initial_square_ccw_from_bottom():
    st = _state(N=8)
    assert st.sides[0] == ((-8.0, -8.0), (8.0, -8.0))  # bottom, left->right
    assert st.sides[1] == ((8.0, -8.0), (8.0, 8.0))
    assert st.perim1 == 64.0
    cont = _state(N=8, mode="continuum")
    assert cont.sides[0] == ((-4.0, -4.0), (4.0, -4.0))
    assert cont.perim1 == 32.0


def test_proposal_geometry_quarter_points():
    """Side of length 4 with delta = 0.5: base 2, height 0.5, T* height 1/6."""
    st = _state(N=16)
    st.delta = 0.5
    st.sides = [((-2.0, 0.0), (2.0, 0.0))] + st.sides[1:]
    pair = polygrow.propose_triangle(st, 1)
    a, b, q = pair.T
    assert a == (-1.0, 0.0) and b == (1.0, 0.0)
    assert pair.r == 1.0 and pair.height == 0.5
    assert q == (0.0, -0.5)  # outward of a CCW bottom side points down
    assert geom.triangle_area(a, b, q) == pytest.approx(0.5, abs=1e-12)
    t1, t2, _q = pair.T_star
    assert t1[1] == pytest.approx(-1.0 / 3.0, abs=1e-12)
    assert abs(t2[0] - (-t1[0])) < 1e-12
    # T* height above its own base
    assert abs(q[1] - t1[1]) == pytest.approx(1.0 / 6.0, abs=1e-12)


def test_continuum_triangle_weight_example():
    """lambda(T) for continuum: area = eps^(2/3) l^2 / 32."""
    st = _state(N=64, eps=0.7, mode="continuum")
    pair = polygrow.propose_triangle(st, 1)
    length = geom.dist(*st.sides[0])
    area = geom.triangle_area(*pair.T)
    assert area == pytest.approx(0.7 ** (2.0 / 3.0) * length**2 / 32.0,
                                 rel=1e-12)


def test_run_is_deterministic_replay():
    fld = sample_field(256, 11, 1.0)
    s1 = _state(seed=11)
    s2 = _state(seed=11)
    polygrow.run_stages(s1, fld)
    polygrow.run_stages(s2, fld)
    assert s1.Z == s2.Z
    assert polygrow.polygon_vertices(s1) == polygrow.polygon_vertices(s2)
    assert s1.stage_sides_history == s2.stage_sides_history


def test_criterion6_config_all_reject_is_degenerate_gate():
    """At N=256, m=0.5: T* holds no lattice site, so every Z is 0."""
    fld = sample_field(256, 5, 1.0)
    st = _state(N=256, eps=1.0, m=0.5, seed=5)
    polygrow.run_stages(st, fld)
    assert set(st.Z.values()) == {0}
    assert len(st.sides) == 16 and st.n == 2
    # rejected children stay on the original square: perimeter unchanged
    verts = polygrow.polygon_vertices(st)
    assert geom.polygon_perimeter(verts) == pytest.approx(8.0 * 256,
                                                          abs=1e-9)
    assert polygrow.validate(st) == []


def test_accept_branch_structure():
    """m=0.98 puts a lattice row inside T*, so accepts happen."""
    accepts = 0
    for seed in range(12):
        fld = sample_field(256, 400 + seed, 1.0)
        st = _state(N=256, eps=1.0, m=0.98, seed=seed)
        polygrow.run_stages(st, fld)
        assert polygrow.validate(st) == []
        pairs = polygrow._decided_pairs(st)
        for (n, i), z in sorted(st.Z.items()):
            pair = next(p for pn, pi, p, pz in pairs
                        if (pn, pi) == (n, i))
            kids = st.stage_sides_history[n + 1][4 * (i - 1): 4 * i]
            a, b, q = pair.T
            if z:
                accepts += 1
                want = (pair.A, a, q, b, pair.B)
            else:
                mid = (0.5 * (pair.A[0] + pair.B[0]),
                       0.5 * (pair.A[1] + pair.B[1]))
                want = (pair.A, a, mid, b, pair.B)
            got = (kids[0][0], kids[1][0], kids[2][0], kids[3][0],
                   kids[3][1])
            assert got == want
    assert accepts >= 3


def test_eps_zero_grows_nothing():
    fld = zero_field(16)
    st = _state(N=16, eps=0.0, m=0.5)
    report = polygrow.run(st, fld)
    assert len(report.P_star) == 4
    assert report.lattice_boundary == 132  # |d[-16,16]^2|
    assert report.gamma_value == 0.0 and report.certificate_ratio == 0.0
    assert len(report.lattice_xs) == 33 * 33
    assert report.violations == []


def test_step_past_n_star_raises():
    fld = zero_field(16)
    st = _state(N=16)
    with pytest.raises(DomainError):
        polygrow.step(st, fld)  # n* = 1: no decisions exist


def test_preconditions():
    with pytest.raises(PreconditionError):
        polygrow.init_growth(0, 1.0, 0.5)
    with pytest.raises(PreconditionError):
        polygrow.init_growth(16, -1.0, 0.5)
    with pytest.raises(PreconditionError):
        polygrow.init_growth(16, 1.0, 1.0)
    with pytest.raises(PreconditionError):
        polygrow.init_growth(16, 1.0, 0.5, mode="bogus")


def _completed_run(seed=5):
    fld = sample_field(256, seed, 1.0)
    st = _state(N=256, eps=1.0, m=0.5, seed=seed)
    polygrow.run_stages(st, fld)
    return st, fld


def test_fault_injection_duplicate_accepted_side():
    st, _fld = _completed_run()
    hist = list(st.stage_sides_history[1])
    hist[1] = hist[0]  # side 2 becomes a copy of side 1
    st.stage_sides_history[1] = tuple(hist)
    st.Z[(1, 1)] = 1
    st.Z[(1, 2)] = 1
    violations = polygrow.validate(st)
    assert any(v.startswith("same-stage-triangle-overlap") for v in violations)
    assert any(v.startswith("decision-region-overlap") for v in violations)


def test_fault_injection_replay_corruption():
    st, _fld = _completed_run()
    hist = list(st.stage_sides_history[2])
    (ax, ay), B = hist[3]
    hist[3] = ((ax + 1e-9, ay), B)
    st.stage_sides_history[2] = tuple(hist)
    violations = polygrow.validate(st)
    assert any(v.startswith("replay-mismatch") for v in violations)


def test_fault_injection_out_of_bounds():
    st, _fld = _completed_run()
    far = 3.0 * st.N
    hist = list(st.stage_sides_history[1])
    hist[0] = ((-far, -far), (far, -far))
    st.stage_sides_history[1] = tuple(hist)
    violations = polygrow.validate(st)
    assert any(v.startswith("triangle-out-of-bounds") for v in violations)


def test_run_raises_on_corrupt_state():
    st, fld = _completed_run(seed=9)
    hist = list(st.stage_sides_history[2])
    (ax, ay), B = hist[0]
    hist[0] = ((ax + 1e-9, ay), B)
    st.stage_sides_history[2] = tuple(hist)
    with pytest.raises(ValidationViolation):
        polygrow._check(st)


def test_monotone_coupling_lattice():
    """Raising h inside accepted T* / lowering inside rejected T* keeps Z."""
    fld = sample_field(256, 400 + 2, 1.0)  # seed with accepts at m=0.98
    st = _state(N=256, eps=1.0, m=0.98, seed=2)
    polygrow.run_stages(st, fld)
    pairs = polygrow._decided_pairs(st)
    overrides = {}
    for n, i, pair, z in pairs:
        xs, ys = geom.triangle_lattice_points(*pair.T_star)
        if not len(xs):
            continue
        v = (int(xs[0]), int(ys[0]))
        h0 = float(fld.values_at(np.array([v[0]]), np.array([v[1]]))[0])
        overrides[v] = h0 + 5.0 if z else h0 - 5.0
    assert overrides  # the coupling must actually perturb something
    st2 = _state(N=256, eps=1.0, m=0.98, seed=2)
    polygrow.run_stages(st2, fld.with_overrides(overrides))
    assert st2.Z == st.Z
    assert polygrow.polygon_vertices(st2) == polygrow.polygon_vertices(st)


def test_continuum_positive_drift():
    """Accepted-minus-rejected field gain per stage is positive on average."""
    total = 0.0
    runs = 12
    for seed in range(runs):
        fld = sample_field(4096, 7000 + seed, 0.5)
        st = _state(N=4096, eps=0.5, m=0.5, seed=seed, mode="continuum")
        polygrow.run_stages(st, fld, validators=False)
        total += sum(s["eps_gain"] for s in st.stage_stats.values())
    assert total / runs > 0.0


def test_continuum_validators_clean():
    fld = sample_field(4096, 31, 0.5)
    st = _state(N=4096, eps=0.5, m=0.5, seed=31, mode="continuum")
    polygrow.run_stages(st, fld, validators=False)
    assert polygrow.validate(st) == []


def test_report_certificate_quantities():
    fld = sample_field(256, 3, 1.0)
    st = _state(N=256, eps=1.0, m=0.5, seed=3)
    report = polygrow.run(st, fld)
    xs, ys = report.lattice_xs, report.lattice_ys
    want_gamma = st.epsilon * float(np.sum(fld.values_at(xs, ys)))
    assert report.gamma_value == pytest.approx(want_gamma, rel=1e-12)
    assert report.certificate_ratio == pytest.approx(
        report.gamma_value / report.lattice_boundary, rel=1e-12)
    assert report.perimeter == pytest.approx(8.0 * 256, abs=1e-9)
    assert report.lattice_boundary <= math.sqrt(2) * report.perimeter \
        + 2 * len(report.P_star) + 1e-9
