import math

import numpy as np
import pytest

from naming_game import (
    BranchMissingError,
    ModelParams,
    classify_stability,
    critical_alpha,
    critical_unilateral_zealot_fraction,
    cusp_zealot_fraction,
    beak_diagram,
    find_steady_states,
    geometric_distribution,
    mean_field_derivative,
    perturbation_experiment,
    rho_b_curve,
    self_consistency_residual,
    symmetric_gap_curve,
    symmetric_tipping_threshold,
    zealot_density_for_steady,
)

import properties


def closed_form_k2(m):
    # for K = 2 the curve rho_B(m) simplifies to (2m-1)(1-m)/(1+m)
    return (2 * m - 1) * (1 - m) / (1 + m)


def test_residual_examples():
    p = ModelParams(2)
    assert self_consistency_residual(2 / 3, p) == pytest.approx(1 / 21, abs=1e-15)
    pz = ModelParams(2, 0.0, 1 / 15)
    assert self_consistency_residual(2 / 3, pz) == pytest.approx(0.0, abs=1e-15)
    for K in (2, 3, 10):
        psym = ModelParams(K, 0.17, 0.17)
        assert self_consistency_residual(0.5, psym) == pytest.approx(0.0, abs=1e-15)
    # array evaluation matches scalars
    ms = np.linspace(0.0, 1.0, 11)
    vec = self_consistency_residual(ms, pz)
    assert np.allclose(vec, [self_consistency_residual(float(m), pz) for m in ms], atol=1e-15)
    assert self_consistency_residual(0.0, pz) == pytest.approx(0.0, abs=1e-15)  # g(0) = z_A
    assert self_consistency_residual(1.0, pz) == pytest.approx(-pz.z_b, abs=1e-15)  # g(1) = -z_B


def test_no_zealot_steady_states():
    ss = find_steady_states(ModelParams(2))
    assert [s.m for s in ss] == [0.0, 0.5, 1.0]
    assert [s.stability for s in ss] == ["stable", "unstable", "stable"]


def test_unilateral_roots_quadratic():
    # z_B = 0.05, K = 2: interior roots of 2m^2 - 2.95m + 1.05 = 0
    ss = find_steady_states(ModelParams(2, 0.0, 0.05))
    ms = [s.m for s in ss]
    assert len(ms) == 3 and ms[0] == 0.0
    assert ms[1] == pytest.approx(0.6, abs=1e-8)
    assert ms[2] == pytest.approx(0.875, abs=1e-8)
    assert [s.stability for s in ss] == ["stable", "unstable", "stable"]


def test_supercritical_zealots_leave_one_state():
    ss = find_steady_states(ModelParams(2, 0.0, 0.1))  # 0.1 > 7 - 4 sqrt(3)
    assert len(ss) == 1 and ss[0].m == 0.0 and ss[0].stability == "stable"


def test_k1_continuum_and_zealot_pinning():
    ss = find_steady_states(ModelParams(1))
    assert ss.continuum and len(ss) == 0
    ss = find_steady_states(ModelParams(1, 0.1, 0.3))
    assert not ss.continuum and len(ss) == 1
    assert ss[0].m == pytest.approx(0.25, abs=1e-9)  # z_A/(z_A+z_B)
    assert ss[0].stability == "stable"


def test_steady_states_are_derivative_roots():
    for params in (ModelParams(3), ModelParams(3, 0.0, 0.06), ModelParams(4, 0.1, 0.2)):
        for s in find_steady_states(params):
            assert np.max(np.abs(mean_field_derivative(s.dist).d)) < 1e-8


def test_classify_examples():
    verdict, lead = classify_stability(geometric_distribution(0.5, ModelParams(3)))
    assert verdict == "unstable" and lead > 0
    verdict, _ = classify_stability(geometric_distribution(0.0, ModelParams(2, 0.0, 0.05)))
    assert verdict == "stable"
    verdict, _ = classify_stability(geometric_distribution(0.5, ModelParams(2, 0.2, 0.2)))
    assert verdict == "stable"
    verdict, lead = classify_stability(geometric_distribution(0.37, ModelParams(1)))
    assert verdict == "marginal" and abs(lead) <= 1e-7
    with pytest.raises(ValueError):
        classify_stability(geometric_distribution(0.77, ModelParams(3)))  # not a fixed point


def test_zealot_density_examples():
    assert zealot_density_for_steady(0.6, 2) == pytest.approx((0.05, True))
    assert zealot_density_for_steady(0.5, 2).rho_b == pytest.approx(0.0, abs=1e-15)
    assert zealot_density_for_steady(0.75, 3).rho_b == pytest.approx(2 / 17, abs=1e-15)
    below = zealot_density_for_steady(0.3, 4)
    assert not below.valid and below.rho_b < 0
    with pytest.raises(ValueError):
        zealot_density_for_steady(1.0, 2)


def test_rho_b_curve_against_closed_form():
    arr = rho_b_curve(2, 500)
    assert arr.shape == (500, 2)
    assert np.all((0.5 < arr[:, 0]) & (arr[:, 0] < 1.0))
    assert np.max(np.abs(arr[:, 1] - closed_form_k2(arr[:, 0]))) < 1e-12
    with pytest.raises(ValueError):
        rho_b_curve(2, 2)


def test_rho_b_curve_unimodal_and_concave():
    for K in (2, 3, 4, 10):
        vals = rho_b_curve(K, 500)[:, 1]
        d1 = np.diff(vals)
        assert np.sum(np.diff(np.sign(d1)) != 0) == 1  # one peak
        d2 = np.diff(vals, 2)
        assert np.all(d2 < 0.0) or np.all(d2 > 0.0)
    # both tails fall back toward zero
    tails = rho_b_curve(2, 2000)
    assert tails[0, 1] < 1e-3 and tails[-1, 1] < 1e-3


def test_critical_unilateral_fraction():
    rb, m_star = critical_unilateral_zealot_fraction(2)
    assert rb == pytest.approx(7 - 4 * math.sqrt(3), abs=1e-8)
    assert m_star == pytest.approx(math.sqrt(3) - 1, abs=1e-8)
    rb3, m3 = critical_unilateral_zealot_fraction(3)
    assert 0 < rb3 < 0.5 and 0.5 < m3 < 1
    stars = [critical_unilateral_zealot_fraction(K)[0] for K in (2, 3, 4, 10)]
    assert stars == sorted(stars)  # taller curves for more opinion steps
    with pytest.raises(ValueError):
        critical_unilateral_zealot_fraction(1)


def test_critical_alpha_and_cusp():
    assert critical_alpha(2) == 0.75 and cusp_zealot_fraction(2) == 0.125
    assert critical_alpha(3) == pytest.approx(0.6) and cusp_zealot_fraction(3) == pytest.approx(0.20)
    assert critical_alpha(10) == 0.25 and cusp_zealot_fraction(10) == 0.375


def test_beak_cells():
    # three states inside the beak, one beyond the cusp or past the fold
    assert len(find_steady_states(ModelParams(2, 0.05, 0.05))) == 3
    assert len(find_steady_states(ModelParams(2, 0.13, 0.13))) == 1
    assert len(find_steady_states(ModelParams(2, 0.30, 0.0))) == 1


def test_beak_grid_structure():
    grid = beak_diagram(2, res=0.25, max_z=0.5)
    ns = grid.tables["n_steady"]
    assert ns.shape == (3, 3)
    assert ns[0, 0] == 3  # no zealots
    assert ns[2, 2] == 0  # z_a + z_b = 1: out of domain
    assert grid.tables["n_stable"][0, 0] == 2
    za = grid.axes[0].values()
    assert np.allclose(za, [0.0, 0.25, 0.5])
    with pytest.raises(ValueError):
        grid.tables["n_steady"][0, 0] = 5  # tables are frozen


def test_beak_jobs_match_serial():
    a = beak_diagram(3, res=0.1, max_z=0.3)
    b = beak_diagram(3, res=0.1, max_z=0.3, jobs=3)
    assert np.array_equal(a.tables["n_steady"], b.tables["n_steady"])
    assert np.array_equal(a.tables["n_stable"], b.tables["n_stable"])


def test_gap_curve_matches_closed_form():
    # for K = 2 the symmetric roots are [1 +- sqrt(1-8z)]/2, so the gap is
    # sqrt(1-8z) below the cusp and 0 above it
    grid = symmetric_gap_curve(2, res=0.01)
    zs = grid.axes[0].values()
    gaps = grid.tables["gap"]
    expect = np.sqrt(np.maximum(1.0 - 8.0 * zs, 0.0))
    assert np.max(np.abs(gaps - expect)) < 1e-7
    assert gaps[0] == pytest.approx(1.0)
    assert np.all(gaps[zs >= 0.125 + 0.01] == 0.0)
    jb = symmetric_gap_curve(2, res=0.01, jobs=2)
    assert np.array_equal(gaps, jb.tables["gap"])


def test_tipping_threshold_matches_formula():
    for K in (2, 3, 4, 10):
        z_c = symmetric_tipping_threshold(K)
        assert z_c == pytest.approx(cusp_zealot_fraction(K), abs=1e-4)


def test_perturbation_basics():
    params = ModelParams(3, 0.0, 0.06)
    rec = perturbation_experiment(params, "mid", eps=1e-6, t_end=80.0, seed=0)
    assert rec.verdict == "grew"
    assert rec.d[0] == pytest.approx(1e-6, abs=1e-12)
    assert rec.times[0] == 0.0 and rec.times[-1] == pytest.approx(80.0)
    rec = perturbation_experiment(params, "high", eps=1e-6, t_end=80.0, seed=0)
    assert rec.verdict == "decayed"
    rec = perturbation_experiment(params, "low", eps=1e-6, t_end=80.0, seed=0)
    assert rec.verdict == "decayed"


def test_perturbation_clipped_start_keeps_magnitude():
    # the high branch at K = 10 has rho_0 ~ 1e-8, so random kicks get
    # clipped onto the simplex; the initial distance must still be eps
    params = ModelParams(10, 0.0, 0.13)
    for seed in range(5):
        rec = perturbation_experiment(params, "high", eps=1e-6, t_end=5.0, seed=seed)
        assert rec.d[0] == pytest.approx(1e-6, abs=1e-12)


def test_perturbation_errors():
    with pytest.raises(BranchMissingError):
        perturbation_experiment(ModelParams(2, 0.0, 0.2), "mid", seed=0)
    with pytest.raises(BranchMissingError):
        perturbation_experiment(ModelParams(1), "low", seed=0)
    with pytest.raises(ValueError):
        perturbation_experiment(ModelParams(2, 0.0, 0.05), "mid", eps=0.01, seed=0)
    with pytest.raises(ValueError):
        perturbation_experiment(ModelParams(2, 0.0, 0.05), "middle", seed=0)


def test_verdicts_agree_with_eigenvalues():
    # trajectory-level behaviour must match the Jacobian verdict on every
    # branch: growth off unstable states, decay back onto stable ones
    configs = ((2, 0.05), (3, 0.06), (10, 0.13))
    for K, z_b in configs:
        params = ModelParams(K, 0.0, z_b)
        ss = find_steady_states(params)
        for branch, state in (("low", ss[0]), ("mid", ss[1]), ("high", ss[2])):
            for seed in range(20):
                rec = perturbation_experiment(params, branch, eps=1e-6, t_end=80.0, seed=seed)
                expect = "grew" if state.stability == "unstable" else "decayed"
                assert rec.verdict == expect, (K, branch, seed, rec.verdict)


def test_odd_root_count_property():
    properties.check_odd_root_count()


def test_symmetry_property():
    properties.check_symmetry()
