import math

import numpy as np
import pytest

import hardy_lab as hl
from hardy_lab.decomp import CellFunction, DecompositionError, space_from_covering
from hardy_lab.inequalities import worker_count


def test_worker_env_fallback(monkeypatch):
    monkeypatch.delenv("HARDY_LAB_WORKERS", raising=False)
    assert worker_count(None) == 1
    monkeypatch.setenv("HARDY_LAB_WORKERS", "3")
    assert worker_count(None) == 3
    assert worker_count(2) == 2


# -- test function catalog --------------------------------------------------------

def test_gradients_match_finite_differences():
    rng = np.random.default_rng(0)
    pts = np.column_stack([rng.uniform(-0.4, 0.4, 60), rng.uniform(0.2, 0.9, 60)])
    d = np.full(60, 0.5)
    for f in (hl.f_linear(), hl.f_bilinear(),
              hl.f_distance_power(hl.profile_demo(), 2.0),
              hl.u_rigid_rotation(), hl.u_shear()):
        assert hl.check_gradient(f, pts, d) < 1e-6


def test_check_gradient_catches_wrong_derivative():
    bad = hl.TestFunction("bad", lambda x: x[:, 0] ** 2,
                          lambda x: np.ones_like(x))
    pts = np.array([[0.3, 0.5]])
    with pytest.raises(ValueError):
        hl.check_gradient(bad, pts, np.array([0.5]))


# -- improved Poincare -------------------------------------------------------------

def test_poincare_constant_function_zero(flat_cov0):
    const = hl.TestFunction("const", lambda x: np.full(len(x), 5.0),
                            lambda x: np.zeros_like(x))
    rep = hl.inequality_ratio("improved_poincare", const, flat_cov0, 0.0, 2.0,
                              samples=5000, seed=1)
    assert rep.ratio == 0.0 and not rep.flags


def test_poincare_unit_square_oracle(flat_cov0):
    rep = hl.inequality_ratio("improved_poincare", hl.f_linear(), flat_cov0,
                              beta=0.0, p=2.0, samples=200_000, seed=0)
    assert rep.ratio == pytest.approx(math.sqrt(1 / 12), rel=0.02)
    assert rep.spread < 0.02


def test_poincare_scaling_invariance(flat_cov0):
    lam = 7.0
    f = hl.f_linear()
    g = hl.TestFunction("scaled", lambda x: lam * f.value(x),
                        lambda x: lam * f.gradient(x))
    r1 = hl.inequality_ratio("improved_poincare", f, flat_cov0, 0.0, 2.0,
                             samples=20_000, seed=3)
    r2 = hl.inequality_ratio("improved_poincare", g, flat_cov0, 0.0, 2.0,
                             samples=20_000, seed=3)
    assert r2.lhs == pytest.approx(lam * r1.lhs, rel=1e-12)
    assert r2.ratio == pytest.approx(r1.ratio, rel=1e-12)


def test_ratio_reproduced_within_recorded_spread(flat_cov0):
    # deterministic seeds: an independent third seed lands within the
    # two-run spread recorded by the report
    f = hl.f_linear()
    rep = hl.inequality_ratio("improved_poincare", f, flat_cov0, 0.0, 2.0,
                              samples=50_000, seed=20)
    other = hl.inequality_ratio("improved_poincare", f, flat_cov0, 0.0, 2.0,
                                samples=50_000, seed=22)
    assert abs(rep.ratio - other.ratio) / rep.ratio <= rep.spread
    assert not rep.low_confidence


def test_determinism_across_workers(demo_cov6):
    f = hl.f_linear()
    a = hl.inequality_ratio("improved_poincare", f, demo_cov6, 0.0, 2.0,
                            samples=20_000, seed=4, workers=1)
    b = hl.inequality_ratio("improved_poincare", f, demo_cov6, 0.0, 2.0,
                            samples=20_000, seed=4, workers=4)
    assert a.lhs == b.lhs and a.rhs == b.rhs


# -- Korn ---------------------------------------------------------------------------

def test_korn_rigid_rotation_in_kernel(flat_cov0):
    rep = hl.inequality_ratio("korn", hl.u_rigid_rotation(), flat_cov0, 0.0, 2.0,
                              samples=5000, seed=0)
    assert rep.ratio == 0.0


def test_korn_shear_finite(demo_cov6):
    rep = hl.inequality_ratio("korn", hl.u_shear(), demo_cov6, 0.0, 2.0,
                              samples=20_000, seed=0)
    assert 0 < rep.ratio < 10
    assert rep.spread < 0.1


def test_korn_requires_vector_field(flat_cov0):
    with pytest.raises(ValueError):
        hl.inequality_ratio("korn", hl.f_linear(), flat_cov0, 0.0, 2.0)
    with pytest.raises(ValueError):
        hl.inequality_ratio("improved_poincare", hl.u_shear(), flat_cov0, 0.0, 2.0)


# -- fractional ----------------------------------------------------------------------

def test_fractional_needs_parameters(demo_cov6):
    with pytest.raises(ValueError):
        hl.inequality_ratio("fractional_poincare", hl.f_linear(), demo_cov6,
                            0.0, 2.0)


def test_fractional_finite_and_reproducible(demo_cov6):
    f = hl.f_linear()
    r1 = hl.inequality_ratio("fractional_poincare", f, demo_cov6, 0.0, 2.0,
                             s=0.5, tau=0.5, samples=20_000, seed=5)
    r2 = hl.inequality_ratio("fractional_poincare", f, demo_cov6, 0.0, 2.0,
                             s=0.5, tau=0.5, samples=20_000, seed=5)
    assert math.isfinite(r1.ratio) and r1.ratio > 0
    assert r1.lhs == r2.lhs and r1.rhs == r2.rhs


def test_fractional_tau_restricts_pairs(demo_cov6):
    # shrinking tau shrinks the admissible pair set, hence the seminorm
    f = hl.f_bilinear()
    wide = hl.inequality_ratio("fractional_poincare", f, demo_cov6, 0.0, 2.0,
                               s=0.4, tau=0.9, samples=30_000, seed=6)
    narrow = hl.inequality_ratio("fractional_poincare", f, demo_cov6, 0.0, 2.0,
                                 s=0.4, tau=0.2, samples=30_000, seed=6)
    assert narrow.rhs < wide.rhs


# -- sweeps --------------------------------------------------------------------------

def test_sweep_empty_grid(demo_cov6):
    assert hl.parameter_sweep("improved_poincare", hl.f_linear(), demo_cov6,
                              [], 2.0) == []


def test_sweep_classical_endpoints(demo_cov6):
    # beta = 0 and beta = 1 - alpha, the two classical regime endpoints
    alpha = demo_cov6.profile.alpha
    rows = hl.parameter_sweep("improved_poincare", hl.f_bilinear(), demo_cov6,
                              [0.0, 1.0 - alpha], 2.0, samples=20_000, seed=7)
    assert [r.beta for r in rows] == [0.0, 0.5]
    for r in rows:
        assert math.isfinite(r.report.ratio)
        assert not r.below_threshold


def test_sweep_threshold_marking(demo_cov6):
    rows = hl.parameter_sweep("improved_poincare", hl.f_bilinear(), demo_cov6,
                              [-0.2, -0.3], 2.0, samples=10_000, seed=8)
    assert not rows[0].below_threshold
    assert rows[1].below_threshold


# -- density splitting ----------------------------------------------------------------

def test_density_split_compact_mean_zero(demo_cov6):
    sp = space_from_covering(demo_cov6, beta=-0.2)
    vals = np.zeros(len(sp.fragments))
    vols = sp.volumes()
    vals[0], vals[1] = 1.0, -vols[0] / vols[1]
    rep = hl.density_split(CellFunction(sp, tuple(vals)), -0.2, 2.0, epsilon=1e-9)
    assert rep.psi == 0.0
    assert rep.g.values == pytest.approx(tuple(vals))
    assert rep.estimate_ok


def test_density_split_pure_weight(demo_cov6):
    sp = space_from_covering(demo_cov6, beta=-0.2)
    F = CellFunction(sp, tuple(float(x) for x in sp.ell ** (-0.4)))
    rep = hl.density_split(F, -0.2, 2.0, epsilon=1e-9)
    assert rep.psi == pytest.approx(1.0, abs=1e-14)
    assert max(abs(v) for v in rep.g.values) == 0.0


def test_density_split_zero(demo_cov6):
    sp = space_from_covering(demo_cov6, beta=-0.2)
    rep = hl.density_split(CellFunction(sp, (0.0,) * len(sp.fragments)),
                           -0.2, 2.0, epsilon=1e-9)
    assert rep.psi == 0.0 and rep.estimate_ok


def test_density_split_random_estimate(demo_cov6):
    sp = space_from_covering(demo_cov6, beta=-0.2)
    rng = np.random.default_rng(11)
    for _ in range(10):
        F = CellFunction(sp, tuple(rng.standard_normal(len(sp.fragments))))
        rep = hl.density_split(F, -0.2, 2.0, epsilon=1e-2)
        assert rep.estimate_ok
        assert abs(rep.g.integral()) <= 1e-10


def test_density_split_epsilon_too_small(demo_cov6):
    sp = space_from_covering(demo_cov6, beta=-0.2)
    rng = np.random.default_rng(12)
    F = CellFunction(sp, tuple(rng.standard_normal(len(sp.fragments))))
    with pytest.raises(DecompositionError, match="truncation"):
        hl.density_split(F, -0.2, 2.0, epsilon=0.0)


def test_density_split_noninteger_weight_rejected(demo_cov6):
    sp = space_from_covering(demo_cov6, beta=-0.3)
    F = CellFunction(sp, (1.0,) * len(sp.fragments))
    with pytest.raises(DecompositionError, match="integrable"):
        hl.density_split(F, -0.3, 2.0, epsilon=1e-3)


def test_graph_distance_mode_smoke(demo_cov6):
    # the exact-distance diagnostic mode: small sample count, deterministic
    f = hl.f_linear()
    r1 = hl.inequality_ratio("improved_poincare", f, demo_cov6, 0.0, 2.0,
                             samples=300, seed=13, d_mode="graph")
    r2 = hl.inequality_ratio("improved_poincare", f, demo_cov6, 0.0, 2.0,
                             samples=300, seed=13, d_mode="graph")
    assert math.isfinite(r1.ratio) and r1.ratio > 0
    assert r1.lhs == r2.lhs and r1.rhs == r2.rhs


def test_cell_function_mean_zero_flag(demo_cov6):
    from hardy_lab.decomp import random_mean_zero
    sp = space_from_covering(demo_cov6, beta=0.0)
    g = random_mean_zero(sp, np.random.default_rng(14))
    assert g.is_mean_zero()
    assert not CellFunction(sp, (1.0,) * len(sp.fragments)).is_mean_zero()


def test_reports_embed_parameters(demo_cov6):
    rep = hl.inequality_ratio("improved_poincare", hl.f_linear(), demo_cov6,
                              0.1, 2.0, samples=5000, seed=9)
    doc = rep.to_json()
    assert doc["params"]["beta"] == 0.1
    assert doc["seed"] == 9
    assert doc["sample_count"] == 5000
