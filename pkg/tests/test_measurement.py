import numpy as np
import pytest

from quasimeas.errors import DomainError
from quasimeas.measurement import (
    ensemble_run,
    critical_sweep,
    make_rng,
    run_measurement,
    sample_outcome,
    weak_g_run,
)
from quasimeas.potentials import InvertedMorse
from quasimeas.states import born_probability, von_neumann_projected_state


def test_rng_construction_and_passthrough():
    a = make_rng(42)
    b = make_rng(42)
    assert a.uniform() == b.uniform()
    g = np.random.default_rng(0)
    assert make_rng(g) is g


def test_sampling_is_deterministic_per_seed(spec_std, n0_half):
    draws_1 = [sample_outcome(n0_half, spec_std, make_rng(7)) for _ in range(5)]
    draws_2 = [sample_outcome(n0_half, spec_std, make_rng(7)) for _ in range(5)]
    assert draws_1 == draws_2
    rng = make_rng(7)
    seq = [sample_outcome(n0_half, spec_std, rng) for _ in range(100)]
    assert set(seq) == {1, -1}


def test_born_statistics_within_binomial_error(spec_std, device_std, n0_half):
    p = born_probability(n0_half, spec_std, 1)
    assert p == pytest.approx(0.625, rel=1e-12)
    stats = ensemble_run(n0_half, spec_std, device_std, 100_000, seed=123, integrate=False)
    assert stats.born_p_plus == pytest.approx(p, rel=1e-12)
    assert stats.count_plus + stats.count_minus == stats.n_runs
    assert abs(stats.z_score) < 4.0
    # identical seed reproduces the exact counts
    again = ensemble_run(n0_half, spec_std, device_std, 100_000, seed=123, integrate=False)
    assert again.count_plus == stats.count_plus


def test_ensemble_branch_deviations(spec_std, device_std, cfg_std, n0_half):
    stats = ensemble_run(n0_half, spec_std, device_std, 10, seed=5, integ_cfg=cfg_std)
    assert set(stats.deviations) == {1, -1}
    assert stats.deviations[1] < 1e-6
    assert stats.deviations[-1] < 1e-6


def test_ensemble_skips_zero_weight_branch(spec_std, device_std, cfg_fast):
    n0 = spec_std.direction  # pure +1 eigenstate
    stats = ensemble_run(n0, spec_std, device_std, 50, seed=1, integ_cfg=cfg_fast)
    assert stats.count_plus == 50
    assert set(stats.deviations) == {1}
    assert stats.z_score == 0.0
    with pytest.raises(DomainError):
        ensemble_run(n0, spec_std, device_std, 0, seed=1)


def test_single_measurement_record(spec_std, device_std, cfg_std, n0_half):
    rec = run_measurement(n0_half, spec_std, device_std, make_rng(99), cfg_std)
    assert rec.lam in (1, -1)
    assert rec.p_lam == born_probability(n0_half, spec_std, rec.lam)
    vn = von_neumann_projected_state(n0_half, spec_std, rec.lam).vec
    assert np.allclose(rec.vn_reference, vn)
    # the selected branch converges to the eigenstate = the projected state
    assert rec.deviation < 1e-6
    assert np.allclose(rec.final_n, rec.trajectory.final_n)


def test_critical_sweep_pattern(spec_std, n0_half):
    Thetas = [np.pi / 3, np.pi / 2 - 0.01, np.pi / 2, np.pi / 2 + 0.01]
    rows = critical_sweep(
        n0_half,
        spec_std,
        theta=3 * np.pi / 4,
        Theta_values=Thetas,
        profile=InvertedMorse(2e8, 1e5),
        lams=(1,),
    )
    assert [r.Theta for r in rows] == Thetas
    by_Theta = {r.Theta: r for r in rows}
    # away from critical: convergence to +axis
    assert by_Theta[Thetas[0]].deviation < 1e-6
    assert by_Theta[Thetas[1]].deviation < 1e-6
    # at critical: stalled between the eigenstates
    assert abs(by_Theta[Thetas[2]].final_axis_component) < 0.5
    # beyond critical: the branch converges to the opposite eigenstate
    assert by_Theta[Thetas[3]].final_axis_component == pytest.approx(-1.0, abs=1e-6)


def test_critical_sweep_skips_inadmissible(spec_std, n0_half):
    # theta = 0.1 with alpha = pi/2 admits only Theta near pi/2
    rows = critical_sweep(
        n0_half,
        spec_std,
        theta=0.1,
        Theta_values=[0.2, np.pi / 2],
        profile=InvertedMorse(2e8, 1e5),
        integ_cfg=None,
        lams=(1,),
    )
    assert [r.Theta for r in rows] == [np.pi / 2]


def test_weak_driving_leaves_state_precessing(spec_std, n0_half):
    res = weak_g_run(n0_half, spec_std, g0_fraction=1e-4)
    # far from projection: large residual transverse amplitude
    assert res.deviation > 0.5
    assert res.residual_transverse > 0.1
    # collapse improves monotonically with the driving fraction
    res_mid = weak_g_run(n0_half, spec_std, g0_fraction=10**-2.5)
    assert res_mid.deviation < res.deviation
    assert 1e-3 < res_mid.deviation < 0.1
    # but still inside the Bloch ball and a valid trajectory
    assert np.max(res.trajectory.norm) <= 1.0 + 1e-8
    with pytest.raises(DomainError):
        weak_g_run(n0_half, spec_std, g0_fraction=0.0)
