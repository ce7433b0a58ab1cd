import math

import numpy as np
import pytest

from app.exceptions import InputValidationError
from app.models.certificate import AtomicMeasure
from app.models.sampling import ShiftFunction
from app.services.dyadic_assembly import quadratic_form
from app.services.gp_sampler import (
    MonteCarloRunner,
    clopper_pearson,
    default_step,
    discretize_for_sampling,
    fit_log_decay,
    mc_lemma_event,
    mc_persistence,
    mc_second_moment,
    mc_sweep,
    orthant_probability,
    persistence_grid,
    persistence_indicator,
    sample_path,
    sample_paths,
)
from app.services.spectral_measure import atomic_measure, covariance
from app.utils.rng import trial_normals, trial_seed


def _within(estimate, expected, k=4.0, slack=0.0):
    """추정치가 기대값에서 k 표준오차 (+ 격자 편향 slack) 이내인지"""
    se = math.sqrt(max(expected * (1.0 - expected), 1e-12) / estimate.trials)
    return abs(estimate.p_hat - expected) <= k * se + slack


# ============================================
# 난수 스트림
# ============================================
def test_trial_streams_do_not_depend_on_blocking():
    whole = trial_normals(7, 0, 10, 4)
    split = np.vstack([trial_normals(7, 0, 3, 4), trial_normals(7, 3, 7, 4)])
    np.testing.assert_array_equal(whole, split)
    assert trial_seed(7, 0) != trial_seed(7, 1)
    assert trial_seed(7, 0) != trial_seed(8, 0)


def test_runner_blocks_cover_all_trials():
    runner = MonteCarloRunner(workers=3, block_size=100)
    blocks = runner.blocks(250)
    assert blocks == [(0, 100), (100, 100), (200, 50)]
    assert runner.run(250, lambda start, count: count) == 250


# ============================================
# 표본 경로
# ============================================
def test_grid_and_default_step(single_atom):
    np.testing.assert_allclose(persistence_grid(1.0, 0.25), [0.0, 0.25, 0.5, 0.75, 1.0])
    assert persistence_grid(0.0, 0.1).size == 1
    assert default_step(single_atom, 2.0) == pytest.approx(0.002)
    assert default_step(single_atom, 100.0) == pytest.approx(0.01 / 0.3)
    with pytest.raises(InputValidationError):
        persistence_grid(0.1, 0.5)
    with pytest.raises(InputValidationError):
        persistence_grid(-1.0, 0.1)


def test_sample_path_is_reproducible(single_atom):
    a = sample_path(single_atom, 0.0, 0.1, 20, seed=11)
    b = sample_path(single_atom, 0.0, 0.1, 20, seed=11)
    c = sample_path(single_atom, 0.0, 0.1, 20, seed=12)
    np.testing.assert_array_equal(a.values, b.values)
    assert not np.array_equal(a.values, c.values)
    np.testing.assert_allclose(a.grid, 0.1 * np.arange(20))
    with pytest.raises(InputValidationError):
        sample_path(single_atom, 0.0, 0.1, 0, seed=1)


def test_single_atom_path_is_a_cosine(single_atom):
    # f(x) = ξcos(2πλx) + ηsin(2πλx): 반주기 떨어진 두 값은 부호가 반대
    path = sample_path(single_atom, 0.0, 1.0 / 0.6, 2, seed=3)
    assert path.values[1] == pytest.approx(-path.values[0], abs=1e-12)
    assert persistence_indicator(path) == (path.values[0] == 0.0)


@pytest.mark.parametrize("lag", [0, 1, 2, 3])
def test_empirical_covariance_matches_kernel(uniform_band, lag):
    step = 0.5
    paths = sample_paths(uniform_band, step, 4, trials=100_000, master_seed=5)
    products = paths[:, 0] * paths[:, lag]
    stderr = products.std(ddof=1) / math.sqrt(products.size)
    assert abs(products.mean() - covariance(uniform_band, lag * step)) <= 5 * stderr


def test_quarter_frequency_path_keeps_its_amplitude():
    # μ = ½δ_{1/4} + ½δ_{−1/4}: f(x+1) 은 f 의 직교 성분이므로 f(x)² + f(x+1)² = ξ² + η²
    mu = atomic_measure([(0.25, 0.5)])
    path = sample_path(mu, 0.0, 0.1, 41, seed=77)
    energy = path.values[:31] ** 2 + path.values[10:] ** 2
    np.testing.assert_allclose(energy, energy[0], rtol=1e-12)


def test_quarter_frequency_variance_is_one():
    mu = atomic_measure([(0.25, 0.5)])
    values = sample_paths(mu, 1.0, 1, trials=100_000, master_seed=6)[:, 0]
    squares = values ** 2
    stderr = squares.std(ddof=1) / math.sqrt(squares.size)
    assert abs(squares.mean() - 1.0) <= 3 * stderr


def test_density_discretization_error_is_reported(uniform_band, single_atom):
    disc = discretize_for_sampling(uniform_band)
    assert disc.freqs.size == 64
    assert math.fsum(disc.masses) == pytest.approx(0.25)
    assert disc.covariance_error < 1e-10
    assert discretize_for_sampling(single_atom).covariance_error == 0.0


# ============================================
# 몬테카를로 오라클
# ============================================
@pytest.mark.parametrize("lam_L", [0.1, 0.2, 0.3, 0.45])
def test_arc_length_oracle(lam_L):
    """단일 원자: P{f ≥ 0 on [0, L]} = max(0, 1/2 − λL)"""
    lam = 1.0
    mu = atomic_measure([(lam, 0.5)])
    est = mc_persistence(mu, lam_L / lam, trials=20000, master_seed=2024)
    assert _within(est, max(0.0, 0.5 - lam_L), slack=0.002)
    assert est.ci_lo <= est.p_hat <= est.ci_hi


@pytest.mark.parametrize("rho", [-0.9, 0.0, 0.5, 0.9])
def test_orthant_oracle(rho):
    """두 점 격자에서 P{f(0) ≥ 0, f(L) ≥ 0} = 1/4 + arcsin(ρ)/(2π)"""
    L = math.acos(rho) / (2 * math.pi)
    mu = atomic_measure([(1.0, 0.5)])
    est = mc_persistence(mu, L, step=L, trials=20000, master_seed=99)
    assert _within(est, orthant_probability(rho))


def test_orthant_formula():
    assert orthant_probability(0.0) == 0.25
    assert orthant_probability(1.0) == pytest.approx(0.5)
    assert orthant_probability(-1.0) == pytest.approx(0.0)
    with pytest.raises(InputValidationError):
        orthant_probability(1.5)


def test_persistence_at_a_single_point_is_one_half(uniform_band):
    est = mc_persistence(uniform_band, 0.0, trials=20000, master_seed=1)
    assert _within(est, 0.5)


def test_estimate_does_not_depend_on_workers(uniform_band):
    one = mc_persistence(uniform_band, 1.0, trials=3000, master_seed=42, workers=1)
    many = mc_persistence(uniform_band, 1.0, trials=3000, master_seed=42, workers=4)
    assert one == many


def test_clopper_pearson_edges():
    lo, hi = clopper_pearson(0, 10)
    assert lo == 0.0
    assert hi == pytest.approx(1.0 - 0.025 ** 0.1, rel=1e-9)
    lo, hi = clopper_pearson(10, 10)
    assert hi == 1.0
    assert lo == pytest.approx(0.025 ** 0.1, rel=1e-9)


# ============================================
# 보조 사건과 이차 모멘트
# ============================================
def test_lemma_event_rejects_mismatched_shift(single_atom):
    nu = AtomicMeasure.from_arrays([0.0, 1.0], [0.5, 0.5])
    with pytest.raises(InputValidationError):
        mc_lemma_event(single_atom, nu, ShiftFunction.zero([0.0, 2.0]), 0.1, trials=10)
    with pytest.raises(InputValidationError):
        mc_lemma_event(single_atom, nu, ShiftFunction.zero([0.0, 1.0]), -0.1, trials=10)


def test_lemma_event_on_two_points(single_atom):
    # 임계값이 충분히 크면 사건은 두 점 직교 사건과 같다
    nu = AtomicMeasure.from_arrays([0.0, 1.0], [0.5, 0.5])
    est = mc_lemma_event(single_atom, nu, ShiftFunction.zero([0.0, 1.0]), 50.0, trials=20000, master_seed=8)
    assert _within(est, orthant_probability(math.cos(2 * math.pi * 0.3)))


def test_second_moment_matches_quadratic_form(uniform_band):
    nu = AtomicMeasure.from_arrays([0.0, 1.0, 2.0], [0.25, 0.5, 0.25])
    mean, stderr = mc_second_moment(uniform_band, nu, trials=8000, master_seed=3)
    assert abs(mean - quadratic_form(uniform_band, nu)) <= 4.0 * stderr


# ============================================
# 스윕
# ============================================
@pytest.mark.slow
def test_sweep_is_monotone_in_L(uniform_band):
    L_values = [0.0, 0.5, 1.0, 1.5, 2.0]
    rows = mc_sweep(uniform_band, L_values, trials=20000, master_seed=17)
    p = [r.estimate.p_hat for r in rows]
    assert p[0] == pytest.approx(0.5, abs=0.02)
    # 공통 난수이므로 L 에 대해 정확히 단조
    assert all(b <= a for a, b in zip(p, p[1:]))
    assert p[-1] > 0
    # log p̂ 는 오목: 2차 차분 ≤ 2·(전파된 표준오차)
    resolved = [r for r in rows if r.estimate.p_hat >= 1e-3]
    logs = [math.log(r.estimate.p_hat) for r in resolved]
    rel = [r.estimate.stderr / r.estimate.p_hat for r in resolved]
    for i in range(1, len(resolved) - 1):
        second = logs[i + 1] - 2 * logs[i] + logs[i - 1]
        assert second <= 2 * (rel[i - 1] + 2 * rel[i] + rel[i + 1])
    fit = fit_log_decay(L_values, p)
    assert fit.points_used == 5
    assert fit.slope_L2 is not None


def test_sweep_agrees_with_direct_estimate(uniform_band):
    rows = mc_sweep(uniform_band, [0.5, 1.0], step=0.01, trials=2000, master_seed=4)
    direct = mc_persistence(uniform_band, 1.0, step=0.01, trials=2000, master_seed=4)
    assert rows[1].estimate.successes == direct.successes


def test_fit_log_decay_recovers_quadratic():
    L = np.array([0.0, 1.0, 2.0, 3.0, 4.0])
    p = np.exp(-0.5 - 0.2 * L - 0.1 * L ** 2)
    fit = fit_log_decay(L, p)
    assert fit.intercept == pytest.approx(-0.5, abs=1e-9)
    assert fit.slope_L == pytest.approx(-0.2, abs=1e-9)
    assert fit.slope_L2 == pytest.approx(-0.1, abs=1e-9)


def test_fit_log_decay_skips_zero_estimates():
    fit = fit_log_decay([1.0, 2.0], [0.0, 0.0])
    assert fit.points_used == 0
    assert fit.intercept is None
