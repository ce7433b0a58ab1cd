import math

import numpy as np
import pytest
from numpy.polynomial import polynomial as npoly

from app.exceptions import InputValidationError, RootFindingError
from app.models.polynomial import Polynomial
from app.models.sampling import ShiftFunction
from app.services.certificate import (
    build_p_tilde,
    build_q,
    build_simple,
    build_universal,
    certificate_trace,
    certify_band,
    dist_to_left_semicircle,
    flat_block_ok,
    replace_factor,
    rescale_certificate,
    universal_bound,
    verify_semicircle_bound,
)
from app.services.dyadic_assembly import quadratic_form
from app.services.gp_sampler import mc_lemma_event
from app.services.roots import find_roots
from app.services.spectral_measure import atomic_measure


# ============================================
# 근 찾기
# ============================================
def test_find_roots_of_known_polynomial():
    p = Polynomial.of([1.0, 0.0, 1.0])  # z² + 1
    roots = sorted(find_roots(p), key=lambda r: r.imag)
    assert roots == pytest.approx([-1j, 1j], abs=1e-12)


def test_find_roots_with_zero_and_repeated_roots():
    # z²(z − 1)(z + 0.5)
    p = Polynomial(np.convolve(np.convolve([0, 0, 1], [-1, 1]), [0.5, 1]))
    roots = find_roots(p)
    assert len(roots) == 4
    assert roots[2] == 0 and roots[1] == 0
    assert roots[0] == pytest.approx(-0.5, abs=1e-10)
    assert roots[3] == pytest.approx(1.0, abs=1e-10)


def test_find_roots_reconstructs_random_polynomial():
    rng = np.random.default_rng(4)
    coeffs = rng.standard_normal(9) + 1j * rng.standard_normal(9)
    roots = find_roots(Polynomial(coeffs))
    rebuilt = coeffs[-1] * np.poly(roots)[::-1]
    np.testing.assert_allclose(rebuilt, coeffs, atol=1e-8)


def test_find_roots_rejects_constants():
    with pytest.raises(InputValidationError):
        find_roots(Polynomial.constant(3.0))


def test_root_finding_error_is_a_numerical_defect():
    assert RootFindingError.exit_code == 3


# ============================================
# 보편 다항식
# ============================================
def test_simple_and_universal_polynomials():
    simple = build_simple(4)
    np.testing.assert_allclose(simple.real_coeffs, np.array([1, 4, 6, 4, 1]) / 16)
    universal = build_universal(9)
    coeffs = universal.real_coeffs
    assert universal.degree == 9
    assert math.fsum(coeffs) == pytest.approx(1.0)
    assert np.all(coeffs >= 0)
    # 가운데 L'+1 = 4 개 계수가 1/(2L'+1)
    np.testing.assert_allclose(coeffs[3:7], 1.0 / 7.0, atol=1e-15)
    with pytest.raises(InputValidationError):
        build_universal(2)


def test_universal_bound_holds_on_band(unit_band_measures):
    for mu in unit_band_measures.values():
        result = universal_bound(30, mu)
        assert result.band_supported
        assert result.energy <= result.sup_bound * (1 + 1e-9)


# ============================================
# 인수 교체
# ============================================
def test_distance_to_left_semicircle():
    assert dist_to_left_semicircle(-1.0) == 0.0
    assert dist_to_left_semicircle(0.0) == 1.0
    assert dist_to_left_semicircle(-0.5) == pytest.approx(0.5)
    assert dist_to_left_semicircle(1.0) == pytest.approx(math.sqrt(2))


def test_replace_factor_far_root_is_constant():
    assert replace_factor(0.2 + 0.1j).real_coeffs.tolist() == [1.0]


def test_replace_factor_near_root_vanishes():
    for root in (-1.0, -0.9, np.exp(2j * np.pi * 0.3), np.exp(2j * np.pi * 0.26) * 0.95):
        U = replace_factor(root)
        assert U.degree <= 3
        assert np.all(U.real_coeffs >= 0)
        assert math.fsum(U.real_coeffs) == pytest.approx(1.0)
        assert abs(U(root)) <= 1e-10
    outside = replace_factor(-0.9, inside=False)
    assert abs(outside(-1 / 0.9)) <= 1e-10
    np.testing.assert_allclose(replace_factor(-1.0).real_coeffs[:2], [0.5, 0.5])


def test_replace_factor_rejects_roots_outside_the_disk():
    with pytest.raises(InputValidationError):
        replace_factor(-2.0)


def test_q_has_flat_block():
    N, m = 3, 24
    p_tilde = build_p_tilde([-1.0, 0.0, np.exp(2j * np.pi * 0.4)], [True, False, True])
    assert math.fsum(p_tilde.real_coeffs) == pytest.approx(1.0)
    Q = build_q(p_tilde, N, m)
    assert flat_block_ok(Q, N, m)
    assert math.fsum(Q.real_coeffs) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(InputValidationError):
        build_q(Polynomial(np.ones(11) / 11), N, m)


# ============================================
# 단위 밴드 인증서
# ============================================
@pytest.mark.parametrize("n", [72, 92, 115])
def test_certificate_structure(unit_band_measures, n):
    for name, mu in unit_band_measures.items():
        cert = certify_band(mu, n)
        N = n // 23
        beta = np.array(cert.q_coeffs)
        assert cert.N == N and cert.m == 8 * N
        assert np.all(beta >= 0), name
        assert abs(math.fsum(beta) - 1.0) <= 1e-12, name
        flat = beta[cert.flat_lo : cert.flat_hi + 1]
        assert flat.size == N + 1
        np.testing.assert_allclose(flat, 1.0 / (cert.m + 4 * N + 1), atol=1e-12)
        assert cert.energy <= cert.energy_bound * (1 + 1e-9) + 1e-12 * mu.total_mass, name
        assert cert.semicircle.samples == 512 and cert.semicircle.passed, name
        assert cert.passed, name
        assert cert.nu.max_position <= n


def test_certificate_of_single_atom_has_zero_probability(single_atom):
    cert = certify_band(single_atom, 72)
    assert cert.sigma == 0.0
    assert cert.prob_bound == 0.0
    assert cert.log10_prob_bound is None
    assert cert.threshold == 0.0


def test_certificate_probability_bound_is_clamped(uniform_band):
    cert = certify_band(uniform_band, 72)
    assert cert.sigma > 0
    # n·e^{-cn} > 1 이므로 원래 값은 1 을 넘는다
    assert cert.prob_bound_raw > 1.0
    assert cert.prob_bound == 1.0
    assert cert.log10_prob_bound == pytest.approx(4 * (math.log10(72) - 72 * math.log(2) / 100 / math.log(10)))
    assert 0.0 <= cert.density_bound <= 1.0


def test_certificate_energy_matches_quadratic_form(unit_band_measures):
    for mu in unit_band_measures.values():
        cert = certify_band(mu, 72)
        assert quadratic_form(mu, cert.nu) == pytest.approx(cert.energy, rel=1e-6, abs=1e-9)


def test_certificate_rejects_small_n(uniform_band):
    with pytest.raises(InputValidationError):
        certify_band(uniform_band, 71)


def test_rescaled_certificate_moves_atoms(uniform_band):
    cert = certify_band(uniform_band, 72)
    scaled = rescale_certificate(cert, 4.0)
    assert scaled.scale == 4.0
    np.testing.assert_allclose(scaled.nu.positions, cert.nu.positions / 4.0)
    assert scaled.sigma == cert.sigma
    trace = certificate_trace(scaled)
    assert trace["passed"] is True
    assert set(trace["checks"]) >= {"energy_bound", "flat_block", "semicircle"}


def test_semicircle_check_detects_violation():
    N, m = 1, 8
    big = Polynomial.of([1.0])
    small = Polynomial.of([1e-6])
    assert not verify_semicircle_bound(big, small, N, m).passed
    assert verify_semicircle_bound(small, big, N, m).passed


@pytest.mark.slow
def test_lemma_event_respects_probability_bound(unit_band_measures):
    """φ = 0 과 무작위 φ 다섯 개에서 경험 빈도 ≤ prob_bound + 3·stderr"""
    rng = np.random.default_rng(12)
    for mu in unit_band_measures.values():
        cert = certify_band(mu, 72)
        positions = cert.nu.positions
        shifts = [ShiftFunction.zero(positions)] + [
            ShiftFunction(support=tuple(positions), values=tuple(rng.normal(0.0, 0.1, positions.size)))
            for _ in range(5)
        ]
        for phi in shifts:
            est = mc_lemma_event(mu, cert.nu, phi, cert.threshold, trials=100_000, master_seed=21)
            assert est.p_hat <= cert.prob_bound + 3 * est.stderr


def test_lemma_event_is_empty_for_single_atom(single_atom):
    # 정수 격자 70 점에서 cos(2π·0.3x − θ) ≥ 0 은 불가능
    cert = certify_band(single_atom, 72)
    est = mc_lemma_event(single_atom, cert.nu, ShiftFunction.zero(cert.nu.positions), cert.threshold, trials=2000)
    assert est.successes == 0


def test_certificate_vanishes_on_atom_at_minus_one():
    # e^{2πi·0.5} = −1 이고 Q 는 ((1+z)/2)^m 을 인수로 가진다
    mu = atomic_measure([(0.5, 0.5)])
    cert = certify_band(mu, 92)
    assert (cert.N, cert.m) == (4, 32)
    assert abs(npoly.polyval(-1.0, np.array(cert.q_coeffs))) <= 1e-12
    assert cert.energy <= 1e-20
    assert cert.sigma == 0.0
    assert cert.prob_bound == 0.0
    assert cert.passed
