import math

import pytest

from app.exceptions import ConditioningError, InputValidationError
from app.services.sharpness import example_measure, lower_bound, verify_lagrange_bound
from app.services.spectral_measure import gap_radius


# ============================================
# 예제 측도
# ============================================
def test_example_measure_has_gap():
    mu = example_measure(10)
    assert gap_radius(mu) >= 1 / (4 * math.pi) - 1e-12
    assert mu.max_frequency <= 2 / (4 * math.pi) + 1e-12


def test_example_measure_merges_coincident_atoms():
    mu = example_measure(3)
    # 세대 2: 3/2, 4/2; 세대 3: 4/3, 5/3, 6/3 -> 2 = 4/2 = 6/3 이 합쳐진다
    assert len(mu.atoms) == 4
    assert math.fsum(a.mass for a in mu.atoms) == pytest.approx(2 / 8 + 3 / 24)
    top = mu.atoms[-1]
    assert top.freq == pytest.approx(2 / (4 * math.pi))
    assert top.mass == pytest.approx(1 / 8 + 1 / 24)


def test_example_measure_needs_three_generations():
    with pytest.raises(InputValidationError):
        example_measure(2)


# ============================================
# Lagrange 검증
# ============================================
@pytest.mark.parametrize("n", range(1, 7))
def test_lagrange_bound_holds(n):
    report = verify_lagrange_bound(n, 10)
    assert report.passed
    assert report.rho >= 10.0 ** (-3 * n)
    assert report.interpolation_identity_error <= 1e-6
    assert len(report.nodes) == n + 1


def test_lagrange_bound_at_degree_zero():
    report = verify_lagrange_bound(0, 10)
    assert report.passed
    assert report.rho == pytest.approx(math.sqrt(example_measure(10).total_mass))


def test_lagrange_gate_and_arguments():
    with pytest.raises(ConditioningError):
        verify_lagrange_bound(9, 12)
    with pytest.raises(InputValidationError):
        verify_lagrange_bound(5, 5)
    with pytest.raises(InputValidationError):
        verify_lagrange_bound(-1, 10)


# ============================================
# 하한 공식
# ============================================
def test_lower_bound_constants():
    trace = lower_bound(1.0, 2.0, 1 / (2 * math.pi))
    assert trace.p0 == pytest.approx(0.31731, abs=1e-5)
    assert trace.C_tilde == pytest.approx(8 + 1 / trace.p0, abs=1e-9)
    assert trace.L_normalized == pytest.approx(2.0)
    assert trace.tail_ok
    assert trace.log_tail <= -trace.C_tilde * trace.K ** 2 - math.log(2)


def test_lower_bound_K_satisfies_every_constraint():
    trace = lower_bound(0.5, 3.0, 1.0)
    assert all(trace.K >= v for v in trace.K_constraints.values())
    assert trace.K - 1 < max(trace.K_constraints.values())
    assert trace.K_constraints["K>=L"] == pytest.approx(2 * math.pi * 3.0)


def test_lower_bound_is_non_increasing_in_L():
    R = 1 / (2 * math.pi)
    logs = [lower_bound(1.0, L, R).log10_bound for L in (1.0, 2.0, 4.0)]
    assert logs[0] >= logs[1] >= logs[2]
    bounds = [lower_bound(1.0, L, R).bound for L in (1.0, 2.0, 4.0)]
    assert all(0.0 <= b <= 0.5 for b in bounds)


def test_lower_bound_reports_log_scale_values():
    trace = lower_bound(1.0, 1.0, 1 / (2 * math.pi))
    assert trace.log10_a == pytest.approx(-trace.K / math.log(10))
    assert trace.log10_alpha == pytest.approx(trace.log10_a - (math.log(2) + 1.0) / math.log(10))
    assert trace.bound == 0.0  # e^{-C̃K²} 는 float 범위를 벗어남


@pytest.mark.parametrize("C, L, R", [(0.0, 2.0, 1.0), (1.0, 0.5, 1.0), (1.0, 2.0, 0.0), (300.0, 2.0, 1.0)])
def test_lower_bound_rejects_invalid_arguments(C, L, R):
    with pytest.raises(InputValidationError):
        lower_bound(C, L, R)
