# services/sharpness.py
"""
하한 쪽 계산

- lower_bound: 모멘트 조건 ρ_n ≥ e^{-Cn}√μ(ℝ) 을 가정한 하한 공식 (로그 공간)
- example_measure: 간격이 있으면서 모멘트 조건을 만족하는 이산 측도
- verify_lagrange_bound: 예제 측도에서 ρ_n ≥ 10^{-3n} 을 수치로 확인
"""
import logging
import math
from fractions import Fraction
from typing import Dict, List

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.stats import norm

from app.config import get_settings
from app.exceptions import ConditioningError, InputValidationError
from app.models.measure import SpectralMeasure
from app.models.sharpness import LagrangeReport, LowerBoundTrace
from app.services.spectral_measure import atomic_measure
from app.services.toeplitz import rho

logger = logging.getLogger(__name__)

MODULE = "sharpness"
LN10 = math.log(10.0)
# K² 이 float 범위 안에 있어야 한다
MAX_LOG_K = 300.0


# ============================================
# 예제 측도
# ============================================
def _generation(n: int) -> List[Fraction]:
    """세대 n 의 원자 위치 (n+k)/n, k = 1..n (4π 로 나누기 전)"""
    return [Fraction(n + k, n) for k in range(1, n + 1)]


def example_measure(n_max: int) -> SpectralMeasure:
    """
    양의 쪽이 Σ_{n=2}^{n_max} (1/(n2^n)) Σ_{k=1}^n δ_{(n+k)/(4πn)} 인 측도

    서로 다른 세대에서 같은 위치(예: 4/2 = 6/3)는 하나의 원자로 합친다.
    """
    if n_max < 3:
        raise InputValidationError(f"example measure needs n_max ≥ 3 (got {n_max})", MODULE)
    masses: Dict[Fraction, Fraction] = {}
    for n in range(2, n_max + 1):
        for pos in _generation(n):
            masses[pos] = masses.get(pos, Fraction(0)) + Fraction(1, n * 2 ** n)
    pairs = [(float(pos) / (4.0 * math.pi), float(mass)) for pos, mass in sorted(masses.items())]
    return atomic_measure(pairs)


# ============================================
# Lagrange 보간 검증
# ============================================
def _lagrange_at_zero(nodes: np.ndarray) -> np.ndarray:
    """ℓ_k(0) = ∏_{j≠k} (0 − y_j)/(y_k − y_j)"""
    weights = np.empty(nodes.size)
    for k in range(nodes.size):
        others = np.delete(nodes, k)
        weights[k] = np.prod(-others / (nodes[k] - others))
    return weights


def verify_lagrange_bound(n: int, n_max: int) -> LagrangeReport:
    """
    예제 측도에서 ρ_n ≥ 10^{-3n} 확인

    최소화 다항식을 세대 n+1 원자에서 평가해 보간 항등식 1 = Σ ℓ_k(0)P(y_k) 와
    1 ≤ 10^{3n}·√∫|P|²dμ 를 함께 확인한다. n = 0 이면 P = 1 이고 ρ_0² = μ(ℝ).
    """
    gate = get_settings().lagrange_max_degree
    if n < 0:
        raise InputValidationError("n must be non-negative", MODULE)
    if n > gate:
        raise ConditioningError(f"n={n} exceeds the Lagrange verification gate n ≤ {gate}", MODULE)
    if n_max < max(3, n + 1):
        raise InputValidationError(f"n_max must be at least max(3, n+1) (got {n_max})", MODULE)

    mu = example_measure(n_max)
    value = rho(mu, n)
    if n == 0:
        guaranteed = math.sqrt(mu.total_mass)
        rho_ok = value.rho >= guaranteed * (1.0 - 1e-12)
        return LagrangeReport(
            n=0, n_max=n_max, rho=value.rho, guaranteed=guaranteed, rho_ok=rho_ok,
            nodes=[], interpolation_identity_error=0.0, chain_rhs=value.rho,
            chain_ok=True, passed=rho_ok,
        )

    nodes = np.array([float(p) / (4.0 * math.pi) for p in _generation(n + 1)])
    coeffs = np.concatenate(([1.0], value.minimizer_moments))
    at_nodes = npoly.polyval(nodes, coeffs)
    ell = _lagrange_at_zero(nodes)
    identity_error = abs(math.fsum((ell * at_nodes).tolist()) - 1.0)

    guaranteed = 10.0 ** (-3 * n)
    chain_rhs = 10.0 ** (3 * n) * value.rho
    rho_ok = value.rho >= guaranteed
    chain_ok = identity_error <= 1e-6 and chain_rhs >= 1.0
    report = LagrangeReport(
        n=n,
        n_max=n_max,
        rho=value.rho,
        guaranteed=guaranteed,
        rho_ok=rho_ok,
        nodes=nodes.tolist(),
        interpolation_identity_error=identity_error,
        chain_rhs=chain_rhs,
        chain_ok=chain_ok,
        passed=rho_ok and chain_ok,
    )
    logger.info("Lagrange 검증: n=%d ρ=%.4e (보장 %.1e) passed=%s", n, value.rho, guaranteed, report.passed)
    return report


# ============================================
# 하한 공식
# ============================================
def lower_bound(C: float, L: float, R: float) -> LowerBoundTrace:
    """
    P{f ≥ 0 on [0, L]} 의 하한 추적

    정규화 (R = 1/(2π)) 에서 L_norm = 2πRL. K 는 모든 제약
    K ≥ 1, K ≥ L, K ≥ 2e^{2C̃+1}L, K ≥ e^{C+2C̃+2}L 를 만족하는 최소 정수.
    bound = (1/2)(e^{-C̃K²} − Σ_{k>K} e^{-a_k²/2}), a_k = √(2(C̃K²+k)).
    """
    if not C > 0:
        raise InputValidationError(f"C must be positive (got {C})", MODULE)
    if not R > 0:
        raise InputValidationError(f"R must be positive (got {R})", MODULE)
    if not L >= 1:
        raise InputValidationError(f"lower bound needs L ≥ 1 (got {L})", MODULE)

    L_norm = 2.0 * math.pi * R * L
    L_eff = max(1.0, L_norm)
    p0 = 2.0 * float(norm.sf(1.0))
    C_tilde = C + 7.0 + 1.0 / p0
    if C + 2.0 * C_tilde + 2.0 + math.log(L_eff) > MAX_LOG_K:
        raise InputValidationError(f"K = e^(C+2C~+2)L overflows for C={C}, L={L}, R={R}", MODULE)
    constraints = {
        "K>=1": 1.0,
        "K>=L": L_eff,
        "K>=2e^(2C~+1)L": 2.0 * math.exp(2.0 * C_tilde + 1.0) * L_eff,
        "K>=e^(C+2C~+2)L": math.exp(C + 2.0 * C_tilde + 2.0) * L_eff,
    }
    K = int(math.ceil(max(constraints.values())))

    log_a = -C * K
    log_alpha = log_a - math.log(2.0) - L_norm
    main = -C_tilde * K * K
    log_geometric = -(K + 1) - math.log1p(-math.exp(-1.0))
    log_tail = main + log_geometric
    tail_ok = log_tail <= main - math.log(2.0)
    log_bound = -math.log(2.0) + main + math.log1p(-math.exp(log_geometric))

    trace = LowerBoundTrace(
        C=C,
        L=L,
        R=R,
        L_normalized=L_norm,
        p0=p0,
        C_tilde=C_tilde,
        K=K,
        K_constraints=constraints,
        a=math.exp(log_a),
        log10_a=log_a / LN10,
        alpha=math.exp(log_alpha),
        log10_alpha=log_alpha / LN10,
        log_tail=log_tail,
        tail_ok=tail_ok,
        bound=min(0.5, math.exp(log_bound)),
        log10_bound=log_bound / LN10,
    )
    logger.info("하한: C=%g L=%g R=%g K=%d log10(bound)=%.4g", C, L, R, K, trace.log10_bound)
    return trace
