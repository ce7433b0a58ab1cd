# services/toeplitz.py
"""
두 가지 이차 최소화 문제

- σ²: Toeplitz 공분산 행렬 A_ij = k(i−j) 의 최소 고유값과 최소화 다항식
- ρ_n²: 상수항 1 인 다항식에 대한 ∫|P|²dμ 최소값 (Hankel 모멘트 행렬)

μ 가 대칭이므로 k 는 실수이고 두 문제 모두 실수 계수로 최소값이 달성된다.
"""
import logging
import math
from typing import Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.linalg import solve, toeplitz

from app.config import get_settings
from app.exceptions import ConditioningError, EigenSolverError, InputValidationError
from app.models.certificate import RhoValue, ToeplitzSpectrum
from app.models.measure import SpectralMeasure
from app.models.polynomial import Polynomial
from app.services.spectral_measure import (
    check_band_support,
    covariance,
    energy_integral,
    moments,
)

logger = logging.getLogger(__name__)

MODULE = "toeplitz"
JACOBI_TOL = 1e-14
MAX_SWEEPS = 100
SIGMA_ZERO_RTOL = 1e-13


# ============================================
# Toeplitz 행렬과 Jacobi 고유값 풀이
# ============================================
def build_toeplitz(mu: SpectralMeasure, N: int) -> np.ndarray:
    """첫 행이 k(0), k(1), ..., k(N) 인 (N+1)×(N+1) 대칭 Toeplitz 행렬"""
    if N < 0:
        raise InputValidationError("N must be non-negative", MODULE)
    return toeplitz(np.atleast_1d(covariance(mu, np.arange(N + 1, dtype=float))))


def jacobi_eigh(A: np.ndarray, tol: float = JACOBI_TOL, max_sweeps: int = MAX_SWEEPS) -> Tuple[np.ndarray, np.ndarray]:
    """
    순환 Jacobi 회전으로 대칭 행렬의 고유분해

    비대각 노름이 tol·‖A‖ 미만이 될 때까지 sweep 을 반복한다.
    Returns:
        (고유값 배열, 열벡터가 고유벡터인 직교 행렬)
    """
    a = np.array(A, dtype=float)
    n = a.shape[0]
    v = np.eye(n)
    scale = float(np.linalg.norm(a))
    if n == 1 or scale == 0.0:
        return np.diag(a).copy(), v

    upper = np.triu_indices(n, 1)
    for sweep in range(max_sweeps):
        # 상삼각 성분의 제곱합 (전체 − 대각 차분 금지)
        off = math.sqrt(2.0) * float(np.linalg.norm(a[upper]))
        if off < tol * scale:
            logger.debug("Jacobi 수렴: %d sweeps, off=%.3e", sweep, off)
            return np.diag(a).copy(), v
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) < 1e-300:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = 1.0 if theta == 0.0 else math.copysign(1.0, theta) / (abs(theta) + math.hypot(theta, 1.0))
                c = 1.0 / math.hypot(t, 1.0)
                s = t * c
                col_p, col_q = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p, row_q = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                a[p, q] = a[q, p] = 0.0
                vec_p, vec_q = v[:, p].copy(), v[:, q].copy()
                v[:, p] = c * vec_p - s * vec_q
                v[:, q] = s * vec_p + c * vec_q
    raise EigenSolverError(f"Jacobi rotations did not converge in {max_sweeps} sweeps", MODULE)


def _fix_sign(vec: np.ndarray) -> np.ndarray:
    nz = np.flatnonzero(np.abs(vec) > 1e-12)
    if nz.size and vec[nz[0]] < 0:
        return -vec
    return vec


def min_eigenpair(A: np.ndarray) -> Tuple[float, np.ndarray]:
    """
    최소 고유값과 단위 고유벡터

    - 최소 고유값이 중복이면 절대값 성분이 사전식으로 가장 큰 후보 선택
    - 첫 번째 0 이 아닌 성분이 양수가 되도록 부호 고정
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise InputValidationError("matrix must be square", MODULE)
    norm = float(np.linalg.norm(A))
    if not np.allclose(A, A.T, rtol=0.0, atol=1e-12 * max(norm, 1.0)):
        raise InputValidationError("matrix must be symmetric", MODULE)

    values, vectors = jacobi_eigh(0.5 * (A + A.T))
    lam = float(np.min(values))
    tie = 1e-12 * max(norm, 1e-300)
    candidates = [i for i in np.argsort(values, kind="stable") if values[i] <= lam + tie]
    best = max(candidates, key=lambda i: (tuple(np.round(np.abs(vectors[:, i]), 12)), -i))
    vec = _fix_sign(vectors[:, best] / np.linalg.norm(vectors[:, best]))

    residual = float(np.linalg.norm(A @ vec - lam * vec))
    if residual > 1e-10 * max(norm, 1e-300):
        raise EigenSolverError(f"eigenpair residual {residual:.3e} exceeds tolerance", MODULE)
    return lam, vec


def sigma_for_band(mu_unit: SpectralMeasure, N: int) -> ToeplitzSpectrum:
    """
    단위 밴드 측도에 대한 σ² = min ∫|P|²dμ (Σ|a_k|² = 1, deg P ≤ N)

    수치적으로 0 인 고유값(≤ 1e-13·μ(ℝ))은 0 으로 처리한다.
    """
    check_band_support(mu_unit, 1.0)
    A = build_toeplitz(mu_unit, N)
    lam, vec = min_eigenpair(A)
    mass = mu_unit.total_mass
    sigma2 = 0.0 if lam <= SIGMA_ZERO_RTOL * mass else min(lam, mass)

    minimizer = Polynomial(vec.astype(complex))
    energy = energy_integral(mu_unit, minimizer)
    if abs(energy - max(lam, 0.0)) > 1e-9 * mass:
        raise EigenSolverError(
            f"minimizer energy {energy:.6e} disagrees with least eigenvalue {lam:.6e}", MODULE
        )
    logger.debug("σ² = %.6e (N=%d, μ(ℝ)=%.6g)", sigma2, N, mass)
    return ToeplitzSpectrum(sigma2=sigma2, minimizer=minimizer, dimension=N + 1)


# ============================================
# ρ_n: Hankel 모멘트 최소화
# ============================================
def _affine_minimizer(mom: np.ndarray, n: int, gate: float) -> Tuple[np.ndarray, float, bool]:
    """
    min vᵀGv (v_0 = 1), G_jk = mom[j+k]

    v = (1, b) 로 두면 b = −H⁻¹g (H = G[1:,1:], g = G[1:,0]).
    H 가 수치적으로 특이하면 임계값 아래 고유값을 버린 고유분해로 푼다.
    """
    G = np.array([[mom[j + k] for k in range(n + 1)] for j in range(n + 1)])
    H, g = G[1:, 1:], G[1:, 0]
    w, U = np.linalg.eigh(H)
    top = float(np.max(np.abs(w))) if w.size else 0.0
    cutoff = max(top / gate, 1e-300)
    condition = float(top / w.min()) if w.size and w.min() > 0 else math.inf
    if w.size and w.min() > cutoff:
        return solve(H, -g, assume_a="pos"), condition, False
    keep = w > cutoff
    b = -(U[:, keep] @ ((U[:, keep].T @ g) / w[keep]))
    return b, condition, True


def _even_odd_energy(poly: np.ndarray, points: np.ndarray, weights: np.ndarray) -> list:
    """Σ w (P(y)² + P(−y)²)"""
    return (weights * (npoly.polyval(points, poly) ** 2 + npoly.polyval(-points, poly) ** 2)).tolist()


def rho(mu: SpectralMeasure, n: int, max_degree: Optional[int] = None) -> RhoValue:
    """
    ρ_n² = inf{∫|P|²dμ : P(y) = 1 + Σ_{k=1}^n a_k y^k}

    - 변수 y 를 max|y| 로 스케일해 Hankel 행렬의 조건수를 줄인다
    - ρ_n² 은 계산된 최소화 다항식의 ∫P²dμ 로 직접 평가 (Schur 보수의 소거 오차 회피)
    """
    settings = get_settings()
    max_degree = settings.rho_max_degree if max_degree is None else max_degree
    if n < 0:
        raise InputValidationError("n must be non-negative", MODULE)
    if n > max_degree:
        raise ConditioningError(
            f"n={n} exceeds the Hankel conditioning gate n ≤ {max_degree}", MODULE
        )
    if n == 0:
        return RhoValue(n=0, rho2=mu.total_mass, minimizer_moments=(), condition=1.0)

    scale = mu.max_frequency
    mom = moments(mu, 2 * n, scale=scale)
    b, condition, singular = _affine_minimizer(mom, n, settings.rho_condition_gate)
    poly = np.concatenate(([1.0], b))

    freqs, masses = mu.atom_arrays()
    terms = _even_odd_energy(poly, freqs / scale, masses) if freqs.size else []
    square = npoly.polymul(poly, poly)
    mirrored = square * (-1.0) ** np.arange(square.size)
    antiderivative = npoly.polyint(square + mirrored)
    for piece in mu.density_pieces:
        if piece.height == 0:
            continue
        lo, hi = piece.lo / scale, piece.hi / scale
        span = npoly.polyval(hi, antiderivative) - npoly.polyval(lo, antiderivative)
        terms.append(piece.height * scale * span)
    rho2 = max(0.0, math.fsum(terms))

    a = tuple(float(b[k - 1] / scale ** k) for k in range(1, n + 1))
    logger.debug("ρ_%d² = %.6e (cond=%.3e, singular=%s)", n, rho2, condition, singular)
    return RhoValue(n=n, rho2=min(rho2, mu.total_mass), minimizer_moments=a, condition=condition, singular=singular)


def rho_for_atoms(points: Sequence[float], weights: Sequence[float], n: int) -> RhoValue:
    """
    실직선 전체의 원자 측도 Σ w_j δ_{y_j} 에 대한 ρ_n (대칭 가정 없음)
    원점 원자처럼 간격이 없는 측도도 다룰 수 있다.
    """
    pts = np.asarray(points, dtype=float)
    wts = np.asarray(weights, dtype=float)
    if n == 0:
        return RhoValue(n=0, rho2=float(math.fsum(wts)), minimizer_moments=(), condition=1.0)
    scale = float(np.max(np.abs(pts))) or 1.0
    mom = np.array([math.fsum((wts * (pts / scale) ** p).tolist()) for p in range(2 * n + 1)])
    b, condition, singular = _affine_minimizer(mom, n, get_settings().rho_condition_gate)
    poly = np.concatenate(([1.0], b))
    rho2 = max(0.0, math.fsum((wts * npoly.polyval(pts / scale, poly) ** 2).tolist()))
    a = tuple(float(b[k - 1] / scale ** k) for k in range(1, n + 1))
    return RhoValue(n=n, rho2=rho2, minimizer_moments=a, condition=condition, singular=singular)
