# services/certificate.py
"""
단위 밴드 (1/4, 1/2] 에 대한 양계수 다항식 인증서

파이프라인:
1. σ² 과 최소화 다항식 P (Toeplitz 최소 고유쌍)
2. P 의 근 분해와 인수 교체 -> P̃ (양계수, 계수합 1)
3. Q = 평탄블록·((1+z)/2)^m·P̃ -> ν = Σ β_k δ_k
4. 에너지 ∫|Q|²dμ ≤ 2^{-2N}σ² 검사와 확률 경계 계산
"""
import logging
import math
from fractions import Fraction
from typing import List, Optional, Sequence

import numpy as np
from scipy.stats import binom

from app.config import get_settings
from app.exceptions import CertificateDefectError, InputValidationError
from app.models.certificate import (
    AtomicMeasure,
    Certificate,
    SemicircleReport,
    UniversalBound,
)
from app.models.measure import SpectralMeasure
from app.models.polynomial import Polynomial
from app.services.roots import find_roots
from app.services.spectral_measure import energy_integral
from app.services.toeplitz import build_toeplitz, sigma_for_band

logger = logging.getLogger(__name__)

MODULE = "certificate"
C_RATE = math.log(2.0) / 100.0
UNIT_CIRCLE_TOL = 1e-9
CASE1_DISTANCE = 0.5
NEG_CLAMP = 1e-12
NEG_DEFECT = 1e-8
SEMICIRCLE_SAMPLES = 512
# (0,1,2), (0,1,3), (0,2,3), (1,2,3) 순서로 검사
TRIANGLES = ((0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3))


# ============================================
# 보편 다항식
# ============================================
def build_simple(L: int) -> Polynomial:
    """((1+z)/2)^L - 이항계수 / 2^L"""
    if L < 0:
        raise InputValidationError("L must be non-negative", MODULE)
    return Polynomial(binom.pmf(np.arange(L + 1), L, 0.5))


def build_universal(L: int) -> Polynomial:
    """
    (1 + z + ... + z^{2L'})/(2L'+1) · ((1+z)/2)^{L'}, L' = ⌊L/3⌋

    가운데 L'+1 개 계수가 1/(2L'+1) 로 평탄하다.
    """
    if L < 3:
        raise InputValidationError(f"universal polynomial needs L ≥ 3 (got {L})", MODULE)
    Lp = L // 3
    flat = Polynomial(np.full(2 * Lp + 1, 1.0 / (2 * Lp + 1)))
    return flat * build_simple(Lp)


def universal_bound(L: int, mu: SpectralMeasure) -> UniversalBound:
    """ν = P_universal 계수로 만든 원자 측도에 대한 E[(∫f dν)²] = ∫|P_universal|²dμ"""
    poly = build_universal(L)
    Lp = L // 3
    mass = mu.total_mass
    lo = min([a.freq for a in mu.atoms] + [p.lo for p in mu.density_pieces if p.height > 0])
    return UniversalBound(
        L=L,
        L_prime=Lp,
        coefficients=poly.real_coeffs.tolist(),
        energy=energy_integral(mu, poly),
        sup_bound=2.0 ** (-Lp) * mass,
        band_supported=lo >= 0.25 and mu.max_frequency <= 0.5,
    )


# ============================================
# 인수 교체
# ============================================
def dist_to_left_semicircle(z: complex) -> float:
    """T_- = {|z| = 1, Re z ≤ 0} 까지의 거리"""
    z = complex(z)
    if z == 0:
        return 1.0
    if z.real <= 0:
        return abs(abs(z) - 1.0)
    return min(abs(z - 1j), abs(z + 1j))


def _convex_weights(points: Sequence[complex]) -> Optional[np.ndarray]:
    """0 을 points 의 볼록조합으로 나타내는 가중치 (없으면 None)"""
    for tri in TRIANGLES:
        p = [points[i] for i in tri]
        M = np.array([[q.real for q in p], [q.imag for q in p], [1.0, 1.0, 1.0]])
        weights = np.zeros(4)
        if abs(np.linalg.det(M)) > 1e-14:
            lam = np.linalg.solve(M, np.array([0.0, 0.0, 1.0]))
            if np.all(lam >= -1e-12):
                weights[list(tri)] = lam
                return weights
            continue
        # 퇴화 삼각형: 변 위에서 찾는다
        for i, j in ((0, 1), (0, 2), (1, 2)):
            a, b = p[i], p[j]
            if abs(a - b) < 1e-15:
                continue
            t = a / (a - b)
            if abs(t.imag) <= 1e-12 and -1e-12 <= t.real <= 1.0 + 1e-12:
                weights[tri[i]] = 1.0 - t.real
                weights[tri[j]] = t.real
                return weights
    return None


def replace_factor(root: complex, inside: bool = True) -> Polynomial:
    """
    선형 인수 L_k 를 양계수 저차 다항식으로 교체

    - T_- 까지 거리 ≥ 1/2: 상수 1
    - 그 외: U(z) = Σ α_j z^j (α ≥ 0, Σα = 1, U(root) = 0)
      inside=False 이면 z³U(1/z)
    """
    root = complex(root)
    if abs(root) > 1.0 + UNIT_CIRCLE_TOL:
        raise InputValidationError(
            f"factor root {root} lies outside the unit disk; pass its reciprocal with inside=False",
            MODULE,
        )
    if dist_to_left_semicircle(root) >= CASE1_DISTANCE:
        return Polynomial.constant(1.0)

    alpha = _convex_weights([root ** j for j in range(4)])
    if alpha is None:
        raise CertificateDefectError(f"no convex combination of 1, z, z², z³ vanishes at z={root}", MODULE)
    alpha = np.clip(alpha, 0.0, None)
    alpha /= math.fsum(alpha)
    U = Polynomial(alpha)
    if abs(U(root)) > 1e-10:
        raise CertificateDefectError(f"replacement factor residual {abs(U(root)):.3e} at z={root}", MODULE)
    return U if inside else U.reversed(3)


def build_p_tilde(roots: Sequence[complex], inside_flags: Sequence[bool]) -> Polynomial:
    """P̃ = ∏ L̃_k - 차수 ≤ 3N, 계수 ≥ 0, 계수합 1"""
    if len(roots) != len(inside_flags):
        raise InputValidationError("roots and inside_flags must have the same length", MODULE)
    product = Polynomial.constant(1.0)
    for root, inside in zip(roots, inside_flags):
        product = product * replace_factor(root, inside)

    coeffs = product.real_coeffs
    worst = float(coeffs.min())
    if worst < -NEG_DEFECT:
        raise CertificateDefectError(f"P̃ has a negative coefficient {worst:.3e}", MODULE)
    if worst < -NEG_CLAMP:
        logger.warning("P̃ 음수 계수 %.3e 를 0 으로 보정", worst)
    coeffs = np.clip(coeffs, 0.0, None)
    total = math.fsum(coeffs)
    if abs(total - 1.0) > 1e-10:
        raise CertificateDefectError(f"P̃(1) = {total!r} differs from 1", MODULE)
    return Polynomial(coeffs / total)


def build_q(p_tilde: Polynomial, N: int, m: int) -> Polynomial:
    """Q = (1 + z + ... + z^{m+4N})/(m+4N+1) · ((1+z)/2)^m · P̃"""
    if p_tilde.degree > 3 * N:
        raise InputValidationError(f"deg P̃ = {p_tilde.degree} exceeds 3N = {3 * N}", MODULE)
    width = m + 4 * N + 1
    flat = Polynomial(np.full(width, 1.0 / width))
    return Polynomial((flat * build_simple(m) * p_tilde).real_coeffs)


def flat_block_ok(q: Polynomial, N: int, m: int) -> bool:
    """인덱스 m+3N..m+4N 의 계수가 모두 1/(m+4N+1) (1e-12 이내)"""
    target = float(Fraction(1, m + 4 * N + 1))
    coeffs = q.real_coeffs
    block = coeffs[m + 3 * N : m + 4 * N + 1]
    return block.size == N + 1 and bool(np.all(np.abs(block - target) <= 1e-12))


# ============================================
# 검증
# ============================================
def verify_semicircle_bound(
    q: Polynomial, p: Polynomial, N: int, m: int, samples: int = SEMICIRCLE_SAMPLES
) -> SemicircleReport:
    """z = e^{2πit}, t ∈ [1/4, 3/4] 에서 max(|Q(z)| − 6^N 2^{-m/2}|P(z)|) ≤ 1e-9"""
    if samples < 1:
        raise InputValidationError("samples must be positive", MODULE)
    t = np.linspace(0.25, 0.75, samples)
    factor = 6.0 ** N * 2.0 ** (-m / 2.0)
    excess = float(np.max(np.abs(q.on_circle(t)) - factor * np.abs(p.on_circle(t))))
    return SemicircleReport(samples=samples, max_excess=excess, passed=excess <= 1e-9)


def _normalized_roots(P: Polynomial, N: int):
    """
    P = a∏L_k 의 정규화된 근 z_k 와 |a|

    - |r| ≤ 1 + 1e-9: L_k = z − r (inside)
    - |r| > 1 + 1e-9: L_k = 1 − z/r, z_k = 1/r (outside)
    - 차수가 N 보다 작으면 남은 인수는 z_k = 0 outside (L_k = 1)
    """
    trimmed = P.trimmed(1e-13)
    lead = abs(trimmed.coeffs[trimmed.degree])
    zs: List[complex] = []
    flags: List[bool] = []
    lead_norm = lead
    if trimmed.degree >= 1:
        for r in find_roots(trimmed):
            if abs(r) > 1.0 + UNIT_CIRCLE_TOL:
                zs.append(1.0 / r)
                flags.append(False)
                lead_norm *= abs(r)
            else:
                zs.append(r)
                flags.append(True)
    missing = N - len(zs)
    zs.extend([0j] * missing)
    flags.extend([False] * missing)
    return zs, flags, lead_norm


def _log_density_bound(mu_unit: SpectralMeasure, n: int, N: int, m: int, sigma: float) -> float:
    """log(((m+4N+1)e^{-cn})^{N+1} σ^{N+1} / ((2π)^{(N+1)/2} √det A))"""
    sign, logdet = np.linalg.slogdet(build_toeplitz(mu_unit, N))
    if sign <= 0 or sigma == 0:
        return 0.0 if sigma > 0 else -math.inf
    return (N + 1) * (math.log(m + 4 * N + 1) - C_RATE * n + math.log(sigma)) - 0.5 * (
        (N + 1) * math.log(2.0 * math.pi) + logdet
    )


def certify_band(mu_unit: SpectralMeasure, n: int, n0: Optional[int] = None) -> Certificate:
    """
    단위 밴드 측도에 대한 인증서 (N = ⌊n/23⌋, m = 8N, c = ln2/100)

    σ = 0 이면 확률 경계는 0 이다.
    """
    n0 = get_settings().n0 if n0 is None else n0
    if n < n0:
        raise InputValidationError(f"n={n} is below n_0={n0}", MODULE)
    N = n // 23
    m = 8 * N
    chain_ok = -2 * N * math.log(2.0) <= -6 * C_RATE * n
    if not chain_ok:
        raise CertificateDefectError(f"2^(-2N) > e^(-6cn) at n={n}, N={N}", MODULE)

    spectrum = sigma_for_band(mu_unit, N)
    sigma2, sigma = spectrum.sigma2, spectrum.sigma
    P = spectrum.minimizer

    zs, flags, lead_norm = _normalized_roots(P, N)
    p_tilde = build_p_tilde(zs, flags)
    Q = build_q(p_tilde, N, m)

    beta = Q.real_coeffs
    positions = np.flatnonzero(beta > 0)
    weights = beta[positions] / math.fsum(beta[positions])
    nu = AtomicMeasure.from_arrays(positions.astype(float), weights)

    mass = mu_unit.total_mass
    energy = energy_integral(mu_unit, Q)
    energy_bound = 2.0 ** (-2 * N) * sigma2
    semicircle = verify_semicircle_bound(Q, P, N, m)

    checks = {
        "energy_bound": energy <= energy_bound * (1.0 + 1e-9) + 1e-12 * mass,
        "energy_chain": chain_ok,
        "flat_block": flat_block_ok(Q, N, m),
        "coefficients_nonnegative": bool(np.all(beta >= 0)),
        "unit_mass": abs(math.fsum(beta) - 1.0) <= 1e-12,
        "support_within_n": Q.degree <= min(n, 2 * m + 7 * N),
        "lead_norm": lead_norm >= 2.0 ** (-N) * (1.0 - 1e-9),
        "semicircle": semicircle.passed,
    }
    failed = [name for name, ok in checks.items() if not ok]
    if failed:
        raise CertificateDefectError(
            f"certificate checks failed: {', '.join(failed)} (energy={energy:.6e}, bound={energy_bound:.6e})",
            MODULE,
        )

    if sigma2 == 0.0:
        raw, log10_raw, density = 0.0, None, 0.0
    else:
        log_raw = (N + 1) * (math.log(n) - C_RATE * n)
        log10_raw = log_raw / math.log(10.0)
        raw = math.exp(min(log_raw, 700.0))
        density = math.exp(min(0.0, _log_density_bound(mu_unit, n, N, m, sigma)))

    cert = Certificate(
        n=n,
        N=N,
        m=m,
        c=C_RATE,
        sigma2=sigma2,
        sigma=sigma,
        lead_norm=lead_norm,
        nu=nu,
        q_coeffs=beta.tolist(),
        energy=energy,
        energy_bound=energy_bound,
        threshold=math.exp(-C_RATE * n) * sigma,
        prob_bound=min(1.0, raw),
        prob_bound_raw=raw,
        log10_prob_bound=log10_raw,
        density_bound=density,
        flat_lo=m + 3 * N,
        flat_hi=m + 4 * N,
        semicircle=semicircle,
        checks=checks,
    )
    logger.info(
        "인증서 발급: n=%d N=%d m=%d σ²=%.6e energy=%.3e prob_bound=%.3g",
        n, N, m, sigma2, energy, cert.prob_bound,
    )
    return cert


def rescale_certificate(cert: Certificate, a: float) -> Certificate:
    """원자 위치를 a 로 나눔 (스칼라 값은 그대로)"""
    if not a > 0:
        raise InputValidationError("rescale factor a must be positive", MODULE)
    nu = AtomicMeasure(atoms=tuple((pos / a, w) for pos, w in cert.nu.atoms))
    return cert.model_copy(update={"nu": nu, "scale": cert.scale * a})


def certificate_trace(cert: Certificate) -> dict:
    """JSON 직렬화용 요약 (부등식별 통과 여부 포함)"""
    doc = cert.model_dump()
    doc["passed"] = cert.passed
    return doc
