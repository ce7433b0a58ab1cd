# services/gp_sampler.py
"""
스펙트럼 표현으로 정상 가우시안 과정 표본을 만들고
지속 확률을 몬테카를로로 추정한다.

f(x) = Σ_j √(2w_j) (ξ_j cos(2πλ_j x) + η_j sin(2πλ_j x))

시행 j 는 항상 splitmix64(master_seed, j) 스트림을 쓰고, 성공 횟수는 고정된 블록 단위로
정수 합산하므로 결과는 워커 수와 무관하다.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.stats import beta

from app.config import get_settings
from app.exceptions import InputValidationError
from app.models.certificate import AtomicMeasure
from app.models.measure import SpectralMeasure
from app.models.sampling import (
    DecayFit,
    DiscretizedMeasure,
    McEstimate,
    SamplePath,
    ShiftFunction,
    SweepRow,
)
from app.services.spectral_measure import atomic_measure, covariance
from app.utils.rng import trial_normals

logger = logging.getLogger(__name__)

MODULE = "gp_sampler"
CONFIDENCE = 0.95
GRID_EPS = 1e-9


# ============================================
# 이산화와 표본 생성
# ============================================
def discretize_for_sampling(
    mu: SpectralMeasure, nodes: Optional[int] = None, horizon: float = 10.0
) -> DiscretizedMeasure:
    """
    밀도 조각을 조각당 Gauss-Legendre 노드의 원자로 바꿈

    공분산 오차는 [0, horizon] 의 257 개 지연에서 max|k_disc − k| 로 보고한다.
    """
    nodes = get_settings().quadrature_nodes if nodes is None else nodes
    if nodes < 1:
        raise InputValidationError("quadrature nodes must be positive", MODULE)
    pairs = [(a.freq, a.mass) for a in mu.atoms]
    if not mu.is_atomic:
        x, w = np.polynomial.legendre.leggauss(nodes)
        for piece in mu.density_pieces:
            if piece.height == 0:
                continue
            half = 0.5 * (piece.hi - piece.lo)
            mid = 0.5 * (piece.hi + piece.lo)
            pairs.extend(zip((mid + half * x).tolist(), (piece.height * half * w).tolist()))
    discrete = atomic_measure(pairs)
    freqs, masses = discrete.atom_arrays()

    error = 0.0
    if not mu.is_atomic:
        lags = np.linspace(0.0, max(horizon, 1.0), 257)
        error = float(np.max(np.abs(covariance(discrete, lags) - covariance(mu, lags))))
        logger.debug("밀도 이산화: %d 원자, 공분산 오차 %.3e", freqs.size, error)
    return DiscretizedMeasure(freqs=freqs, masses=masses, covariance_error=error)


class FieldSampler:
    """
    고정된 점 집합 위에서 시행 블록의 표본을 생성

    - 점 x 와 주파수 λ 에 대한 cos/sin 행렬을 한 번만 계산
    - block(start, count) 은 시행 start..start+count-1 의 (count, 점 수) 배열
    """

    def __init__(self, mu: SpectralMeasure, points, master_seed: int, nodes: Optional[int] = None):
        self.points = np.atleast_1d(np.asarray(points, dtype=float))
        self.master_seed = int(master_seed)
        disc = discretize_for_sampling(mu, nodes, horizon=float(np.ptp(self.points)) if self.points.size else 1.0)
        self.covariance_error = disc.covariance_error
        amps = disc.amplitudes
        phase = 2.0 * np.pi * np.multiply.outer(self.points, disc.freqs)
        self._cos = (np.cos(phase) * amps).T
        self._sin = (np.sin(phase) * amps).T
        self.size = disc.freqs.size

    def block(self, start: int, count: int) -> np.ndarray:
        normals = trial_normals(self.master_seed, start, count, 2 * self.size)
        return normals[:, : self.size] @ self._cos + normals[:, self.size :] @ self._sin


def sample_points(mu: SpectralMeasure, points, seed: int) -> np.ndarray:
    """임의 점 집합 위의 한 표본 (시행 0 스트림)"""
    return FieldSampler(mu, points, seed).block(0, 1)[0]


def sample_path(mu: SpectralMeasure, x0: float, step: float, count: int, seed: int) -> SamplePath:
    """격자 x0 + j·step (j < count) 위의 표본 경로"""
    if count < 1:
        raise InputValidationError("count must be positive", MODULE)
    if not step > 0:
        raise InputValidationError("step must be positive", MODULE)
    grid = x0 + step * np.arange(count)
    return SamplePath(x0=x0, step=step, values=sample_points(mu, grid, seed), seed_tag=int(seed))


def persistence_indicator(path: SamplePath) -> bool:
    """모든 격자 값이 0 이상인지"""
    return bool(np.all(path.values >= 0))


# ============================================
# 몬테카를로 실행기
# ============================================
class MonteCarloRunner:
    """
    시행을 고정 크기 블록으로 나눠 스레드 풀에서 실행

    블록 경계는 워커 수와 무관하므로 정수 합산 결과가 항상 같다.
    """

    def __init__(self, workers: Optional[int] = None, block_size: Optional[int] = None):
        settings = get_settings()
        self.workers = max(1, workers or settings.workers)
        self.block_size = max(1, block_size or settings.mc_block_size)

    def blocks(self, trials: int) -> List[Tuple[int, int]]:
        return [(s, min(self.block_size, trials - s)) for s in range(0, trials, self.block_size)]

    def run(self, trials: int, task: Callable[[int, int], int]) -> int:
        if trials < 1:
            raise InputValidationError("trials must be positive", MODULE)
        blocks = self.blocks(trials)
        if self.workers == 1 or len(blocks) == 1:
            return sum(int(task(s, c)) for s, c in blocks)
        with ThreadPoolExecutor(max_workers=self.workers) as pool:
            return sum(int(v) for v in pool.map(lambda b: task(*b), blocks))

    def collect(self, trials: int, task: Callable[[int, int], np.ndarray]) -> np.ndarray:
        """블록별 배열 결과를 시행 순서대로 이어붙임"""
        if trials < 1:
            raise InputValidationError("trials must be positive", MODULE)
        blocks = self.blocks(trials)
        if self.workers == 1 or len(blocks) == 1:
            return np.concatenate([task(s, c) for s, c in blocks])
        with ThreadPoolExecutor(max_workers=self.workers) as pool:
            return np.concatenate(list(pool.map(lambda b: task(*b), blocks)))


def clopper_pearson(successes: int, trials: int, confidence: float = CONFIDENCE) -> Tuple[float, float]:
    alpha = 1.0 - confidence
    lo = 0.0 if successes == 0 else float(beta.ppf(alpha / 2, successes, trials - successes + 1))
    hi = 1.0 if successes == trials else float(beta.ppf(1 - alpha / 2, successes + 1, trials - successes))
    return lo, hi


def make_estimate(successes: int, trials: int) -> McEstimate:
    p_hat = successes / trials
    lo, hi = clopper_pearson(successes, trials)
    return McEstimate(
        successes=successes,
        trials=trials,
        p_hat=p_hat,
        stderr=math.sqrt(p_hat * (1.0 - p_hat) / trials),
        ci_lo=min(lo, p_hat),
        ci_hi=max(hi, p_hat),
    )


# ============================================
# 지속 확률
# ============================================
def default_step(mu: SpectralMeasure, L: float) -> float:
    """min(0.01/최대 주파수, L/1000); L = 0 이면 단일점이므로 1"""
    if L <= 0:
        return 1.0
    return min(0.01 / mu.max_frequency, L / 1000.0)


def persistence_grid(L: float, step: float) -> np.ndarray:
    """0, step, 2·step, ... (L 이하)"""
    if L < 0:
        raise InputValidationError(f"L must be non-negative (got {L})", MODULE)
    if not step > 0:
        raise InputValidationError("step must be positive", MODULE)
    if L > 0 and step > L * (1.0 + GRID_EPS):
        raise InputValidationError(f"step {step} exceeds L {L}", MODULE)
    count = int(math.floor(L / step + GRID_EPS)) + 1
    return step * np.arange(count)


def mc_persistence(
    mu: SpectralMeasure,
    L: float,
    step: Optional[float] = None,
    trials: Optional[int] = None,
    master_seed: int = 0,
    workers: Optional[int] = None,
) -> McEstimate:
    """
    P{f ≥ 0 at 0, step, ..., L} 의 몬테카를로 추정

    격자 사건은 연속 구간 사건을 포함하므로 연속 지속 확률의 상한 근사이다.
    """
    trials = get_settings().default_trials if trials is None else trials
    if trials < 1:
        raise InputValidationError("trials must be positive", MODULE)
    step = default_step(mu, L) if step is None else step
    sampler = FieldSampler(mu, persistence_grid(L, step), master_seed)

    def task(start: int, count: int) -> int:
        return int(np.count_nonzero(np.all(sampler.block(start, count) >= 0, axis=1)))

    successes = MonteCarloRunner(workers).run(trials, task)
    estimate = make_estimate(successes, trials)
    logger.info(
        "MC 지속 확률: L=%g step=%g trials=%d p_hat=%.5f (격자 %d 점)",
        L, step, trials, estimate.p_hat, sampler.points.size,
    )
    return estimate


def orthant_probability(rho: float) -> float:
    """표준 이변량 정규 (상관 rho) 의 P{g1 ≥ 0, g2 ≥ 0} = 1/4 + arcsin(rho)/(2π)"""
    if abs(rho) > 1.0 + 1e-12:
        raise InputValidationError(f"correlation must lie in [-1, 1] (got {rho})", MODULE)
    return 0.25 + math.asin(max(-1.0, min(1.0, rho))) / (2.0 * math.pi)


def mc_lemma_event(
    mu_unit: SpectralMeasure,
    nu: AtomicMeasure,
    phi: ShiftFunction,
    threshold: float,
    trials: Optional[int] = None,
    master_seed: int = 0,
    workers: Optional[int] = None,
) -> McEstimate:
    """{f+φ ≥ 0 on supp ν, ∫(f+φ)dν ≤ threshold} 의 경험 빈도"""
    trials = get_settings().default_trials if trials is None else trials
    positions = nu.positions
    support = np.asarray(phi.support, dtype=float)
    if support.shape != positions.shape or not np.allclose(support, positions, rtol=0.0, atol=1e-12):
        raise InputValidationError("shift support must match the support of nu", MODULE)
    if threshold < 0:
        raise InputValidationError("threshold must be non-negative", MODULE)

    shift = np.asarray(phi.values, dtype=float)
    weights = nu.weights
    sampler = FieldSampler(mu_unit, positions, master_seed)

    def task(start: int, count: int) -> int:
        values = sampler.block(start, count) + shift
        event = np.all(values >= 0, axis=1) & (values @ weights <= threshold)
        return int(np.count_nonzero(event))

    return make_estimate(MonteCarloRunner(workers).run(trials, task), trials)


def mc_second_moment(
    mu: SpectralMeasure,
    nu: AtomicMeasure,
    trials: Optional[int] = None,
    master_seed: int = 0,
    workers: Optional[int] = None,
) -> Tuple[float, float]:
    """E[(∫f dν)²] 의 표본 평균과 표준오차"""
    trials = get_settings().default_trials if trials is None else trials
    sampler = FieldSampler(mu, nu.positions, master_seed)
    weights = nu.weights
    squares = MonteCarloRunner(workers).collect(trials, lambda s, c: (sampler.block(s, c) @ weights) ** 2)
    stderr = float(np.std(squares, ddof=1) / math.sqrt(trials)) if trials > 1 else math.inf
    return float(np.mean(squares)), stderr


def sample_paths(
    mu: SpectralMeasure,
    step: float,
    count: int,
    trials: int,
    master_seed: int = 0,
    workers: Optional[int] = None,
) -> np.ndarray:
    """격자 0..(count−1)·step 위의 (trials, count) 표본 배열"""
    if count < 1:
        raise InputValidationError("count must be positive", MODULE)
    sampler = FieldSampler(mu, step * np.arange(count), master_seed)
    return MonteCarloRunner(workers).collect(trials, sampler.block)


# ============================================
# 스윕과 감쇠 적합
# ============================================
def mc_sweep(
    mu: SpectralMeasure,
    L_values: Sequence[float],
    step: Optional[float] = None,
    trials: Optional[int] = None,
    master_seed: int = 0,
    workers: Optional[int] = None,
) -> List[SweepRow]:
    """
    공통 난수 스윕: 가장 큰 L 의 격자에서 경로당 한 번만 표본을 뽑고
    첫 음수 인덱스로 모든 L 의 지속 여부를 판정 (L 에 대해 단조)
    """
    if not L_values:
        raise InputValidationError("sweep needs at least one L value", MODULE)
    trials = get_settings().default_trials if trials is None else trials
    L_max = max(L_values)
    step = default_step(mu, L_max) if step is None else step
    grid = persistence_grid(L_max, step)
    sampler = FieldSampler(mu, grid, master_seed)

    def first_negative(start: int, count: int) -> np.ndarray:
        negative = sampler.block(start, count) < 0
        return np.where(negative.any(axis=1), negative.argmax(axis=1), grid.size)

    firsts = MonteCarloRunner(workers).collect(trials, first_negative)
    rows = []
    for L in L_values:
        last = int(math.floor(L / step + GRID_EPS))
        successes = int(np.count_nonzero(firsts > last))
        rows.append(SweepRow(L=float(L), estimate=make_estimate(successes, trials)))
    logger.info("MC 스윕: %d 개 L, step=%g, trials=%d", len(rows), step, trials)
    return rows


def fit_log_decay(L_values: Sequence[float], p_hats: Sequence[float]) -> DecayFit:
    """log p̂ 를 [1, L, L²] 에 최소제곱 적합 (p̂ = 0 인 점은 제외)"""
    L = np.asarray(L_values, dtype=float)
    p = np.asarray(p_hats, dtype=float)
    keep = p > 0
    if not np.any(keep):
        return DecayFit(points_used=0)
    design = np.column_stack([np.ones(keep.sum()), L[keep], L[keep] ** 2])
    coef, *_ = np.linalg.lstsq(design, np.log(p[keep]), rcond=None)
    return DecayFit(
        intercept=float(coef[0]),
        slope_L=float(coef[1]),
        slope_L2=float(coef[2]),
        points_used=int(keep.sum()),
    )
