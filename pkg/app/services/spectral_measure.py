# services/spectral_measure.py
"""
대칭 스펙트럼 측도의 표현, 검증, 변환

- 측도 파일(JSON) 파싱 및 검증
- 공분산 k = μ̂ 평가
- dyadic 밴드 분해와 단위 밴드 재스케일
- ∫|q(e^{2πiy})|² dμ(y) 에너지 적분
"""
import json
import logging
import math
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, Field, ValidationError
from scipy.integrate import simpson

from app.config import get_settings
from app.exceptions import MeasureValidationError, SupportViolationError
from app.models.measure import Atom, BandId, DensityPiece, SpectralMeasure
from app.models.polynomial import Polynomial

logger = logging.getLogger(__name__)

MODULE = "spectral_measure"
EDGE_SHRINK = 1e-9
MAX_SIMPSON_POINTS = 1 << 22


# ============================================
# 측도 파일 스키마
# ============================================
class _AtomEntry(BaseModel):
    freq: float
    mass: float


class _DensityEntry(BaseModel):
    lo: float = Field(..., alias="from")
    hi: float = Field(..., alias="to")
    height: float


class MeasureDocument(BaseModel):
    """{"atoms":[{"freq","mass"}], "density":[{"from","to","height"}]} - 양의 반직선만"""
    atoms: List[_AtomEntry] = Field(default_factory=list)
    density: List[_DensityEntry] = Field(default_factory=list)


def parse_measure(text: Union[str, bytes, Dict]) -> SpectralMeasure:
    """
    측도 문서 -> 검증된 SpectralMeasure

    1. JSON 파싱 및 스키마 검증
    2. 유한성 / 부호 검사
    3. 같은 주파수의 원자 병합 후 정렬
    """
    try:
        raw = json.loads(text) if isinstance(text, (str, bytes)) else text
        doc = MeasureDocument.model_validate(raw)
    except (json.JSONDecodeError, ValidationError, TypeError) as e:
        raise MeasureValidationError(f"malformed measure document: {e}", MODULE) from e

    for entry in doc.atoms:
        if not (math.isfinite(entry.freq) and math.isfinite(entry.mass)):
            raise MeasureValidationError(
                "non-finite atom; measures with unbounded support need the mollifier reduction, "
                "which is not supported",
                MODULE,
            )
        if entry.freq <= 0:
            raise MeasureValidationError(f"atom freq must be positive (got {entry.freq})", MODULE)
        if entry.mass <= 0:
            raise MeasureValidationError(f"atom mass must be positive (got {entry.mass})", MODULE)
    for entry in doc.density:
        if not all(math.isfinite(v) for v in (entry.lo, entry.hi, entry.height)):
            raise MeasureValidationError(
                "unbounded density piece; measures with unbounded support need the mollifier "
                "reduction, which is not supported",
                MODULE,
            )
        if entry.height < 0:
            raise MeasureValidationError(f"negative density height {entry.height}", MODULE)

    merged: Dict[float, float] = {}
    for entry in doc.atoms:
        merged[entry.freq] = merged.get(entry.freq, 0.0) + entry.mass
    atoms = tuple(Atom(freq=f, mass=m) for f, m in sorted(merged.items()))

    try:
        pieces = tuple(
            sorted(
                (DensityPiece(lo=e.lo, hi=e.hi, height=e.height) for e in doc.density),
                key=lambda p: p.lo,
            )
        )
    except ValidationError as e:
        raise MeasureValidationError(f"invalid density piece: {e.errors()[0]['msg']}", MODULE) from e

    if not atoms and not any(p.height > 0 for p in pieces):
        raise MeasureValidationError("empty measure", MODULE)

    return build_measure(atoms, pieces)


def build_measure(atoms, pieces=()) -> SpectralMeasure:
    """검증 오류를 MeasureValidationError 로 변환하며 측도 생성"""
    try:
        return SpectralMeasure(atoms=tuple(atoms), density_pieces=tuple(pieces))
    except ValidationError as e:
        msg = e.errors()[0]["msg"].removeprefix("Value error, ")
        raise MeasureValidationError(msg, MODULE) from e


def atomic_measure(pairs) -> SpectralMeasure:
    """[(freq, mass), ...] 로부터 원자 측도 생성 (테스트/예제용 편의 함수)"""
    merged: Dict[float, float] = {}
    for freq, mass in pairs:
        merged[float(freq)] = merged.get(float(freq), 0.0) + float(mass)
    return build_measure(Atom(freq=f, mass=m) for f, m in sorted(merged.items()))


# ============================================
# 간격 (gap)
# ============================================
def gap_radius(mu: SpectralMeasure) -> float:
    """sup{δ ≥ 0 : μ([−δ,δ]) = 0}"""
    candidates = [a.freq for a in mu.atoms] + [p.lo for p in mu.density_pieces if p.height > 0]
    return min(candidates) if candidates else 0.0


def admissible_delta(mu: SpectralMeasure) -> float:
    """μ([−δ,δ]) = 0 을 만족하는 δ (가장자리에 원자가 있으면 약간 줄임)"""
    gap = gap_radius(mu)
    if mu.atoms and mu.atoms[0].freq == gap:
        return gap * (1.0 - EDGE_SHRINK)
    return gap


# ============================================
# 공분산
# ============================================
def covariance(mu: SpectralMeasure, x):
    """
    k(x) = 2Σ m_j cos(2πλ_j x) + 2Σ h_p [sin(2π hi x) − sin(2π lo x)]/(2πx)

    x 는 스칼라 또는 배열. 밀도 항은 np.sinc 로 x = 0 극한까지 처리한다.
    """
    xs = np.asarray(x, dtype=float)
    result = np.zeros(xs.shape)
    freqs, masses = mu.atom_arrays()
    if freqs.size:
        result += 2.0 * np.tensordot(masses, np.cos(2.0 * np.pi * np.multiply.outer(freqs, xs)), axes=1)
    for piece in mu.density_pieces:
        if piece.height == 0:
            continue
        result += 2.0 * piece.height * (
            piece.hi * np.sinc(2.0 * piece.hi * xs) - piece.lo * np.sinc(2.0 * piece.lo * xs)
        )
    return float(result) if np.ndim(x) == 0 else result


def moments(mu: SpectralMeasure, order: int, scale: float = 1.0) -> np.ndarray:
    """
    ∫ (y/scale)^p dμ(y), p = 0..order (대칭이므로 홀수 모멘트는 0)
    원자 합은 math.fsum 으로 보정 합산
    """
    out = np.zeros(order + 1)
    freqs, masses = mu.atom_arrays()
    for p in range(0, order + 1, 2):
        terms = [2.0 * m * (f / scale) ** p for f, m in zip(freqs, masses)]
        for piece in mu.density_pieces:
            if piece.height == 0:
                continue
            lo, hi = piece.lo / scale, piece.hi / scale
            terms.append(2.0 * piece.height * scale * (hi ** (p + 1) - lo ** (p + 1)) / (p + 1))
        out[p] = math.fsum(terms)
    return out


# ============================================
# dyadic 분해
# ============================================
def dyadic_band(mu: SpectralMeasure, band: BandId, delta: float) -> Optional[SpectralMeasure]:
    """
    μ 를 (a/4, a/2] 로 제한 (a = 2^k·δ)

    반열린 규약이므로 밴드들이 정확한 분할을 이룬다. 빈 밴드는 None (영측도).
    """
    if not delta > 0:
        raise MeasureValidationError("delta must be positive", MODULE)
    a = band.scale(delta)
    lo_edge, hi_edge = a / 4.0, a / 2.0
    atoms = [atom for atom in mu.atoms if lo_edge < atom.freq <= hi_edge]
    pieces = []
    for piece in mu.density_pieces:
        lo, hi = max(piece.lo, lo_edge), min(piece.hi, hi_edge)
        if lo < hi and piece.height > 0:
            pieces.append(DensityPiece(lo=lo, hi=hi, height=piece.height))
    if not atoms and not pieces:
        return None
    return SpectralMeasure(atoms=tuple(atoms), density_pieces=tuple(pieces))


def band_range(mu: SpectralMeasure, delta: float) -> Tuple[int, int]:
    """질량이 있을 수 있는 밴드 번호 범위 [2, k_max]"""
    top = mu.max_frequency
    k_max = max(2, math.ceil(math.log2(2.0 * top / delta)))
    # 반올림 오차 보정: 최상위 원자가 (a/4, a/2] 에 들어가도록
    while math.ldexp(delta, k_max) / 2.0 < top:
        k_max += 1
    return 2, k_max


def check_band_support(mu: SpectralMeasure, a: float) -> None:
    """μ 가 (a/4, a/2] 에 지지되는지 검사 (상대 허용오차 1e-12)"""
    lo_edge, hi_edge = a / 4.0, a / 2.0
    tol = 1e-12 * hi_edge
    for atom in mu.atoms:
        if not (lo_edge - tol < atom.freq <= hi_edge + tol):
            raise SupportViolationError(
                f"atom at {atom.freq} lies outside the band ({lo_edge}, {hi_edge}]", MODULE
            )
    for piece in mu.density_pieces:
        if piece.height > 0 and not (piece.lo >= lo_edge - tol and piece.hi <= hi_edge + tol):
            raise SupportViolationError(
                f"density piece ({piece.lo}, {piece.hi}) lies outside the band ({lo_edge}, {hi_edge}]",
                MODULE,
            )


def rescale_to_unit_band(mu_a: SpectralMeasure, a: float) -> SpectralMeasure:
    """y ↦ y/a 푸시포워드; 결과는 (1/4, 1/2] 에 지지되고 질량 보존"""
    if not a > 0:
        raise SupportViolationError("scale a must be positive", MODULE)
    check_band_support(mu_a, a)
    atoms = tuple(Atom(freq=atom.freq / a, mass=atom.mass) for atom in mu_a.atoms)
    pieces = tuple(
        DensityPiece(lo=p.lo / a, hi=p.hi / a, height=p.height * a) for p in mu_a.density_pieces
    )
    return SpectralMeasure(atoms=atoms, density_pieces=pieces)


# ============================================
# 에너지 적분
# ============================================
def _circle_power(q: Polynomial, y: np.ndarray) -> np.ndarray:
    """|q(e^{2πiy})|² + |q(e^{−2πiy})|²"""
    return np.abs(q.on_circle(y)) ** 2 + np.abs(q.on_circle(-y)) ** 2


def energy_integral(mu: SpectralMeasure, q: Polynomial, rtol: Optional[float] = None) -> float:
    """
    ∫ |q(e^{2πiy})|² dμ(y)

    - 원자: +freq, −freq 양쪽에서 정확히 평가 (복소 계수이면 두 값이 다름)
    - 밀도: 합성 Simpson, 패널 수를 두 배씩 늘려 오차 추정이 허용치 미만이 될 때까지
    """
    rtol = get_settings().simpson_rtol if rtol is None else rtol
    terms: List[float] = []
    freqs, masses = mu.atom_arrays()
    if freqs.size:
        terms.extend((masses * _circle_power(q, freqs)).tolist())

    qmax2 = float(np.sum(np.abs(q.coeffs))) ** 2
    tol = rtol * mu.total_mass * max(qmax2, 1e-300)
    for piece in mu.density_pieces:
        if piece.height == 0:
            continue
        terms.append(piece.height * _simpson_piece(q, piece.lo, piece.hi, tol / piece.height))
    return max(0.0, math.fsum(terms))


def _simpson_piece(q: Polynomial, lo: float, hi: float, tol: float) -> float:
    panels = max(16, 2 * math.ceil(8 * max(q.degree, 1) * (hi - lo)))
    grid = np.linspace(lo, hi, panels + 1)
    previous = simpson(_circle_power(q, grid), x=grid)
    while True:
        panels *= 2
        grid = np.linspace(lo, hi, panels + 1)
        current = simpson(_circle_power(q, grid), x=grid)
        if abs(current - previous) / 15.0 < tol:
            return current
        if panels + 1 > MAX_SIMPSON_POINTS:
            logger.warning("Simpson 패널 한도 도달: (%g, %g) 오차 추정 %.3e", lo, hi, abs(current - previous) / 15.0)
            return current
        previous = current
