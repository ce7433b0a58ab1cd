# app/models/certificate.py
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.models.polynomial import Polynomial


class AtomicMeasure(BaseModel):
    """
    단위 질량 원자 측도 ν = Σ β_k δ_{x_k}
    - 위치: 서로 다르고 오름차순, 0 이상
    - 가중치: 양수, 합 1 (1e-12 이내)
    """
    model_config = ConfigDict(frozen=True)

    atoms: Tuple[Tuple[float, float], ...]

    @model_validator(mode="after")
    def _check(self):
        if not self.atoms:
            raise ValueError("atomic measure needs at least one atom")
        positions = [p for p, _ in self.atoms]
        weights = [w for _, w in self.atoms]
        if any(p < 0 for p in positions):
            raise ValueError("atom positions must be non-negative")
        if any(b <= a for a, b in zip(positions, positions[1:])):
            raise ValueError("atom positions must be distinct and sorted")
        if any(not w > 0 for w in weights):
            raise ValueError("atom weights must be positive")
        if abs(math.fsum(weights) - 1.0) > 1e-12:
            raise ValueError(f"atom weights must sum to 1 (got {math.fsum(weights)!r})")
        return self

    @classmethod
    def dirac(cls, position: float = 0.0) -> "AtomicMeasure":
        return cls(atoms=((float(position), 1.0),))

    @classmethod
    def from_arrays(cls, positions, weights) -> "AtomicMeasure":
        order = np.argsort(positions, kind="stable")
        return cls(atoms=tuple((float(positions[i]), float(weights[i])) for i in order))

    @property
    def positions(self) -> np.ndarray:
        return np.array([p for p, _ in self.atoms], dtype=float)

    @property
    def weights(self) -> np.ndarray:
        return np.array([w for _, w in self.atoms], dtype=float)

    @property
    def max_position(self) -> float:
        return self.atoms[-1][0]


@dataclass(frozen=True, eq=False)
class ToeplitzSpectrum:
    """Toeplitz 행렬의 최소 고유값 σ² 와 최소화 다항식"""
    sigma2: float
    minimizer: Polynomial
    dimension: int

    @property
    def sigma(self) -> float:
        return math.sqrt(self.sigma2)


class RhoValue(BaseModel):
    """ρ_n² = inf ∫|P|² dμ, P(y) = 1 + Σ a_k y^k"""
    model_config = ConfigDict(frozen=True)

    n: int = Field(..., ge=0)
    rho2: float = Field(..., ge=0)
    minimizer_moments: Tuple[float, ...] = Field(..., description="a_1..a_n")
    condition: float = Field(..., description="스케일된 모멘트 행렬의 조건수 추정")
    singular: bool = Field(False, description="고유분해 경로를 사용했는지")

    @property
    def rho(self) -> float:
        return math.sqrt(self.rho2)

    def polynomial(self) -> Polynomial:
        return Polynomial.of((1.0,) + tuple(self.minimizer_moments))


class SemicircleReport(BaseModel):
    """|Q(z)| ≤ 6^N 2^{-m/2} |P(z)| (z ∈ T_-) 표본 검사 결과"""
    model_config = ConfigDict(frozen=True)

    samples: int
    max_excess: float = Field(..., description="max(|Q| − 6^N 2^{-m/2}|P|)")
    passed: bool


class Certificate(BaseModel):
    """
    밴드 하나에 대한 양계수 다항식 인증서
    - N = ⌊n/23⌋, m = 8N, c = ln2/100
    - ν = Σ β_k δ_{k/a} (단위 밴드이면 a = 1)
    """
    model_config = ConfigDict(frozen=True)

    n: int
    N: int
    m: int
    c: float
    scale: float = Field(1.0, description="단위 밴드 기준 재스케일 인자 a")
    sigma2: float
    sigma: float
    lead_norm: float = Field(..., description="인수분해 P = a∏L_k 의 |a|")
    nu: AtomicMeasure
    q_coeffs: List[float]
    energy: float = Field(..., description="E[(∫f dν)²] = ∫|Q|² dμ")
    energy_bound: float = Field(..., description="2^{-2N}·σ²")
    threshold: float = Field(..., description="e^{-cn}·σ")
    prob_bound: float = Field(..., ge=0, le=1, description="min(1, (n e^{-cn})^{N+1}), σ=0 이면 0")
    prob_bound_raw: float
    log10_prob_bound: Optional[float] = None
    density_bound: float = Field(..., ge=0, le=1)
    flat_lo: int
    flat_hi: int
    semicircle: SemicircleReport
    checks: Dict[str, bool]

    @property
    def passed(self) -> bool:
        return all(self.checks.values()) and self.semicircle.passed


class UniversalBound(BaseModel):
    """P_{L,universal} 로 만든 ν 의 E[(∫f dν)²] 와 반원 위 상한"""
    model_config = ConfigDict(frozen=True)

    L: int
    L_prime: int
    coefficients: List[float]
    energy: float = Field(..., description="∫|P_universal|² dμ")
    sup_bound: float = Field(..., description="2^{-L'}·μ(ℝ), 밴드 (1/4,1/2] 에 지지된 측도에 대해 유효")
    band_supported: bool
