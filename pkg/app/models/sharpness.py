# app/models/sharpness.py
from typing import Dict, List

from pydantic import BaseModel, ConfigDict, Field


class LowerBoundTrace(BaseModel):
    """
    하한 공식의 전체 추적
    - 모든 지수 크기는 log 로 계산하며 bound 는 float 로 언더플로할 수 있다
    """
    model_config = ConfigDict(frozen=True)

    C: float = Field(..., gt=0)
    L: float
    R: float
    L_normalized: float = Field(..., description="2πR·L")
    p0: float = Field(..., description="P{|g| > 1}")
    C_tilde: float = Field(..., description="C + 7 + 1/p0")
    K: int
    K_constraints: Dict[str, float]
    a: float = Field(..., description="e^{-CK}")
    log10_a: float
    alpha: float = Field(..., description="(a/2)e^{-L}")
    log10_alpha: float
    log_tail: float = Field(..., description="ln Σ_{k>K} e^{-a_k²/2}")
    tail_ok: bool
    bound: float = Field(..., ge=0, le=0.5)
    log10_bound: float


class LagrangeReport(BaseModel):
    """예제 측도에서 ρ_n ≥ 10^{-3n} 검증 결과"""
    model_config = ConfigDict(frozen=True)

    n: int
    n_max: int
    rho: float
    guaranteed: float = Field(..., description="10^{-3n}")
    rho_ok: bool
    nodes: List[float] = Field(..., description="세대 n+1 원자 위치")
    interpolation_identity_error: float = Field(..., description="|Σ ℓ_k(0)P(y_k) − 1|")
    chain_rhs: float = Field(..., description="10^{3n}·sqrt(∫|P|²dμ)")
    chain_ok: bool
    passed: bool
