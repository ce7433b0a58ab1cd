# app/models/assembly.py
from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field

from app.models.certificate import AtomicMeasure, Certificate
from app.models.measure import BandId


class BandPlanEntry(BaseModel):
    model_config = ConfigDict(frozen=True)

    band: BandId
    a: float
    n_a: int
    mass_a: float


class ConditionReport(BaseModel):
    """세 밴드 조건(길이 합, 지수 합, 최소 n_a)의 평가값과 통과 여부"""
    model_config = ConfigDict(frozen=True)

    cond1_sum: float = Field(..., description="Σ n_a/a")
    cond1_ok: bool
    cond2_sum: float = Field(..., description="Σ e^{-c n_a}")
    cond2_ok: bool
    cond3_min: int = Field(..., description="min n_a")
    cond3_rhs: float = Field(..., description="c''·δ·L")
    cond3_ok: bool


class BandPlan(BaseModel):
    """n_a = ⌊c''·2^{k/2}·δ·L⌋, 질량이 있는 밴드만 유지"""
    model_config = ConfigDict(frozen=True)

    delta: float = Field(..., gt=0)
    L: float = Field(..., gt=0)
    c_pp: float = Field(..., gt=0)
    discrete: bool = False
    entries: List[BandPlanEntry]
    conditions: Optional[ConditionReport] = None
    feasible: bool = Field(..., description="모든 n_a ≥ n_0 이고 세 조건이 모두 성립하는지")
    diagnostics: List[str] = Field(default_factory=list)


class AssembledBound(BaseModel):
    model_config = ConfigDict(frozen=True)

    plan: BandPlan
    certificates: List[Certificate]
    nu_total: AtomicMeasure
    energy_sum: float = Field(..., description="Σ e^{-3c n_a} σ_a (E[(∫f dν)²]^{1/2} 상한)")
    energy_exact: float = Field(..., description="νᵀKν, 공분산으로 직접 계산한 E[(∫f dν)²]")
    argmax_band: Optional[BandId] = None
    tail_term: float
    event_term: float
    total_bound_raw: float
    total_bound: float = Field(..., ge=0, le=0.5)
    conditions: ConditionReport
