# app/models/sampling.py
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator


@dataclass(frozen=True, eq=False)
class SamplePath:
    """균일 격자 x0 + j·step 위의 한 표본 경로"""
    x0: float
    step: float
    values: np.ndarray
    seed_tag: int

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1 or values.size < 1:
            raise ValueError("sample path needs at least one value")
        if not np.all(np.isfinite(values)):
            raise ValueError("sample path values must be finite")
        if not self.step > 0:
            raise ValueError("step must be positive")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def grid(self) -> np.ndarray:
        return self.x0 + self.step * np.arange(self.values.size)


class McEstimate(BaseModel):
    """몬테카를로 추정치 + 95% Clopper-Pearson 구간"""
    model_config = ConfigDict(frozen=True)

    successes: int = Field(..., ge=0, description="사건 발생 횟수")
    trials: int = Field(..., gt=0, description="시행 횟수")
    p_hat: float = Field(..., ge=0, le=1, description="successes / trials")
    stderr: float = Field(..., ge=0, description="sqrt(p(1-p)/trials)")
    ci_lo: float = Field(..., description="Clopper-Pearson 하한")
    ci_hi: float = Field(..., description="Clopper-Pearson 상한")

    @model_validator(mode="after")
    def _check(self):
        if self.successes > self.trials:
            raise ValueError("successes cannot exceed trials")
        if not (self.ci_lo <= self.p_hat <= self.ci_hi):
            raise ValueError("confidence interval must contain p_hat")
        return self


class ShiftFunction(BaseModel):
    """supp ν 위에서 평가한 결정론적 이동 φ"""
    model_config = ConfigDict(frozen=True)

    support: Tuple[float, ...]
    values: Tuple[float, ...]

    @model_validator(mode="after")
    def _check(self):
        if len(self.support) != len(self.values):
            raise ValueError("support and values must have the same length")
        if not all(np.isfinite(self.values)) or not all(np.isfinite(self.support)):
            raise ValueError("shift values must be finite")
        return self

    @classmethod
    def zero(cls, support) -> "ShiftFunction":
        support = tuple(float(x) for x in support)
        return cls(support=support, values=(0.0,) * len(support))


class SweepRow(BaseModel):
    """L 스윕 한 행"""
    model_config = ConfigDict(frozen=True)

    L: float
    estimate: McEstimate


class DecayFit(BaseModel):
    """log p̂ ≈ intercept + slope_L·L + slope_L2·L² 최소제곱 적합"""
    model_config = ConfigDict(frozen=True)

    intercept: Optional[float] = None
    slope_L: Optional[float] = None
    slope_L2: Optional[float] = None
    points_used: int = 0


@dataclass(frozen=True, eq=False)
class DiscretizedMeasure:
    """샘플링용 원자 측도와 그로 인한 공분산 오차 max|k_disc − k|"""
    freqs: np.ndarray
    masses: np.ndarray
    covariance_error: float

    @property
    def amplitudes(self) -> np.ndarray:
        return np.sqrt(2.0 * self.masses)
