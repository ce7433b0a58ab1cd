# app/models/measure.py
import math
from typing import Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator


class Atom(BaseModel):
    """양의 반직선 위의 점질량 (음의 쪽은 대칭으로 암묵적으로 포함)"""
    model_config = ConfigDict(frozen=True)

    freq: float = Field(..., gt=0, description="주파수 (단위 길이당 주기)")
    mass: float = Field(..., gt=0, description="질량")


class DensityPiece(BaseModel):
    """구간 (lo, hi) 위의 상수 밀도 조각; JSON 에서는 from/to 키를 사용"""
    model_config = ConfigDict(frozen=True, populate_by_name=True)

    lo: float = Field(..., gt=0, alias="from", description="하한")
    hi: float = Field(..., gt=0, alias="to", description="상한")
    height: float = Field(..., ge=0, description="밀도 높이")

    @model_validator(mode="after")
    def _check_order(self):
        if not self.lo < self.hi:
            raise ValueError(f"density piece requires from < to (got {self.lo}, {self.hi})")
        return self

    @property
    def mass(self) -> float:
        return self.height * (self.hi - self.lo)


class SpectralMeasure(BaseModel):
    """
    대칭 스펙트럼 측도 μ
    - atoms: 주파수 오름차순, 서로 다른 주파수
    - density_pieces: 서로 겹치지 않는 상수 밀도 조각
    - 전체 질량 = 2·(Σ mass + Σ height·(hi−lo))
    """
    model_config = ConfigDict(frozen=True)

    atoms: Tuple[Atom, ...] = ()
    density_pieces: Tuple[DensityPiece, ...] = ()

    @model_validator(mode="after")
    def _check_invariants(self):
        freqs = [a.freq for a in self.atoms]
        if any(not math.isfinite(f) for f in freqs):
            raise ValueError("atom frequencies must be finite")
        if any(b <= a for a, b in zip(freqs, freqs[1:])):
            raise ValueError("atoms must be sorted by strictly increasing freq")
        pieces = sorted(self.density_pieces, key=lambda p: p.lo)
        for left, right in zip(pieces, pieces[1:]):
            if right.lo < left.hi:
                raise ValueError(
                    f"overlapping density pieces ({left.lo}, {left.hi}) and ({right.lo}, {right.hi})"
                )
        if any(not math.isfinite(p.hi) for p in pieces):
            raise ValueError("density pieces must be bounded")
        if not self.total_mass > 0:
            raise ValueError("empty measure")
        return self

    # ------------------------
    # 파생 값
    # ------------------------
    @property
    def total_mass(self) -> float:
        return 2.0 * math.fsum([a.mass for a in self.atoms] + [p.mass for p in self.density_pieces])

    @property
    def is_atomic(self) -> bool:
        return all(p.height == 0 for p in self.density_pieces)

    @property
    def max_frequency(self) -> float:
        tops = [a.freq for a in self.atoms] + [p.hi for p in self.density_pieces if p.height > 0]
        return max(tops) if tops else 0.0

    def atom_arrays(self) -> Tuple[np.ndarray, np.ndarray]:
        """(주파수, 질량) 배열 - 양의 쪽만"""
        return (
            np.array([a.freq for a in self.atoms], dtype=float),
            np.array([a.mass for a in self.atoms], dtype=float),
        )

    def to_document(self) -> dict:
        """측도 파일 형식(JSON) 딕셔너리"""
        return {
            "atoms": [{"freq": a.freq, "mass": a.mass} for a in self.atoms],
            "density": [p.model_dump(by_alias=True) for p in self.density_pieces],
        }


class BandId(BaseModel):
    """dyadic 밴드 번호 k (a = 2^k·δ)"""
    model_config = ConfigDict(frozen=True)

    k: int = Field(..., ge=2)

    def scale(self, delta: float) -> float:
        return math.ldexp(delta, self.k)
