from typing import Any, Dict, Generic, List, Optional, TypeVar

from pydantic import BaseModel, Field

# ============================================
# 공통 응답 포맷
# ============================================
T = TypeVar('T')


class ApiResponse(BaseModel, Generic[T]):
    """
    통일된 API 응답 형식
    - success: 성공 여부
    - message: 응답 메시지
    - data: 실제 데이터 (제네릭)
    """
    success: bool = Field(..., description="성공 여부")
    message: str = Field(..., description="응답 메시지")
    data: Optional[T] = Field(None, description="응답 데이터")

    class Config:
        json_schema_extra = {
            "example": {
                "success": True,
                "message": "요청이 성공했습니다",
                "data": {}
            }
        }


# ============================================
# Request 스키마
# ============================================
class MeasureRequest(BaseModel):
    """측도 문서를 포함하는 요청의 공통 부분"""
    measure: Dict[str, Any] = Field(..., description='{"atoms":[{"freq","mass"}], "density":[{"from","to","height"}]}')

    class Config:
        json_schema_extra = {
            "example": {
                "measure": {"atoms": [{"freq": 0.3, "mass": 0.5}]}
            }
        }


class EstimateRequest(MeasureRequest):
    L: float = Field(..., ge=0, description="구간 길이")
    step: Optional[float] = Field(None, gt=0, description="격자 간격 (기본: 자동)")
    trials: int = Field(10000, gt=0, le=1_000_000, description="시행 횟수")
    seed: int = Field(0, ge=0, lt=2 ** 64, description="마스터 시드")


class CertifyRequest(MeasureRequest):
    L: float = Field(..., gt=0, description="구간 길이")
    delta: Optional[float] = Field(None, gt=0, description="간격 δ (기본: admissible_delta)")
    c_pp: Optional[float] = Field(None, gt=0, description="c''")
    discrete: bool = Field(False, description="ℤ 위의 과정")


class LowerRequest(BaseModel):
    C: float = Field(..., gt=0, description="모멘트 조건 상수")
    L: float = Field(..., ge=1, description="구간 길이")
    R: float = Field(..., gt=0, description="지지 반경")


class RhoRequest(MeasureRequest):
    n: int = Field(..., ge=0, description="최대 차수")


class SigmaRequest(MeasureRequest):
    N: int = Field(..., ge=0, description="최대 차수")
    delta: Optional[float] = Field(None, gt=0, description="간격 δ (기본: admissible_delta)")


# ============================================
# Response Data 스키마
# ============================================
class TableData(BaseModel):
    """열 이름과 행 목록"""
    columns: List[str]
    rows: List[List[Any]]
