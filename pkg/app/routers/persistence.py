# 지속 확률 API 라우터
import logging
from typing import Any, Dict

from fastapi import APIRouter, HTTPException

from app.exceptions import PersistenceError
from app.models.sampling import McEstimate
from app.models.sharpness import LowerBoundTrace
from app.schemas.api import (
    ApiResponse,
    CertifyRequest,
    EstimateRequest,
    LowerRequest,
    RhoRequest,
    SigmaRequest,
    TableData,
)
from app.services.dyadic_assembly import assemble, assembly_trace, plan_bands
from app.services.gp_sampler import mc_persistence
from app.services.report_writer import to_jsonable
from app.services.runner import rho_table, sigma_table
from app.services.sharpness import lower_bound
from app.services.spectral_measure import admissible_delta, parse_measure

logger = logging.getLogger(__name__)

router = APIRouter()


def _raise_http(e: PersistenceError):
    """도메인 예외 -> HTTPException (검증 400, 수치 결함 422)"""
    raise HTTPException(status_code=e.http_status, detail=str(e))


# ============================================
# API 엔드포인트
# ============================================

@router.post("/estimate", response_model=ApiResponse[McEstimate], summary="몬테카를로 지속 확률 추정")
def estimate(request: EstimateRequest):
    """
    격자 0, step, ..., L 위에서 P{f ≥ 0} 추정

    - 같은 seed 이면 같은 결과
    - 격자 사건이므로 연속 구간 확률의 상한 근사
    """
    try:
        mu = parse_measure(request.measure)
        est = mc_persistence(mu, request.L, step=request.step, trials=request.trials, master_seed=request.seed)
        return ApiResponse(success=True, message="추정 완료", data=est)
    except PersistenceError as e:
        _raise_http(e)


@router.post("/certify", response_model=ApiResponse[Dict[str, Any]], summary="dyadic 인증서 상한")
def certify(request: CertifyRequest):
    """
    밴드 계획 -> 밴드별 인증서 -> 상한 조립

    계획이 n_0 조건을 만족하지 못하면 단일점 경계 1/2 를 돌려준다.
    """
    try:
        mu = parse_measure(request.measure)
        delta = request.delta if request.delta is not None else admissible_delta(mu)
        plan = plan_bands(mu, delta, request.L, c_pp=request.c_pp, discrete=request.discrete)
        if not plan.feasible:
            data = {"trivial": True, "total_bound": 0.5, "diagnostics": plan.diagnostics}
            return ApiResponse(success=True, message="계획 불가 - 자명한 상한", data=data)
        bound = assemble(mu, delta, request.L, c_pp=request.c_pp, discrete=request.discrete)
        data = to_jsonable(assembly_trace(bound))
        data["trivial"] = False
        return ApiResponse(success=True, message="인증서 조립 완료", data=data)
    except PersistenceError as e:
        _raise_http(e)


@router.post("/lower", response_model=ApiResponse[LowerBoundTrace], summary="하한 공식")
def lower(request: LowerRequest):
    try:
        return ApiResponse(success=True, message="하한 계산 완료", data=lower_bound(request.C, request.L, request.R))
    except PersistenceError as e:
        _raise_http(e)


@router.post("/rho", response_model=ApiResponse[TableData], summary="ρ_n 표")
def rho(request: RhoRequest):
    try:
        columns, rows = rho_table(parse_measure(request.measure), request.n)
        return ApiResponse(success=True, message="ρ_n 계산 완료", data=TableData(columns=columns, rows=to_jsonable(rows)))
    except PersistenceError as e:
        _raise_http(e)


@router.post("/sigma", response_model=ApiResponse[TableData], summary="밴드별 σ² 표")
def sigma(request: SigmaRequest):
    try:
        mu = parse_measure(request.measure)
        delta = request.delta if request.delta is not None else admissible_delta(mu)
        columns, rows = sigma_table(mu, request.N, delta)
        return ApiResponse(success=True, message="σ² 계산 완료", data=TableData(columns=columns, rows=to_jsonable(rows)))
    except PersistenceError as e:
        _raise_http(e)
