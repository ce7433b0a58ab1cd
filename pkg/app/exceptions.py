# app/exceptions.py
from typing import Optional


class PersistenceError(Exception):
    """
    모든 도메인 예외의 기반 클래스
    - module: 예외를 발생시킨 모듈 이름 (메시지 앞에 [module] 로 붙음)
    - exit_code: CLI 종료 코드
    """
    exit_code: int = 1
    http_status: int = 500

    def __init__(self, message: str, module: Optional[str] = None):
        self.module = module or "core"
        self.raw_message = message
        super().__init__(f"[{self.module}] {message}")


# ============================================
# 입력 검증 오류 (exit 2)
# ============================================
class InputValidationError(PersistenceError, ValueError):
    exit_code = 2
    http_status = 400


class MeasureValidationError(InputValidationError):
    """스펙트럼 측도 문서가 잘못됨"""


class GapViolationError(InputValidationError):
    """요청한 delta가 gap_radius보다 큼"""


class SupportViolationError(InputValidationError):
    """측도의 지지집합이 요구 구간 밖에 있음"""


class PlanInfeasibleError(InputValidationError):
    """밴드 계획이 n_0 조건을 만족하지 못함"""


class ConfigValidationError(InputValidationError):
    """CLI/API 설정 누락 또는 범위 오류"""


# ============================================
# 수치 결함 신호 (exit 3)
# ============================================
class NumericalDefectError(PersistenceError):
    exit_code = 3
    http_status = 422


class RootFindingError(NumericalDefectError):
    """Aberth-Ehrlich 반복이 수렴하지 않음"""


class CertificateDefectError(NumericalDefectError):
    """인증서 부등식 또는 구조 검사 실패"""


class ConditioningError(NumericalDefectError):
    """Hankel 모멘트 행렬의 조건수가 한계를 넘음"""


class EigenSolverError(NumericalDefectError):
    """Jacobi 회전이 수렴하지 않음"""
