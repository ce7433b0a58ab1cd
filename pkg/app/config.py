from pydantic_settings import BaseSettings, SettingsConfigDict
from functools import lru_cache


class Settings(BaseSettings):
    """
    전역 설정 (.env 또는 PERSIST_ 접두어 환경변수)
    - HTTP 서버 설정
    - 몬테카를로 / 인증서 파이프라인 기본값
    """
    model_config = SettingsConfigDict(
        env_file=".env",
        env_prefix="PERSIST_",
        case_sensitive=False,
        extra="ignore",
    )

    app_name: str = "Gap Persistence API"
    debug: bool = False
    host: str = "0.0.0.0"
    port: int = 8000
    server_workers: int = 1  # uvicorn 프로세스 수 (debug 이면 무시)
    log_level: str = "INFO"

    # 병렬 처리 (결과는 워커 수와 무관해야 함)
    workers: int = 1
    mc_block_size: int = 1024
    default_trials: int = 10000

    # 수치 파라미터
    quadrature_nodes: int = 64  # 밀도 조각당 Gauss-Legendre 노드 수
    simpson_rtol: float = 1e-10
    n0: int = 72
    c_pp: float = 0.5
    rho_max_degree: int = 12
    lagrange_max_degree: int = 8
    sigma_max_degree: int = 24  # report 의 σ² 표 최대 N
    rho_condition_gate: float = 1e15


@lru_cache()
def get_settings() -> Settings:
    return Settings()
