import logging
from contextlib import asynccontextmanager

from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware

from app.config import get_settings
from app.routers import health, persistence
from app.utils.log import setup_logging

logger = logging.getLogger(__name__)


@asynccontextmanager
async def lifespan(app: FastAPI):
    """앱 시작/종료 시 실행되는 이벤트"""
    settings = get_settings()
    setup_logging(settings.log_level)
    logger.info("서버 시작: n0=%d, c''=%g, workers=%d", settings.n0, settings.c_pp, settings.workers)

    yield

    logger.info("서버 종료 중...")


app = FastAPI(
    title=get_settings().app_name,
    description="스펙트럼 간격이 있는 정상 가우시안 과정의 부호 지속 확률 계산/인증 API",
    version="1.0.0",
    lifespan=lifespan
)

# CORS 설정
app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],  # 프로덕션에서는 특정 도메인으로 제한
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

# 라우터 등록
app.include_router(health.router, prefix="/api", tags=["health"])
app.include_router(persistence.router, prefix="/api/persistence", tags=["persistence"])

@app.get("/")
async def root():
    return {
        "message": get_settings().app_name,
        "version": "1.0.0",
        "docs": "/docs"
    }
