from fastapi import APIRouter

from app.config import get_settings

router = APIRouter()

@router.get("/health")
async def health_check():
    settings = get_settings()
    return {
        "status": "healthy",
        "message": "Application is running",
        "n0": settings.n0,
        "workers": settings.workers,
    }
