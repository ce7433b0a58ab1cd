from typing import Any, Dict

import uvicorn

from app.config import Settings, get_settings
from app.utils.log import setup_logging


def uvicorn_options(settings: Settings) -> Dict[str, Any]:
    """uvicorn.run 인자; reload 모드에서는 프로세스 워커를 쓸 수 없다"""
    options: Dict[str, Any] = {
        "host": settings.host,
        "port": settings.port,
        "log_level": settings.log_level.lower(),
        "reload": settings.debug,
    }
    if not settings.debug:
        options["workers"] = settings.server_workers
    return options


if __name__ == "__main__":
    settings = get_settings()
    setup_logging(settings.log_level)
    uvicorn.run("app.main:app", **uvicorn_options(settings))
