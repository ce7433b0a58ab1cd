import logging
import sys

_FORMAT = "%(asctime)s %(levelname)-7s %(name)s: %(message)s"


def setup_logging(level: str = "INFO") -> None:
    """
    로깅 초기화 (stderr 출력)
    - CLI의 stdout 산출물이 로그와 섞이지 않도록 stderr 사용
    """
    root = logging.getLogger()
    root.setLevel(level.upper())
    if not any(getattr(h, "_persist_handler", False) for h in root.handlers):
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter(_FORMAT))
        handler._persist_handler = True
        root.addHandler(handler)
