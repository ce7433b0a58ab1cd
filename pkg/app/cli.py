# app/cli.py
"""
명령줄 진입점: python -m app <command> [options]

    estimate  몬테카를로 지속 확률 추정
    certify   dyadic 밴드 인증서로 상한 조립
    lower     모멘트 조건 하한
    rho       ρ_n 표 (n = 0..--n)
    sigma     밴드별 σ² 표 (N = 0..--n)
    sample    표본 경로 (x, f(x))
    sweep     L 스윕 + log p̂ 적합
    report    위 결과를 하나의 JSON 으로

종료 코드: 0 성공, 2 검증 오류, 3 수치 결함
"""
import argparse
import logging
import sys
from typing import List, Optional

from pydantic import ValidationError

from app.config import get_settings
from app.exceptions import ConfigValidationError
from app.schemas.run_config import Command, OutputFormat, RunConfig
from app.services.runner import run
from app.utils.log import setup_logging

logger = logging.getLogger(__name__)


def _float_list(text: str) -> List[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from e


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="python -m app",
        description="Sign-persistence probabilities of stationary Gaussian processes with a spectral gap",
    )
    parser.add_argument("command", choices=[c.value for c in Command])
    parser.add_argument("--measure", dest="measure_path", help="measure JSON file")
    parser.add_argument("--example-measure", type=int, metavar="N_MAX",
                        help="use the built-in gap measure with generations 2..N_MAX")
    parser.add_argument("--L", type=float, help="interval length")
    parser.add_argument("--L-values", dest="L_values", type=_float_list, help="comma-separated L values for sweep")
    parser.add_argument("--step", type=float, help="grid step (default: min(0.01/max freq, L/1000))")
    parser.add_argument("--trials", type=int, help="Monte Carlo trials")
    parser.add_argument("--seed", type=int, default=0, help="master seed (u64)")
    parser.add_argument("--delta", type=float, help="spectral gap δ (default: admissible gap radius)")
    parser.add_argument("--cpp", dest="c_pp", type=float, help="band sizing constant c''")
    parser.add_argument("--n", type=int, help="degree for rho / sigma tables")
    parser.add_argument("--C", type=float, help="moment-condition constant for the lower bound")
    parser.add_argument("--R", type=float, help="support radius (default: measure's max frequency)")
    parser.add_argument("--out", dest="out_path", help="output file (default: stdout)")
    parser.add_argument("--format", choices=[f.value for f in OutputFormat], default=OutputFormat.json.value)
    parser.add_argument("--discrete", action="store_true", help="process on ℤ: restrict bands to a ≤ 1")
    parser.add_argument("--workers", type=int, help="worker threads (results do not depend on it)")
    parser.add_argument("--log-level", default=None, help="logging level (default from settings)")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    values = {
        k: v for k, v in vars(args).items()
        if k != "log_level" and v is not None
    }
    try:
        return RunConfig(**values)
    except ValidationError as e:
        first = e.errors()[0]
        where = ".".join(str(p) for p in first.get("loc", ()))
        msg = first["msg"].removeprefix("Value error, ")
        raise ConfigValidationError(f"{where + ': ' if where else ''}{msg}", "cli") from e


def main(argv: Optional[List[str]] = None, stream=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.log_level or get_settings().log_level)
    try:
        config = config_from_args(args)
    except ConfigValidationError as e:
        logger.error("%s", e)
        return e.exit_code
    return run(config, stream=stream)


if __name__ == "__main__":
    sys.exit(main())
