from enum import Enum
from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator


class Command(str, Enum):
    estimate = "estimate"
    certify = "certify"
    lower = "lower"
    rho = "rho"
    sigma = "sigma"
    sample = "sample"
    sweep = "sweep"
    report = "report"


class OutputFormat(str, Enum):
    csv = "csv"
    json = "json"
    svg = "svg"


# 명령별 필수 필드
REQUIRED = {
    Command.estimate: ("L",),
    Command.certify: ("L",),
    Command.lower: ("C", "L"),
    Command.rho: ("n",),
    Command.sigma: ("n",),
    Command.sample: ("L",),
    Command.sweep: ("L_values",),
    Command.report: ("L",),
}
NEEDS_MEASURE = {
    Command.estimate, Command.certify, Command.rho, Command.sigma,
    Command.sample, Command.sweep, Command.report,
}
# 명령별 허용 출력 형식
FORMATS = {
    Command.estimate: {OutputFormat.json, OutputFormat.csv},
    Command.certify: {OutputFormat.json},
    Command.lower: {OutputFormat.json},
    Command.rho: {OutputFormat.json, OutputFormat.csv},
    Command.sigma: {OutputFormat.json, OutputFormat.csv},
    Command.sample: {OutputFormat.json, OutputFormat.csv, OutputFormat.svg},
    Command.sweep: {OutputFormat.json, OutputFormat.csv, OutputFormat.svg},
    Command.report: {OutputFormat.json},
}


class RunConfig(BaseModel):
    """
    CLI 한 번 실행의 설정
    - 측도는 measure_path (JSON 파일) 또는 example_measure (n_max) 중 하나
    - 모든 난수는 seed 하나에서 나온다
    """
    model_config = ConfigDict(frozen=True)

    command: Command
    measure_path: Optional[str] = None
    example_measure: Optional[int] = Field(None, ge=3, description="예제 측도 n_max")
    L: Optional[float] = Field(None, ge=0)
    L_values: Optional[List[float]] = None
    step: Optional[float] = Field(None, gt=0)
    trials: Optional[int] = Field(None, gt=0)
    seed: int = Field(0, ge=0, lt=2 ** 64)
    delta: Optional[float] = Field(None, gt=0)
    c_pp: Optional[float] = Field(None, gt=0)
    n: Optional[int] = Field(None, ge=0)
    C: Optional[float] = Field(None, gt=0)
    R: Optional[float] = Field(None, gt=0)
    out_path: Optional[str] = None
    format: OutputFormat = OutputFormat.json
    discrete: bool = False
    workers: Optional[int] = Field(None, ge=1)

    @model_validator(mode="after")
    def _check_required(self):
        missing = [name for name in REQUIRED[self.command] if getattr(self, name) is None]
        if missing:
            raise ValueError(f"command '{self.command.value}' requires {', '.join('--' + m for m in missing)}")
        if self.command in NEEDS_MEASURE and (self.measure_path is None) == (self.example_measure is None):
            raise ValueError("exactly one of --measure or --example-measure is required")
        if self.command == Command.lower and self.R is None and self.measure_path is None and self.example_measure is None:
            raise ValueError("command 'lower' requires --R or a measure to read R from")
        if self.format not in FORMATS[self.command]:
            raise ValueError(f"format '{self.format.value}' is not available for '{self.command.value}'")
        if self.L_values is not None and (not self.L_values or any(v < 0 for v in self.L_values)):
            raise ValueError("--L-values must be a non-empty list of non-negative numbers")
        return self
