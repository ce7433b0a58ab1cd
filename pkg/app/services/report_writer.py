# services/report_writer.py
"""
실행 결과를 CSV / JSON / SVG 로 직렬화

- 타임스탬프 등 비결정적 값은 넣지 않는다 (같은 설정 + 시드 -> 같은 바이트)
- CSV: '.' 소수점, '\n' 줄바꿈, 헤더 행 필수
- JSON: 키 정렬, 비유한 실수는 null
"""
import csv
import io
import json
import math
import sys
from typing import Any, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel

SVG_WIDTH = 640
SVG_HEIGHT = 400
SVG_MARGIN = 40


def to_jsonable(obj: Any) -> Any:
    if isinstance(obj, BaseModel):
        return to_jsonable(obj.model_dump(mode="json"))
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, np.generic):
        return to_jsonable(obj.item())
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def render_json(payload: Any) -> str:
    return json.dumps(to_jsonable(payload), indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return repr(value) if math.isfinite(value) else ""
    return str(value)


def render_csv(columns: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buffer.getvalue()


def parse_csv(text: str) -> Tuple[List[str], List[List[str]]]:
    """render_csv 의 역: (헤더, 문자열 행)"""
    reader = csv.reader(io.StringIO(text))
    columns = next(reader)
    return columns, [row for row in reader]


def render_svg(xs: Sequence[float], ys: Sequence[float], title: str = "", x_label: str = "", y_label: str = "") -> str:
    """단일 계열 polyline 플롯"""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    x_lo, x_hi = (float(x.min()), float(x.max())) if x.size else (0.0, 1.0)
    y_lo, y_hi = (float(y.min()), float(y.max())) if y.size else (0.0, 1.0)
    if x_hi == x_lo:
        x_hi = x_lo + 1.0
    if y_hi == y_lo:
        y_hi = y_lo + 1.0
    inner_w = SVG_WIDTH - 2 * SVG_MARGIN
    inner_h = SVG_HEIGHT - 2 * SVG_MARGIN
    px = SVG_MARGIN + (x - x_lo) / (x_hi - x_lo) * inner_w
    py = SVG_HEIGHT - SVG_MARGIN - (y - y_lo) / (y_hi - y_lo) * inner_h
    points = " ".join(f"{a:.3f},{b:.3f}" for a, b in zip(px, py))
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_WIDTH}" height="{SVG_HEIGHT}" '
        f'viewBox="0 0 {SVG_WIDTH} {SVG_HEIGHT}">\n'
        f'  <title>{title}</title>\n'
        f'  <rect x="{SVG_MARGIN}" y="{SVG_MARGIN}" width="{inner_w}" height="{inner_h}" '
        'fill="none" stroke="#999"/>\n'
        f'  <polyline fill="none" stroke="#1f77b4" stroke-width="1.5" points="{points}"/>\n'
        f'  <text x="{SVG_WIDTH // 2}" y="{SVG_HEIGHT - 8}" text-anchor="middle" font-size="12">'
        f'{x_label} [{x_lo:.6g}, {x_hi:.6g}]</text>\n'
        f'  <text x="12" y="{SVG_HEIGHT // 2}" font-size="12" '
        f'transform="rotate(-90 12 {SVG_HEIGHT // 2})" text-anchor="middle">'
        f'{y_label} [{y_lo:.6g}, {y_hi:.6g}]</text>\n'
        '</svg>\n'
    )


def write_text(text: str, out_path: Optional[str], stream=None) -> None:
    """out_path 가 없으면 stream (기본 stdout) 에 쓴다"""
    if out_path:
        with open(out_path, "w", encoding="utf-8", newline="") as f:
            f.write(text)
    else:
        (stream or sys.stdout).write(text)
