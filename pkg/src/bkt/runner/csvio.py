"""CSV / JSON の読み書き

CSV の先頭には `# format_version=...` と `# config=<json>` のコメント行を置く。
読み込み時は # で始まる行を読み飛ばす。浮動小数は 17 桁で書くので往復で値が変わらない。
"""

import csv
import json
import logging
import math
import re
from pathlib import Path
from typing import Iterable, Optional, Sequence

from ..errors import InputError, ParseError
from ..models import PairedDataset
from .models import FORMAT_VERSION

logger = logging.getLogger(__name__)

HEADER_PATTERN = re.compile(r"^([xy])(\d+)$")


def fmt(value) -> str:
    """CSV セル用の書式 (浮動小数は 17 桁)"""
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def _expected_header(dim: int) -> list[str]:
    return [f"x{i}" for i in range(1, dim + 1)] + [f"y{i}" for i in range(1, dim + 1)]


def _parse_header(row: list[str], line: int) -> int:
    names = [c.strip() for c in row]
    if len(names) < 2 or len(names) % 2:
        raise ParseError("BAD_HEADER", f"expected header x1..xD,y1..yD, got {','.join(names)!r}", line)
    dim = len(names) // 2
    if names != _expected_header(dim):
        raise ParseError("BAD_HEADER", f"expected {','.join(_expected_header(dim))}, got {','.join(names)}", line)
    return dim


def _parse_cell(cell: str, line: int) -> float:
    try:
        value = float(cell)
    except ValueError:
        raise ParseError("NOT_NUMERIC", f"non-numeric cell {cell.strip()!r}", line) from None
    if not math.isfinite(value):
        raise ParseError("NON_FINITE", f"NaN or Inf cell {cell.strip()!r}", line)
    return value


def read_paired_csv(path) -> PairedDataset:
    """x1..xD,y1..yD 形式の CSV を読み込む

    Raises:
        InputError: ファイルが存在しない
        ParseError: ヘッダー・セル・列数の誤り (行番号付き), 2 行未満
    """
    path = Path(path)
    if not path.is_file():
        raise InputError("NO_INPUT", f"input file not found: {path}")

    dim: Optional[int] = None
    rows: list[list[float]] = []
    with path.open(newline="", encoding="utf-8") as f:
        for line, raw in enumerate(f, start=1):
            text = raw.strip()
            if not text or text.startswith("#"):
                continue
            row = next(csv.reader([text]))
            if dim is None:
                dim = _parse_header(row, line)
                continue
            if len(row) != 2 * dim:
                raise ParseError("RAGGED_ROW", f"expected {2 * dim} cells, got {len(row)}", line)
            rows.append([_parse_cell(c, line) for c in row])

    if dim is None:
        raise ParseError("BAD_HEADER", "missing header row x1..xD,y1..yD", 1)
    if len(rows) < 2:
        raise ParseError("TOO_FEW_ROWS", f"need at least 2 data rows, got {len(rows)}")

    x = [r[:dim] for r in rows]
    y = [r[dim:] for r in rows]
    logger.info("read %d rows (D=%d) from %s", len(rows), dim, path)
    return PairedDataset(x=x, y=y)


def _comment_lines(config: Optional[dict]) -> list[str]:
    lines = [f"# format_version={FORMAT_VERSION}"]
    if config is not None:
        lines.append("# config=" + json.dumps(config, sort_keys=True, ensure_ascii=False, separators=(",", ":")))
    return lines


def write_rows_csv(path, header: Sequence[str], rows: Iterable[Sequence], config: Optional[dict] = None) -> Path:
    """コメント行・ヘッダー・データ行を書く"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as f:
        for line in _comment_lines(config):
            f.write(line + "\n")
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) for v in row])
    return path


def write_paired_csv(path, data: PairedDataset, config: Optional[dict] = None) -> Path:
    rows = ([float(v) for v in xr] + [float(v) for v in yr] for xr, yr in zip(data.x, data.y))
    return write_rows_csv(path, _expected_header(data.dim), rows, config)


def write_samples_csv(path, output, config: Optional[dict] = None) -> Path:
    """Gibbs 連鎖の保持サンプル: iter,theta,m,log_bf"""
    rows = (
        (int(it), float(theta), int(m), float(lbf))
        for it, theta, m, lbf in zip(output.iterations, output.theta_samples, output.m_samples, output.log_bf_trace)
    )
    return write_rows_csv(path, ("iter", "theta", "m", "log_bf"), rows, config)


def write_json(path, obj: dict) -> Path:
    """キー順を固定した JSON (同じ内容なら同じバイト列)"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
    return path
