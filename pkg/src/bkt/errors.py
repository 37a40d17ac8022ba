"""bkt 例外定義

すべての例外は BKTError を継承し、機械可読な code と CLI の終了コードを持つ。
終了コード: 1 = 使い方/設定, 2 = データ, 3 = 数値計算の失敗
"""

from typing import Optional


class BKTError(Exception):
    """bkt の基底例外"""
    exit_code = 3

    def __init__(self, code: str, message: str = ""):
        self.code = code
        super().__init__(f"bkt error [{code}]: {message}")


# ── 設定・使い方 (exit 1) ──

class UsageError(BKTError):
    """CLI の使い方の誤り"""
    exit_code = 1


class ConfigError(UsageError):
    """設定値の誤り (奇数の s, 不正なグリッド指定, サイズ上限超過など)"""


# ── データ (exit 2) ──

class InputError(BKTError):
    """入力配列の形状・値の誤り"""
    exit_code = 2


class ParseError(InputError):
    """CSV の解析エラー"""

    def __init__(self, code: str, message: str = "", line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(code, message)


class ParameterError(InputError):
    """カーネルパラメータの誤り (θ ≤ 0 など)"""


class DegenerateDataError(InputError):
    """全点が一致するなど、データが退化している"""


# ── 数値計算 (exit 3) ──

class NumericalError(BKTError):
    """数値計算の失敗"""
    exit_code = 3


class CovarianceSingularError(NumericalError):
    """PSD 修復後も Cholesky 分解に失敗した"""


class DegenerateGeometryError(NumericalError):
    """J^T J が特異 (ヤコビアンの体積がゼロ)"""

    def __init__(
        self,
        code: str,
        message: str = "",
        lambda_min: float = 0.0,
        pair_index: Optional[int] = None,
    ):
        self.lambda_min = lambda_min
        self.pair_index = pair_index
        detail = f"{message} (lambda_min={lambda_min:.3e}"
        if pair_index is not None:
            detail += f", pair={pair_index}"
        super().__init__(code, detail + ")")
