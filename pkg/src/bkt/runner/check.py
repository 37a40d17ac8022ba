"""`bkt check`: 効率版と密な参照実装の一致検査"""

import logging

from ..oracle import OracleReport, run_oracle_suite

logger = logging.getLogger(__name__)

FAILED_EXIT = 3


def run_check(instances: int = 1000, seed: int = 0, perturbation: float = 0.0) -> tuple[int, OracleReport]:
    """検査スイートを実行し、(終了コード, レポート) を返す。全項目合格なら 0。"""
    report = run_oracle_suite(instances=instances, seed=seed, perturbation=perturbation)
    if not report.passed:
        failed = [r.name for r in report.results if not r.passed]
        logger.warning("oracle checks failed: %s", ", ".join(failed))
        return FAILED_EXIT, report
    return 0, report
