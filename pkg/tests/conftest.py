import numpy as np
import pytest

from bkt.inference import ChainConfig
from bkt.kernel import subsample_eval_points
from bkt.models import PairedDataset


@pytest.fixture
def rng():
    return np.random.default_rng(42)


@pytest.fixture
def shifted_1d():
    """x ~ N(0, 1), y ~ N(1, 1), n = 30"""
    rng = np.random.default_rng(7)
    return PairedDataset(x=rng.standard_normal((30, 1)), y=rng.standard_normal((30, 1)) + 1.0)


@pytest.fixture
def eval_points_1d(shifted_1d):
    return subsample_eval_points(shifted_1d, 6, seed=0)


@pytest.fixture
def short_chain():
    """数秒で終わる短い連鎖"""
    return ChainConfig(m_tilde=30, n_tilde=2, warmup_inner=1, burnin=10, thin=2, leapfrog_steps=3, seed=3)


@pytest.fixture
def write_csv(tmp_path):
    """テキストをそのまま CSV ファイルに書くヘルパー"""
    def _write(text: str, name: str = "data.csv"):
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return path
    return _write
