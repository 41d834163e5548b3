import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from precision import PrecisionContext  # noqa: E402


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="時間のかかる参照値テストも実行")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: 既定精度での表の再現など時間のかかるテスト")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="--runslow で実行")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def ctx():
    """テスト用の軽い精度（作業30桁・目標15桁）"""
    return PrecisionContext(working_digits=30, target_digits=15)


@pytest.fixture
def coarse_ctx():
    """二次元の適応積分を含むテスト用（作業22桁・目標10桁）"""
    return PrecisionContext(working_digits=22, target_digits=10, max_subdivisions=2000)
