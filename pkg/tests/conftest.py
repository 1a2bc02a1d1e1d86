"""
Configuração comum dos testes.
"""
from datetime import date
from pathlib import Path

import numpy as np
import pytest

from src.data.align import align
from src.data.synthetic import FIXTURE_LEXICON, bars_from_close, trading_days, write_lexicon
from src.sentiment.daily import DailySentiment

FIXTURES = Path(__file__).parent / "fixtures"


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False,
                     help="Roda também os testes longos de aceitação")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="use --runslow para rodar")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def fixtures_dir():
    return FIXTURES


@pytest.fixture
def lexicon_path(tmp_path):
    return write_lexicon(tmp_path / "lexicon.txt", FIXTURE_LEXICON)


def make_aligned(close, sentiment=None, symbol="SYN", seed=0, start=date(2022, 1, 3)):
    """Dataset alinhado a partir de uma trajetória de fechamento."""
    close = np.asarray(close, dtype=np.float64)
    rng = np.random.default_rng(seed)
    days = trading_days(start, close.shape[0])
    series = bars_from_close(days, close, rng, symbol=symbol)
    if sentiment is None:
        sentiment = np.zeros(close.shape[0])
    daily = [DailySentiment(d, float(s), 1 if s else 0) for d, s in zip(days, sentiment)]
    return align(series, daily)
