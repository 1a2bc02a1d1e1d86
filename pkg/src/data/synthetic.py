"""
Geradores de séries sintéticas (preços e posts) para testes e execuções de ponta a ponta.

Tudo é determinístico dado o `np.random.Generator`.
"""
import logging
from datetime import date, datetime, time, timedelta
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
import yaml

from src.data.ohlcv import Bar, Series, dump_ohlcv

logger = logging.getLogger(__name__)

ASSETS = ("AAPL", "MSFT", "AMZN", "GOOGL", "META", "TSLA", "NVDA")

# Valências no formato do léxico VADER, usadas pelos posts sintéticos
FIXTURE_LEXICON = {
    "good": 1.9, "great": 3.1, "bad": -2.5, "love": 3.2, "hate": -2.7,
    "happy": 2.7, "sad": -2.1, "excellent": 2.7, "terrible": -2.1, "awful": -2.0,
    "nice": 1.8, "amazing": 2.8, "best": 3.2, "worst": -3.1, "strong": 2.3,
    "weak": -1.9, "win": 2.8, "loss": -1.3, "crash": -1.7, "fear": -2.2,
    "gain": 2.4, "profit": 1.9, "panic": -2.3, "hope": 1.9, "worry": -1.9,
    "no": -1.2,
}

POSITIVE_POSTS = (
    "great quarter, strong growth ahead",
    "love this stock, best buy of the year!",
    "excellent earnings, very happy holders",
    "amazing gain today!!",
    "good news for the company",
)
NEGATIVE_POSTS = (
    "terrible guidance, weak demand",
    "worst day in months, panic selling",
    "bad earnings and no hope",
    "crash incoming, fear everywhere!",
    "awful loss for holders",
)
NEUTRAL_POSTS = (
    "watching the chart today",
    "earnings call tomorrow morning",
)


def trading_days(start: date, n: int) -> List[date]:
    """n dias úteis (segunda a sexta) a partir de `start`."""
    return [ts.date() for ts in pd.bdate_range(start=start, periods=n)]


def random_walk(n: int, rng: np.random.Generator, start: float = 100.0, sigma: float = 1.0) -> np.ndarray:
    steps = rng.normal(0.0, sigma, size=n)
    steps[0] = 0.0
    return start + np.cumsum(steps)


def ar1(n: int, rng: np.random.Generator, phi: float = 0.8, sigma: float = 1.0,
        mean: float = 0.0, burn_in: int = 100) -> np.ndarray:
    """AR(1) estacionário: x_t = mean + phi (x_{t-1} - mean) + e_t."""
    x = np.zeros(n + burn_in)
    noise = rng.normal(0.0, sigma, size=n + burn_in)
    for t in range(1, n + burn_in):
        x[t] = phi * x[t - 1] + noise[t]
    return mean + x[burn_in:]


def ma1(n: int, rng: np.random.Generator, theta: float = 0.5, sigma: float = 1.0) -> np.ndarray:
    e = rng.normal(0.0, sigma, size=n + 1)
    return e[1:] + theta * e[:-1]


def ar1_with_sentiment(n: int, rng: np.random.Generator, phi: float = 0.9, sigma: float = 1.0,
                       level: float = 100.0, jump: float = 3.0,
                       threshold: float = 0.5) -> Tuple[np.ndarray, np.ndarray]:
    """
    Fechamento AR(1) com saltos guiados por sentimento.

    O sentimento diário é uniforme em [-1, 1]; quando o sentimento do dia t
    passa de `threshold`, o fechamento de t+1 recebe um salto de `jump`·sigma.

    Returns:
        (fechamentos, sentimento diário)
    """
    sentiment = rng.uniform(-1.0, 1.0, size=n)
    noise = rng.normal(0.0, sigma, size=n)
    dev = np.zeros(n)
    for t in range(1, n):
        dev[t] = phi * dev[t - 1] + noise[t]
        if sentiment[t - 1] > threshold:
            dev[t] += jump * sigma
    return level + dev, sentiment


def trend_sine(n: int, level: float = 100.0, slope: float = 0.01,
               amplitude: float = 10.0, period: float = 25.0) -> np.ndarray:
    """Tendência leve somada a uma senoide, sem ruído."""
    t = np.arange(n, dtype=np.float64)
    return level + slope * t + amplitude * np.sin(2.0 * np.pi * t / period)


def bars_from_close(days: Sequence[date], close: np.ndarray, rng: np.random.Generator,
                    spread: float = 0.01, symbol: str = "SYN") -> Series:
    """
    Monta barras OHLCV coerentes a partir de uma trajetória de fechamento.

    A abertura é o fechamento anterior; máxima e mínima envolvem abertura e
    fechamento com uma folga aleatória.
    """
    close = np.asarray(close, dtype=np.float64)
    if np.any(close <= 0):
        raise ValueError("Fechamentos sintéticos precisam ser positivos")
    bars = []
    for i, (day, c) in enumerate(zip(days, close)):
        o = close[i - 1] if i > 0 else c
        hi = max(o, c) * (1.0 + spread * rng.uniform())
        lo = min(o, c) * (1.0 - spread * rng.uniform())
        volume = float(rng.integers(1_000, 100_000))
        bars.append(Bar(day, float(o), float(hi), float(lo), float(c), float(c), volume))
    return Series(symbol, tuple(bars))


def synthetic_posts(days: Sequence[date], sentiment: np.ndarray, rng: np.random.Generator,
                    per_day: int = 2) -> pd.DataFrame:
    """
    Posts cujo tom acompanha o sinal do sentimento diário.

    Parte dos posts cai no sábado seguinte a uma sexta para exercitar a
    regra de rolagem para o próximo pregão.
    """
    rows = []
    for day, s in zip(days, sentiment):
        pool = POSITIVE_POSTS if s > 0.2 else NEGATIVE_POSTS if s < -0.2 else NEUTRAL_POSTS
        for k in range(per_day):
            text = pool[int(rng.integers(len(pool)))]
            posted = day
            if day.weekday() == 4 and k == per_day - 1:
                posted = day + timedelta(days=1)
            stamp = datetime.combine(posted, time(9 + k, 30))
            rows.append({'timestamp': stamp.isoformat(), 'text': text})
    return pd.DataFrame(rows, columns=['timestamp', 'text'])


def write_lexicon(path: Union[str, Path], entries: Optional[Dict[str, float]] = None) -> Path:
    path = Path(path)
    entries = entries or FIXTURE_LEXICON
    path.write_text(''.join(f"{w}\t{v}\t0.5\t[]\n" for w, v in sorted(entries.items())), encoding='utf-8')
    return path


def write_fixture(directory: Union[str, Path], seed: int, n_days: int = 260,
                  symbols: Sequence[str] = ASSETS, start: date = date(2022, 1, 3)) -> Path:
    """
    Grava um conjunto sintético completo: preços, posts, léxico e run.yaml.

    Cada ativo recebe uma dinâmica diferente (AR(1) com saltos por
    sentimento, passeio aleatório ou tendência com senoide).

    Args:
        directory: Pasta de destino
        seed: Semente
        n_days: Pregões por ativo
        symbols: Ativos
        start: Primeiro pregão

    Returns:
        Caminho do arquivo de configuração gerado
    """
    directory = Path(directory)
    (directory / "prices").mkdir(parents=True, exist_ok=True)
    (directory / "tweets").mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    days = trading_days(start, n_days)
    lexicon_path = write_lexicon(directory / "lexicon.txt")

    assets = []
    for k, symbol in enumerate(symbols):
        kind = k % 3
        if kind == 0:
            close, sentiment = ar1_with_sentiment(n_days, rng, level=50.0 + 25.0 * k)
        elif kind == 1:
            close = random_walk(n_days, rng, start=80.0 + 20.0 * k, sigma=0.8)
            sentiment = np.clip(np.diff(close, append=close[-1]) / 2.0, -1.0, 1.0)
        else:
            close = trend_sine(n_days, level=120.0 + 15.0 * k)
            sentiment = np.sin(2.0 * np.pi * np.arange(n_days) / 25.0)
        series = bars_from_close(days, close, rng, symbol=symbol)
        prices = directory / "prices" / f"{symbol}.csv"
        dump_ohlcv(series, prices)
        tweets = directory / "tweets" / f"{symbol}.csv"
        synthetic_posts(days, sentiment, rng).to_csv(tweets, index=False, lineterminator='\n')
        assets.append({'symbol': symbol, 'prices': str(prices), 'tweets': str(tweets)})

    config = {
        'seed': seed,
        'lexicon': str(lexicon_path),
        'output_dir': str(directory / "output"),
        'assets': assets,
    }
    config_path = directory / "run.yaml"
    with open(config_path, 'w', encoding='utf-8') as f:
        yaml.safe_dump(config, f, sort_keys=True)
    logger.info(f"Fixture sintética com {len(assets)} ativos gravada em {directory}")
    return config_path
