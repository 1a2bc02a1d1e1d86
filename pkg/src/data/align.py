"""
Junção dos pregões com o sentimento diário.
"""
import io
import logging
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path
from typing import List, Sequence, TextIO, Tuple, Union

import numpy as np
import pandas as pd

from src.data.ohlcv import Series
from src.data.validator import FIELDS
from src.errors import DataError
from src.sentiment.daily import DailySentiment

logger = logging.getLogger(__name__)

ALIGNED_HEADER = ('date',) + FIELDS + ('sentiment',)


@dataclass(frozen=True, eq=False)
class AlignedDataset:
    symbol: str
    dates: Tuple[date, ...]
    features: np.ndarray
    sentiment: np.ndarray
    unmatched_sentiment: int = field(default=0, compare=False)

    def __post_init__(self):
        features = np.array(self.features, dtype=np.float64, copy=True).reshape(-1, len(FIELDS))
        sentiment = np.array(self.sentiment, dtype=np.float64, copy=True).reshape(-1)
        dates = tuple(self.dates)
        if not len(dates) == features.shape[0] == sentiment.shape[0]:
            raise DataError("Datas, atributos e sentimento com tamanhos diferentes",
                            field="features", rows=features.shape[0],
                            sentiment=sentiment.shape[0], dates=len(dates))
        features.setflags(write=False)
        sentiment.setflags(write=False)
        object.__setattr__(self, 'dates', dates)
        object.__setattr__(self, 'features', features)
        object.__setattr__(self, 'sentiment', sentiment)

    def __len__(self) -> int:
        return len(self.dates)

    @property
    def close(self) -> np.ndarray:
        return self.features[:, FIELDS.index('close')]

    def is_chronological(self) -> bool:
        return all(b > a for a, b in zip(self.dates, self.dates[1:]))

    def rows(self, start: int, stop: int) -> "AlignedDataset":
        return AlignedDataset(self.symbol, self.dates[start:stop],
                              self.features[start:stop], self.sentiment[start:stop])

    def equals(self, other: "AlignedDataset") -> bool:
        return (self.symbol == other.symbol and self.dates == other.dates
                and np.array_equal(self.features, other.features)
                and np.array_equal(self.sentiment, other.sentiment))


def align(series: Series, daily: Sequence[DailySentiment]) -> AlignedDataset:
    """
    Junta um escore de sentimento a cada pregão.

    Pregões sem sentimento recebem 0. Sentimento em datas fora dos pregões é
    ignorado e contado em `unmatched_sentiment`.

    Args:
        series: Série reparada (sem ausentes)
        daily: Sentimento diário

    Returns:
        AlignedDataset
    """
    matrix = series.matrix()
    if np.isnan(matrix).any():
        bad = next(bar for bar in series.bars if not bar.is_complete)
        raise DataError("Série com valores ausentes; aplique o reparo antes do alinhamento",
                        field=bad.missing_fields()[0], date=bad.date.isoformat())

    by_day = {d.date: d.compound for d in daily}
    dates = series.dates
    sentiment = np.array([by_day.get(day, 0.0) for day in dates], dtype=np.float64)
    unmatched = len(set(by_day) - set(dates))
    if unmatched:
        logger.warning(f"{series.symbol}: {unmatched} dias de sentimento fora dos pregões ignorados")
    return AlignedDataset(series.symbol, tuple(dates), matrix, sentiment, unmatched)


def dump_aligned(dataset: AlignedDataset) -> str:
    """CSV `date,open,high,low,close,adj_close,volume,sentiment`."""
    df = pd.DataFrame(dataset.features, columns=list(FIELDS))
    df.insert(0, 'date', [d.isoformat() for d in dataset.dates])
    df['sentiment'] = dataset.sentiment
    return df.to_csv(index=False, lineterminator='\n')


def load_aligned(source: Union[str, Path, TextIO], symbol: str = "") -> AlignedDataset:
    """Lê o CSV gerado por dump_aligned, com floats idênticos aos gravados."""
    if isinstance(source, str) and '\n' in source:
        source = io.StringIO(source)
    try:
        df = pd.read_csv(source, dtype={'date': str}, float_precision='round_trip')
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise DataError(f"Não foi possível ler o dataset alinhado: {e}", field="dataset")
    missing = [c for c in ALIGNED_HEADER if c not in df.columns]
    if missing:
        raise DataError(f"Colunas ausentes no dataset alinhado: {missing}", field="header", line=1)
    dates: List[date] = [date.fromisoformat(d) for d in df['date']]
    return AlignedDataset(symbol, tuple(dates), df[list(FIELDS)].to_numpy(dtype=np.float64),
                          df['sentiment'].to_numpy(dtype=np.float64))
