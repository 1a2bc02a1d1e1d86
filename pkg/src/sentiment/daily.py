"""
Leitura de posts, escore por texto e agregação diária do sentimento.
"""
import logging
from bisect import bisect_left
from collections import defaultdict
from dataclasses import dataclass
from datetime import date, datetime
from pathlib import Path
from typing import Dict, List, Sequence, Union

import pandas as pd
from dateutil import parser as date_parser

from src.errors import DataError
from src.sentiment.lexicon import Lexicon
from src.sentiment.vader import score_text

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SentimentRecord:
    timestamp: datetime
    raw_text: str
    compound: float

    def __post_init__(self):
        if not -1.0 <= self.compound <= 1.0:
            raise DataError("Escore composto fora de [-1, 1]", field="compound",
                            date=self.timestamp.date().isoformat(), value=self.compound)

    @property
    def day(self) -> date:
        # data do calendário local do próprio timestamp
        return self.timestamp.date()


@dataclass(frozen=True)
class DailySentiment:
    date: date
    compound: float
    sample_count: int

    def __post_init__(self):
        if self.sample_count < 0:
            raise DataError("Contagem negativa", field="sample_count", date=self.date.isoformat())
        if self.sample_count == 0 and self.compound != 0.0:
            raise DataError("Dia sem amostras deve ter sentimento neutro",
                            field="compound", date=self.date.isoformat())


def score_records(lexicon: Lexicon, posts: Sequence[tuple]) -> List[SentimentRecord]:
    """Pontua pares (timestamp, texto)."""
    return [SentimentRecord(ts, text, score_text(lexicon, text)) for ts, text in posts]


def load_tweets(source: Union[str, Path], lexicon: Lexicon) -> List[SentimentRecord]:
    """
    Lê um CSV `timestamp,text` e pontua cada post.

    Args:
        source: Caminho do CSV (textos podem vir entre aspas com vírgulas)
        lexicon: Léxico carregado

    Returns:
        Lista de SentimentRecord na ordem do arquivo

    Raises:
        DataError: Cabeçalho ausente ou timestamp inválido (com número da linha)
    """
    try:
        df = pd.read_csv(source, dtype=str, keep_default_na=False)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise DataError(f"Não foi possível ler os posts: {e}", field="tweets")

    missing = {'timestamp', 'text'} - set(df.columns)
    if missing:
        raise DataError(f"Colunas ausentes no CSV de posts: {sorted(missing)}", field="header", line=1)

    posts = []
    for idx, row in enumerate(df.itertuples(index=False)):
        try:
            ts = date_parser.isoparse(row.timestamp.strip())
        except (ValueError, OverflowError):
            raise DataError("Timestamp inválido", field="timestamp", line=idx + 2,
                            value=row.timestamp)
        posts.append((ts, row.text))

    records = score_records(lexicon, posts)
    logger.info(f"{len(records)} posts pontuados de {source}")
    return records


def aggregate_daily(records: Sequence[SentimentRecord],
                    trading_days: Sequence[date]) -> List[DailySentiment]:
    """
    Agrega os escores por pregão.

    Vários posts no mesmo dia viram a média dos escores. Posts em dias sem
    pregão contam para o próximo pregão. Pregões sem posts ficam com 0 e
    contagem 0. Posts depois do último pregão são descartados (com aviso).

    Args:
        records: Escores individuais
        trading_days: Pregões em ordem crescente

    Returns:
        Um DailySentiment por pregão
    """
    days = list(trading_days)
    if any(b <= a for a, b in zip(days, days[1:])):
        raise DataError("Pregões devem estar em ordem estritamente crescente", field="trading_days")

    buckets: Dict[int, List[float]] = defaultdict(list)
    dropped = 0
    for record in records:
        pos = bisect_left(days, record.day)
        if pos == len(days):
            dropped += 1
            continue
        buckets[pos].append(record.compound)

    if dropped:
        logger.warning(f"{dropped} posts depois do último pregão foram descartados")

    result = []
    for pos, day in enumerate(days):
        values = buckets.get(pos, [])
        compound = sum(values) / len(values) if values else 0.0
        result.append(DailySentiment(day, max(-1.0, min(1.0, compound)), len(values)))
    return result


def daily_to_frame(daily: Sequence[DailySentiment]) -> pd.DataFrame:
    return pd.DataFrame(
        [{'date': d.date.isoformat(), 'compound': d.compound, 'sample_count': d.sample_count}
         for d in daily],
        columns=['date', 'compound', 'sample_count'],
    )


def load_daily(source: Union[str, Path]) -> List[DailySentiment]:
    """Lê um CSV `date,compound,sample_count` gerado por daily_to_frame."""
    df = pd.read_csv(source, dtype={'date': str}, float_precision='round_trip')
    return [DailySentiment(date.fromisoformat(r.date), float(r.compound), int(r.sample_count))
            for r in df.itertuples(index=False)]
