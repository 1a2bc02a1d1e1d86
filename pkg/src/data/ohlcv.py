"""
Leitura, serialização e reparo de séries diárias OHLCV.
"""
import io
import json
import logging
import math
from dataclasses import dataclass, field, replace
from datetime import date
from pathlib import Path
from typing import List, Optional, Sequence, TextIO, Tuple, Union

import numpy as np
import pandas as pd

from src.data.validator import FIELDS, HEADER, PRICE_FIELDS, BarValidator
from src.errors import DataError

logger = logging.getLogger(__name__)

CLOSE_INDEX = FIELDS.index('close')
MISSING = float('nan')


@dataclass(frozen=True)
class Bar:
    date: date
    open: float
    high: float
    low: float
    close: float
    adj_close: float
    volume: float

    def values(self) -> Tuple[float, ...]:
        return tuple(getattr(self, name) for name in FIELDS)

    def missing_fields(self) -> List[str]:
        return [name for name in FIELDS if math.isnan(getattr(self, name))]

    @property
    def is_complete(self) -> bool:
        return not self.missing_fields()


@dataclass(frozen=True)
class Series:
    """Série de um ativo, em ordem estritamente crescente de data."""

    symbol: str
    bars: Tuple[Bar, ...]
    duplicates_removed: int = field(default=0, compare=False)

    def __post_init__(self):
        object.__setattr__(self, 'bars', tuple(self.bars))
        for prev, nxt in zip(self.bars, self.bars[1:]):
            if nxt.date <= prev.date:
                raise DataError("Datas da série devem ser estritamente crescentes",
                                field="date", date=nxt.date.isoformat())

    def __len__(self) -> int:
        return len(self.bars)

    @property
    def dates(self) -> List[date]:
        return [bar.date for bar in self.bars]

    def matrix(self) -> np.ndarray:
        """Matriz T x 6 na ordem open, high, low, close, adj_close, volume."""
        return np.array([bar.values() for bar in self.bars], dtype=np.float64).reshape(-1, len(FIELDS))


@dataclass(frozen=True)
class RepairEntry:
    date: date
    field: str
    action: str

    def to_dict(self) -> dict:
        return {'date': self.date.isoformat(), 'field': self.field, 'action': self.action}


def _parse_value(raw, name: str, line: int, day: str) -> float:
    if not isinstance(raw, str):
        raise DataError("Linha malformada: número de colunas incorreto", field=name, line=line, date=day)
    if raw == '':
        return MISSING
    try:
        return float(raw)
    except ValueError:
        raise DataError(f"Valor não numérico '{raw}'", field=name, line=line, date=day)


def load_ohlcv(source: Union[str, Path, TextIO], symbol: str = "") -> Series:
    """
    Lê um CSV `date,open,high,low,close,adj_close,volume`.

    Campos vazios viram ausentes (NaN) para o reparo. Datas repetidas mantêm
    a primeira linha e a contagem fica em `duplicates_removed`.

    Args:
        source: Caminho ou stream do CSV
        symbol: Identificador do ativo

    Returns:
        Series validada e ordenada por data

    Raises:
        DataError: Linha malformada (com número da linha) ou invariante
            violado (com campo e data)
    """
    if isinstance(source, str) and '\n' in source:
        source = io.StringIO(source)
    try:
        df = pd.read_csv(source, dtype=str, keep_default_na=False)
    except pd.errors.EmptyDataError:
        raise DataError("CSV de preços vazio", field="header", line=1)
    except pd.errors.ParserError as e:
        raise DataError(f"CSV de preços malformado: {e}", field="row")
    except OSError as e:
        raise DataError(f"Não foi possível ler os preços: {e}", field="source")

    df.columns = [str(c).strip().lower() for c in df.columns]
    missing = [c for c in HEADER if c not in df.columns]
    if missing:
        raise DataError(f"Colunas ausentes: {missing}", field="header", line=1)

    bars = {}
    duplicates = 0
    for idx, raw in enumerate(df[list(HEADER)].to_dict('records')):
        line = idx + 2
        row = BarValidator.clean_row(raw)
        day_raw = row['date']
        if not isinstance(day_raw, str) or not day_raw:
            raise DataError("Data ausente", field="date", line=line)
        try:
            day = date.fromisoformat(day_raw[:10])
        except ValueError:
            raise DataError(f"Data inválida '{day_raw}'", field="date", line=line)

        bar = Bar(day, *(_parse_value(row[name], name, line, day.isoformat()) for name in FIELDS))
        issues = BarValidator.check_fields(bar)
        if issues:
            name, message = issues[0]
            raise DataError(message, field=name, date=day.isoformat(), line=line)

        if day in bars:
            duplicates += 1
            continue
        bars[day] = bar

    if duplicates:
        logger.warning(f"{symbol or 'série'}: {duplicates} linhas com data repetida removidas")

    ordered = tuple(bars[d] for d in sorted(bars))
    return Series(symbol, ordered, duplicates_removed=duplicates)


def dump_ohlcv(series: Series, dest: Optional[Union[str, Path]] = None) -> str:
    """
    Serializa a série no mesmo formato lido por load_ohlcv.

    Floats são escritos com precisão de ida e volta; ausentes viram campo vazio.
    """
    df = pd.DataFrame([(bar.date.isoformat(),) + bar.values() for bar in series.bars],
                      columns=list(HEADER))
    text = df.to_csv(index=False, na_rep='', lineterminator='\n')
    if dest is not None:
        Path(dest).write_text(text, encoding='utf-8')
    return text


def repair_missing(series: Series) -> Tuple[Series, List[RepairEntry]]:
    """
    Preenche valores ausentes mantendo a continuidade temporal.

    Preços ausentes recebem o valor do pregão anterior; volume ausente vira 0;
    linhas iniciais sem algum preço são descartadas. Se o preço copiado cair
    fora de [low, high] do dia, a faixa é alargada e isso também é registrado.

    Args:
        series: Série ordenada

    Returns:
        (série reparada, log de reparos)

    Raises:
        DataError: Se alguma coluna estiver inteiramente vazia
    """
    log: List[RepairEntry] = []
    if not series.bars:
        return series, log

    matrix = series.matrix()
    for j, name in enumerate(FIELDS):
        if np.all(np.isnan(matrix[:, j])):
            raise DataError(f"Coluna '{name}' inteiramente vazia", field=name)

    repaired: List[Bar] = []
    previous: Optional[Bar] = None
    for bar in series.bars:
        missing = bar.missing_fields()
        if not missing:
            repaired.append(bar)
            previous = bar
            continue

        missing_prices = [name for name in missing if name in PRICE_FIELDS]
        if missing_prices and previous is None:
            for name in missing_prices:
                log.append(RepairEntry(bar.date, name, 'drop_leading'))
            continue

        updates = {}
        if 'volume' in missing:
            updates['volume'] = 0.0
            log.append(RepairEntry(bar.date, 'volume', 'zero_fill'))

        for name in missing_prices:
            updates[name] = getattr(previous, name)
            log.append(RepairEntry(bar.date, name, 'forward_fill'))

        fixed = replace(bar, **updates)
        prices = [fixed.open, fixed.close]
        if fixed.low > min(prices + [fixed.high]):
            fixed = replace(fixed, low=min(prices + [fixed.high]))
            log.append(RepairEntry(bar.date, 'low', 'range_widened'))
        if fixed.high < max(prices + [fixed.low]):
            fixed = replace(fixed, high=max(prices + [fixed.low]))
            log.append(RepairEntry(bar.date, 'high', 'range_widened'))

        issues = BarValidator.check_fields(fixed)
        if issues:
            name, message = issues[0]
            raise DataError(f"Reparo produziu barra inválida: {message}", field=name,
                            date=bar.date.isoformat())
        repaired.append(fixed)
        previous = fixed

    if log:
        logger.info(f"{series.symbol or 'série'}: {len(log)} reparos aplicados")
    return Series(series.symbol, tuple(repaired), series.duplicates_removed), log


def repair_log_lines(log: Sequence[RepairEntry]) -> str:
    """Log de reparos como JSON lines `{date, field, action}`."""
    return ''.join(json.dumps(entry.to_dict(), sort_keys=True) + '\n' for entry in log)
