"""
Agregação entre ativos: RMSE médio, RMSE mediano e vitórias por modelo.
"""
import io
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from src.errors import DataError
from src.evaluation.metrics import check_mse_coherence
from src.evaluation.report import ForecastReport

logger = logging.getLogger(__name__)

AGGREGATE_COLUMNS = ["model", "mean_rmse", "median_rmse", "wins"]
MODEL_ORDER = ("arima", "lstm", "gan")
MSE_TOLERANCE = 0.005


@dataclass(frozen=True)
class ModelAggregate:
    model: str
    mean_rmse: float
    median_rmse: float
    wins: int


@dataclass
class AggregateReport:
    models: List[ModelAggregate]
    assets: List[str]
    ties: List[str]

    def get(self, model: str) -> ModelAggregate:
        for row in self.models:
            if row.model == model:
                return row
        raise KeyError(model)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([vars(m) for m in self.models], columns=AGGREGATE_COLUMNS)


def _ordered(models) -> List[str]:
    known = [m for m in MODEL_ORDER if m in models]
    return known + sorted(m for m in models if m not in MODEL_ORDER)


def aggregate_rmse(table: Mapping[Tuple[str, str], float]) -> AggregateReport:
    """
    Agrega um grid {(ativo, modelo): RMSE}.

    Vitória = RMSE estritamente mínimo no ativo; em empate exato todos os
    modelos empatados ganham a vitória e o empate é registrado.

    Raises:
        DataError: Alguma célula (ativo, modelo) ausente
    """
    assets = sorted({a for a, _ in table})
    models = _ordered({m for _, m in table})
    if not assets:
        raise DataError("Nenhum resultado para agregar", field="reports")
    missing = [(a, m) for a in assets for m in models if (a, m) not in table]
    if missing:
        gaps = ", ".join(f"{a}/{m}" for a, m in missing)
        raise DataError(f"Resultados ausentes: {gaps}", field="reports", missing=len(missing))

    wins = {m: 0 for m in models}
    ties = []
    for asset in assets:
        best = min(table[(asset, m)] for m in models)
        winners = [m for m in models if table[(asset, m)] == best]
        if len(winners) > 1:
            ties.append(asset)
            logger.warning(f"Empate de RMSE em {asset}: {', '.join(winners)}")
        for m in winners:
            wins[m] += 1

    rows = []
    for m in models:
        values = np.array([table[(a, m)] for a in assets], dtype=np.float64)
        rows.append(ModelAggregate(m, float(np.mean(values)), float(np.median(values)), wins[m]))
    return AggregateReport(rows, assets, ties)


def aggregate(reports: Sequence[ForecastReport]) -> AggregateReport:
    table: Dict[Tuple[str, str], float] = {}
    for report in reports:
        key = (report.symbol, report.model)
        if key in table:
            raise DataError(f"Relatório repetido para {report.symbol}/{report.model}", field="reports")
        table[key] = report.metrics.rmse
    return aggregate_rmse(table)


def read_metrics_table(source: Union[str, Path, io.TextIOBase]) -> pd.DataFrame:
    """Lê um CSV `asset,model,rmse[,mse]`."""
    try:
        frame = pd.read_csv(source, dtype={'asset': str, 'model': str})
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise DataError(f"Não foi possível ler a tabela de métricas: {e}", field="metrics")
    frame.columns = [c.strip().lower() for c in frame.columns]
    for column in ("asset", "model", "rmse"):
        if column not in frame.columns:
            raise DataError(f"Coluna obrigatória ausente: {column}", field=column, line=1)
    frame['model'] = frame['model'].str.strip().str.lower()
    return frame


def aggregate_from_metrics(source: Union[str, Path, io.TextIOBase]) -> AggregateReport:
    """
    Agrega uma tabela de RMSE já calculada (ex.: valores publicados).

    Quando a coluna `mse` existe, cada linha é conferida contra RMSE² com
    tolerância relativa de 0.5% e divergências são registradas no log.
    """
    frame = read_metrics_table(source)
    table = {}
    for idx, row in frame.iterrows():
        rmse = float(row['rmse'])
        if not np.isfinite(rmse) or rmse < 0:
            raise DataError("RMSE inválido", field="rmse", line=int(idx) + 2)
        table[(str(row['asset']).strip(), row['model'])] = rmse
        if 'mse' in frame.columns and pd.notna(row['mse']):
            if not check_mse_coherence(rmse, float(row['mse']), relative=MSE_TOLERANCE):
                logger.warning(f"{row['asset']}/{row['model']}: RMSE² = {rmse * rmse:.2f} "
                               f"difere do MSE informado {float(row['mse']):.2f}")
    return aggregate_rmse(table)


def render_summary(result: AggregateReport, reports: Optional[Sequence[ForecastReport]] = None,
                   baseline: Optional[Mapping[str, float]] = None) -> str:
    """
    Tabelas em texto: RMSE por ativo e modelo, seguida do agregado.

    `baseline` (RMSE da previsão ingênua por ativo) vira uma coluna de referência.
    """
    parts = []
    if reports:
        grid = pd.DataFrame([{"asset": r.symbol, "model": r.model, "rmse": r.metrics.rmse,
                              "mae": r.metrics.mae, "mse": r.metrics.mse,
                              "mape": r.metrics.mape} for r in reports])
        pivot = grid.pivot(index="asset", columns="model", values="rmse")
        pivot = pivot[_ordered(pivot.columns)]
        if baseline:
            pivot["persistence"] = pd.Series(dict(baseline))
        parts.append("RMSE por ativo\n" + pivot.to_string(float_format=lambda v: f"{v:.2f}"))
        detail = grid.sort_values(["asset", "model"]).set_index(["asset", "model"])
        parts.append("Métricas completas\n" + detail.to_string(float_format=lambda v: f"{v:.4f}",
                                                               na_rep="-"))
    table = result.to_frame().set_index("model")
    parts.append("Agregado\n" + table.to_string(float_format=lambda v: f"{v:.2f}"))
    if result.ties:
        parts.append(f"Empates: {', '.join(result.ties)}")
    return "\n\n".join(parts) + "\n"
