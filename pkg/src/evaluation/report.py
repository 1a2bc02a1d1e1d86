"""
Relatório de previsão por (ativo, modelo).
"""
import logging
from dataclasses import dataclass
from typing import Dict, List

import numpy as np

from src.data.align import AlignedDataset
from src.data.windows import SplitSpec
from src.evaluation.metrics import Metrics, metrics
from src.models.forecast import ForecastRow
from src.models.registry import ModelArtifact, forecast

logger = logging.getLogger(__name__)


@dataclass
class ForecastReport:
    symbol: str
    model: str
    split: SplitSpec
    rows: List[ForecastRow]
    metrics: Metrics

    @property
    def predicted(self) -> np.ndarray:
        return np.array([r.predicted for r in self.rows])

    @property
    def actual(self) -> np.ndarray:
        return np.array([r.actual for r in self.rows])

    def to_dict(self) -> Dict:
        return {
            "symbol": self.symbol,
            "model": self.model,
            "split": self.split.to_dict(),
            "metrics": self.metrics.to_dict(),
            "rows": [r.to_dict() for r in self.rows],
        }

    @classmethod
    def from_dict(cls, data: Dict) -> "ForecastReport":
        return cls(data["symbol"], data["model"], SplitSpec(**data["split"]),
                   [ForecastRow.from_dict(r) for r in data["rows"]], Metrics.from_dict(data["metrics"]))


def evaluate(artifact: ModelArtifact, aligned: AlignedDataset) -> ForecastReport:
    """
    Avalia o artefato na partição de teste do ativo.

    Raises:
        PartitionError: Partição diferente da usada no treino ou dados fora de ordem
    """
    rows = forecast(artifact, aligned)
    result = metrics([r.predicted for r in rows], [r.actual for r in rows])
    logger.info(f"{aligned.symbol}/{artifact.model}: RMSE {result.rmse:.4f} em {len(rows)} pregões")
    return ForecastReport(aligned.symbol, artifact.model, artifact.split, rows, result)
