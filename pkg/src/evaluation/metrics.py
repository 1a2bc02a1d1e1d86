"""
Métricas de erro para previsões um passo à frente.
"""
import logging
import math
from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np

from src.errors import DataError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Metrics:
    mae: float
    mse: float
    rmse: float
    mape: Optional[float]
    mape_omitted: bool = False

    def to_dict(self) -> Dict:
        return {"mae": self.mae, "mse": self.mse, "rmse": self.rmse,
                "mape": self.mape, "mape_omitted": self.mape_omitted}

    @classmethod
    def from_dict(cls, data: Dict) -> "Metrics":
        return cls(float(data["mae"]), float(data["mse"]), float(data["rmse"]),
                   None if data.get("mape") is None else float(data["mape"]),
                   bool(data.get("mape_omitted", False)))


def metrics(predicted: np.ndarray, actual: np.ndarray) -> Metrics:
    """
    MAE, MSE, RMSE e MAPE (como fração).

    MAPE fica None, com `mape_omitted=True`, quando algum valor real é zero.

    Raises:
        DataError: Vetores vazios, de tamanhos diferentes ou não finitos
    """
    predicted = np.asarray(predicted, dtype=np.float64).reshape(-1)
    actual = np.asarray(actual, dtype=np.float64).reshape(-1)
    if predicted.shape != actual.shape:
        raise DataError("Previsões e valores reais com tamanhos diferentes", field="predicted",
                        predicted=predicted.shape[0], actual=actual.shape[0])
    if predicted.shape[0] == 0:
        raise DataError("Métricas exigem pelo menos uma previsão", field="predicted")
    if not (np.all(np.isfinite(predicted)) and np.all(np.isfinite(actual))):
        raise DataError("Previsões ou valores reais não finitos", field="predicted")

    errors = predicted - actual
    mae = float(np.mean(np.abs(errors)))
    mse = float(np.mean(errors * errors))
    rmse = math.sqrt(mse)
    if np.any(actual == 0):
        logger.warning("MAPE omitido: há valores reais iguais a zero")
        return Metrics(mae, mse, rmse, None, True)
    return Metrics(mae, mse, rmse, float(np.mean(np.abs(errors / actual))))


def persistence_forecast(close: np.ndarray, targets: np.ndarray) -> np.ndarray:
    """
    Previsão ingênua x̂_{t+1} = x_t para as posições `targets` de `close`.

    Raises:
        DataError: Alguma posição alvo sem pregão anterior
    """
    close = np.asarray(close, dtype=np.float64).reshape(-1)
    targets = np.asarray(targets, dtype=np.int64).reshape(-1)
    if targets.size and (targets.min() < 1 or targets.max() >= close.shape[0]):
        raise DataError("Posição alvo sem pregão anterior", field="targets")
    return close[targets - 1]


def check_mse_coherence(rmse: float, mse: float, absolute: Optional[float] = None,
                        relative: float = 1e-9) -> bool:
    """
    Confere MSE = RMSE².

    Com `absolute`, a tolerância é fixa (útil para valores impressos com
    duas casas); senão é relative·max(1, MSE).
    """
    tolerance = absolute if absolute is not None else relative * max(1.0, mse)
    return abs(rmse * rmse - mse) <= tolerance
