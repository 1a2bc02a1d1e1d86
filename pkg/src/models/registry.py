"""
Treino e previsão dos três modelos a partir de um AlignedDataset.

Cada modelo segue seu protocolo de partição; o artefato guarda a partição
usada para que a avaliação confira que treino e teste batem.
"""
import logging
import zlib
from dataclasses import dataclass
from typing import Any, Dict, List, Tuple

import numpy as np
import pandas as pd

from src.data.align import AlignedDataset
from src.data.ohlcv import CLOSE_INDEX
from src.data.windows import SplitSpec, WindowSample, check_causality, make_windows, split
from src.errors import PartitionError, UsageError
from src.models import arima, gan, lstm
from src.models.forecast import ForecastRow
from src.settings import MODELS, RunConfig

logger = logging.getLogger(__name__)


def asset_seed(seed: int, symbol: str) -> int:
    """Semente por ativo: independe da ordem em que os ativos são processados."""
    return (seed + zlib.crc32(symbol.encode('utf-8'))) % (2 ** 32)


@dataclass
class ModelArtifact:
    model: str
    symbol: str
    split: SplitSpec
    window_length: int
    sentiment_mode: str
    seed: int
    payload: Dict[str, Any]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "model": self.model,
            "symbol": self.symbol,
            "split": self.split.to_dict(),
            "window_length": self.window_length,
            "sentiment_mode": self.sentiment_mode,
            "seed": self.seed,
            "payload": self.payload,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ModelArtifact":
        return cls(data["model"], data["symbol"], SplitSpec(**data["split"]), int(data["window_length"]),
                   data.get("sentiment_mode", "last"), int(data["seed"]), data["payload"])


def check_model(name: str) -> str:
    if name not in MODELS:
        raise UsageError(f"Modelo desconhecido '{name}'", expected=MODELS)
    return name


def partition(aligned: AlignedDataset, policy: str, L: int,
              sentiment_mode: str = "last") -> Tuple[SplitSpec, List[WindowSample], List[WindowSample]]:
    """Janelas do ativo cortadas pela data-alvo, com auditoria de causalidade."""
    windows = make_windows(aligned, L, sentiment_mode)
    spec = SplitSpec.for_count(policy, len(windows))
    train, test = split(windows, spec)
    check_causality(train, test)
    return spec, train, test


def _arima_train_series(aligned: AlignedDataset, train: List[WindowSample], L: int) -> np.ndarray:
    # fechamentos até o último alvo de treino, inclusive
    return aligned.close[:train[-1].index + L + 1]


def train_model(name: str, aligned: AlignedDataset, config: RunConfig) -> Tuple[ModelArtifact, pd.DataFrame]:
    """
    Treina um modelo no ativo.

    Returns:
        (artefato, log de treino em DataFrame)
    """
    check_model(name)
    L = config.window_length
    seed = asset_seed(config.seed, aligned.symbol)
    spec, train, _ = partition(aligned, config.splits[name], L, config.sentiment_mode)
    logger.info(f"{aligned.symbol}/{name}: {len(train)} janelas de treino ({spec.policy})")

    if name == "arima":
        params = config.arima
        series = _arima_train_series(aligned, train, L)
        order = arima.select_order(series, params.get('p_max', 3), params.get('q_max', 3),
                                   params.get('max_iter', 200))
        model = arima.fit(series, order, params.get('max_iter', 200))
        payload = model.to_dict()
        payload["refit"] = bool(params.get('refit', False))
        log = pd.DataFrame([{"p": order.p, "d": order.d, "q": order.q,
                             "residual_variance": model.residual_variance,
                             "gradient_norm": model.gradient_norm}])
    elif name == "lstm":
        params = dict(config.lstm)
        hidden = params.pop('hidden_size', 32)
        model, train_log = lstm.train(train, lstm.TrainSchedule(**params), seed, hidden)
        payload = model.to_dict()
        payload["best_epoch"] = train_log.best_epoch
        log = train_log.to_frame()
    else:
        params = {k: v for k, v in config.gan.items() if k != 'autoregressive'}
        schedule = gan.GanSchedule(**params)
        gen, disc, gan_log = gan.train(train, schedule, seed)
        payload = {"generator": gen.to_dict(), "discriminator": disc.to_dict(), "schedule": schedule.to_dict(),
                   "autoregressive": bool(config.gan.get('autoregressive', False))}
        log = gan_log.to_frame()

    artifact = ModelArtifact(name, aligned.symbol, spec, L, config.sentiment_mode, seed, payload)
    return artifact, log


def forecast(artifact: ModelArtifact, aligned: AlignedDataset) -> List[ForecastRow]:
    """
    Previsões um passo à frente sobre a partição de teste do artefato.

    Raises:
        PartitionError: A partição recalculada não bate com a do treino
    """
    check_model(artifact.model)
    L = artifact.window_length
    spec, train, test = partition(aligned, artifact.split.policy, L, artifact.sentiment_mode)
    if spec != artifact.split:
        raise PartitionError("Partição de avaliação difere da usada no treino", field="split",
                             trained=artifact.split.to_dict(), evaluated=spec.to_dict())

    if artifact.model == "arima":
        model = arima.ArimaModel.from_dict(artifact.payload)
        series = _arima_train_series(aligned, train, L)
        actual = np.array([w.target[CLOSE_INDEX] for w in test])
        predicted = arima.rolling_forecast(model, series, actual, artifact.payload.get("refit", False))
    elif artifact.model == "lstm":
        model = lstm.LstmModel.from_dict(artifact.payload)
        actual = np.array([w.target[CLOSE_INDEX] for w in test])
        predicted = lstm.predict_batch(model, test)
    else:
        gen = gan.Generator.from_dict(artifact.payload["generator"])
        return gan.forecast_holdout(gen, aligned, L, artifact.payload.get("autoregressive", False),
                                    artifact.sentiment_mode)

    return [ForecastRow(w.target_date, float(p), float(a), w.context_end)
            for w, p, a in zip(test, predicted, actual)]
