"""
LSTM de uma camada com cabeça densa, treinado por BPTT com parada antecipada
e redução da taxa de aprendizado em platôs.

Usa só os seis atributos numéricos; o alvo é o fechamento escalonado.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from src.data.ohlcv import CLOSE_INDEX
from src.data.windows import WindowSample
from src.errors import DataError, KernelError, ModelError, TrainingError
from src.numkernel.layers import DenseLayer, Network, sigmoid
from src.numkernel.optim import AdamState, adam_step
from src.numkernel.scaling import ScalerParams, inverse_column, scaler_fit, scaler_transform

logger = logging.getLogger(__name__)

N_FEATURES = 6


@dataclass
class TrainSchedule:
    learning_rate: float = 0.001
    batch_size: int = 32
    max_epochs: int = 200
    patience: int = 10
    plateau_factor: float = 0.5
    plateau_patience: int = 5
    validation_fraction: float = 0.15

    def __post_init__(self):
        if not 0.0 < self.plateau_factor < 1.0:
            raise ModelError("Fator de platô deve estar em (0, 1)", plateau_factor=self.plateau_factor)
        if self.patience < 1 or self.plateau_patience < 1:
            raise ModelError("Paciências devem ser >= 1", patience=self.patience,
                             plateau_patience=self.plateau_patience)
        if self.batch_size < 1 or self.max_epochs < 0:
            raise ModelError("batch_size >= 1 e max_epochs >= 0", batch_size=self.batch_size,
                             max_epochs=self.max_epochs)
        if not 0.0 < self.validation_fraction < 1.0:
            raise ModelError("Fração de validação deve estar em (0, 1)",
                             validation_fraction=self.validation_fraction)


class LstmModel:
    """
    Pesos empilhados na ordem de portas i, f, o, g.

    W: (4H x I), U: (4H x H), b: (4H,). A cabeça é uma camada densa 1 x H
    com ativação identidade.
    """

    def __init__(self, W: np.ndarray, U: np.ndarray, b: np.ndarray, head: DenseLayer,
                 scaler: Optional[ScalerParams] = None, window_length: Optional[int] = None):
        W = np.array(W, dtype=np.float64)
        U = np.array(U, dtype=np.float64)
        b = np.array(b, dtype=np.float64).reshape(-1)
        hidden = U.shape[1] if U.ndim == 2 else 0
        if U.shape != (4 * hidden, hidden):
            raise KernelError("Pesos recorrentes devem ser 4H x H", expected=(4 * hidden, hidden),
                              actual=U.shape)
        if W.ndim != 2 or W.shape[0] != 4 * hidden:
            raise KernelError("Pesos de entrada devem ser 4H x I", expected=4 * hidden, actual=W.shape)
        if b.shape != (4 * hidden,):
            raise KernelError("Bias deve ter 4H entradas", expected=(4 * hidden,), actual=b.shape)
        if head.in_features != hidden or head.out_features != 1:
            raise KernelError("Cabeça deve ser 1 x H", expected=(1, hidden),
                              actual=(head.out_features, head.in_features))
        self.W, self.U, self.b = W, U, b
        self.head = Network([head])
        self.scaler = scaler
        self.window_length = window_length

    @property
    def hidden_size(self) -> int:
        return self.U.shape[1]

    @property
    def input_size(self) -> int:
        return self.W.shape[1]

    @classmethod
    def initialize(cls, input_size: int, hidden_size: int, rng: np.random.Generator) -> "LstmModel":
        limit_w = math.sqrt(6.0 / (input_size + hidden_size))
        limit_u = math.sqrt(6.0 / (2 * hidden_size))
        W = rng.uniform(-limit_w, limit_w, size=(4 * hidden_size, input_size))
        U = rng.uniform(-limit_u, limit_u, size=(4 * hidden_size, hidden_size))
        b = np.zeros(4 * hidden_size)
        b[hidden_size:2 * hidden_size] = 1.0  # porta de esquecimento começa aberta
        head = DenseLayer.initialize(hidden_size, 1, "identity", rng)
        return cls(W, U, b, head)

    def parameters(self) -> List[np.ndarray]:
        return [self.W, self.U, self.b] + self.head.parameters()

    def copy(self) -> "LstmModel":
        layer = self.head.layers[0]
        return LstmModel(self.W, self.U, self.b, DenseLayer(layer.weights, layer.bias, layer.activation),
                         self.scaler, self.window_length)

    def to_dict(self) -> Dict:
        return {
            "hidden_size": self.hidden_size,
            "input_size": self.input_size,
            "window_length": self.window_length,
            "W": self.W.tolist(),
            "U": self.U.tolist(),
            "b": self.b.tolist(),
            "head": self.head.layers[0].to_dict(),
            "scaler": self.scaler.to_dict() if self.scaler else None,
        }

    @classmethod
    def from_dict(cls, data: Dict) -> "LstmModel":
        scaler = ScalerParams.from_dict(data["scaler"]) if data.get("scaler") else None
        return cls(np.array(data["W"]), np.array(data["U"]), np.array(data["b"]),
                   DenseLayer.from_dict(data["head"]), scaler, data.get("window_length"))


@dataclass
class StepCache:
    x: np.ndarray
    h_prev: np.ndarray
    c_prev: np.ndarray
    i: np.ndarray
    f: np.ndarray
    o: np.ndarray
    g: np.ndarray
    c: np.ndarray
    tanh_c: np.ndarray


def _cell(model: LstmModel, x: np.ndarray, h: np.ndarray, c: np.ndarray) -> StepCache:
    if x.shape[-1] != model.input_size:
        raise KernelError("Entrada da célula com dimensão incompatível",
                          expected=model.input_size, actual=x.shape[-1])
    if h.shape[-1] != model.hidden_size or c.shape[-1] != model.hidden_size:
        raise KernelError("Estado da célula com dimensão incompatível",
                          expected=model.hidden_size, actual=(h.shape[-1], c.shape[-1]))
    H = model.hidden_size
    z = x @ model.W.T + h @ model.U.T + model.b
    i = sigmoid(z[..., :H])
    f = sigmoid(z[..., H:2 * H])
    o = sigmoid(z[..., 2 * H:3 * H])
    g = np.tanh(z[..., 3 * H:])
    c_new = f * c + i * g
    tanh_c = np.tanh(c_new)
    return StepCache(x, h, c, i, f, o, g, c_new, tanh_c)


def cell_forward(model: LstmModel, x: np.ndarray,
                 state: Tuple[np.ndarray, np.ndarray]) -> Tuple[np.ndarray, np.ndarray]:
    """
    Um passo da célula.

    i = σ(W_i x + U_i h + b_i), f = σ(...), o = σ(...), g = tanh(...);
    c' = f ⊙ c + i ⊙ g; h' = o ⊙ tanh(c').

    Returns:
        (h', c')
    """
    h, c = state
    step = _cell(model, np.asarray(x, dtype=np.float64), np.asarray(h, dtype=np.float64),
                 np.asarray(c, dtype=np.float64))
    return step.o * step.tanh_c, step.c


def _unroll(model: LstmModel, X: np.ndarray) -> Tuple[np.ndarray, List[StepCache]]:
    """X: (B, L, I). Devolve h final (B, H) e o cache de cada passo."""
    B = X.shape[0]
    h = np.zeros((B, model.hidden_size))
    c = np.zeros((B, model.hidden_size))
    caches = []
    for t in range(X.shape[1]):
        step = _cell(model, X[:, t, :], h, c)
        h, c = step.o * step.tanh_c, step.c
        caches.append(step)
    return h, caches


def forward_scaled(model: LstmModel, X: np.ndarray) -> np.ndarray:
    """Previsões escalonadas (B,) para janelas já escalonadas (B, L, I)."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 2:
        X = X[None]
    h, _ = _unroll(model, X)
    return model.head.forward(h)[:, 0]


def loss_and_gradients(model: LstmModel, X: np.ndarray,
                       y: np.ndarray) -> Tuple[float, List[np.ndarray]]:
    """
    Erro quadrático médio e gradientes por BPTT.

    Args:
        model: Modelo
        X: Janelas escalonadas (B, L, I)
        y: Alvos escalonados (B,)

    Returns:
        (perda, [dW, dU, db, dW_head, db_head])
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    B = X.shape[0]
    h, caches = _unroll(model, X)
    pred = model.head.forward(h)[:, 0]
    err = pred - y
    loss = float(np.mean(err * err))

    head_grads = model.head.backward((2.0 / B) * err[:, None])
    dh = head_grads.input
    H = model.hidden_size
    dW = np.zeros_like(model.W)
    dU = np.zeros_like(model.U)
    db = np.zeros_like(model.b)
    dc = np.zeros((B, H))
    for step in reversed(caches):
        do = dh * step.tanh_c
        dc = dc + dh * step.o * (1.0 - step.tanh_c ** 2)
        di = dc * step.g
        dg = dc * step.i
        df = dc * step.c_prev
        dz = np.concatenate([
            di * step.i * (1.0 - step.i),
            df * step.f * (1.0 - step.f),
            do * step.o * (1.0 - step.o),
            dg * (1.0 - step.g ** 2),
        ], axis=1)
        dW += dz.T @ step.x
        dU += dz.T @ step.h_prev
        db += dz.sum(axis=0)
        dh = dz @ model.U
        dc = dc * step.f
    return loss, [dW, dU, db] + head_grads.params


def _scale_windows(scaler: ScalerParams, samples: Sequence[WindowSample]) -> np.ndarray:
    return np.stack([scaler_transform(scaler, s.history) for s in samples])


def predict(model: LstmModel, window: WindowSample) -> float:
    """Previsão do fechamento de t+1 em unidades de preço."""
    return float(predict_batch(model, [window])[0])


def predict_batch(model: LstmModel, windows: Sequence[WindowSample]) -> np.ndarray:
    if model.scaler is None:
        raise ModelError("Modelo LSTM sem escalonador ajustado")
    if not windows:
        return np.zeros(0)
    for w in windows:
        if model.window_length is not None and w.window_length != model.window_length:
            raise DataError("Janela com tamanho diferente do treino", field="window_length",
                            expected=model.window_length, actual=w.window_length)
    scaled = forward_scaled(model, _scale_windows(model.scaler, windows))
    return inverse_column(model.scaler, scaled, CLOSE_INDEX)


@dataclass
class TrainingLog:
    epochs: List[int] = field(default_factory=list)
    train_loss: List[float] = field(default_factory=list)
    val_loss: List[float] = field(default_factory=list)
    lr: List[float] = field(default_factory=list)
    plateau_epochs: List[int] = field(default_factory=list)
    best_epoch: Optional[int] = None

    def append(self, epoch: int, train_loss: float, val_loss: float, lr: float) -> None:
        self.epochs.append(epoch)
        self.train_loss.append(train_loss)
        self.val_loss.append(val_loss)
        self.lr.append(lr)

    def __len__(self) -> int:
        return len(self.epochs)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"epoch": self.epochs, "train_loss": self.train_loss,
                             "val_loss": self.val_loss, "lr": self.lr},
                            columns=["epoch", "train_loss", "val_loss", "lr"])


def _check_finite(value: float, epoch: int, what: str) -> None:
    if not math.isfinite(value):
        raise TrainingError(f"Perda de {what} divergiu (NaN/inf)", epoch=epoch)


def train(samples: Sequence[WindowSample], schedule: Optional[TrainSchedule] = None, seed: int = 0,
          hidden_size: int = 32) -> Tuple[LstmModel, TrainingLog]:
    """
    Treina o LSTM na partição de treino.

    A última fração de validação das amostras (em ordem cronológica) serve
    para a parada antecipada; lotes seguem a ordem do tempo, sem embaralhar.

    Args:
        samples: Janelas de treino em ordem cronológica
        schedule: Hiperparâmetros do treino
        seed: Semente da inicialização
        hidden_size: Largura do estado oculto

    Returns:
        (modelo com os pesos da melhor validação, log de treino)

    Raises:
        DataError: Menos de 2·batch_size amostras
        TrainingError: Perda NaN (com a época)
    """
    schedule = schedule or TrainSchedule()
    samples = list(samples)
    if len(samples) < 2 * schedule.batch_size:
        raise DataError(f"LSTM exige pelo menos {2 * schedule.batch_size} amostras",
                        field="samples", n=len(samples))

    rng = np.random.default_rng(seed)
    model = LstmModel.initialize(N_FEATURES, hidden_size, rng)
    window_length = samples[0].window_length
    rows = np.vstack([s.history for s in samples] + [np.stack([s.target for s in samples])])
    model.scaler = scaler_fit(rows, "minmax_unit")
    model.window_length = window_length
    log = TrainingLog()
    if schedule.max_epochs == 0:
        return model, log

    X = _scale_windows(model.scaler, samples)
    y = scaler_transform(model.scaler, np.stack([s.target for s in samples]))[:, CLOSE_INDEX]
    n_val = max(1, int(len(samples) * schedule.validation_fraction))
    X_train, y_train = X[:-n_val], y[:-n_val]
    X_val, y_val = X[-n_val:], y[-n_val:]

    adam = AdamState(learning_rate=schedule.learning_rate)
    best_loss = math.inf
    best = model.copy()
    stale = 0
    plateau = 0
    for epoch in range(1, schedule.max_epochs + 1):
        lr = adam.learning_rate
        total = 0.0
        for start in range(0, X_train.shape[0], schedule.batch_size):
            xb = X_train[start:start + schedule.batch_size]
            yb = y_train[start:start + schedule.batch_size]
            loss, grads = loss_and_gradients(model, xb, yb)
            _check_finite(loss, epoch, "treino")
            try:
                adam_step(adam, model.parameters(), grads)
            except TrainingError as e:
                raise TrainingError(e.message, epoch=epoch, step=e.step,
                                    parameter_index=e.parameter_index)
            total += loss * xb.shape[0]
        train_loss = total / X_train.shape[0]
        err = forward_scaled(model, X_val) - y_val
        val_loss = float(np.mean(err * err))
        _check_finite(val_loss, epoch, "validação")
        log.append(epoch, train_loss, val_loss, lr)

        if val_loss < best_loss:
            best_loss = val_loss
            best = model.copy()
            log.best_epoch = epoch
            stale = 0
            plateau = 0
        else:
            stale += 1
            plateau += 1
            if stale >= schedule.patience:
                logger.info(f"Parada antecipada na época {epoch} (melhor: {log.best_epoch})")
                break
            if plateau >= schedule.plateau_patience:
                adam.learning_rate = lr * schedule.plateau_factor
                log.plateau_epochs.append(epoch)
                plateau = 0
                logger.debug(f"Platô na época {epoch}: lr {lr:.2e} -> {adam.learning_rate:.2e}")

    logger.info(f"LSTM treinado por {len(log)} épocas; melhor validação {best_loss:.6f}")
    return best, log
