"""
GAN condicional: o gerador mapeia (janela, sentimento) para o próximo pregão
e o discriminador julga o trio (candidato, janela, sentimento).

Treino adversarial alternado com Adam nas duas redes. A perda do gerador é a
forma não saturante (maximizar log D(G)). Entradas das duas redes usam a
escala [-1, 1] ajustada no treino.
"""
import logging
import math
from dataclasses import asdict, dataclass, field
from datetime import date
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from src.data.align import AlignedDataset
from src.data.ohlcv import CLOSE_INDEX
from src.data.windows import WindowSample, make_windows, split
from src.errors import DataError, KernelError, ModelError, ScaleError, TrainingError
from src.models.forecast import ForecastRow
from src.numkernel.layers import Network, log_sigmoid, sigmoid
from src.numkernel.optim import AdamState, adam_step
from src.numkernel.scaling import ScalerParams, inverse_column, scaler_fit, scaler_transform

logger = logging.getLogger(__name__)

N_FEATURES = 6
SCALE_TOLERANCE = 1e-9


@dataclass
class GanSchedule:
    learning_rate: float = 0.0002
    batch_size: int = 5
    epochs: int = 300
    d_steps: int = 1
    l2_weight: float = 0.0
    noise_dim: int = 0
    beta1: float = 0.9
    generator_hidden: Tuple[int, ...] = (128, 64)
    discriminator_hidden: Tuple[int, ...] = (64, 32)

    def __post_init__(self):
        if self.batch_size < 1 or self.d_steps < 1:
            raise ModelError("batch_size e d_steps devem ser >= 1",
                             batch_size=self.batch_size, d_steps=self.d_steps)
        if self.epochs < 0 or self.noise_dim < 0:
            raise ModelError("epochs e noise_dim não podem ser negativos",
                             epochs=self.epochs, noise_dim=self.noise_dim)
        if self.l2_weight < 0 or self.learning_rate < 0:
            raise ModelError("l2_weight e learning_rate não podem ser negativos",
                             l2_weight=self.l2_weight, learning_rate=self.learning_rate)
        if not 0.0 < self.beta1 < 1.0:
            raise ModelError("beta1 deve estar em (0, 1)", beta1=self.beta1)
        self.generator_hidden = tuple(self.generator_hidden)
        self.discriminator_hidden = tuple(self.discriminator_hidden)

    def to_dict(self) -> Dict:
        data = asdict(self)
        data["generator_hidden"] = list(self.generator_hidden)
        data["discriminator_hidden"] = list(self.discriminator_hidden)
        return data


class Generator:
    """Camadas relu seguidas de uma saída tanh de largura 6."""

    def __init__(self, network: Network, window_length: int, noise_dim: int = 0,
                 scaler: Optional[ScalerParams] = None):
        expected = window_length * N_FEATURES + 1 + noise_dim
        if network.input_size != expected:
            raise KernelError("Entrada do gerador incompatível com a janela",
                              expected=expected, actual=network.input_size)
        if network.output_size != N_FEATURES or network.layers[-1].activation != "tanh":
            raise KernelError("Saída do gerador deve ser tanh de largura 6",
                              expected=N_FEATURES, actual=network.output_size)
        self.network = network
        self.window_length = window_length
        self.noise_dim = noise_dim
        self.scaler = scaler

    @classmethod
    def initialize(cls, window_length: int, rng: np.random.Generator, hidden: Sequence[int] = (128, 64),
                   noise_dim: int = 0) -> "Generator":
        sizes = [window_length * N_FEATURES + 1 + noise_dim, *hidden, N_FEATURES]
        network = Network.build(sizes, ["relu"] * len(hidden) + ["tanh"], rng)
        return cls(network, window_length, noise_dim)

    def parameters(self) -> List[np.ndarray]:
        return self.network.parameters()

    def to_dict(self) -> Dict:
        return {
            "window_length": self.window_length,
            "noise_dim": self.noise_dim,
            "network": self.network.to_dict(),
            "scaler": self.scaler.to_dict() if self.scaler else None,
        }

    @classmethod
    def from_dict(cls, data: Dict) -> "Generator":
        scaler = ScalerParams.from_dict(data["scaler"]) if data.get("scaler") else None
        return cls(Network.from_dict(data["network"]), data["window_length"],
                   data.get("noise_dim", 0), scaler)


class Discriminator:
    """Entrada candidato ∥ janela ∥ sentimento; camadas leaky_relu e saída sigmoide."""

    def __init__(self, network: Network, window_length: int):
        expected = N_FEATURES + window_length * N_FEATURES + 1
        if network.input_size != expected:
            raise KernelError("Entrada do discriminador incompatível com a janela",
                              expected=expected, actual=network.input_size)
        if network.output_size != 1 or network.layers[-1].activation != "sigmoid":
            raise KernelError("Saída do discriminador deve ser sigmoide escalar",
                              expected=1, actual=network.output_size)
        self.network = network
        self.window_length = window_length

    @classmethod
    def initialize(cls, window_length: int, rng: np.random.Generator,
                   hidden: Sequence[int] = (64, 32)) -> "Discriminator":
        sizes = [N_FEATURES + window_length * N_FEATURES + 1, *hidden, 1]
        network = Network.build(sizes, ["leaky_relu"] * len(hidden) + ["sigmoid"], rng)
        return cls(network, window_length)

    def parameters(self) -> List[np.ndarray]:
        return self.network.parameters()

    def to_dict(self) -> Dict:
        return {"window_length": self.window_length, "network": self.network.to_dict()}

    @classmethod
    def from_dict(cls, data: Dict) -> "Discriminator":
        return cls(Network.from_dict(data["network"]), data["window_length"])


def _check_scale(values: np.ndarray, what: str) -> None:
    if values.size and np.max(np.abs(values)) > 1.0 + SCALE_TOLERANCE:
        raise ScaleError(f"{what} fora de [-1, 1]", field=what, max_abs=float(np.max(np.abs(values))))


def condition_vector(window: WindowSample) -> np.ndarray:
    """Janela achatada seguida do sentimento (a janela já deve estar escalonada)."""
    history = np.asarray(window.history, dtype=np.float64)
    return np.concatenate([history.reshape(-1), [float(window.sentiment)]])


def _conditions(windows: Sequence[WindowSample]) -> np.ndarray:
    return np.stack([condition_vector(w) for w in windows])


def _generator_input(gen: Generator, conditions: np.ndarray,
                     noise: Optional[np.ndarray]) -> np.ndarray:
    conditions = np.atleast_2d(conditions)
    _check_scale(conditions, "condition")
    if gen.noise_dim:
        if noise is None:
            noise = np.zeros((conditions.shape[0], gen.noise_dim))
        noise = np.atleast_2d(np.asarray(noise, dtype=np.float64))
        if noise.shape != (conditions.shape[0], gen.noise_dim):
            raise KernelError("Ruído com forma incompatível",
                              expected=(conditions.shape[0], gen.noise_dim), actual=noise.shape)
        _check_scale(noise, "noise")
        return np.hstack([conditions, noise])
    return conditions


def generator_forward(gen: Generator, window: WindowSample,
                      noise: Optional[np.ndarray] = None) -> np.ndarray:
    """
    Próximo pregão escalonado (6 valores em (-1, 1)) para uma janela escalonada.

    Raises:
        ScaleError: Alguma entrada com |valor| > 1 + 1e-9
        KernelError: Janela com tamanho diferente do gerador
    """
    if window.window_length != gen.window_length:
        raise KernelError("Janela com tamanho diferente do gerador",
                          expected=gen.window_length, actual=window.window_length)
    x = _generator_input(gen, condition_vector(window), noise)
    return gen.network.forward(x)[0]


def discriminator_forward(disc: Discriminator, candidate: np.ndarray, window: WindowSample) -> float:
    candidate = np.asarray(candidate, dtype=np.float64).reshape(-1)
    if candidate.shape[0] != N_FEATURES:
        raise KernelError("Candidato deve ter 6 atributos", expected=N_FEATURES,
                          actual=candidate.shape[0])
    x = np.concatenate([candidate, condition_vector(window)])
    if x.shape[0] != disc.network.input_size:
        raise KernelError("Entrada do discriminador com dimensão incompatível",
                          expected=disc.network.input_size, actual=x.shape[0])
    return float(disc.network.forward(x)[0])


def discriminator_loss(disc: Discriminator, real: np.ndarray, fake: np.ndarray,
                       conditions: np.ndarray) -> Tuple[float, List[np.ndarray]]:
    """
    -mean(log D(real) + log(1 - D(fake))) e seus gradientes nos parâmetros de D.

    Reais e gerados passam num único forward empilhado.
    """
    B = conditions.shape[0]
    stacked = np.vstack([np.hstack([real, conditions]), np.hstack([fake, conditions])])
    disc.network.forward(stacked)
    logits = disc.network.last_logits[:, 0]
    a, b = logits[:B], logits[B:]
    loss = -float(np.mean(log_sigmoid(a) + log_sigmoid(-b)))
    grad = np.concatenate([(sigmoid(a) - 1.0) / B, sigmoid(b) / B])[:, None]
    return loss, disc.network.backward(grad, from_logits=True).params


def generator_loss(gen: Generator, disc: Discriminator, conditions: np.ndarray,
                   real: np.ndarray, l2_weight: float = 0.0,
                   noise: Optional[np.ndarray] = None) -> Tuple[float, List[np.ndarray]]:
    """
    -mean(log D(G(c))) + l2_weight·mean((G(c) - real)^2) e gradientes nos parâmetros de G.

    O gradiente atravessa D pela entrada; os parâmetros de D não mudam.
    """
    B = conditions.shape[0]
    fake = gen.network.forward(_generator_input(gen, conditions, noise))
    disc.network.forward(np.hstack([fake, conditions]))
    logits = disc.network.last_logits[:, 0]
    loss = -float(np.mean(log_sigmoid(logits)))
    d_grads = disc.network.backward(((sigmoid(logits) - 1.0) / B)[:, None], from_logits=True)
    d_fake = d_grads.input[:, :N_FEATURES]
    if l2_weight:
        diff = fake - real
        loss += l2_weight * float(np.mean(diff * diff))
        d_fake = d_fake + l2_weight * 2.0 * diff / diff.size
    return loss, gen.network.backward(d_fake).params


@dataclass
class GanLog:
    steps: List[int] = field(default_factory=list)
    d_loss: List[float] = field(default_factory=list)
    g_loss: List[float] = field(default_factory=list)

    def append(self, step: int, d_loss: float, g_loss: float) -> None:
        self.steps.append(step)
        self.d_loss.append(d_loss)
        self.g_loss.append(g_loss)

    def __len__(self) -> int:
        return len(self.steps)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"step": self.steps, "d_loss": self.d_loss, "g_loss": self.g_loss},
                            columns=["step", "d_loss", "g_loss"])


def _apply(state: AdamState, params: List[np.ndarray], grads: List[np.ndarray], step: int) -> None:
    try:
        adam_step(state, params, grads)
    except TrainingError as e:
        raise TrainingError(e.message, step=step, parameter_index=e.parameter_index)


def train_step(gen: Generator, disc: Discriminator, batch: Sequence[WindowSample],
               g_state: AdamState, d_state: AdamState, d_steps: int = 1, l2_weight: float = 0.0,
               rng: Optional[np.random.Generator] = None, step: int = 0) -> Tuple[float, float]:
    """
    Um passo alternado: `d_steps` atualizações de D e uma de G no mesmo lote.

    O lote já deve estar escalonado (janelas e alvos em [-1, 1]).

    Returns:
        (d_loss, g_loss)

    Raises:
        TrainingError: Perda NaN ou gradiente não finito (com o índice do passo)
    """
    conditions = _conditions(batch)
    real = np.stack([np.asarray(w.target, dtype=np.float64) for w in batch])
    _check_scale(real, "target")
    B = conditions.shape[0]

    def draw_noise():
        if not gen.noise_dim:
            return None
        source = rng if rng is not None else np.random.default_rng(step)
        return source.uniform(-1.0, 1.0, size=(B, gen.noise_dim))

    d_loss = math.nan
    for _ in range(d_steps):
        fake = gen.network.forward(_generator_input(gen, conditions, draw_noise()))
        d_loss, d_grads = discriminator_loss(disc, real, fake, conditions)
        if not math.isfinite(d_loss):
            raise TrainingError("Perda do discriminador divergiu", step=step)
        _apply(d_state, disc.parameters(), d_grads, step)

    g_loss, g_grads = generator_loss(gen, disc, conditions, real, l2_weight, draw_noise())
    if not math.isfinite(g_loss):
        raise TrainingError("Perda do gerador divergiu", step=step)
    _apply(g_state, gen.parameters(), g_grads, step)
    return d_loss, g_loss


def scale_window(scaler: ScalerParams, window: WindowSample, clip: bool = True) -> Tuple[WindowSample, int]:
    """
    Escalona histórico e alvo de uma janela.

    Com `clip`, valores fora de [-1, 1] (possíveis fora do treino) são
    recortados e a quantidade é devolvida.
    """
    history = scaler_transform(scaler, window.history)
    target = scaler_transform(scaler, np.asarray(window.target)[None])[0]
    clipped = 0
    if clip:
        clipped = int(np.sum(np.abs(history) > 1.0))
        history = np.clip(history, -1.0, 1.0)
    scaled = WindowSample(history, float(np.clip(window.sentiment, -1.0, 1.0)), target,
                          window.target_date, window.context_end, window.index)
    return scaled, clipped


def train(samples: Sequence[WindowSample], schedule: Optional[GanSchedule] = None,
          seed: int = 0) -> Tuple[Generator, Discriminator, GanLog]:
    """
    Treina o par gerador/discriminador por um número fixo de épocas.

    Os lotes são blocos cronológicos contíguos; a cada época a ordem dos
    blocos é sorteada pelo gerador de números da semente.

    Args:
        samples: Janelas de treino (não escalonadas), em ordem cronológica
        schedule: Hiperparâmetros
        seed: Semente

    Returns:
        (gerador, discriminador, log de perdas por passo)
    """
    schedule = schedule or GanSchedule()
    samples = list(samples)
    if not samples:
        raise DataError("GAN sem amostras de treino", field="samples")
    rng = np.random.default_rng(seed)
    L = samples[0].window_length
    gen = Generator.initialize(L, rng, schedule.generator_hidden, schedule.noise_dim)
    disc = Discriminator.initialize(L, rng, schedule.discriminator_hidden)

    rows = np.vstack([s.history for s in samples] + [np.stack([s.target for s in samples])])
    gen.scaler = scaler_fit(rows, "minmax_signed")
    scaled = [scale_window(gen.scaler, s, clip=False)[0] for s in samples]

    g_state = AdamState(learning_rate=schedule.learning_rate, beta1=schedule.beta1)
    d_state = AdamState(learning_rate=schedule.learning_rate, beta1=schedule.beta1)
    log = GanLog()
    batches = [scaled[i:i + schedule.batch_size] for i in range(0, len(scaled), schedule.batch_size)]
    step = 0
    for epoch in range(1, schedule.epochs + 1):
        for b in rng.permutation(len(batches)):
            step += 1
            d_loss, g_loss = train_step(gen, disc, batches[b], g_state, d_state, schedule.d_steps,
                                        schedule.l2_weight, rng, step)
            log.append(step, d_loss, g_loss)
        if epoch % 50 == 0:
            logger.debug(f"GAN época {epoch}: d_loss {log.d_loss[-1]:.4f}, g_loss {log.g_loss[-1]:.4f}")
    logger.info(f"GAN treinado: {schedule.epochs} épocas, {step} passos")
    return gen, disc, log


def forecast_holdout(gen: Generator, aligned: AlignedDataset, L: Optional[int] = None,
                     autoregressive: bool = False, sentiment_mode: str = "last") -> List[ForecastRow]:
    """
    Previsões do fechamento para os 20 pregões finais.

    Por padrão cada janela usa o histórico real (teacher forcing). No modo
    autorregressivo as linhas do próprio holdout já previstas substituem as
    observadas. O sentimento usado é sempre o do dia t.

    Raises:
        ModelError: Gerador sem escalonador
        DataError: Histórico insuficiente para o primeiro dia do holdout
    """
    if gen.scaler is None:
        raise ModelError("Gerador sem escalonador ajustado")
    L = L or gen.window_length
    if L != gen.window_length:
        raise DataError("Janela diferente da usada no treino", field="window_length",
                        expected=gen.window_length, actual=L)
    windows = make_windows(aligned, L, sentiment_mode)
    _, test = split(windows, "holdout_last_20")

    generated: Dict[date, np.ndarray] = {}
    rows, clipped = [], 0
    for window in test:
        scaled, n_clip = scale_window(gen.scaler, window)
        clipped += n_clip
        if autoregressive and generated:
            dates = aligned.dates[window.index:window.index + L]
            history = np.array(scaled.history, copy=True)
            for k, d in enumerate(dates):
                if d in generated:
                    history[k] = generated[d]
            scaled = WindowSample(history, scaled.sentiment, scaled.target, scaled.target_date,
                                  scaled.context_end, scaled.index)
        output = generator_forward(gen, scaled)
        generated[window.target_date] = output
        predicted = float(inverse_column(gen.scaler, output[CLOSE_INDEX:CLOSE_INDEX + 1], CLOSE_INDEX)[0])
        rows.append(ForecastRow(window.target_date, predicted, float(window.target[CLOSE_INDEX]),
                                window.context_end))
    if clipped:
        logger.info(f"{aligned.symbol}: {clipped} valores do holdout recortados para [-1, 1]")
    return rows
