"""
ARIMA(p, d, q) ajustado por soma de quadrados condicional (CSS) sobre o fechamento.

A ordem d vem do ADF; (p, q) vem do menor AIC na grade. Os coeficientes são
estimados por Levenberg-Marquardt partindo de zero, com o jacobiano
analítico da recursão dos resíduos.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.errors import DataError, ModelError
from src.models.stationarity import adf_stationarity_test
from src.numkernel.optim import levenberg_marquardt

logger = logging.getLogger(__name__)

MAX_D = 2
MIN_SELECT_LENGTH = 50


@dataclass(frozen=True)
class ArimaOrder:
    p: int
    d: int
    q: int

    def __post_init__(self):
        if self.p < 0 or self.q < 0:
            raise ModelError("Ordens p e q não podem ser negativas", order=(self.p, self.d, self.q))
        if self.d not in (0, 1, 2):
            raise ModelError("Ordem de diferenciação deve estar em {0, 1, 2}", order=(self.p, self.d, self.q))

    def as_tuple(self) -> Tuple[int, int, int]:
        return (self.p, self.d, self.q)


@dataclass(eq=False)
class ArimaModel:
    order: ArimaOrder
    intercept: float
    ar_coeffs: np.ndarray
    ma_coeffs: np.ndarray
    residual_variance: float
    tail_values: np.ndarray = field(default_factory=lambda: np.zeros(0))
    tail_residuals: np.ndarray = field(default_factory=lambda: np.zeros(0))
    gradient_norm: float = 0.0
    train_length: int = 0

    def __post_init__(self):
        self.ar_coeffs = np.asarray(self.ar_coeffs, dtype=np.float64).reshape(-1)
        self.ma_coeffs = np.asarray(self.ma_coeffs, dtype=np.float64).reshape(-1)
        if self.ar_coeffs.shape[0] != self.order.p or self.ma_coeffs.shape[0] != self.order.q:
            raise ModelError("Número de coeficientes não confere com a ordem",
                             order=self.order.as_tuple(),
                             ar=self.ar_coeffs.shape[0], ma=self.ma_coeffs.shape[0])
        if not self.residual_variance >= 0:
            raise ModelError("Variância residual negativa", sigma2=self.residual_variance)

    def to_dict(self) -> Dict:
        return {
            "order": list(self.order.as_tuple()),
            "intercept": self.intercept,
            "ar_coeffs": self.ar_coeffs.tolist(),
            "ma_coeffs": self.ma_coeffs.tolist(),
            "residual_variance": self.residual_variance,
            "tail_values": np.asarray(self.tail_values).tolist(),
            "tail_residuals": np.asarray(self.tail_residuals).tolist(),
            "gradient_norm": self.gradient_norm,
            "train_length": self.train_length,
        }

    @classmethod
    def from_dict(cls, data: Dict) -> "ArimaModel":
        return cls(
            order=ArimaOrder(*data["order"]),
            intercept=float(data["intercept"]),
            ar_coeffs=np.array(data["ar_coeffs"], dtype=np.float64),
            ma_coeffs=np.array(data["ma_coeffs"], dtype=np.float64),
            residual_variance=float(data["residual_variance"]),
            tail_values=np.array(data.get("tail_values", []), dtype=np.float64),
            tail_residuals=np.array(data.get("tail_residuals", []), dtype=np.float64),
            gradient_norm=float(data.get("gradient_norm", 0.0)),
            train_length=int(data.get("train_length", 0)),
        )


def difference(series: np.ndarray, d: int) -> np.ndarray:
    return np.diff(np.asarray(series, dtype=np.float64), n=d) if d > 0 else np.asarray(series, dtype=np.float64)


def integrate_forecast(history: np.ndarray, diff_forecast: float, d: int) -> float:
    """Volta a previsão da série diferenciada d vezes para o nível original."""
    history = np.asarray(history, dtype=np.float64)
    level = float(diff_forecast)
    for k in range(d):
        level += float(difference(history, k)[-1])
    return level


def css_residuals(w: np.ndarray, params: np.ndarray, p: int, q: int,
                  start: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Resíduos condicionais e jacobiano em relação a [c, φ1..φp, θ1..θq].

    e_t = w_t - c - Σφ_i w_{t-i} - Σθ_j e_{t-j} para t >= start, com
    resíduos anteriores a `start` iguais a zero.
    """
    w = np.asarray(w, dtype=np.float64)
    n = w.shape[0]
    m = n - start
    k = 1 + p + q
    c = params[0]
    phi = params[1:1 + p]
    theta = params[1 + p:]

    lags = np.column_stack([w[start - i:n - i] for i in range(1, p + 1)]) if p else np.zeros((m, 0))
    base = w[start:] - c - (lags @ phi if p else 0.0)

    e = np.zeros(m)
    jac = np.zeros((m, k))
    for t in range(m):
        value = base[t]
        row = np.empty(k)
        row[0] = -1.0
        if p:
            row[1:1 + p] = -lags[t]
        for j in range(1, q + 1):
            if t - j >= 0:
                value -= theta[j - 1] * e[t - j]
                row[p + j] = -e[t - j]
            else:
                row[p + j] = 0.0
        for j in range(1, min(q, t) + 1):
            row -= theta[j - 1] * jac[t - j]
        e[t] = value
        jac[t] = row
    return e, jac


def _fit_css(w: np.ndarray, p: int, q: int, start: int, max_iter: int):
    def residual_fn(x):
        return css_residuals(w, x, p, q, start)

    return levenberg_marquardt(residual_fn, np.zeros(1 + p + q), max_iter=max_iter)


def fit(train: np.ndarray, order: ArimaOrder, max_iter: int = 200) -> ArimaModel:
    """
    Ajusta o modelo por CSS na série diferenciada.

    Args:
        train: Série de treino (nível)
        order: Ordem (p, d, q)
        max_iter: Iterações máximas do otimizador

    Returns:
        ArimaModel com σ² = CSS / n

    Raises:
        DataError: Série curta demais
        ModelError: Otimização não convergiu (com a norma final do gradiente)
    """
    y = np.asarray(train, dtype=np.float64).reshape(-1)
    p, d, q = order.as_tuple()
    if y.shape[0] <= p + q + d + 10:
        raise DataError(f"Treino curto demais para ARIMA{order.as_tuple()}",
                        field="train", n=y.shape[0], required=p + q + d + 11)
    if not np.all(np.isfinite(y)):
        raise DataError("Treino com valores não finitos", field="train")

    w = difference(y, d)
    result = _fit_css(w, p, q, p, max_iter)
    if not result.converged or not np.all(np.isfinite(result.x)):
        raise ModelError(f"CSS não convergiu para ARIMA{order.as_tuple()}",
                         gradient_norm=result.gradient_norm, iterations=result.iterations)

    e, _ = css_residuals(w, result.x, p, q, p)
    sigma2 = float(e @ e) / max(e.shape[0], 1)
    keep = max(p, q) + d
    model = ArimaModel(
        order=order,
        intercept=float(result.x[0]),
        ar_coeffs=result.x[1:1 + p],
        ma_coeffs=result.x[1 + p:],
        residual_variance=sigma2,
        tail_values=y[-keep:] if keep else np.zeros(0),
        tail_residuals=e[-q:] if q else np.zeros(0),
        gradient_norm=result.gradient_norm,
        train_length=y.shape[0],
    )
    logger.debug(f"ARIMA{order.as_tuple()} ajustado: c={model.intercept:.4g}, σ²={sigma2:.4g}, "
                 f"{result.iterations} iterações")
    return model


def select_order(train: np.ndarray, p_max: int = 3, q_max: int = 3, max_iter: int = 200) -> ArimaOrder:
    """
    Escolhe d pelo ADF e (p, q) pelo AIC = n·ln(CSS/n) + 2(p+q+1).

    Todas as células da grade usam o mesmo início condicional (p_max) para
    que os AIC sejam comparáveis. Empates ficam com o menor p+q e depois o
    menor p.

    Raises:
        DataError: Treino com menos de 50 pontos
        ModelError: Nenhum d em {0, 1, 2} passa no ADF, ou nenhuma célula converge
    """
    y = np.asarray(train, dtype=np.float64).reshape(-1)
    if y.shape[0] < MIN_SELECT_LENGTH:
        raise DataError(f"Seleção de ordem exige pelo menos {MIN_SELECT_LENGTH} pontos",
                        field="train", n=y.shape[0])

    chosen_d = None
    for d in range(MAX_D + 1):
        result = adf_stationarity_test(difference(y, d))
        logger.debug(f"ADF com d={d}: estatística {result.statistic:.3f}")
        if result.is_stationary:
            chosen_d = d
            break
    if chosen_d is None:
        raise ModelError("Nenhuma diferenciação em {0, 1, 2} torna a série estacionária")

    w = difference(y, chosen_d)
    candidates: List[Tuple[float, int, int, int]] = []
    for p in range(p_max + 1):
        for q in range(q_max + 1):
            result = _fit_css(w, p, q, p_max, max_iter)
            if not result.converged or not np.isfinite(result.cost):
                logger.debug(f"Célula ({p}, {q}) não convergiu (|g|={result.gradient_norm:.3g})")
                continue
            n = w.shape[0] - p_max
            aic = n * math.log(max(result.cost, 1e-300)) + 2 * (p + q + 1)
            candidates.append((aic, p + q, p, q))
    if not candidates:
        raise ModelError("Nenhuma célula da grade (p, q) convergiu", p_max=p_max, q_max=q_max)

    _, _, p, q = min(candidates)
    order = ArimaOrder(p, chosen_d, q)
    logger.info(f"Ordem selecionada: ARIMA{order.as_tuple()}")
    return order


def min_history(order: ArimaOrder) -> int:
    return max(order.d + order.p + order.q, 1)


def forecast_one_step(model: ArimaModel, history: np.ndarray) -> float:
    """
    Previsão do próximo valor no nível original.

    Os resíduos são recalculados sobre todo o histórico com a mesma
    convenção condicional do ajuste, então o resultado depende só de
    (modelo, histórico).

    Raises:
        DataError: Histórico curto demais para p defasagens e q resíduos
    """
    y = np.asarray(history, dtype=np.float64).reshape(-1)
    p, d, q = model.order.as_tuple()
    if y.shape[0] < min_history(model.order):
        raise DataError("Histórico insuficiente para a previsão", field="history",
                        n=y.shape[0], required=min_history(model.order))

    w = difference(y, d)
    params = np.concatenate([[model.intercept], model.ar_coeffs, model.ma_coeffs])
    e, _ = css_residuals(w, params, p, q, p) if w.shape[0] > p else (np.zeros(0), None)

    value = model.intercept
    for i in range(1, p + 1):
        value += model.ar_coeffs[i - 1] * w[-i]
    for j in range(1, q + 1):
        if j <= e.shape[0]:
            value += model.ma_coeffs[j - 1] * e[-j]
    return integrate_forecast(y, value, d)


def rolling_forecast(model: ArimaModel, train: np.ndarray, test: np.ndarray,
                     refit: bool = False) -> np.ndarray:
    """
    Previsões um passo à frente sobre o teste, incorporando cada valor observado.

    Args:
        model: Modelo ajustado no treino
        train: Série de treino
        test: Valores observados do teste
        refit: Se True, reajusta o modelo a cada passo (mesma ordem)

    Returns:
        Vetor de previsões com o tamanho do teste
    """
    train = np.asarray(train, dtype=np.float64).reshape(-1)
    test = np.asarray(test, dtype=np.float64).reshape(-1)
    predictions = np.empty(test.shape[0])
    for i in range(test.shape[0]):
        history = np.concatenate([train, test[:i]])
        if refit and i > 0:
            model = fit(history, model.order)
        predictions[i] = forecast_one_step(model, history)
    return predictions
