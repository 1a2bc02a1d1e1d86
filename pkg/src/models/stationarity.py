"""
Teste de Dickey-Fuller aumentado (com constante) para escolher a ordem de diferenciação.
"""
import logging
import math
from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np

from src.errors import DataError

logger = logging.getLogger(__name__)

# valor crítico de 5% para o caso só com constante
CRITICAL_VALUE_5PCT = -2.86


@dataclass(frozen=True)
class AdfResult:
    statistic: float
    is_stationary: bool
    lag: int
    nobs: int
    zero_variance: bool = False

    def __iter__(self) -> Iterator:
        # permite `stat, ok = adf_stationarity_test(...)`
        yield self.statistic
        yield self.is_stationary


def default_lag(n: int) -> int:
    """floor(n^(1/3)), com correção de arredondamento para cubos perfeitos."""
    lag = int(math.floor(n ** (1.0 / 3.0)))
    while (lag + 1) ** 3 <= n:
        lag += 1
    while lag ** 3 > n:
        lag -= 1
    return lag


def adf_stationarity_test(series: np.ndarray, lag: Optional[int] = None,
                          critical_value: float = CRITICAL_VALUE_5PCT) -> AdfResult:
    """
    Regressão Δy_t = a + g·y_{t-1} + Σ b_i·Δy_{t-i} + e_t; estatística = g / ep(g).

    A série é estacionária quando a estatística fica abaixo do valor crítico.
    Séries constantes voltam como não estacionárias com `zero_variance=True`.
    Diferenças constantes (tendência linear exata) dão estatística 0, não
    estacionária, sem o diagnóstico.

    Args:
        series: Série univariada
        lag: Defasagens de Δy; padrão floor(n^(1/3))
        critical_value: Valor crítico (padrão -2.86)

    Returns:
        AdfResult (desempacotável como (estatística, estacionária))

    Raises:
        DataError: Série com tamanho <= lag + 10
    """
    y = np.asarray(series, dtype=np.float64).reshape(-1)
    n = y.shape[0]
    if lag is None:
        lag = default_lag(n)
    if lag < 0:
        raise DataError("Defasagem do ADF não pode ser negativa", field="lag", value=lag)
    if n <= lag + 10:
        raise DataError(f"Série curta demais para o ADF (n={n}, mínimo {lag + 11})",
                        field="series", n=n, lag=lag)
    if not np.all(np.isfinite(y)):
        raise DataError("Série com valores não finitos", field="series")

    if np.ptp(y) == 0.0:
        logger.debug("ADF: série constante; tratada como não estacionária")
        return AdfResult(0.0, False, lag, n - 1 - lag, zero_variance=True)

    dy = np.diff(y)
    target = dy[lag:]
    nobs = target.shape[0]
    tss = float(np.sum((target - target.mean()) ** 2))
    if tss == 0.0:
        # Δy constante (tendência linear exata): g = 0 e não há reversão à média
        logger.debug("ADF: diferenças constantes; estatística 0")
        return AdfResult(0.0, False, lag, nobs)

    columns = [np.ones(nobs), y[lag:n - 1]]
    for i in range(1, lag + 1):
        columns.append(dy[lag - i:n - 1 - i])
    design = np.column_stack(columns)

    coef, _, rank, _ = np.linalg.lstsq(design, target, rcond=None)
    resid = target - design @ coef
    dof = max(nobs - design.shape[1], 1)
    # piso na variância residual para ajustes exatos (séries determinísticas)
    s2 = max(float(resid @ resid) / dof, 1e-12 * tss / nobs, 1e-300)
    xtx_inv = np.linalg.pinv(design.T @ design)
    se = math.sqrt(max(s2 * xtx_inv[1, 1], 1e-300))
    statistic = float(coef[1] / se)
    if rank < design.shape[1]:
        logger.debug(f"ADF: matriz de regressão com posto {rank} < {design.shape[1]}")
    return AdfResult(statistic, statistic < critical_value, lag, nobs)
