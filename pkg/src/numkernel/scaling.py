"""
Escalonamento Min-Max ajustado somente na partição de treino.
"""
from dataclasses import dataclass
from typing import Dict

import numpy as np

from src.errors import DataError, KernelError

SCALER_MODES = ("minmax_unit", "minmax_signed")


@dataclass(frozen=True, eq=False)
class ScalerParams:
    mode: str
    per_feature_min: np.ndarray
    per_feature_max: np.ndarray
    fitted_on: str = "train"

    def __post_init__(self):
        if self.mode not in SCALER_MODES:
            raise KernelError(f"Modo de escala desconhecido '{self.mode}'",
                              expected=SCALER_MODES, actual=self.mode)
        lo = np.array(self.per_feature_min, dtype=np.float64, copy=True)
        hi = np.array(self.per_feature_max, dtype=np.float64, copy=True)
        if lo.shape != hi.shape or lo.ndim != 1:
            raise KernelError("Mínimos e máximos com formas diferentes",
                              expected=lo.shape, actual=hi.shape)
        if np.any(hi < lo):
            raise KernelError("Máximo menor que mínimo em alguma coluna")
        object.__setattr__(self, "per_feature_min", lo)
        object.__setattr__(self, "per_feature_max", hi)

    @property
    def n_features(self) -> int:
        return self.per_feature_min.shape[0]

    @property
    def degenerate(self) -> np.ndarray:
        """Colunas constantes no treino (mín == máx)."""
        return self.per_feature_max == self.per_feature_min

    def to_dict(self) -> Dict:
        return {
            "mode": self.mode,
            "per_feature_min": self.per_feature_min.tolist(),
            "per_feature_max": self.per_feature_max.tolist(),
            "fitted_on": self.fitted_on,
        }

    @classmethod
    def from_dict(cls, data: Dict) -> "ScalerParams":
        return cls(data["mode"], np.array(data["per_feature_min"]),
                   np.array(data["per_feature_max"]), data.get("fitted_on", "train"))


def scaler_fit(data: np.ndarray, mode: str = "minmax_unit", fitted_on: str = "train") -> ScalerParams:
    """
    Registra mínimo e máximo por coluna.

    Args:
        data: Matriz (linhas x colunas) da partição de treino
        mode: 'minmax_unit' -> [0, 1]; 'minmax_signed' -> [-1, 1]
        fitted_on: Rótulo da partição usada

    Returns:
        ScalerParams
    """
    data = np.asarray(data, dtype=np.float64)
    if data.ndim == 1:
        data = data[:, None]
    if data.size == 0:
        raise DataError("Não é possível ajustar o escalonador com dados vazios")
    if not np.all(np.isfinite(data)):
        raise DataError("Dados de treino contêm valores não finitos")
    return ScalerParams(mode, data.min(axis=0), data.max(axis=0), fitted_on)


def _check_columns(params: ScalerParams, data: np.ndarray) -> np.ndarray:
    data = np.asarray(data, dtype=np.float64)
    if data.shape[-1] != params.n_features:
        raise DataError("Número de colunas difere do ajustado",
                        expected=params.n_features, actual=data.shape[-1])
    return data


def scaler_transform(params: ScalerParams, data: np.ndarray) -> np.ndarray:
    """Leva os dados para a escala do modo. Não há corte: valores fora do treino passam de 1."""
    data = _check_columns(params, data)
    span = params.per_feature_max - params.per_feature_min
    safe = np.where(params.degenerate, 1.0, span)
    unit = np.where(params.degenerate, 0.5, (data - params.per_feature_min) / safe)
    if params.mode == "minmax_signed":
        return 2.0 * unit - 1.0
    return unit


def scaler_inverse(params: ScalerParams, data: np.ndarray) -> np.ndarray:
    """Inversa de scaler_transform. Colunas constantes voltam para o valor do treino."""
    data = _check_columns(params, data)
    unit = (data + 1.0) / 2.0 if params.mode == "minmax_signed" else data
    span = params.per_feature_max - params.per_feature_min
    return np.where(params.degenerate, params.per_feature_min,
                    params.per_feature_min + unit * span)


def inverse_column(params: ScalerParams, values: np.ndarray, column: int) -> np.ndarray:
    """Inverte apenas uma coluna (ex.: o fechamento) de valores escalonados."""
    values = np.asarray(values, dtype=np.float64)
    lo = params.per_feature_min[column]
    hi = params.per_feature_max[column]
    if hi == lo:
        return np.full_like(values, lo)
    unit = (values + 1.0) / 2.0 if params.mode == "minmax_signed" else values
    return lo + unit * (hi - lo)
