"""
Verificação de gradientes analíticos contra diferenças finitas centrais.
"""
from dataclasses import dataclass, field
from typing import Callable, List, Sequence, Tuple

import numpy as np

from src.numkernel.layers import Network

SATURATION_THRESHOLD = 30.0


@dataclass
class GradCheckReport:
    tolerance: float
    max_relative_error: float
    per_parameter_error: List[float]
    failures: List[Tuple[int, Tuple[int, ...]]] = field(default_factory=list)
    saturated_layers: List[int] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures


def relative_error(analytic: np.ndarray, numeric: np.ndarray) -> np.ndarray:
    """|a - n| / max(|a|, |n|, 1)."""
    analytic = np.asarray(analytic, dtype=np.float64)
    numeric = np.asarray(numeric, dtype=np.float64)
    denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), 1.0)
    return np.abs(analytic - numeric) / denom


def numeric_gradient(loss_fn: Callable[[], float], params: Sequence[np.ndarray],
                     h: float = 1e-5) -> List[np.ndarray]:
    """
    Gradiente por diferença central de `loss_fn` em relação a cada entrada de `params`.

    `loss_fn` é chamada sem argumentos e deve ler os parâmetros atuais
    (eles são perturbados in-place e restaurados).
    """
    grads = []
    for p in params:
        g = np.zeros_like(p)
        for idx in np.ndindex(p.shape):
            original = p[idx]
            p[idx] = original + h
            plus = loss_fn()
            p[idx] = original - h
            minus = loss_fn()
            p[idx] = original
            g[idx] = (plus - minus) / (2.0 * h)
        grads.append(g)
    return grads


def compare_gradients(analytic: Sequence[np.ndarray], numeric: Sequence[np.ndarray],
                      tolerance: float = 1e-4, skip: Sequence[int] = ()) -> GradCheckReport:
    """Compara listas de gradientes; índices em `skip` são reportados mas não reprovam."""
    per_param, failures = [], []
    worst = 0.0
    for i, (a, n) in enumerate(zip(analytic, numeric)):
        err = relative_error(a, n)
        per_param.append(float(err.max()) if err.size else 0.0)
        if i in skip:
            continue
        worst = max(worst, per_param[-1])
        for idx in zip(*np.nonzero(err > tolerance)):
            failures.append((i, tuple(int(j) for j in idx)))
    return GradCheckReport(tolerance, worst, per_param, failures)


def finite_difference_check(network: Network, input: np.ndarray, target: np.ndarray,
                            tolerance: float = 1e-4, h: float = 1e-5) -> GradCheckReport:
    """
    Confere os gradientes da rede para a perda soma((saída - alvo)^2).

    Camadas sigmoide com |pré-ativação| > 30 são marcadas como saturadas:
    aparecem no relatório mas não contam como falha.
    """
    target = np.asarray(target, dtype=np.float64)
    params = network.parameters()

    def loss() -> float:
        diff = network.forward(input) - target
        return float(np.sum(diff * diff))

    output = network.forward(input)
    saturated = [k for k, (layer, z) in enumerate(zip(network.layers, network._cache.pre_activations))
                 if layer.activation == "sigmoid" and np.any(np.abs(z) > SATURATION_THRESHOLD)]
    analytic = network.backward(2.0 * (output - target)).params
    numeric = numeric_gradient(loss, params, h)
    skip = [i for k in saturated for i in (2 * k, 2 * k + 1)]
    report = compare_gradients(analytic, numeric, tolerance, skip)
    report.saturated_layers = saturated
    return report
