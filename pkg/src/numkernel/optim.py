"""
Otimizadores: Adam para as redes e Levenberg-Marquardt para mínimos quadrados.
"""
import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Sequence, Tuple

import numpy as np

from src.errors import KernelError, TrainingError

logger = logging.getLogger(__name__)


@dataclass
class AdamState:
    """Estado do Adam: momentos por parâmetro e contador de passos."""

    learning_rate: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    first_moment: List[np.ndarray] = field(default_factory=list)
    second_moment: List[np.ndarray] = field(default_factory=list)
    step_count: int = 0

    def __post_init__(self):
        # lr = 0 é aceito: congela os parâmetros mas mantém a contabilidade
        if self.learning_rate < 0:
            raise KernelError("learning_rate deve ser >= 0", expected=">=0",
                              actual=self.learning_rate)
        for name in ("beta1", "beta2"):
            value = getattr(self, name)
            if not 0.0 < value < 1.0:
                raise KernelError(f"{name} deve estar em (0, 1)", expected="(0,1)", actual=value)
        if self.epsilon <= 0:
            raise KernelError("epsilon deve ser > 0", expected=">0", actual=self.epsilon)

    def to_dict(self) -> Dict:
        return {
            "learning_rate": self.learning_rate,
            "beta1": self.beta1,
            "beta2": self.beta2,
            "epsilon": self.epsilon,
            "step_count": self.step_count,
            "first_moment": [m.tolist() for m in self.first_moment],
            "second_moment": [v.tolist() for v in self.second_moment],
        }

    @classmethod
    def from_dict(cls, data: Dict) -> "AdamState":
        return cls(
            learning_rate=data["learning_rate"],
            beta1=data["beta1"],
            beta2=data["beta2"],
            epsilon=data["epsilon"],
            first_moment=[np.array(m, dtype=np.float64) for m in data["first_moment"]],
            second_moment=[np.array(v, dtype=np.float64) for v in data["second_moment"]],
            step_count=data["step_count"],
        )


def adam_step(state: AdamState, params: Sequence[np.ndarray],
              grads: Sequence[np.ndarray]) -> Sequence[np.ndarray]:
    """
    Um passo do Adam com correção de viés. Atualiza `params` in-place.

    Args:
        state: Estado do otimizador (momentos são criados no primeiro passo)
        params: Lista de arrays de parâmetros
        grads: Gradientes com as mesmas formas de `params`

    Returns:
        A própria lista `params`, já atualizada
    """
    if len(params) != len(grads):
        raise KernelError("Número de gradientes difere do número de parâmetros",
                          expected=len(params), actual=len(grads))
    for i, (p, g) in enumerate(zip(params, grads)):
        if p.shape != np.shape(g):
            raise KernelError("Gradiente com forma incompatível", expected=p.shape,
                              actual=np.shape(g), parameter_index=i)
        if not np.all(np.isfinite(g)):
            raise TrainingError("Gradiente não finito", step=state.step_count + 1,
                                parameter_index=i)

    if not state.first_moment:
        state.first_moment = [np.zeros_like(p) for p in params]
        state.second_moment = [np.zeros_like(p) for p in params]

    state.step_count += 1
    bc1 = 1.0 - state.beta1 ** state.step_count
    bc2 = 1.0 - state.beta2 ** state.step_count
    for p, g, m, v in zip(params, grads, state.first_moment, state.second_moment):
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * (g * g)
        p -= state.learning_rate * (m / bc1) / (np.sqrt(v / bc2) + state.epsilon)
    return params


@dataclass
class LeastSquaresResult:
    x: np.ndarray
    cost: float
    gradient_norm: float
    iterations: int
    converged: bool


ResidualFn = Callable[[np.ndarray], Tuple[np.ndarray, np.ndarray]]


def levenberg_marquardt(residual_fn: ResidualFn, x0: np.ndarray, max_iter: int = 200,
                        gtol: float = 1e-8, ftol: float = 1e-12) -> LeastSquaresResult:
    """
    Minimiza mean(r(x)^2) por Gauss-Newton amortecido.

    Args:
        residual_fn: Função que devolve (resíduos r, jacobiano dr/dx)
        x0: Ponto inicial
        max_iter: Máximo de iterações aceitas
        gtol: Tolerância na norma infinito do gradiente
        ftol: Tolerância na queda relativa do custo

    Returns:
        LeastSquaresResult; `converged` indica se algum critério foi atingido
    """
    x = np.array(x0, dtype=np.float64)
    r, jac = residual_fn(x)
    n = max(len(r), 1)
    cost = float(r @ r) / n
    mu = 1e-3
    gradient = 2.0 / n * (jac.T @ r)
    for iteration in range(1, max_iter + 1):
        gradient = 2.0 / n * (jac.T @ r)
        gnorm = float(np.max(np.abs(gradient))) if gradient.size else 0.0
        if gnorm <= gtol:
            return LeastSquaresResult(x, cost, gnorm, iteration - 1, True)

        hessian = 2.0 / n * (jac.T @ jac)
        scale = np.maximum(np.diag(hessian), 1e-12)
        for _ in range(40):
            step = np.linalg.solve(hessian + mu * np.diag(scale), -gradient)
            candidate = x + step
            r_new, jac_new = residual_fn(candidate)
            cost_new = float(r_new @ r_new) / n if np.all(np.isfinite(r_new)) else np.inf
            if cost_new < cost:
                break
            mu *= 4.0
        else:
            # nenhum passo reduz o custo: ponto estacionário numérico
            logger.debug(f"LM sem passo de descida após {iteration} iterações (|g|={gnorm:.3g})")
            return LeastSquaresResult(x, cost, gnorm, iteration, gnorm <= np.sqrt(gtol))

        improvement = cost - cost_new
        x, r, jac, cost = candidate, r_new, jac_new, cost_new
        mu = max(mu / 3.0, 1e-12)
        if improvement <= ftol * max(cost, 1e-300):
            gradient = 2.0 / n * (jac.T @ r)
            gnorm = float(np.max(np.abs(gradient))) if gradient.size else 0.0
            return LeastSquaresResult(x, cost, gnorm, iteration, True)

    gradient = 2.0 / n * (jac.T @ r)
    gnorm = float(np.max(np.abs(gradient))) if gradient.size else 0.0
    return LeastSquaresResult(x, cost, gnorm, max_iter, gnorm <= gtol)
