"""
Camadas densas, ativações e retropropagação para as redes do projeto.

Tudo em float64. Entradas podem ser um vetor (uma amostra) ou uma matriz
com uma amostra por linha.
"""
import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

import numpy as np

from src.errors import KernelError

logger = logging.getLogger(__name__)

ACTIVATIONS = ("relu", "leaky_relu", "tanh", "sigmoid", "identity")
LEAKY_SLOPE = 0.01


def sigmoid(z: np.ndarray) -> np.ndarray:
    """Sigmoide numericamente estável."""
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def log_sigmoid(z: np.ndarray) -> np.ndarray:
    """log(sigmoid(z)) sem underflow."""
    return -np.logaddexp(0.0, -np.asarray(z, dtype=np.float64))


def activate(name: str, z: np.ndarray) -> np.ndarray:
    if name == "relu":
        return np.maximum(z, 0.0)
    if name == "leaky_relu":
        return np.where(z > 0, z, LEAKY_SLOPE * z)
    if name == "tanh":
        return np.tanh(z)
    if name == "sigmoid":
        return sigmoid(z)
    if name == "identity":
        return np.array(z, dtype=np.float64, copy=True)
    raise KernelError(f"Ativação desconhecida '{name}'", expected=ACTIVATIONS, actual=name)


def activation_derivative(name: str, z: np.ndarray, a: np.ndarray) -> np.ndarray:
    """Derivada da ativação avaliada na pré-ativação z (a = f(z))."""
    if name == "relu":
        return (z > 0).astype(np.float64)
    if name == "leaky_relu":
        return np.where(z > 0, 1.0, LEAKY_SLOPE)
    if name == "tanh":
        return 1.0 - a * a
    if name == "sigmoid":
        return a * (1.0 - a)
    if name == "identity":
        return np.ones_like(z)
    raise KernelError(f"Ativação desconhecida '{name}'", expected=ACTIVATIONS, actual=name)


@dataclass(frozen=True, eq=False)
class DenseLayer:
    """Camada totalmente conectada: saída = ativação(W·x + b)."""

    weights: np.ndarray
    bias: np.ndarray
    activation: str = "identity"

    def __post_init__(self):
        weights = np.asarray(self.weights, dtype=np.float64)
        bias = np.asarray(self.bias, dtype=np.float64)
        if weights.ndim != 2:
            raise KernelError("Pesos devem ser uma matriz (saída x entrada)",
                              expected=2, actual=weights.ndim)
        if bias.shape != (weights.shape[0],):
            raise KernelError("Bias incompatível com os pesos",
                              expected=(weights.shape[0],), actual=bias.shape)
        if self.activation not in ACTIVATIONS:
            raise KernelError(f"Ativação desconhecida '{self.activation}'",
                              expected=ACTIVATIONS, actual=self.activation)
        object.__setattr__(self, "weights", np.array(weights, copy=True))
        object.__setattr__(self, "bias", np.array(bias, copy=True))

    @property
    def in_features(self) -> int:
        return self.weights.shape[1]

    @property
    def out_features(self) -> int:
        return self.weights.shape[0]

    @classmethod
    def initialize(cls, in_features: int, out_features: int, activation: str,
                   rng: np.random.Generator) -> "DenseLayer":
        """
        Inicializa a camada com pesos aleatórios (semente controlada pelo rng).

        relu/leaky_relu usam normal com desvio sqrt(2/fan_in); as demais usam
        uniforme em ±sqrt(6/(fan_in+fan_out)). Bias começa em zero.
        """
        if activation in ("relu", "leaky_relu"):
            weights = rng.normal(0.0, np.sqrt(2.0 / in_features), size=(out_features, in_features))
        else:
            limit = np.sqrt(6.0 / (in_features + out_features))
            weights = rng.uniform(-limit, limit, size=(out_features, in_features))
        return cls(weights, np.zeros(out_features), activation)

    def pre_activation(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape[-1] != self.in_features:
            raise KernelError("Dimensão de entrada incompatível com a camada",
                              expected=self.in_features, actual=x.shape[-1])
        return x @ self.weights.T + self.bias

    def to_dict(self) -> Dict:
        return {
            "activation": self.activation,
            "weights": self.weights.tolist(),
            "bias": self.bias.tolist(),
        }

    @classmethod
    def from_dict(cls, data: Dict) -> "DenseLayer":
        return cls(np.array(data["weights"], dtype=np.float64),
                   np.array(data["bias"], dtype=np.float64),
                   data["activation"])


def dense_forward(layer: DenseLayer, input: np.ndarray) -> np.ndarray:
    """
    Aplica uma camada a um vetor (ou a uma matriz de amostras).

    Args:
        layer: Camada densa
        input: Vetor de tamanho layer.in_features

    Returns:
        Vetor de tamanho layer.out_features
    """
    return activate(layer.activation, layer.pre_activation(input))


@dataclass
class ForwardCache:
    input: np.ndarray
    pre_activations: List[np.ndarray]
    activations: List[np.ndarray]
    squeeze: bool


@dataclass
class Gradients:
    """Gradientes por parâmetro (na ordem de Network.parameters()) e da entrada."""

    params: List[np.ndarray]
    input: np.ndarray

    def is_finite(self) -> bool:
        return all(np.all(np.isfinite(g)) for g in self.params)


class Network:
    """Pilha de camadas densas com cache de forward para a retropropagação."""

    def __init__(self, layers: Sequence[DenseLayer]):
        if not layers:
            raise KernelError("Rede precisa de pelo menos uma camada", expected=">=1", actual=0)
        for prev, nxt in zip(layers, layers[1:]):
            if prev.out_features != nxt.in_features:
                raise KernelError("Camadas consecutivas com dimensões incompatíveis",
                                  expected=prev.out_features, actual=nxt.in_features)
        self.layers: List[DenseLayer] = list(layers)
        self._cache: Optional[ForwardCache] = None

    @classmethod
    def build(cls, sizes: Sequence[int], activations: Sequence[str],
              rng: np.random.Generator) -> "Network":
        """Cria uma rede a partir das larguras [entrada, ocultas..., saída]."""
        if len(activations) != len(sizes) - 1:
            raise KernelError("Uma ativação por camada",
                              expected=len(sizes) - 1, actual=len(activations))
        layers = [DenseLayer.initialize(n_in, n_out, act, rng)
                  for n_in, n_out, act in zip(sizes[:-1], sizes[1:], activations)]
        return cls(layers)

    @property
    def input_size(self) -> int:
        return self.layers[0].in_features

    @property
    def output_size(self) -> int:
        return self.layers[-1].out_features

    def parameters(self) -> List[np.ndarray]:
        """Referências aos buffers [W0, b0, W1, b1, ...] (atualizados in-place)."""
        params = []
        for layer in self.layers:
            params.extend([layer.weights, layer.bias])
        return params

    def forward(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        squeeze = x.ndim == 1
        a = np.atleast_2d(x)
        pre, acts = [], []
        for layer in self.layers:
            z = layer.pre_activation(a)
            a = activate(layer.activation, z)
            pre.append(z)
            acts.append(a)
        self._cache = ForwardCache(np.array(x, copy=True), pre, acts, squeeze)
        return a[0] if squeeze else a

    __call__ = forward

    @property
    def last_logits(self) -> np.ndarray:
        """Pré-ativação da última camada do forward mais recente."""
        if self._cache is None:
            raise KernelError("Nenhum forward em cache")
        z = self._cache.pre_activations[-1]
        return z[0] if self._cache.squeeze else z

    def backward(self, loss_gradient: np.ndarray, from_logits: bool = False) -> Gradients:
        """
        Retropropaga o gradiente da perda pela rede.

        Args:
            loss_gradient: dPerda/dSaída (mesma forma da saída do forward)
            from_logits: Se True, o gradiente já é em relação à pré-ativação
                da última camada

        Returns:
            Gradients com dPerda/dθ para cada peso e bias e dPerda/dEntrada
        """
        cache = self._cache
        if cache is None:
            raise KernelError("backward chamado sem forward correspondente")
        grad = np.atleast_2d(np.asarray(loss_gradient, dtype=np.float64))
        if grad.shape != cache.activations[-1].shape:
            raise KernelError("Gradiente da perda com forma incompatível",
                              expected=cache.activations[-1].shape, actual=grad.shape)

        param_grads: List[np.ndarray] = [None] * (2 * len(self.layers))
        inputs = [np.atleast_2d(cache.input)] + cache.activations[:-1]
        for k in range(len(self.layers) - 1, -1, -1):
            layer = self.layers[k]
            if k == len(self.layers) - 1 and from_logits:
                delta = grad
            else:
                delta = grad * activation_derivative(layer.activation,
                                                     cache.pre_activations[k],
                                                     cache.activations[k])
            param_grads[2 * k] = delta.T @ inputs[k]
            param_grads[2 * k + 1] = delta.sum(axis=0)
            grad = delta @ layer.weights

        input_grad = grad[0] if cache.squeeze else grad
        return Gradients(param_grads, input_grad)

    def copy(self) -> "Network":
        return Network([DenseLayer(l.weights, l.bias, l.activation) for l in self.layers])

    def to_dict(self) -> Dict:
        return {"layers": [layer.to_dict() for layer in self.layers]}

    @classmethod
    def from_dict(cls, data: Dict) -> "Network":
        return cls([DenseLayer.from_dict(d) for d in data["layers"]])


def backward(network: Network, input: np.ndarray, loss_gradient: np.ndarray) -> Gradients:
    """
    Gradientes de todos os parâmetros de `network` para a entrada `input`.

    Exige que o forward mais recente da rede tenha sido feito com a mesma entrada.
    """
    cache = network._cache
    if cache is None or not np.array_equal(cache.input, np.asarray(input, dtype=np.float64)):
        raise KernelError("backward sem forward em cache para esta entrada")
    return network.backward(loss_gradient)
