"""
Janelas deslizantes (X_t, s_t, x_{t+1}) e partições temporais de treino e teste.
"""
import logging
from dataclasses import dataclass
from datetime import date
from typing import List, Sequence, Union

import numpy as np

from src.data.align import AlignedDataset
from src.errors import CausalityError, DataError, PartitionError

logger = logging.getLogger(__name__)

SENTIMENT_MODES = ("last", "mean")
HOLDOUT_SIZE = 20
# (numerador, denominador) para evitar erro de ponto flutuante em floor(f * T)
SPLIT_POLICIES = {
    "fraction_90_10": (9, 10),
    "fraction_70_30": (7, 10),
    "holdout_last_20": None,
}


@dataclass(frozen=True, eq=False)
class WindowSample:
    """Amostra supervisionada: L pregões de histórico, sentimento de t e o pregão t+1."""

    history: np.ndarray
    sentiment: float
    target: np.ndarray
    target_date: date
    context_end: date
    index: int = 0

    @property
    def window_length(self) -> int:
        return self.history.shape[0]


def make_windows(aligned: AlignedDataset, L: int, sentiment_mode: str = "last") -> List[WindowSample]:
    """
    Gera as T - L janelas com passo 1.

    A amostra i usa as linhas [i, i+L) como histórico, a linha i+L como alvo
    e o sentimento do dia t = i+L-1 (ou a média da janela no modo "mean").

    Args:
        aligned: Dataset alinhado
        L: Tamanho da janela
        sentiment_mode: "last" (padrão) ou "mean"

    Returns:
        Lista de WindowSample em ordem cronológica

    Raises:
        DataError: Se T < L + 1
    """
    if sentiment_mode not in SENTIMENT_MODES:
        raise DataError(f"Modo de sentimento desconhecido '{sentiment_mode}'", field="sentiment_mode")
    if L < 1:
        raise DataError("Janela deve ter pelo menos 1 pregão", field="window_length", value=L)
    T_rows = len(aligned)
    if T_rows < L + 1:
        raise DataError(f"São necessários pelo menos {L + 1} pregões para janelas de {L}",
                        field="window_length", rows=T_rows, required=L + 1)

    samples = []
    for i in range(T_rows - L):
        t = i + L - 1
        if sentiment_mode == "last":
            s = float(aligned.sentiment[t])
        else:
            s = float(np.mean(aligned.sentiment[i:i + L]))
        samples.append(WindowSample(
            history=aligned.features[i:i + L],
            sentiment=s,
            target=aligned.features[i + L],
            target_date=aligned.dates[i + L],
            context_end=aligned.dates[t],
            index=i,
        ))
    return samples


@dataclass(frozen=True)
class SplitSpec:
    policy: str
    boundary: int

    @classmethod
    def for_count(cls, policy: str, count: int) -> "SplitSpec":
        """
        Calcula o índice de corte para `count` itens.

        fraction_90_10 -> floor(0.9 T); fraction_70_30 -> floor(0.7 T);
        holdout_last_20 -> T - 20.
        """
        if policy not in SPLIT_POLICIES:
            raise PartitionError(f"Política de partição desconhecida '{policy}'",
                                 field="policy", expected=sorted(SPLIT_POLICIES))
        ratio = SPLIT_POLICIES[policy]
        boundary = count - HOLDOUT_SIZE if ratio is None else count * ratio[0] // ratio[1]
        if boundary <= 0 or boundary >= count:
            raise PartitionError("Partição de treino ou teste ficaria vazia",
                                 field="policy", policy=policy, count=count, boundary=boundary)
        return cls(policy, boundary)

    def to_dict(self) -> dict:
        return {"policy": self.policy, "boundary": self.boundary}


def _item_date(item) -> date:
    return item.target_date if isinstance(item, WindowSample) else item


def split(data: Union[AlignedDataset, Sequence[WindowSample]], policy: Union[str, SplitSpec]):
    """
    Separa treino e teste sem embaralhar.

    Args:
        data: AlignedDataset (corte por linha) ou lista de janelas (corte por data-alvo)
        policy: Nome da política ou SplitSpec já calculado

    Returns:
        (treino, teste) do mesmo tipo da entrada

    Raises:
        PartitionError: Dados fora de ordem ou partição vazia
    """
    if isinstance(data, AlignedDataset):
        keys = list(data.dates)
    else:
        keys = [_item_date(w) for w in data]
    if any(b <= a for a, b in zip(keys, keys[1:])):
        raise PartitionError("Dados fora de ordem cronológica; não há embaralhamento permitido",
                             field="date")

    spec = policy if isinstance(policy, SplitSpec) else SplitSpec.for_count(policy, len(keys))
    if not 0 < spec.boundary < len(keys):
        raise PartitionError("Corte fora do intervalo dos dados", field="boundary",
                             boundary=spec.boundary, count=len(keys))

    if isinstance(data, AlignedDataset):
        return data.rows(0, spec.boundary), data.rows(spec.boundary, len(data))
    items = list(data)
    return items[:spec.boundary], items[spec.boundary:]


def check_causality(train: Sequence[WindowSample], test: Sequence[WindowSample]) -> None:
    """
    Confere que nenhuma informação do teste vaza para o treino.

    Todo alvo e contexto de treino precede o primeiro alvo de teste, e cada
    janela termina antes do próprio alvo.
    """
    for sample in list(train) + list(test):
        if sample.context_end >= sample.target_date:
            raise CausalityError("Janela termina depois do alvo", field="context_end",
                                 date=sample.target_date.isoformat())
    if train and test:
        first_test = min(s.target_date for s in test)
        last_train = max(s.target_date for s in train)
        if last_train >= first_test:
            raise CausalityError("Alvo de treino não precede o teste", field="target_date",
                                 date=last_train.isoformat())
