"""
Hierarquia de exceções do projeto.

Cada exceção carrega campos estruturados (campo, data, linha, etc.) e um
código de saída usado pela CLI.
"""
from typing import Any, Optional

EXIT_OK = 0
EXIT_DATA = 2
EXIT_USAGE = 64
EXIT_INTERNAL = 70


class SentiganError(Exception):
    """Erro base do projeto."""

    exit_code = EXIT_INTERNAL

    def __init__(self, message: str, **context: Any):
        super().__init__(message)
        self.message = message
        self.context = {k: v for k, v in context.items() if v is not None}

    def __str__(self) -> str:
        if not self.context:
            return self.message
        details = ", ".join(f"{k}={v}" for k, v in self.context.items())
        return f"{self.message} ({details})"


class DataError(SentiganError):
    """Dados de entrada inválidos (CSV malformado, invariante violado, etc.)."""

    exit_code = EXIT_DATA

    def __init__(self, message: str, field: Optional[str] = None, date: Any = None,
                 line: Optional[int] = None, **context: Any):
        super().__init__(message, field=field, date=date, line=line, **context)
        self.field = field
        self.date = date
        self.line = line


class ScaleError(DataError):
    """Entrada fora da escala esperada pela rede."""


class PartitionError(DataError):
    """Partição de treino/teste vazia, fora de ordem ou incompatível."""


class CausalityError(DataError):
    """Uma previsão usou dados posteriores ao seu instante t."""


class FetchError(SentiganError):
    """Falha ao buscar dados remotos."""

    exit_code = EXIT_DATA

    def __init__(self, message: str, status: Optional[int] = None, url: Optional[str] = None):
        super().__init__(message, status=status, url=url)
        self.status = status
        self.url = url


class ConfigError(SentiganError):
    """Configuração inválida."""

    exit_code = EXIT_USAGE


class UsageError(SentiganError):
    """Uso incorreto da CLI (modelo desconhecido, artefato ausente, etc.)."""

    exit_code = EXIT_USAGE


class KernelError(SentiganError):
    """Erro do núcleo numérico: dimensões inconsistentes ou uso fora de ordem."""

    def __init__(self, message: str, expected: Any = None, actual: Any = None, **context: Any):
        super().__init__(message, expected=expected, actual=actual, **context)
        self.expected = expected
        self.actual = actual


class TrainingError(SentiganError):
    """Treinamento divergiu ou recebeu gradiente não finito."""

    def __init__(self, message: str, epoch: Optional[int] = None, step: Optional[int] = None,
                 parameter_index: Optional[int] = None, **context: Any):
        super().__init__(message, epoch=epoch, step=step,
                         parameter_index=parameter_index, **context)
        self.epoch = epoch
        self.step = step
        self.parameter_index = parameter_index


class ModelError(SentiganError):
    """Falha de ajuste ou seleção de ordem de um modelo estatístico."""

    def __init__(self, message: str, gradient_norm: Optional[float] = None, **context: Any):
        super().__init__(message, gradient_norm=gradient_norm, **context)
        self.gradient_norm = gradient_norm
