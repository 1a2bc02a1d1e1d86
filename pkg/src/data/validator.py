"""
Módulo para validação de pregões (barras OHLCV) antes do uso.
"""
import math
from typing import Any, Dict, List, Sequence, Tuple

PRICE_FIELDS = ('open', 'high', 'low', 'close', 'adj_close')
FIELDS = PRICE_FIELDS + ('volume',)
HEADER = ('date',) + FIELDS


def _present(value: Any) -> bool:
    return value is not None and not (isinstance(value, float) and math.isnan(value))


class BarValidator:
    """Validador de barras diárias."""

    @staticmethod
    def check_fields(bar: Any) -> List[Tuple[str, str]]:
        """
        Confere os invariantes de uma barra.

        Campos ausentes (NaN) são ignorados aqui; o reparo cuida deles.

        Args:
            bar: Objeto com atributos open, high, low, close, adj_close, volume

        Returns:
            Lista de pares (campo, mensagem). Lista vazia significa barra válida.
        """
        errors = []
        values = {name: getattr(bar, name) for name in FIELDS}

        for name in FIELDS:
            value = values[name]
            if _present(value) and not math.isfinite(value):
                errors.append((name, f"Campo '{name}' não é finito"))

        # Preços positivos
        for name in PRICE_FIELDS:
            value = values[name]
            if _present(value) and math.isfinite(value) and value <= 0:
                errors.append((name, f"Campo '{name}' deve ser positivo"))

        # Volume não negativo
        volume = values['volume']
        if _present(volume) and volume < 0:
            errors.append(('volume', "Campo 'volume' não pode ser negativo"))

        low, high = values['low'], values['high']
        if _present(low) and _present(high):
            if low > high:
                errors.append(('high', "Campo 'high' menor que 'low'"))
            for name in ('open', 'close'):
                value = values[name]
                if _present(value) and not low <= value <= high:
                    errors.append((name, f"Campo '{name}' fora do intervalo [low, high]"))

        return errors

    @staticmethod
    def validate_item(bar: Any) -> List[str]:
        """Mensagens de erro de uma barra."""
        return [message for _, message in BarValidator.check_fields(bar)]

    @staticmethod
    def validate_items(bars: Sequence[Any]) -> Dict[int, List[str]]:
        """
        Valida uma lista de barras.

        Returns:
            Dicionário com índices das barras com erro e suas mensagens
        """
        errors = {}
        for i, bar in enumerate(bars):
            bar_errors = BarValidator.validate_item(bar)
            if bar_errors:
                errors[i] = bar_errors
        return errors

    @staticmethod
    def clean_row(row: Dict[str, Any]) -> Dict[str, Any]:
        """
        Normaliza uma linha crua do CSV.

        Remove espaços e converte nomes de coluna para minúsculas.
        """
        cleaned = {}
        for key, value in row.items():
            key = str(key).strip().lower()
            cleaned[key] = value.strip() if isinstance(value, str) else value
        return cleaned
