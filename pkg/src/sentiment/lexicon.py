"""
Carregamento do léxico de valências e das tabelas de regras do motor de sentimento.
"""
import io
import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from types import MappingProxyType
from typing import Iterable, Mapping, Optional, TextIO, Union

import yaml

from src.errors import ConfigError, DataError

logger = logging.getLogger(__name__)

RULES_PATH = Path(__file__).resolve().parent.parent / "config" / "sentiment_rules.yaml"


@dataclass(frozen=True)
class RuleConstants:
    """Constantes das regras (valores do VADER canônico)."""

    booster_increment: float = 0.293
    booster_decrement: float = -0.293
    caps_increment: float = 0.733
    negation_scalar: float = -0.74
    exclamation_increment: float = 0.292
    max_exclamations: int = 3
    question_increment: float = 0.18
    question_cap: float = 0.96
    but_before: float = 0.5
    but_after: float = 1.5
    normalization_alpha: float = 15.0


@dataclass(frozen=True)
class RuleTables:
    constants: RuleConstants
    boosters: Mapping[str, float]
    negations: frozenset


@lru_cache(maxsize=8)
def load_rules(path: Optional[Path] = None) -> RuleTables:
    """
    Lê as tabelas de boosters, negações e constantes do YAML de regras.

    Args:
        path: Caminho alternativo; por padrão src/config/sentiment_rules.yaml

    Returns:
        RuleTables imutável
    """
    path = Path(path) if path else RULES_PATH
    try:
        with open(path, 'r', encoding='utf-8') as f:
            raw = yaml.safe_load(f) or {}
    except (OSError, yaml.YAMLError) as e:
        raise ConfigError(f"Não foi possível ler as regras de sentimento: {e}", path=str(path))

    try:
        constants = RuleConstants(**raw.get('constants', {}))
    except TypeError as e:
        raise ConfigError(f"Constante de regra desconhecida: {e}", path=str(path))

    boosters = {}
    for word in raw.get('boosters', {}).get('increment', []):
        boosters[word.lower()] = constants.booster_increment
    for word in raw.get('boosters', {}).get('decrement', []):
        boosters[word.lower()] = constants.booster_decrement
    negations = frozenset(w.lower() for w in raw.get('negations', []))
    return RuleTables(constants, MappingProxyType(boosters), negations)


@dataclass(frozen=True)
class Lexicon:
    """
    Léxico imutável: token -> valência média, mais as tabelas de regras.

    Tokens são armazenados em minúsculas.
    """

    entries: Mapping[str, float]
    boosters: Mapping[str, float]
    negations: frozenset
    constants: RuleConstants = field(default_factory=RuleConstants)
    malformed_lines: int = 0
    duplicate_tokens: int = 0

    def __contains__(self, token: str) -> bool:
        return token in self.entries

    def __len__(self) -> int:
        return len(self.entries)

    def valence(self, token: str) -> float:
        return self.entries[token]


def _iter_lines(source: Union[str, Path, TextIO, Iterable[str]]) -> Iterable[str]:
    if isinstance(source, (str, Path)):
        try:
            with open(source, 'r', encoding='utf-8') as f:
                return f.read().splitlines()
        except OSError as e:
            raise DataError(f"Não foi possível ler o léxico: {e}", path=str(source))
    if isinstance(source, io.IOBase) or hasattr(source, 'read'):
        return source.read().splitlines()
    return list(source)


def load_lexicon(source: Union[str, Path, TextIO, Iterable[str]],
                 rules: Optional[RuleTables] = None) -> Lexicon:
    """
    Carrega um léxico no formato do VADER: token<TAB>valência[<TAB>extras].

    Linhas malformadas são ignoradas e contadas; tokens repetidos mantêm a
    última valência e também são contados.

    Args:
        source: Caminho do arquivo, stream de texto ou iterável de linhas
        rules: Tabelas de regras; por padrão as do YAML do projeto

    Returns:
        Lexicon

    Raises:
        DataError: Se a fonte estiver vazia ou não tiver nenhuma entrada válida
    """
    rules = rules or load_rules()
    lines = _iter_lines(source)

    entries = {}
    malformed = 0
    duplicates = 0
    for lineno, line in enumerate(lines, start=1):
        line = line.rstrip('\r\n')
        if not line.strip():
            continue
        parts = line.strip().split('\t')
        if len(parts) < 2 or not parts[0]:
            malformed += 1
            logger.debug(f"Linha {lineno} do léxico malformada: {line!r}")
            continue
        try:
            value = float(parts[1])
        except ValueError:
            malformed += 1
            logger.debug(f"Linha {lineno} do léxico com valência inválida: {line!r}")
            continue
        if not math.isfinite(value):
            malformed += 1
            continue
        token = parts[0].lower()
        if token in entries:
            duplicates += 1
        entries[token] = value

    if not entries:
        raise DataError("Léxico vazio ou sem nenhuma entrada válida", field="lexicon")
    if malformed:
        logger.warning(f"{malformed} linhas malformadas ignoradas no léxico")
    if duplicates:
        logger.warning(f"{duplicates} tokens repetidos no léxico (vale a última ocorrência)")

    logger.info(f"Léxico carregado com {len(entries)} entradas")
    return Lexicon(
        entries=MappingProxyType(entries),
        boosters=rules.boosters,
        negations=rules.negations,
        constants=rules.constants,
        malformed_lines=malformed,
        duplicate_tokens=duplicates,
    )
