"""
Configuração de execução: run.yaml padrão mesclado com o arquivo do usuário.
"""
import copy
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import yaml
from dotenv import load_dotenv

from src.data.windows import SENTIMENT_MODES, SPLIT_POLICIES
from src.errors import ConfigError

load_dotenv()

logger = logging.getLogger(__name__)

DEFAULTS_PATH = Path(__file__).parent / 'config' / 'run.yaml'
LOG_LEVEL_ENV = "SENTIGAN_LOG_LEVEL"
MODELS = ("arima", "lstm", "gan")


@dataclass(frozen=True)
class AssetConfig:
    symbol: str
    prices: Optional[Path] = None
    tweets: Optional[Path] = None


@dataclass
class RunConfig:
    seed: int
    assets: List[AssetConfig]
    output_dir: Path
    lexicon: Optional[Path] = None
    window_length: int = 20
    sentiment_mode: str = "last"
    workers: int = 4
    splits: Dict[str, str] = field(default_factory=dict)
    arima: Dict[str, Any] = field(default_factory=dict)
    lstm: Dict[str, Any] = field(default_factory=dict)
    gan: Dict[str, Any] = field(default_factory=dict)
    fetch: Dict[str, Any] = field(default_factory=dict)
    source: Optional[Path] = None

    def asset(self, symbol: str) -> AssetConfig:
        for asset in self.assets:
            if asset.symbol == symbol:
                return asset
        raise ConfigError(f"Ativo '{symbol}' não está na configuração",
                          known=[a.symbol for a in self.assets])

    def symbols(self, only: Optional[str] = None) -> List[str]:
        if only:
            return [self.asset(only).symbol]
        return [a.symbol for a in self.assets]


def deep_merge(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    """Mescla recursivamente `override` sobre `base` sem alterar nenhum dos dois."""
    merged = copy.deepcopy(base)
    for key, value in (override or {}).items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = deep_merge(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def _read_yaml(path: Path) -> Dict[str, Any]:
    try:
        with open(path, 'r', encoding='utf-8') as f:
            data = yaml.safe_load(f) or {}
    except OSError as e:
        raise ConfigError(f"Não foi possível ler {path}: {e}", path=str(path))
    except yaml.YAMLError as e:
        raise ConfigError(f"YAML inválido em {path}: {e}", path=str(path))
    if not isinstance(data, dict):
        raise ConfigError(f"{path} deve conter um mapeamento", path=str(path))
    return data


def _resolve(base: Path, value: Optional[str]) -> Optional[Path]:
    if value in (None, ""):
        return None
    path = Path(value)
    return path if path.is_absolute() else base / path


def load_config(path: Optional[Union[str, Path]] = None, seed: Optional[int] = None) -> RunConfig:
    """
    Carrega e valida a configuração.

    Caminhos relativos são resolvidos a partir da pasta do arquivo do usuário.

    Args:
        path: Arquivo YAML do usuário (opcional)
        seed: Semente que sobrescreve a do arquivo

    Returns:
        RunConfig validado

    Raises:
        ConfigError: Semente ausente, caminho inexistente ou valor inválido
    """
    raw = _read_yaml(DEFAULTS_PATH)
    base = Path.cwd()
    if path is not None:
        path = Path(path)
        raw = deep_merge(raw, _read_yaml(path))
        base = path.resolve().parent
    if seed is not None:
        raw['seed'] = seed

    if raw.get('seed') is None:
        raise ConfigError("Semente obrigatória: defina 'seed' ou use --seed")
    if isinstance(raw['seed'], bool) or not isinstance(raw['seed'], int):
        raise ConfigError("Semente deve ser um inteiro", seed=raw['seed'])

    assets = []
    for entry in raw.get('assets') or []:
        if not isinstance(entry, dict) or not entry.get('symbol'):
            raise ConfigError("Cada ativo precisa de 'symbol'", entry=entry)
        assets.append(AssetConfig(str(entry['symbol']).upper(),
                                  _resolve(base, entry.get('prices')),
                                  _resolve(base, entry.get('tweets'))))
    if len({a.symbol for a in assets}) != len(assets):
        raise ConfigError("Ativos repetidos na configuração")

    config = RunConfig(
        seed=raw['seed'],
        assets=assets,
        output_dir=_resolve(base, raw.get('output_dir') or 'output'),
        lexicon=_resolve(base, raw.get('lexicon')),
        window_length=int(raw.get('window_length', 20)),
        sentiment_mode=raw.get('sentiment_mode', 'last'),
        workers=int(raw.get('workers', 4)),
        splits=dict(raw.get('splits') or {}),
        arima=dict(raw.get('arima') or {}),
        lstm=dict(raw.get('lstm') or {}),
        gan=dict(raw.get('gan') or {}),
        fetch=dict(raw.get('fetch') or {}),
        source=path,
    )
    validate_config(config)
    return config


def validate_config(config: RunConfig) -> None:
    if config.window_length < 1:
        raise ConfigError("window_length deve ser >= 1", window_length=config.window_length)
    if config.workers < 1:
        raise ConfigError("workers deve ser >= 1", workers=config.workers)
    if config.sentiment_mode not in SENTIMENT_MODES:
        raise ConfigError(f"sentiment_mode desconhecido '{config.sentiment_mode}'",
                          expected=SENTIMENT_MODES)
    for model in MODELS:
        policy = config.splits.get(model)
        if policy not in SPLIT_POLICIES:
            raise ConfigError(f"Política de partição inválida para {model}: {policy}",
                              expected=sorted(SPLIT_POLICIES))
    if config.lexicon is not None and not config.lexicon.exists():
        raise ConfigError(f"Léxico não encontrado: {config.lexicon}", path=str(config.lexicon))
    for asset in config.assets:
        if asset.prices is None:
            if not config.fetch.get('endpoint'):
                raise ConfigError(f"{asset.symbol}: sem arquivo de preços e sem fetch.endpoint",
                                  symbol=asset.symbol)
        elif not asset.prices.exists():
            raise ConfigError(f"{asset.symbol}: arquivo de preços não encontrado: {asset.prices}",
                              symbol=asset.symbol, path=str(asset.prices))
        if asset.tweets is not None and not asset.tweets.exists():
            logger.warning(f"{asset.symbol}: arquivo de tweets ausente ({asset.tweets}); sentimento neutro")


def log_level(verbose: bool = False) -> int:
    """Nível de log: --verbose vence; senão SENTIGAN_LOG_LEVEL; senão WARNING."""
    if verbose:
        return logging.DEBUG
    name = os.getenv(LOG_LEVEL_ENV, "WARNING").upper()
    level = logging.getLevelName(name)
    return level if isinstance(level, int) else logging.WARNING
