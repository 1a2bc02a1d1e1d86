"""
Cliente opcional para baixar CSVs OHLCV, com cache em disco.

O cache fica em `<cache>/<símbolo>/<início>_<fim>.csv`; a pasta padrão é
`cache/` e pode ser trocada pela variável SENTIGAN_CACHE_DIR.
"""
import asyncio
import io
import logging
import os
from datetime import date
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import aiohttp
from tenacity import (retry, retry_if_exception_type, stop_after_attempt,
                      wait_exponential)

from src.data.ohlcv import load_ohlcv
from src.errors import FetchError

logger = logging.getLogger(__name__)

CACHE_ENV = "SENTIGAN_CACHE_DIR"
DEFAULT_CACHE_DIR = "cache"
REQUEST_TIMEOUT = 30


class TransientFetchError(FetchError):
    """Falha que vale a pena tentar de novo (5xx, conexão, timeout)."""


def cache_dir(override: Optional[Union[str, Path]] = None) -> Path:
    if override:
        return Path(override)
    return Path(os.environ.get(CACHE_ENV) or DEFAULT_CACHE_DIR)


def cache_path(symbol: str, start: date, end: date,
               directory: Optional[Union[str, Path]] = None) -> Path:
    return cache_dir(directory) / symbol / f"{start.isoformat()}_{end.isoformat()}.csv"


def build_url(endpoint: str, symbol: str, start: date, end: date) -> str:
    """Preenche o template com {symbol}, {start} e {end}."""
    return endpoint.format(symbol=symbol, start=start.isoformat(), end=end.isoformat())


@retry(stop=stop_after_attempt(3), wait=wait_exponential(multiplier=1, min=4, max=10),
       retry=retry_if_exception_type(TransientFetchError), reraise=True)
async def _download(session: aiohttp.ClientSession, url: str) -> str:
    try:
        async with session.get(url, timeout=aiohttp.ClientTimeout(total=REQUEST_TIMEOUT)) as response:
            if response.status >= 500:
                raise TransientFetchError("Erro do servidor ao buscar preços", status=response.status, url=url)
            if response.status >= 400:
                raise FetchError("Requisição de preços recusada", status=response.status, url=url)
            return await response.text()
    except (aiohttp.ClientConnectionError, asyncio.TimeoutError) as e:
        raise TransientFetchError(f"Falha de conexão: {e}", url=url)


async def fetch_ohlcv(endpoint: str, symbol: str, start: date, end: date,
                      session: Optional[aiohttp.ClientSession] = None,
                      directory: Optional[Union[str, Path]] = None) -> str:
    """
    Baixa o CSV de preços de um ativo, usando o cache quando possível.

    Args:
        endpoint: Template de URL com {symbol}, {start} e {end}
        symbol: Ativo
        start: Data inicial
        end: Data final
        session: Sessão aiohttp existente (opcional)
        directory: Pasta de cache (sobrepõe SENTIGAN_CACHE_DIR)

    Returns:
        Texto CSV compatível com load_ohlcv

    Raises:
        FetchError: Falha HTTP ou de rede (com status e URL)
    """
    path = cache_path(symbol, start, end, directory)
    if path.exists():
        logger.debug(f"Cache de preços encontrado: {path}")
        return path.read_text(encoding='utf-8')

    url = build_url(endpoint, symbol, start, end)
    logger.info(f"Baixando preços de {symbol}: {url}")
    if session is None:
        async with aiohttp.ClientSession() as own_session:
            text = await _download(own_session, url)
    else:
        text = await _download(session, url)

    # só entra no cache o que passa pela validação
    load_ohlcv(io.StringIO(text), symbol)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix('.csv.tmp')
    tmp.write_text(text, encoding='utf-8')
    os.replace(tmp, path)
    return text


async def fetch_all(endpoint: str, requests: Sequence[Tuple[str, date, date]],
                    directory: Optional[Union[str, Path]] = None) -> Dict[str, str]:
    """Baixa vários ativos em paralelo numa única sessão."""
    async with aiohttp.ClientSession() as session:
        tasks = [fetch_ohlcv(endpoint, sym, start, end, session, directory)
                 for sym, start, end in requests]
        results: List[str] = await asyncio.gather(*tasks)
    return {sym: text for (sym, _, _), text in zip(requests, results)}
