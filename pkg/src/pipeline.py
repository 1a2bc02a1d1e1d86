"""
Orquestração por ativo: ingestão, sentimento, treino, avaliação e gráficos.

O trabalho de cada ativo roda em paralelo num pool limitado (`workers`); a
semente de cada ativo independe da ordem de execução.
"""
import asyncio
import io
import logging
from datetime import date
from typing import Callable, Dict, List, Optional, Sequence, Tuple, TypeVar

import numpy as np
import typer

from src.data.align import AlignedDataset, align, dump_aligned, load_aligned
from src.data.fetch import fetch_all
from src.data.ohlcv import load_ohlcv, repair_log_lines, repair_missing
from src.data.windows import HOLDOUT_SIZE
from src.errors import ConfigError, SentiganError, UsageError
from src.evaluation.aggregate import AggregateReport, aggregate, aggregate_from_metrics, render_summary
from src.evaluation.audit import audit_reports
from src.evaluation.metrics import metrics, persistence_forecast
from src.evaluation.plot import plot_csv, render_svg
from src.evaluation.report import ForecastReport, evaluate
from src.models.registry import ModelArtifact, check_model, train_model
from src.sentiment.daily import aggregate_daily, daily_to_frame, load_tweets
from src.sentiment.lexicon import Lexicon, load_lexicon
from src.settings import MODELS, AssetConfig, RunConfig
from src.storage_utils import OutputLayout, ensure_data_dirs, load_json, save_frame, save_json, write_text

logger = logging.getLogger(__name__)

T = TypeVar("T")


async def _bounded(workers: int, jobs: Sequence[Callable[[], T]]) -> List[T]:
    """Executa funções bloqueantes em threads, no máximo `workers` por vez, preservando a ordem."""
    semaphore = asyncio.Semaphore(workers)

    async def run(job: Callable[[], T]) -> T:
        async with semaphore:
            return await asyncio.to_thread(job)

    return await asyncio.gather(*(run(job) for job in jobs))


def resolve_models(model: str) -> List[str]:
    if model == "all":
        return list(MODELS)
    return [check_model(model)]


def _lexicon(config: RunConfig) -> Optional[Lexicon]:
    if config.lexicon is None:
        return None
    return load_lexicon(config.lexicon)


def _prices_text(asset: AssetConfig, fetched: Dict[str, str]) -> str:
    if asset.symbol in fetched:
        return fetched[asset.symbol]
    return asset.prices.read_text(encoding='utf-8')


async def _fetch_missing(config: RunConfig, assets: Sequence[AssetConfig]) -> Dict[str, str]:
    pending = [a for a in assets if a.prices is None]
    if not pending:
        return {}
    fetch = config.fetch
    if not (fetch.get('start') and fetch.get('end')):
        raise ConfigError("fetch.start e fetch.end são obrigatórios para baixar preços")
    start, end = date.fromisoformat(str(fetch['start'])), date.fromisoformat(str(fetch['end']))
    typer.echo(f"🌐 Baixando preços de {len(pending)} ativos...")
    return await fetch_all(fetch['endpoint'], [(a.symbol, start, end) for a in pending])


def ingest_asset(config: RunConfig, asset: AssetConfig, lexicon: Optional[Lexicon],
                 layout: OutputLayout, prices: str) -> AlignedDataset:
    """Valida, repara e alinha um ativo; grava dataset, reparos e sentimento diário."""
    try:
        series = load_ohlcv(io.StringIO(prices), asset.symbol)
        series, repairs = repair_missing(series)
        daily = daily_sentiment(config, asset, lexicon, series.dates)
        aligned = align(series, daily)
    except SentiganError as e:
        e.context.setdefault('asset', asset.symbol)
        raise
    write_text(layout.dataset_path(asset.symbol), dump_aligned(aligned))
    write_text(layout.repairs_path(asset.symbol), repair_log_lines(repairs))
    save_frame(layout.sentiment_path(asset.symbol), daily_to_frame(daily))
    return aligned


def daily_sentiment(config: RunConfig, asset: AssetConfig, lexicon: Optional[Lexicon],
                    trading_days: Sequence[date]):
    if asset.tweets is None or not asset.tweets.exists():
        logger.warning(f"{asset.symbol}: sem posts; sentimento neutro em todos os pregões")
        return aggregate_daily([], trading_days)
    if lexicon is None:
        raise ConfigError(f"{asset.symbol}: há posts mas nenhum léxico configurado", symbol=asset.symbol)
    return aggregate_daily(load_tweets(asset.tweets, lexicon), trading_days)


async def run_ingest(config: RunConfig, only: Optional[str] = None) -> Dict[str, AlignedDataset]:
    assets = [config.asset(s) for s in config.symbols(only)]
    layout = ensure_data_dirs(config.output_dir)
    fetched = await _fetch_missing(config, assets)
    lexicon = _lexicon(config)
    typer.echo(f"\n📥 Ingerindo {len(assets)} ativos...")
    jobs = [lambda a=a: ingest_asset(config, a, lexicon, layout, _prices_text(a, fetched)) for a in assets]
    datasets = await _bounded(config.workers, jobs)
    for aligned in datasets:
        typer.echo(f"   ✓ {aligned.symbol}: {len(aligned)} pregões")
    return {d.symbol: d for d in datasets}


async def run_sentiment(config: RunConfig, only: Optional[str] = None) -> Dict[str, int]:
    """Pontua os posts de cada ativo em sentimento diário sobre os pregões do arquivo de preços."""
    assets = [config.asset(s) for s in config.symbols(only)]
    layout = ensure_data_dirs(config.output_dir)
    fetched = await _fetch_missing(config, assets)
    lexicon = _lexicon(config)

    def job(asset: AssetConfig) -> int:
        series = load_ohlcv(io.StringIO(_prices_text(asset, fetched)), asset.symbol)
        daily = daily_sentiment(config, asset, lexicon, series.dates)
        save_frame(layout.sentiment_path(asset.symbol), daily_to_frame(daily))
        return sum(d.sample_count for d in daily)

    typer.echo(f"\n💬 Pontuando sentimento de {len(assets)} ativos...")
    counts = await _bounded(config.workers, [lambda a=a: job(a) for a in assets])
    for asset, count in zip(assets, counts):
        typer.echo(f"   ✓ {asset.symbol}: {count} posts")
    return {a.symbol: c for a, c in zip(assets, counts)}


def load_dataset(layout: OutputLayout, symbol: str) -> AlignedDataset:
    path = layout.dataset_path(symbol)
    if not path.exists():
        raise UsageError(f"Dataset de {symbol} ausente; execute 'ingest' antes", path=str(path))
    return load_aligned(path, symbol)


def load_artifact(layout: OutputLayout, symbol: str, model: str) -> ModelArtifact:
    return ModelArtifact.from_dict(load_json(layout.artifact_path(symbol, model), f"Artefato {symbol}/{model}"))


def load_report(layout: OutputLayout, symbol: str, model: str) -> ForecastReport:
    return ForecastReport.from_dict(load_json(layout.report_path(symbol, model), f"Relatório {symbol}/{model}"))


def train_cell(config: RunConfig, layout: OutputLayout, aligned: AlignedDataset, model: str) -> ModelArtifact:
    try:
        artifact, log = train_model(model, aligned, config)
    except SentiganError as e:
        e.context.setdefault('asset', aligned.symbol)
        e.context.setdefault('model', model)
        raise
    save_json(layout.artifact_path(aligned.symbol, model), artifact.to_dict())
    save_frame(layout.training_log_path(aligned.symbol, model), log)
    return artifact


async def run_train(config: RunConfig, model: str = "all", only: Optional[str] = None) -> List[ModelArtifact]:
    models = resolve_models(model)
    layout = ensure_data_dirs(config.output_dir)
    datasets = {s: load_dataset(layout, s) for s in config.symbols(only)}
    cells = [(s, m) for s in datasets for m in models]
    typer.echo(f"\n🧠 Treinando {len(cells)} modelos ({', '.join(models)})...")
    jobs = [lambda s=s, m=m: train_cell(config, layout, datasets[s], m) for s, m in cells]
    artifacts = await _bounded(config.workers, jobs)
    for artifact in artifacts:
        typer.echo(f"   ✓ {artifact.symbol}/{artifact.model}")
    return artifacts


def persistence_rmse(aligned: AlignedDataset, n: int = HOLDOUT_SIZE) -> float:
    """RMSE da previsão ingênua nos `n` pregões finais."""
    targets = np.arange(len(aligned) - n, len(aligned))
    return metrics(persistence_forecast(aligned.close, targets), aligned.close[targets]).rmse


def evaluate_cell(layout: OutputLayout, aligned: AlignedDataset, model: str) -> ForecastReport:
    artifact = load_artifact(layout, aligned.symbol, model)
    try:
        report = evaluate(artifact, aligned)
    except SentiganError as e:
        e.context.setdefault('asset', aligned.symbol)
        e.context.setdefault('model', model)
        raise
    save_json(layout.report_path(aligned.symbol, model), report.to_dict())
    return report


def write_aggregate(layout: OutputLayout, result: AggregateReport, summary: str) -> None:
    save_frame(layout.aggregate_path, result.to_frame())
    write_text(layout.summary_path, summary)


async def run_evaluate(config: RunConfig, model: str = "all",
                       only: Optional[str] = None) -> Tuple[List[ForecastReport], AggregateReport]:
    models = resolve_models(model)
    layout = ensure_data_dirs(config.output_dir)
    datasets = {s: load_dataset(layout, s) for s in config.symbols(only)}
    cells = [(s, m) for s in datasets for m in models]
    typer.echo(f"\n📊 Avaliando {len(cells)} modelos...")
    jobs = [lambda s=s, m=m: evaluate_cell(layout, datasets[s], m) for s, m in cells]
    reports = await _bounded(config.workers, jobs)

    audit_reports(reports, datasets)
    result = aggregate(reports)
    baseline = {s: persistence_rmse(d) for s, d in datasets.items() if len(d) > HOLDOUT_SIZE}
    summary = render_summary(result, reports, baseline)
    write_aggregate(layout, result, summary)
    typer.echo(summary)
    typer.echo(f"✓ Relatórios salvos em {layout.reports}")
    return reports, result


def evaluate_from_metrics(output_dir, source) -> AggregateReport:
    """Agrega uma tabela de RMSE externa e grava aggregate.csv e summary.txt."""
    layout = ensure_data_dirs(output_dir)
    result = aggregate_from_metrics(source)
    summary = render_summary(result)
    write_aggregate(layout, result, summary)
    typer.echo(summary)
    return result


def plot_cell(layout: OutputLayout, symbol: str, model: str) -> Tuple[str, str]:
    report = load_report(layout, symbol, model)
    svg_path, csv_path = layout.plot_paths(symbol, model)
    return write_text(svg_path, render_svg(report)), write_text(csv_path, plot_csv(report))


async def run_plot(config: RunConfig, model: str = "all", only: Optional[str] = None) -> List[Tuple[str, str]]:
    models = resolve_models(model)
    layout = ensure_data_dirs(config.output_dir)
    cells = [(s, m) for s in config.symbols(only) for m in models]
    typer.echo(f"\n📈 Gerando {len(cells)} gráficos...")
    return await _bounded(config.workers, [lambda s=s, m=m: plot_cell(layout, s, m) for s, m in cells])


async def run_all(config: RunConfig, model: str = "all",
                  only: Optional[str] = None) -> Tuple[List[ForecastReport], AggregateReport]:
    """Pipeline completo: ingest -> train -> evaluate -> plot."""
    await run_ingest(config, only)
    await run_train(config, model, only)
    reports, result = await run_evaluate(config, model, only)
    await run_plot(config, model, only)
    return reports, result
