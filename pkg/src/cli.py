import asyncio
import logging
from pathlib import Path
from typing import Optional

import typer

try:  # typer >= 0.26 embute sua própria cópia do click
    from typer._click.exceptions import UsageError
except ImportError:
    from click import UsageError
from typer.core import TyperGroup

from src import pipeline
from src.data.synthetic import ASSETS, write_fixture
from src.errors import EXIT_INTERNAL, EXIT_USAGE, SentiganError
from src.settings import load_config, log_level


class UsageExitGroup(TyperGroup):
    """Grupo de comandos cujos erros de uso do click saem com 64, não 2."""

    def make_context(self, *args, **kwargs):
        try:
            return super().make_context(*args, **kwargs)
        except UsageError as e:
            e.exit_code = EXIT_USAGE
            raise

    def invoke(self, ctx):
        # subcomandos são analisados aqui
        try:
            return super().invoke(ctx)
        except UsageError as e:
            e.exit_code = EXIT_USAGE
            raise


app = typer.Typer(cls=UsageExitGroup, help="Previsão de preços com ARIMA, LSTM e GAN condicionado a sentimento.")
logger = logging.getLogger(__name__)

ConfigOption = typer.Option(None, "--config", "-c", help="Arquivo YAML da execução (mesclado sobre src/config/run.yaml)")
SeedOption = typer.Option(None, "--seed", help="Semente (sobrescreve a do arquivo)")
AssetOption = typer.Option(None, "--asset", "-a", help="Processa apenas este ativo")
ModelOption = typer.Option("all", "--model", "-m", help="arima, lstm, gan ou all")


@app.callback()
def main(verbose: bool = typer.Option(False, "--verbose", "-v", help="Log detalhado (DEBUG)")):
    logging.basicConfig(level=log_level(verbose), format="%(levelname)s %(name)s: %(message)s")


def _execute(command, *args):
    """Roda a corrotina do comando e traduz exceções em códigos de saída."""
    try:
        return asyncio.run(command(*args))
    except SentiganError as e:
        typer.echo(f"❌ {e}", err=True)
        raise typer.Exit(e.exit_code)
    except Exception as e:
        logger.exception("Erro interno")
        typer.echo(f"❌ Erro interno: {e}", err=True)
        raise typer.Exit(EXIT_INTERNAL)


def _config(config: Optional[Path], seed: Optional[int]):
    try:
        return load_config(config, seed)
    except SentiganError as e:
        typer.echo(f"❌ {e}", err=True)
        raise typer.Exit(e.exit_code)


@app.command()
def ingest(config: Optional[Path] = ConfigOption, seed: Optional[int] = SeedOption,
           asset: Optional[str] = AssetOption):
    """Valida, repara e alinha preços e sentimento de cada ativo."""
    _execute(pipeline.run_ingest, _config(config, seed), asset)


@app.command()
def sentiment(config: Optional[Path] = ConfigOption, seed: Optional[int] = SeedOption,
              asset: Optional[str] = AssetOption):
    """Pontua os posts e grava o sentimento diário por ativo."""
    _execute(pipeline.run_sentiment, _config(config, seed), asset)


@app.command()
def train(config: Optional[Path] = ConfigOption, seed: Optional[int] = SeedOption,
          asset: Optional[str] = AssetOption, model: str = ModelOption):
    """Treina os modelos sobre os datasets ingeridos."""
    _execute(pipeline.run_train, _config(config, seed), model, asset)


@app.command()
def evaluate(config: Optional[Path] = ConfigOption, seed: Optional[int] = SeedOption,
             asset: Optional[str] = AssetOption, model: str = ModelOption,
             from_metrics: Optional[Path] = typer.Option(
                 None, "--from-metrics", help="CSV asset,model,rmse[,mse] já calculado"),
             output: Path = typer.Option(Path("output"), "--output", "-o",
                                         help="Pasta de saída quando usado com --from-metrics")):
    """Gera relatórios por ativo e a tabela agregada."""
    if from_metrics is not None:
        async def aggregate_only():
            return pipeline.evaluate_from_metrics(output, from_metrics)
        _execute(aggregate_only)
        return
    _execute(pipeline.run_evaluate, _config(config, seed), model, asset)


@app.command()
def plot(config: Optional[Path] = ConfigOption, seed: Optional[int] = SeedOption,
         asset: Optional[str] = AssetOption, model: str = ModelOption):
    """Grava SVG e CSV de previsto x real a partir dos relatórios."""
    _execute(pipeline.run_plot, _config(config, seed), model, asset)


@app.command()
def run(config: Optional[Path] = ConfigOption, seed: Optional[int] = SeedOption,
        asset: Optional[str] = AssetOption, model: str = ModelOption):
    """Pipeline completo: ingest, train, evaluate e plot."""
    _execute(pipeline.run_all, _config(config, seed), model, asset)


@app.command()
def fixture(directory: Path = typer.Argument(..., help="Pasta de destino"),
            seed: int = typer.Option(0, "--seed"),
            days: int = typer.Option(260, "--days", help="Pregões por ativo")):
    """Gera um conjunto sintético de 7 ativos com posts, léxico e run.yaml."""
    path = write_fixture(directory, seed, days, ASSETS)
    typer.echo(f"✓ Fixture gravada; configuração em {path}")


if __name__ == "__main__":
    app()
