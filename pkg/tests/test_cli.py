"""
Testes de ponta a ponta da CLI sobre a fixture sintética.
"""
import json

import pandas as pd
import pytest
import yaml
from typer.testing import CliRunner

from src.cli import app
from src.data.synthetic import write_fixture

runner = CliRunner()

FAST = {
    "window_length": 5,
    "workers": 2,
    "lstm": {"hidden_size": 4, "batch_size": 8, "max_epochs": 2},
    "gan": {"batch_size": 10, "epochs": 1, "generator_hidden": [8], "discriminator_hidden": [8]},
}


def _small_run(directory, seed=3, output="output"):
    """Fixture de dois ativos com treino curto; devolve o caminho do run.yaml."""
    path = write_fixture(directory, seed, 120, ["AAA", "BBB"])
    with open(path, encoding="utf-8") as f:
        config = yaml.safe_load(f)
    config.update(FAST)
    config["output_dir"] = str(directory / output)
    path.write_text(yaml.safe_dump(config), encoding="utf-8")
    return path


def test_fixture_command(tmp_path):
    """Testa a geração da fixture de 7 ativos."""
    result = runner.invoke(app, ["fixture", str(tmp_path), "--seed", "1", "--days", "60"])
    assert result.exit_code == 0, result.output
    config = yaml.safe_load((tmp_path / "run.yaml").read_text(encoding="utf-8"))
    assert config["seed"] == 1
    assert len(config["assets"]) == 7
    assert len((tmp_path / "prices" / "AAPL.csv").read_text(encoding="utf-8").splitlines()) == 61


def test_run_writes_every_output(tmp_path):
    """Testa o pipeline completo: datasets, artefatos, relatórios, agregado e gráficos."""
    config = _small_run(tmp_path)
    result = runner.invoke(app, ["run", "--config", str(config)])
    assert result.exit_code == 0, result.output

    out = tmp_path / "output"
    for symbol in ("AAA", "BBB"):
        assert (out / "datasets" / f"{symbol}.csv").exists()
        assert (out / "datasets" / f"{symbol}.repairs.jsonl").exists()
        assert (out / "sentiment" / f"{symbol}.csv").exists()
        for model in ("arima", "lstm", "gan"):
            assert (out / "artifacts" / symbol / f"{model}.json").exists()
            assert (out / "artifacts" / symbol / f"{model}_log.csv").exists()
            report = json.loads((out / "reports" / symbol / f"{model}.json").read_text(encoding="utf-8"))
            assert report["rows"]
            assert (out / "plots" / f"{symbol}_{model}.svg").exists()
            assert (out / "plots" / f"{symbol}_{model}.csv").exists()

    aggregate = pd.read_csv(out / "reports" / "aggregate.csv")
    assert aggregate["model"].tolist() == ["arima", "lstm", "gan"]
    assert aggregate["wins"].sum() >= 2
    assert "Agregado" in (out / "reports" / "summary.txt").read_text(encoding="utf-8")


def test_rerun_is_byte_identical(tmp_path):
    """Testa que a mesma semente gera relatórios byte a byte iguais."""
    outputs = []
    for name in ("a", "b"):
        directory = tmp_path / name
        config = _small_run(directory)
        result = runner.invoke(app, ["run", "--config", str(config), "--asset", "AAA"])
        assert result.exit_code == 0, result.output
        outputs.append(directory / "output")
    first, second = outputs
    for relative in ("reports/aggregate.csv", "reports/AAA/lstm.json", "reports/AAA/gan.json",
                     "reports/AAA/arima.json", "artifacts/AAA/gan.json", "datasets/AAA.csv"):
        assert (first / relative).read_bytes() == (second / relative).read_bytes(), relative


def test_step_by_step_commands(tmp_path):
    """Testa ingest, sentiment, train, evaluate e plot em sequência para um modelo."""
    config = str(_small_run(tmp_path))
    for command in (["ingest"], ["sentiment"], ["train", "--model", "lstm"],
                    ["evaluate", "--model", "lstm"], ["plot", "--model", "lstm"]):
        result = runner.invoke(app, command + ["--config", config])
        assert result.exit_code == 0, (command, result.output)
    assert (tmp_path / "output" / "plots" / "BBB_lstm.svg").exists()
    assert not (tmp_path / "output" / "artifacts" / "AAA" / "gan.json").exists()


def test_unknown_model_exits_64(tmp_path):
    """Testa modelo desconhecido."""
    result = runner.invoke(app, ["train", "--config", str(_small_run(tmp_path)), "--model", "xgboost"])
    assert result.exit_code == 64


@pytest.mark.parametrize("args", [
    ["train", "--no-such-option"],
    ["train", "--seed", "abc"],
    ["forecast"],
])
def test_usage_errors_exit_64(args):
    """Testa que opções inválidas e comandos desconhecidos saem com 64, não com o código de dados."""
    result = runner.invoke(app, args)
    assert result.exit_code == 64, result.output


def test_train_before_ingest_exits_64(tmp_path):
    """Testa treino sem datasets ingeridos."""
    result = runner.invoke(app, ["train", "--config", str(_small_run(tmp_path))])
    assert result.exit_code == 64


def test_missing_seed_exits_64(tmp_path):
    """Testa configuração sem semente."""
    path = tmp_path / "run.yaml"
    path.write_text("assets: []\n", encoding="utf-8")
    result = runner.invoke(app, ["run", "--config", str(path)])
    assert result.exit_code == 64


def test_corrupt_prices_exit_2(tmp_path):
    """Testa CSV de preços com valor inválido: código 2 e nada gravado para o ativo."""
    config = _small_run(tmp_path)
    prices = tmp_path / "prices" / "AAA.csv"
    lines = prices.read_text(encoding="utf-8").splitlines(keepends=True)
    fields = lines[10].split(",")
    fields[4] = "abc"
    lines[10] = ",".join(fields)
    prices.write_text("".join(lines), encoding="utf-8")
    result = runner.invoke(app, ["ingest", "--config", str(config)])
    assert result.exit_code == 2
    assert not (tmp_path / "output" / "datasets" / "AAA.csv").exists()


def test_evaluate_from_metrics(tmp_path, fixtures_dir):
    """Testa a agregação de uma tabela externa sem configuração de execução."""
    out = tmp_path / "agg"
    result = runner.invoke(app, ["evaluate", "--from-metrics", str(fixtures_dir / "reference_rmse.csv"), "--output", str(out)])
    assert result.exit_code == 0, result.output
    frame = pd.read_csv(out / "reports" / "aggregate.csv")
    assert frame.set_index("model").loc["lstm", "wins"] == 4
    assert "64.20" in result.output


@pytest.mark.slow
def test_full_fixture_run_is_reproducible(tmp_path):
    """Testa o run completo nos 7 ativos da fixture com a configuração padrão, duas vezes."""
    outputs = []
    for name in ("a", "b"):
        config = write_fixture(tmp_path / name, 0)
        result = runner.invoke(app, ["run", "--config", str(config)])
        assert result.exit_code == 0, result.output
        outputs.append(tmp_path / name / "output")
    first, second = outputs
    reports = sorted(p.relative_to(first) for p in (first / "reports").rglob("*") if p.is_file())
    assert len(reports) == 7 * 3 + 2
    for relative in reports:
        assert (first / relative).read_bytes() == (second / relative).read_bytes(), relative
