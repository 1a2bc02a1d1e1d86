"""
Testes das métricas, relatórios, agregação entre ativos, gráficos e auditoria.
"""
import logging
import math
import re

import numpy as np
import pandas as pd
import pytest

from src.data.synthetic import ar1, trend_sine
from src.data.windows import SplitSpec
from src.errors import CausalityError, DataError, PartitionError
from src.evaluation.aggregate import aggregate, aggregate_from_metrics, aggregate_rmse, render_summary
from src.evaluation.audit import audit_report, audit_reports
from src.evaluation.metrics import check_mse_coherence, metrics, persistence_forecast
from src.evaluation.plot import plot_csv, read_plot_csv, render_svg
from src.evaluation.report import ForecastReport, evaluate
from src.models.forecast import ForecastRow
from src.models.registry import train_model
from src.settings import RunConfig

from tests.conftest import make_aligned

SPLITS = {"arima": "fraction_90_10", "lstm": "fraction_70_30", "gan": "holdout_last_20"}


def _report(aligned, model="lstm", predicted=None, count=5):
    dates = aligned.dates
    predicted = aligned.close[-count:] + 1.0 if predicted is None else predicted
    rows = [ForecastRow(dates[i], float(p), float(aligned.close[i]), dates[i - 1])
            for i, p in zip(range(len(dates) - count, len(dates)), predicted)]
    result = metrics([r.predicted for r in rows], [r.actual for r in rows])
    return ForecastReport(aligned.symbol, model, SplitSpec("holdout_last_20", len(dates) - count), rows, result)


def test_metrics_by_hand():
    """Testa MAE, MSE, RMSE e MAPE num exemplo calculado à mão."""
    result = metrics(np.array([1.0, 2.0, 4.0]), np.array([1.0, 2.0, 3.0]))
    assert result.mae == pytest.approx(1 / 3)
    assert result.mse == pytest.approx(1 / 3)
    assert result.rmse == pytest.approx(0.5774, abs=1e-4)
    assert result.mape == pytest.approx(0.1111, abs=1e-4)
    assert check_mse_coherence(result.rmse, result.mse)
    assert result.mae <= result.rmse


def test_metrics_zero_actual_omits_mape():
    """Testa que um valor real zero desliga o MAPE."""
    result = metrics([1.0, 2.0], [0.0, 2.0])
    assert result.mape is None
    assert result.mape_omitted
    assert result.mae == pytest.approx(0.5)


@pytest.mark.parametrize("predicted, actual", [
    ([1.0, 2.0], [1.0]),
    ([], []),
    ([1.0, float("nan")], [1.0, 2.0]),
])
def test_metrics_invalid_input(predicted, actual):
    """Testa tamanhos diferentes, vetores vazios e valores não finitos."""
    with pytest.raises(DataError):
        metrics(predicted, actual)


def test_metrics_scale_equivariance(rng):
    """Testa que multiplicar por c escala MAE/RMSE por c, MSE por c² e preserva o MAPE."""
    actual = rng.uniform(50, 150, 30)
    predicted = actual + rng.normal(scale=3.0, size=30)
    base = metrics(predicted, actual)
    scaled = metrics(7.5 * predicted, 7.5 * actual)
    assert scaled.mae == pytest.approx(7.5 * base.mae)
    assert scaled.rmse == pytest.approx(7.5 * base.rmse)
    assert scaled.mse == pytest.approx(7.5 ** 2 * base.mse)
    assert scaled.mape == pytest.approx(base.mape)


def test_mae_equals_rmse_for_constant_errors():
    """Testa MAE = RMSE quando todos os erros absolutos são iguais."""
    result = metrics([2.0, 0.0, 5.0], [1.0, 1.0, 4.0])
    assert result.mae == pytest.approx(result.rmse)


def test_persistence_forecast():
    """Testa x̂_{t+1} = x_t e erro sem pregão anterior."""
    close = np.array([10.0, 11.0, 12.5, 12.0])
    assert persistence_forecast(close, [1, 3]).tolist() == [10.0, 12.5]
    with pytest.raises(DataError):
        persistence_forecast(close, [0])


def test_mse_coherence_of_reference_rows(fixtures_dir):
    """Testa RMSE² contra o MSE da tabela de referência: LSTM/GAN a 0.05 e todas as linhas a 0.5%."""
    table = pd.read_csv(fixtures_dir / "reference_rmse.csv")
    for _, row in table.iterrows():
        assert check_mse_coherence(row["rmse"], row["mse"], relative=0.005)
        if row["model"] != "ARIMA":
            assert check_mse_coherence(row["rmse"], row["mse"], absolute=0.05)
    assert 16.62 ** 2 == pytest.approx(276.2244)


def test_aggregate_reference_table(fixtures_dir, caplog):
    """Testa média, mediana e vitórias a partir da tabela de referência."""
    caplog.set_level(logging.WARNING)
    result = aggregate_from_metrics(fixtures_dir / "reference_rmse.csv")
    expected = {"arima": (64.20, 30.70, 0), "lstm": (24.86, 11.21, 4), "gan": (12.22, 9.33, 3)}
    assert [m.model for m in result.models] == ["arima", "lstm", "gan"]
    for model, (mean, median, wins) in expected.items():
        row = result.get(model)
        assert round(row.mean_rmse, 2) == mean
        assert round(row.median_rmse, 2) == median
        assert row.wins == wins
    assert sum(m.wins for m in result.models) == len(result.assets) == 7
    assert result.ties == []
    assert not [r for r in caplog.records if "difere do MSE" in r.getMessage()]


def test_aggregate_from_metrics_warns_on_incoherent_mse(tmp_path, caplog):
    """Testa o aviso quando o MSE informado não bate com RMSE²."""
    path = tmp_path / "metrics.csv"
    path.write_text("asset,model,rmse,mse\nA,lstm,2.0,5.0\nA,gan,3.0,9.0\n", encoding="utf-8")
    caplog.set_level(logging.WARNING)
    result = aggregate_from_metrics(path)
    assert result.get("lstm").wins == 1
    assert any("A/lstm" in r.getMessage() for r in caplog.records)


def test_aggregate_from_metrics_missing_column(tmp_path):
    """Testa tabela sem a coluna rmse."""
    path = tmp_path / "metrics.csv"
    path.write_text("asset,model\nA,lstm\n", encoding="utf-8")
    with pytest.raises(DataError) as excinfo:
        aggregate_from_metrics(path)
    assert excinfo.value.field == "rmse"


def test_aggregate_missing_cell_lists_gaps():
    """Testa erro que nomeia as células (ativo, modelo) ausentes."""
    table = {("A", "arima"): 1.0, ("A", "lstm"): 2.0, ("B", "arima"): 3.0}
    with pytest.raises(DataError) as excinfo:
        aggregate_rmse(table)
    assert "B/lstm" in excinfo.value.message


def test_aggregate_ties_credit_every_winner(caplog):
    """Testa empate exato: todos os empatados ganham e o ativo é registrado."""
    caplog.set_level(logging.WARNING)
    table = {("A", "lstm"): 1.5, ("A", "gan"): 1.5, ("A", "arima"): 2.0,
             ("B", "lstm"): 3.0, ("B", "gan"): 1.0, ("B", "arima"): 2.0}
    result = aggregate_rmse(table)
    assert result.get("lstm").wins == 1
    assert result.get("gan").wins == 2
    assert result.get("arima").wins == 0
    assert result.ties == ["A"]
    assert any("Empate" in r.getMessage() for r in caplog.records)


def test_aggregate_mean_is_at_least_minimum(rng):
    """Testa média >= menor RMSE e mediana entre mínimo e máximo."""
    table = {(f"S{i}", m): float(rng.uniform(1, 100)) for i in range(5) for m in ("arima", "lstm", "gan")}
    result = aggregate_rmse(table)
    for row in result.models:
        values = [v for (_, m), v in table.items() if m == row.model]
        assert min(values) <= row.mean_rmse
        assert min(values) <= row.median_rmse <= max(values)
    assert list(result.to_frame().columns) == ["model", "mean_rmse", "median_rmse", "wins"]


def test_aggregate_rejects_duplicate_reports():
    """Testa relatório repetido para o mesmo (ativo, modelo)."""
    report = _report(make_aligned(trend_sine(30)))
    with pytest.raises(DataError):
        aggregate([report, report])


def test_render_summary_sections():
    """Testa as seções do resumo em texto e a coluna da previsão ingênua."""
    one = make_aligned(trend_sine(30), symbol="AAA")
    two = make_aligned(trend_sine(30) + 5.0, symbol="BBB")
    reports = [_report(one, "lstm"), _report(one, "gan", one.close[-5:] + 2.0),
               _report(two, "lstm", two.close[-5:] + 3.0), _report(two, "gan")]
    result = aggregate(reports)
    text = render_summary(result, reports, baseline={"AAA": 0.5, "BBB": 0.7})
    assert "RMSE por ativo" in text
    assert "Métricas completas" in text
    assert "Agregado" in text
    assert "persistence" in text
    assert "Empates" not in text
    assert render_summary(result).startswith("Agregado")


def test_report_serialization_roundtrip():
    """Testa to_dict/from_dict do relatório."""
    report = _report(make_aligned(trend_sine(30)))
    clone = ForecastReport.from_dict(report.to_dict())
    assert clone.rows == report.rows
    assert clone.split == report.split
    assert clone.metrics == report.metrics


def _line_vertices(svg, gid):
    match = re.search(rf'<g id="{gid}">\s*<path d="([^"]*)"', svg)
    assert match, gid
    return len(re.findall(r"[ML] ", match.group(1)))


def test_svg_has_actual_and_predicted_lines():
    """Testa o SVG com as duas séries de 20 pontos cada."""
    svg = render_svg(_report(make_aligned(trend_sine(40)), model="gan", count=20))
    assert "<svg" in svg
    assert _line_vertices(svg, "actual") == 20
    assert _line_vertices(svg, "predicted") == 20


def test_svg_is_byte_identical():
    """Testa que o mesmo relatório gera o mesmo SVG, sem data nos metadados."""
    report = _report(make_aligned(trend_sine(30)))
    first, second = render_svg(report), render_svg(report)
    assert first == second
    assert "<dc:date>" not in first


def test_plot_csv_roundtrip(tmp_path):
    """Testa o CSV pareado com valores idênticos ao relatório."""
    report = _report(make_aligned(trend_sine(30)))
    path = tmp_path / "plot.csv"
    path.write_text(plot_csv(report), encoding="utf-8")
    frame = read_plot_csv(path)
    assert list(frame.columns) == ["date", "actual", "predicted"]
    assert frame["date"].tolist() == [r.date.isoformat() for r in report.rows]
    assert frame["predicted"].tolist() == report.predicted.tolist()
    assert frame["actual"].tolist() == report.actual.tolist()


def test_audit_accepts_causal_rows():
    """Testa auditoria de relatório correto."""
    aligned = make_aligned(trend_sine(30))
    report = _report(aligned)
    audit_report(report, aligned)
    assert audit_reports([report], {aligned.symbol: aligned}) == 5


def test_audit_rejects_wrong_context():
    """Testa contexto que não é o pregão anterior ao alvo."""
    aligned = make_aligned(trend_sine(30))
    report = _report(aligned)
    rows = list(report.rows)
    rows[2] = ForecastRow(rows[2].date, rows[2].predicted, rows[2].actual, rows[2].date)
    report.rows = rows
    with pytest.raises(CausalityError):
        audit_report(report, aligned)


def test_audit_rejects_unordered_rows():
    """Testa linhas fora de ordem."""
    aligned = make_aligned(trend_sine(30))
    report = _report(aligned)
    report.rows = list(reversed(report.rows))
    with pytest.raises(CausalityError):
        audit_report(report, aligned)


def _config(tmp_path, **overrides):
    base = dict(seed=7, assets=[], output_dir=tmp_path, window_length=5, splits=dict(SPLITS),
                lstm={"hidden_size": 4, "batch_size": 8, "max_epochs": 2},
                gan={"batch_size": 10, "epochs": 1, "generator_hidden": [8], "discriminator_hidden": [8]})
    base.update(overrides)
    return RunConfig(**base)


def test_evaluate_arima_on_test_partition(tmp_path):
    """Testa a avaliação do ARIMA: 10% final, previsões finitas e auditoria ok."""
    aligned = make_aligned(ar1(220, np.random.default_rng(4), phi=0.6, mean=50.0))
    artifact, log = train_model("arima", aligned, _config(tmp_path))
    report = evaluate(artifact, aligned)
    assert len(report.rows) == 215 - 215 * 9 // 10
    assert report.rows[-1].date == aligned.dates[-1]
    assert all(math.isfinite(r.predicted) for r in report.rows)
    assert report.metrics.mae <= report.metrics.rmse
    assert list(log.columns)[:3] == ["p", "d", "q"]
    audit_report(report, aligned)


@pytest.mark.parametrize("model, count", [("lstm", 85 - 85 * 7 // 10), ("gan", 20)])
def test_evaluate_neural_models(tmp_path, model, count):
    """Testa LSTM (30% final) e GAN (últimos 20 pregões) pelo registro."""
    aligned = make_aligned(trend_sine(90), np.sin(np.arange(90) / 5.0))
    artifact, _ = train_model(model, aligned, _config(tmp_path))
    report = evaluate(artifact, aligned)
    assert len(report.rows) == count
    assert report.split == artifact.split
    audit_report(report, aligned)


def test_gan_artifact_records_schedule(tmp_path):
    """Testa que o artefato do GAN guarda o cronograma, com beta1 padrão do Adam."""
    aligned = make_aligned(trend_sine(90), np.sin(np.arange(90) / 5.0))
    artifact, _ = train_model("gan", aligned, _config(tmp_path))
    schedule = artifact.payload["schedule"]
    assert schedule["beta1"] == 0.9
    assert schedule["l2_weight"] == 0.0
    assert schedule["generator_hidden"] == [8]


def test_evaluate_rejects_other_partition(tmp_path):
    """Testa avaliação sobre dados cuja partição difere da do treino."""
    close = ar1(220, np.random.default_rng(4), phi=0.6, mean=50.0)
    artifact, _ = train_model("arima", make_aligned(close), _config(tmp_path))
    with pytest.raises(PartitionError):
        evaluate(artifact, make_aligned(close[:200]))


@pytest.mark.parametrize("model", ["lstm", "gan"])
def test_scalers_ignore_test_partition(tmp_path, model):
    """Testa que alterar os pregões de teste não muda o escalonador ajustado."""
    close, sentiment = trend_sine(90), np.sin(np.arange(90) / 5.0)
    config = _config(tmp_path, lstm={"hidden_size": 4, "batch_size": 8, "max_epochs": 0},
                     gan={"epochs": 0, "generator_hidden": [8], "discriminator_hidden": [8]})
    base, _ = train_model(model, make_aligned(close, sentiment), config)
    first_test_row = base.split.boundary + config.window_length
    close, sentiment = close.copy(), sentiment.copy()
    close[first_test_row:] *= 3.0
    sentiment[first_test_row:] *= -1.0
    other, _ = train_model(model, make_aligned(close, sentiment), config)

    def scaler(artifact):
        return artifact.payload["scaler"] if model == "lstm" else artifact.payload["generator"]["scaler"]

    assert other.split == base.split
    assert scaler(other) == scaler(base)
