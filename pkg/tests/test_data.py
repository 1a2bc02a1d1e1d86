"""
Testes da camada de dados: validação, leitura, reparo, alinhamento e janelas.
"""
from datetime import date, timedelta

import numpy as np
import pytest

from src.data.align import align, dump_aligned, load_aligned
from src.data.ohlcv import Bar, dump_ohlcv, load_ohlcv, repair_log_lines, repair_missing
from src.data.synthetic import bars_from_close, random_walk, trading_days
from src.data.validator import BarValidator
from src.data.windows import SplitSpec, WindowSample, check_causality, make_windows, split
from src.errors import CausalityError, DataError, PartitionError
from src.sentiment.daily import DailySentiment

from tests.conftest import make_aligned

HEADER = "date,open,high,low,close,adj_close,volume\n"
VALID_ROWS = (
    "2024-01-02,10,11,9,10.5,10.5,100\n"
    "2024-01-03,10.6,11,10,10.8,10.8,120\n"
    "2024-01-04,10.8,11.5,10.7,11.2,11.2,90\n"
)


def test_validator_valid_bar():
    """Testa validação de barra válida."""
    bar = Bar(date(2024, 1, 2), 10.0, 11.0, 9.0, 10.5, 10.5, 100.0)
    assert BarValidator.validate_item(bar) == []


def test_validator_invalid_bar():
    """Testa validação de barra inválida."""
    bar = Bar(date(2024, 1, 2), 12.0, 11.0, 9.0, -1.0, 10.5, -5.0)
    fields = [name for name, _ in BarValidator.check_fields(bar)]
    assert "open" in fields
    assert "close" in fields
    assert "volume" in fields


def test_validator_validate_items():
    """Testa validação em lote com índices das barras inválidas."""
    good = Bar(date(2024, 1, 2), 10.0, 11.0, 9.0, 10.5, 10.5, 100.0)
    bad = Bar(date(2024, 1, 3), 10.0, 9.0, 11.0, 10.0, 10.0, 100.0)
    assert list(BarValidator.validate_items([good, bad, good])) == [1]


def test_validator_clean_row():
    """Testa normalização de uma linha crua."""
    assert BarValidator.clean_row({" Close ": " 10.5 ", "Volume": 3}) == {"close": "10.5", "volume": 3}


def test_load_ohlcv_valid():
    """Testa leitura de CSV válido."""
    series = load_ohlcv(HEADER + VALID_ROWS, "TST")
    assert len(series) == 3
    assert series.symbol == "TST"
    assert series.bars[1].close == 10.8
    assert series.matrix().shape == (3, 6)


def test_load_ohlcv_sorts_and_drops_duplicates():
    """Testa ordenação por data e remoção de datas repetidas."""
    rows = VALID_ROWS.splitlines(keepends=True)
    text = HEADER + rows[2] + rows[0] + rows[1] + rows[0].replace("10.5,10.5", "10.4,10.4")
    series = load_ohlcv(text)
    assert series.dates == [date(2024, 1, 2), date(2024, 1, 3), date(2024, 1, 4)]
    assert series.duplicates_removed == 1
    assert series.bars[0].close == 10.5


@pytest.mark.parametrize("row, field", [
    ("2024-01-05,11,12,10,abc,11,100\n", "close"),
    ("2024-01-05,11,10,12,11,11,100\n", "high"),
    ("2024-01-05,11,12,10,11,11,-1\n", "volume"),
    ("05/01/2024,11,12,10,11,11,100\n", "date"),
])
def test_load_ohlcv_errors_carry_line(row, field):
    """Testa que erros de leitura indicam campo e linha."""
    with pytest.raises(DataError) as excinfo:
        load_ohlcv(HEADER + VALID_ROWS + row)
    assert excinfo.value.field == field
    assert excinfo.value.line == 5


def test_load_ohlcv_missing_column():
    """Testa cabeçalho sem coluna obrigatória."""
    with pytest.raises(DataError) as excinfo:
        load_ohlcv("date,open,high,low,close,volume\n2024-01-02,10,11,9,10.5,100\n")
    assert excinfo.value.field == "header"


def test_dump_load_is_idempotent(rng):
    """Testa que gravar e reler a série não altera o texto."""
    days = trading_days(date(2024, 1, 2), 30)
    series = bars_from_close(days, random_walk(30, rng), rng, symbol="TST")
    text = dump_ohlcv(series)
    assert dump_ohlcv(load_ohlcv(text, "TST")) == text
    assert load_ohlcv(text, "TST") == series


def test_repair_forward_fill_and_zero_volume():
    """Testa preenchimento do preço anterior e volume zero."""
    text = HEADER + "2024-01-02,10,11,9,10.5,10.5,100\n2024-01-03,10.6,11,10,,10.8,\n"
    series, log = repair_missing(load_ohlcv(text))
    assert series.bars[1].close == 10.5
    assert series.bars[1].volume == 0.0
    assert {(e.field, e.action) for e in log} == {("close", "forward_fill"), ("volume", "zero_fill")}


def test_repair_drops_leading_rows():
    """Testa descarte das linhas iniciais sem preço anterior."""
    text = HEADER + "2024-01-02,,11,9,10.5,10.5,100\n" + VALID_ROWS.splitlines(keepends=True)[1]
    series, log = repair_missing(load_ohlcv(text))
    assert series.dates == [date(2024, 1, 3)]
    assert log[0].action == "drop_leading"


def test_repair_widens_range():
    """Testa que o preço copiado fora da faixa alarga low/high e é registrado."""
    text = HEADER + "2024-01-02,10,11,9,10.5,10.5,100\n2024-01-03,10.6,11,10.6,,10.8,120\n"
    series, log = repair_missing(load_ohlcv(text))
    assert series.bars[1].low == 10.5
    assert ("low", "range_widened") in {(e.field, e.action) for e in log}
    assert BarValidator.validate_items(series.bars) == {}


def test_repair_empty_column_is_error():
    """Testa coluna inteiramente vazia."""
    text = HEADER + "2024-01-02,10,11,9,10.5,10.5,\n2024-01-03,10.6,11,10,10.8,10.8,\n"
    with pytest.raises(DataError):
        repair_missing(load_ohlcv(text))


def test_repair_log_lines_are_sorted_json():
    """Testa o formato JSON lines do log de reparos."""
    text = HEADER + "2024-01-02,10,11,9,10.5,10.5,100\n2024-01-03,10.6,11,10,10.8,10.8,\n"
    _, log = repair_missing(load_ohlcv(text))
    assert repair_log_lines(log) == '{"action": "zero_fill", "date": "2024-01-03", "field": "volume"}\n'


def test_align_fills_missing_sentiment_and_counts_unmatched():
    """Testa sentimento 0 sem posts e contagem de dias fora dos pregões."""
    series = load_ohlcv(HEADER + VALID_ROWS)
    daily = [DailySentiment(date(2024, 1, 3), 0.4, 2), DailySentiment(date(2024, 1, 6), -0.2, 1)]
    aligned = align(series, daily)
    assert aligned.sentiment.tolist() == [0.0, 0.4, 0.0]
    assert aligned.unmatched_sentiment == 1
    assert aligned.is_chronological()


def test_align_requires_repaired_series():
    """Testa erro ao alinhar série com ausentes."""
    series = load_ohlcv(HEADER + "2024-01-02,10,11,9,10.5,10.5,\n")
    with pytest.raises(DataError):
        align(series, [])


def test_aligned_roundtrip_is_exact(rng):
    """Testa que o dataset alinhado relido tem floats idênticos."""
    aligned = make_aligned(random_walk(40, rng), rng.uniform(-1, 1, 40))
    clone = load_aligned(dump_aligned(aligned), aligned.symbol)
    assert clone.equals(aligned)


def test_aligned_is_read_only(rng):
    """Testa que os arrays do dataset não podem ser alterados."""
    aligned = make_aligned(random_walk(10, rng))
    with pytest.raises(ValueError):
        aligned.features[0, 0] = 1.0


def test_make_windows_shapes_and_targets(rng):
    """Testa T - L janelas com alvo no pregão seguinte."""
    aligned = make_aligned(random_walk(30, rng), np.linspace(-1, 1, 30))
    windows = make_windows(aligned, 5)
    assert len(windows) == 25
    first = windows[0]
    assert first.window_length == 5
    assert np.array_equal(first.history, aligned.features[0:5])
    assert np.array_equal(first.target, aligned.features[5])
    assert first.sentiment == aligned.sentiment[4]
    assert first.context_end == aligned.dates[4]
    assert first.target_date == aligned.dates[5]


def test_make_windows_mean_sentiment(rng):
    """Testa o modo de sentimento médio da janela."""
    aligned = make_aligned(random_walk(12, rng), np.arange(12) / 12.0)
    windows = make_windows(aligned, 4, "mean")
    assert windows[2].sentiment == pytest.approx(np.mean(np.arange(2, 6) / 12.0))


def test_make_windows_too_short(rng):
    """Testa erro quando T < L + 1."""
    with pytest.raises(DataError):
        make_windows(make_aligned(random_walk(5, rng)), 5)


@pytest.mark.parametrize("policy, boundary", [
    ("fraction_90_10", 90),
    ("fraction_70_30", 70),
    ("holdout_last_20", 80),
])
def test_split_boundaries(rng, policy, boundary):
    """Testa os cortes floor(0.9 T), floor(0.7 T) e T - 20."""
    aligned = make_aligned(random_walk(120, rng))
    train, test = split(make_windows(aligned, 20), policy)
    assert len(train) == boundary
    assert len(train) + len(test) == 100
    assert train[-1].target_date < test[0].target_date
    check_causality(train, test)


def test_split_floor_uses_integer_arithmetic():
    """Testa floor(0.7 * 10) = 7 sem erro de ponto flutuante."""
    assert SplitSpec.for_count("fraction_70_30", 10).boundary == 7
    assert SplitSpec.for_count("fraction_90_10", 33).boundary == 29


def test_split_aligned_rows(rng):
    """Testa o corte direto sobre as linhas do dataset."""
    aligned = make_aligned(random_walk(50, rng))
    train, test = split(aligned, "fraction_90_10")
    assert len(train) == 45 and len(test) == 5
    assert train.dates[-1] < test.dates[0]


def test_split_rejects_empty_partition(rng):
    """Testa partição vazia e política desconhecida."""
    with pytest.raises(PartitionError):
        SplitSpec.for_count("holdout_last_20", 20)
    with pytest.raises(PartitionError):
        SplitSpec.for_count("shuffle", 100)


def test_split_rejects_unordered_windows(rng):
    """Testa que janelas fora de ordem não são aceitas."""
    windows = make_windows(make_aligned(random_walk(40, rng)), 5)
    with pytest.raises(PartitionError):
        split(list(reversed(windows)), "fraction_70_30")


def test_check_causality_detects_leak():
    """Testa janela cujo contexto não precede o alvo e treino depois do teste."""
    day = date(2024, 1, 2)
    history = np.ones((3, 6))
    leaky = WindowSample(history, 0.0, np.ones(6), target_date=day, context_end=day)
    with pytest.raises(CausalityError):
        check_causality([leaky], [])

    early = WindowSample(history, 0.0, np.ones(6), day, day - timedelta(days=1))
    late = WindowSample(history, 0.0, np.ones(6), day + timedelta(days=5), day + timedelta(days=4))
    with pytest.raises(CausalityError):
        check_causality([late], [early])
