"""
Testes da persistência: layout da pasta de saída e gravação atômica.
"""
import json
from pathlib import Path

import pandas as pd
import pytest

from src.errors import UsageError
from src.storage_utils import OutputLayout, ensure_data_dirs, load_json, save_frame, save_json, write_text


def test_layout_paths():
    """Testa os caminhos de cada artefato no layout."""
    layout = OutputLayout(Path("out"))
    assert layout.dataset_path("AAPL") == Path("out/datasets/AAPL.csv")
    assert layout.repairs_path("AAPL") == Path("out/datasets/AAPL.repairs.jsonl")
    assert layout.sentiment_path("AAPL") == Path("out/sentiment/AAPL.csv")
    assert layout.artifact_path("AAPL", "gan") == Path("out/artifacts/AAPL/gan.json")
    assert layout.training_log_path("AAPL", "gan") == Path("out/artifacts/AAPL/gan_log.csv")
    assert layout.report_path("AAPL", "lstm") == Path("out/reports/AAPL/lstm.json")
    assert layout.aggregate_path == Path("out/reports/aggregate.csv")
    assert layout.plot_paths("AAPL", "arima") == (Path("out/plots/AAPL_arima.svg"),
                                                  Path("out/plots/AAPL_arima.csv"))


def test_ensure_data_dirs(tmp_path):
    """Testa a criação das pastas de saída."""
    layout = ensure_data_dirs(tmp_path / "output")
    for directory in (layout.datasets, layout.sentiment, layout.artifacts, layout.reports, layout.plots):
        assert directory.is_dir()
    ensure_data_dirs(tmp_path / "output")


def test_write_text_leaves_no_temporary_files(tmp_path):
    """Testa a gravação atômica: só o arquivo final fica na pasta."""
    path = tmp_path / "a" / "b.txt"
    assert write_text(path, "primeira\n") == str(path.absolute())
    write_text(path, "segunda\n")
    assert path.read_text(encoding="utf-8") == "segunda\n"
    assert [p.name for p in path.parent.iterdir()] == ["b.txt"]


def test_save_json_is_sorted_and_stable(tmp_path):
    """Testa JSON com chaves ordenadas e bytes iguais entre gravações."""
    path = tmp_path / "r.json"
    save_json(path, {"b": 1, "a": {"y": 2.5, "x": None}})
    first = path.read_bytes()
    save_json(path, {"a": {"x": None, "y": 2.5}, "b": 1})
    assert path.read_bytes() == first
    assert list(json.loads(first)) == ["a", "b"]
    assert load_json(path) == {"a": {"x": None, "y": 2.5}, "b": 1}


def test_load_json_missing_file(tmp_path):
    """Testa UsageError com arquivo ausente."""
    with pytest.raises(UsageError) as excinfo:
        load_json(tmp_path / "nada.json", "Relatório")
    assert "Relatório" in excinfo.value.message


def test_save_frame(tmp_path):
    """Testa CSV sem índice e com quebra de linha \\n."""
    path = tmp_path / "f.csv"
    save_frame(path, pd.DataFrame({"epoch": [1, 2], "loss": [0.5, 0.25]}))
    assert path.read_bytes() == b"epoch,loss\n1,0.5\n2,0.25\n"
