# src/storage_utils.py
"""
Persistência dos resultados: layout da pasta de saída e gravação atômica.

Layout:
    datasets/<SYM>.csv, datasets/<SYM>.repairs.jsonl
    sentiment/<SYM>.csv
    artifacts/<SYM>/<modelo>.json, artifacts/<SYM>/<modelo>_log.csv
    reports/<SYM>/<modelo>.json, reports/aggregate.csv, reports/summary.txt
    plots/<SYM>_<modelo>.svg, plots/<SYM>_<modelo>.csv
"""
import json
import logging
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Union

import pandas as pd

from src.errors import UsageError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class OutputLayout:
    root: Path

    @property
    def datasets(self) -> Path:
        return self.root / "datasets"

    @property
    def sentiment(self) -> Path:
        return self.root / "sentiment"

    @property
    def artifacts(self) -> Path:
        return self.root / "artifacts"

    @property
    def reports(self) -> Path:
        return self.root / "reports"

    @property
    def plots(self) -> Path:
        return self.root / "plots"

    def dataset_path(self, symbol: str) -> Path:
        return self.datasets / f"{symbol}.csv"

    def repairs_path(self, symbol: str) -> Path:
        return self.datasets / f"{symbol}.repairs.jsonl"

    def sentiment_path(self, symbol: str) -> Path:
        return self.sentiment / f"{symbol}.csv"

    def artifact_path(self, symbol: str, model: str) -> Path:
        return self.artifacts / symbol / f"{model}.json"

    def training_log_path(self, symbol: str, model: str) -> Path:
        return self.artifacts / symbol / f"{model}_log.csv"

    def report_path(self, symbol: str, model: str) -> Path:
        return self.reports / symbol / f"{model}.json"

    @property
    def aggregate_path(self) -> Path:
        return self.reports / "aggregate.csv"

    @property
    def summary_path(self) -> Path:
        return self.reports / "summary.txt"

    def plot_paths(self, symbol: str, model: str):
        stem = self.plots / f"{symbol}_{model}"
        return stem.with_suffix(".svg"), stem.with_suffix(".csv")


def ensure_data_dirs(output_dir: Union[str, Path]) -> OutputLayout:
    """Cria as pastas de saída (se preciso) e devolve o layout."""
    layout = OutputLayout(Path(output_dir))
    for directory in (layout.datasets, layout.sentiment, layout.artifacts, layout.reports, layout.plots):
        directory.mkdir(parents=True, exist_ok=True)
    return layout


def write_text(path: Union[str, Path], text: str) -> str:
    """
    Grava texto de forma atômica (arquivo temporário + rename na mesma pasta).

    Returns:
        str: Caminho absoluto do arquivo
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, 'w', encoding='utf-8', newline='') as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return str(path.absolute())


def save_json(path: Union[str, Path], data: Dict[str, Any]) -> str:
    """JSON com chaves ordenadas, sem carimbo de tempo."""
    return write_text(path, json.dumps(data, ensure_ascii=False, indent=2, sort_keys=True) + "\n")


def load_json(path: Union[str, Path], what: str = "arquivo") -> Dict[str, Any]:
    path = Path(path)
    if not path.exists():
        raise UsageError(f"{what} ausente: {path}", path=str(path))
    with open(path, 'r', encoding='utf-8') as f:
        return json.load(f)


def save_frame(path: Union[str, Path], frame: pd.DataFrame) -> str:
    return write_text(path, frame.to_csv(index=False, lineterminator='\n'))
