"""
Gráfico estático de previsto x real (SVG) e o CSV pareado.
"""
import io
from pathlib import Path
from typing import Union

import matplotlib
import matplotlib.dates as mdates
import pandas as pd
from matplotlib.figure import Figure

from src.evaluation.report import ForecastReport

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "sentigan"

FIGSIZE = (10, 5)
COLORS = {"actual": "#2c3e50", "predicted": "#e74c3c"}
LABELS = {"actual": "Real", "predicted": "Previsto"}


def render_svg(report: ForecastReport) -> str:
    """
    SVG com as séries real e prevista sobre as datas do teste.

    Usa `Figure` sem pyplot, pois os gráficos são gerados em threads. Cada
    linha sai num grupo `<g id="actual">` / `<g id="predicted">`. Sem data
    nos metadados, a mesma entrada gera os mesmos bytes.
    """
    fig = Figure(figsize=FIGSIZE)
    ax = fig.add_subplot()
    if report.rows:
        x = mdates.date2num([r.date for r in report.rows])
        for name, values in (("actual", report.actual), ("predicted", report.predicted)):
            ax.plot(x, values, color=COLORS[name], label=LABELS[name], linewidth=2,
                    linestyle="-" if name == "actual" else "--", gid=name)
        ax.xaxis.set_major_locator(mdates.AutoDateLocator())
        ax.xaxis.set_major_formatter(mdates.DateFormatter("%Y-%m-%d"))
        ax.legend()
    ax.set_title(f"{report.symbol} - {report.model} (RMSE {report.metrics.rmse:.2f})", fontsize=14)
    ax.set_xlabel("Data")
    ax.set_ylabel("Fechamento")
    ax.grid(True, alpha=0.3)
    fig.autofmt_xdate()
    fig.tight_layout()

    buffer = io.StringIO()
    fig.savefig(buffer, format="svg", metadata={"Date": None})
    return buffer.getvalue()


def plot_frame(report: ForecastReport) -> pd.DataFrame:
    return pd.DataFrame({
        "date": [r.date.isoformat() for r in report.rows],
        "actual": [r.actual for r in report.rows],
        "predicted": [r.predicted for r in report.rows],
    }, columns=["date", "actual", "predicted"])


def plot_csv(report: ForecastReport) -> str:
    buffer = io.StringIO()
    plot_frame(report).to_csv(buffer, index=False, lineterminator='\n')
    return buffer.getvalue()


def read_plot_csv(source: Union[str, Path]) -> pd.DataFrame:
    return pd.read_csv(source, dtype={'date': str}, float_precision='round_trip')
