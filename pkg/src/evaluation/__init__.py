"""
Métricas, relatórios por ativo, agregação entre ativos, gráficos e auditoria.
"""
from .metrics import Metrics, metrics, persistence_forecast, check_mse_coherence
from .report import ForecastReport, evaluate
from .aggregate import AggregateReport, aggregate, aggregate_rmse, aggregate_from_metrics, render_summary
from .plot import render_svg, plot_csv
from .audit import audit_report, audit_reports

__all__ = [
    'Metrics', 'metrics', 'persistence_forecast', 'check_mse_coherence',
    'ForecastReport', 'evaluate',
    'AggregateReport', 'aggregate', 'aggregate_rmse', 'aggregate_from_metrics', 'render_summary',
    'render_svg', 'plot_csv',
    'audit_report', 'audit_reports',
]
