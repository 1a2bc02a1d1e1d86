"""
Auditoria de causalidade sobre relatórios emitidos.
"""
import logging
from typing import Dict, Sequence

from src.data.align import AlignedDataset
from src.errors import CausalityError
from src.evaluation.report import ForecastReport

logger = logging.getLogger(__name__)


def audit_report(report: ForecastReport, aligned: AlignedDataset) -> None:
    """
    Cada previsão deve usar apenas pregões até t e mirar exatamente t+1.

    Raises:
        CausalityError: Alvo fora dos pregões, contexto que não é o pregão
            anterior ao alvo ou linhas fora de ordem
    """
    position = {d: i for i, d in enumerate(aligned.dates)}
    previous = None
    for row in report.rows:
        where = f"{report.symbol}/{report.model}"
        if row.date not in position:
            raise CausalityError(f"{where}: alvo fora dos pregões", field="date", date=row.date.isoformat())
        idx = position[row.date]
        if idx == 0 or aligned.dates[idx - 1] != row.context_end:
            raise CausalityError(f"{where}: contexto não termina no pregão anterior ao alvo",
                                 field="context_end", date=row.date.isoformat())
        if previous is not None and row.date <= previous:
            raise CausalityError(f"{where}: linhas fora de ordem", field="date", date=row.date.isoformat())
        previous = row.date


def audit_reports(reports: Sequence[ForecastReport], datasets: Dict[str, AlignedDataset]) -> int:
    """Audita todos os relatórios; devolve o número de linhas conferidas."""
    checked = 0
    for report in reports:
        audit_report(report, datasets[report.symbol])
        checked += len(report.rows)
    logger.info(f"Auditoria de causalidade: {checked} previsões em {len(reports)} relatórios")
    return checked
