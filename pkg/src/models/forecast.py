"""
Linha de previsão comum aos três modelos.
"""
from dataclasses import dataclass
from datetime import date
from typing import Dict


@dataclass(frozen=True)
class ForecastRow:
    date: date
    predicted: float
    actual: float
    context_end: date

    def to_dict(self) -> Dict:
        return {
            "date": self.date.isoformat(),
            "predicted": self.predicted,
            "actual": self.actual,
            "context_end": self.context_end.isoformat(),
        }

    @classmethod
    def from_dict(cls, data: Dict) -> "ForecastRow":
        return cls(date.fromisoformat(data["date"]), float(data["predicted"]),
                   float(data["actual"]), date.fromisoformat(data["context_end"]))
