"""Structured analysis failures; extraction never crashes on bad inputs."""

from __future__ import annotations


class ChartAnalysisError(Exception):
    """Base for structured per-chart failures."""

    reason = "analysis-failed"

    def __init__(self, detail: str = ""):
        super().__init__(detail or self.reason)
        self.detail = detail

    def to_dict(self) -> dict:
        return {"reason": self.reason, "detail": self.detail}


class NoChartError(ChartAnalysisError):
    reason = "no-chart"


class EmptyTableError(ChartAnalysisError):
    reason = "empty-table"
