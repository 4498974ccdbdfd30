"""Effect-size statistics: log odds ratio and Cohen's h."""

from __future__ import annotations

import math
from dataclasses import dataclass
from statistics import NormalDist

__all__ = [
    "ContingencyTable",
    "OddsRatioResult",
    "EffectSize",
    "log_odds_ratio",
    "cohens_h",
]


@dataclass
class ContingencyTable:
    """2x2 counts; rows are the first event (1/0), columns the second."""

    n11: int
    n10: int
    n01: int
    n00: int

    def cells(self):
        return (self.n11, self.n10, self.n01, self.n00)


@dataclass
class OddsRatioResult:
    log_or: float
    se: float
    confidence: float
    z: float
    ci_halfwidth: float
    odds_ratio: float
    or_low: float
    or_high: float


def log_odds_ratio(table: ContingencyTable, confidence: float = 0.99) -> OddsRatioResult:
    """L = ln(n11*n00 / (n10*n01)) with SE = sqrt(sum 1/n_ij).

    The confidence interval is symmetric on the log scale; the odds-ratio
    interval is reported as exp(L -+ z*SE) since it is asymmetric after
    exponentiation. Zero cells are a hard error (apply a continuity
    correction upstream or report the ratio as undefined).
    """
    cells = table.cells()
    if any(c < 0 for c in cells):
        raise ValueError("contingency counts must be non-negative")
    if any(c == 0 for c in cells):
        raise ValueError(
            "zero cell in contingency table: apply continuity correction "
            "upstream or report undefined"
        )
    if not (0.0 < confidence < 1.0):
        raise ValueError("confidence must be in (0, 1)")
    n11, n10, n01, n00 = cells
    log_or = math.log((n11 * n00) / (n10 * n01))
    se = math.sqrt(1.0 / n11 + 1.0 / n10 + 1.0 / n01 + 1.0 / n00)
    z = NormalDist().inv_cdf(0.5 + confidence / 2.0)
    half = z * se
    return OddsRatioResult(
        log_or=log_or,
        se=se,
        confidence=confidence,
        z=z,
        ci_halfwidth=half,
        odds_ratio=math.exp(log_or),
        or_low=math.exp(log_or - half),
        or_high=math.exp(log_or + half),
    )


_MAGNITUDE_THRESHOLDS = ((0.80, "large"), (0.50, "medium"), (0.20, "small"))


@dataclass
class EffectSize:
    h: float
    magnitude: str


def cohens_h(p1: float, p2: float) -> EffectSize:
    """h = 2 arcsin sqrt(p1) - 2 arcsin sqrt(p2); positive iff p1 > p2.

    |h| >= 0.20 / 0.50 / 0.80 reads as small / medium / large."""
    for p in (p1, p2):
        if not (0.0 <= p <= 1.0):
            raise ValueError("proportions must lie in [0, 1]")
    h = 2.0 * math.asin(math.sqrt(p1)) - 2.0 * math.asin(math.sqrt(p2))
    magnitude = "negligible"
    for cutoff, name in _MAGNITUDE_THRESHOLDS:
        if abs(h) >= cutoff:
            magnitude = name
            break
    return EffectSize(h=h, magnitude=magnitude)
