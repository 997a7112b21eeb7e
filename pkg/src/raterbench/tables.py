"""Two-rater dichotomous contingency tables and table-level adjustments.

Cell layout follows the usual 2x2 convention with subscript "1" meaning a
"+" vote: ``n11`` both positive, ``n10`` rater 1 positive / rater 2 negative,
``n01`` the reverse, ``n00`` both negative. Cells are stored as floats so
adjusted tables (half counts from the prevalence/bias adjustment, irrational
cells from the odds-ratio symmetrization) flow through the same estimator
formulas as raw integer tables.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

__all__ = [
    "ContingencyTable",
    "CellProportions",
    "PosNegAgreement",
    "UndefinedOddsRatioError",
    "proportions",
    "pos_neg_agreement",
    "byrt_adjust",
    "hoehler_adjust",
    "parse_table",
]


class UndefinedOddsRatioError(ValueError):
    """Raised when the odds-ratio symmetrization meets a zero cell."""


@dataclass(frozen=True)
class ContingencyTable:
    """Counts (possibly real-valued after adjustment) for one rated sample."""

    n11: float
    n10: float
    n01: float
    n00: float

    def __post_init__(self):
        for name in ("n11", "n10", "n01", "n00"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0:
                raise ValueError(f"cell {name} must be a finite non-negative count, got {v!r}")

    @property
    def total(self) -> float:
        return self.n11 + self.n10 + self.n01 + self.n00

    @property
    def cells(self) -> tuple[float, float, float, float]:
        return (self.n11, self.n10, self.n01, self.n00)

    def transpose(self) -> "ContingencyTable":
        """Swap the raters (n10 and n01 trade places)."""
        return ContingencyTable(self.n11, self.n01, self.n10, self.n00)


class CellProportions(NamedTuple):
    p11: float
    p10: float
    p01: float
    p00: float
    pa: float


class PosNegAgreement(NamedTuple):
    """Specific agreement on the positive / negative category.

    Either component is None when its denominator vanishes (the category
    never occurs); callers count rather than catch.
    """

    p_pos: Optional[float]
    p_neg: Optional[float]


def proportions(table: ContingencyTable) -> CellProportions:
    """Divide each cell by the table total; pa is the diagonal share.

    Raises
    ------
    ValueError
        On an empty table (total 0).
    """
    n = table.total
    if n <= 0:
        raise ValueError("empty table: proportions need at least one rated subject")
    p11 = table.n11 / n
    p10 = table.n10 / n
    p01 = table.n01 / n
    p00 = table.n00 / n
    return CellProportions(p11, p10, p01, p00, p11 + p00)


def pos_neg_agreement(table: ContingencyTable) -> PosNegAgreement:
    """Specific agreement p_pos = 2n11/(2n11+n10+n01), p_neg analogously."""
    den_pos = 2.0 * table.n11 + table.n10 + table.n01
    den_neg = 2.0 * table.n00 + table.n01 + table.n10
    p_pos = (2.0 * table.n11 / den_pos) if den_pos > 0 else None
    p_neg = (2.0 * table.n00 / den_neg) if den_neg > 0 else None
    return PosNegAgreement(p_pos, p_neg)


def byrt_adjust(table: ContingencyTable) -> ContingencyTable:
    """Prevalence/bias adjustment: average the diagonal and off-diagonal cells.

    Half counts are kept as-is (the source text is silent on odd sums).
    """
    if table.total <= 0:
        raise ValueError("empty table cannot be adjusted")
    diag = (table.n11 + table.n00) / 2.0
    off = (table.n10 + table.n01) / 2.0
    return ContingencyTable(diag, off, off, diag)


def hoehler_adjust(table: ContingencyTable) -> ContingencyTable:
    """Odds-ratio-preserving symmetrization.

    The adjusted table keeps N and the odds ratio but forces symmetric
    margins, making Cohen's kappa on it coincide with Yule's Y on the
    original. Requires all four cells positive (otherwise the odds ratio is
    0, infinite, or 0/0).
    """
    if not (table.n10 * table.n01 > 0 and table.n11 * table.n00 > 0):
        raise UndefinedOddsRatioError(
            "odds ratio undefined: every cell must be positive "
            "(apply a continuity correction first)"
        )
    n = table.total
    root_or = math.sqrt((table.n11 * table.n00) / (table.n10 * table.n01))
    diag = n * root_or / (2.0 * (1.0 + root_or))
    off = 0.5 * n - diag
    return ContingencyTable(diag, off, off, diag)


def parse_table(text: str) -> ContingencyTable:
    """Parse the CLI/CSV cell format "n11,n10,n01,n00" (non-negative integers)."""
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 4:
        raise ValueError(f"expected four comma-separated counts, got {text!r}")
    counts = []
    for p in parts:
        try:
            v = int(p)
        except ValueError:
            raise ValueError(f"counts must be non-negative integers, got {p!r}") from None
        counts.append(v)
    return ContingencyTable(*counts)
