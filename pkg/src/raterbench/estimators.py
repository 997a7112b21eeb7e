"""Point estimators of two-rater agreement on a dichotomous scale.

Ten methods: raw percent agreement plus nine chance-corrected statistics.
Every chance-corrected method has the shape (p_a - p_e) / (1 - p_e) for some
notion of chance agreement p_e; the implementations below use the count-based
closed forms (better cancellation behavior than computing p_e separately),
with the p_e decompositions kept in :func:`chance_agreement` for
documentation-style tests.

All formulas are written against array-or-scalar cell values, so the
Monte Carlo harness can evaluate a whole replicate batch in one call while
the scalar API wraps single tables. Undefined values (vanishing denominator)
are NaN at the array layer and ``None`` on :class:`AgreementEstimate`.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .tables import ContingencyTable

__all__ = [
    "MethodId",
    "AgreementEstimate",
    "CORRECT_HALF",
    "NO_CORRECTION",
    "estimate",
    "estimate_all",
    "icc_anova",
    "chance_agreement",
]

CORRECT_HALF = "correct-0.5"
NO_CORRECTION = "none"


class MethodId(enum.Enum):
    """The ten agreement statistics, in the stable reporting order."""

    PERCENT_AGREEMENT = "percent_agreement"
    COHEN_KAPPA = "cohen_kappa"
    SCOTT_PI = "scott_pi"
    KRIPPENDORFF_ALPHA = "krippendorff_alpha"
    VAN_OEST_IR2 = "van_oest_ir2"
    MAK_RHO = "mak_rho"
    BENNETT_S = "bennett_s"
    YULE_Y = "yule_y"
    MAXWELL_PILLINER_R11 = "maxwell_pilliner_r11"
    GWET_AC1 = "gwet_ac1"

    @property
    def label(self) -> str:
        """Short display label used by the CLI and the clustering leaves."""
        return _LABELS[self]


_LABELS = {
    MethodId.PERCENT_AGREEMENT: "pa",
    MethodId.COHEN_KAPPA: "kappa",
    MethodId.SCOTT_PI: "pi",
    MethodId.KRIPPENDORFF_ALPHA: "alpha",
    MethodId.VAN_OEST_IR2: "ir2",
    MethodId.MAK_RHO: "rho",
    MethodId.BENNETT_S: "S",
    MethodId.YULE_Y: "Y",
    MethodId.MAXWELL_PILLINER_R11: "r11",
    MethodId.GWET_AC1: "AC1",
}


@dataclass(frozen=True)
class AgreementEstimate:
    """One method's value on one table; value None when undefined."""

    method: MethodId
    value: Optional[float]
    applied_correction: Optional[float] = None


def _safe_div(num, den):
    """Elementwise num/den with NaN where den == 0; scalar in, scalar out."""
    num_a = np.asarray(num, dtype=float)
    den_a = np.asarray(den, dtype=float)
    ok = den_a != 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(ok, num_a / np.where(ok, den_a, 1.0), np.nan)
    return float(out) if out.ndim == 0 else out


# Count-based closed forms. Arguments are the four cells (a, b, c, d) =
# (n11, n10, n01, n00), scalar or ndarray, real-valued.

def _percent_agreement(a, b, c, d):
    return _safe_div(a + d, a + b + c + d)


def _cohen_kappa(a, b, c, d):
    return _safe_div(2.0 * (a * d - b * c), (a + b) * (b + d) + (a + c) * (c + d))


def _scott_pi(a, b, c, d):
    return _safe_div(
        4.0 * (a * d - b * c) - (b - c) ** 2,
        (2.0 * a + b + c) * (2.0 * d + b + c),
    )


def _krippendorff_alpha(a, b, c, d):
    n = a + b + c + d
    ratio = _safe_div((2.0 * n - 1.0) * (b + c), (2.0 * a + b + c) * (2.0 * d + b + c))
    return 1.0 - ratio


def _van_oest_ir2(a, b, c, d):
    n = a + b + c + d
    w_pos = (2.0 * a + b + c + 1.0) / (2.0 * n + 2.0)
    w_neg = (2.0 * d + b + c + 1.0) / (2.0 * n + 2.0)
    pe = w_pos**2 + w_neg**2
    return _safe_div(a + d - n * pe, n - n * pe)


def _mak_rho(a, b, c, d):
    return _safe_div(
        4.0 * (a * d - b * c) - (b - c) ** 2 + (b + c),
        (2.0 * a + b + c) * (2.0 * d + b + c) - (b + c),
    )


def _bennett_s(a, b, c, d):
    return 2.0 * _safe_div(a + d, a + b + c + d) - 1.0


def _yule_y_raw(a, b, c, d):
    sq_ad = np.sqrt(np.asarray(a * d, dtype=float))
    sq_bc = np.sqrt(np.asarray(b * c, dtype=float))
    return _safe_div(sq_ad - sq_bc, sq_ad + sq_bc)


def _maxwell_pilliner_r11(a, b, c, d):
    return _safe_div(2.0 * (a * d - b * c), (a + b) * (c + d) + (a + c) * (b + d))


def _gwet_ac1(a, b, c, d):
    n = a + b + c + d
    return _safe_div(
        2.0 * (a**2 + d**2) - (b + c) ** 2,
        2.0 * (a * n + d * n - 2.0 * a * d) + (b + c) ** 2,
    )


_FORMULAS = {
    MethodId.PERCENT_AGREEMENT: _percent_agreement,
    MethodId.COHEN_KAPPA: _cohen_kappa,
    MethodId.SCOTT_PI: _scott_pi,
    MethodId.KRIPPENDORFF_ALPHA: _krippendorff_alpha,
    MethodId.VAN_OEST_IR2: _van_oest_ir2,
    MethodId.MAK_RHO: _mak_rho,
    MethodId.BENNETT_S: _bennett_s,
    MethodId.MAXWELL_PILLINER_R11: _maxwell_pilliner_r11,
    MethodId.GWET_AC1: _gwet_ac1,
}


def _yule_correction_mask(a, b, c, d):
    """Zero-cell trigger, except the two patterns whose value is already exact.

    Perfect agreement (n10 = n01 = 0 with both diagonal cells positive) and
    perfect disagreement (the mirror) evaluate to +-1 without correction.
    """
    a, b, c, d = (np.asarray(x, dtype=float) for x in (a, b, c, d))
    any_zero = (a == 0) | (b == 0) | (c == 0) | (d == 0)
    perfect_agree = (b == 0) & (c == 0) & (a > 0) & (d > 0)
    perfect_disagree = (a == 0) & (d == 0) & (b > 0) & (c > 0)
    return any_zero & ~perfect_agree & ~perfect_disagree


def _method_values(method, a, b, c, d, correction_policy=CORRECT_HALF):
    """Array-level evaluation shared by the scalar API and the harness.

    For Yule's Y, returns (values, corrected_mask); for everything else,
    (values, None).
    """
    if method is not MethodId.YULE_Y:
        return _FORMULAS[method](a, b, c, d), None
    mask = _yule_correction_mask(a, b, c, d)
    raw = _yule_y_raw(a, b, c, d)
    if correction_policy == CORRECT_HALF:
        corrected = _yule_y_raw(
            np.asarray(a, dtype=float) + 0.5,
            np.asarray(b, dtype=float) + 0.5,
            np.asarray(c, dtype=float) + 0.5,
            np.asarray(d, dtype=float) + 0.5,
        )
        values = np.where(mask, corrected, raw)
    elif correction_policy == NO_CORRECTION:
        values = np.where(mask, np.nan, raw)
    else:
        raise ValueError(f"unknown correction policy {correction_policy!r}")
    return (float(values), mask) if np.ndim(values) == 0 else (values, mask)


def estimate(
    method: MethodId,
    table: ContingencyTable,
    correction_policy: str = CORRECT_HALF,
) -> AgreementEstimate:
    """Evaluate one method on one table.

    Parameters
    ----------
    method : MethodId
    table : ContingencyTable
        Real-valued cells are accepted (adjusted tables).
    correction_policy : str
        "correct-0.5" (default) or "none"; only Yule's Y is affected.

    Returns
    -------
    AgreementEstimate
        ``value`` is None when the method's denominator vanishes (and, for
        Y under policy "none", when a zero cell would force a correction).
    """
    if table.total <= 0:
        raise ValueError("empty table: estimators need at least one rated subject")
    a, b, c, d = table.cells
    values, mask = _method_values(method, a, b, c, d, correction_policy)
    value = float(values)
    applied = 0.5 if (mask is not None and bool(mask) and correction_policy == CORRECT_HALF) else None
    return AgreementEstimate(method, None if np.isnan(value) else value, applied)


def estimate_all(
    table: ContingencyTable, correction_policy: str = CORRECT_HALF
) -> dict[MethodId, AgreementEstimate]:
    """All ten methods in MethodId order; never raises on defined input."""
    return {m: estimate(m, table, correction_policy) for m in MethodId}


def chance_agreement(method: MethodId, table: ContingencyTable) -> Optional[float]:
    """The p_e term of the method's (p_a - p_e)/(1 - p_e) decomposition.

    Methods without a chance decomposition (Yule's Y, r11) return None.
    Kept for documentation tests: the closed forms above must equal
    (p_a - p_e)/(1 - p_e) wherever both are defined.
    """
    a, b, c, d = table.cells
    n = table.total
    if n <= 0:
        raise ValueError("empty table")
    if method is MethodId.PERCENT_AGREEMENT:
        return 0.0
    if method is MethodId.COHEN_KAPPA:
        return ((a + b) * (a + c) + (b + d) * (c + d)) / (n * n)
    if method is MethodId.SCOTT_PI:
        w = (2.0 * a + b + c) / (2.0 * n)
        return w * w + (1.0 - w) * (1.0 - w)
    if method is MethodId.KRIPPENDORFF_ALPHA:
        if n == 0.5:
            return None
        w = (2.0 * a + b + c) / (2.0 * n)
        pe_pi = w * w + (1.0 - w) * (1.0 - w)
        return (2.0 * n * pe_pi - 1.0) / (2.0 * n - 1.0)
    if method is MethodId.VAN_OEST_IR2:
        w_pos = (2.0 * a + b + c + 1.0) / (2.0 * n + 2.0)
        w_neg = (2.0 * d + b + c + 1.0) / (2.0 * n + 2.0)
        return w_pos**2 + w_neg**2
    if method is MethodId.MAK_RHO:
        if n < 2:
            return None
        den = (2.0 * a + b + c) * (2.0 * d + b + c) - (b + c)
        return 1.0 - den / (2.0 * n * (n - 1.0))
    if method is MethodId.BENNETT_S:
        return 0.5
    if method is MethodId.GWET_AC1:
        w = (2.0 * a + b + c) / (2.0 * n)
        return 2.0 * w * (1.0 - w)
    return None


def icc_anova(model: str, table: ContingencyTable) -> Optional[float]:
    """Intraclass correlation estimators from the two-rater ANOVA layouts.

    Parameters
    ----------
    model : str
        "no-rater-effect" (one-way random), "random-rater" (two-way random),
        or "fixed-rater" (two-way mixed).
    table : ContingencyTable
        Integer cells, at least two subjects.

    Returns
    -------
    float or None
        None when the relevant mean-square combination vanishes.

    Notes
    -----
    With two raters the mean squares reduce to closed forms in the cell
    proportions; "no-rater-effect" reproduces the agreement statistic of the
    paired-difference estimator exactly, and "fixed-rater" reproduces the
    symmetric-margin product-moment form exactly.
    """
    n = table.total
    if n < 2:
        raise ValueError("ANOVA estimators need at least two subjects")
    a, b, c, d = table.cells
    p11, p10, p01 = a / n, b / n, c / n
    p00 = d / n
    pa = p11 + p00

    ss_s = (n / 2.0) * (pa - (p11 - p00) ** 2)
    if model == "no-rater-effect":
        ms_s = ss_s / (n - 1.0)
        ms_e = ((n / 2.0) * (p10 + p01)) / n
        return _none_if_nan(_safe_div(ms_s - ms_e, ms_s + ms_e))
    if model in ("random-rater", "fixed-rater"):
        ms_s = ss_s / (n - 1.0)
        ms_d = (n / 2.0) * (p10 - p01) ** 2
        ms_e = ((n / 2.0) * ((p10 + p01) - (p10 - p01) ** 2)) / (n - 1.0)
        if model == "fixed-rater":
            return _none_if_nan(_safe_div(ms_s - ms_e, ms_s + ms_e))
        return _none_if_nan(
            _safe_div(n * (ms_s - ms_e), 2.0 * ms_d + n * ms_s + (n - 2.0) * ms_e)
        )
    raise ValueError(f"unknown ANOVA model {model!r}")


def _none_if_nan(x: float) -> Optional[float]:
    return None if np.isnan(x) else float(x)
