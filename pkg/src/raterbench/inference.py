"""Large-sample variances and confidence intervals for the agreement methods.

Each method gets the linearization-based variance of its point estimator:
percent agreement and Bennett's S from binomial moments, Cohen's kappa /
Scott's pi / Gwet's AC1 / Krippendorff's alpha from per-subject influence
functions of the (p_a - p_e)/(1 - p_e) form, Mak's rho / r11 / Ir2 from the
shared intraclass-kappa variance with their own point estimate substituted,
and Yule's Y from the delta method on +0.5-corrected counts.

Intervals are Wald (point +- z * SE, clamped to [-1, 1]) for everything
except Yule's Y, which uses the tanh/arctanh interval on the corrected
counts; a zero variance yields the degenerate interval [value, value].

Like the point estimators, every formula is written against array-or-scalar
cells so the Monte Carlo harness can process replicate batches in one call;
undefined values are NaN at the array layer and ``None`` on
:class:`IntervalEstimate`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .estimators import CORRECT_HALF, MethodId, _method_values, _safe_div, estimate
from .gaussian import std_normal_quantile
from .tables import ContingencyTable

__all__ = [
    "WALD",
    "BONETT_TANH",
    "IntervalEstimate",
    "variance",
    "variance_values",
    "confidence_interval",
    "interval_values",
]

WALD = "wald"
BONETT_TANH = "bonett-tanh"

# A variance this far below zero is rounding noise on an algebraically zero
# value; anything lower is treated as undefined rather than silently fixed.
_NEGATIVE_TOLERANCE = 1e-15


@dataclass(frozen=True)
class IntervalEstimate:
    """One method's variance and confidence bounds on one table.

    ``variance``, ``lower`` and ``upper`` are all None when the variance is
    undefined; ``clamped`` records whether a raw Wald bound fell outside
    [-1, 1] and was pulled back.
    """

    method: MethodId
    variance: Optional[float]
    lower: Optional[float]
    upper: Optional[float]
    level: float
    interval_kind: str
    clamped: bool = False

    @property
    def defined(self) -> bool:
        return self.variance is not None


def _proportions(a, b, c, d):
    n = np.asarray(a + b + c + d, dtype=float)
    return (
        _safe_div(a, n),
        _safe_div(b, n),
        _safe_div(c, n),
        _safe_div(d, n),
        n if n.ndim else float(n),
    )


def _var_percent_agreement(a, b, c, d):
    p11, p10, p01, p00, n = _proportions(a, b, c, d)
    pa = p11 + p00
    return _safe_div(pa * (1.0 - pa), n)


def _var_bennett_s(a, b, c, d):
    p11, p10, p01, p00, n = _proportions(a, b, c, d)
    pa = p11 + p00
    return _safe_div(4.0 * pa * (1.0 - pa), n)


def _var_cohen_kappa(a, b, c, d):
    p11, p10, p01, p00, n = _proportions(a, b, c, d)
    pa = p11 + p00
    w = p11 + 0.5 * (p10 + p01)
    row = p11 + p10
    col = p11 + p01
    pe = row * col + (1.0 - row) * (1.0 - col)
    k = _safe_div(pa - pe, 1.0 - pe)
    braced = (
        pa * (1.0 - pa)
        - 4.0 * (1.0 - k) * (p11 * w + p00 * (1.0 - w) - k * pe)
        + 4.0
        * (1.0 - k) ** 2
        * (
            p11 * w**2
            + 0.25 * p10 * (2.0 * p01 + pa) ** 2
            + 0.25 * p01 * (2.0 * p10 + pa) ** 2
            + p00 * (1.0 - w) ** 2
        )
    )
    return _safe_div(braced, n * (1.0 - pe) ** 2)


def _var_scott_pi(a, b, c, d):
    p11, p10, p01, p00, n = _proportions(a, b, c, d)
    pa = p11 + p00
    w = p11 + 0.5 * (p10 + p01)
    pe = w * w + (1.0 - w) * (1.0 - w)
    pi = _safe_div(pa - pe, 1.0 - pe)
    braced = (
        pa * (1.0 - pa)
        - 4.0 * (1.0 - pi) * (p11 * w + p00 * (1.0 - w) - pa * pe)
        + 4.0
        * (1.0 - pi) ** 2
        * (p11 * w**2 + 0.25 * (p10 + p01) + p00 * (1.0 - w) ** 2 - pe**2)
    )
    return _safe_div(braced, n * (1.0 - pe) ** 2)


def _var_gwet_ac1(a, b, c, d):
    p11, p10, p01, p00, n = _proportions(a, b, c, d)
    pa = p11 + p00
    w = p11 + 0.5 * (p10 + p01)
    pe = 2.0 * w * (1.0 - w)
    g = _safe_div(pa - pe, 1.0 - pe)
    braced = (
        pa * (1.0 - pa)
        - 4.0 * (1.0 - g) * (p11 * (1.0 - w) + p00 * w - pa * pe)
        + 4.0
        * (1.0 - g) ** 2
        * (p11 * (1.0 - w) ** 2 + 0.25 * (p10 + p01) + p00 * w**2 - pe**2)
    )
    return _safe_div(braced, n * (1.0 - pe) ** 2)


def _var_krippendorff_alpha(a, b, c, d):
    # alpha = pi + (1 - pi)/(2N), so alpha's influence function is pi's; the
    # variance is the second moment of the per-subject linearized value u
    # about its mean, and the mean satisfies E[u] = pi - pe*(1 - pi).
    p11, p10, p01, p00, n = _proportions(a, b, c, d)
    pa = p11 + p00
    w = p11 + 0.5 * (p10 + p01)
    pe = w * w + (1.0 - w) * (1.0 - w)
    ap = _safe_div(pa - pe, 1.0 - pe)
    u11 = 1.0 - 2.0 * (1.0 - ap) * w
    u_mix = -(1.0 - ap)
    u00 = 1.0 - 2.0 * (1.0 - ap) * (1.0 - w)
    mean = ap - pe * (1.0 - ap)
    braced = p11 * u11**2 + (p10 + p01) * u_mix**2 + p00 * u00**2 - mean**2
    return _safe_div(braced, n * (1.0 - pe) ** 2)


def _var_yule_y(a, b, c, d):
    # Always evaluated on +0.5-corrected counts, which keeps every cell
    # positive and the corrected point strictly inside (-1, 1).
    a2 = np.asarray(a, dtype=float) + 0.5
    b2 = np.asarray(b, dtype=float) + 0.5
    c2 = np.asarray(c, dtype=float) + 0.5
    d2 = np.asarray(d, dtype=float) + 0.5
    sq_ad = np.sqrt(a2 * d2)
    sq_bc = np.sqrt(b2 * c2)
    y = (sq_ad - sq_bc) / (sq_ad + sq_bc)
    out = (1.0 - y * y) ** 2 * (1.0 / a2 + 1.0 / b2 + 1.0 / c2 + 1.0 / d2) / 16.0
    return float(out) if out.ndim == 0 else out


def _var_intraclass(method, a, b, c, d):
    p11, p10, p01, p00, n = _proportions(a, b, c, d)
    w = p11 + 0.5 * (p10 + p01)
    e, _ = _method_values(method, a, b, c, d)
    bracket = (1.0 - e) * (1.0 - 2.0 * e) + _safe_div(
        e * (2.0 - e), 2.0 * w * (1.0 - w)
    )
    return _safe_div((1.0 - e) * bracket, n)


_VARIANCES = {
    MethodId.PERCENT_AGREEMENT: _var_percent_agreement,
    MethodId.COHEN_KAPPA: _var_cohen_kappa,
    MethodId.SCOTT_PI: _var_scott_pi,
    MethodId.KRIPPENDORFF_ALPHA: _var_krippendorff_alpha,
    MethodId.BENNETT_S: _var_bennett_s,
    MethodId.YULE_Y: _var_yule_y,
    MethodId.GWET_AC1: _var_gwet_ac1,
}


def variance_values(method, a, b, c, d):
    """Array-level variance evaluation shared by the scalar API and the harness.

    NaN marks an undefined variance (undefined point estimate, vanishing
    denominator, or a materially negative formula value); rounding noise in
    [-1e-15, 0) is clamped to 0.
    """
    if method in _VARIANCES:
        raw = _VARIANCES[method](a, b, c, d)
    else:
        raw = _var_intraclass(method, a, b, c, d)
    raw_a = np.asarray(raw, dtype=float)
    with np.errstate(invalid="ignore"):
        out = np.where(
            raw_a < 0.0,
            np.where(raw_a >= -_NEGATIVE_TOLERANCE, 0.0, np.nan),
            raw_a,
        )
    return float(out) if out.ndim == 0 else out


def interval_values(method, a, b, c, d, level: float = 0.95):
    """(lower, upper) bound arrays at the given level; NaN where undefined."""
    z = std_normal_quantile(0.5 + 0.5 * level)
    if method is MethodId.YULE_Y:
        a2 = np.asarray(a, dtype=float) + 0.5
        b2 = np.asarray(b, dtype=float) + 0.5
        c2 = np.asarray(c, dtype=float) + 0.5
        d2 = np.asarray(d, dtype=float) + 0.5
        sq_ad = np.sqrt(a2 * d2)
        sq_bc = np.sqrt(b2 * c2)
        center = np.arctanh((sq_ad - sq_bc) / (sq_ad + sq_bc))
        half = z * 0.25 * np.sqrt(1.0 / a2 + 1.0 / b2 + 1.0 / c2 + 1.0 / d2)
        lower = np.tanh(center - half)
        upper = np.tanh(center + half)
    else:
        var = np.asarray(variance_values(method, a, b, c, d), dtype=float)
        point, _ = _method_values(method, a, b, c, d)
        with np.errstate(invalid="ignore"):
            half = z * np.sqrt(var)
            lower = np.clip(point - half, -1.0, 1.0)
            upper = np.clip(point + half, -1.0, 1.0)
        lower = np.where(np.isnan(var), np.nan, lower)
        upper = np.where(np.isnan(var), np.nan, upper)
    if np.ndim(lower) == 0:
        return float(lower), float(upper)
    return lower, upper


def variance(method: MethodId, table: ContingencyTable) -> Optional[float]:
    """Large-sample variance of one method's estimate on one table.

    Parameters
    ----------
    method : MethodId
    table : ContingencyTable
        At least two subjects.

    Returns
    -------
    float or None
        None when the point estimate is undefined or a variance denominator
        vanishes.
    """
    if table.total < 2:
        raise ValueError("variance estimation needs at least two subjects")
    if estimate(method, table).value is None:
        return None
    a, b, c, d = table.cells
    v = variance_values(method, float(a), float(b), float(c), float(d))
    return None if np.isnan(v) else float(v)


def confidence_interval(
    method: MethodId, table: ContingencyTable, level: float = 0.95
) -> IntervalEstimate:
    """Confidence interval around one method's estimate on one table.

    Wald bounds (clamped to [-1, 1]) for all methods except Yule's Y, which
    gets the tanh/arctanh interval centered on the +0.5-corrected value. An
    undefined variance yields an IntervalEstimate with all-None values.
    """
    if not 0.0 < level < 1.0:
        raise ValueError(f"confidence level must be in (0, 1), got {level!r}")
    kind = BONETT_TANH if method is MethodId.YULE_Y else WALD
    var = variance(method, table)
    if var is None:
        return IntervalEstimate(method, None, None, None, level, kind)
    a, b, c, d = (float(x) for x in table.cells)
    if method is MethodId.YULE_Y:
        lower, upper = interval_values(method, a, b, c, d, level)
        return IntervalEstimate(method, var, lower, upper, level, kind)
    z = std_normal_quantile(0.5 + 0.5 * level)
    point = estimate(method, table).value
    half = z * math.sqrt(var)
    raw_lower = point - half
    raw_upper = point + half
    lower = max(raw_lower, -1.0)
    upper = min(raw_upper, 1.0)
    clamped = (lower != raw_lower) or (upper != raw_upper)
    return IntervalEstimate(method, var, lower, upper, level, kind, clamped)
