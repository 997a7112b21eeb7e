"""Population-level agreement quantities for the correlated two-step rating model.

The model: each subject has a latent binary truth (prevalence ``theta``).
In step I, rater i encounters uncertainty with probability ``p_i``; the two
raters' uncertainty indicators are thresholded from a bivariate normal with
correlation ``rho_u``. In step II, an uncertain rater votes against the truth
with probability ``m_i``; correctness indicators come from a second bivariate
normal with correlation ``rho_c``. A certain rater always votes the truth.

This module evaluates the exact joint probabilities this process induces: the
uncertainty-status probabilities U.., the correctness probabilities C.. with
their conditionals and phi coefficient ``gamma``, the 4x4 truth table
cross-classifying uncertainty status against votes, the 2x2 cell
probabilities, and the benchmark chance-corrected agreement K (plus its
reduced always-uncertain form and the alternative K*). K depends on
(p1, p2, m1, m2, rho_u, rho_c) only, never on ``theta``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .gaussian import BvnSpec, bvn_upper_orthant, std_normal_quantile

__all__ = [
    "Scenario",
    "UncertaintyProbs",
    "CorrectnessProbs",
    "TruthTable",
    "TrueCellProbs",
    "uncertainty_probs",
    "correctness_probs",
    "truth_table",
    "theoretical_cell_probs",
    "p_a_true",
    "true_k",
    "true_k_reduced",
    "k_star",
]


@dataclass(frozen=True)
class Scenario:
    """One parameter constellation of the rating model.

    theta in (0, 1); p1, p2 in [0, 1]; m1, m2 in [0, 0.5] (an uncertain
    rational rater does no worse than coin flipping); rho_u, rho_c in [0, 1).
    """

    theta: float
    p1: float
    p2: float
    m1: float
    m2: float
    rho_u: float
    rho_c: float

    def __post_init__(self) -> None:
        if not 0.0 < self.theta < 1.0:
            raise ValueError(f"theta must be in (0, 1), got {self.theta!r}")
        for name in ("p1", "p2"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {v!r}")
        for name in ("m1", "m2"):
            v = getattr(self, name)
            if not 0.0 <= v <= 0.5:
                raise ValueError(f"{name} must be in [0, 0.5], got {v!r}")
        for name in ("rho_u", "rho_c"):
            v = getattr(self, name)
            if not 0.0 <= v < 1.0:
                raise ValueError(f"{name} must be in [0, 1), got {v!r}")


class UncertaintyProbs(NamedTuple):
    """Joint uncertainty-status probabilities; subscript order is (rater1, rater2)."""

    u11: float
    u10: float
    u01: float
    u00: float


class CorrectnessProbs(NamedTuple):
    """Joint correctness probabilities, the certain-rater conditionals, and gamma.

    ``c1_given_2`` is the probability that rater 1 decides correctly given
    rater 2 does; ``gamma`` is the phi coefficient of the two correctness
    indicators, None when a degenerate marginal (m_i = 0) leaves it 0/0 --
    except m1 = m2 = 0 with rho_c > 0, which is pinned to 1.
    """

    c11: float
    c10: float
    c01: float
    c00: float
    c1_given_2: float
    c2_given_1: float
    gamma: Optional[float]


@dataclass(frozen=True, eq=False)
class TruthTable:
    """The 4x4 joint table of (uncertainty status x vote) pairs.

    Rows index rater 1 and columns rater 2, both in the order
    [uncertain +, uncertain -, certain +, certain -]. The two certain/certain
    disagreement cells are structural zeros.
    """

    cells: np.ndarray
    uncertainty: UncertaintyProbs
    correctness: CorrectnessProbs


class TrueCellProbs(NamedTuple):
    """Population 2x2 cell probabilities (vote1, vote2) with + first."""

    p11: float
    p10: float
    p01: float
    p00: float


def _threshold_mean(prob: float) -> float:
    """Latent mean giving P(latent > 0) = prob, with degenerate endpoints."""
    if prob <= 0.0:
        return -math.inf
    if prob >= 1.0:
        return math.inf
    return std_normal_quantile(prob)


def uncertainty_probs(p1: float, p2: float, rho_u: float) -> UncertaintyProbs:
    """Joint uncertainty probabilities from the step-I latent thresholds."""
    if not 0.0 <= p1 <= 1.0 or not 0.0 <= p2 <= 1.0:
        raise ValueError("uncertainty probabilities must be in [0, 1]")
    if not 0.0 <= rho_u < 1.0:
        raise ValueError(f"rho_u must be in [0, 1), got {rho_u!r}")
    u11 = bvn_upper_orthant(BvnSpec(_threshold_mean(p1), _threshold_mean(p2), rho_u))
    u10 = max(0.0, p1 - u11)
    u01 = max(0.0, p2 - u11)
    u00 = max(0.0, 1.0 - u11 - u10 - u01)
    return UncertaintyProbs(u11, u10, u01, u00)


def correctness_probs(m1: float, m2: float, rho_c: float) -> CorrectnessProbs:
    """Joint correctness probabilities, conditionals, and gamma for step II."""
    if not 0.0 <= m1 <= 0.5 or not 0.0 <= m2 <= 0.5:
        raise ValueError("misclassification probabilities must be in [0, 0.5]")
    if not 0.0 <= rho_c < 1.0:
        raise ValueError(f"rho_c must be in [0, 1), got {rho_c!r}")
    c11 = bvn_upper_orthant(
        BvnSpec(_threshold_mean(1.0 - m1), _threshold_mean(1.0 - m2), rho_c)
    )
    c10 = max(0.0, (1.0 - m1) - c11)
    c01 = max(0.0, (1.0 - m2) - c11)
    c00 = max(0.0, 1.0 - c11 - c10 - c01)
    # the correctness marginals are 1 - m_i >= 1/2, so the conditionals
    # never divide by zero
    c1_given_2 = c11 / (1.0 - m2)
    c2_given_1 = c11 / (1.0 - m1)
    den = math.sqrt(m1 * m2 * (1.0 - m1) * (1.0 - m2))
    if den == 0.0:
        gamma = 1.0 if (m1 == 0.0 and m2 == 0.0 and rho_c > 0.0) else None
    else:
        gamma = (c00 * c11 - c10 * c01) / den
        # gamma lies in [0, 1] for rho_c >= 0; shave off quadrature rounding
        if -1e-12 < gamma < 0.0:
            gamma = 0.0
        elif 1.0 < gamma < 1.0 + 1e-12:
            gamma = 1.0
    return CorrectnessProbs(c11, c10, c01, c00, c1_given_2, c2_given_1, gamma)


def truth_table(scenario: Scenario) -> TruthTable:
    """Assemble the 4x4 (uncertainty status x vote) joint probability table."""
    u = uncertainty_probs(scenario.p1, scenario.p2, scenario.rho_u)
    c = correctness_probs(scenario.m1, scenario.m2, scenario.rho_c)
    t = scenario.theta
    s = 1.0 - t
    c12 = c.c1_given_2
    c21 = c.c2_given_1
    cells = np.array(
        [
            [
                u.u11 * (t * c.c11 + s * c.c00),
                u.u11 * (t * c.c10 + s * c.c01),
                u.u10 * t * c12,
                u.u10 * s * (1.0 - c12),
            ],
            [
                u.u11 * (t * c.c01 + s * c.c10),
                u.u11 * (t * c.c00 + s * c.c11),
                u.u10 * t * (1.0 - c12),
                u.u10 * s * c12,
            ],
            [
                u.u01 * t * c21,
                u.u01 * t * (1.0 - c21),
                u.u00 * t,
                0.0,
            ],
            [
                u.u01 * s * (1.0 - c21),
                u.u01 * s * c21,
                0.0,
                u.u00 * s,
            ],
        ]
    )
    return TruthTable(cells, u, c)


def theoretical_cell_probs(scenario: Scenario) -> TrueCellProbs:
    """Population 2x2 cell probabilities (the vote-block sums of the truth table)."""
    u = uncertainty_probs(scenario.p1, scenario.p2, scenario.rho_u)
    c = correctness_probs(scenario.m1, scenario.m2, scenario.rho_c)
    t = scenario.theta
    s = 1.0 - t
    c12 = c.c1_given_2
    c21 = c.c2_given_1
    p11 = u.u11 * (t * c.c11 + s * c.c00) + u.u10 * t * c12 + u.u01 * t * c21 + u.u00 * t
    p10 = u.u11 * (t * c.c10 + s * c.c01) + u.u10 * s * (1.0 - c12) + u.u01 * t * (1.0 - c21)
    p01 = u.u11 * (t * c.c01 + s * c.c10) + u.u10 * t * (1.0 - c12) + u.u01 * s * (1.0 - c21)
    p00 = u.u11 * (t * c.c00 + s * c.c11) + u.u10 * s * c12 + u.u01 * s * c21 + u.u00 * s
    return TrueCellProbs(p11, p10, p01, p00)


def p_a_true(scenario: Scenario) -> float:
    """Population total agreement: diagonal mass of the truth table."""
    u = uncertainty_probs(scenario.p1, scenario.p2, scenario.rho_u)
    c = correctness_probs(scenario.m1, scenario.m2, scenario.rho_c)
    return (
        u.u11 * (c.c11 + c.c00)
        + u.u10 * c.c1_given_2
        + u.u01 * c.c2_given_1
        + u.u00
    )


def true_k(scenario: Scenario) -> Optional[float]:
    """Benchmark chance-corrected agreement K; None when undefined.

    Agreement earned while at least one rater is uncertain counts as true
    agreement only in proportion gamma (one uncertain) or gamma^2 (both
    uncertain); the rest is chance. K is (p_a - p_e)/(1 - p_e) under that
    split and does not involve theta.
    """
    u = uncertainty_probs(scenario.p1, scenario.p2, scenario.rho_u)
    c = correctness_probs(scenario.m1, scenario.m2, scenario.rho_c)
    both = u.u11 * (c.c11 + c.c00)
    mixed = u.u10 * c.c1_given_2 + u.u01 * c.c2_given_1
    pa = both + mixed + u.u00
    gamma = c.gamma
    if gamma is None:
        # gamma is 0/0 only when some m_i = 0; if that degeneracy forces
        # p_a = 1 the value of gamma cannot matter and K = 1, otherwise K
        # is genuinely indeterminate
        return 1.0 if pa >= 1.0 - 1e-12 else None
    num = u.u00 + gamma * (gamma * both + mixed)
    den = 1.0 - (1.0 - gamma) * ((1.0 + gamma) * both + mixed)
    if den == 0.0:
        return None
    return num / den


def true_k_reduced(m1: float, m2: float, rho_c: float) -> Optional[float]:
    """K for the always-uncertain model (p1 = p2 = 1); None when undefined."""
    c = correctness_probs(m1, m2, rho_c)
    pa = c.c11 + c.c00
    gamma = c.gamma
    if gamma is None:
        return 1.0 if pa >= 1.0 - 1e-12 else None
    den = 1.0 - (1.0 - gamma * gamma) * pa
    if den == 0.0:
        return None
    return gamma * gamma * pa / den


def k_star(scenario: Scenario) -> Optional[float]:
    """Alternative benchmark using a closed-form chance term; None when undefined.

    The chance term counts agreement reachable through at least one uncertain
    vote: p_e* = 2 p1 p2 m1 m2 + (1 - m1) p1 + (1 - m2) p2 - p1 p2.
    """
    cells = theoretical_cell_probs(scenario)
    pa = cells.p11 + cells.p00
    pe = (
        2.0 * scenario.p1 * scenario.p2 * scenario.m1 * scenario.m2
        + (1.0 - scenario.m1) * scenario.p1
        + (1.0 - scenario.m2) * scenario.p2
        - scenario.p1 * scenario.p2
    )
    if pe == 1.0:
        return None
    return (pa - pe) / (1.0 - pe)
