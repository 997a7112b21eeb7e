"""Standard-normal kernel: CDF, quantile, bivariate orthant mass, samplers.

Everything here assumes unit variances. The bivariate pieces are parametrized
by :class:`BvnSpec` (two means plus a correlation); the orthant probability is
the mass of the upper-right quadrant ``P(L1 > 0, L2 > 0)``, which the latent
rating model uses for every joint "both above threshold" probability.

The orthant probability is computed by reducing to a one-dimensional integral
through conditioning,

    P(L1 > 0, L2 > 0) = int_{-mu1}^{inf} phi(z) Phi((mu2 + rho z) / sqrt(1 - rho^2)) dz,

and handing that to adaptive quadrature. Degenerate correlations (rho = 0,
rho = +-1) and infinite means short-circuit to closed forms. Sheppard's
zero-mean arcsine identity is deliberately NOT used here so it can serve as an
independent oracle in the tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.special import ndtr, ndtri

__all__ = [
    "BvnSpec",
    "std_normal_cdf",
    "std_normal_quantile",
    "bvn_upper_orthant",
    "sample_bvn",
    "sample_truncated_normal",
    "sample_conditional_normal",
]


def std_normal_cdf(x):
    """Standard-normal CDF Phi(x).

    Parameters
    ----------
    x : float or array_like
        Evaluation point(s); +-inf map to 1/0.

    Returns
    -------
    float or ndarray
        Phi(x), absolute error below 1e-14.
    """
    return ndtr(x)


def std_normal_quantile(p):
    """Standard-normal quantile Phi^{-1}(p) for p strictly inside (0, 1).

    Parameters
    ----------
    p : float or array_like
        Probability in the open interval (0, 1).

    Returns
    -------
    float or ndarray

    Raises
    ------
    ValueError
        If any element of ``p`` lies outside (0, 1). Callers that need the
        degenerate endpoints handle +-inf themselves.
    """
    arr = np.asarray(p, dtype=float)
    if np.any(arr <= 0.0) or np.any(arr >= 1.0):
        raise ValueError(f"quantile argument must lie in (0, 1), got {p!r}")
    out = ndtri(arr)
    return float(out) if np.isscalar(p) or arr.ndim == 0 else out


@dataclass(frozen=True)
class BvnSpec:
    """Bivariate normal with unit variances: means (mu1, mu2), correlation rho."""

    mu1: float
    mu2: float
    rho: float

    def __post_init__(self):
        if math.isnan(self.mu1) or math.isnan(self.mu2):
            raise ValueError("means must not be NaN")
        if not -1.0 <= self.rho <= 1.0:
            raise ValueError(f"correlation must lie in [-1, 1], got {self.rho!r}")


def _phi(z):
    return math.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)


def bvn_upper_orthant(spec: BvnSpec) -> float:
    """Upper-orthant probability P(L1 > 0, L2 > 0).

    Parameters
    ----------
    spec : BvnSpec
        Means and correlation of the latent pair (unit variances).

    Returns
    -------
    float
        Orthant mass, absolute error <= 1e-10.

    Notes
    -----
    rho = +-1 collapses to the comonotone / antithetic closed forms; infinite
    means reduce to univariate masses. Otherwise the conditioning integral is
    evaluated adaptively from -mu1 upward.
    """
    mu1, mu2, rho = spec.mu1, spec.mu2, spec.rho

    # Degenerate marginals first: an infinite mean pins its indicator.
    if math.isinf(mu1):
        if mu1 < 0:
            return 0.0
        return float(ndtr(mu2)) if not math.isinf(mu2) else (1.0 if mu2 > 0 else 0.0)
    if math.isinf(mu2):
        return float(ndtr(mu1)) if mu2 > 0 else 0.0

    if rho == 0.0:
        return float(ndtr(mu1)) * float(ndtr(mu2))
    if rho == 1.0:
        # L2 - mu2 == L1 - mu1 almost surely.
        return float(ndtr(min(mu1, mu2)))
    if rho == -1.0:
        # L2 - mu2 == -(L1 - mu1): need L1 > 0 and L1 < mu1 + mu2.
        return max(0.0, float(ndtr(mu1) + ndtr(mu2) - 1.0))

    s = math.sqrt((1.0 - rho) * (1.0 + rho))

    def integrand(z):
        return _phi(z) * ndtr((mu2 + rho * z) / s)

    value, _ = quad(integrand, -mu1, np.inf, epsabs=1e-13, epsrel=1e-12, limit=200)
    # Quadrature noise can poke a hair outside [0, 1].
    return min(1.0, max(0.0, value))


def sample_bvn(spec: BvnSpec, rng: np.random.Generator, size=None):
    """Draw (l1, l2) from the bivariate normal given by ``spec``.

    Parameters
    ----------
    spec : BvnSpec
    rng : numpy.random.Generator
    size : int, optional
        When given, returns a pair of arrays of that length.

    Returns
    -------
    (float, float) or (ndarray, ndarray)
    """
    z1 = rng.standard_normal(size)
    z2 = rng.standard_normal(size)
    l1 = spec.mu1 + z1
    l2 = spec.mu2 + spec.rho * z1 + math.sqrt((1.0 - spec.rho) * (1.0 + spec.rho)) * z2
    return l1, l2


def sample_truncated_normal(mu, lower_bound, rng: np.random.Generator, size=None):
    """Draw from N(mu, 1) restricted to (lower_bound, inf) by inverse CDF.

    The uniform is mapped onto (Phi(lower_bound - mu), 1), so the output
    exceeds ``lower_bound`` for every draw and a fixed rng stream reproduces
    exactly on any platform.
    """
    p_lo = float(ndtr(lower_bound - mu))
    u = rng.random(size)
    p = p_lo + u * (1.0 - p_lo)
    # rng.random can return exactly 0; nudge off the boundary atom so the
    # draw stays strictly above the bound.
    p = np.where(p <= p_lo, np.nextafter(p_lo, 1.0), p)
    out = mu + ndtri(p)
    return float(out) if size is None else out


def sample_conditional_normal(
    mu_target, mu_given, rho, observed_value, rng: np.random.Generator, size=None
):
    """Draw from L_target | L_given = observed_value for a unit-variance pair.

    The conditional law is N(mu_target + rho (observed_value - mu_given),
    1 - rho^2); rho = +-1 degenerates to the deterministic shifted value.
    """
    mean = mu_target + rho * (observed_value - mu_given)
    if rho == 1.0 or rho == -1.0:
        if size is None:
            return float(mean)
        return np.broadcast_to(np.asarray(mean, dtype=float), (size,)).copy()
    sd = math.sqrt((1.0 - rho) * (1.0 + rho))
    out = mean + sd * rng.standard_normal(size)
    return float(out) if size is None else out
