"""Observed-data simulator for the correlated two-step rating process.

Draw protocol: every subject consumes exactly one row of five uniforms,
whatever the scenario, so the scalar, vectorized, and compiled paths all walk
the same stream. Within a row, the first uniform decides the latent truth,
the next two drive the thresholded uncertainty pair, and the last two drive
the correctness pair (the fourth uniform doubles as the shared normal when
both raters are uncertain and as the certain rater's truncated draw in the
mixed case).

Randomness is counter-based: each (master_seed, setting_index,
replicate_index) triple owns an independent Philox stream, so any parallel
schedule regenerates the same tables bit for bit, and any subset of
replicates can be reproduced without replaying the rest.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np
from scipy.special import ndtr

from . import _backend, _kernel_py
from .tables import ContingencyTable
from .truth import Scenario, _threshold_mean

__all__ = [
    "SubjectOutcome",
    "scenario_params",
    "rng_stream",
    "simulate_subject",
    "simulate_study",
    "replicate_tables",
]


class SubjectOutcome(NamedTuple):
    """One simulated subject: latent truth, the two votes, and the two
    uncertainty indicators (diagnostic output; votes are +-1, indicators 0/1)."""

    truth: int
    y1: int
    y2: int
    u1: int
    u2: int


def scenario_params(scenario: Scenario) -> tuple:
    """Flatten a scenario into the 15-tuple the simulation kernels consume.

    The tuple carries the raw probabilities, the latent threshold means
    (+-inf at degenerate probabilities; the kernels guard those branches),
    the conditional-normal coefficients ``s = sqrt(1 - rho^2)``, and the
    truncation offsets ``q_i = Phi(-mu_i^C)`` for the certain rater's
    positive-part draw.
    """
    mu1u = _threshold_mean(scenario.p1)
    mu2u = _threshold_mean(scenario.p2)
    mu1c = _threshold_mean(1.0 - scenario.m1)
    mu2c = _threshold_mean(1.0 - scenario.m2)
    s_u = math.sqrt((1.0 - scenario.rho_u) * (1.0 + scenario.rho_u))
    s_c = math.sqrt((1.0 - scenario.rho_c) * (1.0 + scenario.rho_c))
    q1 = float(ndtr(-mu1c))
    q2 = float(ndtr(-mu2c))
    return (
        scenario.theta,
        scenario.p1,
        scenario.p2,
        scenario.m1,
        scenario.m2,
        mu1u,
        mu2u,
        scenario.rho_u,
        s_u,
        mu1c,
        mu2c,
        scenario.rho_c,
        s_c,
        q1,
        q2,
    )


def rng_stream(
    master_seed: int, setting_index: int = 0, replicate_index: int = 0
) -> np.random.Generator:
    """Independent deterministic stream for one (setting, replicate) pair."""
    if master_seed < 0 or setting_index < 0 or replicate_index < 0:
        raise ValueError("seed and stream indices must be nonnegative")
    counter = np.array([0, 0, replicate_index, setting_index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=master_seed, counter=counter))


def simulate_subject(scenario: Scenario, rng: np.random.Generator) -> SubjectOutcome:
    """Run one subject through the two-step process; consumes five uniforms."""
    outcome = _kernel_py.subject(rng.random(5), scenario_params(scenario))
    return SubjectOutcome(*outcome)


def simulate_study(
    scenario: Scenario, n_subjects: int, rng: np.random.Generator
) -> ContingencyTable:
    """Simulate one study of ``n_subjects`` and tabulate the votes.

    Consumes exactly ``5 * n_subjects`` uniforms in subject order, so the
    result matches aggregating :func:`simulate_subject` over the same stream.
    """
    if n_subjects < 1:
        raise ValueError(f"n_subjects must be >= 1, got {n_subjects!r}")
    u = rng.random((n_subjects, 5))
    counts = _backend.tabulate(u[np.newaxis, :, :], scenario_params(scenario))[0]
    return ContingencyTable(
        int(counts[0]), int(counts[1]), int(counts[2]), int(counts[3])
    )


def replicate_tables(
    scenario: Scenario,
    n_subjects: int,
    reps: int,
    master_seed: int,
    setting_index: int = 0,
) -> np.ndarray:
    """Count tables for ``reps`` replicates of one setting.

    Returns an int64 array of shape (reps, 4) with columns
    (n11, n10, n01, n00); row ``r`` is drawn from
    ``rng_stream(master_seed, setting_index, r)`` and therefore equals the
    table :func:`simulate_study` would produce on that stream.
    """
    if reps < 1:
        raise ValueError(f"reps must be >= 1, got {reps!r}")
    if n_subjects < 1:
        raise ValueError(f"n_subjects must be >= 1, got {n_subjects!r}")
    u = np.empty((reps, n_subjects, 5), dtype=np.float64)
    for r in range(reps):
        rng_stream(master_seed, setting_index, r).random(out=u[r])
    return _backend.tabulate(u, scenario_params(scenario))
