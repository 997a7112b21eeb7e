"""Vectorized numpy implementation of the subject-simulation kernel.

Must stay bit-identical to the compiled kernel in ``_kernel.pyx``: same draw
protocol (one row of five uniforms per subject), same Cephes ndtri/ndtr, same
expression shapes, same degenerate-parameter guards. Any edit here needs the
mirror edit there.
"""

from __future__ import annotations

import numpy as np
from scipy.special import ndtri

BACKEND_NAME = "python"


def tabulate(u: np.ndarray, params: tuple) -> np.ndarray:
    """Map a (reps, n, 5) uniform block to (reps, 4) tables (n11,n10,n01,n00)."""
    (theta, p1, p2, m1, m2, mu1u, mu2u, rho_u, s_u,
     mu1c, mu2c, rho_c, s_c, q1, q2) = params

    u0 = u[..., 0]
    v1 = u[..., 1]
    v2 = u[..., 2]
    u3 = u[..., 3]
    v4 = u[..., 4]

    t_pos = u0 < theta
    z1 = ndtri(v1)
    z2 = ndtri(v2)
    z4 = ndtri(v4)

    shape = t_pos.shape
    if p1 == 0.0:
        unc1 = np.zeros(shape, dtype=bool)
    elif p1 == 1.0:
        unc1 = np.ones(shape, dtype=bool)
    else:
        unc1 = (mu1u + z1) > 0.0
    if p2 == 0.0:
        unc2 = np.zeros(shape, dtype=bool)
    elif p2 == 1.0:
        unc2 = np.ones(shape, dtype=bool)
    else:
        if rho_u > 0.0:
            l2u = mu2u + rho_u * z1 + s_u * z2
        else:
            l2u = mu2u + s_u * z2
        unc2 = l2u > 0.0

    both = unc1 & unc2
    only1 = unc1 & ~unc2
    only2 = ~unc1 & unc2

    # First correctness variate per scenario: shared normal when both raters
    # are uncertain, else the certain rater's truncated deviation.
    z3 = ndtri(u3)
    dev1 = ndtri(q1 + u3 * (1.0 - q1))
    dev2 = ndtri(q2 + u3 * (1.0 - q2))

    a1 = np.ones(shape, dtype=bool)
    if m1 > 0.0:
        l1_both = mu1c + z3
        if rho_c > 0.0:
            l1_mix = mu1c + rho_c * dev2 + s_c * z4
        else:
            l1_mix = mu1c + s_c * z4
        a1 = np.where(both, l1_both > 0.0, a1)
        a1 = np.where(only1, l1_mix > 0.0, a1)
    if m2 > 0.0:
        if rho_c > 0.0:
            l2_both = mu2c + rho_c * z3 + s_c * z4
            l2_mix = mu2c + rho_c * dev1 + s_c * z4
        else:
            l2_both = mu2c + s_c * z4
            l2_mix = l2_both
        a2 = np.where(both, l2_both > 0.0, True)
        a2 = np.where(only2, l2_mix > 0.0, a2)
    else:
        a2 = np.ones(shape, dtype=bool)

    y1_pos = a1 == t_pos
    y2_pos = a2 == t_pos

    flat_reps = u.shape[0]
    out = np.empty((flat_reps, 4), dtype=np.int64)
    out[:, 0] = np.sum(y1_pos & y2_pos, axis=-1)
    out[:, 1] = np.sum(y1_pos & ~y2_pos, axis=-1)
    out[:, 2] = np.sum(~y1_pos & y2_pos, axis=-1)
    out[:, 3] = np.sum(~y1_pos & ~y2_pos, axis=-1)
    return out


def subject(row, params):
    """Scalar transcription of one subject (reference path for the batch).

    Returns (truth, y1, y2, u1, u2) with votes in {+1, -1} and uncertainty
    indicators in {0, 1}.
    """
    (theta, p1, p2, m1, m2, mu1u, mu2u, rho_u, s_u,
     mu1c, mu2c, rho_c, s_c, q1, q2) = params
    u0, v1, v2, u3, v4 = (float(x) for x in row)

    t_pos = u0 < theta
    z1 = float(ndtri(v1))
    z2 = float(ndtri(v2))
    z4 = float(ndtri(v4))

    if p1 == 0.0:
        unc1 = False
    elif p1 == 1.0:
        unc1 = True
    else:
        unc1 = (mu1u + z1) > 0.0
    if p2 == 0.0:
        unc2 = False
    elif p2 == 1.0:
        unc2 = True
    else:
        if rho_u > 0.0:
            l2u = mu2u + rho_u * z1 + s_u * z2
        else:
            l2u = mu2u + s_u * z2
        unc2 = l2u > 0.0

    a1 = True
    a2 = True
    if unc1 and unc2:
        z3 = float(ndtri(u3))
        if m1 > 0.0:
            a1 = (mu1c + z3) > 0.0
        if m2 > 0.0:
            if rho_c > 0.0:
                a2 = (mu2c + rho_c * z3 + s_c * z4) > 0.0
            else:
                a2 = (mu2c + s_c * z4) > 0.0
    elif unc1:
        # Rater 2 is certain; its latent is drawn first (truncated above 0)
        # even though its vote is forced.
        if m1 > 0.0:
            dev2 = float(ndtri(q2 + u3 * (1.0 - q2)))
            if rho_c > 0.0:
                a1 = (mu1c + rho_c * dev2 + s_c * z4) > 0.0
            else:
                a1 = (mu1c + s_c * z4) > 0.0
    elif unc2:
        if m2 > 0.0:
            dev1 = float(ndtri(q1 + u3 * (1.0 - q1)))
            if rho_c > 0.0:
                a2 = (mu2c + rho_c * dev1 + s_c * z4) > 0.0
            else:
                a2 = (mu2c + s_c * z4) > 0.0

    truth = 1 if t_pos else -1
    y1 = truth if a1 else -truth
    y2 = truth if a2 else -truth
    return truth, y1, y2, int(unc1), int(unc2)
