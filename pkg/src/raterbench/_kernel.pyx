# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled subject-simulation kernel.

Mirror of ``_kernel_py.tabulate``; the two must agree bit-for-bit. Compiled
with -ffp-contract=off so expression evaluation matches numpy's (no fused
multiply-adds).
"""

import numpy as np

cimport numpy as cnp
from scipy.special.cython_special cimport ndtri

cnp.import_array()

BACKEND_NAME = "compiled"


def tabulate(double[:, :, ::1] u, tuple params):
    """Map a (reps, n, 5) uniform block to (reps, 4) tables (n11,n10,n01,n00)."""
    cdef double theta, p1, p2, m1, m2, mu1u, mu2u, rho_u, s_u
    cdef double mu1c, mu2c, rho_c, s_c, q1, q2
    (theta, p1, p2, m1, m2, mu1u, mu2u, rho_u, s_u,
     mu1c, mu2c, rho_c, s_c, q1, q2) = params

    cdef Py_ssize_t reps = u.shape[0]
    cdef Py_ssize_t n = u.shape[1]
    out_arr = np.zeros((reps, 4), dtype=np.int64)
    cdef cnp.int64_t[:, ::1] out = out_arr

    cdef Py_ssize_t r, j
    cdef double u0, v1, v2, u3, v4, z1, z2, z3, z4, dev, l2u
    cdef bint t_pos, unc1, unc2, a1, a2, y1_pos, y2_pos
    cdef bint p1_zero = p1 == 0.0, p1_one = p1 == 1.0
    cdef bint p2_zero = p2 == 0.0, p2_one = p2 == 1.0
    cdef bint m1_pos = m1 > 0.0, m2_pos = m2 > 0.0
    cdef bint rho_u_pos = rho_u > 0.0, rho_c_pos = rho_c > 0.0

    with nogil:
        for r in range(reps):
            for j in range(n):
                u0 = u[r, j, 0]
                v1 = u[r, j, 1]
                v2 = u[r, j, 2]
                u3 = u[r, j, 3]
                v4 = u[r, j, 4]

                t_pos = u0 < theta
                z1 = ndtri(v1)
                z2 = ndtri(v2)
                z4 = ndtri(v4)

                if p1_zero:
                    unc1 = False
                elif p1_one:
                    unc1 = True
                else:
                    unc1 = (mu1u + z1) > 0.0
                if p2_zero:
                    unc2 = False
                elif p2_one:
                    unc2 = True
                else:
                    if rho_u_pos:
                        l2u = mu2u + rho_u * z1 + s_u * z2
                    else:
                        l2u = mu2u + s_u * z2
                    unc2 = l2u > 0.0

                a1 = True
                a2 = True
                if unc1 and unc2:
                    z3 = ndtri(u3)
                    if m1_pos:
                        a1 = (mu1c + z3) > 0.0
                    if m2_pos:
                        if rho_c_pos:
                            a2 = (mu2c + rho_c * z3 + s_c * z4) > 0.0
                        else:
                            a2 = (mu2c + s_c * z4) > 0.0
                elif unc1:
                    if m1_pos:
                        dev = ndtri(q2 + u3 * (1.0 - q2))
                        if rho_c_pos:
                            a1 = (mu1c + rho_c * dev + s_c * z4) > 0.0
                        else:
                            a1 = (mu1c + s_c * z4) > 0.0
                elif unc2:
                    if m2_pos:
                        dev = ndtri(q1 + u3 * (1.0 - q1))
                        if rho_c_pos:
                            a2 = (mu2c + rho_c * dev + s_c * z4) > 0.0
                        else:
                            a2 = (mu2c + s_c * z4) > 0.0

                y1_pos = a1 == t_pos
                y2_pos = a2 == t_pos
                if y1_pos:
                    if y2_pos:
                        out[r, 0] += 1
                    else:
                        out[r, 1] += 1
                else:
                    if y2_pos:
                        out[r, 2] += 1
                    else:
                        out[r, 3] += 1

    return out_arr
