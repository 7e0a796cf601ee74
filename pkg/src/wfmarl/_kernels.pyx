# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled superposition kernel; mirrors ``_kernels_py.superposed_velocity``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, exp, log, pow, fabs

cnp.import_array()


def superposed_velocity(const double[::1] px, const double[::1] py, const double[::1] pz,
                        const double[::1] tx, const double[::1] ty, const double[::1] hub,
                        const double[::1] diam, const double[::1] x0, const double[::1] theta,
                        const double[::1] sy0, const double[::1] sz0, const double[::1] m0,
                        const double[::1] e0, const double[::1] alpha,
                        double u_inf, double i0, double window=15.0, double min_ti=0.1):
    cdef Py_ssize_t npts = px.shape[0]
    cdef Py_ssize_t nt = tx.shape[0]
    cdef Py_ssize_t p, i
    cdef double d, xn, added, ti, k, sy, sz, delta, sm, s0, r, rad, c, dy, dz, u, a08, i01
    out = np.empty(npts, dtype=np.float64)
    cdef double[::1] res = out
    i01 = pow(i0, 0.1)
    for p in range(npts):
        u = u_inf
        for i in range(nt):
            d = px[p] - tx[i]
            if d <= 0.0 or d > window * diam[i] or alpha[i] <= 0.0:
                continue
            xn = d / diam[i]
            if xn < min_ti:
                xn = min_ti
            added = 0.9 * pow(alpha[i], 0.8) * i01 * pow(xn, -0.32)
            ti = sqrt(i0 * i0 + added * added)
            k = 0.38 * ti + 0.004
            s0 = sy0[i] * sz0[i]
            if d <= x0[i]:
                sy = sy0[i]
                sz = sz0[i]
                delta = theta[i] * d
            else:
                sy = k * (d - x0[i]) + sy0[i]
                sz = k * (d - x0[i]) + sz0[i]
                if m0[i] <= 0.0 or theta[i] == 0.0:
                    delta = theta[i] * x0[i]
                else:
                    sm = sqrt(m0[i])
                    r = sqrt(sy * sz / s0)
                    delta = (theta[i] * e0[i] / 5.2 * sqrt(s0 / (k * k * m0[i]))
                             * log((1.6 + sm) * (1.6 * r - sm) / ((1.6 - sm) * (1.6 * r + sm)))
                             + theta[i] * x0[i])
            rad = 1.0 - s0 * m0[i] / (sy * sz)
            if rad < 0.0:
                rad = 0.0
            elif rad > 1.0:
                rad = 1.0
            c = 1.0 - sqrt(rad)
            dy = py[p] - ty[i] - delta
            dz = pz[p] - hub[i]
            u -= u_inf * c * exp(-dy * dy / (2.0 * sy * sy)) * exp(-dz * dz / (2.0 * sz * sz))
        if u < 0.0:
            u = 0.0
        elif u > u_inf:
            u = u_inf
        res[p] = u
    return out
