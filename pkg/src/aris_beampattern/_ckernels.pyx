# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twin of ``_pykernels``; same contract, row-by-row scalar loops."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs

cnp.import_array()


def dual_roots(w2, curv, budget, double tol=1e-10, int max_iter=200):
    cdef const double[:, ::1] W = np.ascontiguousarray(w2, dtype=np.float64)
    cdef const double[:, ::1] C = np.ascontiguousarray(curv, dtype=np.float64)
    cdef const double[::1] Pv = np.ascontiguousarray(budget, dtype=np.float64)
    cdef Py_ssize_t B = W.shape[0], L = W.shape[1]
    out_arr = np.zeros(B, dtype=np.float64)
    cw_arr = np.empty(L, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double[::1] cw = cw_arr
    cdef Py_ssize_t b, l
    cdef int it
    cdef double P, f0, bound, lo, hi, e, f, fp, den, psi, dpsi, step, inv_sqrt_p
    with nogil:
        for b in range(B):
            P = Pv[b]
            f0 = 0.0
            bound = 0.0
            for l in range(L):
                cw[l] = C[b, l] * W[b, l]
                f0 += cw[l]
                if cw[l] != 0.0:
                    bound += W[b, l] / C[b, l]
            if not (f0 > P):
                out[b] = 0.0
                continue
            # f(e) < sum_l w_l / (e^2 c_l), so f(hi) < P
            lo = 0.0
            hi = sqrt(bound / P) * (1.0 + 1e-12)
            inv_sqrt_p = 1.0 / sqrt(P)
            e = 0.0
            for it in range(max_iter):
                f = 0.0
                fp = 0.0
                for l in range(L):
                    if cw[l] != 0.0:
                        den = 1.0 + e * C[b, l]
                        f += cw[l] / (den * den)
                        fp += C[b, l] * cw[l] / (den * den * den)
                if fabs(f - P) <= tol * P:
                    break
                if f > P:
                    lo = e
                else:
                    hi = e
                psi = 1.0 / sqrt(f) - inv_sqrt_p
                dpsi = fp / (f * sqrt(f))
                step = e - psi / dpsi
                if step > lo and step < hi:
                    e = step
                else:
                    e = 0.5 * (lo + hi)
                if hi - lo <= 1e-15 * hi:
                    break
            out[b] = e
    return out_arr
