# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops; see ``_fallback`` for the reference numpy versions."""

import numpy as np
cimport numpy as cnp
from libc.math cimport M_PI

cnp.import_array()

def apply_two_site(X, gate, Py_ssize_t q, Py_ssize_t L, Py_ssize_t i, Py_ssize_t j):
    """Return ``G_ij @ X`` where ``G_ij`` is ``gate`` acting on sites (i, j)."""
    Xa = np.ascontiguousarray(X, dtype=np.complex128)
    if Xa.ndim != 2:
        raise ValueError("X must be 2-dimensional")
    G = np.ascontiguousarray(gate, dtype=np.complex128)
    cdef Py_ssize_t D = Xa.shape[0]
    cdef Py_ssize_t K2 = 2 * Xa.shape[1]
    cdef Py_ssize_t qq = q * q
    # Complex rows are read as interleaved (re, im) doubles so the inner loop
    # is plain real arithmetic over a contiguous row.
    cdef const double[:, ::1] x = Xa.view(np.float64)
    cdef const double[:, ::1] gr = np.ascontiguousarray(G.real)
    cdef const double[:, ::1] gi = np.ascontiguousarray(G.imag)
    out_arr = np.zeros((D, Xa.shape[1]), dtype=np.complex128)
    cdef double[:, ::1] out = out_arr.view(np.float64)
    cdef Py_ssize_t si = 1, sj = 1, p
    for p in range(L - 1 - i):
        si *= q
    for p in range(L - 1 - j):
        sj *= q
    cdef Py_ssize_t[::1] idx = np.empty(qq, dtype=np.intp)
    cdef Py_ssize_t n, a, b, r, c, k
    cdef double ar, ai, xr, xi
    cdef double* orow
    cdef const double* xrow
    for n in range(D):
        if (n // si) % q != 0 or (n // sj) % q != 0:
            continue
        for a in range(q):
            for b in range(q):
                idx[a * q + b] = n + a * si + b * sj
        for r in range(qq):
            orow = &out[idx[r], 0]
            for c in range(qq):
                ar = gr[r, c]
                ai = gi[r, c]
                if ar == 0.0 and ai == 0.0:
                    continue
                xrow = &x[idx[c], 0]
                for k in range(0, K2, 2):
                    xr = xrow[k]
                    xi = xrow[k + 1]
                    orow[k] += ar * xr - ai * xi
                    orow[k + 1] += ar * xi + ai * xr
    return out_arr


def channel_series(M, v0, s, Py_ssize_t t_max):
    """values[t] = s . (M^t v0), by repeated matrix-vector products."""
    Ma = np.ascontiguousarray(M, dtype=np.complex128)
    cdef const double[:, ::1] mr = np.ascontiguousarray(Ma.real)
    cdef const double[:, ::1] mi = np.ascontiguousarray(Ma.imag)
    cdef Py_ssize_t d = mr.shape[0]
    v_arr = np.array(v0, dtype=np.complex128).ravel()
    w_arr = np.ascontiguousarray(s, dtype=np.complex128).ravel()
    cdef double[::1] vr = np.ascontiguousarray(v_arr.real)
    cdef double[::1] vi = np.ascontiguousarray(v_arr.imag)
    cdef const double[::1] wr = np.ascontiguousarray(w_arr.real)
    cdef const double[::1] wi = np.ascontiguousarray(w_arr.imag)
    cdef double[::1] nr = np.empty(d)
    cdef double[::1] ni = np.empty(d)
    values_arr = np.empty(t_max + 1, dtype=np.complex128)
    cdef double[:, ::1] values = values_arr.view(np.float64).reshape(t_max + 1, 2)
    cdef Py_ssize_t t, r, c
    cdef double accr, acci
    for t in range(t_max + 1):
        accr = 0.0
        acci = 0.0
        for r in range(d):
            accr += wr[r] * vr[r] - wi[r] * vi[r]
            acci += wr[r] * vi[r] + wi[r] * vr[r]
        values[t, 0] = accr
        values[t, 1] = acci
        if t == t_max:
            break
        for r in range(d):
            accr = 0.0
            acci = 0.0
            for c in range(d):
                accr += mr[r, c] * vr[c] - mi[r, c] * vi[c]
                acci += mr[r, c] * vi[c] + mi[r, c] * vr[c]
            nr[r] = accr
            ni[r] = acci
        vr, nr = nr, vr
        vi, ni = ni, vi
    return values_arr


def spacing_ratios(phases, double min_spacing):
    """Cyclic consecutive-spacing ratios of sorted phases in (-pi, pi].

    Returns ``(ratios, spacings, n_excluded)``; spacings below ``min_spacing``
    are dropped before ratios are formed.
    """
    cdef const double[::1] th = np.ascontiguousarray(phases, dtype=np.float64)
    cdef Py_ssize_t N = th.shape[0]
    spacings_arr = np.empty(N, dtype=np.float64)
    cdef double[::1] sp = spacings_arr
    cdef Py_ssize_t n, kept = 0
    if N == 0:
        return np.empty(0), spacings_arr, 0
    for n in range(N - 1):
        sp[n] = th[n + 1] - th[n]
    sp[N - 1] = th[0] + 2.0 * M_PI - th[N - 1]
    keep_arr = np.empty(N, dtype=np.float64)
    cdef double[::1] keep = keep_arr
    for n in range(N):
        if sp[n] >= min_spacing:
            keep[kept] = sp[n]
            kept += 1
    ratios_arr = np.empty(kept if kept > 1 else 0, dtype=np.float64)
    cdef double[::1] rr = ratios_arr
    cdef double s1, s2
    if kept > 1:
        for n in range(kept):
            s1 = keep[n]
            s2 = keep[(n + 1) % kept]
            rr[n] = s1 / s2 if s1 < s2 else s2 / s1
    return ratios_arr, spacings_arr, N - kept
