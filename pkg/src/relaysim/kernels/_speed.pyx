# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels: fused loops for the phasor-heavy inner sums.

Mirrors ``_pure.py``; complex values are handled as interleaved doubles to
keep every loop in plain C arithmetic.  Selected at import by
``relaysim.kernels``.
"""
import numpy as np

from libc.math cimport cos, sin


def cis(theta):
    arr = np.ascontiguousarray(theta, dtype=np.float64)
    flat = arr.ravel()
    cdef double[::1] t = flat
    cdef Py_ssize_t n = t.shape[0]
    out = np.empty(n, dtype=np.complex128)
    cdef double[::1] o = out.view(np.float64)
    cdef Py_ssize_t i
    for i in range(n):
        o[2 * i] = cos(t[i])
        o[2 * i + 1] = sin(t[i])
    return out.reshape(arr.shape)


def upa_phases(alpha, beta, int n_h, int n_v):
    cdef double[::1] a = np.ascontiguousarray(alpha, dtype=np.float64)
    cdef double[::1] b = np.ascontiguousarray(beta, dtype=np.float64)
    cdef Py_ssize_t n_r = a.shape[0]
    u = np.empty((n_h, n_r), dtype=np.complex128)
    v = np.empty((n_v, n_r), dtype=np.complex128)
    out = np.empty((n_h * n_v, n_r), dtype=np.complex128)
    cdef double[:, ::1] uv = u.view(np.float64)
    cdef double[:, ::1] vv = v.view(np.float64)
    cdef double[:, ::1] ov = out.view(np.float64)
    cdef Py_ssize_t ih, iv, r, row
    cdef double ph, ur, ui, vr, vi
    for ih in range(n_h):
        for r in range(n_r):
            ph = ih * a[r]
            uv[ih, 2 * r] = cos(ph)
            uv[ih, 2 * r + 1] = sin(ph)
    for iv in range(n_v):
        for r in range(n_r):
            ph = iv * b[r]
            vv[iv, 2 * r] = cos(ph)
            vv[iv, 2 * r + 1] = sin(ph)
    for iv in range(n_v):
        for ih in range(n_h):
            row = iv * n_h + ih
            for r in range(n_r):
                ur = uv[ih, 2 * r]
                ui = uv[ih, 2 * r + 1]
                vr = vv[iv, 2 * r]
                vi = vv[iv, 2 * r + 1]
                ov[row, 2 * r] = vr * ur - vi * ui
                ov[row, 2 * r + 1] = vr * ui + vi * ur
    return out


cdef _fill_phasor_table(double[::1] pha, double[::1] phb, double[::1] freqs,
                        double[:, ::1] table):
    """table[n] = exp(j(pha[n] + phb[n] f)) over freqs, interleaved re/im.

    Uses a rotation recurrence on uniform grids, direct evaluation otherwise.
    """
    cdef Py_ssize_t n = pha.shape[0], n_f = freqs.shape[0]
    cdef Py_ssize_t i, k
    cdef double step = 0.0, dev = 0.0, ph
    cdef double rr, ri, cr, ci, tr
    cdef bint uniform = n_f > 2
    if uniform:
        step = freqs[1] - freqs[0]
        for k in range(1, n_f):
            dev = freqs[k] - freqs[k - 1] - step
            if dev > 1e-9 * abs(step) or dev < -1e-9 * abs(step):
                uniform = False
                break
    for i in range(n):
        if uniform:
            ph = pha[i] + phb[i] * freqs[0]
            cr = cos(ph)
            ci = sin(ph)
            ph = phb[i] * step
            rr = cos(ph)
            ri = sin(ph)
            for k in range(n_f):
                table[i, 2 * k] = cr
                table[i, 2 * k + 1] = ci
                tr = cr * rr - ci * ri
                ci = cr * ri + ci * rr
                cr = tr
        else:
            for k in range(n_f):
                ph = pha[i] + phb[i] * freqs[k]
                table[i, 2 * k] = cos(ph)
                table[i, 2 * k + 1] = sin(ph)


def cascade_response(L, pha_rd, phb_rd, pha_sr, phb_sr, freqs):
    lm = np.ascontiguousarray(L, dtype=np.complex128)
    cdef double[:, ::1] lv = lm.view(np.float64)
    cdef double[::1] a_rd = np.ascontiguousarray(pha_rd, dtype=np.float64)
    cdef double[::1] b_rd = np.ascontiguousarray(phb_rd, dtype=np.float64)
    cdef double[::1] a_sr = np.ascontiguousarray(pha_sr, dtype=np.float64)
    cdef double[::1] b_sr = np.ascontiguousarray(phb_sr, dtype=np.float64)
    cdef double[::1] fr = np.ascontiguousarray(freqs, dtype=np.float64)
    cdef Py_ssize_t n_rd = lm.shape[0], n_sr = lm.shape[1], n_f = fr.shape[0]

    p_rd = np.empty((n_rd, n_f), dtype=np.complex128)
    p_sr = np.empty((n_sr, n_f), dtype=np.complex128)
    cdef double[:, ::1] prd = p_rd.view(np.float64)
    cdef double[:, ::1] psr = p_sr.view(np.float64)
    _fill_phasor_table(a_rd, b_rd, fr, prd)
    _fill_phasor_table(a_sr, b_sr, fr, psr)

    out = np.empty(n_f, dtype=np.complex128)
    cdef double[::1] ov = out.view(np.float64)
    cdef Py_ssize_t f, n, m
    cdef double acc_r, acc_i, in_r, in_i, lr, li, pr, pi, tr
    for f in range(n_f):
        acc_r = 0.0
        acc_i = 0.0
        for n in range(n_rd):
            in_r = 0.0
            in_i = 0.0
            for m in range(n_sr):
                lr = lv[n, 2 * m]
                li = lv[n, 2 * m + 1]
                pr = psr[m, 2 * f]
                pi = psr[m, 2 * f + 1]
                in_r += lr * pr - li * pi
                in_i += lr * pi + li * pr
            pr = prd[n, 2 * f]
            pi = prd[n, 2 * f + 1]
            acc_r += pr * in_r - pi * in_i
            acc_i += pr * in_i + pi * in_r
        ov[2 * f] = acc_r
        ov[2 * f + 1] = acc_i
    return out


def direct_response(L, pha, phb, freqs):
    lm = np.ascontiguousarray(L, dtype=np.complex128)
    cdef double[::1] lv = lm.view(np.float64)
    cdef double[::1] a = np.ascontiguousarray(pha, dtype=np.float64)
    cdef double[::1] b = np.ascontiguousarray(phb, dtype=np.float64)
    cdef double[::1] fr = np.ascontiguousarray(freqs, dtype=np.float64)
    cdef Py_ssize_t n_t = lm.shape[0], n_f = fr.shape[0]

    p = np.empty((n_t, n_f), dtype=np.complex128)
    cdef double[:, ::1] pv = p.view(np.float64)
    _fill_phasor_table(a, b, fr, pv)

    out = np.empty(n_f, dtype=np.complex128)
    cdef double[::1] ov = out.view(np.float64)
    cdef Py_ssize_t f, n
    cdef double acc_r, acc_i, lr, li, pr, pi
    for f in range(n_f):
        acc_r = 0.0
        acc_i = 0.0
        for n in range(n_t):
            lr = lv[2 * n]
            li = lv[2 * n + 1]
            pr = pv[n, 2 * f]
            pi = pv[n, 2 * f + 1]
            acc_r += lr * pr - li * pi
            acc_i += lr * pi + li * pr
        ov[2 * f] = acc_r
        ov[2 * f + 1] = acc_i
    return out
