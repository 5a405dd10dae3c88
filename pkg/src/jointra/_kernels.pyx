# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels; see ``_kernels_py`` for the reference semantics."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()

cdef enum:
    OPTIMAL = 0
    UNBOUNDED = 1
    ITERATION_LIMIT = 2


def sinr_closed_form(double complex[:, ::1] h_sig, double complex[:, :, ::1] h_int,
                     double[::1] p_sig, double[:, ::1] p_int, double noise,
                     bint full_weights):
    cdef Py_ssize_t b, k, nb = h_sig.shape[0], n = h_int.shape[1], nr = h_sig.shape[1]
    gamma_arr = np.empty(nb, dtype=np.float64)
    cond_arr = np.ones(nb, dtype=np.float64)
    cdef double[::1] gamma = gamma_arr
    cdef double[::1] cond = cond_arr
    cdef double r00, r11, p, m00, m11, abs01, det, num, den, half_tr, lam_max, a
    cdef double complex r01, s0, s1, a0, a1, m01, w0, w1, y, cross

    if nr == 1:
        for b in range(nb):
            r00 = noise
            for k in range(n):
                a0 = h_int[b, k, 0]
                r00 = r00 + p_int[b, k] * (a0.real * a0.real + a0.imag * a0.imag)
            s0 = h_sig[b, 0]
            gamma[b] = p_sig[b] * (s0.real * s0.real + s0.imag * s0.imag) / r00
        return gamma_arr, cond_arr

    for b in range(nb):
        r00 = 0.0
        r11 = 0.0
        r01 = 0.0
        for k in range(n):
            p = p_int[b, k]
            a0 = h_int[b, k, 0]
            a1 = h_int[b, k, 1]
            r00 = r00 + p * (a0.real * a0.real + a0.imag * a0.imag)
            r11 = r11 + p * (a1.real * a1.real + a1.imag * a1.imag)
            r01 = r01 + p * a0 * a1.conjugate()
        r00 = noise + r00
        r11 = noise + r11
        s0 = h_sig[b, 0]
        s1 = h_sig[b, 1]
        m00 = s0.real * s0.real + s0.imag * s0.imag + r00
        m11 = s1.real * s1.real + s1.imag * s1.imag + r11
        m01 = s0 * s1.conjugate()
        if full_weights:
            m01 = m01 + r01
        abs01 = m01.real * m01.real + m01.imag * m01.imag
        det = m00 * m11 - abs01
        w0 = (s0.conjugate() * m11 - s1.conjugate() * m01.conjugate()) / det
        w1 = (s1.conjugate() * m00 - s0.conjugate() * m01) / det
        y = w0 * s0 + w1 * s1
        num = p_sig[b] * (y.real * y.real + y.imag * y.imag)
        cross = w0 * r01 * w1.conjugate()
        den = (r00 * (w0.real * w0.real + w0.imag * w0.imag)
               + r11 * (w1.real * w1.real + w1.imag * w1.imag) + 2.0 * cross.real)
        gamma[b] = num / den if num > 0.0 else 0.0
        half_tr = 0.5 * (m00 + m11)
        a = 0.5 * (m00 - m11)
        lam_max = half_tr + sqrt(a * a + abs01)
        cond[b] = lam_max * lam_max / det
    return gamma_arr, cond_arr


cdef void _pivot(double[:, ::1] t, Py_ssize_t r, Py_ssize_t c) noexcept nogil:
    cdef Py_ssize_t i, k, rows = t.shape[0], cols = t.shape[1]
    cdef double inv = t[r, c], f
    for k in range(cols):
        t[r, k] = t[r, k] / inv
    for i in range(rows):
        if i == r:
            continue
        f = t[i, c]
        if f == 0.0:
            continue
        for k in range(cols):
            t[i, k] = t[i, k] - f * t[r, k]
    for i in range(rows):
        t[i, c] = 0.0
    t[r, c] = 1.0


def pivot(double[:, ::1] tableau, Py_ssize_t row, Py_ssize_t col):
    _pivot(tableau, row, col)


def simplex_iterate(double[:, ::1] tableau, cnp.intp_t[::1] basis, Py_ssize_t n_price,
                    double tol, Py_ssize_t max_iter, Py_ssize_t bland_after):
    cdef Py_ssize_t m = tableau.shape[0] - 1, rhs = tableau.shape[1] - 1
    cdef Py_ssize_t iters = 0, degenerate = 0, i, j, jj, r
    cdef int status = ITERATION_LIMIT
    cdef bint bland = False, found
    cdef double best, ratio, rmin = 0.0, v
    with nogil:
        while iters < max_iter:
            j = -1
            if bland:
                for jj in range(n_price):
                    if tableau[m, jj] < -tol:
                        j = jj
                        break
            else:
                best = 0.0
                for jj in range(n_price):
                    v = tableau[m, jj]
                    if j < 0 or v < best:
                        best = v
                        j = jj
                if j >= 0 and best >= -tol:
                    j = -1
            if j < 0:
                status = OPTIMAL
                break
            found = False
            for i in range(m):
                v = tableau[i, j]
                if v > tol:
                    ratio = tableau[i, rhs] / v
                    if not found or ratio < rmin:
                        rmin = ratio
                        found = True
            if not found:
                status = UNBOUNDED
                break
            r = -1
            for i in range(m):
                v = tableau[i, j]
                if v > tol and tableau[i, rhs] / v <= rmin + 1e-12:
                    if r < 0 or basis[i] < basis[r]:
                        r = i
            _pivot(tableau, r, j)
            basis[r] = j
            if rmin <= tol:
                degenerate += 1
                if degenerate > bland_after:
                    bland = True
            else:
                degenerate = 0
            iters += 1
    return status, iters
