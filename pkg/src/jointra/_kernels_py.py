"""Pure numpy implementations of the hot kernels.

These mirror ``_kernels.pyx`` operation for operation and are used when the
compiled extension is unavailable or ``JOINTRA_PURE_PYTHON`` is set.
"""
import numpy as np

OPTIMAL, UNBOUNDED, ITERATION_LIMIT = 0, 1, 2


def sinr_closed_form(h_sig, h_int, p_sig, p_int, noise, full_weights):
    """Post-LMMSE SINR for single-antenna transmitters and 1 or 2 rx antennas.

    Parameters
    ----------
    h_sig : complex (B, Nr)
    h_int : complex (B, n, Nr)
    p_sig : float (B,)
    p_int : float (B, n)
    noise : float
        Per-antenna noise power, linear.
    full_weights : bool
        Use the full covariance inside the weight inverse instead of its
        diagonal.

    Returns
    -------
    gamma, cond : float (B,)
    """
    nr = h_sig.shape[1]
    pw = p_int[..., None]
    if nr == 1:
        r00 = noise + np.sum(pw[..., 0] * np.abs(h_int[..., 0]) ** 2, axis=1)
        gain = np.abs(h_sig[:, 0]) ** 2
        gamma = p_sig * gain / r00
        return gamma, np.ones_like(gamma)

    a0, a1 = h_int[..., 0], h_int[..., 1]
    r00 = noise + np.sum(p_int * (a0.real ** 2 + a0.imag ** 2), axis=1)
    r11 = noise + np.sum(p_int * (a1.real ** 2 + a1.imag ** 2), axis=1)
    r01 = np.sum(p_int * a0 * np.conj(a1), axis=1)

    s0, s1 = h_sig[:, 0], h_sig[:, 1]
    m00 = s0.real ** 2 + s0.imag ** 2 + r00
    m11 = s1.real ** 2 + s1.imag ** 2 + r11
    m01 = s0 * np.conj(s1)
    if full_weights:
        m01 = m01 + r01
    abs01 = m01.real ** 2 + m01.imag ** 2
    det = m00 * m11 - abs01

    w0 = (np.conj(s0) * m11 - np.conj(s1) * np.conj(m01)) / det
    w1 = (np.conj(s1) * m00 - np.conj(s0) * m01) / det
    y = w0 * s0 + w1 * s1
    num = p_sig * (y.real ** 2 + y.imag ** 2)
    den = (r00 * (w0.real ** 2 + w0.imag ** 2) + r11 * (w1.real ** 2 + w1.imag ** 2)
           + 2.0 * (w0 * r01 * np.conj(w1)).real)
    with np.errstate(invalid="ignore", divide="ignore"):
        gamma = np.where(num > 0.0, num / den, 0.0)

    half_tr = 0.5 * (m00 + m11)
    lam_max = half_tr + np.sqrt((0.5 * (m00 - m11)) ** 2 + abs01)
    cond = lam_max * lam_max / det
    return gamma, cond


def pivot(tableau, row, col):
    t = tableau
    t[row] /= t[row, col]
    factor = t[:, col].copy()
    factor[row] = 0.0
    nz = np.flatnonzero(factor)
    if nz.size:
        t[nz] -= np.outer(factor[nz], t[row])
    t[:, col] = 0.0
    t[row, col] = 1.0


def simplex_iterate(tableau, basis, n_price, tol, max_iter, bland_after):
    """Run primal simplex pivots on a dense tableau in place.

    The last row holds reduced costs (minimisation) with ``-z`` in the last
    column; the last column holds the basic solution.  Only columns
    ``< n_price`` may enter.  Pricing is Dantzig's rule until
    ``bland_after`` consecutive degenerate pivots, then Bland's rule for
    the remainder of the call.

    Returns ``(status, iterations)``.
    """
    t = tableau
    m = t.shape[0] - 1
    iters = 0
    degenerate = 0
    bland = False
    while iters < max_iter:
        d = t[m, :n_price]
        if bland:
            cand = np.flatnonzero(d < -tol)
            if cand.size == 0:
                return OPTIMAL, iters
            j = int(cand[0])
        else:
            j = int(np.argmin(d))
            if d[j] >= -tol:
                return OPTIMAL, iters
        col = t[:m, j]
        rows = np.flatnonzero(col > tol)
        if rows.size == 0:
            return UNBOUNDED, iters
        ratios = t[rows, -1] / col[rows]
        rmin = ratios.min()
        ties = rows[ratios <= rmin + 1e-12]
        r = int(ties[np.argmin(basis[ties])])
        pivot(t, r, j)
        basis[r] = j
        if rmin <= tol:
            degenerate += 1
            if degenerate > bland_after:
                bland = True
        else:
            degenerate = 0
        iters += 1
    return ITERATION_LIMIT, iters
