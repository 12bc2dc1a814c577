# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Dormand-Prince 5(4) kernel: hot-loop twin of ``_dopri_py``.

Keep the numerics in lockstep with the pure-python module: same tableau,
same PI controller, same dense-output interpolant, same renormalization.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, fabs, log, sqrt

cnp.import_array()

DEF MAXDIM = 8

cdef int MODE_BLOCH = 0
cdef int MODE_DENSITY = 1
cdef int MODE_PROPAGATOR = 2

cdef int POT_ZERO = 0
cdef int POT_INVERTED_MORSE = 1
cdef int POT_SG_QUADRATIC = 2
cdef int POT_CUSTOM = 3

cdef double[7] C_NODES = [0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0]
cdef double[7][6] A_TAB = [
    [0, 0, 0, 0, 0, 0],
    [1.0 / 5, 0, 0, 0, 0, 0],
    [3.0 / 40, 9.0 / 40, 0, 0, 0, 0],
    [44.0 / 45, -56.0 / 15, 32.0 / 9, 0, 0, 0],
    [19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729, 0, 0],
    [9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656, 0],
    [35.0 / 384, 0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84],
]
cdef double[7] B_TAB = [35.0 / 384, 0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84, 0]
cdef double[7] E_TAB = [
    71.0 / 57600, 0, -71.0 / 16695, 71.0 / 1920, -17253.0 / 339200, 22.0 / 525, -1.0 / 40,
]
cdef double[7][4] P_TAB = [
    [1, -8048581381.0 / 2820520608, 8663915743.0 / 2820520608, -12715105075.0 / 11282082432],
    [0, 0, 0, 0],
    [0, 131558114200.0 / 32700410799, -68118460800.0 / 10900136933, 87487479700.0 / 32700410799],
    [0, -1754552775.0 / 470086768, 14199869525.0 / 1410260304, -10690763975.0 / 1880347072],
    [0, 127303824393.0 / 49829197408, -318862633887.0 / 49829197408, 701980252875.0 / 199316789632],
    [0, -282668133.0 / 205662961, 2019193451.0 / 616988883, -1453857185.0 / 822651844],
    [0, 40617522.0 / 29380423, -110615467.0 / 29380423, 69997945.0 / 29380423],
]

cdef double SAFETY = 0.9
cdef double MIN_FACTOR = 0.2
cdef double MAX_FACTOR = 10.0
cdef double BETA = 0.04
cdef double ALPHA = 0.2 - 0.75 * 0.04


cdef inline double switch_off_c(double t, double t_end, double t_w) nogil:
    cdef double x = (t - t_end) / t_w
    cdef double e
    if x > 0:
        e = exp(-x)
        return e / (1.0 + e)
    return 1.0 / (1.0 + exp(x))


cdef double pot_eval_c(int kind, double p0, double p1, double p2, object fn, double t):
    cdef double u
    if kind == POT_ZERO:
        return 0.0
    if kind == POT_INVERTED_MORSE:
        u = 1.0 - 2.0 * exp(-p1 * t)
        return p0 * (1.0 - u * u)
    if kind == POT_SG_QUADRATIC:
        return p0 * t * t * switch_off_c(t, p1, p2)
    return float(fn(t))


cdef inline void cmat_mul(double* a, double* b, double* out) nogil:
    # Packed complex 2x2 layout: [r00, i00, r01, i01, r10, i10, r11, i11].
    out[0] = a[0] * b[0] - a[1] * b[1] + a[2] * b[4] - a[3] * b[5]
    out[1] = a[0] * b[1] + a[1] * b[0] + a[2] * b[5] + a[3] * b[4]
    out[2] = a[0] * b[2] - a[1] * b[3] + a[2] * b[6] - a[3] * b[7]
    out[3] = a[0] * b[3] + a[1] * b[2] + a[2] * b[7] + a[3] * b[6]
    out[4] = a[4] * b[0] - a[5] * b[1] + a[6] * b[4] - a[7] * b[5]
    out[5] = a[4] * b[1] + a[5] * b[0] + a[6] * b[5] + a[7] * b[4]
    out[6] = a[4] * b[2] - a[5] * b[3] + a[6] * b[6] - a[7] * b[7]
    out[7] = a[4] * b[3] + a[5] * b[2] + a[6] * b[7] + a[7] * b[6]


cdef inline void half_sigma_c(double v1, double v2, double v3, double* out) nogil:
    # 0.5 * v . sigma, Hermitian for real v.
    out[0] = 0.5 * v3; out[1] = 0.0
    out[2] = 0.5 * v1; out[3] = -0.5 * v2
    out[4] = 0.5 * v1; out[5] = 0.5 * v2
    out[6] = -0.5 * v3; out[7] = 0.0


cdef void rhs_c(
    int mode,
    double t,
    double* y,
    double* out,
    double* w,
    double* d,
    double lam,
    int pot_kind,
    double p0, double p1, double p2,
    object pot_fn,
):
    cdef double g = lam * pot_eval_c(pot_kind, p0, p1, p2, pot_fn, t)
    cdef double gd0, gd1, gd2, dotgn, tr_re
    cdef double[8] gm, wm, am, t1, t2, t3
    cdef int i

    if mode == MODE_BLOCH:
        gd0 = g * d[0]; gd1 = g * d[1]; gd2 = g * d[2]
        dotgn = gd0 * y[0] + gd1 * y[1] + gd2 * y[2]
        out[0] = w[1] * y[2] - w[2] * y[1] + gd0 - y[0] * dotgn
        out[1] = w[2] * y[0] - w[0] * y[2] + gd1 - y[1] * dotgn
        out[2] = w[0] * y[1] - w[1] * y[0] + gd2 - y[2] * dotgn
        return

    half_sigma_c(w[0], w[1], w[2], wm)
    half_sigma_c(g * d[0], g * d[1], g * d[2], gm)

    if mode == MODE_DENSITY:
        # -i(W rho - rho W) + (G rho + rho G) - 2 Re tr(G rho) rho
        cmat_mul(wm, y, t1)
        cmat_mul(y, wm, t2)
        cmat_mul(gm, y, t3)
        tr_re = t3[0] + t3[6]
        for i in range(8):
            out[i] = t3[i] - 2.0 * tr_re * y[i]
        cmat_mul(y, gm, t3)
        for i in range(8):
            out[i] += t3[i]
        # -i * (t1 - t2): multiply by -i swaps (re, im) -> (im, -re)
        out[0] += (t1[1] - t2[1]); out[1] -= (t1[0] - t2[0])
        out[2] += (t1[3] - t2[3]); out[3] -= (t1[2] - t2[2])
        out[4] += (t1[5] - t2[5]); out[5] -= (t1[4] - t2[4])
        out[6] += (t1[7] - t2[7]); out[7] -= (t1[6] - t2[6])
        return

    # Propagator: dK = (-i W + G) K
    am[0] = gm[0] + wm[1]; am[1] = gm[1] - wm[0]
    am[2] = gm[2] + wm[3]; am[3] = gm[3] - wm[2]
    am[4] = gm[4] + wm[5]; am[5] = gm[5] - wm[4]
    am[6] = gm[6] + wm[7]; am[7] = gm[7] - wm[6]
    cmat_mul(am, y, out)


def integrate_grid(
    int mode,
    object y0,
    object t_grid,
    object omega_vec,
    object g_dir,
    double lam,
    int pot_kind,
    object pot_params,
    object pot_fn,
    double rtol,
    double atol,
    long max_steps,
    bint clamp_bloch=True,
):
    """Compiled twin of ``quasimeas._dopri_py.integrate_grid``."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] tg_arr = np.ascontiguousarray(t_grid, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] y_arr = np.ascontiguousarray(y0, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] w_arr = np.ascontiguousarray(omega_vec, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] d_arr = np.ascontiguousarray(g_dir, dtype=np.float64)
    cdef int dim = y_arr.shape[0]
    cdef Py_ssize_t n_out = tg_arr.shape[0]
    if n_out < 2:
        raise ValueError("t_grid must contain at least start and end times")
    cdef Py_ssize_t ii
    for ii in range(1, n_out):
        if tg_arr[ii] <= tg_arr[ii - 1]:
            raise ValueError("t_grid must be strictly increasing")

    cdef cnp.ndarray[cnp.float64_t, ndim=2] Y = np.zeros((n_out, dim))
    cdef cnp.ndarray[cnp.float64_t, ndim=1] log_scale = np.zeros(n_out)
    cdef double p0 = pot_params[0], p1 = pot_params[1], p2 = pot_params[2]
    cdef double[3] w
    cdef double[3] d
    cdef int i, k, m
    for i in range(3):
        w[i] = w_arr[i]
        d[i] = d_arr[i]

    cdef double[8] y, y_new, f, ytmp, yg, sc
    cdef double[7][8] K
    for i in range(dim):
        y[i] = y_arr[i]
        Y[0, i] = y[i]

    cdef double t = tg_arr[0]
    cdef double tf = tg_arr[n_out - 1]
    cdef double ls = 0.0
    cdef double err_old = 1e-4
    cdef bint rejected = False
    cdef bint last = False
    cdef long n_steps = 0, n_rejected = 0, n_clamped = 0
    cdef Py_ssize_t j = 1
    cdef str status = "ok"
    cdef double h, h0, h1, d0, d1, d2, span, acc, err, factor
    cdef double s, norm, th, q, tgv

    # Initial step selection (identical heuristic to the python twin).
    rhs_c(mode, t, y, f, w, d, lam, pot_kind, p0, p1, p2, pot_fn)
    span = tf - t
    acc = 0.0
    d0 = 0.0
    d1 = 0.0
    for i in range(dim):
        sc[i] = atol + rtol * fabs(y[i])
        d0 += (y[i] / sc[i]) ** 2
        d1 += (f[i] / sc[i]) ** 2
    d0 = sqrt(d0 / dim)
    d1 = sqrt(d1 / dim)
    if d0 < 1e-5 or d1 < 1e-5:
        h0 = 1e-6 * span if span < 1.0 else 1e-6
    else:
        h0 = 0.01 * d0 / d1
    if h0 > span:
        h0 = span
    for i in range(dim):
        ytmp[i] = y[i] + h0 * f[i]
    rhs_c(mode, t + h0, ytmp, yg, w, d, lam, pot_kind, p0, p1, p2, pot_fn)
    d2 = 0.0
    for i in range(dim):
        d2 += ((yg[i] - f[i]) / sc[i]) ** 2
    d2 = sqrt(d2 / dim) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    h = min(100.0 * h0, h1)
    if h > span:
        h = span

    while t < tf and j < n_out:
        if n_steps >= max_steps:
            status = "max_steps"
            break
        last = h >= tf - t
        if last:
            h = tf - t
        if t + h == t:
            status = "underflow"
            break
        for i in range(dim):
            K[0][i] = f[i]
        for k in range(1, 7):
            for i in range(dim):
                acc = 0.0
                for m in range(k):
                    acc += A_TAB[k][m] * K[m][i]
                ytmp[i] = y[i] + h * acc
            rhs_c(mode, t + C_NODES[k] * h, ytmp, K[k], w, d, lam, pot_kind, p0, p1, p2, pot_fn)
        err = 0.0
        for i in range(dim):
            acc = 0.0
            for m in range(7):
                acc += B_TAB[m] * K[m][i]
            y_new[i] = y[i] + h * acc
            acc = 0.0
            for m in range(7):
                acc += E_TAB[m] * K[m][i]
            s = atol + rtol * max(fabs(y[i]), fabs(y_new[i]))
            err += (h * acc / s) ** 2
        err = sqrt(err / dim)
        n_steps += 1
        if err > 1.0:
            n_rejected += 1
            factor = SAFETY * err ** (-ALPHA)
            if factor < MIN_FACTOR:
                factor = MIN_FACTOR
            h *= factor
            rejected = True
            continue

        while j < n_out and (tg_arr[j] <= t + h or last):
            tgv = tg_arr[j]
            th = (tgv - t) / h
            if th > 1.0:
                th = 1.0
            s = 0.0
            for i in range(dim):
                acc = 0.0
                for m in range(7):
                    q = th * (P_TAB[m][0] + th * (P_TAB[m][1] + th * (P_TAB[m][2] + th * P_TAB[m][3])))
                    acc += K[m][i] * q
                yg[i] = y[i] + h * acc
                s += yg[i] * yg[i]
            if mode == MODE_PROPAGATOR:
                s = sqrt(s)
                for i in range(dim):
                    Y[j, i] = yg[i] / s
                log_scale[j] = ls + log(s)
            else:
                for i in range(dim):
                    Y[j, i] = yg[i]
            j += 1

        t = tf if last else t + h
        for i in range(dim):
            y[i] = y_new[i]
            f[i] = K[6][i]
        if mode == MODE_PROPAGATOR:
            s = 0.0
            for i in range(dim):
                s += y[i] * y[i]
            s = sqrt(s)
            for i in range(dim):
                y[i] /= s
                f[i] /= s
            ls += log(s)
        elif mode == MODE_BLOCH and clamp_bloch:
            norm = sqrt(y[0] * y[0] + y[1] * y[1] + y[2] * y[2])
            if norm > 1.0 + atol:
                for i in range(dim):
                    y[i] /= norm
                rhs_c(mode, t, y, f, w, d, lam, pot_kind, p0, p1, p2, pot_fn)
                n_clamped += 1

        if err == 0.0:
            factor = MAX_FACTOR
        else:
            factor = SAFETY * err ** (-ALPHA) * err_old ** BETA
            if factor < MIN_FACTOR:
                factor = MIN_FACTOR
            if factor > MAX_FACTOR:
                factor = MAX_FACTOR
        if rejected and factor > 1.0:
            factor = 1.0
        h *= factor
        err_old = err if err > 1e-4 else 1e-4
        rejected = False

    if status == "ok" and j < n_out:
        status = "underflow"

    diag = {
        "steps": n_steps,
        "rejected": n_rejected,
        "clamped": n_clamped,
        "status": status,
        "n_completed": j,
        "backend": "compiled",
    }
    return Y, log_scale, diag
