"""Pure-numpy Dormand-Prince 5(4) kernel.

Fallback twin of the compiled extension ``quasimeas._dopri``: same Butcher
tableau, same PI step controller, same dense-output interpolant, same
renormalization policy, so both backends produce interchangeable results.

Three right-hand sides share the stepper, selected by ``mode``:

  0  Bloch vector n (3 reals):
       dn/dt = w x n + lam g(t) (d - n (d.n))
  1  density matrix rho (2x2 complex packed as 8 reals):
       drho/dt = -i[Om, rho] + {G, rho} - 2 rho Tr(G rho)
  2  propagator K (8 reals):
       dK/dt = (-i Om + G) K,  renormalized to unit Frobenius norm after
       every accepted step with the discarded log-scale accumulated.

All generator magnitudes are rates (rad/s); integration time in seconds.
"""

from __future__ import annotations

import math

import numpy as np

MODE_BLOCH = 0
MODE_DENSITY = 1
MODE_PROPAGATOR = 2

POT_ZERO = 0
POT_INVERTED_MORSE = 1
POT_SG_QUADRATIC = 2
POT_CUSTOM = 3

# Dormand-Prince 5(4) tableau.
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = np.array(
    [
        [0, 0, 0, 0, 0, 0],
        [1 / 5, 0, 0, 0, 0, 0],
        [3 / 40, 9 / 40, 0, 0, 0, 0],
        [44 / 45, -56 / 15, 32 / 9, 0, 0, 0],
        [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729, 0, 0],
        [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656, 0],
        [35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
    ]
)
_B = np.array([35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0])
# Difference between the 5th and embedded 4th order weights.
_E = np.array([71 / 57600, 0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])
# Quartic dense-output interpolant (Shampine's free interpolant for DOPRI5).
_P = np.array(
    [
        [1, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
        [0, 0, 0, 0],
        [0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
        [0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
        [0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
        [0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
        [0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
    ]
)

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 10.0
_BETA = 0.04
_ALPHA = 0.2 - 0.75 * _BETA


def _switch_off(t, t_end, t_w):
    x = (t - t_end) / t_w
    if x > 0:
        e = math.exp(-x)
        return e / (1.0 + e)
    return 1.0 / (1.0 + math.exp(x))


def pot_eval(kind, params, fn, t):
    if kind == POT_ZERO:
        return 0.0
    if kind == POT_INVERTED_MORSE:
        u = 1.0 - 2.0 * math.exp(-params[1] * t)
        return params[0] * (1.0 - u * u)
    if kind == POT_SG_QUADRATIC:
        return params[0] * t * t * _switch_off(t, params[1], params[2])
    return float(fn(t))


def _unpack_complex(y):
    return np.array(
        [[y[0] + 1j * y[1], y[2] + 1j * y[3]], [y[4] + 1j * y[5], y[6] + 1j * y[7]]]
    )


def _pack_complex(m):
    return np.array(
        [
            m[0, 0].real, m[0, 0].imag, m[0, 1].real, m[0, 1].imag,
            m[1, 0].real, m[1, 0].imag, m[1, 1].real, m[1, 1].imag,
        ]
    )


def _half_sigma(vec):
    """0.5 * vec . sigma for a real 3-vector."""
    v1, v2, v3 = vec
    return 0.5 * np.array([[v3, v1 - 1j * v2], [v1 + 1j * v2, -v3]])


def make_rhs(mode, omega_vec, g_dir, lam, pot_kind, pot_params, pot_fn):
    omega_vec = np.asarray(omega_vec, dtype=float)
    g_dir = np.asarray(g_dir, dtype=float)
    omega_m = _half_sigma(omega_vec)

    if mode == MODE_BLOCH:

        def rhs(t, y):
            g = lam * pot_eval(pot_kind, pot_params, pot_fn, t)
            gd = g * g_dir
            return np.cross(omega_vec, y) + gd - y * (gd @ y)

    elif mode == MODE_DENSITY:

        def rhs(t, y):
            rho = _unpack_complex(y)
            g_m = (lam * pot_eval(pot_kind, pot_params, pot_fn, t)) * _half_sigma(g_dir)
            comm = omega_m @ rho - rho @ omega_m
            anti = g_m @ rho + rho @ g_m
            drho = -1j * comm + anti - 2.0 * (g_m @ rho).trace().real * rho
            return _pack_complex(drho)

    elif mode == MODE_PROPAGATOR:

        def rhs(t, y):
            k = _unpack_complex(y)
            a = -1j * omega_m + (lam * pot_eval(pot_kind, pot_params, pot_fn, t)) * _half_sigma(g_dir)
            return _pack_complex(a @ k)

    else:
        raise ValueError(f"unknown mode {mode}")
    return rhs


def _rms(x):
    return math.sqrt(float(np.mean(x * x)))


def _initial_step(rhs, t0, y0, f0, span, rtol, atol):
    sc = atol + rtol * np.abs(y0)
    d0 = _rms(y0 / sc)
    d1 = _rms(f0 / sc)
    if d0 < 1e-5 or d1 < 1e-5:
        h0 = 1e-6 * span if span < 1.0 else 1e-6
    else:
        h0 = 0.01 * d0 / d1
    h0 = min(h0, span)
    f1 = rhs(t0 + h0, y0 + h0 * f0)
    d2 = _rms((f1 - f0) / sc) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100.0 * h0, h1, span)


def integrate_grid(
    mode,
    y0,
    t_grid,
    omega_vec,
    g_dir,
    lam,
    pot_kind,
    pot_params,
    pot_fn,
    rtol,
    atol,
    max_steps,
    clamp_bloch=True,
):
    """Integrate from t_grid[0] to t_grid[-1], sampling at every grid time.

    Returns (Y, log_scale, diag).  Y[i] is the state at t_grid[i] (Y[0] = y0);
    log_scale is nonzero only in propagator mode.  diag carries step counts
    and a status of "ok", "max_steps", or "underflow"; on failure Y is filled
    up to diag["n_completed"] samples.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or len(t_grid) < 2:
        raise ValueError("t_grid must contain at least start and end times")
    if np.any(np.diff(t_grid) <= 0):
        raise ValueError("t_grid must be strictly increasing")
    y = np.array(y0, dtype=float)
    dim = y.shape[0]
    n_out = len(t_grid)
    Y = np.zeros((n_out, dim))
    log_scale = np.zeros(n_out)
    Y[0] = y
    rhs = make_rhs(mode, omega_vec, g_dir, lam, pot_kind, pot_params, pot_fn)

    t = t_grid[0]
    tf = t_grid[-1]
    f = rhs(t, y)
    h = _initial_step(rhs, t, y, f, tf - t, rtol, atol)
    ls = 0.0
    err_old = 1e-4
    rejected = False
    n_steps = 0
    n_rejected = 0
    n_clamped = 0
    j = 1
    status = "ok"
    K = np.zeros((7, dim))

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
        K[0] = f
        for i in range(1, 7):
            yi = y + h * (_A[i, :i] @ K[:i])
            K[i] = rhs(t + _C[i] * h, yi)
        y_new = y + h * (_B @ K)
        sc = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        err = _rms(h * (_E @ K) / sc)
        n_steps += 1
        if err > 1.0:
            n_rejected += 1
            h *= max(_MIN_FACTOR, _SAFETY * err**-_ALPHA)
            rejected = True
            continue

        # Dense output for grid times inside (t, t + h]; on the final step
        # every remaining grid time belongs to this step up to rounding.
        while j < n_out and (t_grid[j] <= t + h or last):
            tg = t_grid[j]
            th = min((tg - t) / h, 1.0)
            poly = np.array([th, th**2, th**3, th**4])
            y_g = y + h * (K.T @ (_P @ poly))
            if mode == MODE_PROPAGATOR:
                s = float(np.linalg.norm(y_g))
                Y[j] = y_g / s
                log_scale[j] = ls + math.log(s)
            else:
                Y[j] = y_g
            j += 1

        t = tf if last else t + h
        y = y_new
        f = K[6]
        if mode == MODE_PROPAGATOR:
            s = float(np.linalg.norm(y))
            y = y / s
            f = f / s
            ls += math.log(s)
        elif mode == MODE_BLOCH and clamp_bloch:
            norm = float(np.linalg.norm(y))
            if norm > 1.0 + atol:
                y = y / norm
                f = rhs(t, y)
                n_clamped += 1

        if err == 0.0:
            factor = _MAX_FACTOR
        else:
            factor = min(
                _MAX_FACTOR,
                max(_MIN_FACTOR, _SAFETY * err**-_ALPHA * err_old**_BETA),
            )
        if rejected:
            factor = min(factor, 1.0)
        h *= factor
        err_old = max(err, 1e-4)
        rejected = False

    if status == "ok" and j < n_out:
        status = "underflow"

    diag = {
        "steps": n_steps,
        "rejected": n_rejected,
        "clamped": n_clamped,
        "status": status,
        "n_completed": j,
        "backend": "python",
    }
    return Y, log_scale, diag
