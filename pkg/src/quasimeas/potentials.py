"""Time-dependent driving magnitudes g(t) and their integrals.

Two model profiles: the inverted Morse bump
g_IM(t) = g0 (1 - (1 - 2 exp(-kappa t))^2) and the Stern-Gerlach quadratic
ramp g_SG(t) = prefactor * t^2 * S(t) with the sigmoid switch-off S(t).
All magnitudes are rates (rad/s, hbar absorbed).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import quad

from .errors import DomainError, NoCrossingError

# Kernel potential tags shared with the compiled backend.
POT_ZERO = 0
POT_INVERTED_MORSE = 1
POT_SG_QUADRATIC = 2
POT_CUSTOM = 3


def switch_off(t, t_end: float, t_w: float):
    """Sigmoid switch-off S(t) = 1 - 1/(1 + exp(-(t - t_end)/t_w)).

    Strictly decreasing, S(t_end) = 1/2; evaluated from exponentials of
    negative arguments only, so it saturates to 1 and 0 without overflow.
    """
    if t_w <= 0:
        raise DomainError("t_w must be > 0")
    x = (np.asarray(t, dtype=float) - t_end) / t_w
    out = np.where(
        x > 0,
        np.exp(-np.clip(x, 0, None)) / (1.0 + np.exp(-np.clip(x, 0, None))),
        1.0 / (1.0 + np.exp(np.clip(x, None, 0))),
    )
    return out if out.ndim else float(out)


def g_inverted_morse(t, g0_rate: float, kappa: float):
    """Inverted Morse bump; zero at t=0, maximum g0_rate at t = ln2/kappa."""
    if g0_rate < 0:
        raise DomainError("g0_rate must be >= 0")
    if kappa <= 0:
        raise DomainError("kappa must be > 0")
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise DomainError("t must be >= 0")
    u = 1.0 - 2.0 * np.exp(-kappa * t)
    out = g0_rate * (1.0 - u * u)
    return out if out.ndim else float(out)


def g_stern_gerlach(t, profile: "SternGerlachTime"):
    """Quadratic ramp times switch-off: prefactor * t^2 * S(t)."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise DomainError("t must be >= 0")
    out = profile.prefactor_rate_per_s2 * t * t * switch_off(t, profile.t_end, profile.t_w)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class InvertedMorse:
    g0_rate: float
    kappa: float

    def __post_init__(self):
        if self.g0_rate < 0 or self.kappa <= 0:
            raise DomainError("require g0_rate >= 0 and kappa > 0")

    def __call__(self, t):
        return g_inverted_morse(t, self.g0_rate, self.kappa)

    @property
    def peak_rate(self) -> float:
        return self.g0_rate

    @property
    def support_time(self) -> float:
        """Time scale past which the profile is negligible."""
        return 1.0 / self.kappa

    def kernel_params(self):
        return POT_INVERTED_MORSE, (self.g0_rate, self.kappa, 0.0, 0.0), None

    def gamma_closed_form(self, t):
        """Integral of the rate: (2 g0/kappa)(1 - exp(-kappa t))^2."""
        e = np.exp(-self.kappa * np.asarray(t, dtype=float))
        return (2.0 * self.g0_rate / self.kappa) * (1.0 - e) ** 2


@dataclass(frozen=True)
class SternGerlachTime:
    """g(t) = prefactor_rate_per_s2 * t^2 * S(t); prefactor in rad/s^3."""

    prefactor_rate_per_s2: float
    t_end: float = 1e-4
    t_w: float = 5e-6

    def __post_init__(self):
        if self.prefactor_rate_per_s2 < 0 or self.t_end <= 0 or self.t_w <= 0:
            raise DomainError("require prefactor >= 0, t_end > 0, t_w > 0")

    def __call__(self, t):
        return g_stern_gerlach(t, self)

    @property
    def peak_rate(self) -> float:
        return float(g_stern_gerlach(self.t_end, self))

    @property
    def support_time(self) -> float:
        return self.t_end + 40.0 * self.t_w

    def kernel_params(self):
        return POT_SG_QUADRATIC, (self.prefactor_rate_per_s2, self.t_end, self.t_w, 0.0), None


@dataclass(frozen=True)
class CustomProfile:
    """Arbitrary nonnegative rate profile with a declared support bound."""

    fn: Callable[[float], float]
    support_time: float
    peak_rate: float = 0.0

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if t.ndim:
            return np.array([float(self.fn(x)) for x in t])
        return float(self.fn(float(t)))

    def kernel_params(self):
        return POT_CUSTOM, (0.0, 0.0, 0.0, 0.0), self.fn


@dataclass(frozen=True)
class ZeroProfile:
    """No driving: the unitary limit."""

    support_time: float = 0.0
    peak_rate: float = 0.0

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return np.zeros_like(t) if t.ndim else 0.0

    def kernel_params(self):
        return POT_ZERO, (0.0, 0.0, 0.0, 0.0), None


PotentialProfile = InvertedMorse | SternGerlachTime | CustomProfile | ZeroProfile


def morse_crossing_times(g0_rate: float, kappa: float, omega_rate: float):
    """Times t_-, t_+ at which g_IM crosses the level omega_rate.

    t_pm = (1/kappa) ln(2 (g0/w)(1 +- sqrt(1 - w/g0))); both collapse to
    ln2/kappa when g0 = omega.
    """
    if omega_rate <= 0:
        raise DomainError("omega_rate must be > 0")
    if g0_rate < omega_rate:
        raise NoCrossingError(
            f"g0_rate {g0_rate} < omega_rate {omega_rate}: the bump never reaches the level"
        )
    ratio = g0_rate / omega_rate
    root = np.sqrt(max(1.0 - 1.0 / ratio, 0.0))
    t_minus = np.log(2.0 * ratio * (1.0 - root)) / kappa
    t_plus = np.log(2.0 * ratio * (1.0 + root)) / kappa
    return t_minus, t_plus


def gamma(profile: PotentialProfile, t: float, quadrature_tol: float = 1e-10) -> float:
    """Dimensionless integrated driving Gamma(t) = integral_0^t g(tau) dtau.

    Adaptive quadrature of the rate profile; the tolerance is relative.
    """
    if t < 0:
        raise DomainError("t must be >= 0")
    if t == 0.0:
        return 0.0
    kind = profile.kernel_params()[0] if hasattr(profile, "kernel_params") else POT_CUSTOM
    points = None
    if kind == POT_SG_QUADRATIC and profile.t_end < t:
        points = [profile.t_end]
    val, _ = quad(
        lambda x: float(profile(x)),
        0.0,
        t,
        epsabs=0.0,
        epsrel=quadrature_tol,
        limit=500,
        points=points,
    )
    return float(val)


class GammaAccumulator:
    """Cumulative Gamma over an increasing time grid, one quadrature per segment.

    Keeps the quadrature budget explicit while avoiding re-integration from
    zero for every sample.
    """

    def __init__(self, profile: PotentialProfile, quadrature_tol: float = 1e-10):
        self.profile = profile
        self.tol = quadrature_tol

    def on_grid(self, t_grid) -> np.ndarray:
        t_grid = np.asarray(t_grid, dtype=float)
        out = np.empty_like(t_grid)
        total = 0.0
        prev = 0.0
        for i, t in enumerate(t_grid):
            if t < prev:
                raise DomainError("time grid must be nondecreasing")
            if t > prev:
                seg, _ = quad(
                    lambda x: float(self.profile(x)),
                    prev,
                    t,
                    epsabs=self.tol,
                    epsrel=self.tol,
                    limit=200,
                )
                total += seg
            out[i] = total
            prev = t
        return out
