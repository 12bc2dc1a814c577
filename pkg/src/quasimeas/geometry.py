"""Parameter-space geometry of the (observable, device) pair.

Polar charts for the observable axis and the driving direction, the
Theta-chart obtained by eliminating the driving azimuth, the admissibility
tetrahedron |alpha - theta| <= Theta <= pi - |pi - (alpha + theta)|, the two
SL(2,C) Casimir forms, and criticality detection at their joint zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ChartSingularityError, DomainError, InadmissibleConfigError
from .states import (
    DensityMatrix2,
    pauli_components,
    pauli_expand,
)

# Floating-point slack when classifying points on the tetrahedron boundary.
# The interval and product inequalities are algebraically equivalent; the
# slack keeps them consistent under rounding, and the closed tetrahedron
# (boundary admissible) convention.
_BOUNDARY_TOL = 1e-12


def unit_omega(alpha: float, beta_az: float) -> np.ndarray:
    """Polar chart for the observable axis: [sin a cos b, sin a sin b, cos a]."""
    return np.array(
        [
            np.sin(alpha) * np.cos(beta_az),
            np.sin(alpha) * np.sin(beta_az),
            np.cos(alpha),
        ]
    )


def g_direction_polar(theta: float, phi: float) -> np.ndarray:
    """Polar chart for the driving direction with explicit azimuth phi."""
    return np.array(
        [
            np.sin(theta) * np.cos(phi),
            np.sin(theta) * np.sin(phi),
            np.cos(theta),
        ]
    )


def _check_angle(name, value, hi=np.pi):
    if not (0.0 <= value <= hi):
        raise DomainError(f"{name} = {value} outside [0, {hi}]")


def is_admissible(alpha: float, theta: float, Theta: float) -> bool:
    """True iff (alpha, theta, Theta) lies in the closed admissibility tetrahedron.

    Evaluates both the interval inequality and the equivalent product
    inequality (cos(a-t) - cos T)(cos T - cos(a+t)) >= 0 and insists they
    agree; a disagreement beyond rounding slack indicates a bug.
    """
    for name, v in (("alpha", alpha), ("theta", theta), ("Theta", Theta)):
        _check_angle(name, v)
    lo = abs(alpha - theta)
    hi = np.pi - abs(np.pi - (alpha + theta))
    by_interval = (lo - _BOUNDARY_TOL <= Theta) and (Theta <= hi + _BOUNDARY_TOL)
    f1 = np.cos(alpha - theta) - np.cos(Theta)
    f2 = np.cos(Theta) - np.cos(alpha + theta)
    # Since lo <= hi always, the product is nonnegative iff both factors are.
    # The angular boundary slack maps to a factor slack of sin(Theta) * tol
    # plus a quadratic term; a flat slack on the product would misclassify
    # near the degenerate edges where both factors vanish quadratically.
    slack = _BOUNDARY_TOL * (np.sin(Theta) + _BOUNDARY_TOL)
    by_product = (f1 >= -slack) and (f2 >= -slack)
    if by_interval != by_product:
        raise AssertionError(
            f"admissibility formulas disagree at ({alpha}, {theta}, {Theta}): "
            f"interval={by_interval} product={by_product}"
        )
    return by_interval


def g_direction(
    alpha: float,
    beta_az: float,
    theta: float,
    Theta: float,
    chart_branch: int,
) -> np.ndarray:
    """Driving direction in the Theta-chart (driving azimuth eliminated).

    chart_branch = +1 / -1 selects between the two azimuth solutions of
    cos Theta = sin a sin t cos(b - phi) + cos a cos t.  The result is a unit
    vector with g.omega_hat = cos Theta and z-component cos theta.
    """
    if chart_branch not in (1, -1):
        raise DomainError("chart_branch must be +1 or -1 (no default)")
    if not is_admissible(alpha, theta, Theta):
        raise InadmissibleConfigError(
            f"(alpha={alpha}, theta={theta}, Theta={Theta}) outside the tetrahedron"
        )
    sa = np.sin(alpha)
    if abs(sa) < 1e-12:
        raise ChartSingularityError(
            "sin(alpha) = 0: Theta-chart singular, use g_direction_polar with explicit phi"
        )
    radicand = (np.cos(alpha - theta) - np.cos(Theta)) * (np.cos(Theta) - np.cos(alpha + theta))
    root = np.sqrt(max(radicand, 0.0))
    base = np.cos(Theta) - np.cos(alpha) * np.cos(theta)
    cb, sb = np.cos(beta_az), np.sin(beta_az)
    s = chart_branch
    g1 = (cb * base + s * sb * root) / sa
    g2 = (sb * base - s * cb * root) / sa
    g3 = np.cos(theta)
    return np.array([g1, g2, g3])


@dataclass(frozen=True)
class DeviceGeometry:
    """Orientation of the driving generator relative to the observable.

    theta: polar angle of the driving direction; Theta: angle between the
    driving direction and the observable axis; chart_branch selects the
    azimuth solution; beta_az is shared with the paired ObservableSpec.
    """

    theta: float
    Theta: float
    chart_branch: int
    beta_az: float = 0.0

    def __post_init__(self):
        _check_angle("theta", self.theta)
        _check_angle("Theta", self.Theta)
        if self.chart_branch not in (1, -1):
            raise DomainError("chart_branch must be +1 or -1")

    def direction_for(self, alpha: float, beta_az: float | None = None) -> np.ndarray:
        """Driving direction for an observable at (alpha, beta_az).

        The azimuth must match the paired observable's; pass it explicitly
        or store it in the beta_az field.
        """
        b = self.beta_az if beta_az is None else beta_az
        return g_direction(alpha, b, self.theta, self.Theta, self.chart_branch)


@dataclass(frozen=True)
class CasimirPair:
    """SL(2,C)-invariant forms C1 = (w^2 - g^2)/4 and C2 = w g cos(Theta)/2.

    Stored in (rad/s)^2 since all magnitudes carry the 1/hbar convention.
    """

    c1: float
    c2: float


def casimirs(omega_rate: float, g_rate: float, Theta: float) -> CasimirPair:
    if omega_rate < 0 or g_rate < 0:
        raise DomainError("magnitudes must be >= 0")
    c1 = 0.25 * (omega_rate**2 - g_rate**2)
    c2 = 0.5 * omega_rate * g_rate * np.cos(Theta)
    return CasimirPair(c1, c2)


def generator_eigenvalue(c: CasimirPair) -> complex:
    """Principal square root zeta of C1 + i C2, the eigenvalue of Omega + iG."""
    return complex(np.sqrt(complex(c.c1, c.c2)))


def is_critical(c: CasimirPair, tol_rel: float, scale_rate: float | None = None) -> bool:
    """True iff |zeta|^2 is negligible against the squared rate scale.

    scale_rate defaults to the scale implied by the Casimirs themselves
    (|C1| + |C2| recovers max(w,g)^2/4 up to a factor <= 2).
    """
    if tol_rel <= 0:
        raise DomainError("tol_rel must be > 0")
    zeta2 = np.hypot(c.c1, c.c2)
    if scale_rate is not None:
        scale = scale_rate**2 / 4.0
    else:
        scale = abs(c.c1) + abs(c.c2)
    if scale == 0.0:
        return True
    return zeta2 <= tol_rel * scale


def sl2c_conjugate(A, omega_vec, g_vec, rho: DensityMatrix2):
    """Form-invariance transformation of Eq. pair (omega, g) and the state.

    Omega' + iG' = A (Omega + iG) A^-1 with A in SL(2,C), and
    rho' = A rho A^dag / Tr(A rho A^dag).  Returns (omega_vec', g_vec', rho').
    """
    A = np.asarray(A, dtype=complex)
    det = np.linalg.det(A)
    if abs(det - 1.0) > 1e-10:
        raise DomainError(f"A must have unit determinant, det = {det}")
    omega_vec = np.asarray(omega_vec, dtype=float)
    g_vec = np.asarray(g_vec, dtype=float)
    m = pauli_expand(0.0, 0.5 * (omega_vec + 1j * g_vec))
    m2 = A @ m @ np.linalg.inv(A)
    _, comp = pauli_components(m2)
    omega_new = 2.0 * comp.real
    g_new = 2.0 * comp.imag
    raw = A @ rho.matrix @ A.conj().T
    rho_new = DensityMatrix2(raw / raw.trace())
    return omega_new, g_new, rho_new


def tetrahedron_mesh(alpha_samples: int, theta_samples: int, Theta_samples: int):
    """Classify a regular grid over [0, pi]^3 for cross-section export.

    Yields tuples (alpha, theta, Theta, admissible, outcome_region) with the
    region label determined by sign(Theta - pi/2): "Theta<pi/2", "boundary",
    or "Theta>pi/2".
    """
    for count in (alpha_samples, theta_samples, Theta_samples):
        if count < 2:
            raise DomainError("sample counts must be >= 2")
    alphas = np.linspace(0.0, np.pi, alpha_samples)
    thetas = np.linspace(0.0, np.pi, theta_samples)
    Thetas = np.linspace(0.0, np.pi, Theta_samples)
    out = []
    for a in alphas:
        for t in thetas:
            for T in Thetas:
                out.append((a, t, T, is_admissible(a, t, T), outcome_region(T)))
    return out


def outcome_region(Theta: float) -> str:
    """Label the Theta half-space; the boundary plane is the critical surface."""
    if abs(Theta - np.pi / 2) <= _BOUNDARY_TOL:
        return "boundary"
    return "Theta<pi/2" if Theta < np.pi / 2 else "Theta>pi/2"
