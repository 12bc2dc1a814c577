"""Numerical integration of the quasilinear evolution.

Three equivalent representations of the same dynamics are integrated with a
shared adaptive Dormand-Prince 5(4) kernel (compiled or pure-python, see
``backend``):

  * the Bloch Riccati ODE  dn/dt = w x n + lam g (d - n (d.n)),
  * the density-matrix ODE drho/dt = -i[Om, rho] + {G, rho} - 2 rho Tr(G rho),
  * the linear propagator ODE dK/dt = (-i Om + G) K with per-step
    renormalization, from which states are reconstructed as
    K rho0 K^dag / Tr(K rho0 K^dag).

The ensemble-mixing coefficient eps(t) is available both from the propagator
trace ratio and from the logistic integral formula; their agreement is the
quasilinearity (no-signaling) check.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_simpson

from . import backend
from .errors import DegenerateBranchError, DomainError, GridMismatchError, IntegrationError
from .geometry import DeviceGeometry
from .potentials import PotentialProfile
from .states import (
    BlochVector,
    DensityMatrix2,
    ObservableSpec,
    as_bloch,
    born_probability,
    pauli_components,
)

MODE_BLOCH = 0
MODE_DENSITY = 1
MODE_PROPAGATOR = 2


@dataclass(frozen=True)
class IntegratorConfig:
    """Step control and output-grid parameters.

    The output grid is logarithmic from t_start to t_final (mirroring the
    log time axes of the trajectory plots) with t = 0 prepended so the
    initial state is always part of the record.
    """

    rtol: float = 1e-9
    atol: float = 1e-12
    t_start: float = 1e-9
    t_final: float = 1e-3
    samples_per_decade: int = 200
    max_steps: int = 20_000_000

    def __post_init__(self):
        if self.rtol <= 0 or self.atol <= 0:
            raise DomainError("rtol and atol must be > 0")
        if not (0 < self.t_start < self.t_final):
            raise DomainError("require 0 < t_start < t_final")
        if self.samples_per_decade < 1:
            raise DomainError("samples_per_decade must be >= 1")

    def grid(self) -> np.ndarray:
        decades = np.log10(self.t_final / self.t_start)
        n = max(int(np.ceil(decades * self.samples_per_decade)) + 1, 2)
        g = np.logspace(np.log10(self.t_start), np.log10(self.t_final), n)
        g[-1] = self.t_final
        return np.concatenate([[0.0], g])


@dataclass(frozen=True)
class DeviceConfig:
    """Driving-device description: orientation chart plus magnitude profile.

    ``g_dir_override`` supplies an explicit unit direction when the
    Theta-chart is singular (sin alpha = 0) or when a direction is wanted
    directly, bypassing the chart.
    """

    geometry: DeviceGeometry
    profile: PotentialProfile
    g_dir_override: np.ndarray | None = None

    def direction_for(self, alpha: float, beta_az: float | None = None) -> np.ndarray:
        if self.g_dir_override is not None:
            d = np.asarray(self.g_dir_override, dtype=float)
            norm = np.linalg.norm(d)
            if abs(norm - 1.0) > 1e-10:
                raise DomainError("g_dir_override must be a unit vector")
            return d
        return self.geometry.direction_for(alpha, beta_az)


@dataclass
class Trajectory:
    """Time-ordered samples of the evolving Bloch vector and its rates."""

    t: np.ndarray
    n: np.ndarray
    norm: np.ndarray
    rate: np.ndarray
    g_rate: np.ndarray
    epsilon: np.ndarray | None = None
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        if np.any(np.diff(self.t) <= 0):
            raise DomainError("trajectory times must be strictly increasing")
        if np.max(self.norm) > 1.0 + 1e-8:
            raise DomainError(f"Bloch ball violated: max |n| = {np.max(self.norm)}")

    @property
    def final_n(self) -> np.ndarray:
        return self.n[-1]


@dataclass
class PropagatorHistory:
    """Normalized propagator samples K(t) with the discarded log-scale."""

    t: np.ndarray
    K: np.ndarray  # (N, 2, 2) complex, unit Frobenius norm per sample
    log_scale: np.ndarray
    diagnostics: dict = field(default_factory=dict)

    def reconstruct(self, rho0: DensityMatrix2) -> np.ndarray:
        """Bloch-vector series of K rho0 K^dag / Tr(K rho0 K^dag)."""
        out = np.empty((len(self.t), 3))
        for i, k in enumerate(self.K):
            raw = k @ rho0.matrix @ k.conj().T
            tr = raw.trace().real
            if tr <= 0.0:
                raise DegenerateBranchError("Tr(K rho0 K^dag) vanished during reconstruction")
            _, v = pauli_components(raw / tr)
            out[i] = 2.0 * v.real
        return out


def bloch_rhs(t, n, omega_vec_rate, g_profile, g_dir, lam):
    """Right-hand side of the Bloch Riccati equation, in rad/s."""
    n = np.asarray(n, dtype=float)
    g = lam * float(g_profile(t))
    gd = g * np.asarray(g_dir, dtype=float)
    return np.cross(omega_vec_rate, n) + gd - n * (gd @ n)


def density_rhs(rho, omega_matrix, g_matrix):
    """drho/dt = -i[Om, rho] + {G, rho} - 2 rho Tr(G rho) (rate units)."""
    rho = np.asarray(rho, dtype=complex)
    comm = omega_matrix @ rho - rho @ omega_matrix
    anti = g_matrix @ rho + rho @ g_matrix
    return -1j * comm + anti - 2.0 * (g_matrix @ rho).trace() * rho


def propagator_rhs(k, omega_matrix, g_matrix):
    """dK/dt = (-i Om + G) K (rate units)."""
    return (-1j * omega_matrix + g_matrix) @ np.asarray(k, dtype=complex)


def _check_lam(lam) -> int:
    if lam not in (1, -1):
        raise DomainError(f"outcome branch must be +1 or -1, got {lam!r}")
    return int(lam)


def _kernel_call(mode, y0, spec, device, lam, cfg, clamp=True):
    spec.require_nondegenerate()
    lam = _check_lam(lam)
    g_dir = device.direction_for(spec.alpha, spec.beta_az)
    kind, params, fn = device.profile.kernel_params()
    grid = cfg.grid()
    Y, log_scale, diag = backend.integrate_grid(
        mode,
        np.asarray(y0, dtype=float),
        grid,
        spec.omega_vec,
        g_dir,
        float(lam),
        kind,
        params,
        fn,
        cfg.rtol,
        cfg.atol,
        cfg.max_steps,
        clamp,
    )
    if diag["status"] != "ok":
        raise IntegrationError(
            f"integration failed ({diag['status']}) after {diag['steps']} steps",
            partial=(grid[: diag["n_completed"]], Y[: diag["n_completed"]], diag),
        )
    return grid, Y, log_scale, diag, g_dir


def _finish_trajectory(grid, n_series, spec, device, lam, g_dir, diag, n0):
    g_rate = np.asarray(device.profile(grid), dtype=float)
    rate = np.empty(len(grid))
    for i, (t, n) in enumerate(zip(grid, n_series)):
        rate[i] = np.linalg.norm(bloch_rhs(t, n, spec.omega_vec, device.profile, g_dir, lam))
    diag = dict(diag)
    p = born_probability(n0, spec, lam)
    diag["born_probability"] = p
    if p == 0.0:
        # The ODE is still well defined; the branch just carries no weight.
        diag["zero_probability_branch"] = True
    return Trajectory(
        t=grid,
        n=n_series,
        norm=np.linalg.norm(n_series, axis=1),
        rate=rate,
        g_rate=g_rate,
        diagnostics=diag,
    )


def integrate_bloch(n0, spec: ObservableSpec, device: DeviceConfig, lam, cfg: IntegratorConfig):
    """Integrate the Bloch Riccati ODE on the logarithmic output grid."""
    n0 = as_bloch(n0)
    grid, Y, _, diag, g_dir = _kernel_call(MODE_BLOCH, n0.vec, spec, device, lam, cfg)
    return _finish_trajectory(grid, Y, spec, device, _check_lam(lam), g_dir, diag, n0)


def _pack_rho(m):
    return np.array(
        [
            m[0, 0].real, m[0, 0].imag, m[0, 1].real, m[0, 1].imag,
            m[1, 0].real, m[1, 0].imag, m[1, 1].real, m[1, 1].imag,
        ]
    )


def _unpack_series(Y):
    return Y[:, 0::2] + 1j * Y[:, 1::2]


def integrate_density(
    rho0: DensityMatrix2, spec: ObservableSpec, device: DeviceConfig, lam, cfg: IntegratorConfig
):
    """Integrate the density-matrix ODE; returns a Bloch-space Trajectory.

    Structure-preservation residuals (hermiticity, trace drift) are recorded
    in the trajectory diagnostics.
    """
    if not isinstance(rho0, DensityMatrix2):
        rho0 = DensityMatrix2(np.asarray(rho0, dtype=complex))
    y0 = _pack_rho(rho0.matrix)
    grid, Y, _, diag, g_dir = _kernel_call(MODE_DENSITY, y0, spec, device, lam, cfg, clamp=False)
    flat = _unpack_series(Y)
    rho_series = flat.reshape(-1, 2, 2)
    herm = np.max(np.abs(rho_series - rho_series.conj().transpose(0, 2, 1)))
    trace_drift = np.max(np.abs(rho_series[:, 0, 0].real + rho_series[:, 1, 1].real - 1.0))
    n_series = np.empty((len(grid), 3))
    n_series[:, 0] = rho_series[:, 0, 1].real + rho_series[:, 1, 0].real
    n_series[:, 1] = rho_series[:, 1, 0].imag - rho_series[:, 0, 1].imag
    n_series[:, 2] = rho_series[:, 0, 0].real - rho_series[:, 1, 1].real
    diag = dict(diag)
    diag["hermiticity_residual"] = float(herm)
    diag["trace_drift"] = float(trace_drift)
    n0 = BlochVector(n_series[0])
    return _finish_trajectory(grid, n_series, spec, device, _check_lam(lam), g_dir, diag, n0)


def integrate_propagator(
    spec: ObservableSpec, device: DeviceConfig, lam, cfg: IntegratorConfig
) -> PropagatorHistory:
    """Integrate the propagator ODE with per-step Frobenius renormalization.

    K(0) = I; the propagator is independent of the initial state, so one
    history serves any rho0 via ``PropagatorHistory.reconstruct``.
    """
    y0 = _pack_rho(np.eye(2, dtype=complex) / np.sqrt(2.0))
    grid, Y, log_scale, diag, _ = _kernel_call(MODE_PROPAGATOR, y0, spec, device, lam, cfg, clamp=False)
    # Undo the unit-norm start: K(0) = I corresponds to log_scale log sqrt2.
    k_series = _unpack_series(Y).reshape(-1, 2, 2)
    return PropagatorHistory(
        t=grid,
        K=k_series,
        log_scale=log_scale + 0.5 * np.log(2.0),
        diagnostics=dict(diag),
    )


def epsilon_via_propagator(k_history: PropagatorHistory, rho_a0, rho_0, eps0: float) -> np.ndarray:
    """eps(t) = eps0 Tr(K rho_a0 K^dag) / Tr(K rho_0 K^dag).

    The per-sample normalization of K cancels in the ratio.
    """
    if not (0.0 <= eps0 <= 1.0):
        raise DomainError("eps0 must lie in [0, 1]")
    rho_a0 = rho_a0.matrix if isinstance(rho_a0, DensityMatrix2) else np.asarray(rho_a0, complex)
    rho_0 = rho_0.matrix if isinstance(rho_0, DensityMatrix2) else np.asarray(rho_0, complex)
    out = np.empty(len(k_history.t))
    for i, k in enumerate(k_history.K):
        denom = (k @ rho_0 @ k.conj().T).trace().real
        if denom <= 0.0:
            raise DegenerateBranchError("Tr(K rho0 K^dag) = 0: degenerate branch")
        num = (k @ rho_a0 @ k.conj().T).trace().real
        out[i] = eps0 * num / denom
    return np.clip(out, 0.0, 1.0)


def epsilon_via_integral(
    traj_a: Trajectory, traj_b: Trajectory, device: DeviceConfig, spec: ObservableSpec, lam, eps0: float
) -> np.ndarray:
    """Logistic form eps(t) = eps0 e^X / (1 - eps0 + eps0 e^X).

    X(t) = lam * integral_0^t g(tau) gdir . (n_a - n_b) dtau, evaluated by
    cumulative Simpson quadrature on the shared sample grid.
    """
    if not (0.0 <= eps0 <= 1.0):
        raise DomainError("eps0 must lie in [0, 1]")
    if len(traj_a.t) != len(traj_b.t) or np.any(traj_a.t != traj_b.t):
        raise GridMismatchError("trajectories are not on a shared grid")
    lam = _check_lam(lam)
    g_dir = device.direction_for(spec.alpha, spec.beta_az)
    integrand = lam * traj_a.g_rate * ((traj_a.n - traj_b.n) @ g_dir)
    x = cumulative_simpson(integrand, x=traj_a.t, initial=0.0)
    # Evaluate the logistic stably for large |X|.
    out = np.empty_like(x)
    pos = x >= 0
    if eps0 == 0.0:
        return np.zeros_like(x)
    if eps0 == 1.0:
        return np.ones_like(x)
    out[pos] = eps0 / (eps0 + (1.0 - eps0) * np.exp(-x[pos]))
    out[~pos] = eps0 * np.exp(x[~pos]) / (1.0 - eps0 + eps0 * np.exp(x[~pos]))
    return out


def rate_of_change(traj: Trajectory) -> np.ndarray:
    """|dn/dt| along the trajectory (from the ODE right-hand side)."""
    if len(traj.t) == 0:
        raise DomainError("empty trajectory")
    return traj.rate
