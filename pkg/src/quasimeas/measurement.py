"""Measurement sampling and ensemble statistics.

Outcomes are drawn from the Born rule; the post-selection dynamics for the
drawn branch then carries the state to the corresponding eigenstate of the
observable.  Because the branch evolution is deterministic, an ensemble of
runs with a shared initial state needs only two trajectory integrations,
one per branch; the statistics reduce to binomial counting.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import math

import numpy as np

from .dynamics import DeviceConfig, IntegratorConfig, Trajectory, integrate_bloch
from .errors import DomainError
from .geometry import DeviceGeometry, is_admissible
from .potentials import InvertedMorse
from .states import (
    BlochVector,
    ObservableSpec,
    as_bloch,
    born_probability,
    von_neumann_projected_state,
)


@dataclass
class MeasurementRecord:
    """One selective measurement: sampled branch, trajectory, projection check."""

    lam: int
    p_lam: float
    trajectory: Trajectory
    final_n: np.ndarray
    vn_reference: np.ndarray
    deviation: float  # Euclidean distance |final_n - lam * axis|


@dataclass
class EnsembleStats:
    """Binomial outcome statistics for repeated runs on a shared initial state."""

    n_runs: int
    count_plus: int
    born_p_plus: float
    deviations: dict = field(default_factory=dict)

    @property
    def count_minus(self) -> int:
        return self.n_runs - self.count_plus

    @property
    def empirical_p_plus(self) -> float:
        return self.count_plus / self.n_runs

    @property
    def z_score(self) -> float:
        """Standardized residual (empirical - born) / binomial std error."""
        p = self.born_p_plus
        diff = self.empirical_p_plus - p
        if p in (0.0, 1.0):
            return 0.0 if diff == 0.0 else math.copysign(math.inf, diff)
        return diff / math.sqrt(p * (1.0 - p) / self.n_runs)


def make_rng(seed) -> np.random.Generator:
    """Seeded PCG64 generator; pass a Generator through unchanged."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.PCG64(seed))


def sample_outcome(n0, spec: ObservableSpec, rng) -> int:
    """Draw lam in {+1, -1} from the Born rule with a uniform variate."""
    p_plus = born_probability(n0, spec, 1)
    return 1 if make_rng(rng).uniform() < p_plus else -1


def run_measurement(
    n0,
    spec: ObservableSpec,
    device: DeviceConfig,
    rng,
    integ_cfg: IntegratorConfig | None = None,
) -> MeasurementRecord:
    """Sample one outcome and integrate the selected-branch dynamics.

    The deviation field measures convergence to the instantaneous-projection
    reference state lam * axis at the final sample.
    """
    integ_cfg = integ_cfg or IntegratorConfig()
    n0 = as_bloch(n0)
    lam = sample_outcome(n0, spec, rng)
    traj = integrate_bloch(n0, spec, device, lam, integ_cfg)
    ref = von_neumann_projected_state(n0, spec, lam).vec
    return MeasurementRecord(
        lam=lam,
        p_lam=born_probability(n0, spec, lam),
        trajectory=traj,
        final_n=traj.final_n,
        vn_reference=ref,
        deviation=float(np.linalg.norm(traj.final_n - ref)),
    )


def branch_deviation(n0, spec, device, lam, integ_cfg) -> tuple[Trajectory, float]:
    traj = integrate_bloch(n0, spec, device, lam, integ_cfg)
    ref = lam * spec.direction
    return traj, float(np.linalg.norm(traj.final_n - ref))


def ensemble_run(
    n0,
    spec: ObservableSpec,
    device: DeviceConfig,
    n_runs: int,
    seed,
    integ_cfg: IntegratorConfig | None = None,
    integrate: bool = True,
) -> EnsembleStats:
    """Repeat the measurement n_runs times and collect outcome statistics.

    Sampling is vectorized.  With ``integrate`` the two branch trajectories
    are integrated once each (the dynamics is outcome-deterministic) and the
    final deviations from the eigenstates stored per branch; a branch with
    zero Born weight is skipped.
    """
    if n_runs < 1:
        raise DomainError("n_runs must be >= 1")
    integ_cfg = integ_cfg or IntegratorConfig()
    n0 = as_bloch(n0)
    p_plus = born_probability(n0, spec, 1)
    u = make_rng(seed).uniform(size=n_runs)
    count_plus = int(np.count_nonzero(u < p_plus))
    deviations = {}
    if integrate:
        for lam, p in ((1, p_plus), (-1, 1.0 - p_plus)):
            if p > 0.0:
                _, dev = branch_deviation(n0, spec, device, lam, integ_cfg)
                deviations[lam] = dev
    return EnsembleStats(
        n_runs=n_runs,
        count_plus=count_plus,
        born_p_plus=p_plus,
        deviations=deviations,
    )


@dataclass
class SweepRow:
    """One point of a device-orientation sweep."""

    Theta: float
    lam: int
    final_axis_component: float  # axis . n at the last sample
    deviation: float


def critical_sweep(
    n0,
    spec: ObservableSpec,
    theta: float,
    Theta_values,
    profile,
    integ_cfg: IntegratorConfig | None = None,
    lams=(1, -1),
    chart_branch: int = 1,
) -> list[SweepRow]:
    """Scan the relative-orientation angle Theta across the transition.

    Near Theta = pi/2 with strong driving the selected branch switches which
    eigenstate it converges to; the sweep records axis . n at the end of the
    evolution for each branch so the switch and the critical slowdown are
    visible.  Inadmissible Theta values are skipped.
    """
    integ_cfg = integ_cfg or IntegratorConfig()
    n0 = as_bloch(n0)
    rows = []
    for Theta in np.atleast_1d(np.asarray(Theta_values, dtype=float)):
        if not is_admissible(spec.alpha, theta, Theta):
            continue
        geom = DeviceGeometry(theta=theta, Theta=float(Theta), chart_branch=chart_branch)
        device = DeviceConfig(geometry=geom, profile=profile)
        for lam in lams:
            traj, dev = branch_deviation(n0, spec, device, lam, integ_cfg)
            rows.append(
                SweepRow(
                    Theta=float(Theta),
                    lam=int(lam),
                    final_axis_component=float(spec.direction @ traj.final_n),
                    deviation=dev,
                )
            )
    return rows


@dataclass
class WeakRunResult:
    """Outcome of a run with driving much weaker than the precession."""

    trajectory: Trajectory
    deviation: float
    residual_transverse: float  # |n - (axis.n) axis| at the last sample


def weak_g_run(
    n0,
    spec: ObservableSpec,
    g0_fraction: float,
    device: DeviceConfig | None = None,
    lam: int = 1,
    integ_cfg: IntegratorConfig | None = None,
) -> WeakRunResult:
    """Integrate a branch with g0 = g0_fraction * omega.

    Weak driving leaves the state precessing far from the eigenstate within
    the standard time window; the residual transverse amplitude quantifies
    the incomplete collapse.  A device with the standard pulse shape is
    built when none is supplied, keeping the supplied fraction.
    """
    if not (0.0 < g0_fraction):
        raise DomainError("g0_fraction must be > 0")
    integ_cfg = integ_cfg or IntegratorConfig()
    n0 = as_bloch(n0)
    if device is None:
        device = DeviceConfig(
            geometry=DeviceGeometry(theta=3 * np.pi / 4, Theta=np.pi / 3, chart_branch=1),
            profile=InvertedMorse(g0_rate=g0_fraction * spec.omega_rate, kappa=1e5),
        )
    traj, dev = branch_deviation(n0, spec, device, lam, integ_cfg)
    axis = spec.direction
    nf = traj.final_n
    residual = float(np.linalg.norm(nf - (axis @ nf) * axis))
    return WeakRunResult(trajectory=traj, deviation=dev, residual_transverse=residual)
