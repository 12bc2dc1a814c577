"""Simulator for selective quantum measurement as quasilinear evolution of a
two-level system: Bloch / density-matrix / propagator dynamics, closed-form
parallel solutions, measurement statistics, and a Stern-Gerlach application.
"""

from .analytic import (
    ParallelScenario,
    bloch_parallel,
    k_parallel,
    k_parallel_normalized,
    projector_limit,
)
from .backend import active_backend
from .dynamics import (
    DeviceConfig,
    IntegratorConfig,
    PropagatorHistory,
    Trajectory,
    epsilon_via_integral,
    epsilon_via_propagator,
    integrate_bloch,
    integrate_density,
    integrate_propagator,
    rate_of_change,
)
from .errors import (
    ChartSingularityError,
    ConfigError,
    DegenerateBranchError,
    DegenerateObservableError,
    DomainError,
    GridMismatchError,
    InadmissibleConfigError,
    IntegrationError,
    NoCrossingError,
    OverflowRangeError,
    QuasimeasError,
)
from .geometry import (
    CasimirPair,
    DeviceGeometry,
    casimirs,
    g_direction,
    generator_eigenvalue,
    is_admissible,
    is_critical,
    sl2c_conjugate,
    unit_omega,
)
from .measurement import (
    EnsembleStats,
    MeasurementRecord,
    ensemble_run,
    run_measurement,
    sample_outcome,
)
from .potentials import (
    InvertedMorse,
    SternGerlachTime,
    ZeroProfile,
    gamma,
    morse_crossing_times,
)
from .states import (
    BlochVector,
    DensityMatrix2,
    ObservableSpec,
    Projector2,
    bloch_from_density,
    born_probability,
    density_from_bloch,
    spectral_projectors,
    von_neumann_projected_state,
)
from .sterngerlach import SGConfig, bloch_sg_analytic, integrate_bloch_L, omega_from_b

__version__ = "0.1.0"
