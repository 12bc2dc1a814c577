"""Two-level state and observable algebra.

Pauli basis, Bloch mapping rho = (I + n.sigma)/2, spectral projectors of a
spin observable, Born probabilities, and the instantaneous projection rule
used as the reference for all asymptotic comparisons.

Unit convention: every generator magnitude in this package is stored divided
by hbar, i.e. as an angular rate in rad/s.  ``omega_rate = 1e8`` therefore
corresponds to an observable magnitude of 1e8 * hbar / s.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateBranchError, DegenerateObservableError, DomainError

HERMITICITY_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = 1e-12
BLOCH_NORM_TOL = 1e-10

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
IDENTITY2 = np.eye(2, dtype=complex)
PAULI = np.array([SIGMA_X, SIGMA_Y, SIGMA_Z])


def pauli_expand(scalar, vec):
    """scalar * I + vec . sigma as a complex 2x2 matrix (vec may be complex)."""
    v = np.asarray(vec, dtype=complex)
    return scalar * IDENTITY2 + v[0] * SIGMA_X + v[1] * SIGMA_Y + v[2] * SIGMA_Z


def pauli_components(m):
    """Decompose a 2x2 matrix into (scalar, vec) with m = scalar*I + vec.sigma."""
    m = np.asarray(m, dtype=complex)
    scalar = 0.5 * (m[0, 0] + m[1, 1])
    v1 = 0.5 * (m[0, 1] + m[1, 0])
    v2 = 0.5j * (m[0, 1] - m[1, 0])
    v3 = 0.5 * (m[0, 0] - m[1, 1])
    return scalar, np.array([v1, v2, v3])


def _as_vec3(n):
    v = np.asarray(n, dtype=float)
    if v.shape != (3,):
        raise DomainError(f"expected a real 3-vector, got shape {v.shape}")
    return v


@dataclass(frozen=True)
class BlochVector:
    """Real 3-vector n with |n| <= 1 representing a qubit density operator."""

    vec: np.ndarray

    def __post_init__(self):
        v = _as_vec3(self.vec)
        if not np.all(np.isfinite(v)):
            raise DomainError("Bloch vector has non-finite entries")
        if np.linalg.norm(v) > 1.0 + BLOCH_NORM_TOL:
            raise DomainError(f"Bloch vector norm {np.linalg.norm(v)} exceeds 1")
        object.__setattr__(self, "vec", v)
        self.vec.setflags(write=False)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.vec))

    def __iter__(self):
        return iter(self.vec)


def as_bloch(n) -> BlochVector:
    """Coerce an array-like or BlochVector to a validated BlochVector."""
    if isinstance(n, BlochVector):
        return n
    return BlochVector(np.asarray(n, dtype=float))


@dataclass(frozen=True)
class DensityMatrix2:
    """2x2 Hermitian, unit-trace, positive-semidefinite matrix."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (2, 2):
            raise DomainError("density matrix must be 2x2")
        if np.max(np.abs(m - m.conj().T)) > HERMITICITY_TOL:
            raise DomainError("density matrix is not Hermitian")
        if abs(m.trace() - 1.0) > TRACE_TOL:
            raise DomainError(f"density matrix trace {m.trace()} != 1")
        eigs = np.linalg.eigvalsh(m)
        if eigs.min() < -PSD_TOL:
            raise DomainError(f"density matrix has negative eigenvalue {eigs.min()}")
        object.__setattr__(self, "matrix", m)
        self.matrix.setflags(write=False)


@dataclass(frozen=True)
class Projector2:
    """Rank-one orthogonal projector on C^2."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (2, 2):
            raise DomainError("projector must be 2x2")
        if np.max(np.abs(m @ m - m)) > HERMITICITY_TOL:
            raise DomainError("projector is not idempotent")
        if np.max(np.abs(m - m.conj().T)) > HERMITICITY_TOL:
            raise DomainError("projector is not Hermitian")
        if abs(m.trace() - 1.0) > TRACE_TOL:
            raise DomainError("projector is not rank one")
        object.__setattr__(self, "matrix", m)
        self.matrix.setflags(write=False)


@dataclass(frozen=True)
class ObservableSpec:
    """Observable Omega = (omega_rate/2) unit(alpha, beta_az) . sigma.

    omega_rate is |omega|/hbar in rad/s; alpha is the polar angle from +z,
    beta_az the azimuth.  Eigenvalues are +-omega_rate/2.
    """

    omega_rate: float
    alpha: float = 0.0
    beta_az: float = 0.0

    def __post_init__(self):
        if not (self.omega_rate >= 0.0):
            raise DomainError("omega_rate must be >= 0")
        if not (0.0 <= self.alpha <= np.pi):
            raise DomainError("alpha must lie in [0, pi]")

    @property
    def direction(self) -> np.ndarray:
        """Unit vector along the observable axis (undefined scale-free for omega_rate=0)."""
        a, b = self.alpha, self.beta_az
        return np.array([np.sin(a) * np.cos(b), np.sin(a) * np.sin(b), np.cos(a)])

    @property
    def omega_vec(self) -> np.ndarray:
        return self.omega_rate * self.direction

    def require_nondegenerate(self):
        if self.omega_rate == 0.0:
            raise DegenerateObservableError(
                "omega_rate = 0: observable is degenerate, direction undefined"
            )


def density_from_bloch(n) -> DensityMatrix2:
    """rho = (I + n.sigma)/2 for a Bloch vector n."""
    n = as_bloch(n)
    return DensityMatrix2(0.5 * pauli_expand(1.0, n.vec))


def bloch_from_density(rho: DensityMatrix2) -> BlochVector:
    """n_k = Tr(rho sigma_k); inverse of density_from_bloch."""
    if not isinstance(rho, DensityMatrix2):
        rho = DensityMatrix2(np.asarray(rho, dtype=complex))
    _, v = pauli_components(rho.matrix)
    return BlochVector(2.0 * v.real)


def observable_matrix(spec: ObservableSpec) -> np.ndarray:
    """Omega = (omega_rate/2) direction . sigma (rad/s units, hbar absorbed)."""
    if spec.omega_rate == 0.0:
        return np.zeros((2, 2), dtype=complex)
    return pauli_expand(0.0, 0.5 * spec.omega_vec)


def spectral_projectors(spec: ObservableSpec) -> tuple[Projector2, Projector2]:
    """(Pi_+, Pi_-) with Pi_lambda = (I + lambda direction.sigma)/2."""
    spec.require_nondegenerate()
    d = spec.direction
    plus = Projector2(0.5 * pauli_expand(1.0, d))
    minus = Projector2(0.5 * pauli_expand(1.0, -d))
    return plus, minus


def _check_lambda(lam) -> int:
    if lam not in (1, -1):
        raise DomainError(f"outcome branch must be +1 or -1, got {lam!r}")
    return int(lam)


def born_probability(n0, spec: ObservableSpec, lam) -> float:
    """p_lambda = (1 + lambda direction . n0)/2."""
    spec.require_nondegenerate()
    lam = _check_lambda(lam)
    n0 = as_bloch(n0)
    p = 0.5 * (1.0 + lam * float(spec.direction @ n0.vec))
    return min(max(p, 0.0), 1.0)


def von_neumann_projected_state(n0, spec: ObservableSpec, lam) -> BlochVector:
    """Post-projection state for a rank-one projector: lambda * direction.

    The collapsed state does not depend on n0 as long as the branch has
    nonzero probability.
    """
    lam = _check_lambda(lam)
    if born_probability(n0, spec, lam) <= 0.0:
        raise DegenerateBranchError("cannot project onto a zero-probability branch")
    return BlochVector(lam * spec.direction)
