import numpy as np
import pytest

from quasimeas.dynamics import DeviceConfig, IntegratorConfig
from quasimeas.geometry import DeviceGeometry
from quasimeas.potentials import InvertedMorse
from quasimeas.states import ObservableSpec

# The standard strong-driving configuration used throughout: omega = 1e8 rad/s
# tilted in the x-y plane, inverted Morse driving of equal peak magnitude.
OMEGA = 1e8


@pytest.fixture(scope="session")
def spec_std():
    return ObservableSpec(omega_rate=OMEGA, alpha=np.pi / 2, beta_az=-np.pi / 6)


@pytest.fixture(scope="session")
def device_std():
    return DeviceConfig(
        geometry=DeviceGeometry(theta=3 * np.pi / 4, Theta=np.pi / 3, chart_branch=1),
        profile=InvertedMorse(g0_rate=OMEGA, kappa=1e5),
    )


@pytest.fixture(scope="session")
def cfg_std():
    return IntegratorConfig()


@pytest.fixture(scope="session")
def cfg_fast():
    """Shorter horizon for tests that only need the transient."""
    return IntegratorConfig(t_final=1e-5, samples_per_decade=100)


@pytest.fixture(scope="session")
def n0_pure():
    return np.array([0.0, -1.0 / np.sqrt(2.0), -1.0 / np.sqrt(2.0)])


@pytest.fixture(scope="session")
def n0_half():
    return np.array([0.0, -0.5, -0.5])
