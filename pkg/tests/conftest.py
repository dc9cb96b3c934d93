import numpy as np
import pytest

from jtcqed import DensityMatrix, QOperator, SpaceSpec


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_hermitian(space: SpaceSpec, rng, scale: float = 1.0) -> QOperator:
    n = space.total_dim
    m = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return QOperator(space, scale * (m + m.conj().T) / 2.0)


def random_density(space: SpaceSpec, rng) -> DensityMatrix:
    n = space.total_dim
    m = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    rho = m @ m.conj().T
    rho /= np.trace(rho).real
    return DensityMatrix(space, rho)


def coherent_ket(dim: int, alpha: complex) -> np.ndarray:
    ns = np.arange(dim)
    log_fact = np.cumsum(np.log(np.maximum(ns, 1)))
    amps = np.exp(-0.5 * abs(alpha) ** 2 + ns * np.log(complex(alpha)) - 0.5 * log_fact)
    amps[0] = np.exp(-0.5 * abs(alpha) ** 2)
    return amps


def truncated_geometric(dim: int, nbar: float) -> np.ndarray:
    """Thermal occupation probabilities restricted to ``dim`` levels."""
    q = nbar / (1.0 + nbar)
    p = q ** np.arange(dim)
    return p / p.sum()
