import numpy as np
import pytest

from piezobeam import TABLE1, MaterialParams, derive_constants

# Soft nonstiff constants: both wave speeds order one, so midpoint stepping
# resolves everything and convergence/dissipation properties are testable.
TOY = MaterialParams(L=1.0, rho=1.0, mu=1.0, alpha=2.0, gamma=0.1, beta=1.0)


@pytest.fixture(scope="session")
def table1():
    return TABLE1


@pytest.fixture(scope="session")
def consts1():
    return derive_constants(TABLE1)


@pytest.fixture(scope="session")
def toy():
    return TOY


@pytest.fixture(scope="session")
def toy_consts():
    return derive_constants(TOY)


def random_material(rng: np.random.Generator) -> MaterialParams:
    """Log-uniform material draw keeping a hyperbolicity margin."""
    alpha = 10.0 ** rng.uniform(-2, 10)
    beta = 10.0 ** rng.uniform(-2, 13)
    gamma = rng.uniform(0.05, 0.95) * np.sqrt(alpha / beta) * rng.choice([-1.0, 1.0])
    return MaterialParams(
        L=10.0 ** rng.uniform(-1, 1),
        rho=10.0 ** rng.uniform(-2, 5),
        mu=10.0 ** rng.uniform(-8, 2),
        alpha=alpha,
        gamma=float(gamma),
        beta=beta,
    )
