import numpy as np
import pytest

from momentflow.algebra import (su2_presentation, su2_sym_presentation,
                                torus_presentation, un_presentation)
from momentflow.representation import energy_and_gradient


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def fd_gradient(p, v, h=1e-5):
    """Central finite differences of f = |mu|^2, the independent oracle."""
    out = np.zeros_like(v, dtype=complex)
    for i in range(len(v)):
        for unit in (1.0, 1j):
            e = np.zeros_like(v)
            e[i] = unit
            fp = energy_and_gradient(p, v + h * e)[0]
            fm = energy_and_gradient(p, v - h * e)[0]
            out[i] += (fp - fm) / (2 * h) * unit
    return out


def random_presentation(rng):
    """A random desk-scale presentation: torus, su(2), sym-power or u(n)."""
    kind = rng.integers(0, 4)
    if kind == 0:
        k = int(rng.integers(1, 4))
        n = int(rng.integers(1, 9))
        weights = rng.integers(-3, 4, size=(n, k))
        while not weights.any():
            weights = rng.integers(-3, 4, size=(n, k))
        return torus_presentation(weights)
    if kind == 1:
        return su2_presentation()
    if kind == 2:
        return su2_sym_presentation(int(rng.integers(2, 5)))
    return un_presentation(int(rng.integers(2, 4)))


def random_vector(rng, n, scale=1.0):
    return scale * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
