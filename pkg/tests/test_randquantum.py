import numpy as np
import pytest

from npa_sampling.algebra import Scenario
from npa_sampling.randquantum import (
    derive_seed,
    local_dimensions,
    sample_density_matrix,
    sample_projective_measurement,
    sample_realization,
)

SEEDS = range(100)
ATOL = 1e-10


@pytest.mark.parametrize("seed", SEEDS)
def test_density_matrix_is_a_state(seed):
    dim = 2 + seed % 7
    rho = sample_density_matrix(dim, seed).entries
    assert rho.shape == (dim, dim)
    assert np.allclose(rho, rho.conj().T, atol=0)
    assert abs(np.trace(rho) - 1) < ATOL
    assert np.linalg.eigvalsh(rho)[0] > -ATOL


@pytest.mark.parametrize("seed", SEEDS)
def test_projectors_form_a_measurement(seed):
    rank, n = 1 + seed % 3, 2 + seed % 3
    dim = rank * n + seed % 2
    ps = sample_projective_measurement(dim, rank, n, seed)
    assert len(ps) == n
    for j, p in enumerate(ps.projectors):
        assert np.allclose(p @ p, p, atol=ATOL)
        assert np.allclose(p, p.conj().T, atol=ATOL)
        expected = rank if j < n - 1 else dim - rank * (n - 1)
        assert abs(np.trace(p).real - expected) < ATOL
        for q in ps.projectors[j + 1:]:
            assert np.allclose(p @ q, 0, atol=ATOL)
    assert np.allclose(sum(ps.projectors), np.eye(dim), atol=ATOL)


def test_sampling_is_deterministic():
    a = sample_density_matrix(4, 17).entries
    b = sample_density_matrix(4, 17).entries
    assert np.array_equal(a, b)
    assert not np.array_equal(a, sample_density_matrix(4, 18).entries)


def test_derive_seed():
    assert derive_seed(1, "a") == derive_seed(1, "a")
    assert derive_seed(1, "a") != derive_seed(1, "b")
    assert derive_seed(1, 0, 1) != derive_seed(1, 1, 0)
    assert 0 <= derive_seed(-5, "x") < 2 ** 64


def test_invalid_arguments():
    with pytest.raises(ValueError):
        sample_density_matrix(0, 1)
    with pytest.raises(ValueError):
        sample_projective_measurement(3, 2, 2, 1)
    with pytest.raises(ValueError):
        sample_realization(Scenario.bipartite(2, 2, 2, 2), 0, 1)


def test_realization_dimensions():
    sc = Scenario.bipartite(2, 3, 3, 2)
    assert local_dimensions(sc, 2) == (6, 4)
    real = sample_realization(sc, 2, 5)
    assert real.state.dim == 24
    assert len(real.measurements[1]) == 3
    assert real.projector(0, 1, 2).shape == (6, 6)
    f = real.state.factor()
    assert np.allclose(f @ f.conj().T, real.state.entries, atol=ATOL)
