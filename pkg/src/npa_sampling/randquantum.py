"""Random quantum states and projective measurements.

Gaussian entries come from numpy's ``Generator`` backed by the PCG64 bit
generator; ``standard_normal`` uses the ziggurat transform.  A seed is any
integer in ``[0, 2**64)``.  Seeds for sub-samples are derived with
:func:`derive_seed`, a BLAKE2b hash of the master seed and a tuple of tags,
so every (party, setting, role) of a realization draws from its own stream.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from npa_sampling.algebra import Scenario

SEED_MASK = (1 << 64) - 1


def derive_seed(master: int, *tags) -> int:
    """Hash ``master`` and ``tags`` into a 64-bit seed.

    The digest is BLAKE2b with an 8-byte output over the ASCII string
    ``"master|tag1|tag2|..."``, read as a little-endian unsigned integer.
    """
    key = "|".join(str(t) for t in (int(master) & SEED_MASK, *tags))
    digest = hashlib.blake2b(key.encode("ascii"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(int(seed) & SEED_MASK))


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """A positive semidefinite, unit-trace complex matrix."""

    dim: int
    entries: np.ndarray

    def factor(self) -> np.ndarray:
        """Return ``F`` with ``F @ F.conj().T == entries`` (eigen square root)."""
        w, v = np.linalg.eigh(self.entries)
        return v * np.sqrt(np.clip(w, 0.0, None))


@dataclass(frozen=True, eq=False)
class ProjectorSet:
    """Mutually orthogonal projectors summing to the identity.

    All but the last projector have rank ``rank``; the last one takes the
    remaining ``dim - rank * (n - 1)`` dimensions.
    """

    dim: int
    rank: int
    projectors: Tuple[np.ndarray, ...]

    def __len__(self) -> int:
        return len(self.projectors)

    def __getitem__(self, k: int) -> np.ndarray:
        return self.projectors[k]


@dataclass(frozen=True, eq=False)
class Realization:
    """State and per-party, per-setting measurements for a scenario.

    ``measurements[i][x]`` is the :class:`ProjectorSet` of party ``i`` and
    setting ``x``; it acts on the local space of dimension ``local_dims[i]``.
    """

    scenario: Scenario
    rank: int
    local_dims: Tuple[int, ...]
    state: DensityMatrix
    measurements: Tuple[Tuple[ProjectorSet, ...], ...]
    seed: int

    def projector(self, party: int, setting: int, outcome: int) -> np.ndarray:
        return self.measurements[party][setting][outcome]


def sample_density_matrix(dim: int, seed: int) -> DensityMatrix:
    """Sample ``rho = M M^dag / Tr(M M^dag)`` with complex Ginibre ``M``.

    Parameters
    ----------
    dim : int
        Hilbert-space dimension, at least 1.
    seed : int
        64-bit seed; equal seeds give bit-identical matrices.

    Raises
    ------
    ValueError
        If ``dim < 1``.
    """
    if dim < 1:
        raise ValueError(f"dimension must be positive, got {dim}")
    rng = _rng(seed)
    m = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    g = m @ m.conj().T
    rho = g / np.trace(g).real
    # exact Hermitian symmetry; the product above is only symmetric to rounding
    rho = 0.5 * (rho + rho.conj().T)
    return DensityMatrix(dim, _frozen(rho))


def sample_projective_measurement(dim: int, rank: int, n_outcomes: int,
                                  seed: int) -> ProjectorSet:
    """Group the eigenvectors of a random density matrix into projectors.

    Groups ``0 .. n_outcomes-2`` hold ``rank`` eigenvectors each and the
    final group holds whatever is left.

    Raises
    ------
    ValueError
        If ``dim < rank * n_outcomes`` or any argument is non-positive.
    """
    if rank < 1 or n_outcomes < 1:
        raise ValueError("rank and number of outcomes must be positive")
    if dim < rank * n_outcomes:
        raise ValueError(
            f"dimension {dim} too small for {n_outcomes} projectors of rank {rank}")
    rho = sample_density_matrix(dim, seed).entries
    _, vecs = np.linalg.eigh(rho)
    projectors = []
    for j in range(n_outcomes):
        stop = (j + 1) * rank if j < n_outcomes - 1 else dim
        cols = vecs[:, j * rank:stop]
        projectors.append(_frozen(cols @ cols.conj().T))
    return ProjectorSet(dim, rank, tuple(projectors))


def local_dimensions(scenario: Scenario, rank: int) -> Tuple[int, ...]:
    """Local dimension of each party: ``rank * max_x N(x)``."""
    return tuple(rank * max(outs) for outs in scenario.outcomes)


def sample_realization(scenario: Scenario, rank: int, seed: int) -> Realization:
    """Sample one projective measurement per (party, setting) and a global state.

    Each sub-sample gets its own seed ``derive_seed(seed, party, setting,
    "meas")``; the state uses ``derive_seed(seed, "state")``.
    """
    if rank < 1:
        raise ValueError(f"rank must be positive, got {rank}")
    dims = local_dimensions(scenario, rank)
    measurements = tuple(
        tuple(
            sample_projective_measurement(
                dims[i], rank, n, derive_seed(seed, i, x, "meas"))
            for x, n in enumerate(outs))
        for i, outs in enumerate(scenario.outcomes))
    state = sample_density_matrix(int(np.prod(dims)), derive_seed(seed, "state"))
    return Realization(scenario, rank, dims, state, measurements, seed)
