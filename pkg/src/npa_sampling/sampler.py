"""Numeric moment matrices and the equality partitions read off them."""
from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import reduce
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from npa_sampling.algebra import (
    LevelSpec,
    Monomial,
    Scenario,
    ZERO,
    algebraic_partition,
    generate_basis,
    parse_level,
)
from npa_sampling.partition import EqualityPartition, canonical_labels
from npa_sampling.randquantum import Realization, derive_seed, sample_realization

TOL_EQ = 1e-9
TOL_ZERO = 1e-9


@dataclass(frozen=True, eq=False)
class MomentMatrix:
    """``values[k1, k2] = Tr(rho S_k1^dag S_k2)`` over ``basis``."""

    basis: Tuple[Monomial, ...]
    values: np.ndarray

    @property
    def size(self) -> int:
        return len(self.basis)

    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.values - self.values.conj().T)))

    def min_eigenvalue(self) -> float:
        h = 0.5 * (self.values + self.values.conj().T)
        return float(np.linalg.eigvalsh(h)[0])


def _operator(real: Realization, m: Monomial, cache: Dict) -> np.ndarray:
    """Tensor product over parties of each party's ordered projector product."""
    factors = []
    for party, d in enumerate(real.local_dims):
        word = tuple(s for s in m if s.party == party)
        op = cache.get((party, word))
        if op is None:
            op = np.eye(d, dtype=complex)
            for s in word:
                op = op @ real.projector(s.party, s.setting, s.outcome)
            cache[party, word] = op
        factors.append(op)
    return reduce(np.kron, factors)


def build_moment_matrix(real: Realization, basis: Sequence[Monomial]) -> MomentMatrix:
    """Evaluate the moment matrix of ``real`` on ``basis``.

    With ``rho = F F^dag`` each entry is the Frobenius inner product of
    ``S_k1 F`` and ``S_k2 F``, so the whole matrix is one Gram product.
    """
    if any(m is ZERO for m in basis):
        raise ValueError("basis contains the zero monomial")
    for m in basis:
        for s in m:
            if (s.party >= real.scenario.parties
                    or s.setting >= real.scenario.settings(s.party)
                    or s.outcome >= real.scenario.outcomes[s.party][s.setting] - 1):
                raise ValueError(f"symbol {s} not in the scenario's reduced alphabet")
    f = real.state.factor()
    cache: Dict = {}
    w = np.stack([(_operator(real, m, cache) @ f).ravel() for m in basis])
    gamma = w.conj() @ w.T
    gamma.setflags(write=False)
    return MomentMatrix(tuple(basis), gamma)


def _cluster(values: np.ndarray, tol_eq: float, tol_zero: float) -> np.ndarray:
    """Label cells by value; ``-1`` marks cells within ``tol_zero`` of zero.

    Cells are chained on the real part (sorted, neighbours within ``tol_eq``),
    and every real-part run is chained again on the imaginary part.
    """
    flat = values.ravel()
    labels = np.full(flat.size, -1, dtype=np.int64)
    nz = np.flatnonzero(np.abs(flat) > tol_zero)
    if nz.size == 0:
        return labels.reshape(values.shape)
    re, im = flat.real[nz], flat.imag[nz]
    order = np.argsort(re, kind="stable")
    run = np.empty(nz.size, dtype=np.int64)
    run[order] = np.concatenate(([0], np.cumsum(np.diff(re[order]) > tol_eq)))
    order = np.lexsort((im, run))
    breaks = (np.diff(run[order]) != 0) | (np.diff(im[order]) > tol_eq)
    labels[nz[order]] = np.concatenate(([0], np.cumsum(breaks)))
    return labels.reshape(values.shape)


def _close_under_transpose(labels: np.ndarray) -> np.ndarray:
    """Merge classes until cells of one class have transposes in one class."""
    labels, first = canonical_labels(labels)
    while True:
        mirror = labels.T.ravel()
        rep = mirror[first[labels.ravel()]]
        if np.array_equal(rep, mirror):
            return labels
        k = first.size
        graph = coo_matrix((np.ones(rep.size), (rep, mirror)), shape=(k, k))
        _, comp = connected_components(graph, directed=False)
        labels, first = canonical_labels(comp[labels])


def detect_partition(mats: Sequence[MomentMatrix], tol_eq: float = TOL_EQ,
                     tol_zero: float = TOL_ZERO) -> EqualityPartition:
    """Common refinement of the value partitions of several moment matrices.

    Parameters
    ----------
    mats : sequence of MomentMatrix
        Matrices over one basis, from independent realizations.
    tol_eq, tol_zero : float
        Two cells are equal when both value components differ by at most
        ``tol_eq``; a cell is zero when its modulus is at most ``tol_zero``.

    Raises
    ------
    ValueError
        On an empty list, differing bases or non-positive tolerances.
    """
    if not mats:
        raise ValueError("need at least one moment matrix")
    if tol_eq <= 0 or tol_zero <= 0:
        raise ValueError("tolerances must be positive")
    basis = mats[0].basis
    if any(m.basis != basis for m in mats[1:]):
        raise ValueError("moment matrices are indexed by different bases")
    n = len(basis)
    per_matrix = [_close_under_transpose(_cluster(m.values, tol_eq, tol_zero))
                  for m in mats]
    zero_cells = np.logical_and.reduce(
        [np.abs(m.values) <= tol_zero for m in mats])
    stacked = np.stack([lab.ravel() for lab in per_matrix], axis=1)
    _, combined = np.unique(stacked, axis=0, return_inverse=True)
    labels, first = canonical_labels(combined.reshape(n, n))
    conjugate = np.empty(first.size, dtype=np.int64)
    conjugate[labels.ravel()] = labels.T.ravel()
    zero_class = int(labels.ravel()[np.argmax(zero_cells)]) if zero_cells.any() else None
    values = np.asarray(mats[0].values).ravel()[first].copy()
    if zero_class is not None:
        values[zero_class] = 0.0
    return EqualityPartition(labels, conjugate, zero_class, values=values)


class CountConvention(enum.Enum):
    """Ways of counting the distinct entries of a moment matrix."""

    ALL_CELLS = "all"                    # every class, ZERO and UNIT included
    NONZERO = "nonzero"                  # ZERO excluded
    NONZERO_NONUNIT = "nonzero-nonunit"  # ZERO and UNIT excluded
    HERMITIAN = "hermitian"              # conjugate pairs merged
    HERMITIAN_NONZERO = "hermitian-nonzero"  # conjugate pairs merged, ZERO excluded


DEFAULT_CONVENTION = CountConvention.HERMITIAN_NONZERO


def count_unique(p: EqualityPartition,
                 convention: CountConvention = DEFAULT_CONVENTION) -> int:
    """Number of distinct moment-matrix entries under ``convention``."""
    convention = CountConvention(convention)
    has_zero = p.zero_class is not None
    if convention is CountConvention.ALL_CELLS:
        return p.num_classes
    if convention is CountConvention.NONZERO:
        return p.num_classes - has_zero
    if convention is CountConvention.NONZERO_NONUNIT:
        return p.num_classes - has_zero - 1
    classes = np.arange(p.num_classes)
    orbits = int(np.count_nonzero(classes <= p.conjugate))
    if convention is CountConvention.HERMITIAN_NONZERO:
        orbits -= has_zero
    return orbits


def calibrate_convention(cases: Iterable[Tuple[EqualityPartition, int]]) -> List[CountConvention]:
    """Conventions that reproduce every expected count in ``cases``."""
    cases = list(cases)
    return [c for c in CountConvention
            if all(count_unique(p, c) == expected for p, expected in cases)]


@dataclass(frozen=True)
class ComparisonReport:
    """How a sampled partition relates to the algebraic one.

    ``merges`` lists pairs of algebraic classes that the sample puts in one
    class (extra equalities); ``splits`` lists algebraic classes the sample
    breaks apart, which only happens when a tolerance is too tight.
    """

    classes_sampled: int
    classes_algebraic: int
    merges: Tuple[Tuple[int, int], ...]
    splits: Tuple[int, ...]

    @property
    def is_coarsening(self) -> bool:
        return not self.splits

    @property
    def identical(self) -> bool:
        return not self.splits and not self.merges


def compare_partitions(sampled: EqualityPartition, algebraic: EqualityPartition,
                       convention: CountConvention = DEFAULT_CONVENTION) -> ComparisonReport:
    if sampled.basis_size != algebraic.basis_size:
        raise ValueError(
            f"partition sizes differ: {sampled.basis_size} vs {algebraic.basis_size}")
    pairs = np.unique(np.stack([algebraic.labels.ravel(), sampled.labels.ravel()],
                               axis=1), axis=0)
    alg, smp = pairs[:, 0], pairs[:, 1]
    alg_ids, alg_counts = np.unique(alg, return_counts=True)
    splits = tuple(int(c) for c in alg_ids[alg_counts > 1])
    merges = []
    order = np.lexsort((alg, smp))
    groups: Dict[int, List[int]] = {}
    for a, s in zip(alg[order], smp[order]):
        groups.setdefault(int(s), []).append(int(a))
    for members in groups.values():
        merges.extend((members[0], other) for other in members[1:])
    return ComparisonReport(count_unique(sampled, convention),
                            count_unique(algebraic, convention),
                            tuple(merges), splits)


def check_result1(scenario: Scenario, level: Union[LevelSpec, str, int], rank: int) -> bool:
    """Whether sampling is predicted to recover exactly the algebraic equalities.

    True when the longest single-party word is shorter than 3, or every party
    has fewer than 3 independent projectors, or the rank exceeds 1.
    """
    if not isinstance(level, LevelSpec):
        level = parse_level(str(level))
    few_projectors = all(len(outs) * (max(outs) - 1) < 3 for outs in scenario.outcomes)
    return level.max_party_length() < 3 or few_projectors or rank > 1


def sample_moment_matrices(scenario: Scenario, basis: Sequence[Monomial], rank: int,
                           samples: int, seed: int) -> List[MomentMatrix]:
    """Moment matrices of ``samples`` realizations seeded from ``seed``."""
    if samples < 1:
        raise ValueError(f"need at least one sample, got {samples}")
    return [build_moment_matrix(
                sample_realization(scenario, rank, derive_seed(seed, "sample", k)), basis)
            for k in range(samples)]


def sample_partition(scenario: Scenario, level: Union[LevelSpec, str], rank: int,
                     samples: int = 2, seed: int = 0, tol_eq: float = TOL_EQ,
                     tol_zero: float = TOL_ZERO,
                     basis: Optional[Sequence[Monomial]] = None) -> EqualityPartition:
    """Sample realizations and detect the equality partition in one call."""
    if basis is None:
        if not isinstance(level, LevelSpec):
            level = parse_level(level)
        basis = generate_basis(scenario, level)
    mats = sample_moment_matrices(scenario, basis, rank, samples, seed)
    return detect_partition(mats, tol_eq, tol_zero)


__all__ = [
    "CountConvention",
    "ComparisonReport",
    "DEFAULT_CONVENTION",
    "EqualityPartition",
    "MomentMatrix",
    "algebraic_partition",
    "build_moment_matrix",
    "calibrate_convention",
    "check_result1",
    "compare_partitions",
    "count_unique",
    "detect_partition",
    "sample_moment_matrices",
    "sample_partition",
]
