"""Equality partitions of moment-matrix cells."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np


def canonical_labels(labels: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Renumber ``labels`` so class ids follow first occurrence in row-major order.

    Returns the renumbered array and, for each new id, the flat index of its
    first cell.
    """
    flat = np.asarray(labels).ravel()
    _, first, inverse = np.unique(flat, return_index=True, return_inverse=True)
    order = np.argsort(first, kind="stable")
    rank = np.empty_like(order)
    rank[order] = np.arange(order.size)
    return rank[inverse].reshape(np.shape(labels)), first[order]


@dataclass(frozen=True, eq=False)
class EqualityPartition:
    """Cells of an ``N x N`` moment matrix grouped into equality classes.

    Attributes
    ----------
    labels : numpy.ndarray
        ``labels[i, j]`` is the class of cell ``(i, j)``.  Ids are canonical:
        numbered by the first member cell in row-major order, so the unit
        class, which holds cell ``(0, 0)``, is always 0.
    conjugate : numpy.ndarray
        Involution on class ids with ``conjugate[labels[i, j]] == labels[j, i]``.
    zero_class : int or None
        Class of cells that vanish identically, if any.
    monomials : tuple, optional
        Canonical monomial of each class (algebraic partitions).
    values : numpy.ndarray, optional
        Representative complex value of each class (sampled partitions).
    """

    labels: np.ndarray
    conjugate: np.ndarray
    zero_class: Optional[int]
    monomials: Optional[Tuple] = None
    values: Optional[np.ndarray] = None

    unit_class = 0

    @property
    def basis_size(self) -> int:
        return self.labels.shape[0]

    @property
    def num_classes(self) -> int:
        return self.conjugate.size

    def class_of(self, i: int, j: int) -> int:
        return int(self.labels[i, j])

    def members(self, c: int) -> Sequence[Tuple[int, int]]:
        rows, cols = np.nonzero(self.labels == c)
        return list(zip(rows.tolist(), cols.tolist()))

    def same_as(self, other: "EqualityPartition") -> bool:
        return (self.labels.shape == other.labels.shape
                and np.array_equal(self.labels, other.labels)
                and np.array_equal(self.conjugate, other.conjugate)
                and self.zero_class == other.zero_class)

    def check(self) -> None:
        """Raise ``AssertionError`` if a structural invariant is violated."""
        n = self.basis_size
        assert self.labels.shape == (n, n)
        assert self.labels[0, 0] == self.unit_class
        assert np.array_equal(self.conjugate[self.labels], self.labels.T)
        assert np.array_equal(self.conjugate[self.conjugate],
                              np.arange(self.num_classes))
        assert self.conjugate[self.unit_class] == self.unit_class
        if self.zero_class is not None:
            assert self.conjugate[self.zero_class] == self.zero_class
