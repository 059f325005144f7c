"""Bell functionals and the SDP built on an equality partition."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Dict, Mapping, Optional, Sequence, Tuple

import numpy as np

from npa_sampling.algebra import (
    Monomial,
    OperatorSymbol,
    Scenario,
    adjoint,
    canonicalize,
    monomial_str,
)
from npa_sampling.partition import EqualityPartition

Key = Tuple[int, int, int, int]


@dataclass(frozen=True)
class BellFunctional:
    """Coefficients ``c[x, y, a, b]`` of ``sum c P(a, b | x, y)``, 0-based.

    Outcome indices run over the full range, last outcomes included.
    """

    scenario: Scenario
    coefficients: Mapping[Key, float] = field(default_factory=dict)

    def __post_init__(self):
        sc = self.scenario
        if sc.parties != 2:
            raise ValueError("Bell functionals are defined for two parties")
        coeffs = {}
        for key, c in self.coefficients.items():
            x, y, a, b = (int(k) for k in key)
            if not (0 <= x < sc.settings(0) and 0 <= y < sc.settings(1)
                    and 0 <= a < sc.outcomes[0][x] and 0 <= b < sc.outcomes[1][y]):
                raise ValueError(f"coefficient index {key} outside the scenario")
            if c:
                coeffs[(x, y, a, b)] = coeffs.get((x, y, a, b), 0.0) + float(c)
        object.__setattr__(self, "coefficients", coeffs)

    @classmethod
    def chsh(cls, scenario: Optional[Scenario] = None) -> "BellFunctional":
        """``<A0B0> + <A0B1> + <A1B0> - <A1B1>`` with +-1 outcome values."""
        scenario = scenario or Scenario.bipartite(2, 2, 2, 2)
        coeffs = {}
        for x in range(2):
            for y in range(2):
                for a in range(2):
                    for b in range(2):
                        coeffs[x, y, a, b] = (-1) ** (a + b + x * y)
        return cls(scenario, coeffs)

    @classmethod
    def from_records(cls, scenario: Scenario, records) -> "BellFunctional":
        """Build from ``{x, y, a, b, c}`` records with 1-based labels."""
        coeffs: Dict[Key, float] = {}
        for rec in records:
            try:
                key = (int(rec["x"]) - 1, int(rec["y"]) - 1,
                       int(rec["a"]) - 1, int(rec["b"]) - 1)
                c = float(rec["c"])
            except (KeyError, TypeError, ValueError) as exc:
                raise ValueError(f"bad functional record {rec!r}") from exc
            if min(key) < 0:
                raise ValueError(f"labels are 1-based, got {rec!r}")
            coeffs[key] = coeffs.get(key, 0.0) + c
        return cls(scenario, coeffs)

    @classmethod
    def load(cls, scenario: Scenario, path) -> "BellFunctional":
        with open(path) as fh:
            doc = json.load(fh)
        if isinstance(doc, dict):
            doc = doc.get("terms", doc.get("records"))
        if not isinstance(doc, list):
            raise ValueError("functional file must hold a list of records")
        return cls.from_records(scenario, doc)

    def to_records(self):
        return [{"x": x + 1, "y": y + 1, "a": a + 1, "b": b + 1, "c": c}
                for (x, y, a, b), c in sorted(self.coefficients.items())]

    def scaled(self, factor: float) -> "BellFunctional":
        return BellFunctional(self.scenario,
                              {k: factor * c for k, c in self.coefficients.items()})

    def evaluate(self, behavior: Mapping[Key, float]) -> float:
        return float(sum(c * behavior[k] for k, c in self.coefficients.items()))

    @property
    def is_zero(self) -> bool:
        return not self.coefficients


@dataclass(frozen=True)
class Affine:
    """``const + sum_k terms[k] * v_k`` over class (or variable) ids."""

    const: float = 0.0
    terms: Mapping[int, float] = field(default_factory=dict)

    def __add__(self, other: "Affine") -> "Affine":
        terms = dict(self.terms)
        for k, c in other.terms.items():
            terms[k] = terms.get(k, 0.0) + c
        return Affine(self.const + other.const, {k: c for k, c in terms.items() if c})

    def __neg__(self) -> "Affine":
        return Affine(-self.const, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other: "Affine") -> "Affine":
        return self + (-other)

    def scale(self, factor: float) -> "Affine":
        return Affine(factor * self.const, {k: factor * c for k, c in self.terms.items()})

    def evaluate(self, values) -> float:
        return self.const + sum(c * values[k] for k, c in self.terms.items())


class MonomialLocator:
    """Finds the class of any monomial that appears as ``S_i^dag S_j``."""

    def __init__(self, basis: Sequence[Monomial], partition: EqualityPartition):
        if len(basis) != partition.basis_size:
            raise ValueError("basis and partition sizes differ")
        self.index = {m: k for k, m in enumerate(basis)}
        self.partition = partition

    def cell(self, m: Monomial) -> Tuple[int, int]:
        for k in range(len(m) + 1):
            left, right = adjoint(m[:k]), m[k:]
            if left in self.index and right in self.index:
                return self.index[left], self.index[right]
        raise ValueError(f"monomial {monomial_str(m)!r} is not an entry of the moment matrix")

    def affine(self, m: Monomial) -> Affine:
        p = self.partition
        c = p.class_of(*self.cell(m))
        if c == p.unit_class:
            return Affine(1.0)
        if c == p.zero_class:
            return Affine(0.0)
        return Affine(0.0, {c: 1.0})


def behavior_map(scenario: Scenario, basis: Sequence[Monomial],
                 partition: EqualityPartition) -> Dict[Key, Affine]:
    """Every ``P(a, b | x, y)`` as an affine form over partition classes.

    Retained outcomes read the cell of ``A^a_x B^b_y``; last outcomes are
    rebuilt from completeness using the marginals ``A^a_x`` and ``B^b_y``.

    Raises
    ------
    ValueError
        If a required monomial is not an entry of the moment matrix.
    """
    if scenario.parties != 2:
        raise ValueError("behaviors are defined for two parties")
    loc = MonomialLocator(basis, partition)
    out: Dict[Key, Affine] = {}
    for x, na in enumerate(scenario.outcomes[0]):
        for y, nb in enumerate(scenario.outcomes[1]):
            alice = [OperatorSymbol(0, x, a) for a in range(na - 1)]
            bob = [OperatorSymbol(1, y, b) for b in range(nb - 1)]
            pa = [loc.affine((s,)) for s in alice]
            pb = [loc.affine((s,)) for s in bob]
            joint = [[loc.affine(canonicalize((sa, sb))) for sb in bob] for sa in alice]
            for a in range(na):
                for b in range(nb):
                    if a < na - 1 and b < nb - 1:
                        p = joint[a][b]
                    elif a < na - 1:
                        p = pa[a] - sum(joint[a], Affine())
                    elif b < nb - 1:
                        p = pb[b] - sum((row[b] for row in joint), Affine())
                    else:
                        p = (Affine(1.0) - sum(pa, Affine()) - sum(pb, Affine())
                             + sum((f for row in joint for f in row), Affine()))
                    out[x, y, a, b] = p
    return out


@dataclass(frozen=True, eq=False)
class SdpProblem:
    """Maximize ``objective @ y + offset`` subject to ``Gamma(y) >= 0``.

    ``Gamma(y)[i, j]`` is ``y[var_of[i, j]]`` where ``var_of[i, j] >= 0`` and
    ``constant[i, j]`` elsewhere.  Both arrays are symmetric.
    """

    var_of: np.ndarray
    constant: np.ndarray
    objective: np.ndarray
    offset: float = 0.0
    labels: Tuple[str, ...] = ()

    @property
    def size(self) -> int:
        return self.var_of.shape[0]

    @property
    def num_vars(self) -> int:
        return self.objective.size

    def matrix(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        return np.where(self.var_of >= 0, y[np.maximum(self.var_of, 0)], self.constant)

    def value(self, y) -> float:
        return float(self.objective @ np.asarray(y, dtype=float) + self.offset)

    def __eq__(self, other):
        if not isinstance(other, SdpProblem):
            return NotImplemented
        return (np.array_equal(self.var_of, other.var_of)
                and np.array_equal(np.where(self.var_of >= 0, 0.0, self.constant),
                                   np.where(other.var_of >= 0, 0.0, other.constant))
                and np.array_equal(self.objective, other.objective)
                and self.offset == other.offset
                and tuple(self.labels) == tuple(other.labels))

    __hash__ = None


def assemble_sdp(partition: EqualityPartition, basis: Sequence[Monomial],
                 functional: BellFunctional, imag_tol: float = 1e-9) -> SdpProblem:
    """Real symmetric SDP whose variables are the free classes of ``partition``.

    A class and its conjugate share one variable.  The unit class is pinned
    to 1 and the zero class to 0; when the partition carries sampled values,
    classes whose values are purely imaginary are pinned to 0 as well.
    """
    p = partition
    var_of_class = np.full(p.num_classes, -1, dtype=np.int64)
    const_of_class = np.zeros(p.num_classes)
    const_of_class[p.unit_class] = 1.0
    nvars = 0
    for c in range(p.num_classes):
        if c in (p.unit_class, p.zero_class):
            continue
        if p.values is not None:
            v = p.values[c]
            if abs(v.real) <= imag_tol and abs(v.imag) > imag_tol:
                continue
        rep = min(c, int(p.conjugate[c]))
        if rep == c:
            var_of_class[c] = nvars
            nvars += 1
        else:
            var_of_class[c] = var_of_class[rep]
    objective = np.zeros(nvars)
    offset = 0.0
    if not functional.is_zero:
        behavior = behavior_map(functional.scenario, basis, p)
        for key, coef in functional.coefficients.items():
            form = behavior[key]
            offset += coef * form.const
            for c, w in form.terms.items():
                k = var_of_class[c]
                if k >= 0:
                    objective[k] += coef * w
                else:
                    offset += coef * w * const_of_class[c]
    var_of = var_of_class[p.labels]
    constant = np.where(var_of >= 0, 0.0, const_of_class[p.labels])
    return SdpProblem(var_of, constant, objective, float(offset),
                      tuple(monomial_str(m) for m in basis))
