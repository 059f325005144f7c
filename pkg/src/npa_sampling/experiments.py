"""Monte-Carlo tests of single-party moment equalities.

Each run draws two simplified blocks over ``mnip`` independent projectors,
samples the projectors and a state, and checks whether
``Tr(rho P_a0 P_a1 ...) == Tr(rho P_b0 P_b1 ...)`` within a tolerance.
For non-homogeneous pairs this should never happen; for rank-1 homogeneous
pairs it always does.
"""
from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import reduce
from typing import FrozenSet, List, Optional, Sequence, Tuple

import numpy as np

from npa_sampling.algebra import Block, abstract_block, is_homogeneous_pair
from npa_sampling.randquantum import (
    derive_seed,
    sample_density_matrix,
    sample_projective_measurement,
)

DEFAULT_TOL = 1e-7
MAX_ATTEMPTS = 10 ** 6
EXAMPLE1_PAIR = ((0, 1, 0, 2, 0), (0, 2, 0, 1, 0))


class InfeasibleSpecError(ValueError):
    """No block pair satisfying the constraints was found within the budget."""


@dataclass(frozen=True)
class ExperimentSpec:
    len1: int
    len2: int
    mnip: int
    rank: int
    dim: int
    runs: int
    tol: float = DEFAULT_TOL
    seed: int = 0

    def __post_init__(self):
        if not self.len1 >= self.len2 >= 1:
            raise ValueError(f"need len1 >= len2 >= 1, got {self.len1}, {self.len2}")
        if self.mnip < 2:
            raise ValueError(f"mnip must be at least 2, got {self.mnip}")
        if self.rank < 1 or self.dim < 2 * self.rank:
            raise ValueError(f"need dim >= 2 * rank, got dim={self.dim}, rank={self.rank}")
        if self.runs < 1:
            raise ValueError(f"runs must be positive, got {self.runs}")
        if self.tol <= 0:
            raise ValueError("tolerance must be positive")


@dataclass(frozen=True)
class BlockPairSystem:
    """Two blocks over abstract projectors ``P_0 .. P_{mnip-1}``.

    ``forced`` holds the position pairs ``(c1, c2)`` where both blocks use
    the same projector, so the sampled matrices must coincide there.
    """

    first: Tuple[int, ...]
    second: Tuple[int, ...]

    @property
    def forced(self) -> FrozenSet[Tuple[int, int]]:
        return frozenset((i, j) for i, s in enumerate(self.first)
                         for j, t in enumerate(self.second) if s == t)

    @property
    def blocks(self) -> Tuple[Block, Block]:
        return abstract_block(self.first), abstract_block(self.second)

    def is_homogeneous(self) -> bool:
        return is_homogeneous_pair(*self.blocks)

    def __str__(self):
        def fmt(w):
            return "(" + ",".join(f"P{k}" for k in w) + ")"
        return f"{fmt(self.first)} vs {fmt(self.second)}"


@dataclass(frozen=True)
class ExperimentReport:
    runs_done: int
    equalities_found: int
    min_abs_difference: float
    wall_time: float

    @property
    def all_equal(self) -> bool:
        return self.equalities_found == self.runs_done


def _simplified(words: np.ndarray) -> np.ndarray:
    return np.all(words[:, 1:] != words[:, :-1], axis=1)


def generate_block_pair(spec: ExperimentSpec, seed: int,
                        max_attempts: int = MAX_ATTEMPTS) -> BlockPairSystem:
    """Rejection-sample a pair of blocks meeting the experiment's constraints.

    Both words are uniform over ``range(mnip)``; a draw is kept when both are
    simplified, they differ if their lengths agree, and, for rank 1, they are
    not homogeneous.

    Raises
    ------
    InfeasibleSpecError
        When ``max_attempts`` draws produce no valid pair.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    attempts = 0
    while attempts < max_attempts:
        batch = min(4096, max_attempts - attempts)
        a = rng.integers(spec.mnip, size=(batch, spec.len1))
        b = rng.integers(spec.mnip, size=(batch, spec.len2))
        ok = _simplified(a) & _simplified(b)
        for k in range(batch):
            if not ok[k]:
                continue
            system = BlockPairSystem(tuple(a[k].tolist()), tuple(b[k].tolist()))
            if spec.len1 == spec.len2 and system.first == system.second:
                continue
            if spec.rank == 1 and system.is_homogeneous():
                continue
            return system
        attempts += batch
    raise InfeasibleSpecError(
        f"no valid block pair for l1={spec.len1}, l2={spec.len2}, mnip={spec.mnip}, "
        f"r={spec.rank} in {max_attempts} attempts")


def evaluate_pair(system: BlockPairSystem, rank: int, dim: int,
                  trial_seed: int) -> Tuple[complex, complex]:
    """``Tr(rho * prod(first))`` and ``Tr(rho * prod(second))`` for one sample.

    Every distinct symbol gets its own rank-``rank`` projector; equal symbols
    share the matrix.
    """
    symbols = sorted(set(system.first) | set(system.second))
    proj = {k: sample_projective_measurement(
                dim, rank, 2, derive_seed(trial_seed, "proj", k))[0]
            for k in symbols}
    rho = sample_density_matrix(dim, derive_seed(trial_seed, "state")).entries

    def moment(word):
        op = reduce(np.matmul, (proj[k] for k in word))
        return complex(np.trace(rho @ op))

    return moment(system.first), moment(system.second)


def _trial_chunk(args) -> Tuple[int, int, float]:
    spec, system, indices = args
    found, smallest = 0, np.inf
    for t in indices:
        pair = system or generate_block_pair(spec, derive_seed(spec.seed, "system", t))
        e1, e2 = evaluate_pair(pair, spec.rank, spec.dim, derive_seed(spec.seed, "trial", t))
        diff = abs(e1 - e2)
        found += diff <= spec.tol
        smallest = min(smallest, diff)
    return len(indices), found, smallest


def run_trials(spec: ExperimentSpec, system: Optional[BlockPairSystem] = None,
               workers: int = 1) -> ExperimentReport:
    """Count the runs in which the two moments agree within ``spec.tol``.

    Every run draws a fresh block pair and a fresh realization, both seeded
    from ``spec.seed`` and the run index.  Passing ``system`` pins the block
    pair for all runs.  With ``workers > 1`` runs are spread over processes;
    the totals do not depend on the split.
    """
    start = time.perf_counter()
    indices = list(range(spec.runs))
    if workers > 1:
        chunks = [indices[k::workers] for k in range(workers)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_trial_chunk, [(spec, system, c) for c in chunks if c]))
    else:
        parts = [_trial_chunk((spec, system, indices))]
    runs = sum(p[0] for p in parts)
    found = sum(p[1] for p in parts)
    smallest = min(p[2] for p in parts)
    return ExperimentReport(runs, found, float(smallest), time.perf_counter() - start)


def example1_pair() -> BlockPairSystem:
    return BlockPairSystem(*EXAMPLE1_PAIR)


def verify_homogeneous_equality(length: int = 5, trials: int = 1000, seed: int = 0,
                                dim: int = 3, tol: float = 1e-9) -> ExperimentReport:
    """Positive control: a rank-1 homogeneous pair agrees in every trial.

    Length 5 uses ``(P0,P1,P0,P2,P0)`` against ``(P0,P2,P0,P1,P0)``; longer
    lengths use the first homogeneous pair of that length over 3 symbols.
    """
    if length == 5:
        system = example1_pair()
    else:
        from npa_sampling.algebra import enumerate_homogeneous_pairs
        found = [p for p in enumerate_homogeneous_pairs(length, 3) if len(p[0]) == length]
        if not found:
            raise ValueError(f"no homogeneous pair of length {length} over 3 symbols")
        system = BlockPairSystem(tuple(s.setting for s in found[0][0].symbols),
                                 tuple(s.setting for s in found[0][1].symbols))
    spec = ExperimentSpec(length, length, 3, 1, dim, trials, tol, seed)
    return run_trials(spec, system=system)


@dataclass(frozen=True)
class ExperimentRow:
    """One record of an experiment file; ``control`` rows pin the homogeneous pair."""

    spec: ExperimentSpec
    control: bool = False
    line: int = 0


_FIELDS = {"l1": int, "l2": int, "mnip": int, "r": int, "d": int,
           "runs": int, "tol": float, "seed": int}


def parse_experiment_file(text: str) -> List[ExperimentRow]:
    """Parse ``key=value`` records, one per line; ``#`` starts a comment.

    Keys are ``l1 l2 mnip r d runs tol seed`` (``l2`` defaults to ``l1``,
    ``tol`` to 1e-7, ``seed`` to 0) plus ``pair=example1`` for the rank-1
    homogeneous control.

    Raises
    ------
    ValueError
        With the 1-based line number of the first malformed record.
    """
    rows = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        values = {}
        control = False
        try:
            for tok in line.split():
                key, sep, val = tok.partition("=")
                if not sep:
                    raise ValueError(f"expected key=value, got {tok!r}")
                if key == "pair":
                    if val != "example1":
                        raise ValueError(f"unknown pair {val!r}")
                    control = True
                elif key in _FIELDS:
                    values[key] = _FIELDS[key](val)
                else:
                    raise ValueError(f"unknown key {key!r}")
            missing = {"l1", "mnip", "r", "d", "runs"} - values.keys()
            if missing:
                raise ValueError(f"missing {', '.join(sorted(missing))}")
            spec = ExperimentSpec(values["l1"], values.get("l2", values["l1"]),
                                  values["mnip"], values["r"], values["d"],
                                  values["runs"], values.get("tol", DEFAULT_TOL),
                                  values.get("seed", 0))
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
        rows.append(ExperimentRow(spec, control, lineno))
    return rows


def row_status(row: ExperimentRow, report: ExperimentReport) -> str:
    """``OK`` (no equality), ``EQ`` (control, all equal) or ``FAIL``."""
    if row.control:
        return "EQ" if report.all_equal else "FAIL"
    return "OK" if report.equalities_found == 0 else "FAIL"


def format_report_table(rows: Sequence[ExperimentRow],
                        reports: Sequence[ExperimentReport]) -> str:
    header = f"{'l1':>3} {'l2':>3} {'MNIP':>4} {'r':>2} {'d':>3} {'Runs':>8} " \
             f"{'Equal':>6} {'min|e1-e2|':>11} Result"
    lines = [header]
    for row, rep in zip(rows, reports):
        s = row.spec
        lines.append(f"{s.len1:>3} {s.len2:>3} {s.mnip:>4} {s.rank:>2} {s.dim:>3} "
                     f"{rep.runs_done:>8} {rep.equalities_found:>6} "
                     f"{rep.min_abs_difference:>11.3e} {row_status(row, rep)}")
    return "\n".join(lines)
