import numpy as np
import pytest

from npa_sampling.experiments import (
    BlockPairSystem,
    ExperimentReport,
    ExperimentRow,
    ExperimentSpec,
    InfeasibleSpecError,
    evaluate_pair,
    example1_pair,
    generate_block_pair,
    parse_experiment_file,
    row_status,
    run_trials,
    verify_homogeneous_equality,
)

import oracles


def test_spec_validation():
    with pytest.raises(ValueError):
        ExperimentSpec(2, 3, 2, 1, 2, 10)
    with pytest.raises(ValueError):
        ExperimentSpec(3, 3, 1, 1, 2, 10)
    with pytest.raises(ValueError):
        ExperimentSpec(3, 3, 2, 2, 3, 10)
    with pytest.raises(ValueError):
        ExperimentSpec(3, 3, 2, 1, 2, 0)


@pytest.mark.parametrize("seed", range(30))
def test_generated_pairs_meet_constraints(seed):
    len1 = 3 + seed % 4
    spec = ExperimentSpec(len1, min(len1, 2 + seed % 3), 2 + seed % 3, 1 + seed % 2, 8, 1)
    pair = generate_block_pair(spec, seed)
    assert len(pair.first) == spec.len1 and len(pair.second) == spec.len2
    for w in (pair.first, pair.second):
        assert all(a != b for a, b in zip(w, w[1:]))
        assert max(w) < spec.mnip
    assert pair.first != pair.second
    if spec.rank == 1:
        assert not oracles.is_homogeneous(pair.first, pair.second)


def test_short_binary_pair_exists():
    # both simplified words of length 3 over two symbols form a valid pair
    pair = generate_block_pair(ExperimentSpec(3, 3, 2, 1, 2, 1), 0)
    assert {pair.first, pair.second} == {(0, 1, 0), (1, 0, 1)}


def test_infeasible_budget():
    with pytest.raises(InfeasibleSpecError):
        generate_block_pair(ExperimentSpec(8, 8, 2, 1, 2, 1), 0, max_attempts=1)


def test_forced_equivalences():
    pair = BlockPairSystem((0, 1, 0), (1, 2))
    assert pair.forced == {(1, 0)}
    assert str(pair) == "(P0,P1,P0) vs (P1,P2)"


def test_example1_is_homogeneous():
    pair = example1_pair()
    assert pair.is_homogeneous()
    assert oracles.is_homogeneous(pair.first, pair.second)


@pytest.mark.parametrize("dim", [3, 4, 6])
def test_homogeneous_pair_equal_for_rank1(dim):
    e1, e2 = evaluate_pair(example1_pair(), 1, dim, 12)
    assert abs(e1 - e2) < 1e-12


def test_homogeneous_pair_differs_for_rank2():
    e1, e2 = evaluate_pair(example1_pair(), 2, 6, 12)
    assert abs(e1 - e2) > 1e-6


def test_evaluate_pair_matches_direct_product():
    from npa_sampling.randquantum import (derive_seed, sample_density_matrix,
                                          sample_projective_measurement)
    pair = BlockPairSystem((0, 1, 2), (2, 0))
    e1, e2 = evaluate_pair(pair, 1, 4, 99)
    p = [sample_projective_measurement(4, 1, 2, derive_seed(99, "proj", k))[0]
         for k in range(3)]
    rho = sample_density_matrix(4, derive_seed(99, "state")).entries
    assert e1 == pytest.approx(np.trace(rho @ p[0] @ p[1] @ p[2]))
    assert e2 == pytest.approx(np.trace(rho @ p[2] @ p[0]))


def test_run_trials_counts():
    rep = run_trials(ExperimentSpec(5, 4, 3, 2, 6, 50, seed=3))
    assert rep.runs_done == 50
    assert rep.equalities_found == 0
    assert rep.min_abs_difference > 1e-7


def test_run_trials_deterministic_and_split_invariant():
    spec = ExperimentSpec(4, 3, 3, 1, 4, 20, seed=5)
    a = run_trials(spec)
    b = run_trials(spec, workers=2)
    assert (a.runs_done, a.equalities_found, a.min_abs_difference) == \
           (b.runs_done, b.equalities_found, b.min_abs_difference)


def test_positive_control():
    rep = verify_homogeneous_equality(trials=100)
    assert rep.all_equal
    assert rep.min_abs_difference < 1e-12
    assert verify_homogeneous_equality(length=6, trials=20).all_equal


def test_parse_experiment_file():
    text = "# comment\n\nl1=3 l2=2 mnip=3 r=1 d=4 runs=10  # trailing\n" \
           "pair=example1 l1=5 mnip=3 r=1 d=3 runs=5 tol=1e-9 seed=2\n"
    rows = parse_experiment_file(text)
    assert [r.line for r in rows] == [3, 4]
    assert rows[0].spec == ExperimentSpec(3, 2, 3, 1, 4, 10)
    assert rows[1].control and rows[1].spec.tol == 1e-9


@pytest.mark.parametrize("text,line", [
    ("l1=3 mnip=3 r=1 d=4 runs=10\nl1=3 bogus=1\n", 2),
    ("l1=3 mnip=x r=1 d=4 runs=1\n", 1),
    ("\n\nl1=3 r=1 d=4 runs=1\n", 3),
    ("l1=3 mnip=3 r=2 d=3 runs=1\n", 1),
    ("l1=3 mnip\n", 1),
])
def test_parse_errors_carry_line(text, line):
    with pytest.raises(ValueError, match=f"line {line}:"):
        parse_experiment_file(text)


def test_row_status():
    spec = ExperimentSpec(5, 5, 3, 1, 3, 2)
    assert row_status(ExperimentRow(spec), ExperimentReport(2, 0, 1.0, 0.0)) == "OK"
    assert row_status(ExperimentRow(spec), ExperimentReport(2, 1, 0.0, 0.0)) == "FAIL"
    assert row_status(ExperimentRow(spec, True), ExperimentReport(2, 2, 0.0, 0.0)) == "EQ"
    assert row_status(ExperimentRow(spec, True), ExperimentReport(2, 1, 0.0, 0.0)) == "FAIL"
