import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from npa_sampling.algebra import (
    IDENTITY,
    ZERO,
    Block,
    LevelSpec,
    OperatorSymbol,
    Scenario,
    abstract_block,
    adjoint,
    algebraic_partition,
    canonicalize,
    enumerate_homogeneous_pairs,
    generate_basis,
    is_homogeneous_pair,
    monomial_str,
    parse_level,
    parse_monomial,
    product,
    reduced_alphabet,
)

import oracles

SCENARIO = Scenario.bipartite(2, 3, 3, 2)
ALPHABET = reduced_alphabet(SCENARIO)

words = st.lists(st.sampled_from(ALPHABET), max_size=6)
monomials = words.map(canonicalize)


def _as_tuple(m):
    return oracles.ZERO if m is ZERO else tuple(tuple(s) for s in m)


def test_reduced_alphabet_drops_last_outcome():
    assert len(ALPHABET) == 2 * 2 + 3 * 1
    assert all(s.outcome < SCENARIO.outcomes[s.party][s.setting] - 1 for s in ALPHABET)


def test_scenario_validation():
    with pytest.raises(ValueError):
        Scenario(((2, 1),))
    with pytest.raises(ValueError):
        Scenario(())
    assert Scenario.from_dict(SCENARIO.to_dict()) == SCENARIO


@given(words)
def test_canonicalize_matches_oracle(w):
    assert _as_tuple(canonicalize(w)) == oracles.reduce_word([tuple(s) for s in w])


@given(monomials, monomials, monomials)
def test_product_associative(a, b, c):
    assert product(product(a, b), c) == product(a, product(b, c))


@given(monomials)
def test_identity_is_unit(a):
    assert product(IDENTITY, a) == a == product(a, IDENTITY)


@given(monomials)
def test_adjoint_is_involution(a):
    assert adjoint(adjoint(a)) == a


@given(monomials, monomials)
def test_adjoint_reverses_products(a, b):
    assert adjoint(product(a, b)) == product(adjoint(b), adjoint(a))


@given(monomials)
def test_zero_absorbs(a):
    assert product(ZERO, a) is ZERO
    assert product(a, ZERO) is ZERO


@given(monomials)
def test_idempotent_canonical_form(a):
    if a is not ZERO:
        assert canonicalize(a) == a


@given(monomials)
def test_string_round_trip(a):
    if a is not ZERO:
        assert parse_monomial(monomial_str(a)) == a


def test_orthogonal_outcomes_vanish():
    s = Scenario.bipartite(1, 1, 3, 2)
    a0, a1 = OperatorSymbol(0, 0, 0), OperatorSymbol(0, 0, 1)
    assert canonicalize((a0, a1)) is ZERO
    assert canonicalize((a0, a0)) == (a0,)
    assert len(reduced_alphabet(s)) == 3


def test_parties_commute_but_settings_do_not():
    a0, a1, b0 = OperatorSymbol(0, 0, 0), OperatorSymbol(0, 1, 0), OperatorSymbol(1, 0, 0)
    assert canonicalize((b0, a0)) == canonicalize((a0, b0)) == (a0, b0)
    assert canonicalize((a0, a1)) != canonicalize((a1, a0))


def test_parse_level():
    assert parse_level("3") == LevelSpec(3, ())
    lv = parse_level("1+AB")
    assert lv.base == 1 and str(lv) == "1+AB"
    assert lv.max_party_length() == 1
    with pytest.raises(ValueError):
        parse_level("x")


@pytest.mark.parametrize("dims,level,size", [
    ((2, 2, 2, 2), "1", 5), ((2, 2, 2, 2), "1+AB", 9), ((2, 2, 2, 2), "2", 13),
    ((2, 2, 2, 2), "3", 25), ((3, 3, 2, 2), "3", 88), ((3, 3, 3, 3), "3", 577),
])
def test_basis_size(dims, level, size):
    basis = generate_basis(Scenario.bipartite(*dims), parse_level(level))
    assert len(basis) == size
    assert basis[0] == IDENTITY
    assert len(set(basis)) == size


def test_basis_matches_brute_force():
    basis = generate_basis(Scenario.bipartite(2, 2, 3, 2), parse_level("3"))
    expected = oracles.words_up_to(oracles.bipartite_letters(2, 2, 3, 2), 3)
    assert [_as_tuple(m) for m in basis] == expected


def test_basis_is_graded_and_sorted():
    basis = generate_basis(Scenario.bipartite(2, 2, 3, 3), parse_level("2"))
    keys = [(len(m), tuple(tuple(s) for s in m)) for m in basis]
    assert keys == sorted(keys)


def test_level_zero_single_class():
    basis = generate_basis(SCENARIO, parse_level("0"))
    p = algebraic_partition(basis)
    assert basis == [IDENTITY]
    assert p.num_classes == 1


@pytest.mark.parametrize("dims,level", [((2, 2, 2, 2), "2"), ((2, 3, 3, 2), "2"),
                                        ((2, 2, 2, 2), "1+AB")])
def test_algebraic_partition_matches_oracle(dims, level):
    from npa_sampling.sampler import count_unique
    basis = generate_basis(Scenario.bipartite(*dims), parse_level(level))
    p = algebraic_partition(basis)
    p.check()
    assert count_unique(p) == oracles.hermitian_class_count([_as_tuple(m) for m in basis])


def test_algebraic_partition_cells_agree_with_products():
    basis = generate_basis(Scenario.bipartite(2, 2, 3, 2), parse_level("2"))
    p = algebraic_partition(basis)
    for i, j in itertools.product(range(len(basis)), repeat=2):
        m = product(adjoint(basis[i]), basis[j])
        assert p.monomials[p.class_of(i, j)] == m
    assert p.zero_class is not None
    assert p.monomials[p.zero_class] is ZERO


def test_binary_outcomes_have_no_zero_class():
    basis = generate_basis(Scenario.bipartite(2, 2, 2, 2), parse_level("3"))
    assert algebraic_partition(basis).zero_class is None


def test_homogeneity_example():
    a = abstract_block((0, 1, 0, 2, 0))
    b = abstract_block((0, 2, 0, 1, 0))
    assert is_homogeneous_pair(a, b)
    assert not is_homogeneous_pair(a, abstract_block((0, 1, 0, 1, 0)))


@pytest.mark.parametrize("length,symbols", [(3, 2), (4, 3), (5, 2), (5, 3), (6, 2), (6, 3)])
def test_enumerate_homogeneous_pairs_brute_force(length, symbols):
    found = {tuple(sorted((tuple(s.setting for s in a.symbols),
                           tuple(s.setting for s in b.symbols))))
             for a, b in enumerate_homogeneous_pairs(length, symbols)}
    expected = set()
    for n in range(1, length + 1):
        expected |= oracles.homogeneous_pairs_brute(n, symbols)
    assert found == expected


def test_enumerate_guard():
    with pytest.raises(ValueError):
        enumerate_homogeneous_pairs(9, 2)


def test_block_simplified():
    assert Block(0, tuple(abstract_block((0, 1, 0)).symbols)).is_simplified()
    assert not abstract_block((0, 0, 1)).is_simplified()
