"""Projector algebra for Bell scenarios.

Monomials are tuples of :class:`OperatorSymbol` in canonical form: sorted by
party (stable, so the order inside a party is kept), no two adjacent equal
symbols, and no two adjacent symbols of the same setting with different
outcomes.  The empty tuple is the identity and :data:`ZERO` is the zero
operator.  Only the reduced alphabet appears, i.e. the last outcome of every
setting is dropped.
"""
from __future__ import annotations

import itertools
import json
import re
from collections import Counter
from dataclasses import dataclass, field
from operator import itemgetter
from typing import Dict, Iterable, List, NamedTuple, Sequence, Tuple, Union

import numpy as np

from npa_sampling.partition import EqualityPartition


class _ZeroType:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "ZERO"

    def __reduce__(self):
        return (_ZeroType, ())

    def __bool__(self):
        return False


ZERO = _ZeroType()
IDENTITY: Tuple = ()


def party_name(party: int) -> str:
    return chr(ord("A") + party)


def party_index(name: str) -> int:
    if len(name) != 1 or not name.isalpha():
        raise ValueError(f"bad party name {name!r}")
    return ord(name.upper()) - ord("A")


class OperatorSymbol(NamedTuple):
    """Projector of ``party`` for ``setting`` and ``outcome`` (all 0-based)."""

    party: int
    setting: int
    outcome: int

    def __str__(self):
        return f"{party_name(self.party)}{self.setting}.{self.outcome}"


Monomial = Union[Tuple[OperatorSymbol, ...], _ZeroType]


@dataclass(frozen=True)
class Scenario:
    """A Bell scenario given by the outcome counts of every setting.

    ``outcomes[i][x]`` is the number of outcomes of party ``i`` for setting
    ``x``; it must be at least 2.
    """

    outcomes: Tuple[Tuple[int, ...], ...]

    def __post_init__(self):
        outs = tuple(tuple(int(n) for n in party) for party in self.outcomes)
        object.__setattr__(self, "outcomes", outs)
        if not outs:
            raise ValueError("a scenario needs at least one party")
        for i, party in enumerate(outs):
            if not party:
                raise ValueError(f"party {party_name(i)} has no settings")
            if any(n < 2 for n in party):
                raise ValueError(
                    f"party {party_name(i)}: every setting needs at least 2 outcomes")

    @classmethod
    def bipartite(cls, x: int, y: int, a: int, b: int) -> "Scenario":
        """Two parties with ``x``/``y`` settings of ``a``/``b`` outcomes."""
        return cls(((a,) * x, (b,) * y))

    @classmethod
    def from_dict(cls, doc: dict) -> "Scenario":
        outs = doc["outcomes"]
        if "parties" in doc and int(doc["parties"]) != len(outs):
            raise ValueError(
                f"'parties' is {doc['parties']} but 'outcomes' lists {len(outs)}")
        return cls(tuple(tuple(p) for p in outs))

    @classmethod
    def load(cls, path) -> "Scenario":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        return {"parties": self.parties,
                "outcomes": [list(p) for p in self.outcomes]}

    @property
    def parties(self) -> int:
        return len(self.outcomes)

    def settings(self, party: int) -> int:
        return len(self.outcomes[party])

    def __str__(self):
        if self.parties == 2 and all(len(set(p)) == 1 for p in self.outcomes):
            (a, b) = (self.outcomes[0][0], self.outcomes[1][0])
            return f"({self.settings(0)},{self.settings(1)},{a},{b})"
        return str(self.to_dict())


def reduced_alphabet(scenario: Scenario) -> List[OperatorSymbol]:
    """Projectors of all but the last outcome, ordered by (party, setting, outcome)."""
    return [OperatorSymbol(i, x, a)
            for i, party in enumerate(scenario.outcomes)
            for x, n in enumerate(party)
            for a in range(n - 1)]


def canonicalize(raw: Iterable[OperatorSymbol]) -> Monomial:
    """Reduce a word of projectors with commutation, idempotency and orthogonality."""
    out: List[OperatorSymbol] = []
    for s in sorted(raw, key=itemgetter(0)):
        if out:
            top = out[-1]
            if top[0] == s[0] and top[1] == s[1]:
                if top[2] == s[2]:
                    continue
                return ZERO
        out.append(s)
    return tuple(out)


def adjoint(m: Monomial) -> Monomial:
    """Reverse each party's sub-word; projectors are Hermitian."""
    if m is ZERO:
        return ZERO
    out: List[OperatorSymbol] = []
    for _, group in itertools.groupby(m, key=itemgetter(0)):
        out.extend(reversed(list(group)))
    return tuple(out)


def product(m1: Monomial, m2: Monomial) -> Monomial:
    """Canonical form of the concatenation ``m1 m2``."""
    if m1 is ZERO or m2 is ZERO:
        return ZERO
    return canonicalize(m1 + m2)


def monomial_str(m: Monomial) -> str:
    if m is ZERO:
        return "0"
    if not m:
        return "1"
    return " ".join(str(s) for s in m)


_SYMBOL_RE = re.compile(r"^([A-Za-z])(\d+)\.(\d+)$")


def parse_monomial(text: str) -> Monomial:
    """Inverse of :func:`monomial_str` (the result is canonicalized)."""
    text = text.strip()
    if text == "0":
        return ZERO
    if text in ("", "1"):
        return IDENTITY
    symbols = []
    for tok in text.split():
        m = _SYMBOL_RE.match(tok)
        if not m:
            raise ValueError(f"bad operator symbol {tok!r}")
        symbols.append(OperatorSymbol(party_index(m.group(1)),
                                      int(m.group(2)), int(m.group(3))))
    return canonicalize(symbols)


@dataclass(frozen=True)
class LevelSpec:
    """NPA level: all words up to length ``base`` plus party patterns.

    A pattern is a sorted tuple of party indices; ``(0, 1)`` stands for
    ``AB`` and adds every product of one A projector and one B projector.
    """

    base: int
    patterns: Tuple[Tuple[int, ...], ...] = field(default=())

    def __post_init__(self):
        if self.base < 0:
            raise ValueError(f"level must be non-negative, got {self.base}")
        pats = tuple(tuple(sorted(p)) for p in self.patterns)
        if any(not p for p in pats):
            raise ValueError("empty level pattern")
        object.__setattr__(self, "patterns", pats)

    def __str__(self):
        extra = "".join(
            "+" + "".join(party_name(i) for i in p) for p in self.patterns)
        return f"{self.base}{extra}"

    def max_party_length(self) -> int:
        """Longest single-party sub-word any basis element can contain."""
        lengths = [self.base]
        lengths += [max(Counter(p).values()) for p in self.patterns]
        return max(lengths)


def parse_level(text: str) -> LevelSpec:
    """Parse ``"3"``, ``"1+AB"``, ``"2+AAB+ABB"`` and similar strings."""
    parts = str(text).replace(" ", "").split("+")
    try:
        base = int(parts[0])
    except ValueError:
        raise ValueError(f"bad level string {text!r}") from None
    patterns = []
    for p in parts[1:]:
        if not p or not p.isalpha():
            raise ValueError(f"bad level pattern {p!r} in {text!r}")
        patterns.append(tuple(party_index(c) for c in p))
    return LevelSpec(base, tuple(patterns))


def _basis_key(m):
    return (len(m), m)


def generate_basis(scenario: Scenario, level: LevelSpec) -> List[Monomial]:
    """Distinct canonical monomials of the level, identity first.

    Sorted by length, then lexicographically by (party, setting, outcome).
    """
    alphabet = reduced_alphabet(scenario)
    for p in level.patterns:
        if max(p) >= scenario.parties:
            raise ValueError(f"level pattern refers to missing party {party_name(max(p))}")
    found = {IDENTITY}
    frontier = [IDENTITY]
    for length in range(1, level.base + 1):
        nxt = []
        for m in frontier:
            for s in alphabet:
                c = canonicalize(m + (s,))
                if c is not ZERO and len(c) == length and c not in found:
                    found.add(c)
                    nxt.append(c)
        frontier = nxt
    by_party = [[s for s in alphabet if s.party == i] for i in range(scenario.parties)]
    for pattern in level.patterns:
        for word in itertools.product(*(by_party[i] for i in pattern)):
            c = canonicalize(word)
            if c is not ZERO:
                found.add(c)
    return sorted(found, key=_basis_key)


@dataclass(frozen=True)
class Block:
    """The sub-word of one party in a monomial."""

    party: int
    symbols: Tuple[OperatorSymbol, ...]

    def __len__(self):
        return len(self.symbols)

    def __str__(self):
        return "(" + ",".join(str(s) for s in self.symbols) + ")"

    def is_simplified(self) -> bool:
        # equal neighbours collapse, same-setting neighbours are orthogonal
        return all(a.setting != b.setting
                   for a, b in zip(self.symbols, self.symbols[1:]))


def blocks_of(m: Monomial) -> List[Block]:
    """Split a canonical monomial into one block per party that occurs in it.

    Raises
    ------
    ValueError
        If ``m`` is :data:`ZERO`.
    """
    if m is ZERO:
        raise ValueError("the zero monomial has no block decomposition")
    return [Block(party, tuple(group))
            for party, group in itertools.groupby(m, key=itemgetter(0))]


def consecutive_pairs(block: Block) -> Counter:
    return Counter(zip(block.symbols, block.symbols[1:]))


def is_homogeneous_pair(a: Block, b: Block) -> bool:
    """Equal length, equal end symbols and equal multisets of consecutive pairs."""
    if len(a) != len(b):
        return False
    if len(a) == 0:
        return True
    return (a.symbols[0] == b.symbols[0] and a.symbols[-1] == b.symbols[-1]
            and consecutive_pairs(a) == consecutive_pairs(b))


def abstract_symbol(k: int) -> OperatorSymbol:
    """Independent projector ``P_k`` of a single party.

    Distinct abstract symbols sit in distinct settings, so none of them are
    orthogonal to each other.
    """
    return OperatorSymbol(0, k, 0)


def abstract_block(indices: Sequence[int]) -> Block:
    return Block(0, tuple(abstract_symbol(k) for k in indices))


def simplified_words(length: int, num_symbols: int) -> Iterable[Tuple[int, ...]]:
    """Words over ``range(num_symbols)`` without adjacent repeats."""
    if length == 0:
        yield ()
        return
    for first in range(num_symbols):
        stack = [(first,)]
        while stack:
            w = stack.pop()
            if len(w) == length:
                yield w
                continue
            for k in range(num_symbols - 1, -1, -1):
                if k != w[-1]:
                    stack.append(w + (k,))


MAX_ENUM_LENGTH = 8
MAX_ENUM_SYMBOLS = 5


def enumerate_homogeneous_pairs(max_len: int, num_symbols: int) -> List[Tuple[Block, Block]]:
    """All unordered pairs of distinct, homogeneous simplified blocks.

    Blocks range over lengths ``1..max_len`` built from ``num_symbols``
    independent projectors.

    Raises
    ------
    ValueError
        If ``max_len > 8`` or ``num_symbols > 5``.
    """
    if max_len > MAX_ENUM_LENGTH or num_symbols > MAX_ENUM_SYMBOLS:
        raise ValueError(
            f"enumeration bounded by length {MAX_ENUM_LENGTH} and "
            f"{MAX_ENUM_SYMBOLS} symbols, got {max_len} and {num_symbols}")
    pairs = []
    for length in range(1, max_len + 1):
        groups: Dict[tuple, List[Tuple[int, ...]]] = {}
        for w in simplified_words(length, num_symbols):
            key = (w[0], w[-1], tuple(sorted(Counter(zip(w, w[1:])).items())))
            groups.setdefault(key, []).append(w)
        for words in groups.values():
            for u, v in itertools.combinations(sorted(words), 2):
                pairs.append((abstract_block(u), abstract_block(v)))
    return pairs


def algebraic_partition(basis: Sequence[Monomial]) -> EqualityPartition:
    """Group cells ``(k1, k2)`` by the canonical form of ``S_k1^dag S_k2``."""
    n = len(basis)
    adj = [adjoint(m) for m in basis]
    ids: Dict[object, int] = {}
    monomials: List[Monomial] = []
    labels = np.empty((n, n), dtype=np.int64)
    for i in range(n):
        left = adj[i]
        row = labels[i]
        for j in range(n):
            m = canonicalize(left + basis[j])
            c = ids.get(m)
            if c is None:
                c = ids[m] = len(monomials)
                monomials.append(m)
            row[j] = c
    conjugate = np.array([ids[adjoint(m)] for m in monomials], dtype=np.int64)
    zero_class = ids.get(ZERO)
    return EqualityPartition(labels, conjugate, zero_class, tuple(monomials))
