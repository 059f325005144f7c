"""Independent reference implementations used by the tests.

Nothing here imports the package's rewriting, partition or solver code, so
agreement with the package is evidence rather than tautology.
"""
from __future__ import annotations

import itertools
from collections import Counter

import numpy as np

ZERO = "zero"


def reduce_word(word):
    """Normal form of a product of projectors given as (party, setting, outcome).

    Parties commute, so symbols are bucketed per party in order of appearance.
    Inside a party, ``P P = P`` and two outcomes of one setting annihilate.
    """
    per_party = {}
    for sym in word:
        per_party.setdefault(sym[0], []).append(sym)
    out = []
    for party in sorted(per_party):
        stack = []
        for sym in per_party[party]:
            if stack and stack[-1][1] == sym[1]:
                if stack[-1][2] != sym[2]:
                    return ZERO
                continue
            stack.append(sym)
        out.extend(stack)
    return tuple(out)


def dagger(word):
    if word == ZERO:
        return ZERO
    parties = sorted({s[0] for s in word})
    return tuple(s for p in parties for s in reversed([t for t in word if t[0] == p]))


def bipartite_letters(x, y, a, b):
    return ([(0, s, o) for s in range(x) for o in range(a - 1)]
            + [(1, s, o) for s in range(y) for o in range(b - 1)])


def words_up_to(letters, length):
    """All reduced nonzero words of at most ``length`` letters (level-n basis)."""
    found = {()}
    for n in range(1, length + 1):
        for w in itertools.product(letters, repeat=n):
            r = reduce_word(w)
            if r != ZERO:
                found.add(r)
    return sorted(found, key=lambda w: (len(w), w))


def ab_words(letters):
    """Words ``A B`` with one letter from each party."""
    alice = [s for s in letters if s[0] == 0]
    bob = [s for s in letters if s[0] == 1]
    return [(p, q) for p in alice for q in bob]


def hermitian_class_count(basis):
    """Distinct entries up to conjugation, ZERO excluded, identity included."""
    classes = set()
    for u in basis:
        for v in basis:
            m = reduce_word(dagger(u) + v)
            if m == ZERO:
                continue
            classes.add(min(m, dagger(m)))
    return len(classes)


def is_homogeneous(w1, w2):
    """Same length, ends and multiset of consecutive pairs."""
    if len(w1) != len(w2):
        return False
    if not w1:
        return True
    return (w1[0] == w2[0] and w1[-1] == w2[-1]
            and Counter(zip(w1, w1[1:])) == Counter(zip(w2, w2[1:])))


def homogeneous_pairs_brute(length, symbols):
    """Distinct simplified words of one length that form homogeneous pairs."""
    words = [w for w in itertools.product(range(symbols), repeat=length)
             if all(a != b for a, b in zip(w, w[1:]))]
    return {(u, v) for u in words for v in words if u < v and is_homogeneous(u, v)}


def rank1_symbolic_count(basis):
    """Rank-1 count predicted by merging entries with homogeneous party blocks.

    Two entries are equal with probability one when, party by party, their
    words are homogeneous.  Returns the number of classes up to conjugation
    with ZERO excluded.
    """
    def signature(m):
        sig = []
        for p in (0, 1):
            w = tuple(s[1:] for s in m if s[0] == p)
            if not w:
                sig.append(())
                continue
            sig.append((len(w), w[0], w[-1], tuple(sorted(Counter(zip(w, w[1:])).items()))))
        return tuple(sig)

    monos = set()
    for u in basis:
        for v in basis:
            m = reduce_word(dagger(u) + v)
            if m != ZERO:
                monos.add(m)
    parent = {}

    def find(k):
        while parent.setdefault(k, k) != k:
            k = parent[k]
        return k

    def union(a, b):
        parent[find(a)] = find(b)

    for m in monos:
        union(("m", m), ("s", signature(m)))
        union(("m", m), ("m", dagger(m)))
    return len({find(("m", m)) for m in monos})


def read_sdpa(text):
    """Dense ``(c, F)`` of a single-block SDPA sparse file (``F[0]`` is F_0)."""
    data = [ln for ln in text.splitlines() if ln.strip() and ln.strip()[0] not in '*"']
    m = int(data[0].split()[0])
    n = int(data[2].split()[0])
    c = np.array([float(t) for t in data[3].split()]) if m else np.zeros(0)
    mats = np.zeros((m + 1, n, n))
    for ln in data[4:]:
        k, _, i, j, v = ln.split()
        k, i, j, v = int(k), int(i) - 1, int(j) - 1, float(v)
        mats[k, i, j] = mats[k, j, i] = v
    return c, mats


def solve_sdpa_cvxpy(text):
    """Minimize ``c @ x`` s.t. ``sum x_k F_k - F_0 >= 0`` with an external solver."""
    import cvxpy as cp

    c, mats = read_sdpa(text)
    x = cp.Variable(c.size)
    lmi = -mats[0] + sum(x[k] * mats[k + 1] for k in range(c.size))
    prob = cp.Problem(cp.Minimize(c @ x), [0.5 * (lmi + lmi.T) >> 0])
    prob.solve(solver="CLARABEL")
    return prob.value
