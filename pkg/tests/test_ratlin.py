import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from diagflag.errors import DomainError
from diagflag.ratlin import (
    Flag,
    RatSubspace,
    block_diagonal,
    block_embed,
    matrix_rank,
    matvec,
    nilradical_inclusion_oracle,
    nullspace,
    random_invertible,
    solve_unique,
    stabilizer_oracle,
)

small_entries = st.integers(-4, 4)


def matrices(rows, cols):
    return st.lists(
        st.lists(small_entries, min_size=cols, max_size=cols),
        min_size=rows,
        max_size=rows,
    )


@given(matrices(3, 4), matrices(3, 3))
@settings(max_examples=80)
def test_canonical_under_change_of_basis(rows, mix):
    """Any generating set of the same subspace reduces to one representation."""
    base = RatSubspace.span(4, rows)
    mixed = [
        [sum(mix[i][j] * Fraction(rows[j][c]) for j in range(3)) for c in range(4)]
        for i in range(3)
    ]
    combined = RatSubspace.span(4, [r for r in rows] + mixed)
    assert combined == base


def test_sum_and_intersect_examples():
    e1 = RatSubspace.span(3, [[1, 0, 0]])
    e2 = RatSubspace.span(3, [[0, 1, 0]])
    assert (e1 + e2) == RatSubspace.span(3, [[1, 0, 0], [0, 1, 0]])
    a = RatSubspace.span(3, [[1, 0, 0], [0, 1, 0]])
    b = RatSubspace.span(3, [[0, 1, 0], [0, 0, 1]])
    assert (a & b) == e2


def test_sum_rejects_ambient_mismatch():
    with pytest.raises(DomainError):
        RatSubspace.span(3, [[1, 0, 0]]) + RatSubspace.span(4, [[1, 0, 0, 0]])


def test_modular_law_on_random_pairs():
    rng = random.Random(7)
    for _ in range(500):
        n = rng.randint(1, 5)
        a = RatSubspace.span(
            n, [[rng.randint(-3, 3) for _ in range(n)] for _ in range(rng.randint(0, n))]
        )
        b = RatSubspace.span(
            n, [[rng.randint(-3, 3) for _ in range(n)] for _ in range(rng.randint(0, n))]
        )
        assert a.dim + b.dim == (a + b).dim + (a & b).dim


def test_block_embed_examples():
    e1 = RatSubspace.span(2, [[1, 0]])
    assert block_embed(e1, 2, 2) == RatSubspace.span(4, [[0, 0, 1, 0]])
    full = RatSubspace.full(2)
    assert block_embed(full, 1, 3) == RatSubspace.span(6, [[1, 0, 0, 0, 0, 0], [0, 1, 0, 0, 0, 0]])
    with pytest.raises(DomainError):
        block_embed(e1, 3, 2)


def test_block_embed_preserves_dimension():
    rng = random.Random(3)
    for _ in range(200):
        m = rng.randint(1, 4)
        d = rng.randint(1, 3)
        sub = RatSubspace.span(
            m, [[rng.randint(-3, 3) for _ in range(m)] for _ in range(rng.randint(0, m))]
        )
        assert block_embed(sub, rng.randint(1, d), d).dim == sub.dim


def test_annihilator_involution_and_dimension():
    rng = random.Random(11)
    for _ in range(100):
        n = rng.randint(1, 5)
        sub = RatSubspace.span(
            n, [[rng.randint(-3, 3) for _ in range(n)] for _ in range(rng.randint(0, n))]
        )
        ann = sub.annihilator()
        assert ann.dim == n - sub.dim
        assert ann.annihilator() == sub


def test_flag_validation():
    line = RatSubspace.span(3, [[1, 0, 0]])
    plane = RatSubspace.span(3, [[1, 0, 0], [0, 1, 0]])
    Flag(3, (line, plane))
    Flag(3, ())  # empty chains are allowed (one-point variety)
    with pytest.raises(DomainError):
        Flag(3, (plane, line))  # not increasing
    with pytest.raises(DomainError):
        Flag(3, (line, line))  # not strict
    with pytest.raises(DomainError):
        Flag(3, (RatSubspace.full(3),))  # not proper
    other = RatSubspace.span(3, [[0, 0, 1]])
    with pytest.raises(DomainError):
        Flag(3, (other, plane))  # plane does not contain the third axis


def test_flag_dual_involution():
    rng = random.Random(5)
    line = RatSubspace.span(4, [[1, 2, 0, 0]])
    big = RatSubspace.span(4, [[1, 2, 0, 0], [0, 0, 1, 1], [0, 1, 0, 3]])
    flag = Flag(4, (line, big))
    dual = flag.dual()
    assert dual.dims == (1, 3)
    assert dual.dual() == flag


def test_member_conventions():
    line = RatSubspace.span(3, [[1, 0, 0]])
    flag = Flag(3, (line,))
    assert flag.member(0) == RatSubspace.zero(3)
    assert flag.member(1) == line
    assert flag.member(2) == RatSubspace.full(3)
    with pytest.raises(DomainError):
        flag.member(3)


def test_stabilizer_nested_flag():
    flag = Flag(
        4,
        (
            RatSubspace.span(4, [[1, 0, 0, 0]]),
            RatSubspace.span(4, [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0]]),
        ),
    )
    res = stabilizer_oracle(flag, 2)
    assert res.is_parabolic
    assert res.dimension == 3
    assert res.root_spaces == frozenset({(1, 2)})


def test_stabilizer_split_line():
    flag = Flag(4, (RatSubspace.span(4, [[1, 0, 0, 0], [0, 0, 0, 1]]),))
    res = stabilizer_oracle(flag, 2)
    assert not res.is_parabolic
    assert res.dimension == 2  # diagonal matrices only
    assert res.root_spaces == frozenset()


def test_stabilizer_single_block_is_full_parabolic():
    # one block: the stabilizer is the parabolic of the flag itself
    flag = Flag(4, (RatSubspace.span(4, [[1, 0, 0, 0], [0, 0, 0, 1]]),))
    res = stabilizer_oracle(flag, 4)
    assert res.is_parabolic
    assert res.dimension == 4 * 4 - 2 * 2


def test_stabilizer_rejects_bad_block_size():
    flag = Flag(4, (RatSubspace.span(4, [[1, 0, 0, 0]]),))
    with pytest.raises(DomainError):
        stabilizer_oracle(flag, 3)


def test_stabilizer_single_block_matches_level_count():
    # with one block the oracle returns the flag's own parabolic, whose
    # dimension is the number of weakly level-increasing coordinate pairs
    for alpha in ((1, 2, 2, 3), (2, 1, 3, 1), (1, 1, 2, 2)):
        n = len(alpha)
        members = []
        for level in range(1, max(alpha)):
            members.append(
                RatSubspace.span(
                    n, [[1 if t == i else 0 for t in range(n)] for i, v in enumerate(alpha) if v <= level]
                )
            )
        flag = Flag(n, tuple(members))
        res = stabilizer_oracle(flag, n)
        expected = n + sum(
            1
            for i in range(n)
            for j in range(n)
            if i != j and alpha[i] <= alpha[j]
        )
        assert res.is_parabolic
        assert res.dimension == expected


def test_nilradical_inclusion_cases():
    nested = Flag(
        4,
        (
            RatSubspace.span(4, [[1, 0, 0, 0]]),
            RatSubspace.span(4, [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0]]),
        ),
    )
    assert nilradical_inclusion_oracle(nested, 2)
    # stabilizer parabolic but nilradical escapes: the line alone
    line_only = Flag(4, (RatSubspace.span(4, [[1, 0, 0, 0]]),))
    assert not nilradical_inclusion_oracle(line_only, 2)
    # one block: trivially included
    assert nilradical_inclusion_oracle(line_only, 4)
    split = Flag(4, (RatSubspace.span(4, [[1, 0, 0, 0], [0, 0, 0, 1]]),))
    with pytest.raises(DomainError):
        nilradical_inclusion_oracle(split, 2)


def test_solve_unique_and_nullspace():
    a = ((Fraction(2), Fraction(1)), (Fraction(1), Fraction(3)))
    x = solve_unique(a, (Fraction(5), Fraction(10)))
    assert matvec(a, x) == (Fraction(5), Fraction(10))
    ns = nullspace([[1, 1, 0], [0, 0, 1]], 3)
    assert ns == ((Fraction(1), Fraction(-1), Fraction(0)),)


def test_random_invertible_has_full_rank():
    rng = random.Random(0)
    for _ in range(20):
        m = random_invertible(4, rng)
        assert matrix_rank(m, 4) == 4


def test_block_diagonal_shape():
    g = ((Fraction(1), Fraction(2)), (Fraction(0), Fraction(1)))
    big = block_diagonal(g, 2)
    assert len(big) == 4
    assert big[2][2] == 1 and big[2][3] == 2 and big[2][0] == 0


def test_subspace_json_roundtrip():
    sub = RatSubspace.span(3, [[1, 2, 3], [0, 1, Fraction(1, 2)]])
    assert RatSubspace.from_json_obj(3, sub.to_json_obj()) == sub
    flag = Flag(3, (RatSubspace.span(3, [[1, 0, Fraction(3, 2)]]),))
    assert Flag.from_json_obj(flag.to_json_obj()) == flag
