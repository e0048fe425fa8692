
import pytest
from conftest import MIXED_GRAPH, MIXED_SOURCE, growth_graph, insertion_graph

from diagflag.diagembed import (
    DiagonalEmbedding,
    coordinate_flag_of_alpha,
    coordinate_flag_of_beta,
    constant_spaces,
    embedding_from_alpha,
    equivariance_check,
    is_linear_graph,
    is_standard_extension_graph,
    oracle_sweep,
    picard_pullback,
    random_embedding,
    unipotent_inclusion,
)
from diagflag.egraph import (
    EGraph,
    ParabolicRestriction,
    SurjectionAlpha,
    build_from_alpha,
    surjections,
)
from diagflag.errors import DomainError
from diagflag.flagcore import (
    FlagType,
    coordinate_flag,
    is_linear,
    random_flag,
    sample_images,
    support_and_constants,
)
from diagflag.ratlin import Flag, RatSubspace, block_embed


def test_mixed_graph_target_type():
    emb = DiagonalEmbedding(MIXED_GRAPH, MIXED_SOURCE)
    assert emb.target_type == FlagType(6, (1, 3, 5))


def test_mixed_graph_evaluation_formula(rng):
    emb = DiagonalEmbedding(MIXED_GRAPH, MIXED_SOURCE)
    full = RatSubspace.full(3)
    for _ in range(15):
        flag = random_flag(MIXED_SOURCE, rng)
        v1, v2 = flag.chain
        expected = (
            block_embed(v1, 1, 2),
            block_embed(v1, 1, 2) + block_embed(v2, 2, 2),
            block_embed(v2, 1, 2) + block_embed(full, 2, 2),
        )
        assert emb.evaluate(flag).chain == expected


def test_straight_graph_is_identity(rng):
    g = EGraph(3, 3, 1, frozenset({(1, 1, 1), (2, 2, 1), (3, 3, 1)}))
    emb = DiagonalEmbedding(g, FlagType(5, (2, 4)))
    for _ in range(10):
        flag = random_flag(FlagType(5, (2, 4)), rng)
        assert emb.evaluate(flag) == flag


def test_restriction_evaluation_example():
    alpha = SurjectionAlpha.of([1, 2, 2, 3])
    emb = embedding_from_alpha(alpha, 2)
    line = Flag(2, (RatSubspace.span(2, [[1, 1]]),))
    image = emb.evaluate(line)
    assert image.chain[0] == RatSubspace.span(4, [[1, 1, 0, 0]])
    assert image.chain[1] == RatSubspace.span(4, [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 1]])
    assert emb.evaluate(coordinate_flag_of_beta(alpha, 2)) == coordinate_flag_of_alpha(alpha)


def test_evaluate_rejects_wrong_type():
    emb = DiagonalEmbedding(MIXED_GRAPH, MIXED_SOURCE)
    with pytest.raises(DomainError):
        emb.evaluate(coordinate_flag(FlagType(3, (1,))))


def test_pullback_mixed_graph():
    emb = DiagonalEmbedding(MIXED_GRAPH, MIXED_SOURCE)
    assert picard_pullback(emb).matrix == ((1, 0), (1, 1), (0, 1))


def test_pullback_straight_graph():
    g = EGraph(3, 3, 1, frozenset({(1, 1, 1), (2, 2, 1), (3, 3, 1)}))
    emb = DiagonalEmbedding(g, FlagType(4, (1, 2)))
    assert picard_pullback(emb).matrix == ((1, 0), (0, 1))


def test_pullback_never_misses_a_generator():
    """Every source generator is hit: the image of the pullback is not
    contained in any generator-omitting sublattice.  (Rows, by contrast,
    can vanish: a constant target member pulls its generator back to 0.)"""
    zero_row_seen = False
    for n in range(2, 7):
        for d in (2, 3):
            if n % d:
                continue
            for alpha in surjections(n):
                result = build_from_alpha(alpha, n // d)
                if not isinstance(result, ParabolicRestriction):
                    continue
                if result.flag_type is None:
                    continue
                emb = DiagonalEmbedding(result.graph, result.flag_type)
                matrix = picard_pullback(emb).matrix
                for col in range(result.graph.q - 1):
                    assert any(row[col] for row in matrix)
                zero_row_seen = zero_row_seen or not all(any(row) for row in matrix)
    assert zero_row_seen  # constant members do occur in the sweep


def test_linearity_criteria():
    assert not is_linear_graph(MIXED_GRAPH)
    assert not is_standard_extension_graph(MIXED_GRAPH)
    gb = insertion_graph(4, 2)
    gc = growth_graph(4, 2)
    assert is_standard_extension_graph(gb) and is_linear_graph(gb)
    assert is_standard_extension_graph(gc) and is_linear_graph(gc)
    # pullbacks of extension graphs are linear matrices
    for g in (gb, gc):
        emb = DiagonalEmbedding(g, FlagType(4, (1, 2, 3)))
        assert is_linear(picard_pullback(emb))
    # linear but not a standard extension
    r = build_from_alpha(SurjectionAlpha.of([1, 2, 2, 3]), 2)
    assert is_linear_graph(r.graph)
    assert not is_standard_extension_graph(r.graph)


def test_se_graph_implies_linear_exhaustively():
    for n in range(2, 7):
        for d in (2, 3):
            if n % d:
                continue
            for alpha in surjections(n):
                result = build_from_alpha(alpha, n // d)
                if isinstance(result, ParabolicRestriction):
                    if is_standard_extension_graph(result.graph):
                        assert is_linear_graph(result.graph)


def test_linear_graph_iff_linear_pullback():
    for n in range(2, 7):
        for d in (2, 3):
            if n % d:
                continue
            for alpha in surjections(n):
                result = build_from_alpha(alpha, n // d)
                if not isinstance(result, ParabolicRestriction) or result.flag_type is None:
                    continue
                emb = DiagonalEmbedding(result.graph, result.flag_type)
                assert is_linear_graph(result.graph) == is_linear(picard_pullback(emb))


def test_insertion_graph_evaluation(rng):
    """Members below the entry point survive, the entry duplicates the
    previous member plus the new block, later members absorb the block."""
    q, i = 4, 2
    emb = DiagonalEmbedding(insertion_graph(q, i), FlagType(4, (1, 2, 3)))
    full = RatSubspace.full(4)
    for _ in range(10):
        flag = random_flag(FlagType(4, (1, 2, 3)), rng)
        image = emb.evaluate(flag)
        expected = []
        for j in range(1, q + 1):
            if j < i:
                expected.append(block_embed(flag.member(j), 1, 2))
            else:
                expected.append(
                    block_embed(flag.member(j - 1), 1, 2) + block_embed(full, 2, 2)
                )
        assert image.chain == tuple(expected)


def test_growth_graph_evaluation(rng):
    q, i = 4, 2
    emb = DiagonalEmbedding(growth_graph(q, i), FlagType(4, (1, 2, 3)))
    full = RatSubspace.full(4)
    for _ in range(10):
        flag = random_flag(FlagType(4, (1, 2, 3)), rng)
        image = emb.evaluate(flag)
        expected = []
        for j in range(1, q):
            part = block_embed(flag.member(j), 1, 2)
            if j >= i:
                part = part + block_embed(full, 2, 2)
            expected.append(part)
        assert image.chain == tuple(expected)


def test_constant_spaces_mixed_graph():
    emb = DiagonalEmbedding(MIXED_GRAPH, MIXED_SOURCE)
    chain = constant_spaces(emb)
    wbar = block_embed(RatSubspace.full(3), 2, 2)
    assert chain == (RatSubspace.zero(6), RatSubspace.zero(6), wbar)
    sampled, support = support_and_constants(
        sample_images(emb.evaluate, MIXED_SOURCE, seed=3)
    )
    assert tuple(sampled) == chain
    assert support == (1, 2, 3)


def test_constant_spaces_straight_graph():
    g = EGraph(3, 3, 1, frozenset({(1, 1, 1), (2, 2, 1), (3, 3, 1)}))
    emb = DiagonalEmbedding(g, FlagType(4, (1, 2)))
    assert all(c.dim == 0 for c in constant_spaces(emb))


def test_constant_spaces_growth_graph_match_chain():
    emb = DiagonalEmbedding(growth_graph(3, 2), FlagType(3, (1, 2)))
    chain = constant_spaces(emb)
    vbar = block_embed(RatSubspace.full(3), 2, 2)
    assert chain == (RatSubspace.zero(6), vbar)
    sampled, _ = support_and_constants(sample_images(emb.evaluate, emb.source_type, seed=1))
    assert tuple(sampled) == chain


def test_unipotent_inclusion():
    assert unipotent_inclusion(SurjectionAlpha.of([1, 2, 2, 3]), 2)
    assert not unipotent_inclusion(SurjectionAlpha.of([1, 2, 2, 2]), 2)
    assert unipotent_inclusion(SurjectionAlpha.of([1, 2, 2, 3]), 4)  # one block
    with pytest.raises(DomainError):
        unipotent_inclusion(SurjectionAlpha.of([1, 2, 2, 1]), 2)


def test_equivariance_reference_graphs():
    emb = DiagonalEmbedding(MIXED_GRAPH, MIXED_SOURCE)
    assert equivariance_check(emb, trials=50, seed=0).ok
    emb2 = embedding_from_alpha(SurjectionAlpha.of([1, 2, 2, 3]), 2)
    assert equivariance_check(emb2, trials=50, seed=1).ok


def test_mixed_graph_classifies_not_se():
    from diagflag.flagcore import classify_bruteforce

    emb = DiagonalEmbedding(MIXED_GRAPH, MIXED_SOURCE)
    assert classify_bruteforce(emb.evaluate, emb.source_type, seed=0).kind == "not_se"


def test_oracle_sweep_small():
    report = oracle_sweep(4, {2})
    assert report.ok
    assert report.cases == 78  # surjections on 2 and 4 letters
    assert report.parabolic_agreements == 78
    assert report.evaluation_checks > 0


def test_random_embedding_evaluates(rng):
    for _ in range(10):
        emb = random_embedding(rng, max_n=6)
        flag = random_flag(emb.source_type, rng)
        image = emb.evaluate(flag)
        assert image.dims == emb.target_type.dims


def test_embedding_json_roundtrip():
    emb = DiagonalEmbedding(MIXED_GRAPH, MIXED_SOURCE)
    assert DiagonalEmbedding.from_json_obj(emb.to_json_obj()) == emb
    via_alpha = DiagonalEmbedding.from_json_obj({"alpha": [1, 2, 2, 3], "m": 2})
    assert via_alpha == embedding_from_alpha(SurjectionAlpha.of([1, 2, 2, 3]), 2)
