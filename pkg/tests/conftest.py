"""Shared reference objects for the test suite."""

import pytest

from diagflag.egraph import EGraph
from diagflag.flagcore import FlagType
from diagflag.ratlin import RatSubspace

# Mixed-colour reference graph: two colours, ordinary edges of both colours,
# hence neither linear nor a standard extension.  Encodes
# {V1, V2} -> {V1, V1 + V2bar, V2 + Wbar} on pairs in a 3-dimensional space.
MIXED_GRAPH = EGraph(
    3, 4, 2, frozenset({(1, 1, 1), (2, 3, 1), (3, 4, 1), (2, 2, 2), (3, 3, 2)})
)
MIXED_SOURCE = FlagType(3, (1, 2))

# Member-inserting extension graph (doubling, insertion at position i):
# colour 1 walks straight then shifts down by one, colour 2 bounds at r_i.
def insertion_graph(q: int, i: int) -> EGraph:
    edges = {(j, j, 1) for j in range(1, i)} | {(j, j + 1, 1) for j in range(i, q + 1)}
    edges.add((q, i, 2))
    return EGraph(q, q + 1, 2, frozenset(edges))


# Member-growing extension graph (doubling, growth from position i):
# colour 1 walks straight, colour 2 bounds at r_i.
def growth_graph(q: int, i: int) -> EGraph:
    edges = {(j, j, 1) for j in range(1, q + 1)}
    edges.add((q, i, 2))
    return EGraph(q, q, 2, frozenset(edges))


# Level graph of the two-factor product chain: stabilizers of a line and a
# hyperplane-minus-one inside each doubled space.
PRODUCT_LEVEL_GRAPH = EGraph(
    3, 3, 2, frozenset({(1, 1, 1), (3, 2, 1), (2, 2, 2), (3, 3, 2)})
)


def subspace(ambient, rows):
    return RatSubspace.span(ambient, rows)


@pytest.fixture
def rng():
    import random

    return random.Random(20240811)
