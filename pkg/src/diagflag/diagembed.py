"""Evaluation and invariants of embeddings encoded by two-column graphs.

A DiagonalEmbedding pairs a valid EGraph with a source flag type in Q^m
and evaluates flags into Q^n, n = d*m, by filling each target member with
block copies of source members as the graph dictates.  Evaluation runs
two independent formulas (a cumulative sum over right vertices and a
closed per-colour direct sum) and insists they agree, which continuously
cross-checks the module's core arithmetic.

The module also computes the induced matrix on Picard generators, the
combinatorial linearity and standard-extension criteria, the closed-form
chain of constant spaces, the unipotent-radical inclusion test, and the
exhaustive sweeps that compare every combinatorial verdict against the
exact-linear-algebra oracle.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

from .egraph import (
    EGraph,
    NotParabolic,
    ParabolicRestriction,
    SurjectionAlpha,
    build_from_alpha,
    partition_edges,
    surjections,
    validate_egraph,
)
from .errors import DomainError, InternalCheckError
from .flagcore import FlagType, PicardPullback, flag_type_of, random_flag
from .ratlin import (
    Flag,
    RatSubspace,
    block_diagonal,
    block_embed,
    nilradical_inclusion_oracle,
    random_invertible,
    stabilizer_oracle,
)


@dataclass(frozen=True)
class DiagonalEmbedding:
    """A valid graph together with the source flag type it acts on."""

    graph: EGraph
    source_type: FlagType

    def __post_init__(self) -> None:
        report = validate_egraph(self.graph)
        if not report.ok:
            raise DomainError(f"invalid graph: {'; '.join(report.violations)}")
        if self.source_type.length != self.graph.q - 1:
            raise DomainError(
                f"source type must have {self.graph.q - 1} members, got {self.source_type.length}"
            )

    @property
    def m(self) -> int:
        return self.source_type.ambient

    @property
    def n(self) -> int:
        return self.graph.d * self.m

    @cached_property
    def closed_indices(self) -> tuple[tuple[int, ...], ...]:
        """For each target position j (1..p-1) the tuple over colours of the
        left endpoint of the last colour edge at or above r_j (0 if none)."""
        g = self.graph
        out = []
        for j in range(1, g.p):
            row = []
            for c in range(1, g.d + 1):
                best = 0
                for (i, jj) in g.colour_class(c):
                    if jj <= j:
                        best = max(best, i)
                row.append(best)
            out.append(tuple(row))
        return tuple(out)

    @cached_property
    def target_type(self) -> FlagType:
        ext = (0, *self.source_type.dims, self.m)
        dims = tuple(sum(ext[i] for i in row) for row in self.closed_indices)
        return FlagType(self.n, dims)

    def evaluate(self, flag: Flag) -> Flag:
        """Image flag, computed by both formulas, which must agree."""
        if flag_type_of(flag) != self.source_type:
            raise DomainError("flag does not match the source type")
        g = self.graph
        d, m, n = g.d, self.m, self.n
        at_position: dict[tuple[int, int], int] = {}
        for (i, j, c) in g.edges:
            at_position[(j, c)] = i
        cumulative: list[RatSubspace] = []
        acc = RatSubspace.zero(n)
        for j in range(1, g.p):
            for c in range(1, d + 1):
                i = at_position.get((j, c), 0)
                if i:
                    acc = acc + block_embed(flag.member(i), c, d)
            cumulative.append(acc)
        closed = [
            sum(
                (block_embed(flag.member(i), c + 1, d) for c, i in enumerate(row) if i),
                RatSubspace.zero(n),
            )
            for row in self.closed_indices
        ]
        if cumulative != closed:
            raise InternalCheckError(
                "cumulative and closed evaluation formulas disagree; graph/type data is inconsistent"
            )
        out = Flag(n, tuple(closed))
        if flag_type_of(out) != self.target_type:
            raise InternalCheckError("evaluated flag does not have the declared target type")
        return out

    def to_json_obj(self) -> dict:
        return {
            "graph": self.graph.to_json_obj(),
            "source_type": self.source_type.to_json_obj(),
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "DiagonalEmbedding":
        try:
            if "alpha" in obj:
                alpha = SurjectionAlpha.of([int(v) for v in obj["alpha"]])
                return embedding_from_alpha(alpha, int(obj["m"]))
            graph = EGraph.from_json_obj(obj["graph"])
            source = FlagType.from_json_obj(obj["source_type"])
        except (KeyError, TypeError, ValueError) as exc:
            raise DomainError(f"bad embedding document: {exc}") from exc
        return cls(graph, source)


def embedding_from_alpha(alpha: SurjectionAlpha, m: int) -> DiagonalEmbedding:
    """The embedding of the restricted flag variety, when it exists."""
    result = build_from_alpha(alpha, m)
    if isinstance(result, NotParabolic):
        raise DomainError(f"restriction is not parabolic; witness {result.witness}")
    source = result.flag_type or FlagType(m, ())
    return DiagonalEmbedding(result.graph, source)


def coordinate_flag_of_alpha(alpha: SurjectionAlpha) -> Flag:
    """The coordinate flag whose stabilizer the level map describes."""
    n = alpha.n
    members = []
    for level in range(1, alpha.p):
        vectors = [
            [1 if t == i else 0 for t in range(n)]
            for i, v in enumerate(alpha.values)
            if v <= level
        ]
        members.append(RatSubspace.span(n, vectors))
    return Flag(n, tuple(members))


def picard_pullback(emb: DiagonalEmbedding) -> PicardPullback:
    """Matrix of the induced map on preferred Picard generators.

    Row j sums, over colours, the source generator at the left endpoint of
    the last same-colour edge at or above r_j; endpoints 0 and q
    contribute nothing.
    """
    g = emb.graph
    k = g.q - 1
    rows = []
    for row in emb.closed_indices:
        out = [0] * k
        for i in row:
            if 1 <= i <= k:
                out[i - 1] += 1
        rows.append(tuple(out))
    return PicardPullback(source_rank=k, target_rank=g.p - 1, matrix=tuple(rows))


def is_linear_graph(g: EGraph) -> bool:
    """Between consecutive right endpoints of any one colour, every ordinary
    edge must carry that colour."""
    _, ordinary = partition_edges(g)
    ordinary_colour: dict[int, set[int]] = {}
    for (i, j, c) in ordinary:
        ordinary_colour.setdefault(j, set()).add(c)
    for c in range(1, g.d + 1):
        endpoints = sorted(j for (_, j) in g.colour_class(c))
        for j1, j2 in zip(endpoints, endpoints[1:]):
            for j in range(j1, j2):
                if ordinary_colour.get(j, set()) - {c}:
                    return False
    return True


def is_standard_extension_graph(g: EGraph) -> bool:
    """All ordinary edges of one colour (then the embedding is a strict
    standard extension)."""
    _, ordinary = partition_edges(g)
    colours = {c for (_, _, c) in ordinary}
    return len(colours) <= 1


def constant_spaces(emb: DiagonalEmbedding) -> tuple[RatSubspace, ...]:
    """Closed-form chain of memberwise intersections over all images.

    The intersection at position j is the direct sum of the full blocks
    whose bounding edge arrives at or above r_j; ordering colours by the
    right endpoints of their bounding edges makes the chain nested.
    """
    g = emb.graph
    bounding, _ = partition_edges(g)
    arrival = {c: j for (_, j, c) in bounding}
    full = RatSubspace.full(emb.m)
    out = []
    for j in range(1, g.p):
        blocks = [c for c in range(1, g.d + 1) if arrival[c] <= j]
        out.append(
            sum(
                (block_embed(full, c, g.d) for c in blocks),
                RatSubspace.zero(emb.n),
            )
        )
    return tuple(out)


def unipotent_inclusion(alpha: SurjectionAlpha, m: int) -> bool:
    """Whether the unipotent radical of the restricted stabilizer lands in
    the unipotent radical of the ambient one.

    Holds exactly when distinct block-level tuples differ in every
    coordinate; equivalently every left vertex of the graph meets exactly
    one edge of each colour.  Both characterizations are computed and
    compared.
    """
    result = build_from_alpha(alpha, m)
    if isinstance(result, NotParabolic):
        raise DomainError(f"restriction is not parabolic; witness {result.witness}")
    tuples = result.beta_image
    via_tuples = all(
        all(x != y for x, y in zip(a, b))
        for idx, a in enumerate(tuples)
        for b in tuples[idx + 1 :]
    )
    g = result.graph
    degree: dict[int, int] = {i: 0 for i in range(1, g.q + 1)}
    for (i, _, _) in g.edges:
        degree[i] += 1
    via_graph = all(deg == g.d for deg in degree.values())
    if via_tuples != via_graph:
        raise InternalCheckError("tuple and graph characterizations disagree")
    return via_tuples


@dataclass(frozen=True)
class EquivarianceReport:
    trials: int
    failures: tuple[int, ...]  # indices of failed trials

    @property
    def ok(self) -> bool:
        return not self.failures

    def to_json_obj(self) -> dict:
        return {"trials": self.trials, "failures": list(self.failures), "ok": self.ok}


def equivariance_check(emb: DiagonalEmbedding, trials: int, seed: int = 0) -> EquivarianceReport:
    """Evaluate(g . F) must equal diag(g, ..., g) . evaluate(F) for random
    invertible g and random flags F."""
    rng = random.Random(f"diagflag-equivariance-{seed}")
    failures = []
    for t in range(trials):
        g = random_invertible(emb.m, rng)
        flag = random_flag(emb.source_type, rng)
        big = block_diagonal(g, emb.graph.d)
        if emb.evaluate(flag.apply(g)) != emb.evaluate(flag).apply(big):
            failures.append(t)
    return EquivarianceReport(trials=trials, failures=tuple(failures))


def random_embedding(
    rng: random.Random, max_n: int = 8, d_choices: Sequence[int] = (2, 3)
) -> DiagonalEmbedding:
    """Random embedding drawn through random level maps; the source type is
    the restricted flag type the analysis produces."""
    while True:
        d = rng.choice(list(d_choices))
        m = rng.randint(2, max(2, max_n // d))
        values = [rng.randint(1, max(2, (d * m) // 2)) for _ in range(d * m)]
        labels = {v: i + 1 for i, v in enumerate(sorted(set(values)))}
        alpha = SurjectionAlpha.of([labels[v] for v in values])
        if alpha.p < 2:
            continue
        result = build_from_alpha(alpha, m)
        if isinstance(result, ParabolicRestriction) and result.flag_type is not None:
            return DiagonalEmbedding(result.graph, result.flag_type)


@dataclass(frozen=True)
class SweepReport:
    """Outcome of comparing combinatorial verdicts against the oracle."""

    cases: int
    parabolic_agreements: int
    parabolic_disagreements: tuple[dict, ...]
    unipotent_agreements: int
    unipotent_disagreements: tuple[dict, ...]
    evaluation_checks: int

    @property
    def ok(self) -> bool:
        return not self.parabolic_disagreements and not self.unipotent_disagreements

    def to_json_obj(self) -> dict:
        return {
            "cases": self.cases,
            "parabolic_agreements": self.parabolic_agreements,
            "parabolic_disagreements": list(self.parabolic_disagreements),
            "unipotent_agreements": self.unipotent_agreements,
            "unipotent_disagreements": list(self.unipotent_disagreements),
            "evaluation_checks": self.evaluation_checks,
            "ok": self.ok,
        }


def oracle_sweep(n_max: int, d_set: Iterable[int], check_evaluation: bool = True) -> SweepReport:
    """Exhaustive comparison over every surjective level map with n <= n_max.

    For each map and each block count d dividing n, the combinatorial
    parabolicity verdict is compared with the stabilizer oracle; when both
    say parabolic, the unipotent-inclusion criterion is compared with the
    nilradical oracle, and the evaluated image of the restricted
    coordinate flag is checked to be the ambient coordinate flag.
    """
    if n_max > 8:
        raise DomainError("sweeps are limited to n_max <= 8")
    d_list = sorted(set(d_set))
    cases = 0
    par_agree = 0
    par_bad: list[dict] = []
    uni_agree = 0
    uni_bad: list[dict] = []
    eval_checks = 0
    for n in range(2, n_max + 1):
        for d in d_list:
            if n % d != 0:
                continue
            m = n // d
            for alpha in surjections(n):
                cases += 1
                result = build_from_alpha(alpha, m)
                combinatorial = isinstance(result, ParabolicRestriction)
                flag = coordinate_flag_of_alpha(alpha)
                oracle = stabilizer_oracle(flag, m)
                if combinatorial == oracle.is_parabolic:
                    par_agree += 1
                else:
                    par_bad.append({"alpha": list(alpha.values), "m": m})
                    continue
                if not combinatorial:
                    continue
                uni_comb = unipotent_inclusion(alpha, m)
                uni_oracle = nilradical_inclusion_oracle(flag, m)
                if uni_comb == uni_oracle:
                    uni_agree += 1
                else:
                    uni_bad.append({"alpha": list(alpha.values), "m": m})
                if check_evaluation and result.flag_type is not None:
                    emb = DiagonalEmbedding(result.graph, result.flag_type)
                    source = coordinate_flag_of_beta(alpha, m)
                    if emb.evaluate(source) != flag:
                        raise InternalCheckError(
                            f"restricted coordinate flag does not map to the ambient one for alpha={alpha.values}"
                        )
                    eval_checks += 1
    return SweepReport(
        cases=cases,
        parabolic_agreements=par_agree,
        parabolic_disagreements=tuple(par_bad),
        unipotent_agreements=uni_agree,
        unipotent_disagreements=tuple(uni_bad),
        evaluation_checks=eval_checks,
    )


def coordinate_flag_of_beta(alpha: SurjectionAlpha, m: int) -> Flag:
    """The restricted flag: members span the e_r whose block-level tuple
    is at most each image tuple in turn."""
    result = build_from_alpha(alpha, m)
    if isinstance(result, NotParabolic):
        raise DomainError(f"restriction is not parabolic; witness {result.witness}")
    d = alpha.n // m
    beta = [
        tuple(alpha.values[k * m + r] for k in range(d)) for r in range(m)
    ]
    members = []
    for bound in result.beta_image[:-1]:
        vectors = [
            [1 if t == r else 0 for t in range(m)]
            for r, b in enumerate(beta)
            if all(x <= y for x, y in zip(b, bound))
        ]
        members.append(RatSubspace.span(m, vectors))
    return Flag(m, tuple(members))
