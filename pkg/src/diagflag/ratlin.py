"""Exact rational linear algebra: subspaces, flags, and stabilizer oracles.

Everything is computed over the rationals with `fractions.Fraction`; no
floating point enters anywhere.  Subspaces are stored in canonical reduced
row-echelon form, so equality of subspaces is equality of representations
and all values are hashable.

The stabilizer oracle at the bottom of the module is the independent
brute-force route used to cross-check the combinatorial criteria of the
graph modules: it decides, by solving exact linear systems, which matrices
x have block-diagonal copies diag(x, ..., x) preserving a given flag, and
whether the resulting subalgebra is parabolic relative to the standard
diagonal torus.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .errors import DomainError, InternalCheckError

Vector = tuple[Fraction, ...]
Matrix = tuple[Vector, ...]


def to_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise DomainError(f"cannot interpret {x!r} as an exact rational")


def as_vector(entries: Iterable) -> Vector:
    return tuple(to_fraction(x) for x in entries)


def as_matrix(rows: Iterable[Iterable]) -> Matrix:
    return tuple(as_vector(r) for r in rows)


def rref(rows: Iterable[Iterable], width: int) -> Matrix:
    """Canonical reduced row-echelon form, zero rows dropped."""
    work = [list(as_vector(r)) for r in rows]
    for r in work:
        if len(r) != width:
            raise DomainError(f"row width {len(r)} != ambient {width}")
    col = 0
    r0 = 0
    while r0 < len(work) and col < width:
        pivot = next((i for i in range(r0, len(work)) if work[i][col] != 0), None)
        if pivot is None:
            col += 1
            continue
        work[r0], work[pivot] = work[pivot], work[r0]
        inv = work[r0][col]
        work[r0] = [x / inv for x in work[r0]]
        for i in range(len(work)):
            if i != r0 and work[i][col] != 0:
                f = work[i][col]
                work[i] = [a - f * b for a, b in zip(work[i], work[r0])]
        r0 += 1
        col += 1
    return tuple(tuple(r) for r in work[:r0])


def pivots(rows: Matrix) -> tuple[int, ...]:
    out = []
    for r in rows:
        j = next((i for i, x in enumerate(r) if x != 0), None)
        if j is None:
            raise InternalCheckError("zero row in echelon basis")
        out.append(j)
    return tuple(out)


def is_rref(rows: Matrix, width: int) -> bool:
    """Structural test for canonical reduced row-echelon form."""
    last_pivot = -1
    pivot_cols = []
    for r in rows:
        if len(r) != width:
            return False
        j = next((i for i, x in enumerate(r) if x != 0), None)
        if j is None or j <= last_pivot or r[j] != 1:
            return False
        last_pivot = j
        pivot_cols.append(j)
    for idx, r in enumerate(rows):
        for other, j in enumerate(pivot_cols):
            if other != idx and r[j] != 0:
                return False
    return True


def reduce_against(rows: Matrix, vector: Vector) -> Vector:
    """Residual of a vector after elimination against an echelon basis."""
    residual = list(vector)
    for r in rows:
        p = next(i for i, x in enumerate(r) if x != 0)
        c = residual[p]
        if c != 0:
            for i in range(p, len(residual)):
                if r[i] != 0:
                    residual[i] -= c * r[i]
    return tuple(residual)


def nullspace(rows: Iterable[Iterable], width: int) -> Matrix:
    """Canonical basis of {v : M v = 0}, echelonized."""
    red = rref(rows, width)
    piv = set(pivots(red))
    free = [j for j in range(width) if j not in piv]
    basis = []
    piv_list = pivots(red)
    for j in free:
        v = [Fraction(0)] * width
        v[j] = Fraction(1)
        for r, pj in zip(red, piv_list):
            v[pj] = -r[j]
        basis.append(v)
    return rref(basis, width)


def matvec(m: Matrix, v: Vector) -> Vector:
    return tuple(sum((row[j] * v[j] for j in range(len(v))), Fraction(0)) for row in m)


def matmul(a: Matrix, b: Matrix) -> Matrix:
    if a and b and len(a[0]) != len(b):
        raise DomainError("matrix shape mismatch")
    bt = tuple(zip(*b)) if b else ()
    return tuple(
        tuple(sum((x * y for x, y in zip(row, col)), Fraction(0)) for col in bt)
        for row in a
    )


def identity(n: int) -> Matrix:
    return tuple(
        tuple(Fraction(1 if i == j else 0) for j in range(n)) for i in range(n)
    )


def transpose(m: Matrix) -> Matrix:
    return tuple(zip(*m)) if m else ()


def matrix_rank(rows: Iterable[Iterable], width: int) -> int:
    return len(rref(rows, width))


def solve_unique(a: Matrix, rhs: Vector) -> Vector:
    """Solve a x = rhs when the solution is unique; error otherwise."""
    n = len(a[0]) if a else 0
    aug = [list(row) + [val] for row, val in zip(a, rhs)]
    red = rref(aug, n + 1)
    piv = pivots(red)
    if n in piv:
        raise DomainError("inconsistent linear system")
    if len(red) != n:
        raise DomainError("linear system is underdetermined")
    x = [Fraction(0)] * n
    for r, pj in zip(red, piv):
        x[pj] = r[n]
    return tuple(x)


def random_invertible(dim: int, rng: random.Random, spread: int = 3) -> Matrix:
    """Random invertible integer matrix with entries in [-spread, spread]."""
    while True:
        m = tuple(
            tuple(Fraction(rng.randint(-spread, spread)) for _ in range(dim))
            for _ in range(dim)
        )
        if matrix_rank(m, dim) == dim:
            return m


@dataclass(frozen=True)
class RatSubspace:
    """A subspace of Q^ambient with a canonical echelon basis (rows)."""

    ambient: int
    rows: Matrix

    def __post_init__(self) -> None:
        if self.ambient < 0:
            raise DomainError("ambient dimension must be >= 0")
        if not is_rref(self.rows, self.ambient):
            raise DomainError("basis is not in canonical reduced row-echelon form")

    @classmethod
    def span(cls, ambient: int, vectors: Iterable[Iterable]) -> "RatSubspace":
        return cls(ambient, rref(vectors, ambient))

    @classmethod
    def zero(cls, ambient: int) -> "RatSubspace":
        return cls(ambient, ())

    @classmethod
    def full(cls, ambient: int) -> "RatSubspace":
        return cls(ambient, identity(ambient))

    @classmethod
    def coordinate(cls, ambient: int, k: int) -> "RatSubspace":
        """Span of the first k standard basis vectors."""
        if not 0 <= k <= ambient:
            raise DomainError("coordinate subspace dimension out of range")
        return cls(ambient, identity(ambient)[:k])

    @property
    def dim(self) -> int:
        return len(self.rows)

    def __add__(self, other: "RatSubspace") -> "RatSubspace":
        self._check_ambient(other)
        return RatSubspace.span(self.ambient, self.rows + other.rows)

    def __and__(self, other: "RatSubspace") -> "RatSubspace":
        self._check_ambient(other)
        ann = self.annihilator().rows + other.annihilator().rows
        return RatSubspace(self.ambient, nullspace(ann, self.ambient))

    def __le__(self, other: "RatSubspace") -> bool:
        self._check_ambient(other)
        return all(not any(reduce_against(other.rows, v)) for v in self.rows)

    def contains_vector(self, v: Iterable) -> bool:
        return not any(reduce_against(self.rows, as_vector(v)))

    def annihilator(self) -> "RatSubspace":
        """The subspace {u : <u, v> = 0 for all v here}, in dual coordinates."""
        return RatSubspace(self.ambient, nullspace(self.rows, self.ambient))

    def apply(self, m: Matrix) -> "RatSubspace":
        """Image under the linear map with matrix m (columns act on coordinates)."""
        new_ambient = len(m)
        return RatSubspace.span(new_ambient, [matvec(m, v) for v in self.rows])

    def coordinate_complement(self, within: "RatSubspace | None" = None) -> "RatSubspace":
        """Deterministic complement spanned by standard basis vectors where
        possible; when `within` is given the complement is taken inside it."""
        space = within if within is not None else RatSubspace.full(self.ambient)
        comp_rows: list[Vector] = []
        current = self
        for v in space.rows:
            if not (current + RatSubspace.span(self.ambient, comp_rows)).contains_vector(v):
                comp_rows.append(v)
        return RatSubspace.span(self.ambient, comp_rows)

    def _check_ambient(self, other: "RatSubspace") -> None:
        if self.ambient != other.ambient:
            raise DomainError(
                f"ambient mismatch: {self.ambient} vs {other.ambient}"
            )

    def to_json_obj(self) -> list:
        return [[str(x) for x in row] for row in self.rows]

    @classmethod
    def from_json_obj(cls, ambient: int, obj: list) -> "RatSubspace":
        return cls.span(ambient, obj)


def block_embed(sub: RatSubspace, block: int, blocks: int) -> RatSubspace:
    """Shift a subspace of Q^m into block `block` of Q^(blocks*m).

    Block indices are 1-based; block i occupies coordinates
    (i-1)*m .. i*m - 1.
    """
    if not 1 <= block <= blocks:
        raise DomainError(f"block index {block} out of range 1..{blocks}")
    m = sub.ambient
    left = (block - 1) * m
    right = (blocks - block) * m
    zero_l = (Fraction(0),) * left
    zero_r = (Fraction(0),) * right
    rows = tuple(zero_l + v + zero_r for v in sub.rows)
    return RatSubspace(blocks * m, rows)


@dataclass(frozen=True)
class Flag:
    """A strictly increasing chain of proper nonzero subspaces of Q^ambient.

    The chain may be empty (flag variety a single point)."""

    ambient: int
    chain: tuple[RatSubspace, ...]

    def __post_init__(self) -> None:
        prev_dim = 0
        prev = None
        for sub in self.chain:
            if sub.ambient != self.ambient:
                raise DomainError("flag member has wrong ambient dimension")
            if not 0 < sub.dim < self.ambient:
                raise DomainError("flag members must be proper and nonzero")
            if prev is not None and not (prev <= sub and sub.dim > prev_dim):
                raise DomainError("flag chain must be strictly increasing")
            prev, prev_dim = sub, sub.dim
        if prev is not None and prev.dim >= self.ambient:
            raise DomainError("last flag member must be proper")

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(s.dim for s in self.chain)

    def member(self, i: int) -> RatSubspace:
        """1-based member access with the usual conventions: member(0) is the
        zero subspace and member(len+1) is the whole space."""
        if i == 0:
            return RatSubspace.zero(self.ambient)
        if i == len(self.chain) + 1:
            return RatSubspace.full(self.ambient)
        if not 1 <= i <= len(self.chain):
            raise DomainError(f"flag member index {i} out of range")
        return self.chain[i - 1]

    def apply(self, m: Matrix) -> "Flag":
        return Flag(len(m), tuple(s.apply(m) for s in self.chain))

    def dual(self) -> "Flag":
        """The flag of annihilators, in reverse order (duality map)."""
        return Flag(self.ambient, tuple(s.annihilator() for s in reversed(self.chain)))

    def to_json_obj(self) -> dict:
        return {
            "ambient": self.ambient,
            "chain": [s.to_json_obj() for s in self.chain],
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "Flag":
        try:
            ambient = int(obj["ambient"])
            chain = tuple(
                RatSubspace.from_json_obj(ambient, rows) for rows in obj["chain"]
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise DomainError(f"bad flag document: {exc}") from exc
        return cls(ambient, chain)


def block_diagonal(m: Matrix, blocks: int) -> Matrix:
    """diag(m, ..., m) with `blocks` copies."""
    size = len(m)
    n = size * blocks
    rows = []
    for b in range(blocks):
        for i in range(size):
            row = [Fraction(0)] * n
            for j in range(size):
                row[b * size + j] = m[i][j]
            rows.append(tuple(row))
    return tuple(rows)


@dataclass(frozen=True)
class StabilizerResult:
    """Lie algebra of matrices x in gl(m) whose diagonal copies preserve a flag.

    `root_spaces` lists the off-diagonal coordinate lines E_ij (1-based
    pairs) contained in the algebra, `contains_torus` records whether all
    diagonal matrices are, and `is_parabolic` is the torus-relative
    criterion: the torus is contained and for every i != j at least one of
    E_ij, E_ji belongs to the algebra.
    """

    dimension: int
    basis: tuple[Matrix, ...]
    root_spaces: frozenset[tuple[int, int]]
    contains_torus: bool
    is_parabolic: bool


def _stabilizer_constraints(flag: Flag, m: int) -> list[Vector]:
    """Linear constraints on vec(x) (row-major, m*m unknowns) expressing
    that diag(x, ..., x) preserves every flag member."""
    n = flag.ambient
    d = n // m
    rows: list[Vector] = []
    for member in flag.chain:
        ann = member.annihilator().rows
        for v in member.rows:
            for u in ann:
                coeff = [Fraction(0)] * (m * m)
                for a in range(m):
                    for b in range(m):
                        s = Fraction(0)
                        for k in range(d):
                            s += u[k * m + a] * v[k * m + b]
                        coeff[a * m + b] = s
                rows.append(tuple(coeff))
    return rows


def stabilizer_oracle(flag: Flag, m: int) -> StabilizerResult:
    """Compute q = {x in gl(m) : diag(x,...,x) preserves the flag} exactly.

    The parabolicity verdict is relative to the standard diagonal torus:
    it asks that q contain all diagonal matrices and, for each off-diagonal
    pair, at least one of the two coordinate lines E_ij, E_ji.
    """
    n = flag.ambient
    if m < 1 or n % m != 0:
        raise DomainError(f"block size {m} does not divide ambient {n}")
    constraints = _stabilizer_constraints(flag, m)
    reduced = rref(constraints, m * m)
    basis_vecs = nullspace(reduced, m * m)
    basis = tuple(
        tuple(tuple(v[a * m + b] for b in range(m)) for a in range(m))
        for v in basis_vecs
    )
    # E_ab lies in the nullspace iff column a*m+b of the constraint space is zero.
    nonzero_cols = {
        j for row in reduced for j in range(m * m) if row[j] != 0
    }
    root_spaces = frozenset(
        (a + 1, b + 1)
        for a in range(m)
        for b in range(m)
        if a != b and (a * m + b) not in nonzero_cols
    )
    contains_torus = all((a * m + a) not in nonzero_cols for a in range(m))
    is_parabolic = contains_torus and all(
        (i, j) in root_spaces or (j, i) in root_spaces
        for i in range(1, m + 1)
        for j in range(i + 1, m + 1)
    )
    return StabilizerResult(
        dimension=len(basis),
        basis=basis,
        root_spaces=root_spaces,
        contains_torus=contains_torus,
        is_parabolic=is_parabolic,
    )


def nilradical_inclusion_oracle(flag: Flag, m: int) -> bool:
    """Whether the nilradical of the diagonal stabilizer q sits inside the
    nilradical of the full stabilizer p of the flag.

    Requires the stabilizer oracle to report q parabolic; q is then the sum
    of the torus and its root spaces, and nil(q) is spanned by the E_ij
    with E_ji absent.  Each generator is embedded block-diagonally and
    tested against the strict-descent condition x F_t <= F_{t-1}.
    """
    res = stabilizer_oracle(flag, m)
    if not res.is_parabolic:
        raise DomainError("stabilizer is not parabolic; nilradical comparison undefined")
    if res.dimension != m + len(res.root_spaces):
        raise InternalCheckError("parabolic stabilizer is not torus-decomposable")
    n = flag.ambient
    d = n // m
    nil_q = [(i, j) for (i, j) in sorted(res.root_spaces) if (j, i) not in res.root_spaces]
    members = [flag.member(t) for t in range(len(flag.chain) + 2)]
    for (i, j) in nil_q:
        a, b = i - 1, j - 1
        for t in range(1, len(members)):
            target = members[t - 1]
            for v in members[t].rows:
                image = [Fraction(0)] * n
                for k in range(d):
                    image[k * m + a] = v[k * m + b]
                if any(image) and not target.contains_vector(image):
                    return False
    return True
