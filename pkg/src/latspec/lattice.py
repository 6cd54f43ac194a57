"""Exact integer linear algebra on rank-r lattices.

Vectors are plain tuples of Python ints.  Matrices wrap a tuple of row
tuples and cache their fraction-free determinant.  Dual-torus characters
keep rational coordinates as Fractions and irrational ones as tagged
decimal approximations whose precision is extended on demand, so pairing
with very large lattice vectors stays accurate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterator, Sequence, Union

from .errors import PreconditionError, RankMismatchError, SingularBasisError

Vector = tuple[int, ...]


def as_vector(coords) -> Vector:
    v = tuple(coords)
    if not v:
        raise RankMismatchError("vector must have rank >= 1")
    for c in v:
        if not isinstance(c, int):
            raise TypeError(f"vector coordinates must be ints, got {type(c).__name__}")
    return v


def check_rank(v: Vector, r: int) -> None:
    if len(v) != r:
        raise RankMismatchError(f"expected rank {r}, got vector of length {len(v)}")


def vadd(u: Vector, v: Vector) -> Vector:
    if len(u) != len(v):
        raise RankMismatchError("rank mismatch in vector addition")
    return tuple(a + b for a, b in zip(u, v))


def vsub(u: Vector, v: Vector) -> Vector:
    if len(u) != len(v):
        raise RankMismatchError("rank mismatch in vector subtraction")
    return tuple(a - b for a, b in zip(u, v))


def vscale(c: int, v: Vector) -> Vector:
    return tuple(c * a for a in v)


def vdot(u: Vector, v: Vector) -> int:
    if len(u) != len(v):
        raise RankMismatchError("rank mismatch in dot product")
    return sum(a * b for a, b in zip(u, v))


def is_zero(v: Vector) -> bool:
    return all(a == 0 for a in v)


def det_rows(rows: Sequence[Sequence[int]]) -> int:
    """Exact determinant of a square integer matrix (Bareiss elimination)."""
    n = len(rows)
    if any(len(row) != n for row in rows):
        raise RankMismatchError("determinant requires a square matrix")
    if n == 0:
        return 1
    a = [list(row) for row in rows]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        pivot = a[k][k]
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * pivot - a[i][k] * a[k][j]) // prev
            a[i][k] = 0
        prev = pivot
    return sign * a[n - 1][n - 1]


def rank_rows(rows: Sequence[Sequence[int]]) -> int:
    """Exact rank of an integer matrix via fraction-free elimination."""
    a = [list(row) for row in rows]
    m = len(a)
    if m == 0:
        return 0
    n = len(a[0])
    rank = 0
    col = 0
    prev = 1
    while rank < m and col < n:
        pivot_row = None
        for i in range(rank, m):
            if a[i][col] != 0:
                pivot_row = i
                break
        if pivot_row is None:
            col += 1
            continue
        a[rank], a[pivot_row] = a[pivot_row], a[rank]
        pivot = a[rank][col]
        for i in range(rank + 1, m):
            for j in range(col + 1, n):
                a[i][j] = (a[i][j] * pivot - a[i][col] * a[rank][j]) // prev
            a[i][col] = 0
        prev = pivot
        rank += 1
        col += 1
    return rank


def _minor_rows(rows, i, j):
    return [
        [rows[p][q] for q in range(len(rows)) if q != j]
        for p in range(len(rows))
        if p != i
    ]


def adjugate_rows(rows: Sequence[Sequence[int]]) -> tuple[tuple[int, ...], ...]:
    """Adjugate (transposed cofactor matrix); satisfies M·adj(M) = det(M)·I."""
    n = len(rows)
    if n == 1:
        return ((1,),)
    out = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            c = det_rows(_minor_rows(rows, i, j))
            out[j][i] = c if (i + j) % 2 == 0 else -c
    return tuple(tuple(row) for row in out)


@dataclass(frozen=True)
class IntMatrix:
    """Square integer matrix with an exact cached determinant."""

    entries: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        n = len(self.entries)
        if n == 0:
            raise RankMismatchError("matrix must have rank >= 1")
        for row in self.entries:
            if len(row) != n:
                raise RankMismatchError("matrix must be square")
            for e in row:
                if not isinstance(e, int):
                    raise TypeError("matrix entries must be ints")

    @classmethod
    def from_rows(cls, rows) -> "IntMatrix":
        return cls(tuple(tuple(int(e) for e in row) for row in rows))

    @classmethod
    def identity(cls, r: int) -> "IntMatrix":
        return cls(tuple(tuple(1 if i == j else 0 for j in range(r)) for i in range(r)))

    @property
    def r(self) -> int:
        return len(self.entries)

    @cached_property
    def det(self) -> int:
        return det_rows(self.entries)

    def __mul__(self, other: "IntMatrix") -> "IntMatrix":
        if self.r != other.r:
            raise RankMismatchError("rank mismatch in matrix product")
        n = self.r
        ot = tuple(zip(*other.entries))
        rows = tuple(
            tuple(sum(a * b for a, b in zip(row, col)) for col in ot)
            for row in self.entries
        )
        return type(self)(rows)

    def apply(self, v: Vector) -> Vector:
        check_rank(v, self.r)
        return tuple(sum(a * b for a, b in zip(row, v)) for row in self.entries)

    def transpose(self) -> "IntMatrix":
        return type(self)(tuple(zip(*self.entries)))

    def adjugate(self) -> "IntMatrix":
        return IntMatrix(adjugate_rows(self.entries))

    def is_unimodular(self) -> bool:
        return self.det == 1


@dataclass(frozen=True)
class UnimodularMap(IntMatrix):
    """Integer matrix of determinant exactly +1."""

    def __post_init__(self):
        super().__post_init__()
        if self.det != 1:
            raise SingularBasisError(f"determinant is {self.det}, not 1")

    @classmethod
    def identity(cls, r: int) -> "UnimodularMap":
        return cls(IntMatrix.identity(r).entries)


def determinant(m: IntMatrix) -> int:
    """Exact determinant; total on square integer matrices."""
    return m.det


def affinely_independent(points: Sequence[Vector]) -> bool:
    """True iff the r+1 given rank-r points span a full-dimensional simplex."""
    pts = [as_vector(p) for p in points]
    r = len(pts[0])
    if len(pts) != r + 1:
        raise RankMismatchError(f"need exactly {r + 1} points of rank {r}, got {len(pts)}")
    for p in pts:
        check_rank(p, r)
    rows = [vsub(p, pts[0]) for p in pts[1:]]
    return det_rows(rows) != 0


@dataclass(frozen=True)
class Sublattice:
    """The index-(n!)^r sublattice spanned by n! times the standard basis."""

    n: int
    rank: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("scale must be a positive integer")
        if self.rank < 1:
            raise RankMismatchError("rank must be >= 1")

    @property
    def scale(self) -> int:
        return math.factorial(self.n)

    @property
    def generators(self) -> IntMatrix:
        s = self.scale
        return IntMatrix.from_rows(
            [[s if i == j else 0 for j in range(self.rank)] for i in range(self.rank)]
        )

    def index(self) -> int:
        return abs(self.generators.det)

    def contains(self, v: Vector) -> bool:
        check_rank(v, self.rank)
        s = self.scale
        return all(c % s == 0 for c in v)


# ---------------------------------------------------------------------------
# Irrational torus coordinates.
#
# A coordinate is a tagged real mod 1.  Tags of the form "sqrtN" (N a
# non-square positive integer), optionally scaled as "c*sqrtN", can be
# re-evaluated to any precision via integer square roots; opaque tags carry
# a fixed decimal truncation.  Equality is decided by tag alone.
# ---------------------------------------------------------------------------

_SQRT_CACHE: dict[int, tuple[int, int]] = {}  # n -> (digits D, floor(sqrt(n)*10^D))

DEFAULT_PRECISION = 64


def _sqrt_floor_scaled(n: int, digits: int) -> int:
    """floor(sqrt(n) * 10^digits), cached and grown geometrically."""
    cached = _SQRT_CACHE.get(n)
    if cached is None or cached[0] < digits:
        newd = max(digits, 192, (cached[0] * 2 if cached else 0))
        val = math.isqrt(n * 10 ** (2 * newd))
        _SQRT_CACHE[n] = (newd, val)
        cached = (newd, val)
    d, val = cached
    return val // 10 ** (d - digits)


def _decimal_digits_of(x: int) -> int:
    # Upper bound on the number of decimal digits, without str() on big ints.
    return (abs(x).bit_length() * 30103) // 100000 + 1


@dataclass(frozen=True, eq=False)
class Irrational:
    """A tagged irrational value reduced mod 1.

    ``base`` is either a computable tag ("sqrtN") or an opaque label, and
    ``coeff`` an integer multiplier; the represented value is
    coeff * value(base) mod 1.  Opaque labels must supply ``provided``,
    a decimal truncation "0.ddd..." of value(base) mod 1.
    """

    base: str
    coeff: int = 1
    provided: str | None = None

    def __post_init__(self):
        if self.coeff == 0:
            raise ValueError("coefficient 0 would make the value rational; use Fraction(0)")
        if self._sqrt_arg() is None and self.provided is None:
            raise ValueError(f"unknown tag {self.base!r} requires explicit digits")

    def _sqrt_arg(self) -> int | None:
        if self.base.startswith("sqrt"):
            arg = self.base[4:]
            if arg.isdigit():
                n = int(arg)
                if n > 0 and math.isqrt(n) ** 2 != n:
                    return n
        return None

    @property
    def tag(self) -> str:
        return self.base if self.coeff == 1 else f"{self.coeff}*{self.base}"

    def __eq__(self, other):
        return isinstance(other, Irrational) and self.tag == other.tag

    def __hash__(self):
        return hash(("Irrational", self.tag))

    @classmethod
    def sqrt(cls, n: int) -> "Irrational":
        return cls(base=f"sqrt{n}")

    @classmethod
    def from_digits(cls, tag: str, digits: str) -> "Irrational":
        if not digits.startswith("0."):
            raise ValueError("digits must look like '0.ddd...'")
        return cls(base=tag, provided=digits)

    def scale(self, c: int) -> Union["Irrational", Fraction]:
        if c == 0:
            return Fraction(0)
        return Irrational(base=self.base, coeff=self.coeff * c, provided=self.provided)

    def approx(self, precision: int = DEFAULT_PRECISION) -> tuple[Fraction, Fraction]:
        """(value mod 1, error bound), targeting 10^-precision when computable."""
        c = self.coeff
        arg = self._sqrt_arg()
        if arg is not None:
            d = precision + _decimal_digits_of(c) + 4
            x = _sqrt_floor_scaled(arg, d)
        else:
            frac = self.provided[2:]
            d = len(frac)
            x = int(frac)
        scale = 10**d
        return Fraction((c * x) % scale, scale), Fraction(abs(c) + 1, scale)

    def digits(self, precision: int = DEFAULT_PRECISION) -> str:
        val, _ = self.approx(precision)
        scaled = (val.numerator * 10**precision) // val.denominator
        return "0." + str(scaled).rjust(precision, "0")


TorusCoord = Union[Fraction, Irrational]


def _normalize_coord(c: TorusCoord) -> TorusCoord:
    if isinstance(c, Irrational):
        return c
    f = Fraction(c)
    return f - (f.numerator // f.denominator)


@dataclass(frozen=True)
class Character:
    """A dual-torus point: one coordinate per lattice rank, each rational
    (Fraction in [0,1)) or a tagged irrational."""

    coords: tuple[TorusCoord, ...]

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(_normalize_coord(c) for c in self.coords))
        if not self.coords:
            raise RankMismatchError("character must have rank >= 1")

    @property
    def rank(self) -> int:
        return len(self.coords)

    def is_rational(self) -> bool:
        return all(isinstance(c, Fraction) for c in self.coords)


def character(coords) -> Character:
    return Character(tuple(coords))


def is_rational_character(xi: Character) -> tuple[bool, int | None]:
    """Whether all coordinates are rational, plus the index of the kernel
    {v : <xi, v> integral} in the full lattice (None when infinite)."""
    if not xi.is_rational():
        return False, None
    q = 1
    for c in xi.coords:
        q = q * c.denominator // math.gcd(q, c.denominator)
    scaled = [int(c * q) for c in xi.coords]
    g = q
    for a in scaled:
        g = math.gcd(g, a)
    return True, q // g


def pair_with_error(xi: Character, v: Vector, precision: int = DEFAULT_PRECISION) -> tuple[Fraction, Fraction]:
    """<xi, v> mod 1 in [0,1) with a rigorous error bound (0 when exact)."""
    check_rank(v, xi.rank)
    total = Fraction(0)
    err = Fraction(0)
    for c, m in zip(xi.coords, v):
        if isinstance(c, Fraction):
            total += c * m
        elif m != 0:
            val, e = c.scale(m).approx(precision)
            total += val
            err += e
    total -= total.numerator // total.denominator
    return total, err


def pair(xi: Character, v: Vector, precision: int = DEFAULT_PRECISION) -> Fraction:
    """<xi, v> mod 1; exact when every coordinate is rational."""
    return pair_with_error(xi, v, precision)[0]


def dual_apply(gamma: IntMatrix, xi: Character) -> Character:
    """Transpose action on characters; exact, rational coordinates only."""
    if not xi.is_rational():
        raise PreconditionError(
            "dual action is implemented for rational characters only; "
            "pair the original character with the transformed vector instead"
        )
    if gamma.r != xi.rank:
        raise RankMismatchError("rank mismatch in dual action")
    coords = tuple(
        sum((gamma.entries[j][i] * xi.coords[j] for j in range(gamma.r)), Fraction(0))
        for i in range(gamma.r)
    )
    return Character(coords)


@dataclass(frozen=True)
class Hyperplane:
    """Linear hyperplane {v : v . normal = 0} with a nonzero integer normal."""

    normal: Vector

    def __post_init__(self):
        object.__setattr__(self, "normal", as_vector(self.normal))
        if is_zero(self.normal):
            raise ValueError("hyperplane normal must be nonzero")

    def contains(self, v: Vector) -> bool:
        return vdot(self.normal, v) == 0


# ---------------------------------------------------------------------------
# Shears.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ShearResult:
    """Shear map on a basis plus its attempted extension to the full lattice.

    ``on_basis`` is the matrix in basis coordinates; ``extension`` is the
    map in standard coordinates when it has integer entries, else None and
    ``obstruction`` records the first non-integral entry.
    """

    on_basis: IntMatrix
    extension: UnimodularMap | None
    integral: bool
    obstruction: tuple[int, int, Fraction] | None = None


def _shear_extension(basis: Sequence[Vector], on_basis: IntMatrix) -> ShearResult:
    r = len(basis)
    u = IntMatrix.from_rows([[basis[k][i] for k in range(r)] for i in range(r)])
    d = u.det
    if d == 0:
        raise SingularBasisError("basis vectors are linearly dependent")
    prod = u * on_basis * u.adjugate()
    ext_rows = []
    for i in range(r):
        row = []
        for j in range(r):
            e = prod.entries[i][j]
            if e % d != 0:
                return ShearResult(
                    on_basis=on_basis,
                    extension=None,
                    integral=False,
                    obstruction=(i, j, Fraction(e, d)),
                )
            row.append(e // d)
        ext_rows.append(row)
    return ShearResult(
        on_basis=on_basis,
        extension=UnimodularMap.from_rows(ext_rows),
        integral=True,
    )


def shear(basis: Sequence[Vector], l: int, power: int) -> ShearResult:
    """The map sending basis vector l to itself plus ``power`` times basis
    vector 1 (1-indexed, 2 <= l <= rank), fixing the other basis vectors."""
    basis = [as_vector(b) for b in basis]
    r = len(basis)
    if not 2 <= l <= r:
        raise ValueError(f"shear index must be in 2..{r}, got {l}")
    rows = [[1 if i == j else 0 for j in range(r)] for i in range(r)]
    rows[0][l - 1] = power
    return _shear_extension(basis, IntMatrix.from_rows(rows))


def shear_word(basis: Sequence[Vector], exponents: Sequence[int]) -> ShearResult:
    """Product of the shears with indices 2..rank raised to the given powers."""
    basis = [as_vector(b) for b in basis]
    r = len(basis)
    if len(exponents) != r - 1:
        raise RankMismatchError(f"need {r - 1} exponents for rank {r}")
    rows = [[1 if i == j else 0 for j in range(r)] for i in range(r)]
    for l, m in enumerate(exponents, start=2):
        rows[0][l - 1] = m
    return _shear_extension(basis, IntMatrix.from_rows(rows))


# ---------------------------------------------------------------------------
# Elementary generators of the unit-determinant group and word enumeration.
# ---------------------------------------------------------------------------


def elementary_generators(r: int) -> tuple[UnimodularMap, ...]:
    """I +/- E_ij for i != j, ordered by (i, j) then sign; 2r(r-1) matrices."""
    gens = []
    for i in range(r):
        for j in range(r):
            if i == j:
                continue
            for s in (1, -1):
                rows = [[1 if p == q else 0 for q in range(r)] for p in range(r)]
                rows[i][j] = s
                gens.append(UnimodularMap.from_rows(rows))
    return tuple(gens)


def word_ball(r: int, max_length: int) -> Iterator[tuple[UnimodularMap, tuple[int, ...]]]:
    """All distinct products of elementary generators with word length up to
    ``max_length``, in deterministic order: length ascending, then
    lexicographic word order.  Each matrix is yielded once, at its first
    (shortest, lexicographically least) word."""
    gens = elementary_generators(r)
    ident = UnimodularMap.identity(r)
    seen = {ident.entries}
    frontier: list[tuple[UnimodularMap, tuple[int, ...]]] = [(ident, ())]
    yield ident, ()
    for _ in range(max_length):
        nxt: list[tuple[UnimodularMap, tuple[int, ...]]] = []
        for mat, word in frontier:
            for gi, g in enumerate(gens):
                nm = mat * g
                if nm.entries in seen:
                    continue
                seen.add(nm.entries)
                item = (UnimodularMap(nm.entries), word + (gi,))
                nxt.append(item)
                yield item
        frontier = nxt
        if not frontier:
            return
