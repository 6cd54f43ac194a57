"""Exact lattice-point counts of dilated simplices and the degree-r
counting polynomial obtained by interpolating them."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product

from .errors import BudgetError, RankMismatchError, SingularBasisError
from .lattice import (
    IntMatrix,
    Vector,
    adjugate_rows,
    as_vector,
    det_rows,
    vadd,
    vscale,
    vsub,
)

DEFAULT_POINT_BUDGET = 10**8
MAX_ENUM_RANK = 4


@dataclass(frozen=True)
class Simplex:
    """r+1 affinely independent lattice points; degenerate vertex sets are
    rejected at construction."""

    vertices: tuple[Vector, ...]

    def __post_init__(self):
        verts = tuple(as_vector(v) for v in self.vertices)
        object.__setattr__(self, "vertices", verts)
        r = len(verts[0])
        if len(verts) != r + 1:
            raise RankMismatchError(
                f"simplex of rank {r} needs {r + 1} vertices, got {len(verts)}"
            )
        for v in verts:
            if len(v) != r:
                raise RankMismatchError("all vertices must share the same rank")
        if det_rows(self.edge_rows()) == 0:
            raise SingularBasisError("vertices are affinely dependent")

    @property
    def rank(self) -> int:
        return len(self.vertices[0])

    def edge_rows(self) -> list[list[int]]:
        """Rows i of the matrix whose columns are v_k - v_0."""
        v0 = self.vertices[0]
        r = self.rank
        return [[self.vertices[k + 1][i] - v0[i] for k in range(r)] for i in range(r)]


@dataclass(frozen=True)
class EhrhartPolynomial:
    """Ascending-degree exact rational coefficients of a lattice-point
    counting polynomial: constant term 1, positive leading coefficient,
    and r! times the leading coefficient integral."""

    coeffs: tuple[Fraction, ...]

    def __post_init__(self):
        cs = tuple(Fraction(c) for c in self.coeffs)
        object.__setattr__(self, "coeffs", cs)
        if not cs:
            raise ValueError("polynomial needs at least one coefficient")
        if cs[0] != 1:
            raise ValueError(f"constant coefficient must be 1, got {cs[0]}")
        lead = cs[-1]
        r = len(cs) - 1
        if r >= 1:
            if lead <= 0:
                raise ValueError(f"leading coefficient must be positive, got {lead}")
            if (math.factorial(r) * lead).denominator != 1:
                raise ValueError(f"{r}! times leading coefficient must be integral")

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def leading(self) -> Fraction:
        return self.coeffs[-1]

    def __call__(self, t) -> Fraction:
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * t + c
        return acc

    def dilated(self, n: int) -> "EhrhartPolynomial":
        """Coefficients of t -> self(n*t)."""
        return EhrhartPolynomial(
            tuple(c * Fraction(n) ** k for k, c in enumerate(self.coeffs))
        )


def transform(s: Simplex, gamma: IntMatrix, w: Vector | None = None) -> Simplex:
    """Image simplex with vertices w + gamma(v)."""
    if w is None:
        w = (0,) * s.rank
    return Simplex(tuple(vadd(w, gamma.apply(v)) for v in s.vertices))


def dilate(s: Simplex, n: int) -> Simplex:
    return Simplex(tuple(vscale(n, v) for v in s.vertices))


def volume_times_rfact(s: Simplex) -> int:
    """|det(v_1-v_0, ..., v_r-v_0)| = r! times the Euclidean volume."""
    return abs(det_rows(s.edge_rows()))


def _ceil_div(a: int, b: int) -> int:
    return -((-a) // b)


def count_lattice_points(s: Simplex, t: int, budget: int = DEFAULT_POINT_BUDGET) -> int:
    """Exact number of lattice points in the t-fold dilate of the simplex.

    Candidate points range over the bounding box of the dilate; membership
    is the exact barycentric test y = adj(M)(x - t*v_0) with all
    coordinates and their sum on the correct side of det(M).  Along the
    innermost axis the test is linear, so each scanline is resolved by
    exact integer interval arithmetic.  The budget caps the box volume.
    """
    if t < 0:
        raise ValueError("dilation factor must be nonnegative")
    r = s.rank
    if r > MAX_ENUM_RANK:
        raise RankMismatchError(f"point enumeration supports rank <= {MAX_ENUM_RANK}")
    if t == 0:
        return 1

    scaled = [vscale(t, v) for v in s.vertices]
    lo = [min(v[i] for v in scaled) for i in range(r)]
    hi = [max(v[i] for v in scaled) for i in range(r)]
    volume = 1
    for a, b in zip(lo, hi):
        volume *= b - a + 1
    if volume > budget:
        raise BudgetError(
            f"bounding box has {volume} candidate points, over the cap of {budget}",
            cap=budget,
            required=volume,
        )

    rows = [[scaled[k + 1][i] - scaled[0][i] for k in range(r)] for i in range(r)]
    d = det_rows(rows)
    adj = adjugate_rows(rows)
    sgn = 1 if d > 0 else -1
    absd = abs(d)
    b0 = scaled[0]

    # y_k(x) = sum_j adj[k][j] * (x_j - b0_j); constraints sgn*y_k >= 0 for
    # all k and sgn*sum_k y_k <= |d|.  Split off the last axis.
    last = r - 1
    count = 0
    outer_ranges = [range(lo[i], hi[i] + 1) for i in range(last)]
    for prefix in product(*outer_ranges):
        consts = []
        for k in range(r):
            c = -adj[k][last] * b0[last]
            for j in range(last):
                c += adj[k][j] * (prefix[j] - b0[j])
            consts.append(c)
        xlo, xhi = lo[last], hi[last]
        ok = True
        for k in range(r):
            a = sgn * consts[k]
            g = sgn * adj[k][last]
            if g == 0:
                if a < 0:
                    ok = False
                    break
            elif g > 0:
                xlo = max(xlo, _ceil_div(-a, g))
            else:
                xhi = min(xhi, a // (-g))
        if not ok:
            continue
        a = absd - sgn * sum(consts)
        g = -sgn * sum(adj[k][last] for k in range(r))
        if g == 0:
            if a < 0:
                continue
        elif g > 0:
            xlo = max(xlo, _ceil_div(-a, g))
        else:
            xhi = min(xhi, a // (-g))
        if xhi >= xlo:
            count += xhi - xlo + 1
    return count


def interpolate_at_integers(values) -> tuple[Fraction, ...]:
    """Exact coefficients (ascending) of the unique polynomial with
    p(i) = values[i] for i = 0..len-1, via Newton divided differences."""
    vals = [Fraction(v) for v in values]
    n = len(vals)
    table = [list(vals)]
    for k in range(1, n):
        prev = table[-1]
        table.append(
            [(prev[i + 1] - prev[i]) / Fraction(k) for i in range(len(prev) - 1)]
        )
    coeffs = [Fraction(0)] * n
    basis = [Fraction(1)] + [Fraction(0)] * (n - 1)  # coefficients of (x-0)(x-1)...
    for k in range(n):
        lead = table[k][0]
        for i in range(n):
            coeffs[i] += lead * basis[i]
        if k < n - 1:
            new_basis = [Fraction(0)] * n
            for i in range(n - 1):
                new_basis[i + 1] += basis[i]
                new_basis[i] -= k * basis[i]
            basis = new_basis
    return tuple(coeffs)


def ehrhart_polynomial(s: Simplex, budget: int = DEFAULT_POINT_BUDGET) -> EhrhartPolynomial:
    """Interpolate the counts at dilations 0..r into exact coefficients."""
    r = s.rank
    counts = [count_lattice_points(s, t, budget) for t in range(r + 1)]
    return EhrhartPolynomial(interpolate_at_integers(counts))
