"""Point sets in the lattice, their simplex volume / counting-polynomial
spectra, box-density estimation, and the certified witness search for
placing scaled unimodular images of a basis inside a set."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product
from typing import Iterable, Iterator, Sequence

import numpy as np

from .ehrhart import (
    DEFAULT_POINT_BUDGET,
    EhrhartPolynomial,
    Simplex,
    dilate,
    ehrhart_polynomial,
    volume_times_rfact,
)
from .errors import BudgetError, RankMismatchError, SingularBasisError, WindowError
from .lattice import (
    UnimodularMap,
    Vector,
    as_vector,
    det_rows,
    vadd,
    vscale,
    vsub,
    word_ball,
)

Box = tuple[Vector, Vector]  # inclusive (lower corner, upper corner)

DEFAULT_SIMPLEX_BUDGET = 2_000_000


def box_points(box: Box) -> Iterator[Vector]:
    """Lattice points of an inclusive box in row-major order."""
    lo, hi = box
    if len(lo) != len(hi):
        raise RankMismatchError("box corners must share a rank")
    for i, (a, b) in enumerate(zip(lo, hi)):
        if a > b:
            raise ValueError(f"box is empty along axis {i}")
    yield from product(*(range(a, b + 1) for a, b in zip(lo, hi)))


def box_volume(box: Box) -> int:
    lo, hi = box
    vol = 1
    for a, b in zip(lo, hi):
        vol *= b - a + 1
    return vol


@dataclass(frozen=True)
class PointSet:
    """A subset of the rank-r lattice given explicitly inside a window, as
    residues mod m, or as the sublattice of multiples of n."""

    kind: str
    rank: int
    points: frozenset[Vector] | None = None
    window: Box | None = None
    modulus: int | None = None
    residues: frozenset[Vector] | None = None
    scale: int | None = None

    @classmethod
    def explicit(cls, points: Iterable[Vector], window: Box) -> "PointSet":
        pts = frozenset(as_vector(p) for p in points)
        lo, hi = (as_vector(window[0]), as_vector(window[1]))
        rank = len(lo)
        for p in pts:
            if len(p) != rank:
                raise RankMismatchError("point rank differs from window rank")
            if not all(a <= c <= b for c, a, b in zip(p, lo, hi)):
                raise WindowError(f"point {p} lies outside the window")
        return cls(kind="explicit", rank=rank, points=pts, window=(lo, hi))

    @classmethod
    def periodic(cls, m: int, residues: Iterable[Vector], rank: int | None = None) -> "PointSet":
        if m < 1:
            raise ValueError("modulus must be positive")
        res = frozenset(tuple(c % m for c in as_vector(p)) for p in residues)
        if not res:
            raise ValueError("periodic set needs at least one residue")
        rk = rank if rank is not None else len(next(iter(res)))
        for p in res:
            if len(p) != rk:
                raise RankMismatchError("residue rank mismatch")
        return cls(kind="periodic", rank=rk, modulus=m, residues=res)

    @classmethod
    def sublattice(cls, n: int, rank: int) -> "PointSet":
        if n < 1:
            raise ValueError("sublattice scale must be positive")
        return cls(kind="sublattice", rank=rank, scale=n)

    @classmethod
    def full(cls, rank: int) -> "PointSet":
        return cls.periodic(1, [(0,) * rank])

    def contains(self, v: Vector) -> bool:
        if len(v) != self.rank:
            raise RankMismatchError("rank mismatch in membership test")
        if self.kind == "explicit":
            return v in self.points
        if self.kind == "periodic":
            return tuple(c % self.modulus for c in v) in self.residues
        return all(c % self.scale == 0 for c in v)

    def candidates(self, box: Box) -> list[Vector]:
        """Members inside a box, sorted lexicographically."""
        if self.kind == "explicit":
            lo, hi = box
            return sorted(
                p for p in self.points if all(a <= c <= b for c, a, b in zip(p, lo, hi))
            )
        return [p for p in box_points(box) if self.contains(p)]

    def _as_periodic(self) -> "PointSet":
        if self.kind == "periodic":
            return self
        if self.kind == "sublattice":
            return PointSet.periodic(self.scale, [(0,) * self.rank])
        raise WindowError("explicit sets have no exact periodic description")


def density_estimate(E: PointSet, sizes: Sequence[int]) -> list[tuple[int, Fraction]]:
    """Best box density sup_v |E ∩ (v + [0,n-1]^r)| / n^r for each size n.

    Exact for periodic and sublattice sets (the supremum ranges over one
    period); for explicit sets the supremum ranges over all box positions
    inside the window, and sizes beyond the window are rejected.
    """
    out = []
    for n in sizes:
        if n < 1:
            raise ValueError("box sizes must be positive")
        if E.kind == "explicit":
            out.append((n, _explicit_best_density(E, n)))
        else:
            out.append((n, _periodic_best_density(E._as_periodic(), n)))
    return out


def _explicit_best_density(E: PointSet, n: int) -> Fraction:
    lo, hi = E.window
    dims = [b - a + 1 for a, b in zip(lo, hi)]
    if any(n > d for d in dims):
        raise WindowError(f"box size {n} exceeds the window extent {min(dims)}")
    grid = np.zeros(dims, dtype=np.int64)
    for p in E.points:
        grid[tuple(c - a for c, a in zip(p, lo))] = 1
    # Sliding-window sums via an r-dimensional prefix table.
    pref = grid
    for axis in range(len(dims)):
        pref = np.cumsum(pref, axis=axis)
    pad = np.zeros([d + 1 for d in dims], dtype=np.int64)
    pad[tuple(slice(1, None) for _ in dims)] = pref
    best = 0
    r = len(dims)
    windows = [range(dims[i] - n + 1) for i in range(r)]
    for corner in product(*windows):
        total = 0
        for eps in product((0, 1), repeat=r):
            idx = tuple(corner[i] + (n if eps[i] else 0) for i in range(r))
            sign = (-1) ** (r - sum(eps))
            total += sign * int(pad[idx])
        best = max(best, total)
    return Fraction(best, n ** r)


def _periodic_best_density(E: PointSet, n: int) -> Fraction:
    m = E.modulus
    r = E.rank
    if n % m == 0:
        return Fraction(len(E.residues), m ** r)
    # Count per axis how many of [v, v+n-1] hit each residue class, then sup
    # over the m^r distinct box positions.
    axis_counts = [[0] * m for _ in range(m)]  # axis_counts[v][res]
    for v in range(m):
        for res in range(m):
            offset = (res - v) % m
            axis_counts[v][res] = (n - 1 - offset) // m + 1 if offset <= n - 1 else 0
    best = 0
    for corner in product(range(m), repeat=r):
        total = 0
        for res in E.residues:
            cnt = 1
            for i in range(r):
                cnt *= axis_counts[corner[i]][res[i]]
                if cnt == 0:
                    break
            total += cnt
        best = max(best, total)
    return Fraction(best, n ** r)


def _spectrum_simplices(
    E: PointSet, box: Box, max_simplices: int
) -> Iterator[tuple[Vector, ...]]:
    r = E.rank
    cands = E.candidates(box)
    seen = 0
    for verts in combinations(cands, r + 1):
        seen += 1
        if seen > max_simplices:
            raise BudgetError(
                f"simplex enumeration exceeded the cap of {max_simplices}",
                cap=max_simplices,
            )
        rows = [vsub(v, verts[0]) for v in verts[1:]]
        if det_rows(rows) != 0:
            yield verts


def ehrhart_spectrum(
    E: PointSet,
    box: Box,
    max_simplices: int = DEFAULT_SIMPLEX_BUDGET,
    point_budget: int = DEFAULT_POINT_BUDGET,
) -> frozenset[EhrhartPolynomial]:
    """All counting polynomials of simplices with vertices in E ∩ box,
    deduplicated by exact coefficients.  A BudgetError raised mid-way
    carries the partial spectrum."""
    found: set[EhrhartPolynomial] = set()
    try:
        for verts in _spectrum_simplices(E, box, max_simplices):
            found.add(ehrhart_polynomial(Simplex(verts), point_budget))
    except BudgetError as err:
        err.partial = frozenset(found)
        raise
    return frozenset(found)


def volume_spectrum(
    E: PointSet, box: Box, max_simplices: int = DEFAULT_SIMPLEX_BUDGET
) -> frozenset[int]:
    """Values of r! * volume over simplices with vertices in E ∩ box."""
    found: set[int] = set()
    try:
        for verts in _spectrum_simplices(E, box, max_simplices):
            found.add(volume_times_rfact(Simplex(verts)))
    except BudgetError as err:
        err.partial = frozenset(found)
        raise
    return frozenset(found)


# ---------------------------------------------------------------------------
# Witness search.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WalkSampler:
    """Draw candidate group elements from a generating random walk instead
    of enumerating words deterministically."""

    measure: "GeneratingMeasure"  # noqa: F821 - imported lazily to avoid a cycle
    length: int
    count: int
    seed: int


@dataclass(frozen=True)
class SearchBudget:
    word_length: int
    max_n: int
    v0_box: Box
    n_values: tuple[int, ...] | None = None
    sampler: WalkSampler | None = None

    def ns(self) -> tuple[int, ...]:
        if self.n_values is not None:
            return self.n_values
        return tuple(range(1, self.max_n + 1))


@dataclass(frozen=True)
class Witness:
    """A certified placement: all of v0 and v0 + n*gamma(v_k) lie in E."""

    n: int
    gamma: UnimodularMap
    v0: Vector
    images: tuple[Vector, ...]
    word: tuple[int, ...] | None = None

    def verify(self, E: PointSet) -> bool:
        return all(E.contains(p) for p in self.images)


@dataclass(frozen=True)
class NotFound:
    gammas: int
    n_count: int
    v0_box_size: int
    triples: int


def _gamma_candidates(rank: int, budget: SearchBudget) -> list[tuple[UnimodularMap, tuple[int, ...] | None]]:
    if budget.sampler is None:
        return [(g, w) for g, w in word_ball(rank, budget.word_length)]
    from .walks import sample_walk  # local import; walks depends on lattice only

    sampler = budget.sampler
    seen = set()
    out: list[tuple[UnimodularMap, tuple[int, ...] | None]] = []
    for trial in range(sampler.count):
        walk = sample_walk(sampler.measure, sampler.length, sampler.seed + trial)
        for g in walk.lattice_products():
            if g.entries not in seen:
                seen.add(g.entries)
                out.append((g, None))
    return out


def witness_search(E: PointSet, basis: Sequence[Vector], budget: SearchBudget):
    """First witness in the deterministic order (n ascending, word length
    ascending, lexicographic words, v0 in row-major box order), or a
    NotFound report with the examined counts."""
    basis = [as_vector(v) for v in basis]
    r = E.rank
    for v in basis:
        if len(v) != r:
            raise RankMismatchError("basis rank differs from point-set rank")
    if len(basis) != r or det_rows(basis) == 0:
        raise SingularBasisError("witness search needs r linearly independent vectors")

    v0_all = list(box_points(budget.v0_box))
    v0_members = [v for v in v0_all if E.contains(v)]
    gammas = _gamma_candidates(r, budget)
    ns = budget.ns()

    for n in ns:
        for gamma, word in gammas:
            offsets = [vscale(n, gamma.apply(v)) for v in basis]
            for v0 in v0_members:
                if all(E.contains(vadd(v0, off)) for off in offsets):
                    images = (v0,) + tuple(vadd(v0, off) for off in offsets)
                    w = Witness(n=n, gamma=gamma, v0=v0, images=images, word=word)
                    if not w.verify(E):
                        raise AssertionError("witness failed its certificate re-check")
                    return w
    return NotFound(
        gammas=len(gammas),
        n_count=len(ns),
        v0_box_size=len(v0_all),
        triples=len(ns) * len(gammas) * len(v0_all),
    )


@dataclass(frozen=True)
class InclusionReport:
    simplex: Simplex
    witness: Witness | None
    verified: bool
    polynomial: EhrhartPolynomial | None
    reason: str


def inclusion_check(
    n: int,
    E: PointSet,
    simplices: Sequence[Simplex],
    budget: SearchBudget,
    point_budget: int = DEFAULT_POINT_BUDGET,
) -> list[InclusionReport]:
    """For each simplex (translated so its first vertex is the origin), run
    the witness search at the fixed dilation n and check that the counting
    polynomial of the witness image equals that of the n-fold dilate."""
    fixed = SearchBudget(
        word_length=budget.word_length,
        max_n=n,
        v0_box=budget.v0_box,
        n_values=(n,),
        sampler=budget.sampler,
    )
    reports = []
    for s in simplices:
        v0 = s.vertices[0]
        norm = Simplex(tuple(vsub(v, v0) for v in s.vertices))
        basis = norm.vertices[1:]
        result = witness_search(E, basis, fixed)
        if isinstance(result, NotFound):
            reports.append(
                InclusionReport(
                    simplex=s,
                    witness=None,
                    verified=False,
                    polynomial=None,
                    reason=f"no witness within budget ({result.triples} triples)",
                )
            )
            continue
        poly_witness = ehrhart_polynomial(Simplex(result.images), point_budget)
        poly_dilate = ehrhart_polynomial(dilate(norm, n), point_budget)
        ok = poly_witness == poly_dilate
        reports.append(
            InclusionReport(
                simplex=s,
                witness=result,
                verified=ok,
                polynomial=poly_witness if ok else None,
                reason="verified" if ok else "polynomial mismatch",
            )
        )
    return reports
