"""Generating random walks on the unit-determinant group: seeded sampling,
Cesàro hit-density reports, exponential-sum equidistribution checks,
eigenvalue-gap (proximality) tests, and the exact tail lower bound for
bounded nonnegative variables.

Walk products are exact integer matrices; their entries grow exponentially
with the step count, so character pairings scale their precision with the
actual coordinate sizes.
"""

from __future__ import annotations

import cmath
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator, Sequence

import mpmath

from .errors import PreconditionError, RankMismatchError
from .lattice import (
    Character,
    IntMatrix,
    UnimodularMap,
    Vector,
    as_vector,
    det_rows,
    elementary_generators,
    is_rational_character,
    pair_with_error,
)
from .ehrhart import interpolate_at_integers

_SEED_BITS = 63


@dataclass(frozen=True)
class GeneratingMeasure:
    """Finitely supported probability measure on unit-determinant matrices;
    weights are exact rationals summing to 1."""

    support: tuple[UnimodularMap, ...]
    weights: tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.support) != len(self.weights) or not self.support:
            raise ValueError("support and weights must be nonempty and aligned")
        if any(w <= 0 for w in self.weights):
            raise ValueError("weights must be positive")
        if sum(self.weights) != 1:
            raise ValueError("weights must sum to exactly 1")
        r = self.support[0].r
        if any(g.r != r for g in self.support):
            raise RankMismatchError("support matrices must share a rank")

    @property
    def rank(self) -> int:
        return self.support[0].r

    def sampling_bins(self) -> tuple[int, list[int]]:
        """Common denominator W and cumulative integer bin edges, so index
        selection is exact: draw k in [0, W) and locate the bin."""
        w = 1
        for f in self.weights:
            w = w * f.denominator // math.gcd(w, f.denominator)
        edges = []
        acc = 0
        for f in self.weights:
            acc += int(f * w)
            edges.append(acc)
        return w, edges


def default_measure(r: int) -> GeneratingMeasure:
    """Uniform weights on the 2r(r-1) elementary matrices I +/- E_ij."""
    if r < 2:
        raise RankMismatchError("generating measures need rank >= 2")
    gens = elementary_generators(r)
    n = len(gens)
    return GeneratingMeasure(support=gens, weights=(Fraction(1, n),) * n)


@dataclass(frozen=True)
class WalkSample:
    """A seeded walk: step indices into the measure support; products are
    materialized on demand and always recomputable from the steps."""

    measure: GeneratingMeasure
    seed: int
    steps: tuple[int, ...]

    def lattice_products(self) -> Iterator[UnimodularMap]:
        """gamma_1, gamma_2, ... (gamma_0 is the identity and is skipped)."""
        acc = UnimodularMap.identity(self.measure.rank)
        for idx in self.steps:
            acc = acc * self.measure.support[idx]
            yield acc

    def product_at(self, n: int) -> UnimodularMap:
        acc = UnimodularMap.identity(self.measure.rank)
        for idx in self.steps[:n]:
            acc = acc * self.measure.support[idx]
        return acc


def sample_walk(p: GeneratingMeasure, n: int, seed: int) -> WalkSample:
    """Reproducible n-step walk; identical seeds give identical steps."""
    if n < 0:
        raise ValueError("horizon must be nonnegative")
    rng = random.Random(seed)
    w, edges = p.sampling_bins()
    steps = []
    for _ in range(n):
        k = rng.randrange(w)
        idx = 0
        while edges[idx] <= k:
            idx += 1
        steps.append(idx)
    return WalkSample(measure=p, seed=seed, steps=tuple(steps))


def _trial_seeds(seed: int, m: int) -> list[int]:
    rng = random.Random(seed)
    return [rng.getrandbits(_SEED_BITS) for _ in range(m)]


def _step_cols(measure: GeneratingMeasure) -> list[tuple[int, int, int]]:
    """Right multiplication by I + s*E_ij is the column operation
    col_j += s * col_i; precompute (i, j, s) per support element."""
    ops = []
    r = measure.rank
    ident = IntMatrix.identity(r).entries
    for g in measure.support:
        diff = [
            (i, j, g.entries[i][j] - ident[i][j])
            for i in range(r)
            for j in range(r)
            if g.entries[i][j] != ident[i][j]
        ]
        if len(diff) == 1 and abs(diff[0][2]) == 1:
            ops.append(diff[0])
        else:
            ops.append(None)
    return ops


class _ProductIterator:
    """Streams exact walk products as column tuples, using fast column
    operations when the measure is supported on elementary matrices."""

    def __init__(self, measure: GeneratingMeasure, steps: Sequence[int]):
        self.measure = measure
        self.steps = steps
        self.ops = _step_cols(measure)
        r = measure.rank
        self.cols = [[1 if i == j else 0 for i in range(r)] for j in range(r)]

    def __iter__(self):
        for idx in self.steps:
            op = self.ops[idx]
            if op is not None:
                i, j, s = op
                ci, cj = self.cols[i], self.cols[j]
                for k in range(len(cj)):
                    cj[k] += s * ci[k]
            else:
                g = self.measure.support[idx].entries
                r = len(g)
                old = [col[:] for col in self.cols]
                for j in range(r):
                    for k in range(r):
                        self.cols[j][k] = sum(old[q][k] * g[q][j] for q in range(r))
            yield self.cols

    def apply(self, v: Vector) -> Vector:
        return tuple(
            sum(self.cols[j][k] * v[j] for j in range(len(v))) for k in range(len(v))
        )


@dataclass(frozen=True)
class DensityReport:
    """Cesàro averages of empirical hit probabilities along a walk."""

    horizon: int
    trials: int
    seed: int
    hit_counts: tuple[int, ...]
    cesaro: tuple[Fraction, ...]

    @property
    def final(self) -> Fraction:
        return self.cesaro[-1]

    def stderr(self, index: int) -> float:
        """Nominal binomial standard error of the Cesàro value at 1-based
        horizon ``index`` (treats all samples as independent)."""
        c = float(self.cesaro[index - 1])
        return math.sqrt(max(c * (1.0 - c), 0.0) / (self.trials * index))


def _density_trial(args) -> list[int]:
    measure, v, member, n, seed = args
    walk = sample_walk(measure, n, seed)
    it = _ProductIterator(measure, walk.steps)
    hits = []
    for _ in it:
        hits.append(1 if member(it.apply(v)) else 0)
    return hits


def _map_trials(fn, jobs, workers: int):
    if workers <= 1:
        return [fn(j) for j in jobs]
    import multiprocessing

    with multiprocessing.get_context("fork").Pool(workers) as pool:
        return pool.map(fn, jobs)


def upper_pv_density(
    p: GeneratingMeasure,
    v: Vector,
    membership: Callable[[Vector], bool],
    N: int,
    M: int,
    seed: int,
    workers: int = 1,
) -> DensityReport:
    """Cesàro sequence (1/N') sum_{n<=N'} P_hat(gamma_n(v) in E) for
    N' = 1..N, with the hit probability estimated over M seeded walks."""
    v = as_vector(v)
    if all(c == 0 for c in v):
        raise PreconditionError("the tracked vector must be nonzero")
    if N < 1 or M < 1:
        raise PreconditionError("horizon and trial count must be >= 1")
    jobs = [(p, v, membership, N, s) for s in _trial_seeds(seed, M)]
    per_trial = _map_trials(_density_trial, jobs, workers)
    hits = [sum(t[n] for t in per_trial) for n in range(N)]
    cesaro = []
    acc = 0
    for n, h in enumerate(hits, start=1):
        acc += h
        cesaro.append(Fraction(acc, n * M))
    return DensityReport(
        horizon=N, trials=M, seed=seed, hit_counts=tuple(hits), cesaro=tuple(cesaro)
    )


@dataclass(frozen=True)
class WeylReport:
    """Cesàro character-sum magnitudes along a walk, with a conservative
    bound on the accumulated rounding error."""

    horizon: int
    trials: int
    seed: int
    magnitudes: tuple[float, ...]
    error_bound: float

    @property
    def final(self) -> float:
        return self.magnitudes[-1]


def _weyl_trial(args) -> list[complex]:
    measure, xi, v, n, seed, precision = args
    walk = sample_walk(measure, n, seed)
    it = _ProductIterator(measure, walk.steps)
    out = []
    for _ in it:
        w = it.apply(v)
        phase, _ = pair_with_error(xi, w, precision)
        out.append(cmath.exp(2j * math.pi * float(phase)))
    return out


def weyl_equidistribution(
    p: GeneratingMeasure,
    xi: Character,
    v: Vector,
    N: int,
    M: int,
    seed: int,
    precision: int = 64,
    workers: int = 1,
) -> WeylReport:
    """|(1/N') sum_n mean_walks e(<xi, gamma_n v>)| for N' = 1..N.  The
    character must have an irrational coordinate; fully rational characters
    have finite-index kernels and are rejected."""
    rational, _ = is_rational_character(xi)
    if rational:
        raise PreconditionError(
            "character is rational (finite-index kernel); equidistribution "
            "averaging requires an irrational coordinate"
        )
    v = as_vector(v)
    if all(c == 0 for c in v):
        raise PreconditionError("the tracked vector must be nonzero")
    jobs = [(p, xi, v, N, s, precision) for s in _trial_seeds(seed, M)]
    per_trial = _map_trials(_weyl_trial, jobs, workers)
    sums = [sum(t[n] for t in per_trial) for n in range(N)]
    mags = []
    acc = 0j
    for n, z in enumerate(sums, start=1):
        acc += z
        mags.append(abs(acc) / (n * M))
    # Magnitudes are means, so the per-term bound survives the averaging:
    # phase tracked to ~10^-precision plus float round-off per term.
    err = 2 * math.pi * 10.0 ** (-precision) + 1e-13
    return WeylReport(
        horizon=N, trials=M, seed=seed, magnitudes=tuple(mags), error_bound=err
    )


# ---------------------------------------------------------------------------
# Proximality.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ProximalityResult:
    verdict: str  # "proximal" | "not proximal" | "borderline"
    charpoly: tuple[int, ...]
    top_modulus: float
    gap: float


def characteristic_polynomial(m: IntMatrix) -> tuple[int, ...]:
    """Exact monic characteristic polynomial det(xI - A), ascending."""
    r = m.r
    vals = []
    for k in range(r + 1):
        rows = [
            [(k if i == j else 0) - m.entries[i][j] for j in range(r)]
            for i in range(r)
        ]
        vals.append(det_rows(rows))
    coeffs = interpolate_at_integers(vals)
    out = []
    for c in coeffs:
        if c.denominator != 1:
            raise AssertionError("characteristic polynomial must be integral")
        out.append(int(c))
    return tuple(out)


def _strip(p: list[Fraction]) -> list[Fraction]:
    while p and p[-1] == 0:
        p.pop()
    return p


def _poly_gcd(a: list[Fraction], b: list[Fraction]) -> list[Fraction]:
    """Monic gcd over the rationals (Euclidean remainders)."""
    a, b = _strip(list(a)), _strip(list(b))
    while b:
        rem = a[:]
        while len(rem) >= len(b):
            if rem[-1] == 0:
                rem.pop()
                continue
            factor = rem[-1] / b[-1]
            shift = len(rem) - len(b)
            for i in range(len(b)):
                rem[shift + i] -= factor * b[i]
            rem.pop()
        a, b = b, _strip(rem)
    if a:
        lead = a[-1]
        a = [c / lead for c in a]
    return a


def _derivative(p: Sequence[Fraction]) -> list[Fraction]:
    return [Fraction(i) * c for i, c in enumerate(p)][1:]


def proximality_check(
    gamma: IntMatrix, tol: float = 1e-8, precision: int = 50
) -> ProximalityResult:
    """Is there a unique simple eigenvalue of strictly largest modulus?

    Roots come from the exact characteristic polynomial at the requested
    decimal precision.  Exact modulus ties (repeated roots, conjugate
    pairs) give "not proximal"; a nonzero gap below ``tol`` is reported as
    "borderline" rather than guessed.
    """
    cp = characteristic_polynomial(gamma)
    with mpmath.workdps(precision):
        roots = mpmath.polyroots(
            [mpmath.mpf(c) for c in reversed(cp)], maxsteps=200, extraprec=200
        )
        moduli = sorted((abs(z) for z in roots), reverse=True)
        top = float(moduli[0])
        if len(moduli) == 1:
            gap = 1.0
        elif moduli[0] == 0:
            gap = 0.0
        else:
            gap = float((moduli[0] - moduli[1]) / moduli[0])
    tie_eps = 10.0 ** (-(precision // 2))
    if gap > tol:
        rational_cp = [Fraction(c) for c in cp]
        g = _poly_gcd(rational_cp, _derivative(rational_cp))
        if len(g) <= 1:
            verdict = "proximal"  # squarefree, so the top root is simple
        else:
            with mpmath.workdps(precision):
                rep = mpmath.polyroots(
                    [mpmath.mpf(str(c)) for c in reversed(g)], maxsteps=200, extraprec=200
                )
                repeated_at_top = any(
                    abs(float(abs(z)) - top) <= tie_eps * max(1.0, top) for z in rep
                )
            verdict = "not proximal" if repeated_at_top else "proximal"
    elif gap <= tie_eps:
        verdict = "not proximal"
    else:
        verdict = "borderline"
    return ProximalityResult(verdict=verdict, charpoly=cp, top_modulus=top, gap=gap)


# ---------------------------------------------------------------------------
# Exact helpers used by the experiments.
# ---------------------------------------------------------------------------


def markov_lower_bound(mean: Fraction, c: Fraction, sup: Fraction) -> Fraction:
    """(mean - c) / (sup - c): a lower bound on P(f > c) for a nonnegative
    variable f with the given mean and supremum, valid when 0 < c < mean <= sup."""
    mean, c, sup = Fraction(mean), Fraction(c), Fraction(sup)
    if not (0 < c < mean <= sup):
        raise PreconditionError(
            f"need 0 < c < mean <= sup, got c={c}, mean={mean}, sup={sup}"
        )
    return (mean - c) / (sup - c)


def lower_density(flags: Sequence[bool]) -> Fraction:
    """Finite-horizon stand-in for the asymptotic lower density: the minimum
    of |{n <= N'} hits| / N' over N' in [N/2, N]."""
    n = len(flags)
    if n < 1:
        raise PreconditionError("need at least one entry")
    counts = []
    acc = 0
    for f in flags:
        acc += 1 if f else 0
        counts.append(acc)
    start = (n + 1) // 2
    return min(Fraction(counts[k - 1], k) for k in range(start, n + 1))


def exact_step_distribution(
    p: GeneratingMeasure, n: int, max_n: int = 6
) -> dict[tuple[tuple[int, ...], ...], Fraction]:
    """Exact distribution of the n-step product by convolution; capped at
    small horizons and rank 2, serving as a cross-check for sampling."""
    if p.rank != 2:
        raise PreconditionError("exact convolution is provided for rank 2 only")
    if n > max_n:
        raise PreconditionError(f"exact convolution capped at n <= {max_n}")
    dist: dict[tuple[tuple[int, ...], ...], Fraction] = {
        UnimodularMap.identity(p.rank).entries: Fraction(1)
    }
    for _ in range(n):
        new: dict[tuple[tuple[int, ...], ...], Fraction] = {}
        for entries, prob in dist.items():
            m = IntMatrix(entries)
            for g, w in zip(p.support, p.weights):
                key = (m * g).entries
                new[key] = new.get(key, Fraction(0)) + prob * w
        dist = new
    return dist
