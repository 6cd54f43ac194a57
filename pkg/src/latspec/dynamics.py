"""Exactly solvable measure-preserving lattice actions: finite cyclic
systems and circle rotations.  Correlations are exact rationals, spectral
measures are computed atom by atom (cyclic masses keep an exact cyclotomic
representation, so the Bochner identity can be verified with integer
arithmetic), and the walk-driven experiments report seeded Cesàro data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from itertools import product
from typing import Sequence, Union

import numpy as np

from .errors import (
    PreconditionError,
    RankMismatchError,
    SingularBasisError,
    UnsupportedSystemError,
)
from .lattice import (
    Character,
    Irrational,
    TorusCoord,
    UnimodularMap,
    Vector,
    as_vector,
    det_rows,
    is_rational_character,
    shear_word,
    word_ball,
)
from .walks import GeneratingMeasure, _map_trials, _trial_seeds, lower_density, sample_walk

DEFAULT_PRECISION = 64


# ---------------------------------------------------------------------------
# Systems and measurable sets.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CyclicSystem:
    """Uniform measure on (Z/m)^d; a lattice vector v acts by adding A v.

    ``action`` has d rows of length r (the lattice rank), entries mod m.
    """

    modulus: int
    dim: int
    action: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if self.modulus < 1:
            raise ValueError("modulus must be positive")
        if self.dim < 1:
            raise ValueError("dimension must be positive")
        rows = tuple(tuple(e % self.modulus for e in row) for row in self.action)
        if len(rows) != self.dim:
            raise RankMismatchError("action must have one row per dimension")
        r = len(rows[0])
        if any(len(row) != r for row in rows):
            raise RankMismatchError("action rows must share a length")
        object.__setattr__(self, "action", rows)

    @property
    def rank(self) -> int:
        return len(self.action[0])

    @property
    def size(self) -> int:
        return self.modulus ** self.dim

    def points(self):
        return product(*(range(self.modulus),) * self.dim)

    def translation(self, v: Vector) -> tuple[int, ...]:
        """A v mod m; v may have arbitrarily large integer entries."""
        if len(v) != self.rank:
            raise RankMismatchError("vector rank differs from the action rank")
        m = self.modulus
        return tuple(sum(row[j] * v[j] for j in range(self.rank)) % m for row in self.action)

    def shift_set(self, B: frozenset, v: Vector) -> frozenset:
        """The set v.B = B - A v (the points mapped into B by the action)."""
        t = self.translation(v)
        m = self.modulus
        return frozenset(tuple((x[i] - t[i]) % m for i in range(self.dim)) for x in B)

    def _subgroup(self, gens: Sequence[tuple[int, ...]]) -> frozenset:
        m = self.modulus
        zero = (0,) * self.dim
        seen = {zero}
        frontier = [zero]
        while frontier:
            nxt = []
            for x in frontier:
                for g in gens:
                    y = tuple((a + b) % m for a, b in zip(x, g))
                    if y not in seen:
                        seen.add(y)
                        nxt.append(y)
            frontier = nxt
        return frozenset(seen)

    @cached_property
    def is_ergodic(self) -> bool:
        cols = [tuple(self.action[i][j] for i in range(self.dim)) for j in range(self.rank)]
        return len(self._subgroup(cols)) == self.size


def cyclic_set(system: CyclicSystem, points) -> frozenset:
    m = system.modulus
    out = set()
    for p in points:
        p = tuple(int(c) % m for c in p)
        if len(p) != system.dim:
            raise RankMismatchError("set point has the wrong dimension")
        out.add(p)
    return frozenset(out)


@dataclass(frozen=True)
class IntervalUnion:
    """Disjoint half-open subintervals of [0, 1) with rational endpoints."""

    intervals: tuple[tuple[Fraction, Fraction], ...]

    def __post_init__(self):
        ivs = sorted((Fraction(a), Fraction(b)) for a, b in self.intervals)
        for a, b in ivs:
            if not (0 <= a < b <= 1):
                raise ValueError(f"interval [{a}, {b}) must sit inside [0, 1)")
        merged: list[tuple[Fraction, Fraction]] = []
        for a, b in ivs:
            if merged and a < merged[-1][1]:
                raise ValueError("intervals must be disjoint")
            if merged and a == merged[-1][1]:
                merged[-1] = (merged[-1][0], b)
            else:
                merged.append((a, b))
        object.__setattr__(self, "intervals", tuple(merged))

    @property
    def measure(self) -> Fraction:
        return sum((b - a for a, b in self.intervals), Fraction(0))

    def shift(self, s: Fraction) -> "IntervalUnion":
        s = Fraction(s)
        s -= s.numerator // s.denominator
        out = []
        for a, b in self.intervals:
            a, b = a + s, b + s
            if b <= 1:
                out.append((a, b))
            elif a >= 1:
                out.append((a - 1, b - 1))
            else:
                out.append((a, Fraction(1)))
                out.append((Fraction(0), b - 1))
        return IntervalUnion(tuple(out))

    def intersect(self, other: "IntervalUnion") -> "IntervalUnion":
        out = []
        for a, b in self.intervals:
            for c, d in other.intervals:
                lo, hi = max(a, c), min(b, d)
                if lo < hi:
                    out.append((lo, hi))
        return IntervalUnion(tuple(out))

    def union(self, other: "IntervalUnion") -> "IntervalUnion":
        points = sorted(set(self.intervals) | set(other.intervals))
        merged: list[list[Fraction]] = []
        for a, b in points:
            if merged and a <= merged[-1][1]:
                merged[-1][1] = max(merged[-1][1], b)
            else:
                merged.append([a, b])
        return IntervalUnion(tuple((a, b) for a, b in merged))


@dataclass(frozen=True)
class TorusRotationSystem:
    """Rotation of the circle by v . alpha; ergodic when 1 and the alpha
    coordinates are rationally independent, which irrational construction
    tags assert."""

    alpha: tuple[TorusCoord, ...]
    independent: bool = True

    def __post_init__(self):
        if not self.alpha:
            raise RankMismatchError("need at least one rotation coordinate")

    @property
    def rank(self) -> int:
        return len(self.alpha)

    def shift_of(self, v: Vector, precision: int = DEFAULT_PRECISION) -> tuple[Fraction, Fraction]:
        """v . alpha mod 1 with an error bound (0 when exact)."""
        if len(v) != self.rank:
            raise RankMismatchError("vector rank differs from the rotation rank")
        total = Fraction(0)
        err = Fraction(0)
        for c, m in zip(self.alpha, v):
            if isinstance(c, Fraction):
                total += c * m
            elif m != 0:
                val, e = c.scale(m).approx(precision)
                total += val
                err += e
        total -= total.numerator // total.denominator
        return total, err

    def rational_shift(self, v: Vector) -> Fraction | None:
        """Exact v . alpha when no irrational coordinate contributes."""
        total = Fraction(0)
        for c, m in zip(self.alpha, v):
            if isinstance(c, Irrational):
                if m != 0:
                    return None
            else:
                total += c * m
        return total - total.numerator // total.denominator


System = Union[CyclicSystem, TorusRotationSystem]
MeasurableSet = Union[frozenset, IntervalUnion]


def set_measure(system: System, B: MeasurableSet) -> Fraction:
    if isinstance(system, CyclicSystem):
        return Fraction(len(B), system.size)
    return B.measure


def correlation(
    system: System, B: MeasurableSet, v: Vector, precision: int = DEFAULT_PRECISION
) -> Fraction:
    """mu(B ∩ v.B), exact for cyclic systems; for rotations the shift is a
    tracked high-precision rational, and the overlap is exact given it."""
    v = as_vector(v)
    if isinstance(system, CyclicSystem):
        return Fraction(len(B & system.shift_set(B, v)), system.size)
    s, _ = system.shift_of(v, precision)
    return B.intersect(B.shift(-s)).measure


def multi_correlation(
    system: System, B: MeasurableSet, vectors: Sequence[Vector], precision: int = DEFAULT_PRECISION
) -> Fraction:
    """mu(B ∩ w_1.B ∩ ... ∩ w_k.B), exact counting / interval overlap."""
    if not vectors:
        raise PreconditionError("need at least one vector")
    if isinstance(system, CyclicSystem):
        acc = B
        for w in vectors:
            acc = acc & system.shift_set(B, as_vector(w))
        return Fraction(len(acc), system.size)
    acc = B
    for w in vectors:
        s, _ = system.shift_of(as_vector(w), precision)
        acc = acc.intersect(B.shift(-s))
    return acc.measure


# ---------------------------------------------------------------------------
# Spectral measures.
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def cyclotomic_polynomial(m: int) -> tuple[int, ...]:
    """Ascending integer coefficients of the m-th cyclotomic polynomial."""
    poly = [-1] + [0] * (m - 1) + [1]  # x^m - 1
    for d in range(1, m):
        if m % d == 0:
            phi = cyclotomic_polynomial(d)
            poly = _poly_divide_exact(poly, phi)
    return tuple(poly)


def _poly_divide_exact(num: Sequence[int], den: Sequence[int]) -> list[int]:
    num = list(num)
    out = [0] * (len(num) - len(den) + 1)
    for k in range(len(out) - 1, -1, -1):
        c = num[k + len(den) - 1]
        assert c % den[-1] == 0
        q = c // den[-1]
        out[k] = q
        for i, d in enumerate(den):
            num[k + i] -= q * d
    assert all(c == 0 for c in num)
    return out


def _reduce_mod_cyclotomic(vec: Sequence[int], m: int) -> list[int]:
    phi = cyclotomic_polynomial(m)
    rem = list(vec)
    deg = len(phi) - 1
    for k in range(len(rem) - 1, deg - 1, -1):
        c = rem[k]
        if c:
            for i in range(len(phi)):
                rem[k - deg + i] -= c * phi[i]
    return rem[:deg] if deg > 0 else []


def _cyclo_value(vec: Sequence[int], m: int, denom: int) -> Fraction | float:
    reduced = _reduce_mod_cyclotomic(vec, m)
    if all(c == 0 for c in reduced[1:]):
        return Fraction(reduced[0] if reduced else 0, denom)
    return sum(c * math.cos(2 * math.pi * k / m) for k, c in enumerate(vec)) / denom


@dataclass(frozen=True)
class SpectralAtom:
    """One atom of a spectral measure: a character and its mass.  Cyclic
    atoms keep the integer cyclotomic numerator of the mass (denominator
    m^(2d)) so downstream identities can be checked exactly."""

    xi: Character
    mass: Fraction | float
    cyclo: tuple[int, ...] | None = None
    label: object = None


@dataclass(frozen=True)
class SpectralMeasureAtoms:
    """Atomic (possibly truncated) description of a spectral measure."""

    kind: str  # "cyclic" | "torus"
    atoms: tuple[SpectralAtom, ...]
    truncation: int | None
    tail: Fraction
    total: Fraction  # mu(B)

    def mass_at_zero(self) -> Fraction | float:
        for atom in self.atoms:
            if all(c == 0 for c in atom.xi.coords):
                return atom.mass
        return Fraction(0)

    def retained(self) -> Fraction:
        return sum((Fraction(a.mass) for a in self.atoms), Fraction(0))


def _diff_counts(system: CyclicSystem, B: frozenset) -> dict[tuple[int, ...], int]:
    m = system.modulus
    out: dict[tuple[int, ...], int] = {}
    for x in B:
        for y in B:
            t = tuple((y[i] - x[i]) % m for i in range(system.dim))
            out[t] = out.get(t, 0) + 1
    return out


def spectral_measure(
    system: System, B: MeasurableSet, K: int | None = None
) -> SpectralMeasureAtoms:
    """Atoms of the spectral measure of the indicator of B.

    Cyclic systems have a finite, purely rational spectrum at the
    characters (A^T chi)/m and need no truncation; rotations are truncated
    at frequency |k| <= K with the exact Parseval remainder reported as
    tail mass.
    """
    if isinstance(system, CyclicSystem):
        return _cyclic_spectral_measure(system, B)
    if K is None or K < 1:
        raise PreconditionError("rotation spectra need a truncation bound K >= 1")
    return _torus_spectral_measure(system, B, K)


def _cyclic_spectral_measure(system: CyclicSystem, B: frozenset) -> SpectralMeasureAtoms:
    m, d, r = system.modulus, system.dim, system.rank
    denom = system.size ** 2
    diff = _diff_counts(system, B)
    merged: dict[tuple[Fraction, ...], list] = {}
    for chi in system.points():
        xi = tuple(
            Fraction(sum(system.action[j][i] * chi[j] for j in range(d)) % m, m)
            for i in range(r)
        )
        vec = merged.setdefault(xi, [0] * m)
        for t, cnt in diff.items():
            k = sum(c * t[i] for i, c in enumerate(chi)) % m
            vec[k] += cnt
    atoms = []
    for xi in sorted(merged):
        vec = merged[xi]
        mass = _cyclo_value(vec, m, denom)
        if mass == 0:
            continue
        atoms.append(
            SpectralAtom(xi=Character(xi), mass=mass, cyclo=tuple(vec), label=None)
        )
    total = Fraction(len(B), system.size)
    return SpectralMeasureAtoms(
        kind="cyclic", atoms=tuple(atoms), truncation=None, tail=Fraction(0), total=total
    )


def _endpoint_phases(x: Fraction, K: int) -> np.ndarray:
    """k*x mod 1 for k = 1..K, reduced exactly before the float conversion
    so phases that vanish do so exactly."""
    num, den = x.numerator % x.denominator, x.denominator
    ks = np.arange(1, K + 1, dtype=np.int64)
    if K * num < 2**62:
        return ((ks * num) % den) / float(den)
    return np.array([(k * num) % den for k in range(1, K + 1)], dtype=np.float64) / float(den)


def _torus_fourier_sq(B: IntervalUnion, K: int) -> np.ndarray:
    """|hat(1_B)(k)|^2 for k = 1..K (floats)."""
    ks = np.arange(1, K + 1, dtype=np.float64)
    total = np.zeros(K, dtype=np.complex128)
    for a, b in B.intervals:
        total += np.exp(-2j * np.pi * _endpoint_phases(a, K))
        total -= np.exp(-2j * np.pi * _endpoint_phases(b, K))
    return (np.abs(total) ** 2) / (4 * np.pi**2 * ks**2)


def _scale_coord(c: TorusCoord, k: int) -> TorusCoord:
    if isinstance(c, Irrational):
        return c.scale(k) if k != 0 else Fraction(0)
    f = Fraction(c) * k
    return f - f.numerator // f.denominator


def _torus_spectral_measure(
    system: TorusRotationSystem, B: IntervalUnion, K: int
) -> SpectralMeasureAtoms:
    mu = B.measure
    sq = _torus_fourier_sq(B, K)
    atoms = [SpectralAtom(xi=Character((Fraction(0),) * system.rank), mass=mu * mu, label=0)]
    for k in range(1, K + 1):
        mass = float(sq[k - 1])
        if mass == 0.0:
            continue
        for sk in (k, -k):
            xi = Character(tuple(_scale_coord(c, sk) for c in system.alpha))
            atoms.append(SpectralAtom(xi=xi, mass=mass, label=sk))
    retained = mu * mu + 2 * sum((Fraction(float(x)) for x in sq), Fraction(0))
    return SpectralMeasureAtoms(
        kind="torus",
        atoms=tuple(atoms),
        truncation=K,
        tail=mu - retained,
        total=mu,
    )


def rational_part_mass(sm: SpectralMeasureAtoms) -> Fraction:
    """Spectral mass at nonzero finite-index (rational) characters, exact."""
    if sm.kind == "cyclic":
        mass0 = sm.mass_at_zero()
        if not isinstance(mass0, Fraction):
            raise AssertionError("cyclic mass at the zero character must be rational")
        return sm.total - mass0
    acc = Fraction(0)
    for atom in sm.atoms:
        rational, _ = is_rational_character(atom.xi)
        if rational and any(c != 0 for c in atom.xi.coords):
            acc += Fraction(atom.mass)
    return acc


def bochner_check(
    system: System,
    B: MeasurableSet,
    v: Vector,
    K: int | None = None,
    precision: int = DEFAULT_PRECISION,
) -> Fraction:
    """|sum over atoms of mass * e(<xi, v>) - correlation|.

    Exactly zero for cyclic systems (verified in the cyclotomic integer
    ring); for rotations the result is at most the tail mass, up to the
    rounding of the float cosines, and equals the tail exactly at v = 0.
    """
    v = as_vector(v)
    if isinstance(system, CyclicSystem):
        sm = _cyclic_spectral_measure(system, B)
        m = system.modulus
        total = [0] * m
        for atom in sm.atoms:
            phase = sum(
                (c * w for c, w in zip(atom.xi.coords, v)), Fraction(0)
            )
            phase -= phase.numerator // phase.denominator
            shift = int(phase * m) % m
            for k, c in enumerate(atom.cyclo):
                total[(k + shift) % m] += c
        corr_scaled = len(B & system.shift_set(B, v)) * system.size
        total[0] -= corr_scaled
        reduced = _reduce_mod_cyclotomic(total, m)
        if all(c == 0 for c in reduced):
            return Fraction(0)
        value = sum(c * math.cos(2 * math.pi * k / m) for k, c in enumerate(reduced))
        return Fraction(abs(value)) / (system.size ** 2)

    sm = _torus_spectral_measure(system, B, K if K is not None else 1)
    s, _ = system.shift_of(v, precision)
    acc = Fraction(sm.mass_at_zero())
    by_k: dict[int, Fraction] = {}
    for atom in sm.atoms:
        if atom.label and atom.label > 0:
            by_k[atom.label] = Fraction(atom.mass)
    for k, mass in by_k.items():
        ks = Fraction(k) * s
        ks -= ks.numerator // ks.denominator
        acc += 2 * mass * Fraction(math.cos(2 * math.pi * float(ks)))
    corr = correlation(system, B, v, precision)
    return abs(acc - corr)


# ---------------------------------------------------------------------------
# Walk-driven experiments.
# ---------------------------------------------------------------------------


class _ModProducts:
    """Walk products reduced mod m (enough for cyclic correlations)."""

    def __init__(self, measure: GeneratingMeasure, steps, m: int):
        self.m = m
        self.support = [
            tuple(tuple(e % m for e in row) for row in g.entries) for g in measure.support
        ]
        self.steps = steps
        r = measure.rank
        self.mat = [[1 if i == j else 0 for j in range(r)] for i in range(r)]

    def __iter__(self):
        m = self.m
        r = len(self.mat)
        for idx in self.steps:
            g = self.support[idx]
            old = [row[:] for row in self.mat]
            for i in range(r):
                for j in range(r):
                    self.mat[i][j] = sum(old[i][q] * g[q][j] for q in range(r)) % m
            yield self.mat

    def apply(self, v: Vector) -> tuple[int, ...]:
        m = self.m
        return tuple(sum(row[j] * v[j] for j in range(len(v))) % m for row in self.mat)


def _cyclic_corr_trial(args) -> list[int]:
    system, B, v, measure, n, seed = args
    walk = sample_walk(measure, n, seed)
    it = _ModProducts(measure, walk.steps, system.modulus)
    diff = _diff_counts(system, B)
    out = []
    for _ in it:
        w = it.apply(v)
        t = system.translation(w)
        out.append(diff.get(t, 0))
    return out


def _torus_corr_trial(args) -> list[Fraction]:
    system, B, v, measure, n, seed, precision = args
    from .walks import _ProductIterator

    walk = sample_walk(measure, n, seed)
    it = _ProductIterator(measure, walk.steps)
    out = []
    for _ in it:
        w = it.apply(v)
        s, _ = system.shift_of(w, precision)
        out.append(B.intersect(B.shift(-s)).measure)
    return out


@dataclass(frozen=True)
class CesaroCorrelationReport:
    horizon: int
    trials: int
    seed: int
    values: tuple
    target: Fraction
    bound: Fraction

    @property
    def final(self):
        return self.values[-1]

    @property
    def final_deviation(self):
        return abs(self.values[-1] - self.target)


def cesaro_correlation_experiment(
    system: System,
    B: MeasurableSet,
    v: Vector,
    p: GeneratingMeasure,
    N: int,
    M: int,
    seed: int,
    precision: int = DEFAULT_PRECISION,
    workers: int = 1,
) -> CesaroCorrelationReport:
    """Cesàro averages of mu(B ∩ gamma_n(v).B) along seeded walks, with the
    limit target mu(B)^2 and the rational-spectral-mass deviation bound."""
    v = as_vector(v)
    if all(c == 0 for c in v):
        raise PreconditionError("the tracked vector must be nonzero")
    mu = set_measure(system, B)
    bound = rational_part_mass(spectral_measure(system, B, K=None if isinstance(system, CyclicSystem) else 1))
    seeds = _trial_seeds(seed, M)
    if isinstance(system, CyclicSystem):
        jobs = [(system, B, v, p, N, s) for s in seeds]
        per_trial = _map_trials(_cyclic_corr_trial, jobs, workers)
        md = system.size
        values = []
        acc = 0
        for n in range(N):
            acc += sum(t[n] for t in per_trial)
            values.append(Fraction(acc, (n + 1) * M * md))
    else:
        jobs = [(system, B, v, p, N, s, precision) for s in seeds]
        per_trial = _map_trials(_torus_corr_trial, jobs, workers)
        values = []
        acc = 0.0
        for n in range(N):
            acc += float(sum(t[n] for t in per_trial))
            values.append(acc / ((n + 1) * M))
    return CesaroCorrelationReport(
        horizon=N, trials=M, seed=seed, values=tuple(values), target=mu * mu, bound=bound
    )


@dataclass(frozen=True)
class CSetReport:
    horizon: int
    trials: int
    seed: int
    c: Fraction
    c_prime: Fraction
    delta: Fraction
    bound: Fraction
    indicators: tuple[bool, ...]
    density: Fraction


def c_set_experiment(
    system: System,
    B: MeasurableSet,
    v: Vector,
    p: GeneratingMeasure,
    c: Fraction,
    N: int,
    M: int,
    seed: int,
    precision: int = DEFAULT_PRECISION,
    workers: int = 1,
) -> CSetReport:
    """Indicator of C = {n : empirical P(mu(B ∩ gamma_n(v).B) > c) > delta}
    with delta = (c' - c)/(mu(B) - c) at the midpoint c', plus its
    finite-horizon lower density."""
    v = as_vector(v)
    c = Fraction(c)
    mu = set_measure(system, B)
    bound = mu * mu - rational_part_mass(
        spectral_measure(system, B, K=None if isinstance(system, CyclicSystem) else 1)
    )
    if not (0 < c < bound):
        raise PreconditionError(
            f"need 0 < c < mu(B)^2 - rational spectral mass; got c={c} vs bound={bound}"
        )
    c_prime = (c + bound) / 2
    delta = (c_prime - c) / (mu - c)
    seeds = _trial_seeds(seed, M)
    if isinstance(system, CyclicSystem):
        jobs = [(system, B, v, p, N, s) for s in seeds]
        per_trial = _map_trials(_cyclic_corr_trial, jobs, workers)
        threshold = c * system.size  # corr > c  <=>  count > c * m^d
        exceed = [
            sum(1 for t in per_trial if t[n] > threshold) for n in range(N)
        ]
    else:
        jobs = [(system, B, v, p, N, s, precision) for s in seeds]
        per_trial = _map_trials(_torus_corr_trial, jobs, workers)
        exceed = [sum(1 for t in per_trial if t[n] > c) for n in range(N)]
    indicators = tuple(Fraction(e, M) > delta for e in exceed)
    return CSetReport(
        horizon=N,
        trials=M,
        seed=seed,
        c=c,
        c_prime=c_prime,
        delta=delta,
        bound=bound,
        indicators=indicators,
        density=lower_density(indicators),
    )


# ---------------------------------------------------------------------------
# Orbit unions, ergodic components, and the group-element search.
# ---------------------------------------------------------------------------


def orbit_union_measure(system: System, B: MeasurableSet, lam: Vector) -> Fraction:
    """Measure of the union of all integer-multiple translates of B along
    the direction lam."""
    lam = as_vector(lam)
    if isinstance(system, CyclicSystem):
        t = system.translation(lam)
        orbit = system._subgroup([t])
        m = system.modulus
        union = {
            tuple((x[i] + h[i]) % m for i in range(system.dim)) for x in B for h in orbit
        }
        return Fraction(len(union), system.size)
    if B.measure == 0:
        return Fraction(0)
    rs = system.rational_shift(lam)
    if rs is None:
        return Fraction(1)  # irrational rotation: dense orbit of translates
    q = rs.denominator
    acc = B
    for k in range(1, q):
        acc = acc.union(B.shift(Fraction(k * rs.numerator, q)))
    return acc.measure


@dataclass(frozen=True)
class Component:
    points: frozenset
    measure: Fraction
    conditional: Fraction


@dataclass(frozen=True)
class ComponentsReport:
    components: tuple[Component, ...]
    best_index: int
    exceeds_one_third: bool


def ergodic_components(system: System, B: frozenset, n: int) -> ComponentsReport:
    """Decompose a cyclic system along the subgroup generated by the action
    of n! times the basis vectors; reports each coset's conditional measure
    of B and flags the best component against the mu(B)/3 mark."""
    if not isinstance(system, CyclicSystem):
        raise UnsupportedSystemError("ergodic components are computed for cyclic systems only")
    if n < 1:
        raise ValueError("n must be a positive integer")
    m = system.modulus
    fact = math.factorial(n) % m
    gens = [
        tuple((system.action[i][j] * fact) % m for i in range(system.dim))
        for j in range(system.rank)
    ]
    H = system._subgroup(gens)
    seen = set()
    comps = []
    for x in sorted(system.points()):
        if x in seen:
            continue
        coset = frozenset(
            tuple((x[i] + h[i]) % m for i in range(system.dim)) for h in H
        )
        seen |= coset
        comps.append(
            Component(
                points=coset,
                measure=Fraction(len(coset), system.size),
                conditional=Fraction(len(B & coset), len(coset)),
            )
        )
    best = max(range(len(comps)), key=lambda i: (comps[i].conditional, -i))
    mu = Fraction(len(B), system.size)
    return ComponentsReport(
        components=tuple(comps),
        best_index=best,
        exceeds_one_third=comps[best].conditional > mu / 3,
    )


@dataclass(frozen=True)
class GammaHit:
    gamma: UnimodularMap
    value: Fraction
    images: tuple[Vector, ...]
    word: tuple[int, ...] | None = None
    exponents: tuple[int, ...] | None = None
    anchor_word: tuple[int, ...] | None = None


@dataclass(frozen=True)
class GammaBudget:
    word_length: int
    shear_range: int
    seed: int | None = None  # reserved for randomized candidate sampling


@dataclass(frozen=True)
class GammaSearchReport:
    direct: GammaHit | None
    guided: GammaHit | None
    direct_examined: int
    guided_examined: int
    guided_nonintegral: int

    @property
    def best(self) -> GammaHit | None:
        return self.direct if self.direct is not None else self.guided

    @property
    def found(self) -> bool:
        return self.best is not None


def gamma_search(
    system: System,
    B: MeasurableSet,
    basis: Sequence[Vector],
    budget: GammaBudget,
    precision: int = DEFAULT_PRECISION,
) -> GammaSearchReport:
    """Look for one unit-determinant map gamma making
    mu(B ∩ gamma(v_1).B ∩ ... ∩ gamma(v_r).B) positive.

    Two strategies run and are reported independently: (a) direct word
    enumeration; (b) pick the word gamma_0 maximizing the single
    correlation along gamma_0(v_1), then search shear exponents on the
    image basis, assembling gamma = S gamma_0 only when the shear extends
    integrally to the whole lattice.
    """
    basis = [as_vector(v) for v in basis]
    r = len(basis)
    if det_rows(basis) == 0:
        raise SingularBasisError("basis vectors must be linearly independent")

    ball = list(word_ball(r, budget.word_length))

    direct_hit = None
    direct_examined = 0
    for gamma, word in ball:
        direct_examined += 1
        images = tuple(gamma.apply(v) for v in basis)
        val = multi_correlation(system, B, images, precision)
        if val > 0:
            direct_hit = GammaHit(gamma=gamma, value=val, images=images, word=word)
            break

    guided_hit = None
    guided_examined = 0
    nonintegral = 0
    best_gamma0, best_word, best_corr = None, None, Fraction(-1)
    for gamma0, word in ball:
        corr = correlation(system, B, gamma0.apply(basis[0]), precision)
        if corr > best_corr:
            best_gamma0, best_word, best_corr = gamma0, word, corr
    if best_gamma0 is not None and best_corr > 0:
        u = [best_gamma0.apply(v) for v in basis]
        rng = range(-budget.shear_range, budget.shear_range + 1)
        for exps in product(rng, repeat=r - 1):
            guided_examined += 1
            config = [u[0]] + [
                tuple(u[k][i] + exps[k - 1] * u[0][i] for i in range(r))
                for k in range(1, r)
            ]
            val = multi_correlation(system, B, config, precision)
            if val <= 0:
                continue
            sres = shear_word(u, exps)
            if not sres.integral:
                nonintegral += 1
                continue
            gamma = UnimodularMap((sres.extension * best_gamma0).entries)
            images = tuple(gamma.apply(v) for v in basis)
            check = multi_correlation(system, B, images, precision)
            if images != tuple(config) or check != val:
                raise AssertionError("assembled map disagrees with the shear configuration")
            guided_hit = GammaHit(
                gamma=gamma,
                value=val,
                images=images,
                exponents=exps,
                anchor_word=best_word,
            )
            break

    return GammaSearchReport(
        direct=direct_hit,
        guided=guided_hit,
        direct_examined=direct_examined,
        guided_examined=guided_examined,
        guided_nonintegral=nonintegral,
    )
