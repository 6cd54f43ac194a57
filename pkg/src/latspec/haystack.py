"""Sets of lattice vectors in general position (every r of them linearly
independent), built greedily from a candidate stream, plus a brute-force
hyperplane-cover oracle for small instances."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Sequence

from .errors import OracleCapError, PreconditionError
from .lattice import Vector, as_vector, det_rows, rank_rows

DEFAULT_ORACLE_CAP = 14


def is_haystack(points: Sequence[Vector]) -> tuple[bool, tuple[Vector, ...] | None]:
    """Exhaustive check that every r-subset has nonzero determinant; returns
    the first violating subset if any."""
    pts = [as_vector(p) for p in points]
    if not pts:
        return True, None
    r = len(pts[0])
    for sub in combinations(pts, r):
        if det_rows(sub) == 0:
            return False, sub
    return True, None


@dataclass(frozen=True)
class Haystack:
    """Certified container: construction re-runs the full independence check."""

    members: tuple[Vector, ...]

    def __post_init__(self):
        ok, bad = is_haystack(self.members)
        if not ok:
            raise ValueError(f"not a haystack: {bad} is linearly dependent")

    def __len__(self) -> int:
        return len(self.members)


@dataclass(frozen=True)
class Insufficient:
    achieved: Haystack
    rejected: int


def _accepts(members: list[Vector], cand: Vector, r: int) -> bool:
    # The candidate must avoid the span of every min(r-1, |H|)-subset; the
    # empty subset spans {0}, which rejects the zero vector.
    k = min(r - 1, len(members))
    if k == 0:
        return any(c != 0 for c in cand)
    for sub in combinations(members, k):
        if rank_rows(list(sub) + [list(cand)]) == k:
            return False
    return True


def greedy_extend(
    candidates: Iterable[Vector],
    target: int,
    trace: list | None = None,
):
    """Grow a haystack by accepting each candidate that stays in general
    position with everything accepted so far; stops at the target size or
    stream end.  Acceptance is deterministic, so the output on a stream
    prefix is a prefix of the output on the full stream."""
    if target < 0:
        raise ValueError("target size must be nonnegative")
    members: list[Vector] = []
    rejected = 0
    for raw in candidates:
        if len(members) >= target:
            break
        cand = as_vector(raw)
        r = len(cand)
        ok = _accepts(members, cand, r)
        if trace is not None:
            trace.append((cand, ok))
        if ok:
            members.append(cand)
        else:
            rejected += 1
    result = Haystack(tuple(members))
    if len(members) < target:
        return Insufficient(achieved=result, rejected=rejected)
    return result


def hyperplane_cover_oracle(
    points: Sequence[Vector], K: int, cap: int = DEFAULT_ORACLE_CAP
) -> bool:
    """Brute force: can K linear hyperplanes (spans of (r-1)-subsets of the
    points, plus the coordinate hyperplanes) cover the whole set?"""
    pts = [as_vector(p) for p in points]
    if len(pts) > cap:
        raise OracleCapError(f"oracle accepts at most {cap} points, got {len(pts)}")
    if K > 4:
        raise PreconditionError(f"oracle accepts K <= 4, got {K}")
    if not pts:
        return True
    if K <= 0:
        return False
    r = len(pts[0])
    full = (1 << len(pts)) - 1

    masks = set()
    for sub in combinations(range(len(pts)), r - 1):
        rows = [list(pts[i]) for i in sub]
        base_rank = rank_rows(rows)
        mask = 0
        for i, p in enumerate(pts):
            if rank_rows(rows + [list(p)]) == base_rank:
                mask |= 1 << i
        masks.add(mask)
    for axis in range(r):
        mask = 0
        for i, p in enumerate(pts):
            if p[axis] == 0:
                mask |= 1 << i
        masks.add(mask)

    ordered = sorted(masks, reverse=True)

    def cover(acc: int, depth: int) -> bool:
        if acc == full:
            return True
        if depth == 0:
            return False
        missing = (~acc) & full
        lowest = missing & (-missing)
        for m in ordered:
            if m & lowest and cover(acc | m, depth - 1):
                return True
        return False

    return cover(0, K)
