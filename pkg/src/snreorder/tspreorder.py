"""Within-supernode column reordering via traveling-salesman heuristics.

Each column of the target supernode becomes a city whose coordinate is the
set of updaters touching it; an extra dummy city has the empty set. The
distance between two cities is the (optionally width-weighted) size of the
symmetric difference of their updater sets. Cutting any cyclic tour at the
dummy yields a column order whose tour length equals exactly twice the
weighted sum of per-updater block counts, so minimizing tour length
minimizes the block objective.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .matrixio import Permutation
from .prreorder import updater_schedule
from .symbolic import SupernodalETree, SupernodePartition
from .workspace import AllocationMeter

__all__ = [
    "TspInstance",
    "Tour",
    "build_instance",
    "insertion_solve",
    "exact_solve",
    "tour_length",
    "tsp_reorder",
]

RULES = ("arbitrary", "nearest", "farthest")
DENSE_CACHE_LIMIT = 1024
EXACT_LIMIT = 10
_FAR = np.int64(1) << 62


@dataclass
class TspInstance:
    """Cities 0..m-1 (one per supernode column, in column order) plus dummy m."""

    target: int
    rows: np.ndarray              # global column labels of the target supernode
    dsets: list[np.ndarray]       # sorted updater ordinals per city
    weights: np.ndarray           # weight per updater ordinal
    updaters: np.ndarray          # supernode index per updater ordinal

    @property
    def m(self) -> int:
        return len(self.dsets)

    @property
    def dummy(self) -> int:
        return self.m

    def compressed(self) -> tuple["TspInstance", list[np.ndarray]]:
        """Collapse cities with identical updater sets into one; such cities
        are at distance zero and never profitably separated."""
        groups: dict[tuple, list[int]] = {}
        for r, ds in enumerate(self.dsets):
            groups.setdefault(tuple(ds), []).append(r)
        members = [np.asarray(g, dtype=np.int64) for g in groups.values()]
        inst = TspInstance(
            self.target,
            np.asarray([self.rows[g[0]] for g in members], dtype=np.int64),
            [self.dsets[g[0]] for g in members],
            self.weights,
            self.updaters,
        )
        return inst, members


@dataclass
class Tour:
    """Cyclic city order, dummy city first; length under the instance metric."""

    cities: np.ndarray
    length: int

    def cut_at_dummy(self) -> np.ndarray:
        """Linear city order obtained by removing the leading dummy."""
        return self.cities[1:]


class _Distances:
    """Distance queries backed by a weighted indicator matrix.

    All values are integers; float64 arithmetic is exact here because every
    weight, product, and partial sum stays far below 2**53.
    """

    def __init__(self, inst: TspInstance, meter=None, cache_limit=DENSE_CACHE_LIMIT):
        m, u = inst.m, len(inst.weights)
        self.x = np.zeros((m, u), dtype=np.float64)
        for r, ds in enumerate(inst.dsets):
            self.x[r, ds] = 1.0
        self.w = inst.weights.astype(np.float64)
        self.xw = self.x * self.w
        self.degw = np.rint(self.x @ self.w).astype(np.int64)
        self.cache = None
        if meter is not None:
            meter.track(self.x)
            meter.track(self.xw)
            meter.track(self.degw)
        if m <= cache_limit:
            cross = self.xw @ self.x.T
            self.cache = np.rint(
                self.degw[:, None] + self.degw[None, :] - 2.0 * cross
            ).astype(np.int64)
            if meter is not None:
                meter.track(self.cache)

    def row(self, c: int) -> np.ndarray:
        """Distances from city c to every city (length m)."""
        if self.cache is not None:
            return self.cache[c]
        cross = self.x @ self.xw[c]
        return np.rint(self.degw + self.degw[c] - 2.0 * cross).astype(np.int64)

    def row_ext(self, c: int) -> np.ndarray:
        """Distances from city c to every city and the dummy (length m+1)."""
        return np.append(self.row(c), self.degw[c])


def build_instance(
    t: int,
    part: SupernodePartition,
    tree: SupernodalETree,
    hadj: list[np.ndarray],
    weighted: bool = False,
    meter: AllocationMeter | None = None,
) -> TspInstance:
    """City model for supernode t: per-column updater sets and weights."""
    lo = int(part.first[t])
    width = part.width(t)
    schedule = sorted(updater_schedule(t, part, tree, hadj, "natural"))
    updaters = np.asarray([s for s, _ in schedule], dtype=np.int64)
    if weighted:
        weights = np.asarray([part.width(s) for s in updaters], dtype=np.int64)
    else:
        weights = np.ones(len(updaters), dtype=np.int64)
    hit: list[list[int]] = [[] for _ in range(width)]
    for ordinal, (_, rows) in enumerate(schedule):
        for r in rows:
            hit[r - lo].append(ordinal)
    dsets = [np.asarray(h, dtype=np.int64) for h in hit]
    if meter is not None:
        for d in dsets:
            meter.alloc(max(d.size, 1))
    return TspInstance(t, np.arange(lo, lo + width, dtype=np.int64), dsets, weights, updaters)


def tour_length(inst: TspInstance, cities: np.ndarray) -> int:
    """Length of the cyclic tour visiting `cities` (dummy id inst.m allowed)."""
    dist = _Distances(inst)
    ext = np.empty((inst.m + 1, inst.m + 1), dtype=np.int64)
    for c in range(inst.m):
        ext[c, :inst.m] = dist.row(c)
        ext[c, inst.m] = dist.degw[c]
    ext[inst.m, :inst.m] = dist.degw
    ext[inst.m, inst.m] = 0
    nxt = np.roll(cities, -1)
    return int(ext[cities, nxt].sum())


def insertion_solve(
    inst: TspInstance,
    rule: str = "farthest",
    seed=0,
    meter: AllocationMeter | None = None,
    cache_limit: int = DENSE_CACHE_LIMIT,
) -> Tour:
    """Construct a tour by repeated cheapest-position insertion.

    The rule picks which city enters next: arbitrary draws pseudorandomly
    from the seed, nearest/farthest take the city whose distance to the
    current circuit (min over members) is smallest/largest. Position ties
    resolve to the earliest slot, selection ties to the smallest city index.
    """
    if rule not in RULES:
        raise ValueError(f"unknown insertion rule '{rule}'")
    m = inst.m
    if m < 1:
        raise ValueError("instance has no cities")
    dist = _Distances(inst, meter=meter, cache_limit=cache_limit)
    rng = np.random.default_rng(seed)
    degw = dist.degw

    if rule == "arbitrary":
        first = int(rng.integers(m))
    elif rule == "nearest":
        first = int(np.argmin(degw))
    else:
        first = int(np.argmax(degw))

    tour = [inst.dummy, first]
    edge = [int(degw[first]), int(degw[first])]
    visited = np.zeros(m, dtype=bool)
    visited[first] = True
    to_circuit = np.minimum(degw, dist.row(first))
    if meter is not None:
        meter.alloc(4 * m)

    for _ in range(m - 1):
        if rule == "arbitrary":
            open_cities = np.flatnonzero(~visited)
            c = int(open_cities[rng.integers(open_cities.size)])
        elif rule == "nearest":
            c = int(np.argmin(np.where(visited, _FAR, to_circuit)))
        else:
            c = int(np.argmax(np.where(visited, np.int64(-1), to_circuit)))
        ext = dist.row_ext(c)
        cur = np.asarray(tour, dtype=np.int64)
        delta = ext[cur] + ext[np.roll(cur, -1)] - np.asarray(edge, dtype=np.int64)
        k = int(np.argmin(delta))
        after = tour[(k + 1) % len(tour)]
        tour.insert(k + 1, c)
        edge[k] = int(ext[tour[k]])
        edge.insert(k + 1, int(ext[after]))
        visited[c] = True
        to_circuit = np.minimum(to_circuit, ext[:m])

    if meter is not None:
        meter.release(4 * m)
    return Tour(np.asarray(tour, dtype=np.int64), int(sum(edge)))


def exact_solve(inst: TspInstance, chunk: int = 200_000) -> Tour:
    """Globally minimal tour by exhaustive search with the dummy fixed.

    Ties resolve to the lexicographically first optimal city order. Refuses
    instances with more than 10 cities.
    """
    m = inst.m
    if m > EXACT_LIMIT:
        raise ValueError(f"instance too large for exhaustive search ({m} > {EXACT_LIMIT})")
    dist = _Distances(inst)
    ext = np.empty((m + 1, m + 1), dtype=np.int64)
    for c in range(m):
        ext[c, :m] = dist.row(c)
        ext[c, m] = dist.degw[c]
    ext[m, :m] = dist.degw
    ext[m, m] = 0

    best_len = None
    best = None
    perms = itertools.permutations(range(m))
    while True:
        block = np.asarray(list(itertools.islice(perms, chunk)), dtype=np.int64)
        if block.size == 0:
            break
        lengths = ext[m, block[:, 0]] + ext[block[:, -1], m]
        for i in range(m - 1):
            lengths = lengths + ext[block[:, i], block[:, i + 1]]
        k = int(np.argmin(lengths))
        if best_len is None or lengths[k] < best_len:
            best_len = int(lengths[k])
            best = block[k]
    return Tour(np.concatenate(([m], best)), best_len)


def tsp_reorder(
    part: SupernodePartition,
    tree: SupernodalETree,
    hadj: list[np.ndarray],
    rule: str = "farthest",
    weighted: bool = False,
    seed: int = 0,
    meter: AllocationMeter | None = None,
    cache_limit: int = DENSE_CACHE_LIMIT,
) -> Permutation:
    """Global permutation: per supernode, solve the tour and cut at the dummy.

    Cities with identical updater sets are collapsed before solving and
    expanded afterwards in their original relative order. Deterministic for a
    fixed (rule, weighted, seed).
    """
    if rule not in RULES:
        raise ValueError(f"unknown insertion rule '{rule}'")
    forward = np.arange(part.n, dtype=np.int64)
    for t in range(part.count):
        lo = int(part.first[t])
        width = part.width(t)
        if width == 1:
            continue
        scope = meter.scoped() if meter is not None else _null_scope()
        with scope:
            inst = build_instance(t, part, tree, hadj, weighted, meter)
            if len(inst.weights) == 0:
                continue
            small, members = inst.compressed()
            if small.m == 1:
                continue
            sub_seed = np.random.SeedSequence(entropy=seed, spawn_key=(t,))
            tour = insertion_solve(small, rule, sub_seed, meter, cache_limit)
            local = np.concatenate([members[c] for c in tour.cut_at_dummy()])
            forward[lo + local] = lo + np.arange(width, dtype=np.int64)
    return Permutation.from_forward(forward)


class _null_scope:
    def __enter__(self):
        return self

    def __exit__(self, *exc):
        return False
