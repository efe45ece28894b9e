"""Statistical experiments on Lebesgue-random initial points.

Every experiment follows many orbits, records their empirical measures
``sigma_n(x)`` projected to a grid, and compares them in the series weak*
metric.  Finite ``n`` stands in for the limit ``n -> infinity``; the spread of
``sigma_n(x)`` across geometrically spaced checkpoints is kept as a
convergence diagnostic.
"""
from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.cluster.hierarchy import fcluster, linkage

from ergolab.circle_map import CircleMap, GenericPoint, lebesgue_points, orbit, orbits
from ergolab.entropy import PesinReport, pesin_report
from ergolab.errors import BadParams
from ergolab.measures import EmpiricalMeasure, GridMeasure, TestFamily, cell_index

EPSILON_CLUSTER = 0.05
DEFAULT_GRID = 1024
ATOMIC_CELLS = 3
ATOMIC_MASS = 0.9
_ORBIT_BUDGET = 1 << 23  # doubles held in memory per orbit group


def geometric_checkpoints(n_max: int, count: int) -> list[int]:
    """``n_max / 2^j`` for ``j = count-1, ..., 0``, ascending and deduplicated."""
    pts = sorted({max(1, n_max >> j) for j in range(count)})
    return pts


def checkpoint_histograms(
    fmap: CircleMap,
    starts,
    checkpoints,
    grid_k: int,
    burn_in: int = 0,
    threads: int = 1,
) -> np.ndarray:
    """Cell counts of ``sigma_n(x)`` for every start and checkpoint.

    Returns an integer array of shape ``(len(starts), len(checkpoints), grid_k)``;
    row ``[p, c]`` holds the counts of the first ``checkpoints[c]`` orbit points.
    """
    starts = list(starts)
    checkpoints = sorted(int(c) for c in checkpoints)
    n = checkpoints[-1]
    group = max(1, min(len(starts), _ORBIT_BUDGET // n))
    out = np.zeros((len(starts), len(checkpoints), grid_k), dtype=np.int64)

    def work(lo: int) -> None:
        block = starts[lo : lo + group]
        xs = orbits(fmap, block, n, burn_in)
        idx = cell_index(xs, grid_k) + grid_k * np.arange(len(block))[None, :]
        acc = np.zeros(len(block) * grid_k, dtype=np.int64)
        prev = 0
        for c, stop in enumerate(checkpoints):
            acc += np.bincount(idx[prev:stop].ravel(), minlength=acc.size)
            out[lo : lo + len(block), c] = acc.reshape(len(block), grid_k)
            prev = stop

    lows = range(0, len(starts), group)
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            list(pool.map(work, lows))
    else:
        for lo in lows:
            work(lo)
    return out


def _grids(counts: np.ndarray) -> np.ndarray:
    return counts / counts.sum(axis=-1, keepdims=True)


def single_linkage(moments: np.ndarray, family: TestFamily, epsilon: float) -> np.ndarray:
    """Cluster labels ``0, 1, ...`` in order of first appearance."""
    if len(moments) == 1:
        return np.zeros(1, dtype=int)
    z = linkage(moments * family.weights[None, :], method="single", metric="cityblock")
    raw = fcluster(z, t=epsilon, criterion="distance")
    _, first, inv = np.unique(raw, return_index=True, return_inverse=True)
    rank = np.argsort(np.argsort(first))
    return rank[inv]


def is_atomic_profile(grid: GridMeasure, cells: int = ATOMIC_CELLS, mass: float = ATOMIC_MASS) -> bool:
    """True when more than ``mass`` sits in at most ``cells`` grid cells."""
    return float(np.sort(grid.mass)[::-1][:cells].sum()) > mass


def _dispersion(moments: np.ndarray, family: TestFamily) -> float:
    """Largest pairwise distance among the rows of ``moments``."""
    if len(moments) < 2:
        return 0.0
    w = moments * family.weights[None, :]
    return float(np.abs(w[:, None, :] - w[None, :, :]).sum(axis=-1).max())


@dataclass
class PLimitEstimate:
    x0: float
    checkpoints: list[int]
    snapshots: list[GridMeasure]
    clusters: list[tuple[GridMeasure, list[int]]]
    dispersion: float
    epsilon_cluster: float


def p_limit_set(
    fmap: CircleMap,
    x0,
    n_max: int,
    checkpoint_count: int = 8,
    grid_k: int = DEFAULT_GRID,
    epsilon_cluster: float = EPSILON_CLUSTER,
    family: TestFamily | None = None,
) -> PLimitEstimate:
    """Finite-time picture of the accumulation points of ``sigma_n(x0)``."""
    if n_max < 10_000:
        raise BadParams("n_max must be >= 10^4")
    family = family or TestFamily(fmap)
    cps = geometric_checkpoints(n_max, checkpoint_count)
    grids = _grids(checkpoint_histograms(fmap, [x0], cps, grid_k)[0])
    mom = family.grid_moments(grids)
    labels = single_linkage(mom, family, epsilon_cluster)
    clusters = []
    for lab in range(labels.max() + 1):
        members = np.flatnonzero(labels == lab)
        clusters.append((GridMeasure(grids[members].mean(axis=0)), members.tolist()))
    late = mom[len(cps) // 2 :]
    head = x0.value if isinstance(x0, GenericPoint) else float(x0)
    return PLimitEstimate(head, cps, [GridMeasure(g) for g in grids], clusters,
                          _dispersion(late, family), epsilon_cluster)


@dataclass
class Candidate:
    measure: GridMeasure
    basin_weight: float
    pesin: PesinReport
    members: int
    atomic: bool

    @property
    def srb_like(self) -> bool:
        # an atomic profile is never accepted, whatever its estimated residual
        return self.pesin.pesin_holds and not self.atomic

    def to_dict(self) -> dict:
        return {
            "basin_weight": self.basin_weight,
            "members": self.members,
            "atomic_profile": self.atomic,
            "srb_like": self.srb_like,
            "pesin": self.pesin.to_dict(),
            "grid_k": self.measure.k,
            "mass": self.measure.mass.tolist(),
        }


@dataclass
class SrbLikeReport:
    candidates: list[Candidate]
    sample_count: int
    n: int
    epsilon_cluster: float
    non_convergent: int
    map: dict = field(default_factory=dict)
    seed: int = 0

    def to_dict(self) -> dict:
        return {
            "map": self.map,
            "seed": self.seed,
            "sample_count": self.sample_count,
            "n": self.n,
            "epsilon_cluster": self.epsilon_cluster,
            "non_convergent": self.non_convergent,
            "candidates": [c.to_dict() for c in self.candidates],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def srb_like_candidates(
    fmap: CircleMap,
    sample_count: int = 200,
    n: int = 100_000,
    grid_k: int = DEFAULT_GRID,
    epsilon_cluster: float = EPSILON_CLUSTER,
    seed: int = 0,
    checkpoint_count: int = 4,
    starts=None,
    family: TestFamily | None = None,
    threads: int = 1,
) -> SrbLikeReport:
    """Cluster the terminal empirical measures of a Lebesgue sample.

    Points whose ``sigma_n`` still moves by more than ``epsilon_cluster``
    over the late checkpoints are counted as non-convergent and left out.
    Each cluster becomes a candidate: its representative is the mean of the
    member grids, its basin weight the member fraction of the whole sample,
    and its Pesin report comes from the orbit of the member nearest to the
    representative.  ``starts`` overrides the random sample.
    """
    if starts is None:
        if sample_count < 100:
            raise BadParams("sample_count must be >= 100")
        starts = lebesgue_points(sample_count, seed)
    starts = list(starts)
    family = family or TestFamily(fmap)
    cps = geometric_checkpoints(n, checkpoint_count)
    grids = _grids(checkpoint_histograms(fmap, starts, cps, grid_k, threads=threads))
    mom = family.grid_moments(grids.reshape(-1, grid_k)).reshape(len(starts), len(cps), -1)
    late = len(cps) // 2
    disp = np.array([_dispersion(m[late:], family) for m in mom])
    ok = np.flatnonzero(disp <= epsilon_cluster)
    candidates = []
    if ok.size:
        labels = single_linkage(mom[ok, -1], family, epsilon_cluster)
        for lab in range(labels.max() + 1):
            members = ok[labels == lab]
            rep = GridMeasure(grids[members, -1].mean(axis=0))
            rep_mom = family.moments(rep)
            near = members[np.argmin(family.distance_from_moments(mom[members, -1], rep_mom))]
            x0 = starts[near]
            prov = {"x0": x0.value if isinstance(x0, GenericPoint) else float(x0), "n": n,
                    "tail_seed": getattr(x0, "tail_seed", None)}
            emp = EmpiricalMeasure.uniform(orbit(fmap, x0, n))
            report = pesin_report(fmap, emp, provenance=prov)
            candidates.append(Candidate(rep, members.size / len(starts), report,
                                        int(members.size), is_atomic_profile(rep)))
    return SrbLikeReport(candidates, len(starts), n, epsilon_cluster,
                         int(len(starts) - ok.size), fmap.spec(), seed)


def terminal_distances(
    fmap: CircleMap,
    reference: GridMeasure,
    n_list,
    sample_count: int,
    seed: int,
    grid_k: int = DEFAULT_GRID,
    family: TestFamily | None = None,
    threads: int = 1,
) -> tuple[list[int], np.ndarray]:
    """Distances ``dist(sigma_n(x), reference)``, shape ``(sample_count, len(n_list))``."""
    family = family or TestFamily(fmap)
    cps = sorted({int(v) for v in n_list})
    starts = lebesgue_points(sample_count, seed)
    grids = _grids(checkpoint_histograms(fmap, starts, cps, grid_k, threads=threads))
    mom = family.grid_moments(grids.reshape(-1, grid_k)).reshape(len(starts), len(cps), -1)
    return cps, family.distance_from_moments(mom, family.moments(reference))


def basin_fraction(
    fmap: CircleMap,
    mu: GridMeasure,
    epsilon: float,
    sample_count: int = 200,
    n: int = 100_000,
    seed: int = 0,
    grid_k: int = DEFAULT_GRID,
    family: TestFamily | None = None,
) -> float:
    """Fraction of sampled ``x`` with ``dist(sigma_n(x), mu) < epsilon``."""
    if epsilon <= 0.0:
        raise BadParams("epsilon must be positive")
    _, dist = terminal_distances(fmap, mu, [n], sample_count, seed, grid_k, family)
    return float(np.mean(dist[:, 0] < epsilon))


@dataclass(frozen=True)
class DecayPoint:
    n: int
    fraction: float
    analytic_bound: float
    sigma: float  # binomial standard error of fraction


def deviation_decay(
    fmap: CircleMap,
    reference: GridMeasure,
    r: float,
    epsilon: float,
    n_list,
    sample_count: int = 500,
    seed: int = 0,
    grid_k: int = DEFAULT_GRID,
    family: TestFamily | None = None,
    threads: int = 1,
) -> list[DecayPoint]:
    """Fraction of sampled ``x`` with ``dist(sigma_n(x), reference) >= epsilon`` for each ``n``.

    ``reference`` stands in for the set of measures whose free energy is
    within ``r`` of the pressure; the distance to one member bounds the
    distance to the set from above, so the fractions over-estimate the
    deviation probability.  Each fraction is paired with ``exp(n (eps - r))``.
    """
    if not (0.0 < epsilon < r / 2.0):
        raise BadParams("need 0 < epsilon < r/2")
    n_list = list(n_list)
    if not n_list:
        raise BadParams("n_list must not be empty")
    if any(int(v) < 1 for v in n_list):
        raise BadParams("every n must be >= 1")
    cps, dist = terminal_distances(fmap, reference, n_list, sample_count, seed, grid_k, family, threads)
    out = []
    for c, n in enumerate(cps):
        frac = float(np.mean(dist[:, c] >= epsilon))
        sigma = math.sqrt(frac * (1.0 - frac) / sample_count)
        out.append(DecayPoint(n, frac, math.exp(n * (epsilon - r)), sigma))
    return out


def decay_is_nonincreasing(curve: list[DecayPoint], band: float = 2.0) -> bool:
    """Nonincreasing up to ``band`` binomial standard errors of either neighbour."""
    for a, b in zip(curve, curve[1:]):
        slack = band * max(a.sigma, b.sigma)
        if b.fraction > a.fraction + slack:
            return False
    return True
