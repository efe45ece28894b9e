"""Partitions of the circle, their dynamical refinements, and entropy estimates.

A partition is a finite set of breakpoints; its atoms are the arcs between
consecutive breakpoints, closed on the left.  The depth-``q`` refinement
``P v f^-1 P v ... v f^-(q-1) P`` is cut at every preimage of a breakpoint
up to order ``q - 1``; each resulting arc is labelled by its itinerary
through the base atoms, and arcs sharing an itinerary form one cylinder.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from ergolab.circle_map import CircleMap, canonical
from ergolab.errors import BadParams, UnderSampled
from ergolab.measures import EmpiricalMeasure, GridMeasure, Measure, integrate

MERGE_TOL = 1e-12
SAMPLES_PER_CYLINDER = 100
PESIN_TOL = 0.05


@dataclass(frozen=True, eq=False)
class Partition:
    breakpoints: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.breakpoints, dtype=float)
        if b.ndim != 1 or b.size < 2:
            raise BadParams("a partition needs at least 2 breakpoints")
        if np.any(~((b >= 0.0) & (b < 1.0))) or np.any(np.diff(b) <= 0.0):
            raise BadParams("breakpoints must be strictly increasing in [0, 1)")
        object.__setattr__(self, "breakpoints", b)

    @property
    def size(self) -> int:
        return self.breakpoints.size

    @property
    def lengths(self) -> np.ndarray:
        return _arc_lengths(self.breakpoints)

    @property
    def diameter(self) -> float:
        return float(self.lengths.max())

    def atom_of(self, x) -> np.ndarray:
        """Atom index of each point; a point on a breakpoint belongs to the atom on its right."""
        return _arc_of(self.breakpoints, x)

    def masses(self, measure: Measure) -> np.ndarray:
        return _arc_masses(self.breakpoints, measure)


@dataclass(frozen=True, eq=False)
class RefinedPartition:
    base: Partition
    depth: int
    cuts: np.ndarray
    arc_words: np.ndarray  # itinerary of every arc, shape (len(cuts), depth)
    words: np.ndarray = field(init=False)
    arc_cylinder: np.ndarray = field(init=False)

    def __post_init__(self):
        words, inv = np.unique(self.arc_words, axis=0, return_inverse=True)
        object.__setattr__(self, "words", words)
        object.__setattr__(self, "arc_cylinder", inv.ravel())

    @property
    def size(self) -> int:
        """Number of cylinders."""
        return self.words.shape[0]

    @property
    def arc_lengths(self) -> np.ndarray:
        return _arc_lengths(self.cuts)

    def masses(self, measure: Measure, depth: int | None = None) -> np.ndarray:
        """Cylinder masses at ``depth`` (default: full depth), indexed by sorted word."""
        arc_mass = _arc_masses(self.cuts, measure)
        return _group_by_prefix(self.arc_words, arc_mass, depth or self.depth)


def _arc_lengths(cuts: np.ndarray) -> np.ndarray:
    return np.diff(np.append(cuts, cuts[0] + 1.0))


def _arc_of(cuts: np.ndarray, x) -> np.ndarray:
    idx = np.searchsorted(cuts, np.asarray(x, dtype=float), side="right") - 1
    return np.where(idx < 0, cuts.size - 1, idx)


def _arc_masses(cuts: np.ndarray, measure: Measure) -> np.ndarray:
    if isinstance(measure, GridMeasure):
        edges = measure.cdf(cuts)
        mass = np.diff(np.append(edges, 1.0 + edges[0]))
        return np.clip(mass, 0.0, None)
    idx = _arc_of(cuts, measure.points)
    return np.bincount(idx, weights=measure.weights, minlength=cuts.size)


def _group_by_prefix(arc_words: np.ndarray, arc_mass: np.ndarray, depth: int) -> np.ndarray:
    _, inv = np.unique(arc_words[:, :depth], axis=0, return_inverse=True)
    return np.bincount(inv.ravel(), weights=arc_mass)


def make_partition(k: int, offset: float = 0.0) -> Partition:
    """Uniform partition into ``k`` arcs of length ``1/k`` starting at ``offset``."""
    if k < 2:
        raise BadParams("k must be >= 2")
    if not (0.0 <= offset < 1.0 / k):
        raise BadParams("offset must lie in [0, 1/k)")
    return Partition(offset + np.arange(k) / k)


def branch_partition(fmap: CircleMap, anchor: float = 0.0) -> Partition:
    """Partition cut at the ``d`` preimages of ``anchor``.

    Each atom is mapped injectively onto the circle, so this is a Markov
    generator; its refinements are exactly the injectivity domains of ``f^q``.
    For linear maps it is the uniform partition with ``k = d``.
    """
    return Partition(fmap.inverse_branches(anchor).points)


def max_expansive_diameter(fmap: CircleMap) -> float:
    """Conservative stand-in for the expansivity constant of ``fmap``."""
    m = fmap.min_derivative
    return min(1.0 / 8.0, (m - 1.0) / (2.0 * m))


def _merge_circular(points: np.ndarray) -> np.ndarray:
    pts = np.sort(canonical(np.asarray(points, dtype=float)))
    keep = np.concatenate(([True], np.diff(pts) > MERGE_TOL))
    pts = pts[keep]
    if pts.size > 1 and pts[-1] > 1.0 - MERGE_TOL and pts[0] < MERGE_TOL:
        pts = pts[:-1]
    return pts


def refine(fmap: CircleMap, p: Partition, q: int) -> RefinedPartition:
    """Depth-``q`` refinement of ``p`` under ``fmap``."""
    if q < 1:
        raise BadParams("refinement depth must be >= 1")
    level = p.breakpoints
    cuts = [level]
    for _ in range(q - 1):
        level = fmap.preimages(level).ravel()
        cuts.append(level)
    merged = _merge_circular(np.concatenate(cuts))
    lengths = _arc_lengths(merged)
    x = canonical(merged + 0.5 * lengths)
    words = np.empty((merged.size, q), dtype=np.int32)
    for j in range(q):
        words[:, j] = p.atom_of(x)
        if j < q - 1:
            x = fmap.eval(x)
    return RefinedPartition(p, q, merged, words)


def shannon_entropy(masses) -> float:
    """``-sum m log m`` with ``0 log 0 = 0``."""
    m = np.asarray(masses, dtype=float)
    m = m[m > 0.0]
    return float(0.0 - np.sum(m * np.log(m)))


def partition_entropy(p: Partition | RefinedPartition, measure: Measure) -> float:
    return shannon_entropy(p.masses(measure))


@dataclass(frozen=True)
class EntropyEstimate:
    entropy_est: float
    q_used: int
    n_cylinders: int
    diagnostics: list[float]  # H(P^q)/q for q = 1 .. q_used
    block_entropies: list[float]  # H(P^q)


def _support_size(measure: Measure) -> int | None:
    if isinstance(measure, EmpiricalMeasure) and not measure.exact:
        return measure.size
    return None


def auto_depth(fmap: CircleMap, base: Partition, n: int, cap: int = 12) -> int:
    """Deepest ``q <= cap`` whose worst-case cylinder count keeps ``SAMPLES_PER_CYLINDER`` points per cylinder."""
    q = 1
    while q < cap and SAMPLES_PER_CYLINDER * base.size * fmap.degree**q <= n:
        q += 1
    return q


def entropy_estimate(
    fmap: CircleMap,
    measure: Measure,
    base: Partition | None = None,
    q_max: int | None = None,
) -> EntropyEstimate:
    """Estimate the metric entropy as ``H(P^q_max) / q_max``.

    The per-depth sequence ``H(P^q)/q`` is kept in ``diagnostics``.  ``base``
    defaults to :func:`branch_partition`.  For empirical measures ``q_max``
    defaults to the deepest level with at least 100 points per cylinder, and
    :class:`UnderSampled` is raised when the support is smaller than that.
    """
    base = branch_partition(fmap) if base is None else base
    n = _support_size(measure)
    if q_max is None:
        q_max = 10 if n is None else max(auto_depth(fmap, base, n), 4)
    if q_max < 1:
        raise BadParams("q_max must be >= 1")
    rp = refine(fmap, base, q_max)
    if n is not None and n < SAMPLES_PER_CYLINDER * rp.size:
        raise UnderSampled(
            f"{n} points for {rp.size} cylinders at depth {q_max}; "
            f"need at least {SAMPLES_PER_CYLINDER * rp.size}"
        )
    arc_mass = _arc_masses(rp.cuts, measure)
    blocks = [shannon_entropy(_group_by_prefix(rp.arc_words, arc_mass, q)) for q in range(1, q_max + 1)]
    diag = [h / q for q, h in enumerate(blocks, start=1)]
    return EntropyEstimate(diag[-1], q_max, rp.size, diag, blocks)


@dataclass(frozen=True)
class PesinReport:
    lyapunov: float
    entropy_est: float
    residual: float
    q_used: int
    diagnostics: list[float] = field(default_factory=list)
    tolerance: float = PESIN_TOL
    map: dict = field(default_factory=dict)
    measure_provenance: dict = field(default_factory=dict)

    @property
    def pesin_holds(self) -> bool:
        return abs(self.residual) < self.tolerance

    def to_dict(self) -> dict:
        return {
            "lyapunov": self.lyapunov,
            "entropy_est": self.entropy_est,
            "residual": self.residual,
            "q_used": self.q_used,
            "diagnostics": list(self.diagnostics),
            "pesin_holds": self.pesin_holds,
            "tolerance": self.tolerance,
            "map": self.map,
            "measure_provenance": self.measure_provenance,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def lyapunov_exponent(fmap: CircleMap, measure: Measure) -> float:
    """``int log|f'| d measure``."""
    return integrate(measure, fmap.log_derivative)


def pesin_residual(
    fmap: CircleMap,
    measure: Measure,
    entropy: EntropyEstimate | float,
    tolerance: float = PESIN_TOL,
    provenance: dict | None = None,
) -> PesinReport:
    """Residual ``int log|f'| d mu - h_mu``; Ruelle's inequality says it is >= 0."""
    lyap = lyapunov_exponent(fmap, measure)
    if isinstance(entropy, EntropyEstimate):
        h, q, diag = entropy.entropy_est, entropy.q_used, entropy.diagnostics
    else:
        h, q, diag = float(entropy), 0, []
    return PesinReport(
        lyapunov=lyap,
        entropy_est=h,
        residual=lyap - h,
        q_used=q,
        diagnostics=list(diag),
        tolerance=tolerance,
        map=fmap.spec(),
        measure_provenance=dict(provenance or {}),
    )


def pesin_report(
    fmap: CircleMap,
    measure: Measure,
    base: Partition | None = None,
    q_max: int | None = None,
    provenance: dict | None = None,
) -> PesinReport:
    est = entropy_estimate(fmap, measure, base, q_max)
    return pesin_residual(fmap, measure, est, provenance=provenance)
