"""Ulam discretisation of the push-forward operator and pressure estimates.

The circle is cut into ``k`` equal cells; entry ``(i, j)`` of the Ulam matrix
is the fraction of cell ``i`` that the map sends into cell ``j``.  Its left
stationary vector approximates the invariant density, which for an expanding
circle map is the equilibrium state of ``psi = -log f'``.
"""
from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from ergolab.circle_map import CircleMap
from ergolab.entropy import entropy_estimate, lyapunov_exponent
from ergolab.errors import BadParams, NoConvergence
from ergolab.measures import GridMeasure, Measure, cell_index

DEFAULT_SAMPLES = 256
POWER_TOL = 1e-12
POWER_MAX_ITER = 100_000
ROW_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class UlamMatrix:
    k: int
    entries: sp.csr_matrix
    samples_per_cell: int
    stationary: np.ndarray | None = field(default=None, repr=False)

    def dense(self) -> np.ndarray:
        return self.entries.toarray()

    def row_sums(self) -> np.ndarray:
        return np.asarray(self.entries.sum(axis=1)).ravel()

    def to_csv(self) -> str:
        coo = self.entries.tocoo()
        order = np.lexsort((coo.col, coo.row))
        buf = io.StringIO()
        buf.write("i,j,p_ij\n")
        for i, j, v in zip(coo.row[order], coo.col[order], coo.data[order]):
            buf.write(f"{i},{j},{float(v)!r}\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, samples_per_cell: int = 0) -> UlamMatrix:
        rows = np.array([ln.split(",") for ln in text.strip().splitlines()[1:]], dtype=float)
        i, j, v = rows[:, 0].astype(int), rows[:, 1].astype(int), rows[:, 2]
        k = int(max(i.max(), j.max())) + 1
        return cls(k, sp.csr_matrix((v, (i, j)), shape=(k, k)), samples_per_cell)


def ulam_matrix(
    fmap: CircleMap, k: int, samples_per_cell: int = DEFAULT_SAMPLES, seed: int = 0
) -> UlamMatrix:
    """Assemble the Ulam matrix by stratified sampling.

    Cell ``i`` is split into ``s`` strata, each sampled once at its midpoint
    plus a jitter confined to the central half of the stratum.  ``s`` is
    ``samples_per_cell`` rounded up to a multiple of the degree, which makes
    the rows of linear maps exact.
    """
    if k < 16:
        raise BadParams("Ulam discretisation needs k >= 16")
    if samples_per_cell < 64:
        raise BadParams("samples_per_cell must be >= 64")
    d = fmap.degree
    s = -(-samples_per_cell // d) * d
    rng = np.random.default_rng(seed)
    u = 0.25 + 0.5 * rng.random((k, s))
    x = (np.arange(k)[:, None] + (np.arange(s)[None, :] + u) / s) / k
    cols = cell_index(fmap.eval(x.ravel()), k)
    rows = np.repeat(np.arange(k), s)
    mat = sp.csr_matrix((np.full(k * s, 1.0 / s), (rows, cols)), shape=(k, k))
    mat.sum_duplicates()
    sums = np.asarray(mat.sum(axis=1)).ravel()
    mat = sp.diags(1.0 / sums) @ mat
    mat = sp.csr_matrix(mat)
    if np.any(mat.data < 0.0) or np.any(np.abs(np.asarray(mat.sum(axis=1)).ravel() - 1.0) > ROW_TOL):
        raise NoConvergence("assembled Ulam matrix is not row-stochastic")
    return UlamMatrix(k, mat, s)


def stationary_measure(matrix: UlamMatrix, tol: float = POWER_TOL, max_iter: int = POWER_MAX_ITER) -> GridMeasure:
    """Left fixed vector of the Ulam matrix by power iteration from uniform.

    Stops when successive iterates differ by less than ``tol`` in L1.  If the
    chain has period two, the two alternating iterates are averaged.  The
    vector is also stored on ``matrix.stationary``.
    """
    pt = matrix.entries.T.tocsr()
    prev = None
    pi = np.full(matrix.k, 1.0 / matrix.k)
    for _ in range(max_iter):
        nxt = pt @ pi
        nxt /= nxt.sum()
        if np.abs(nxt - pi).sum() < tol:
            pi = nxt
            break
        if prev is not None and np.abs(nxt - prev).sum() < tol:
            pi = 0.5 * (pi + nxt)
            break
        prev, pi = pi, nxt
    else:
        raise NoConvergence(f"power iteration did not converge in {max_iter} iterations")
    pi = np.clip(pi, 0.0, None)
    pi /= pi.sum()
    object.__setattr__(matrix, "stationary", pi)
    return GridMeasure(pi)


def stationarity_residual(matrix: UlamMatrix, pi: np.ndarray) -> float:
    return float(np.abs(matrix.entries.T @ pi - pi).sum())


def markov_entropy(matrix: UlamMatrix) -> float:
    """Entropy rate ``-sum_i pi_i sum_j P_ij log P_ij`` of the Ulam chain."""
    if matrix.stationary is None:
        stationary_measure(matrix)
    p = matrix.entries.tocoo()
    plogp = np.where(p.data > 0.0, p.data * np.log(np.where(p.data > 0.0, p.data, 1.0)), 0.0)
    row_h = -np.bincount(p.row, weights=plogp, minlength=matrix.k)
    return float(matrix.stationary @ row_h)


@dataclass(frozen=True)
class PressureEstimate:
    """``pressure = entropy_est - lyapunov`` for the Ulam stationary measure.

    ``entropy_est`` is the partition entropy of the stationary density.
    ``markov_entropy`` is the entropy rate of the Ulam chain itself, reported
    for comparison only: the chain splits every cell image over neighbouring
    cells, which adds an O(1) amount of entropy that does not vanish as
    ``k`` grows.
    """

    markov_entropy: float
    entropy_est: float
    lyapunov: float
    pressure: float
    k: int
    q_used: int

    def to_dict(self) -> dict:
        return {
            "markov_entropy": self.markov_entropy,
            "entropy_est": self.entropy_est,
            "lyapunov": self.lyapunov,
            "pressure": self.pressure,
            "k": self.k,
            "q_used": self.q_used,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def grid_depth(fmap: CircleMap, k: int) -> int:
    """Refinement depth whose cylinders are about one grid cell wide (at least 4)."""
    return max(4, int(math.floor(math.log(k) / math.log(fmap.degree) + 1e-9)))


def pressure_from_ulam(fmap: CircleMap, matrix: UlamMatrix) -> PressureEstimate:
    pi = stationary_measure(matrix) if matrix.stationary is None else GridMeasure(matrix.stationary)
    q = grid_depth(fmap, matrix.k)
    h = entropy_estimate(fmap, pi, q_max=q).entropy_est
    lyap = lyapunov_exponent(fmap, pi)
    return PressureEstimate(markov_entropy(matrix), h, lyap, h - lyap, matrix.k, q)


def pressure_estimate(
    fmap: CircleMap, k: int, samples_per_cell: int = DEFAULT_SAMPLES, seed: int = 0
) -> PressureEstimate:
    """Pressure of ``-log f'`` evaluated at the Ulam stationary measure; should be 0."""
    return pressure_from_ulam(fmap, ulam_matrix(fmap, k, samples_per_cell, seed))


@dataclass(frozen=True)
class KrVerdict:
    member: bool
    margin: float  # h + int psi dmu + r; membership iff >= 0
    r: float

    def __bool__(self) -> bool:
        return self.member


def kr_membership(
    fmap: CircleMap, measure: Measure, r: float, entropy_est: float | None = None
) -> KrVerdict:
    """Test ``h - int log f' dmu >= -r``; ``r = 0`` tests for an equilibrium state.

    Without ``entropy_est`` the partition estimator is used.
    """
    if r < 0.0:
        raise BadParams("r must be >= 0")
    if entropy_est is None:
        entropy_est = entropy_estimate(fmap, measure).entropy_est
    margin = float(entropy_est) - lyapunov_exponent(fmap, measure) + r
    # rounding slack so exact equilibrium states pass at r = 0
    return KrVerdict(margin >= -1e-12, margin, float(r))
