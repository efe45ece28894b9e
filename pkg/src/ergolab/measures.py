"""Probability measures on the circle and the series weak* metric.

Measures come in two representations: weighted point masses
(:class:`EmpiricalMeasure`) and piecewise-constant densities on a uniform grid
(:class:`GridMeasure`).  Distances are computed from the vector of integrals
of a fixed test family, so any pair of representations can be compared.
"""
from __future__ import annotations

import io
import json
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from ergolab.circle_map import CircleMap, canonical, orbit
from ergolab.errors import BadParams, NonFinite

MASS_TOL = 1e-12
DEFAULT_TRUNCATION = 32
_CHUNK = 1 << 16


@dataclass(frozen=True, eq=False)
class EmpiricalMeasure:
    """Finite combination of point masses ``sum_j w_j delta_{x_j}``.

    Points are never merged, so an orbit average keeps exact multiplicity.
    ``exact`` marks a measure given exactly (e.g. an atomic invariant
    measure) rather than a Monte-Carlo sample; estimators skip their
    sample-size checks for it.
    """

    points: np.ndarray
    weights: np.ndarray
    exact: bool = False

    def __post_init__(self):
        pts = np.atleast_1d(np.asarray(self.points, dtype=float))
        w = np.atleast_1d(np.asarray(self.weights, dtype=float))
        if pts.ndim != 1 or pts.shape != w.shape or pts.size < 1:
            raise BadParams("points and weights must be equal-length nonempty vectors")
        if np.any(w < 0.0) or abs(w.sum() - 1.0) > MASS_TOL:
            raise BadParams("weights must be nonnegative and sum to 1")
        if np.any(~((pts >= 0.0) & (pts < 1.0))):
            raise BadParams("support points must lie in [0, 1)")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)

    @classmethod
    def uniform(cls, points, exact: bool = False) -> EmpiricalMeasure:
        pts = np.atleast_1d(np.asarray(points, dtype=float))
        return cls(pts, np.full(pts.size, 1.0 / pts.size), exact)

    @classmethod
    def dirac(cls, x: float) -> EmpiricalMeasure:
        return cls(np.array([float(x)]), np.array([1.0]), exact=True)

    @property
    def size(self) -> int:
        return self.points.size


@dataclass(frozen=True, eq=False)
class GridMeasure:
    """Density that is constant on each cell ``[i/k, (i+1)/k)``."""

    mass: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.mass, dtype=float)
        if m.ndim != 1 or m.size < 2:
            raise BadParams("a grid measure needs at least 2 cells")
        if np.any(m < 0.0) or abs(m.sum() - 1.0) > MASS_TOL:
            raise BadParams("cell masses must be nonnegative and sum to 1")
        object.__setattr__(self, "mass", m)

    @classmethod
    def lebesgue(cls, k: int) -> GridMeasure:
        return cls(np.full(k, 1.0 / k))

    @property
    def k(self) -> int:
        return self.mass.size

    @property
    def midpoints(self) -> np.ndarray:
        return (np.arange(self.k) + 0.5) / self.k

    def cdf(self, x) -> np.ndarray:
        """Mass of ``[0, x)`` for ``x`` in [0, 1]."""
        x = np.asarray(x, dtype=float)
        cum = np.concatenate(([0.0], np.cumsum(self.mass)))
        return np.interp(x, np.linspace(0.0, 1.0, self.k + 1), cum)

    def density(self) -> np.ndarray:
        return self.mass * self.k

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("cell_index,mass\n")
        for i, v in enumerate(self.mass):
            buf.write(f"{i},{float(v)!r}\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> GridMeasure:
        rows = [ln.split(",") for ln in text.strip().splitlines()[1:]]
        mass = np.zeros(len(rows))
        for idx, val in rows:
            mass[int(idx)] = float(val)
        return cls(mass)

    def to_json(self) -> str:
        return json.dumps({"k": self.k, "mass": self.mass.tolist()})


Measure = EmpiricalMeasure | GridMeasure


def l1_distance(a: GridMeasure, b: GridMeasure) -> float:
    if a.k != b.k:
        raise BadParams("L1 distance needs grids of equal size")
    return float(np.abs(a.mass - b.mass).sum())


def empirical_measure(fmap: CircleMap, x0, n: int, burn_in: int = 0) -> EmpiricalMeasure:
    """Orbit average ``(1/n) sum_{j<n} delta_{f^j(y)}`` with ``y = f^burn_in(x0)``."""
    return EmpiricalMeasure.uniform(orbit(fmap, x0, n, burn_in))


def to_grid(measure: EmpiricalMeasure, k: int) -> GridMeasure:
    if k < 2:
        raise BadParams("grid needs k >= 2")
    idx = cell_index(measure.points, k)
    mass = np.bincount(idx, weights=measure.weights, minlength=k)
    return GridMeasure(mass / mass.sum())


def cell_index(x, k: int) -> np.ndarray:
    return np.minimum((np.asarray(x) * k).astype(np.int64), k - 1)


def pushforward(fmap: CircleMap, measure: EmpiricalMeasure) -> EmpiricalMeasure:
    return EmpiricalMeasure(fmap.eval(measure.points), measure.weights, measure.exact)


def integrate(measure: Measure, fn) -> float:
    """Integral of a vectorised function; grid measures use cell midpoints (error O(1/k))."""
    if isinstance(measure, GridMeasure):
        x, w = measure.midpoints, measure.mass
    else:
        x, w = measure.points, measure.weights
    vals = np.asarray(fn(x), dtype=float)
    if vals.shape == ():
        vals = np.full(x.shape, float(vals))
    support = w > 0.0
    if not np.all(np.isfinite(vals[support])):
        raise NonFinite("integrand is not finite on the support")
    return float(np.dot(w[support], vals[support]))


class TestFamily:
    """Test functions of the series metric.

    ``phi_0 = -log f'`` is kept unscaled; ``phi_{2m-1}`` and ``phi_{2m}`` are
    ``(1 + cos 2 pi m x)/2`` and ``(1 + sin 2 pi m x)/2`` for
    ``m = 1 .. truncation/2``.  Term ``i`` carries weight ``2^-i``.
    """

    __test__ = False  # not a pytest class

    def __init__(self, fmap: CircleMap, truncation: int = DEFAULT_TRUNCATION):
        if truncation < 2 or truncation % 2:
            raise BadParams("truncation must be an even integer >= 2")
        self.map = fmap
        self.truncation = truncation
        self.weights = 0.5 ** np.arange(truncation + 1)

    def evaluate(self, x) -> np.ndarray:
        """Matrix of shape ``(truncation + 1, len(x))``."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.empty((self.truncation + 1, x.size))
        out[0] = -self.map.log_derivative(x)
        m = np.arange(1, self.truncation // 2 + 1)[:, None]
        ang = 2.0 * np.pi * m * x[None, :]
        out[1::2] = 0.5 * (1.0 + np.cos(ang))
        out[2::2] = 0.5 * (1.0 + np.sin(ang))
        return out

    def moments(self, measure: Measure) -> np.ndarray:
        """Vector of integrals ``int phi_i d measure``, ``i = 0 .. truncation``."""
        if isinstance(measure, GridMeasure):
            return self.grid_moments(measure.mass[None, :])[0]
        acc = np.zeros(self.truncation + 1)
        for s in range(0, measure.size, _CHUNK):
            vals = self.evaluate(measure.points[s : s + _CHUNK])
            acc += vals @ measure.weights[s : s + _CHUNK]
        if not np.all(np.isfinite(acc)):
            raise NonFinite("phi_0 integral diverges")
        return acc

    def grid_moments(self, masses: np.ndarray) -> np.ndarray:
        """Moments of many grid measures sharing ``k`` at once, rows = measures."""
        masses = np.atleast_2d(masses)
        k = masses.shape[1]
        return masses @ self._grid_table(k).T

    def _grid_table(self, k: int) -> np.ndarray:
        cache = self.__dict__.setdefault("_tables", {})
        if k not in cache:
            cache[k] = self.evaluate((np.arange(k) + 0.5) / k)
        return cache[k]

    def distance_from_moments(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return np.abs(np.asarray(a) - np.asarray(b)) @ self.weights

    @cached_property
    def phi0_sup(self) -> float:
        x = np.arange(100_000) / 100_000
        return float(np.max(np.abs(self.map.log_derivative(x))))

    def diameter_bound(self) -> float:
        """Upper bound on the distance between any two probability measures."""
        x = np.arange(100_000) / 100_000
        psi = -self.map.log_derivative(x)
        return float(psi.max() - psi.min()) + float(self.weights[1:].sum())


def weak_star_distance(a: Measure, b: Measure, family: TestFamily) -> float:
    """``sum_i 2^-i |int phi_i da - int phi_i db|`` truncated at ``family.truncation``."""
    if family.truncation < 16:
        raise BadParams("truncation must be at least 16")
    return float(family.distance_from_moments(family.moments(a), family.moments(b)))
