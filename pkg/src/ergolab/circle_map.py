"""Expanding maps of the circle R/Z, represented on the fundamental domain [0, 1).

Three families are provided:

``linear``
    ``x -> d x mod 1``.
``smooth_perturbed``
    ``x -> d x + (c / 2 pi) sin(2 pi x) mod 1`` with derivative ``d + c cos(2 pi x)``.
``nonhoelder``
    A C^1 map whose derivative is ``d + c (eta(x) - mean(eta))`` with
    ``eta(x) = 1 / log(e + 1/rho(x))`` and ``rho`` the circle distance to 0.
    The derivative is continuous but has no Hoelder modulus at 0.  The map
    itself is tabulated by cumulative trapezoidal quadrature.

Every map has a lift ``F: [0, 1] -> [0, d]`` with ``F(0) = 0`` and
``F(1) = d``; ``eval`` is the lift reduced mod 1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numba
import numpy as np
from scipy.signal import lfilter

from ergolab.errors import BadParams, ConvergenceError, DomainError, NotExpanding

FAMILIES = ("linear", "smooth_perturbed", "nonhoelder")

EXPANSION_MARGIN = 1e-6
VALIDATION_GRID = 100_000
QUADRATURE_NODES = 2**16
BISECTION_STEPS = 60
PREIMAGE_TOL = 1e-12

TWO_PI = 2.0 * math.pi


def canonical(x):
    """Reduce ``x`` mod 1 into [0, 1), mapping the ``1 - ulp`` round-up to 0."""
    r = np.mod(x, 1.0)
    if np.ndim(r) == 0:
        r = float(r)
        return 0.0 if r >= 1.0 else r
    r[r >= 1.0] = 0.0
    return r


def circle_distance(x, y):
    """Distance on R/Z between ``x`` and ``y`` (vectorised)."""
    t = np.abs(np.mod(np.asarray(x, dtype=float) - np.asarray(y, dtype=float), 1.0))
    return np.minimum(t, 1.0 - t)


def _eta(x):
    rho = circle_distance(x, 0.0)
    with np.errstate(divide="ignore"):
        return 1.0 / np.log(math.e + 1.0 / rho)


@dataclass(frozen=True)
class BranchPreimages:
    target: float
    points: np.ndarray
    residuals: np.ndarray


@dataclass(frozen=True, eq=False)
class CircleMap:
    """An expanding degree-``d`` circle map.

    Build instances with :func:`make_map`; the constructor does not validate.
    """

    family: str
    degree: int
    c: float = 0.0
    min_derivative: float = float("nan")
    _table: np.ndarray | None = field(default=None, repr=False)
    _scale: float = field(default=1.0, repr=False)
    _eta_mean: float = field(default=0.0, repr=False)

    # -- pointwise evaluation -------------------------------------------------
    def lift(self, x):
        """Lift ``F`` on [0, 1]; vectorised, no reduction mod 1."""
        x = np.asarray(x, dtype=float)
        d = self.degree
        if self.family == "linear":
            return d * x
        if self.family == "smooth_perturbed":
            return d * x + (self.c / TWO_PI) * np.sin(TWO_PI * x)
        return _table_lift(self._table, x)

    def eval(self, x):
        """Image of ``x`` in [0, 1).  Raises :class:`DomainError` outside [0, 1)."""
        arr = np.asarray(x, dtype=float)
        if np.any(~((arr >= 0.0) & (arr < 1.0))):
            raise DomainError(f"points must lie in [0, 1); got {x!r}")
        out = canonical(self.lift(arr))
        return float(out) if np.ndim(out) == 0 else out

    __call__ = eval

    def derivative(self, x):
        x = np.asarray(x, dtype=float)
        d = self.degree
        if self.family == "linear":
            out = np.full_like(x, float(d))
        elif self.family == "smooth_perturbed":
            out = d + self.c * np.cos(TWO_PI * x)
        else:
            out = self._scale * (d + self.c * (_eta(x) - self._eta_mean))
        return float(out) if out.ndim == 0 else out

    def log_derivative(self, x):
        """``log f'``; the potential is ``psi = -log_derivative``."""
        return np.log(self.derivative(x))

    # -- validation -----------------------------------------------------------
    def validate_expanding(self, grid: int = VALIDATION_GRID) -> float:
        """Minimum of ``f'`` over ``grid`` equally spaced points of [0, 1).

        The value is stored as ``min_derivative``.  Raises :class:`NotExpanding`
        if it does not exceed ``1 + EXPANSION_MARGIN``.
        """
        if grid < 1000:
            raise BadParams("validation grid must have at least 1000 points")
        m = float(np.min(self.derivative(np.arange(grid) / grid)))
        if not m > 1.0 + EXPANSION_MARGIN:
            raise NotExpanding(f"{self.family} map has min f' = {m:.6g} <= 1")
        object.__setattr__(self, "min_derivative", m)
        return m

    # -- inverse branches -----------------------------------------------------
    def preimages(self, y) -> np.ndarray:
        """All ``d`` preimages of each target, shape ``(len(y), d)``, sorted per row.

        Solved by bisection on the monotone lift: preimage ``j`` of ``y``
        solves ``F(x) = y + j`` on [0, 1].
        """
        y = np.atleast_1d(np.asarray(y, dtype=float))
        if np.any(~((y >= 0.0) & (y < 1.0))):
            raise DomainError("targets must lie in [0, 1)")
        t = y[:, None] + np.arange(self.degree)[None, :]
        lo = np.zeros_like(t)
        hi = np.ones_like(t)
        if np.any(self.lift(lo) > t) or np.any(self.lift(hi) < t):
            raise ConvergenceError("bisection failed to bracket a preimage")
        for _ in range(BISECTION_STEPS):
            mid = 0.5 * (lo + hi)
            below = self.lift(mid) <= t
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        r_lo = np.abs(self.lift(lo) - t)
        r_hi = np.abs(self.lift(hi) - t)
        x = np.where(r_lo <= r_hi, lo, hi)
        res = np.minimum(r_lo, r_hi)
        if np.any(res > PREIMAGE_TOL):
            raise ConvergenceError(
                f"preimage residual {res.max():.3g} exceeds {PREIMAGE_TOL}; branch not monotone?"
            )
        # x = 1 is the point 0; only possible for the last branch when y = 0
        return canonical(x) if np.any(x >= 1.0) else x

    def inverse_branches(self, y: float) -> BranchPreimages:
        pts = self.preimages([y])[0]
        order = np.argsort(pts, kind="stable")
        pts = pts[order]
        res = circle_distance(self.eval(pts), y)
        return BranchPreimages(target=float(y), points=pts, residuals=np.atleast_1d(res))

    # -- serialisation --------------------------------------------------------
    def spec(self) -> dict:
        return {"family": self.family, "degree": self.degree, "c": self.c}

    @property
    def tag(self) -> str:
        if self.family == "linear":
            return f"linear(d={self.degree})"
        return f"{self.family}(d={self.degree},c={self.c:g})"


def _table_lift(table: np.ndarray, x):
    n = table.size - 1
    s = np.clip(x, 0.0, 1.0) * n
    i = np.minimum(s.astype(np.int64), n - 1)
    frac = s - i
    return table[i] + frac * (table[i + 1] - table[i])


def make_map(family: str, degree: int = 2, c: float = 0.0) -> CircleMap:
    """Build and validate a map of the given family.

    >>> make_map("linear", degree=2).eval(0.75)
    0.5
    """
    if family not in FAMILIES:
        raise BadParams(f"unknown family {family!r}; expected one of {FAMILIES}")
    if isinstance(degree, bool) or not isinstance(degree, (int, np.integer)) or degree < 2:
        raise BadParams(f"degree must be an integer >= 2, got {degree!r}")
    try:
        c = float(c)
    except (TypeError, ValueError) as exc:
        raise BadParams(f"amplitude c must be a real number, got {c!r}") from exc
    if not math.isfinite(c):
        raise BadParams("amplitude c must be finite")
    degree = int(degree)
    if family == "linear":
        if c != 0.0:
            raise BadParams("the linear family takes no amplitude")
        fmap = CircleMap("linear", degree)
    elif family == "smooth_perturbed":
        fmap = CircleMap("smooth_perturbed", degree, c)
    else:
        fmap = _make_nonhoelder(degree, c)
    fmap.validate_expanding(VALIDATION_GRID)
    return fmap


def _make_nonhoelder(degree: int, c: float) -> CircleMap:
    nodes = np.linspace(0.0, 1.0, QUADRATURE_NODES + 1)
    eta = _eta(nodes)
    h = 1.0 / QUADRATURE_NODES
    # trapezoidal mean, so the quadrature of the centred derivative is exactly d
    eta_mean = float(h * (eta.sum() - 0.5 * (eta[0] + eta[-1])))
    fprime = degree + c * (eta - eta_mean)
    table = np.concatenate(([0.0], np.cumsum(0.5 * h * (fprime[1:] + fprime[:-1]))))
    scale = degree / table[-1]
    table = table * scale
    table[-1] = float(degree)
    table.setflags(write=False)
    if np.any(np.diff(table) <= 0.0):
        raise NotExpanding("tabulated lift is not increasing")
    return CircleMap("nonhoelder", degree, c, _table=table, _scale=float(scale), _eta_mean=eta_mean)


def map_from_spec(spec: dict) -> CircleMap:
    """Build a map from its JSON object ``{"family", "degree", "c"}``."""
    if not isinstance(spec, dict):
        raise BadParams("map spec must be a JSON object")
    unknown = set(spec) - {"family", "degree", "c"}
    if unknown:
        raise BadParams(f"unknown map spec keys: {sorted(unknown)}")
    if "family" not in spec or "degree" not in spec:
        raise BadParams("map spec requires 'family' and 'degree'")
    return make_map(spec["family"], spec["degree"], spec.get("c", 0.0))


# -- orbits -------------------------------------------------------------------

@dataclass(frozen=True)
class GenericPoint:
    """A Lebesgue-typical point known to arbitrary precision.

    The leading digits come from ``head``; every further base-``d`` digit is
    drawn from a generator seeded with ``tail_seed``.  Floating-point
    iteration of ``x -> d x mod 1`` exhausts the 53 mantissa bits of a double
    and collapses onto 0, so orbits of linear maps are computed from the digit
    expansion instead: the ``j``-th iterate is the expansion shifted by ``j``.
    """

    head: float
    tail_seed: int

    @property
    def value(self) -> float:
        return self.head

    def digits(self, base: int, count: int) -> np.ndarray:
        n_head = min(count, _head_digits(base))
        out = np.empty(count, dtype=np.int64)
        frac = self.head
        for i in range(n_head):
            frac *= base
            dig = min(int(frac), base - 1)
            out[i] = dig
            frac -= dig
        if count > n_head:
            rng = np.random.default_rng(self.tail_seed)
            out[n_head:] = rng.integers(0, base, size=count - n_head)
        return out


def _head_digits(base: int) -> int:
    return int(math.ceil(53.0 / math.log2(base)))


def lebesgue_points(count: int, seed: int) -> list[GenericPoint]:
    """Jittered golden-ratio sample of ``count`` Lebesgue-typical points."""
    rng = np.random.default_rng(seed)
    golden = (math.sqrt(5.0) - 1.0) / 2.0
    start = rng.random()
    jitter = rng.random(count) / count
    heads = canonical(start + golden * np.arange(count) + jitter)
    tails = rng.integers(0, 2**63 - 1, size=count)
    return [GenericPoint(float(h), int(s)) for h, s in zip(heads, tails)]


def _start_value(x0) -> float:
    return x0.value if isinstance(x0, GenericPoint) else float(x0)


def _check_start(x0) -> None:
    v = x0.value if isinstance(x0, GenericPoint) else x0
    if not (0.0 <= v < 1.0):
        raise DomainError(f"initial point must lie in [0, 1); got {v!r}")


def orbit(fmap: CircleMap, x0, n: int, burn_in: int = 0) -> np.ndarray:
    """Points ``f^j(x0)`` for ``j = burn_in, ..., burn_in + n - 1``.

    ``x0`` is a float, a :class:`fractions.Fraction` or a
    :class:`GenericPoint`.  A float is iterated in double precision (exact
    for dyadic points under the doubling map).  Under a linear map a
    Fraction is iterated exactly, so ``Fraction(1, 3)`` is 2-periodic for
    the doubling map; other maps use its float value.
    """
    if n < 1:
        raise BadParams("orbit length must be >= 1")
    if burn_in < 0:
        raise BadParams("burn_in must be >= 0")
    return orbits(fmap, [x0], n, burn_in)[:, 0]


def orbits(fmap: CircleMap, starts, n: int, burn_in: int = 0) -> np.ndarray:
    """Orbits of several initial points at once, shape ``(n, len(starts))``."""
    starts = list(starts)
    for x0 in starts:
        _check_start(x0)
    out = np.empty((n, len(starts)))
    rest = []
    for i, x0 in enumerate(starts):
        if fmap.family == "linear" and isinstance(x0, GenericPoint):
            out[:, i] = _digit_orbit(fmap.degree, x0, n, burn_in)
        elif fmap.family == "linear" and isinstance(x0, Fraction):
            out[:, i] = _rational_orbit(fmap.degree, x0, n, burn_in)
        else:
            rest.append(i)
    if rest:
        x = np.array([_start_value(starts[i]) for i in rest], dtype=float)
        block = np.empty((n, len(rest)))
        _forward(fmap, x, burn_in, None)
        _forward(fmap, x, n, block)
        out[:, rest] = block
    return out


def _rational_orbit(d: int, x0: Fraction, n: int, burn_in: int) -> np.ndarray:
    # numerators of p/q under p -> d p mod q; eventually periodic
    q = x0.denominator
    p = x0.numerator
    seen: dict[int, int] = {}
    seq: list[int] = []
    total = burn_in + n
    while len(seq) < total and p not in seen:
        seen[p] = len(seq)
        seq.append(p)
        p = (d * p) % q
    vals = np.array([float(Fraction(v, q)) for v in seq])
    if len(seq) >= total:
        return canonical(vals[burn_in:total])
    start = seen[p]
    idx = np.arange(burn_in, total)
    tail = idx >= start
    idx[tail] = start + (idx[tail] - start) % (len(seq) - start)
    return canonical(vals[idx])


def _digit_orbit(d: int, x0: GenericPoint, n: int, burn_in: int) -> np.ndarray:
    tail = _head_digits(d) + 2
    digits = x0.digits(d, burn_in + n + tail).astype(float)
    # x_j = (a_j + x_{j+1}) / d, run backwards as a first-order IIR filter
    rev = lfilter([1.0 / d], [1.0, -1.0 / d], digits[::-1])
    xs = rev[::-1][burn_in : burn_in + n]
    return canonical(np.ascontiguousarray(xs))


def _forward(fmap: CircleMap, x: np.ndarray, steps: int, out: np.ndarray | None) -> None:
    """Iterate ``x`` in place ``steps`` times, recording the pre-step states into ``out``."""
    if steps == 0:
        return
    record = out is not None
    buf = out if record else np.empty((1, x.size))
    if fmap.family == "linear":
        _iter_linear(x, steps, float(fmap.degree), buf, record)
    elif fmap.family == "smooth_perturbed":
        _iter_smooth(x, steps, float(fmap.degree), fmap.c / TWO_PI, buf, record)
    else:
        _iter_table(x, steps, fmap._table, buf, record)


@numba.njit(cache=True)
def _wrap(v):
    r = v - math.floor(v)
    if r >= 1.0:
        r = 0.0
    return r


@numba.njit(cache=True)
def _iter_linear(x, steps, d, out, record):
    for t in range(steps):
        for p in range(x.size):
            if record:
                out[t, p] = x[p]
            x[p] = _wrap(d * x[p])


@numba.njit(cache=True)
def _iter_smooth(x, steps, d, amp, out, record):
    tp = 2.0 * math.pi
    for t in range(steps):
        for p in range(x.size):
            if record:
                out[t, p] = x[p]
            v = x[p]
            x[p] = _wrap(d * v + amp * math.sin(tp * v))


@numba.njit(cache=True)
def _iter_table(x, steps, table, out, record):
    n = table.size - 1
    for t in range(steps):
        for p in range(x.size):
            if record:
                out[t, p] = x[p]
            s = x[p] * n
            i = int(s)
            if i >= n:
                i = n - 1
            x[p] = _wrap(table[i] + (s - i) * (table[i + 1] - table[i]))
