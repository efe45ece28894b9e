import math
from fractions import Fraction

import numpy as np
import pytest

from ergolab.circle_map import lebesgue_points
from ergolab.errors import BadParams
from ergolab.measures import EmpiricalMeasure, GridMeasure, TestFamily, to_grid, weak_star_distance
from ergolab.srb_like import (
    DecayPoint,
    basin_fraction,
    checkpoint_histograms,
    decay_is_nonincreasing,
    deviation_decay,
    geometric_checkpoints,
    is_atomic_profile,
    p_limit_set,
    srb_like_candidates,
)

K = 1024
LEB = GridMeasure.lebesgue(K)
DELTA0 = to_grid(EmpiricalMeasure.dirac(0.0), K)


def test_geometric_checkpoints():
    assert geometric_checkpoints(10**6, 4) == [125000, 250000, 500000, 1000000]
    assert geometric_checkpoints(4, 5) == [1, 2, 4]


def test_checkpoint_histograms_counts(smooth):
    starts = lebesgue_points(5, 0)
    h = checkpoint_histograms(smooth, starts, [100, 1000], 64)
    assert h.shape == (5, 2, 64)
    np.testing.assert_array_equal(h.sum(axis=-1), [[100, 1000]] * 5)
    np.testing.assert_array_equal(checkpoint_histograms(smooth, starts, [100, 1000], 64, threads=2), h)


def test_is_atomic_profile():
    assert is_atomic_profile(DELTA0)
    assert not is_atomic_profile(LEB)
    two = np.zeros(K)
    two[[10, 500]] = 0.5
    assert is_atomic_profile(GridMeasure(two))
    spread = np.zeros(K)
    spread[:4] = 0.25
    assert not is_atomic_profile(GridMeasure(spread))


# -- p-limit sets -------------------------------------------------------------------

def test_p_limit_fixed_point(doubling):
    est = p_limit_set(doubling, 0.0, 10**4)
    assert len(est.clusters) == 1 and est.dispersion == 0.0
    assert len(est.snapshots) == len(est.checkpoints)
    assert all(s.mass[0] == 1.0 for s in est.snapshots)


def test_p_limit_random_point(doubling):
    est = p_limit_set(doubling, lebesgue_points(1, 9)[0], 10**6)
    assert len(est.clusters) == 1
    assert est.dispersion < 0.02
    fam = TestFamily(doubling)
    assert weak_star_distance(est.clusters[0][0], LEB, fam) < 0.02


def test_p_limit_period_two(doubling):
    est = p_limit_set(doubling, Fraction(1, 3), 10**4)
    assert len(est.clusters) == 1
    rep = est.clusters[0][0]
    assert np.flatnonzero(rep.mass).tolist() == [341, 682]
    np.testing.assert_allclose(rep.mass[[341, 682]], 0.5, atol=1e-3)  # odd checkpoints
    assert sorted(i for _, m in est.clusters for i in m) == list(range(len(est.snapshots)))


def test_p_limit_precondition(doubling):
    with pytest.raises(BadParams):
        p_limit_set(doubling, 0.1, 1000)


# -- SRB-like scan ------------------------------------------------------------------

@pytest.fixture(scope="module")
def doubling_scan(doubling):
    return srb_like_candidates(doubling, 200, 10**5, seed=4)


def test_scan_doubling_single_lebesgue_candidate(doubling, doubling_scan):
    rep = doubling_scan
    assert len(rep.candidates) == 1
    cand = rep.candidates[0]
    assert cand.basin_weight >= 0.95
    assert cand.srb_like and not cand.atomic
    assert weak_star_distance(cand.measure, LEB, TestFamily(doubling)) < 0.01
    assert sum(c.basin_weight for c in rep.candidates) <= 1.0


def test_scan_tripling_entropy(tripling):
    rep = srb_like_candidates(tripling, 100, 10**5, seed=2)
    assert len(rep.candidates) == 1
    assert rep.candidates[0].pesin.entropy_est == pytest.approx(math.log(3), rel=0.05)


def test_scan_is_deterministic(doubling, doubling_scan):
    again = srb_like_candidates(doubling, 200, 10**5, seed=4)
    assert again.to_json() == doubling_scan.to_json()


def test_scan_atomic_starts_are_not_srb_like(doubling):
    starts = [Fraction(0)] * 50 + [Fraction(1, 3)] * 50
    rep = srb_like_candidates(doubling, n=10**4, starts=starts)
    assert len(rep.candidates) == 2
    for cand in rep.candidates:
        assert cand.atomic and not cand.srb_like
        assert cand.pesin.residual > 0.2


def test_scan_needs_100_points(doubling):
    with pytest.raises(BadParams):
        srb_like_candidates(doubling, 50, 10**4)


# -- basins and decay ----------------------------------------------------------------

def test_basin_examples(doubling):
    assert basin_fraction(doubling, LEB, 0.05, 200, 10**5, seed=1) >= 0.95
    assert basin_fraction(doubling, DELTA0, 0.05, 200, 10**5, seed=1) <= 0.02
    eps = TestFamily(doubling).diameter_bound() + 1e-9
    assert basin_fraction(doubling, DELTA0, eps, 100, 1000, seed=1) == 1.0
    with pytest.raises(BadParams):
        basin_fraction(doubling, LEB, 0.0)


def test_basin_monotone_in_epsilon(smooth):
    fracs = [basin_fraction(smooth, LEB, e, 100, 2000, seed=6) for e in (0.01, 0.03, 0.1, 0.3, 1.0)]
    assert fracs == sorted(fracs)


def test_decay_first_step_is_far(doubling):
    curve = deviation_decay(doubling, LEB, 0.2, 0.05, [1, 10**3], sample_count=200, seed=0)
    assert curve[0].n == 1 and curve[0].fraction > 0.95
    assert curve[1].fraction < curve[0].fraction
    assert curve[0].analytic_bound == pytest.approx(math.exp(-0.15))


def test_decay_smooth_nonincreasing(smooth):
    from ergolab.equilibrium import stationary_measure, ulam_matrix

    ref = stationary_measure(ulam_matrix(smooth, K))
    curve = deviation_decay(smooth, ref, 0.2, 0.05, [10, 100, 1000, 10**4], sample_count=200, seed=3)
    assert decay_is_nonincreasing(curve)


def test_decay_preconditions(doubling):
    with pytest.raises(BadParams):
        deviation_decay(doubling, LEB, 0.2, 0.1, [10])
    with pytest.raises(BadParams):
        deviation_decay(doubling, LEB, 0.2, 0.05, [])


def test_decay_band_logic():
    flat = [DecayPoint(10, 0.5, 1.0, 0.02), DecayPoint(100, 0.53, 1.0, 0.02)]
    assert decay_is_nonincreasing(flat)
    jump = [DecayPoint(10, 0.2, 1.0, 0.01), DecayPoint(100, 0.5, 1.0, 0.02)]
    assert not decay_is_nonincreasing(jump)
