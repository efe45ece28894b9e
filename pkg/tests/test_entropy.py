import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ergolab.circle_map import lebesgue_points
from ergolab.entropy import (
    Partition,
    branch_partition,
    entropy_estimate,
    lyapunov_exponent,
    make_partition,
    partition_entropy,
    pesin_report,
    pesin_residual,
    refine,
    shannon_entropy,
)
from ergolab.errors import BadParams, UnderSampled
from ergolab.measures import EmpiricalMeasure, GridMeasure, empirical_measure

LOG2, LOG3 = math.log(2), math.log(3)


# -- partitions -------------------------------------------------------------------

def test_make_partition_examples():
    p = make_partition(4)
    np.testing.assert_array_equal(p.breakpoints, [0.0, 0.25, 0.5, 0.75])
    assert p.diameter == 0.25
    shifted = make_partition(4, 0.1)
    assert shifted.atom_of([0.05]).tolist() == [3]
    with pytest.raises(BadParams):
        make_partition(4, 0.3)
    with pytest.raises(BadParams):
        Partition(np.array([0.5, 0.2]))


def test_atom_of_breakpoint_goes_right():
    p = make_partition(4)
    assert p.atom_of([0.0, 0.25, 0.2499, 0.999]).tolist() == [0, 1, 0, 3]


def test_branch_partition_linear_is_uniform(doubling, tripling):
    np.testing.assert_allclose(branch_partition(doubling).breakpoints, [0.0, 0.5], atol=1e-12)
    np.testing.assert_allclose(branch_partition(tripling).breakpoints, [0.0, 1 / 3, 2 / 3], atol=1e-12)


def test_refine_doubling_gives_dyadic_cylinders(doubling):
    rp = refine(doubling, make_partition(2), 3)
    assert rp.size == 8
    np.testing.assert_allclose(rp.cuts, np.arange(8) / 8, atol=1e-12)
    np.testing.assert_allclose(rp.arc_lengths, 1 / 8, atol=1e-12)
    # itinerary of the arc [3/8, 1/2) is 0 -> 1 -> 1
    assert rp.arc_words[3].tolist() == [0, 1, 1]


def test_refine_depth_one_is_base(smooth):
    p = make_partition(5)
    rp = refine(smooth, p, 1)
    assert rp.size == 5
    np.testing.assert_array_equal(rp.cuts, p.breakpoints)


def test_refine_nonmarkov_base_merges_arcs(doubling):
    # a base cut at 0 and 1/3 is not Markov; cylinders still carry distinct words
    rp = refine(doubling, Partition(np.array([0.0, 1 / 3])), 4)
    assert rp.words.shape[0] == len({tuple(w) for w in rp.arc_words})
    assert rp.size <= 2**4 * 2


def test_refined_masses_sum_to_one(smooth, rng):
    rp = refine(smooth, branch_partition(smooth), 6)
    mu = EmpiricalMeasure.uniform(rng.random(5000))
    assert rp.masses(mu).sum() == pytest.approx(1.0, abs=1e-12)
    w = rng.random(64)
    g = GridMeasure(w / w.sum())
    assert rp.masses(g).sum() == pytest.approx(1.0, abs=1e-12)


# -- Shannon entropy --------------------------------------------------------------

def test_shannon_examples():
    assert shannon_entropy([0.5, 0.5]) == pytest.approx(LOG2, abs=1e-15)
    assert shannon_entropy([1.0, 0.0]) == 0.0
    assert math.copysign(1.0, shannon_entropy([1.0])) == 1.0


@given(st.lists(st.floats(0.0, 1.0), min_size=1, max_size=50).filter(lambda w: sum(w) > 1e-6))
def test_shannon_bounds(w):
    m = np.array(w) / sum(w)
    h = shannon_entropy(m)
    assert -1e-12 <= h <= math.log(np.count_nonzero(m)) + 1e-12


# -- entropy estimates ------------------------------------------------------------

def test_lebesgue_doubling_is_log2_at_every_depth(doubling):
    est = entropy_estimate(doubling, GridMeasure.lebesgue(1024), make_partition(2), q_max=8)
    np.testing.assert_allclose(est.diagnostics, LOG2, atol=1e-12)


def test_atomic_measure_has_zero_entropy(doubling):
    est = entropy_estimate(doubling, EmpiricalMeasure.dirac(0.0))
    assert est.entropy_est == 0.0
    rep = pesin_report(doubling, EmpiricalMeasure.dirac(0.0))
    assert rep.residual == pytest.approx(LOG2, abs=1e-12)
    assert not rep.pesin_holds


def test_period_two_orbit_entropy(doubling):
    mu = empirical_measure(doubling, Fraction(1, 3), 2)
    mu = EmpiricalMeasure(mu.points, mu.weights, exact=True)
    assert entropy_estimate(doubling, mu).entropy_est == pytest.approx(LOG2 / 10, abs=1e-12)


def test_block_entropy_monotone_and_counting_bound(all_maps):
    for fmap in all_maps:
        mu = empirical_measure(fmap, lebesgue_points(1, 7)[0], 200_000)
        est = entropy_estimate(fmap, mu, q_max=6)
        blocks = np.array(est.block_entropies)
        assert np.all(np.diff(blocks) >= -1e-12)
        rp = refine(fmap, branch_partition(fmap), 6)
        for q in range(1, 7):
            assert blocks[q - 1] <= math.log(np.count_nonzero(rp.masses(mu, q) >= 0.0)) + 1e-12


def test_block_entropy_subadditive(doubling):
    # Lebesgue is invariant for the doubling map, so H(P^{a+b}) <= H(P^a) + H(P^b)
    p = Partition(np.array([0.0, 0.3, 0.55]))
    est = entropy_estimate(doubling, GridMeasure.lebesgue(4096), p, q_max=8)
    h = [0.0] + est.block_entropies
    for a in range(1, 8):
        for b in range(1, 9 - a):
            assert h[a + b] <= h[a] + h[b] + 1e-9


def test_undersampled(doubling):
    mu = empirical_measure(doubling, lebesgue_points(1, 1)[0], 1000)
    with pytest.raises(UnderSampled):
        entropy_estimate(doubling, mu, q_max=10)


def test_auto_depth_respects_sample_rule(smooth):
    mu = empirical_measure(smooth, lebesgue_points(1, 2)[0], 100_000)
    est = entropy_estimate(smooth, mu)
    assert mu.size >= 100 * est.n_cylinders
    assert est.q_used >= 4


# -- Lyapunov and Pesin residual ----------------------------------------------------

def test_lyapunov_examples(doubling, smooth):
    assert lyapunov_exponent(doubling, GridMeasure.lebesgue(16)) == pytest.approx(LOG2, abs=1e-15)
    assert lyapunov_exponent(smooth, EmpiricalMeasure.dirac(0.0)) == pytest.approx(math.log(2.1), abs=1e-15)


def test_pesin_residual_from_float(tripling):
    rep = pesin_residual(tripling, GridMeasure.lebesgue(27), LOG3)
    assert rep.residual == pytest.approx(0.0, abs=1e-12)
    assert rep.pesin_holds and rep.q_used == 0
    assert rep.map["family"] == "linear"


def test_ruelle_on_orbit_measures(all_maps):
    starts = lebesgue_points(3, 11)
    for fmap in all_maps:
        for x0 in starts:
            rep = pesin_report(fmap, empirical_measure(fmap, x0, 100_000))
            assert rep.residual >= -0.05
            assert rep.pesin_holds


def test_report_json_round_trip(doubling):
    import json

    rep = pesin_report(doubling, EmpiricalMeasure.dirac(0.0), provenance={"kind": "dirac"})
    d = json.loads(rep.to_json())
    assert d["pesin_holds"] is False
    assert d["measure_provenance"] == {"kind": "dirac"}
