import json
from fractions import Fraction
from functools import lru_cache

import numpy as np
import pytest

from catalyst_towers.rusdepth import (
    RNG_ALGORITHM,
    depth_cdf_parallel,
    exact_expected_max,
    mc_expected_max,
    stage_distribution,
    sum_distribution,
)


def _oracle_expected_max(parallel, stages, copies, kmax=400):
    """E[Z] by direct summation with a memoized CDF recursion, no numpy."""

    def f_x(k):
        return (1 - 0.5**k) ** parallel if k > 0 else 0.0

    @lru_cache(maxsize=None)
    def f_y(s, k):
        if s == 0:
            return 1.0 if k >= 0 else 0.0
        return sum((f_x(j) - f_x(j - 1)) * f_y(s - 1, k - j) for j in range(1, k + 1))

    return sum(1 - f_y(stages, k) ** copies for k in range(kmax))


# --- examples ---------------------------------------------------------------

def test_cdf_examples():
    assert depth_cdf_parallel(1, 1) == 0.5
    assert depth_cdf_parallel(5, 1) == pytest.approx(0.03125, abs=1e-15)
    assert depth_cdf_parallel(5, 200) == 1.0
    assert depth_cdf_parallel(3, 0) == 0.0
    with pytest.raises(ValueError):
        depth_cdf_parallel(0, 3)


def test_cdf_monotone_in_unit_interval():
    for parallel in (1, 2, 5, 17):
        cdf = depth_cdf_parallel(parallel, np.arange(0, 80))
        assert np.all(np.diff(cdf) >= 0)
        assert cdf.min() >= 0 and cdf.max() <= 1


def test_single_geometric_mean_is_two():
    assert exact_expected_max(1, 1, 1) == pytest.approx(2, abs=1e-12)


def test_two_geometrics_max():
    # E[max of two Geom(1/2)] = 2 + 2 - 4/3
    assert exact_expected_max(2, 1, 1) == pytest.approx(8 / 3, abs=1e-12)
    assert exact_expected_max(1, 1, 2) == pytest.approx(8 / 3, abs=1e-12)


def test_single_stage_direct_summation():
    F = [Fraction(0)] + [(1 - Fraction(1, 2**k)) ** 5 for k in range(1, 120)]
    direct = sum(k * (F[k] - F[k - 1]) for k in range(1, 120))
    assert exact_expected_max(5, 1, 1) == pytest.approx(float(direct), abs=1e-12)


@pytest.mark.parametrize("args", [(2, 3, 1), (3, 2, 4), (5, 2, 3), (1, 4, 6)])
def test_against_recursion_oracle(args):
    assert exact_expected_max(*args) == pytest.approx(_oracle_expected_max(*args), abs=1e-9)


def test_headline_value():
    assert exact_expected_max(5, 7, 60) == pytest.approx(39.16, abs=0.01)


def test_distribution_invariants():
    stage = stage_distribution(5)
    assert stage.tail < 1e-12
    dist = sum_distribution(stage, 7)
    assert abs(dist.pmf.sum() + dist.tail - 1) < 1e-12
    # a 7-stage sum is at least 7 rounds deep
    assert np.all(dist.pmf[:7] == 0) and dist.pmf[7] > 0
    assert dist.mean() == pytest.approx(7 * stage.mean())


def test_truncation_extends_instead_of_failing():
    short = exact_expected_max(5, 7, 60, truncation=10)
    assert short == pytest.approx(exact_expected_max(5, 7, 60), abs=1e-9)


def test_invalid_arguments():
    with pytest.raises(ValueError):
        exact_expected_max(1, 0, 1)
    with pytest.raises(ValueError):
        mc_expected_max(1, 1, 1, 0, seed=0)


def test_monotone_grid():
    vals = {(p, s, c): exact_expected_max(p, s, c)
            for p in (1, 2, 4) for s in (1, 2, 4) for c in (1, 3, 9)}
    for (p, s, c), v in vals.items():
        for nxt in ((p * 2, s, c), (p, s * 2, c), (p, s, c * 3)):
            if nxt in vals:
                assert vals[nxt] >= v - 1e-12


# --- Monte Carlo ----------------------------------------------------------------

def test_mc_deterministic_and_json():
    a = mc_expected_max(3, 2, 4, 500, seed=11)
    b = mc_expected_max(3, 2, 4, 500, seed=11)
    assert a == b
    payload = json.loads(a.to_json(exact=1.5))
    assert payload["rng"] == RNG_ALGORITHM
    assert payload["parameters"] == {"parallel": 3, "stages": 2, "copies": 4}
    assert set(payload) >= {"estimate", "stderr", "exact", "samples", "seed"}


def test_mc_geometric_mean_million():
    res = mc_expected_max(1, 1, 1, 10**6, seed=3, chunk=200_000)
    assert res.estimate == pytest.approx(2.0, abs=0.01)
    assert res.stderr < 0.002


def test_mc_converges_in_repeated_runs():
    exact = exact_expected_max(3, 2, 5)
    hits = 0
    for seed in range(100):
        res = mc_expected_max(3, 2, 5, 2000, seed=seed)
        hits += abs(res.estimate - exact) < 3 * res.stderr
    assert hits >= 99
