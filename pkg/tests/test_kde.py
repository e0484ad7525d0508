import math

import numpy as np
import pytest

import oracles
from txfault.kde import (class_curves, default_bandwidth, kde_curve, kde_estimate,
                         minmax, write_curves)


def test_single_sample_peak():
    assert math.isclose(kde_estimate([0.0], 1.0, 0.0), 1 / math.sqrt(2 * math.pi))


def test_symmetry():
    xs = np.linspace(-3, 3, 41)
    f = kde_estimate([-1.0, 1.0], 0.5, xs)
    np.testing.assert_allclose(f, f[::-1], rtol=0, atol=1e-15)


def test_far_tail():
    assert kde_estimate([0.0, 1.0], 0.1, 3.0) < 1e-20


def test_bad_bandwidth():
    with pytest.raises(ValueError):
        kde_estimate([1.0], 0.0, 0.0)
    with pytest.raises(ValueError):
        kde_curve([1.0], -1.0)
    with pytest.raises(ValueError):
        kde_curve([1.0], 1.0, grid_size=1)


def test_matches_double_loop_oracle():
    rng = np.random.default_rng(0)
    for _ in range(100):
        s = rng.standard_normal(rng.integers(1, 30))
        h = rng.uniform(0.05, 2.0)
        xs = rng.uniform(-4, 4, 5)
        got = kde_estimate(s, h, xs)
        want = [oracles.kde(s, h, x) for x in xs]
        np.testing.assert_allclose(got, want, rtol=1e-12, atol=1e-300)


@pytest.mark.parametrize("h", [0.001, 0.1, 1.0])
def test_curve_integrates_to_one(h):
    s = np.random.default_rng(1).uniform(0, 1, 200)
    c = kde_curve(s, h)
    assert abs(c.integral() - 1.0) <= 1e-3
    assert c.grid[0] == s.min() - 4 * h and c.grid[-1] == s.max() + 4 * h
    assert np.all(c.density >= 0)
    assert np.all(np.diff(c.grid) <= h / 2 + 1e-15)


def test_curve_deterministic():
    s = [0.1, 0.5, 0.55]
    a, b = kde_curve(s, 0.1), kde_curve(s, 0.1)
    assert np.array_equal(a.density, b.density) and a.n_points == 3


def test_bandwidth_defaults():
    assert default_bandwidth("a.change_quantile.full_ql0_qh1") == 0.1
    assert default_bandwidth("b.abs_energy.full") == 0.001


def test_class_curves_one_per_class(tmp_path):
    rng = np.random.default_rng(2)
    labels = np.repeat(list("ABCDEFG"), 10)
    curves = class_curves(rng.uniform(size=70), labels, 0.1)
    assert [c.label for c in curves] == list("ABCDEFG")
    path = tmp_path / "k.csv"
    write_curves(path, curves, "feat")
    lines = path.read_text().splitlines()
    assert lines[0] == "feature,class,x,density"
    assert len(lines) == 1 + sum(c.grid.size for c in curves)


def test_minmax():
    np.testing.assert_array_equal(minmax([2.0, 4.0, 3.0]), [0.0, 1.0, 0.5])
    np.testing.assert_array_equal(minmax([5.0, 5.0]), [0.0, 0.0])
