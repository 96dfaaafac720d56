import numpy as np
import pytest
from scipy import stats

from privgraph.space import (
    AttributeDataset,
    SpaceConfig,
    build_grid_partition,
    cell_index,
    cell_indices,
    load_points_csv,
    sample_uniform_in_cell,
)


def test_grid_d1_two_cells():
    part = build_grid_partition(SpaceConfig(d=1), 2)
    assert part.m == 2
    assert np.allclose(part.lows.ravel(), [0.0, 0.5])
    assert np.allclose(part.highs.ravel(), [0.5, 1.0])
    assert part.max_diam == 0.5


def test_grid_d2_request_3_rounds_up():
    part = build_grid_partition(SpaceConfig(d=2), 3)
    assert part.k_per_axis == 2
    assert part.m == 4
    assert part.max_diam == 0.5


def test_grid_d2_request_100_enumerated():
    part = build_grid_partition(SpaceConfig(d=2), 100)
    assert part.m == 100
    # oracle: measure every cell of the 10x10 grid directly
    diams = [float(np.max(part.highs[k] - part.lows[k])) for k in range(part.m)]
    assert max(diams) == pytest.approx(0.1, abs=1e-15)
    assert part.max_diam == pytest.approx(0.1, abs=1e-15)


def test_grid_realization_not_fooled_by_float_roots():
    part = build_grid_partition(SpaceConfig(d=2), 10**2)
    assert part.k_per_axis == 10
    part = build_grid_partition(SpaceConfig(d=3), 27)
    assert part.k_per_axis == 3


def test_cell_index_basics_and_closure():
    part = build_grid_partition(SpaceConfig(d=1), 2)
    assert cell_index(part, [0.25]) == 0
    assert cell_index(part, [1.0]) == 1
    with pytest.raises(ValueError):
        cell_index(part, [1.2])


def test_cell_index_histogram_matches_volumes():
    rng = np.random.default_rng(7)
    part = build_grid_partition(SpaceConfig(d=2), 9)
    n = 60_000
    idx = cell_indices(part, rng.random((n, 2)))
    observed = np.bincount(idx, minlength=part.m)
    expected = part.cell_volumes * n
    chi2 = float(((observed - expected) ** 2 / expected).sum())
    assert chi2 < stats.chi2.ppf(0.99, df=part.m - 1)


def test_membership_roundtrip():
    rng = np.random.default_rng(3)
    part = build_grid_partition(SpaceConfig(d=3), 20)
    pts = rng.random((500, 3))
    idx = cell_indices(part, pts)
    assert np.all(pts >= part.lows[idx] - 1e-15)
    assert np.all(pts <= part.highs[idx] + 1e-15)


def test_cell_volumes_tile_the_cube():
    for d, m in [(1, 7), (2, 10), (3, 5)]:
        part = build_grid_partition(SpaceConfig(d=d), m)
        assert part.cell_volumes.sum() == pytest.approx(1.0, abs=1e-12)
        assert part.max_diam <= 1.0 / part.k_per_axis + 1e-15


def test_sample_uniform_whole_interval_mean():
    rng = np.random.default_rng(11)
    part = build_grid_partition(SpaceConfig(d=1), 1)
    draws = np.array([sample_uniform_in_cell(part, 0, rng)[0] for _ in range(4000)])
    sigma = 1.0 / np.sqrt(12 * draws.size)
    assert abs(draws.mean() - 0.5) < 3 * sigma


def test_sample_uniform_containment():
    rng = np.random.default_rng(5)
    part = build_grid_partition(SpaceConfig(d=1), 4)
    for _ in range(200):
        x = sample_uniform_in_cell(part, 2, rng)[0]
        assert 0.5 <= x < 0.75
    with pytest.raises(IndexError):
        sample_uniform_in_cell(part, 4, rng)


def test_sample_uniform_ks_per_coordinate():
    rng = np.random.default_rng(13)
    part = build_grid_partition(SpaceConfig(d=2), 4)
    draws = np.array([sample_uniform_in_cell(part, 0, rng) for _ in range(3000)])
    for j in range(2):
        res = stats.kstest(draws[:, j], stats.uniform(loc=0.0, scale=0.5).cdf)
        assert res.pvalue > 0.01


def test_space_diameter_and_metric():
    assert SpaceConfig(d=3, metric="sup").diameter == 1.0
    assert SpaceConfig(d=4, metric="euclidean").diameter == pytest.approx(2.0)
    sup = SpaceConfig(d=2, metric="sup")
    assert sup.distance([0.0, 0.0], [0.3, 0.4]) == pytest.approx(0.4)
    euc = SpaceConfig(d=2, metric="euclidean")
    assert euc.distance([0.0, 0.0], [0.3, 0.4]) == pytest.approx(0.5)


def test_dataset_validation():
    with pytest.raises(ValueError):
        AttributeDataset(points=np.array([[1.2]]))
    ds = AttributeDataset(points=np.array([[0.5], [0.1]]))
    assert ds.n == 2 and ds.d == 1


def test_csv_loader(tmp_path):
    good = tmp_path / "pts.csv"
    good.write_text("0.1,0.2\n0.9,0.4\n")
    ds = load_points_csv(str(good), d=2)
    assert ds.n == 2
    header = tmp_path / "hdr.csv"
    header.write_text("x,y\n0.5,0.5\n")
    assert load_points_csv(str(header), d=2, header=True).n == 1
    bad = tmp_path / "bad.csv"
    bad.write_text("0.1,0.2\n1.5,0.2\n")
    with pytest.raises(ValueError, match="row 2"):
        load_points_csv(str(bad), d=2)
