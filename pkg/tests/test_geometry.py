import numpy as np
import pytest
from scipy.spatial import cKDTree

from cascade_tool.errors import InputError
from cascade_tool.geometry import (
    PointCloud,
    RadialKernel,
    distance,
    generate_dataset,
    kernel_eval,
    load_points_csv,
    save_points_csv,
)


def test_distance_examples():
    assert distance((0, 0), (0, 0)) == 0.0
    assert distance((0, 0), (3, 4)) == 5.0
    assert distance((1, 1), (2, 2)) == pytest.approx(np.sqrt(2.0), abs=1e-15)


def test_distance_dim_mismatch():
    with pytest.raises(InputError):
        distance((0, 0), (0, 0, 0))


def test_metric_axioms_random_triples():
    rng = np.random.default_rng(7)
    a = rng.normal(size=(10_000, 3))
    b = rng.normal(size=(10_000, 3))
    c = rng.normal(size=(10_000, 3))
    dab = np.linalg.norm(a - b, axis=1)
    dba = np.linalg.norm(b - a, axis=1)
    dac = np.linalg.norm(a - c, axis=1)
    dcb = np.linalg.norm(c - b, axis=1)
    assert np.max(np.abs(dab - dba)) <= 1e-12
    assert np.all(dab <= dac + dcb + 1e-12)
    assert distance(a[0], a[0]) == 0.0


def test_kernel_examples():
    k1 = RadialKernel(bandwidth=1.0)
    assert float(k1.at_distance(0.5)) == 0.5
    k2 = RadialKernel(bandwidth=2.0)
    assert float(k2.at_distance(2.0)) == 0.0
    assert kernel_eval(k2, (1.0, 1.0), (1.0, 1.0)) == 1.0


def test_kernel_bad_bandwidth():
    with pytest.raises(InputError):
        RadialKernel(bandwidth=0.0)


def test_kernel_monotone():
    k = RadialKernel(bandwidth=1.7)
    d = np.linspace(0, 3, 400)
    v = k.at_distance(d)
    assert np.all(np.diff(v) <= 1e-15)
    assert np.all(v[d >= 1.7] == 0.0)


def test_cantor_counts_and_centers():
    c1 = generate_dataset("cantor", {"depth": 1, "points_per_square": 1})
    want = {(1 / 6, 1 / 6), (5 / 6, 1 / 6), (1 / 6, 5 / 6), (5 / 6, 5 / 6)}
    got = {tuple(np.round(p, 12)) for p in c1.points}
    assert got == {tuple(np.round(w, 12)) for w in want}
    for g in (1, 3, 4):
        ck = generate_dataset("cantor", {"depth": 3, "points_per_square": g})
        assert ck.n == 4**3 * g


def test_cantor_square_geometry():
    k = 2
    cloud = generate_dataset("cantor", {"depth": k, "points_per_square": 4})
    side = 3.0 ** (-k)
    # every point sits inside one of the 4**k sub-squares
    origins = np.unique(np.floor(cloud.points / side), axis=0)
    assert len(origins) == 4**k


def test_pin_rotation_invariance():
    cloud = generate_dataset("pin", {"resolution": 10})
    centroid = cloud.points.mean(axis=0)
    assert np.linalg.norm(centroid) < 1e-9
    t = 2 * np.pi / 3
    rot = np.array([[np.cos(t), -np.sin(t)], [np.sin(t), np.cos(t)]])
    rotated = (cloud.points - centroid) @ rot.T + centroid
    d, _ = cKDTree(cloud.points).query(rotated)
    assert d.max() < 1e-9  # rotated set matches the original set


def test_sphere_on_unit_sphere():
    cloud = generate_dataset("sphere", {"n_azimuth": 24, "n_band": 3})
    r = np.linalg.norm(cloud.points, axis=1)
    assert np.allclose(r, 1.0, atol=1e-9)
    assert cloud.dim == 3
    # cubical symmetry: negating any axis preserves the set
    for ax in range(3):
        flipped = cloud.points.copy()
        flipped[:, ax] *= -1
        d, _ = cKDTree(cloud.points).query(flipped)
        assert d.max() < 1e-9


def test_generators_are_pure():
    a = generate_dataset("uniform", {"n": 50, "dim": 3}, seed=11)
    b = generate_dataset("uniform", {"n": 50, "dim": 3}, seed=11)
    assert np.array_equal(a.points, b.points)
    c = generate_dataset("flare_cross", {}, seed=4)
    d = generate_dataset("flare_cross", {}, seed=4)
    assert np.array_equal(c.points, d.points)


def test_unknown_dataset():
    with pytest.raises(InputError):
        generate_dataset("nope", {})


def test_csv_round_trip(tmp_path):
    cloud = generate_dataset("uniform", {"n": 20, "dim": 2}, seed=3)
    path = save_points_csv(cloud, tmp_path / "pts.csv")
    back = load_points_csv(path)
    assert np.array_equal(back.points, cloud.points)


def test_point_cloud_validation():
    with pytest.raises(InputError):
        PointCloud(np.zeros((0, 2)))
    with pytest.raises(InputError):
        PointCloud([[np.nan, 0.0]])
