"""Sampling: Sobol sequence oracles, training families, quadrature weights."""

import numpy as np
import pytest
from scipy.stats import qmc

from rwpinn import sampling
from rwpinn.problems import get_problem


def test_sobol_first_points_dim1():
    pts = sampling.sobol_sequence(1, 3)
    np.testing.assert_allclose(pts[:, 0], [0.5, 0.75, 0.25])


@pytest.mark.parametrize("dim", [1, 2, 3])
def test_sobol_matches_scipy(dim):
    n = 64
    ours = sampling.sobol_sequence(dim, n)
    engine = qmc.Sobol(d=dim, scramble=False)
    engine.fast_forward(1)  # we skip the all-zeros point
    ref = engine.random(n)
    np.testing.assert_allclose(ours, ref, atol=1e-12)


def test_sobol_low_discrepancy_dyadic_boxes():
    # each dyadic interval of length 1/8 receives exactly n/8 of the points
    pts = sampling.sobol_sequence(1, 64)[:, 0]
    counts = np.histogram(pts, bins=8, range=(0.0, 1.0))[0]
    assert np.all(counts == 8)


def test_sobol_rejects_unsupported_dim():
    with pytest.raises(ValueError):
        sampling.sobol_sequence(4, 8)


def test_training_set_shapes_and_weights():
    prob = get_problem("burgess1d")
    cfg = sampling.SamplerConfig("sobol", 256, 130, 130, 0, 0)
    tset = sampling.build_training_set(cfg, prob)
    assert tset.interior.shape == (256, 2)
    assert tset.spatial_boundary.shape == (130, 2)
    assert tset.temporal_boundary.shape == (130, 1)
    # uniform Monte Carlo weights: family measure / N
    assert tset.interior_weights.sum() == pytest.approx(1.0)  # T * |D| = 1
    assert tset.tb_weights.sum() == pytest.approx(1.0)
    assert tset.sb_weights.sum() == pytest.approx(2.0)  # two faces, measure T each
    # boundary points sit on the faces, split evenly
    faces, counts = np.unique(tset.sb_faces, return_counts=True)
    assert list(faces) == [0, 1]
    assert abs(counts[0] - counts[1]) <= 1
    np.testing.assert_array_equal(
        tset.spatial_boundary[tset.sb_faces == 0][:, 1], 0.0
    )
    np.testing.assert_array_equal(
        tset.spatial_boundary[tset.sb_faces == 1][:, 1], 1.0
    )


def test_training_set_2d_faces():
    prob = get_problem("efk2d")
    cfg = sampling.SamplerConfig("sobol", 200, 100, 80, 0, 0)
    tset = sampling.build_training_set(cfg, prob)
    assert tset.interior.shape == (200, 3)
    faces = np.unique(tset.sb_faces)
    assert list(faces) == [0, 1, 2, 3]
    for face in faces:
        pts = tset.spatial_boundary[tset.sb_faces == face]
        axis, side = face // 2, face % 2
        np.testing.assert_array_equal(pts[:, 1 + axis], float(side))
    assert tset.sb_weights.sum() == pytest.approx(4.0)


def test_inverse_set_has_data_and_no_boundary():
    prob = get_problem("efk1d-inv")
    cfg = sampling.SamplerConfig("sobol", 256, 0, 0, 128, 3)
    tset = sampling.build_training_set(cfg, prob)
    assert tset.data_points.shape == (128, 2)
    assert len(tset.spatial_boundary) == 0
    assert len(tset.temporal_boundary) == 0
    np.testing.assert_allclose(
        tset.data_values, prob.exact(tset.data_points), atol=1e-14
    )
    assert tset.data_weights.sum() == pytest.approx(1.0)


def test_point_count_floors():
    prob = get_problem("burgess1d")
    with pytest.raises(ValueError):
        sampling.build_training_set(sampling.SamplerConfig("sobol", 128, 130, 130, 0, 0), prob)
    with pytest.raises(ValueError):
        sampling.build_training_set(sampling.SamplerConfig("sobol", 256, 64, 130, 0, 0), prob)
    inv = get_problem("burgess1d-inv")
    with pytest.raises(ValueError):
        sampling.build_training_set(sampling.SamplerConfig("sobol", 256, 0, 0, 64, 0), inv)


def test_random_strategy_seeded():
    prob = get_problem("burgess1d")
    cfg = sampling.SamplerConfig("random", 256, 130, 130, 0, 11)
    a = sampling.build_training_set(cfg, prob)
    b = sampling.build_training_set(cfg, prob)
    np.testing.assert_array_equal(a.interior, b.interior)
    np.testing.assert_array_equal(a.spatial_boundary, b.spatial_boundary)
    c = sampling.build_training_set(
        sampling.SamplerConfig("random", 256, 130, 130, 0, 12), prob
    )
    assert not np.array_equal(a.interior, c.interior)


def test_unknown_strategy_rejected():
    with pytest.raises(ValueError):
        sampling.SamplerConfig("latin", 256, 130, 130, 0, 0)


def test_sobol_quadrature_converges_faster_than_crude_mc():
    # integral of a smooth function; Sobol error should shrink roughly ~1/N
    f = lambda x: np.sin(np.pi * x[:, 0]) * np.exp(x[:, 1])
    exact = (2 / np.pi) * (np.e - 1.0)
    errs = []
    for n in (128, 1024):
        pts = sampling.sobol_sequence(2, n)
        errs.append(abs(f(pts).mean() - exact))
    assert errs[1] < errs[0] / 4  # better than the 1/sqrt(N) factor of ~2.8


def test_trapezoid_weights_exact_on_linear():
    w = sampling.trapezoid_weights(9, 2.0)
    x = np.linspace(0.0, 2.0, 9)
    assert w.sum() == pytest.approx(2.0)
    assert w @ x == pytest.approx(2.0)  # integral of x over [0, 2]


def test_test_grid_integrates_constants_and_reshape():
    grid = sampling.test_grid(sampling.DomainSpec(2), 9)
    assert grid.weights.sum() == pytest.approx(1.0)
    vals = grid.points[:, 0]
    assert grid.reshape(vals).shape == (9, 9, 9)
    # integral of t over [0,1]^3 is 1/2
    assert grid.weights @ vals == pytest.approx(0.5)
