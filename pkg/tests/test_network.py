"""Network construction, parameter packing and forward evaluation."""

import numpy as np
import pytest

from rwpinn import network
from rwpinn.problems import const_coords, lift_coords
from rwpinn.taylor import index_set


def test_parameter_count_oracle():
    # input 2, four hidden layers of width 20, scalar output
    widths = (2, 20, 20, 20, 20, 1)
    assert network.parameter_count(widths) == 1341
    cfg = network.NetworkConfig(2, 4, 20, seed=0)
    params = network.init_params(cfg)
    assert params.n_params == 1341
    assert params.pack().size == 1341


def test_pack_unpack_roundtrip():
    cfg = network.NetworkConfig(3, 2, 7, seed=5)
    params = network.init_params(cfg)
    theta = params.pack()
    again = params.unpack(theta)
    for (w1, b1), (w2, b2) in zip(params.layers, again.layers):
        np.testing.assert_array_equal(w1, w2)
        np.testing.assert_array_equal(b1, b2)


def test_json_roundtrip():
    params = network.init_params(network.NetworkConfig(2, 2, 5, seed=1))
    again = network.NetworkParams.from_json(params.to_json())
    np.testing.assert_array_equal(params.pack(), again.pack())


def test_init_is_seeded_and_bounded():
    cfg = network.NetworkConfig(2, 3, 10, seed=9)
    a = network.init_params(cfg)
    b = network.init_params(cfg)
    np.testing.assert_array_equal(a.pack(), b.pack())
    c = network.init_params(network.NetworkConfig(2, 3, 10, seed=10))
    assert not np.array_equal(a.pack(), c.pack())
    for w, bias in a.layers:
        d_out, d_in = w.shape
        bound = np.sqrt(6.0 / (d_in + d_out))
        assert np.all(np.abs(w) <= bound)
        np.testing.assert_array_equal(bias, np.zeros(d_out))


def test_mismatched_layer_dims_rejected():
    with pytest.raises(ValueError):
        network.NetworkParams(
            [(np.zeros((4, 2)), np.zeros(4)), (np.zeros((1, 5)), np.zeros(1))]
        )


def test_forward_values_match_taylor_value():
    params = network.init_params(network.NetworkConfig(2, 3, 8, seed=2))
    pts = np.random.default_rng(0).uniform(size=(17, 2))
    plain = network.forward_values(params, pts)
    iset = index_set((1, 2), ((1, 0), (0, 2)))
    u = network.forward(params.layers, lift_coords(pts, iset))
    np.testing.assert_allclose(np.asarray(u.value), plain, rtol=1e-12, atol=1e-12)
    u0 = network.forward(params.layers, const_coords(pts, index_set((0, 0))))
    np.testing.assert_allclose(np.asarray(u0.value), plain, rtol=1e-12, atol=1e-12)


def test_forward_derivative_against_finite_differences():
    params = network.init_params(network.NetworkConfig(2, 2, 6, seed=3))
    pts = np.array([[0.4, 0.3]])
    iset = index_set((1, 2), ((1, 0), (0, 2)))
    u = network.forward(params.layers, lift_coords(pts, iset))
    h = 1e-5

    def f(t, x):
        return network.forward_values(params, np.array([[t, x]]))[0]

    t0, x0 = pts[0]
    d_t = (f(t0 + h, x0) - f(t0 - h, x0)) / (2 * h)
    d_xx = (f(t0, x0 + h) - 2 * f(t0, x0) + f(t0, x0 - h)) / h**2
    assert float(u.coefficient((1, 0))[0]) == pytest.approx(d_t, rel=1e-6)
    assert 2 * float(u.coefficient((0, 2))[0]) == pytest.approx(d_xx, rel=1e-4)
