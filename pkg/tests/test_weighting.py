"""Residual weighting schemes: exact anchors, monotonicity, detachment."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rwpinn import tape
from rwpinn.weighting import METHODS, WeightScheme, weight, weighted_interior_residual


def test_zero_residual_anchors():
    assert weight(WeightScheme("rwa"), 0.0) == pytest.approx(0.5, abs=1e-12)
    assert weight(WeightScheme("rwb"), 0.0) == pytest.approx(
        np.tanh(np.log(2.0)), abs=1e-15
    )
    assert weight(WeightScheme("rwb"), 0.0) == pytest.approx(0.6, abs=1e-12)
    assert weight(WeightScheme("pinn"), 123.4) == 1.0


@pytest.mark.parametrize("kind", ["rwa", "rwb"])
def test_monotone_decreasing_on_sweep(kind):
    # away from the saturation tails the weights are strictly decreasing
    r = np.linspace(-15.0, 30.0, 2001)
    w = weight(WeightScheme(kind), r)
    assert np.all(np.diff(w) < 0)
    assert np.all(w > 0.0) and np.all(w < 1.0)


def test_sigmoid_symmetry():
    r = np.linspace(-10, 10, 101)
    w = weight(WeightScheme("rwa"), r)
    np.testing.assert_allclose(w + w[::-1], 1.0, atol=1e-12)


def test_extreme_residuals_stable():
    for kind in ("rwa", "rwb"):
        w = weight(WeightScheme(kind), np.array([-1e6, 1e6]))
        assert np.all(np.isfinite(w))
        assert w[0] == pytest.approx(1.0, abs=1e-12)
        assert w[1] == pytest.approx(0.0, abs=1e-12)


@given(
    kind=st.sampled_from(["rwa", "rwb"]),
    scale=st.floats(0.01, 1.0),
    r=st.floats(-50, 50),
)
@settings(max_examples=200, deadline=None)
def test_weight_in_unit_interval(kind, scale, r):
    w = float(weight(WeightScheme(kind, scale), r))
    assert 0.0 < w < 1.0 or w in (0.0, 1.0)  # saturation at float precision


def test_scale_validation():
    with pytest.raises(ValueError):
        WeightScheme("rwa", 0.0)
    with pytest.raises(ValueError):
        WeightScheme("rwb", 1.5)
    WeightScheme("pinn", 99.0)  # scale unused for the baseline
    with pytest.raises(ValueError):
        WeightScheme("other")


def test_detach_contract():
    # gradient of sum(w(r) * r) w.r.t. the residual inputs is exactly w(r)
    r_vals = np.array([-2.0, -0.3, 0.0, 0.7, 3.1])
    for kind in ("rwa", "rwb"):
        scheme = WeightScheme(kind, 0.8)

        def fn(leaves):
            weighted = weighted_interior_residual(scheme, leaves[0])
            return tape.sumall(weighted)

        _, grads = tape.value_and_grad(fn, [r_vals])
        np.testing.assert_allclose(
            grads[0], weight(scheme, r_vals), rtol=0, atol=1e-12
        )


def test_pinn_scheme_is_identity_node():
    r = tape.Node(np.array([1.0, -2.0]))
    assert weighted_interior_residual(WeightScheme("pinn"), r) is r


def test_method_names():
    assert METHODS == ("pinn", "rwa", "rwb")
