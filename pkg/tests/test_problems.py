"""Problem definitions: manufactured-solution identities and energy oracles."""

import numpy as np
import pytest

from rwpinn import network, problems, sampling
from rwpinn.problems import REGISTRY, efk_energy, get_problem
from rwpinn.taylor import TaylorScalar, taylor_lift

EXACT_PROBLEMS = [
    name for name, p in REGISTRY.items() if p.exact_taylor is not None
]


def exact_model(problem):
    """Closed-form solution exposed through the model interface."""
    return problem.exact_taylor


def sobol_spacetime(problem, n):
    pts = sampling.sobol_sequence(1 + problem.domain.spatial_dim, n)
    pts[:, 0] *= problem.domain.time_horizon
    return pts


@pytest.mark.parametrize("name", EXACT_PROBLEMS)
def test_manufactured_interior_residual_vanishes(name):
    prob = get_problem(name)
    pts = sobol_spacetime(prob, 1000)
    r = problems.interior_residual(prob, exact_model(prob), pts)
    assert np.max(np.abs(r)) <= 1e-8


@pytest.mark.parametrize("name", ["burgess1d", "efk1d", "efk2d"])
def test_exact_solution_satisfies_boundary_and_initial_data(name):
    prob = get_problem(name)
    d = prob.domain.spatial_dim
    for face in range(prob.domain.n_faces):
        axis, side = face // 2, face % 2
        pts = sampling.sobol_sequence(d, 50)
        full = np.zeros((50, 1 + d))
        full[:, 0] = pts[:, 0]
        tang = [i for i in range(d) if i != axis]
        for j, ax in enumerate(tang):
            full[:, 1 + ax] = pts[:, 1 + j]
        full[:, 1 + axis] = float(side)
        streams = problems.boundary_residuals(
            prob, exact_model(prob), full, np.full(50, face)
        )
        for s in streams:
            assert np.max(np.abs(s)) <= 1e-8
    xs = sampling.sobol_sequence(d, 50)
    r0 = problems.temporal_residual_node(prob, exact_model(prob), xs)
    assert np.max(np.abs(r0.value)) <= 1e-12


def test_exact_point_values():
    assert get_problem("burgess1d").exact(np.array([[0.0, 0.0]]))[0] == pytest.approx(
        np.log(2.0)
    )
    assert get_problem("efk1d").exact(np.array([[0.0, 0.5]]))[0] == pytest.approx(1.0)
    assert get_problem("efk1d").exact(np.array([[1.0, 0.5]]))[0] == pytest.approx(
        np.exp(-1.0)
    )
    assert get_problem("efk2d-inv").exact(np.array([[0.0, 0.5, 0.5]]))[0] == (
        pytest.approx(1.0)
    )


def test_burgess_boundary_trace_is_log():
    prob = get_problem("burgess1d")
    t = np.linspace(0, 1, 5)
    left = np.column_stack([t, np.zeros(5)])
    np.testing.assert_allclose(prob.boundary_u(0, left), np.log(t + 2.0))
    right = np.column_stack([t, np.ones(5)])
    np.testing.assert_allclose(prob.boundary_u(1, right), np.log(t + 3.0))


def constant_model(value):
    def model(coords):
        iset = coords[0].iset
        n = np.shape(coords[0].value)
        return TaylorScalar.constant(np.full(n, value), iset)

    return model


def test_energy_constant_states():
    # u == 1: every term vanishes; u == 0: only the double-well term, 1/4
    assert efk_energy(constant_model(1.0), 0.0, 65, gamma=0.01) == pytest.approx(0.0)
    assert efk_energy(constant_model(0.0), 0.0, 65, gamma=0.01) == pytest.approx(0.25)


def test_energy_sine_profile_termwise():
    # u = sin(pi x): gamma pi^4 / 4 + pi^2 / 4 + (1/4) * (3/8)
    gamma = 0.01
    model = get_problem("efk1d").exact_taylor
    expect = gamma * np.pi**4 / 4 + np.pi**2 / 4 + 3.0 / 32.0
    got = efk_energy(model, 0.0, 1025, gamma=gamma)
    assert got == pytest.approx(expect, rel=1e-5)


def test_energy_2d():
    # u = sin(pi x) sin(pi y) at t = 0
    gamma = 0.01
    model = get_problem("efk2d").exact_taylor
    # |Delta u|^2 integrates to pi^4, |grad u|^2 to pi^2 / 2,
    # (1 - u^2)^2 / 4 to (1 - 2 * 1/4 + 9/64) / 4
    expect = gamma * np.pi**4 / 2 + np.pi**2 / 4 + (1 - 0.5 + 9.0 / 64.0) / 4
    got = efk_energy(model, 0.0, 129, gamma=gamma, spatial_dim=2)
    assert got == pytest.approx(expect, rel=1e-3)


def test_inverse_mode_rejects_boundary_queries():
    prob = get_problem("burgess1d-inv")
    with pytest.raises(ValueError):
        problems.boundary_residual_nodes(
            prob, exact_model(prob), np.array([[0.5, 0.0]]), np.array([0])
        )


def test_unknown_problem_lists_available():
    with pytest.raises(KeyError, match="burgess1d"):
        get_problem("not-a-problem")


def test_registry_cardinality_and_modes():
    assert len(REGISTRY) == 8
    assert {p.mode for p in REGISTRY.values()} == {"forward", "inverse"}
    assert get_problem("efk2d-inv").beta == 1.0
    assert get_problem("efk2d-inv").gamma == pytest.approx(1e-4)
    assert get_problem("efk1d").gamma == pytest.approx(1e-3)
    assert get_problem("efk1d-ic-a").gamma == pytest.approx(1e-2)


def test_efk2d_inverse_beta_sweep():
    for beta in (1.0, 0.1, 0.01):
        prob = problems.efk2d_inverse(beta=beta)
        pts = sobol_spacetime(prob, 200)
        r = problems.interior_residual(prob, prob.exact_taylor, pts)
        assert np.max(np.abs(r)) <= 1e-7, beta


def test_laplace_boundary_stream_present_only_when_prescribed():
    prob = get_problem("efk1d-ic-a")
    assert prob.has_laplace_bc
    params = network.init_params(network.NetworkConfig(2, 2, 6, seed=0))
    pts = np.array([[0.5, 0.0], [0.2, 1.0]])
    streams = problems.boundary_residuals(prob, params, pts, np.array([0, 1]))
    assert len(streams) == 2
    burgess = get_problem("burgess1d")
    streams = problems.boundary_residuals(burgess, params, pts, np.array([0, 1]))
    assert len(streams) == 1
