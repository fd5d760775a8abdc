"""Concrete reaction-diffusion problem instances.

Each problem bundles its differential operator, source, boundary/initial
data and (when available) the closed-form exact solution. Residuals are
evaluated through the Taylor engine so that fourth-order and mixed
derivatives are exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import network, tape
from .sampling import DomainSpec, trapezoid_weights
from .taylor import IndexSet, TaylorScalar, extract_derivative, index_set, taylor_lift

PI = np.pi


@dataclass(frozen=True)
class ProblemSpec:
    name: str
    domain: DomainSpec
    mode: str  # "forward" | "inverse"
    operator_id: str  # "Burgess1D" | "EFK1D" | "EFK2D"
    gamma: float = 0.0
    beta: float = 0.0
    source: Optional[Callable] = None  # f(points) for EFK problems
    initial: Optional[Callable] = None  # u0(x points)
    boundary_u: Optional[Callable] = None  # (face, points) -> Dirichlet trace
    boundary_lap: Optional[Callable] = None  # (face, points) -> laplacian trace
    exact: Optional[Callable] = None  # u(points)
    exact_taylor: Optional[Callable] = None  # coords -> TaylorScalar

    def __post_init__(self):
        if self.mode not in ("forward", "inverse"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode == "forward" and (self.initial is None or self.boundary_u is None):
            raise ValueError("forward problems need initial and boundary data")
        if self.mode == "inverse" and self.exact is None:
            raise ValueError("inverse problems need an exact solution for observations")
        if self.operator_id.startswith("EFK") and self.gamma <= 0:
            raise ValueError("EFK problems require gamma > 0")

    @property
    def index_set(self) -> IndexSet:
        if self.operator_id == "Burgess1D":
            return index_set((1, 2), ((1, 0), (0, 2)))
        if self.operator_id == "EFK1D":
            return index_set((1, 4), ((1, 0), (0, 4)))
        return index_set((1, 4, 4), ((1, 0, 0), (0, 4, 0), (0, 0, 4), (0, 2, 2)))

    @property
    def value_index_set(self) -> IndexSet:
        return index_set((0,) * (1 + self.domain.spatial_dim))

    @property
    def has_laplace_bc(self) -> bool:
        return self.boundary_lap is not None


def as_model(model):
    """Normalize NetworkParams / callables to coords -> TaylorScalar."""
    if isinstance(model, network.NetworkParams):
        return lambda coords: network.forward(model.layers, coords)
    return model


def lift_coords(points: np.ndarray, iset: IndexSet):
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    return [taylor_lift(points[:, j], j, iset) for j in range(points.shape[1])]


def const_coords(points: np.ndarray, iset: IndexSet):
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    return [
        TaylorScalar.constant(points[:, j], iset) for j in range(points.shape[1])
    ]


def interior_residual_node(problem: ProblemSpec, model, points) -> tape.Node:
    """PDE residual at interior points as a tape node of shape (N,)."""
    model = as_model(model)
    iset = problem.index_set
    u = model(lift_coords(points, iset))
    u0 = tape.take_index(u.data, 0)
    points = np.atleast_2d(points)
    if problem.operator_id == "Burgess1D":
        u_t = extract_derivative(u, (1, 0))
        u_xx = extract_derivative(u, (0, 2))
        reaction = tape.exp(-u0) + 0.5 * tape.exp(-2.0 * u0)
        return u_t - 0.5 * u_xx - reaction
    if problem.operator_id == "EFK1D":
        u_t = extract_derivative(u, (1, 0))
        u_xx = extract_derivative(u, (0, 2))
        u_xxxx = extract_derivative(u, (0, 4))
        res = u_t + problem.gamma * u_xxxx - u_xx + u0**3 - u0
    else:
        u_t = extract_derivative(u, (1, 0, 0))
        lap = extract_derivative(u, (0, 2, 0)) + extract_derivative(u, (0, 0, 2))
        bilap = (
            extract_derivative(u, (0, 4, 0))
            + 2.0 * extract_derivative(u, (0, 2, 2))
            + extract_derivative(u, (0, 0, 4))
        )
        res = u_t + problem.gamma * bilap - lap + u0**3 - u0
    if problem.source is not None:
        res = res - tape.Node(problem.source(points))
    return res


def interior_residual(problem: ProblemSpec, model, point) -> np.ndarray:
    """Residual values (no gradient bookkeeping kept by the caller)."""
    return np.asarray(interior_residual_node(problem, model, point).value)


def boundary_residual_nodes(problem: ProblemSpec, model, points, faces):
    """Residual streams on the spatial boundary.

    Returns [u-trace residual] for Dirichlet-only problems and
    [u-trace, laplacian-trace] where a laplacian condition is prescribed.
    """
    if problem.mode != "forward":
        raise ValueError("boundary data is unknown for inverse problems")
    model = as_model(model)
    points = np.atleast_2d(points)
    faces = np.asarray(faces)
    need_lap = problem.has_laplace_bc
    iset = problem.index_set if need_lap else problem.value_index_set
    u = model(lift_coords(points, iset) if need_lap else const_coords(points, iset))
    u0 = tape.take_index(u.data, 0)

    g_u = np.zeros(len(points))
    for face in np.unique(faces):
        m = faces == face
        g_u[m] = problem.boundary_u(int(face), points[m])
    streams = [u0 - tape.Node(g_u)]
    if need_lap:
        if problem.operator_id == "EFK1D":
            lap = extract_derivative(u, (0, 2))
        else:
            lap = extract_derivative(u, (0, 2, 0)) + extract_derivative(u, (0, 0, 2))
        g_lap = np.zeros(len(points))
        for face in np.unique(faces):
            m = faces == face
            g_lap[m] = problem.boundary_lap(int(face), points[m])
        streams.append(lap - tape.Node(g_lap))
    return streams


def boundary_residuals(problem: ProblemSpec, model, point, face) -> list:
    nodes = boundary_residual_nodes(problem, model, point, np.atleast_1d(face))
    return [np.asarray(n.value) for n in nodes]


def temporal_residual_node(problem: ProblemSpec, model, x_points) -> tape.Node:
    if problem.mode != "forward":
        raise ValueError("initial data is unknown for inverse problems")
    model = as_model(model)
    x_points = np.atleast_2d(x_points)
    pts = np.concatenate([np.zeros((len(x_points), 1)), x_points], axis=1)
    iset = problem.value_index_set
    u = model(const_coords(pts, iset))
    return tape.take_index(u.data, 0) - tape.Node(problem.initial(x_points))


def data_residual_node(problem: ProblemSpec, model, points, observed) -> tape.Node:
    model = as_model(model)
    iset = problem.value_index_set
    u = model(const_coords(points, iset))
    return tape.take_index(u.data, 0) - tape.Node(np.asarray(observed))


def exact_solution(problem: ProblemSpec, points) -> np.ndarray:
    if problem.exact is None:
        raise ValueError(f"problem {problem.name} has no exact solution")
    return problem.exact(np.atleast_2d(points))


def efk_energy(model, t: float, resolution: int, gamma: float, spatial_dim: int = 1):
    """Trapezoid approximation of the EFK energy at a fixed time."""
    model = as_model(model)
    axes = [np.linspace(0.0, 1.0, resolution) for _ in range(spatial_dim)]
    mesh = np.meshgrid(*axes, indexing="ij")
    xs = np.stack([m.ravel() for m in mesh], axis=-1)
    n = len(xs)
    iset = index_set((0,) + (2,) * spatial_dim)
    coords = [TaylorScalar.constant(np.full(n, float(t)), iset)]
    coords += [taylor_lift(xs[:, j], 1 + j, iset) for j in range(spatial_dim)]
    u = model(coords)
    vals = u.data.value
    u0 = vals[0]
    if spatial_dim == 1:
        grad_sq = u.coefficient((0, 1)) ** 2
        lap = 2.0 * u.coefficient((0, 2))
    else:
        grad_sq = u.coefficient((0, 1, 0)) ** 2 + u.coefficient((0, 0, 1)) ** 2
        lap = 2.0 * (u.coefficient((0, 2, 0)) + u.coefficient((0, 0, 2)))
    density = 0.5 * gamma * lap**2 + 0.5 * grad_sq + 0.25 * (1.0 - u0**2) ** 2
    w = trapezoid_weights(resolution)
    weight = w
    for _ in range(spatial_dim - 1):
        weight = np.multiply.outer(weight, w)
    return float((weight.ravel() * density).sum())


# -- problem registry -----------------------------------------------------


def _burgess_exact(points):
    points = np.atleast_2d(points)
    return np.log(points[:, 1] + points[:, 0] + 2.0)


def _burgess_exact_taylor(coords):
    t, x = coords
    return (x + t + 2.0).log()


def _efk1d_exact(points):
    points = np.atleast_2d(points)
    return np.exp(-points[:, 0]) * np.sin(PI * points[:, 1])


def _efk1d_exact_taylor(coords):
    t, x = coords
    return (-t).exp() * (PI * x).sin()


def _efk1d_source(gamma):
    def src(points):
        points = np.atleast_2d(points)
        t, x = points[:, 0], points[:, 1]
        s = np.sin(PI * x)
        return np.exp(-t) * s * (gamma * PI**4 + PI**2 - 2.0 + np.exp(-2.0 * t) * s**2)

    return src


def _efk2d_exact(points):
    points = np.atleast_2d(points)
    return (
        np.exp(-points[:, 0]) * np.sin(PI * points[:, 1]) * np.sin(PI * points[:, 2])
    )


def _efk2d_exact_taylor(coords):
    t, x, y = coords
    return (-t).exp() * (PI * x).sin() * (PI * y).sin()


def _efk2d_source(gamma):
    def src(points):
        u = _efk2d_exact(points)
        return u * (4.0 * gamma * PI**4 + 2.0 * PI**2 - 2.0) + u**3

    return src


def _gauss_exact(beta):
    def exact(points):
        points = np.atleast_2d(points)
        r2 = (points[:, 1] - 0.5) ** 2 + (points[:, 2] - 0.5) ** 2
        return np.exp(-points[:, 0]) * np.exp(-r2 / beta)

    return exact


def _gauss_exact_taylor(beta):
    def exact(coords):
        t, x, y = coords
        r2 = (x - 0.5) ** 2 + (y - 0.5) ** 2
        return ((-t) - r2 * (1.0 / beta)).exp()

    return exact


def _gauss_source(gamma, beta):
    def src(points):
        points = np.atleast_2d(points)
        t = points[:, 0]
        rx = points[:, 1] - 0.5
        ry = points[:, 2] - 0.5
        X = np.exp(-rx**2 / beta)
        Y = np.exp(-ry**2 / beta)
        w = np.exp(-t) * X * Y

        def d2(r):
            return 4.0 * r**2 / beta**2 - 2.0 / beta

        def d4(r):
            return 16.0 * r**4 / beta**4 - 48.0 * r**2 / beta**3 + 12.0 / beta**2

        lap = w * (d2(rx) + d2(ry))
        bilap = w * (d4(rx) + 2.0 * d2(rx) * d2(ry) + d4(ry))
        return -w + gamma * bilap - lap + w**3 - w

    return src


def _dirichlet_from_exact(exact):
    return lambda face, points: exact(points)


def _zero_bc(face, points):
    return np.zeros(len(np.atleast_2d(points)))


def _registry():
    problems = {}

    d1 = DomainSpec(1)
    d2 = DomainSpec(2)

    problems["burgess1d"] = ProblemSpec(
        name="burgess1d",
        domain=d1,
        mode="forward",
        operator_id="Burgess1D",
        initial=lambda xs: np.log(np.atleast_2d(xs)[:, 0] + 2.0),
        boundary_u=_dirichlet_from_exact(_burgess_exact),
        exact=_burgess_exact,
        exact_taylor=_burgess_exact_taylor,
    )

    gamma = 0.001
    problems["efk1d"] = ProblemSpec(
        name="efk1d",
        domain=d1,
        mode="forward",
        operator_id="EFK1D",
        gamma=gamma,
        source=_efk1d_source(gamma),
        initial=lambda xs: np.sin(PI * np.atleast_2d(xs)[:, 0]),
        boundary_u=_zero_bc,
        exact=_efk1d_exact,
        exact_taylor=_efk1d_exact_taylor,
    )

    for tag, power in (("a", 3), ("b", 2)):
        problems[f"efk1d-ic-{tag}"] = ProblemSpec(
            name=f"efk1d-ic-{tag}",
            domain=d1,
            mode="forward",
            operator_id="EFK1D",
            gamma=0.01,
            initial=(
                lambda xs, p=power: (
                    np.atleast_2d(xs)[:, 0] ** p * (1.0 - np.atleast_2d(xs)[:, 0]) ** p
                )
            ),
            boundary_u=_zero_bc,
            boundary_lap=_zero_bc,
        )

    gamma2 = 0.01
    problems["efk2d"] = ProblemSpec(
        name="efk2d",
        domain=d2,
        mode="forward",
        operator_id="EFK2D",
        gamma=gamma2,
        source=_efk2d_source(gamma2),
        initial=lambda xs: np.sin(PI * np.atleast_2d(xs)[:, 0])
        * np.sin(PI * np.atleast_2d(xs)[:, 1]),
        boundary_u=_dirichlet_from_exact(_efk2d_exact),
        boundary_lap=lambda face, points: -2.0 * PI**2 * _efk2d_exact(points),
        exact=_efk2d_exact,
        exact_taylor=_efk2d_exact_taylor,
    )

    problems["burgess1d-inv"] = ProblemSpec(
        name="burgess1d-inv",
        domain=d1,
        mode="inverse",
        operator_id="Burgess1D",
        exact=_burgess_exact,
        exact_taylor=_burgess_exact_taylor,
    )

    problems["efk1d-inv"] = ProblemSpec(
        name="efk1d-inv",
        domain=d1,
        mode="inverse",
        operator_id="EFK1D",
        gamma=gamma,
        source=_efk1d_source(gamma),
        exact=_efk1d_exact,
        exact_taylor=_efk1d_exact_taylor,
    )

    problems["efk2d-inv"] = efk2d_inverse(beta=1.0)

    return problems


def efk2d_inverse(beta: float = 1.0, gamma: float = 0.0001) -> ProblemSpec:
    return ProblemSpec(
        name="efk2d-inv",
        domain=DomainSpec(2),
        mode="inverse",
        operator_id="EFK2D",
        gamma=gamma,
        beta=beta,
        source=_gauss_source(gamma, beta),
        exact=_gauss_exact(beta),
        exact_taylor=_gauss_exact_taylor(beta),
    )


REGISTRY = _registry()


def get_problem(name: str) -> ProblemSpec:
    try:
        return REGISTRY[name]
    except KeyError:
        raise KeyError(
            f"unknown problem {name!r}; available: {sorted(REGISTRY)}"
        ) from None
