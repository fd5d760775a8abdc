"""Training-point generation and quadrature grids.

Four point families are produced: interior, spatial-boundary (tagged per
face), temporal-boundary (t = 0 slice) and, for inverse problems, data
points with observed values. All families carry uniform Monte-Carlo
quadrature weights (domain measure / N).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

# Joe-Kuo direction numbers for the first three dimensions.
# dim 2: s=1, a=0, m=(1,); dim 3: s=2, a=1, m=(1, 3).
_SOBOL_POLY = {2: (1, 0, (1,)), 3: (2, 1, (1, 3))}
_SOBOL_BITS = 52


def _direction_integers(dim: int) -> np.ndarray:
    v = np.zeros(_SOBOL_BITS, dtype=np.uint64)
    if dim == 1:
        for k in range(_SOBOL_BITS):
            v[k] = np.uint64(1) << np.uint64(_SOBOL_BITS - 1 - k)
        return v
    s, a, m_init = _SOBOL_POLY[dim]
    m = list(m_init)
    for k in range(s, _SOBOL_BITS):
        new = m[k - s] ^ (m[k - s] << s)
        for i in range(1, s):
            if (a >> (s - 1 - i)) & 1:
                new ^= m[k - i] << i
        m.append(new)
    for k in range(_SOBOL_BITS):
        v[k] = np.uint64(m[k]) << np.uint64(_SOBOL_BITS - 1 - k)
    return v


def sobol_sequence(dim: int, n: int) -> np.ndarray:
    """First `n` nonzero terms of the Sobol sequence in [0,1]^dim."""
    if not 1 <= dim <= 3:
        raise ValueError(f"unsupported Sobol dimension {dim}")
    if n < 0:
        raise ValueError("n must be nonnegative")
    out = np.zeros((n, dim))
    if n == 0:
        return out
    directions = [_direction_integers(d + 1) for d in range(dim)]
    state = np.zeros(dim, dtype=np.uint64)
    scale = 0.5 ** _SOBOL_BITS
    for i in range(n):
        # Gray-code step: flip the direction of the lowest zero bit of i.
        c = 0
        k = i
        while k & 1:
            k >>= 1
            c += 1
        for d in range(dim):
            state[d] ^= directions[d][c]
        out[i] = state * scale
    return out


@dataclass(frozen=True)
class DomainSpec:
    spatial_dim: int
    time_horizon: float = 1.0

    def __post_init__(self):
        if self.spatial_dim not in (1, 2):
            raise ValueError("spatial_dim must be 1 or 2")
        if self.time_horizon <= 0:
            raise ValueError("time horizon must be positive")

    @property
    def n_faces(self):
        return 2 * self.spatial_dim

    @property
    def spacetime_measure(self):
        return self.time_horizon  # unit spatial box

    @property
    def boundary_measure(self):
        # per-face measure is T * (unit face area); faces of [0,1]^d have area 1
        return self.time_horizon * self.n_faces


@dataclass(frozen=True)
class SamplerConfig:
    strategy: str = "sobol"  # "sobol" | "random"
    n_int: int = 2048
    n_sb: int = 512
    n_tb: int = 512
    n_d: int = 0
    seed: int = 0

    def __post_init__(self):
        if self.strategy not in ("sobol", "random"):
            raise ValueError(f"unknown sampling strategy {self.strategy!r}")
        if self.n_int <= 0 or min(self.n_sb, self.n_tb, self.n_d) < 0:
            raise ValueError("point counts must be nonnegative")


@dataclass
class TrainingSet:
    interior: np.ndarray  # (N_int, 1+d)
    interior_weights: np.ndarray
    spatial_boundary: np.ndarray  # (N_sb, 1+d)
    sb_weights: np.ndarray
    sb_faces: np.ndarray  # face tag per boundary point
    temporal_boundary: np.ndarray  # (N_tb, d)
    tb_weights: np.ndarray
    data_points: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))
    data_values: np.ndarray = field(default_factory=lambda: np.zeros(0))
    data_weights: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def to_csv(self, path):
        dim = self.interior.shape[1]
        cols = ["family", "t"] + [f"x{i+1}" for i in range(dim - 1)] + [
            "weight",
            "face",
            "observed",
        ]
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(cols)
            for p, w in zip(self.interior, self.interior_weights):
                writer.writerow(["interior", *p, w, "", ""])
            for p, w, f in zip(self.spatial_boundary, self.sb_weights, self.sb_faces):
                writer.writerow(["spatial_boundary", *p, w, int(f), ""])
            for p, w in zip(self.temporal_boundary, self.tb_weights):
                writer.writerow(["temporal_boundary", 0.0, *p, w, "", ""])
            for p, g, w in zip(self.data_points, self.data_values, self.data_weights):
                writer.writerow(["data", *p, w, "", g])


def _unit_points(strategy, dim, n, rng):
    if strategy == "sobol":
        return sobol_sequence(dim, n)
    return rng.uniform(size=(n, dim))


def build_training_set(config: SamplerConfig, problem) -> TrainingSet:
    """Sample the point families for one problem.

    Inverse problems draw data points over the full space-time domain and
    observe the exact solution (identity observation operator).
    """
    domain: DomainSpec = problem.domain
    d, T = domain.spatial_dim, domain.time_horizon
    if config.n_int <= 128:
        raise ValueError("require N_int > 128")
    if problem.mode == "forward" and min(config.n_sb, config.n_tb) <= 64:
        raise ValueError("forward problems require N_sb, N_tb > 64")
    rng = np.random.default_rng(config.seed)

    interior = _unit_points(config.strategy, 1 + d, config.n_int, rng)
    interior[:, 0] *= T
    w_int = np.full(config.n_int, T / config.n_int)

    empty = np.zeros((0, 1 + d))
    tset = TrainingSet(
        interior=interior,
        interior_weights=w_int,
        spatial_boundary=empty,
        sb_weights=np.zeros(0),
        sb_faces=np.zeros(0, dtype=int),
        temporal_boundary=np.zeros((0, d)),
        tb_weights=np.zeros(0),
    )

    if problem.mode == "forward":
        # Spatial boundary: even split across the 2d faces, each face sampled
        # in (t, tangential coords) by a (d)-dimensional sequence.
        faces, pts, n_faces = [], [], domain.n_faces
        base, extra = divmod(config.n_sb, n_faces)
        for face in range(n_faces):
            n_face = base + (1 if face < extra else 0)
            u = _unit_points(config.strategy, d, n_face, rng)
            p = np.zeros((n_face, 1 + d))
            p[:, 0] = u[:, 0] * T
            axis = face // 2  # 0: x-faces, 1: y-faces
            side = face % 2  # 0: low, 1: high
            tangential = [i for i in range(d) if i != axis]
            for j, ax in enumerate(tangential):
                p[:, 1 + ax] = u[:, 1 + j]
            p[:, 1 + axis] = float(side)
            pts.append(p)
            faces.append(np.full(n_face, face))
        tset.spatial_boundary = np.concatenate(pts)
        tset.sb_faces = np.concatenate(faces)
        w_sb = np.concatenate(
            [np.full(len(p), T / len(p) / 1.0) for p in pts]
        )  # face measure T*1 split per face
        # normalize so the family sums to the boundary measure
        tset.sb_weights = w_sb * (domain.boundary_measure / w_sb.sum())

        tset.temporal_boundary = _unit_points(config.strategy, d, config.n_tb, rng)
        tset.tb_weights = np.full(config.n_tb, 1.0 / config.n_tb)
    else:
        if config.n_d <= 64:
            raise ValueError("inverse problems require N_d > 64")
        if problem.exact is None:
            raise ValueError("inverse problems need an observation generator")
        data = _unit_points(config.strategy, 1 + d, config.n_d, rng)
        data[:, 0] *= T
        tset.data_points = data
        tset.data_values = problem.exact(data)
        tset.data_weights = np.full(config.n_d, T / config.n_d)
    return tset


def trapezoid_weights(n: int, length: float = 1.0) -> np.ndarray:
    if n < 2:
        raise ValueError("need at least two nodes")
    w = np.full(n, length / (n - 1))
    w[0] *= 0.5
    w[-1] *= 0.5
    return w


@dataclass
class TestGrid:
    points: np.ndarray  # (N, 1+d) flattened tensor grid
    weights: np.ndarray  # composite trapezoid weights
    axes: tuple  # per-axis node arrays
    shape: tuple

    def reshape(self, values):
        return np.asarray(values).reshape(self.shape)


def test_grid(domain: DomainSpec, resolution: int) -> TestGrid:
    """Uniform tensor grid over [0,T] x [0,1]^d with trapezoid weights."""
    if resolution < 2:
        raise ValueError("resolution must be >= 2")
    axes = [np.linspace(0.0, domain.time_horizon, resolution)]
    axes += [np.linspace(0.0, 1.0, resolution) for _ in range(domain.spatial_dim)]
    wts = [trapezoid_weights(resolution, domain.time_horizon)]
    wts += [trapezoid_weights(resolution) for _ in range(domain.spatial_dim)]
    mesh = np.meshgrid(*axes, indexing="ij")
    points = np.stack([m.ravel() for m in mesh], axis=-1)
    weight = wts[0]
    for w in wts[1:]:
        weight = np.multiply.outer(weight, w)
    return TestGrid(points, weight.ravel(), tuple(axes), tuple(len(a) for a in axes))
