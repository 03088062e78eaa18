"""
Geometry module for the topological charge lab.
Quadrature meshes on the sphere, Cartesian grids, finite-difference Jacobians,
Levi-Civita symbols and the unit triplet fields the charge integrals act on.

All lengths here are dimensionless; physical constants only enter in the
monopole and fermion modules.
"""
import itertools
import logging
from dataclasses import dataclass, field as dataclass_field
from functools import lru_cache
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from errors import InvalidGrid, InvalidMesh, LabError, OriginSingularity, StencilOutOfDomain, ZeroFieldPoint
from reductions import pairwise_sum

logger = logging.getLogger(__name__)

FOUR_PI = 4.0 * np.pi

# Default finite-difference step in field units
DEFAULT_STEP = 1e-3

# Norm below which a field point counts as zero
ZERO_FIELD_TOL = 1e-12

# Points closer than this to the origin are singular for radial fields
ORIGIN_TOL = 1e-12


def spherical_to_cartesian(theta, phi, r=1.0) -> np.ndarray:
    """Points r*(sin t cos p, sin t sin p, cos t) stacked on the last axis."""
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    s = np.sin(theta)
    return r * np.stack([s * np.cos(phi), s * np.sin(phi), np.cos(theta)], axis=-1)


@dataclass(frozen=True, eq=False)
class SphereMesh:
    """
    Quadrature nodes (colatitude, azimuth) with weights in steradians.

    Nodes are stored flat, theta-major; shape records (n_theta, n_phi).
    """
    theta: np.ndarray
    phi: np.ndarray
    weights: np.ndarray
    shape: Tuple[int, int]
    area: float = FOUR_PI

    def __post_init__(self):
        if np.any(self.weights <= 0):
            raise InvalidMesh("all quadrature weights must be positive")
        total = float(pairwise_sum(self.weights))
        if abs(total - self.area) > 1e-12 * max(1.0, self.area):
            raise InvalidMesh(f"weights sum to {total}, expected {self.area}")

    @property
    def size(self) -> int:
        return int(self.weights.shape[0])

    def unit_vectors(self) -> np.ndarray:
        """Outward unit normals at the nodes, shape (size, 3)."""
        return spherical_to_cartesian(self.theta, self.phi)

    def points(self, r: float) -> np.ndarray:
        """Node positions on the sphere of radius r."""
        return spherical_to_cartesian(self.theta, self.phi, r)

    def integrate(self, values) -> np.ndarray:
        """
        Weighted sum over the nodes with the deterministic pairwise tree.

        Args:
            values: shape (size,) or (size, ...)

        Returns:
            Integral over the unit sphere (steradian measure)
        """
        values = np.asarray(values)
        w = self.weights.reshape((-1,) + (1,) * (values.ndim - 1))
        return pairwise_sum(w * values)


def _check_count(name: str, value) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
        raise InvalidMesh(f"{name} must be an integer, got {value!r}")
    if value < 1:
        raise InvalidMesh(f"{name} must be >= 1, got {value}")
    return int(value)


def _azimuth_nodes(n_phi: int) -> np.ndarray:
    return 2.0 * np.pi * np.arange(n_phi) / n_phi


def _build_mesh(u: np.ndarray, wu: np.ndarray, n_phi: int, area: float) -> SphereMesh:
    theta = np.arccos(np.clip(u, -1.0, 1.0))
    phi = _azimuth_nodes(n_phi)
    th, ph = np.meshgrid(theta, phi, indexing='ij')
    weights = np.outer(wu, np.full(n_phi, 2.0 * np.pi / n_phi))
    return SphereMesh(theta=th.ravel(), phi=ph.ravel(), weights=weights.ravel(),
                      shape=(len(u), n_phi), area=area)


def sphere_mesh(n_theta: int, n_phi: int) -> SphereMesh:
    """
    Gauss-Legendre nodes in cos(theta) crossed with uniform azimuth nodes.

    Args:
        n_theta: number of Gauss nodes in cos(theta)
        n_phi: number of azimuth nodes on [0, 2*pi)

    Returns:
        SphereMesh whose weights sum to 4*pi
    """
    n_theta = _check_count('n_theta', n_theta)
    n_phi = _check_count('n_phi', n_phi)
    u, wu = np.polynomial.legendre.leggauss(n_theta)
    logger.debug(f"Sphere mesh {n_theta}x{n_phi}")
    return _build_mesh(u, wu, n_phi, FOUR_PI)


def polar_cap_mesh(theta_max: float, n_theta: int, n_phi: int) -> SphereMesh:
    """
    Mesh of the cap 0 <= theta <= theta_max.

    Weights sum to 2*pi*(1 - cos(theta_max)).
    """
    n_theta = _check_count('n_theta', n_theta)
    n_phi = _check_count('n_phi', n_phi)
    if not 0.0 < theta_max <= np.pi:
        raise InvalidMesh(f"cap angle must lie in (0, pi], got {theta_max}")
    t, wt = np.polynomial.legendre.leggauss(n_theta)
    lo = np.cos(theta_max)
    half = 0.5 * (1.0 - lo)
    u = lo + half * (t + 1.0)
    return _build_mesh(u, wt * half, n_phi, 2.0 * np.pi * (1.0 - lo))


@dataclass(frozen=True)
class Grid3:
    """Uniform Cartesian grid; nodes are origin + spacing * index."""
    origin: Tuple[float, float, float]
    spacing: float
    dims: Tuple[int, int, int]

    def __post_init__(self):
        if len(self.origin) != 3 or len(self.dims) != 3:
            raise InvalidGrid("origin and dims need three components")
        if not self.spacing > 0:
            raise InvalidGrid(f"spacing must be positive, got {self.spacing}")
        if any(int(d) < 1 for d in self.dims):
            raise InvalidGrid(f"dims must be >= 1 per axis, got {self.dims}")

    @classmethod
    def centered(cls, cells: int, extent: float) -> 'Grid3':
        """Cube of cells^3 cell centres filling [-extent, extent]^3."""
        if cells < 1 or not extent > 0:
            raise InvalidGrid(f"need cells >= 1 and extent > 0, got {cells}, {extent}")
        h = 2.0 * extent / cells
        start = -extent + 0.5 * h
        return cls(origin=(start, start, start), spacing=h, dims=(cells, cells, cells))

    @property
    def cell_volume(self) -> float:
        return self.spacing ** 3

    @property
    def size(self) -> int:
        return int(np.prod(self.dims))

    def node(self, i: int, j: int, k: int) -> np.ndarray:
        index = np.array([i, j, k], dtype=float)
        return np.asarray(self.origin, dtype=float) + self.spacing * index

    def nodes(self) -> np.ndarray:
        """All nodes, shape (size, 3), in i-major order."""
        idx = np.indices(self.dims).reshape(3, -1).T.astype(float)
        return np.asarray(self.origin, dtype=float) + self.spacing * idx

    def bounds(self) -> Tuple[np.ndarray, np.ndarray]:
        """Lower and upper corners of the box covered by the cells."""
        origin = np.asarray(self.origin, dtype=float)
        half = 0.5 * self.spacing
        upper = origin + self.spacing * (np.asarray(self.dims, dtype=float) - 1.0)
        return origin - half, upper + half

    def contains(self, points) -> np.ndarray:
        """True for points inside or on the cell box."""
        lo, hi = self.bounds()
        pts = np.asarray(points, dtype=float)
        return np.all((pts >= lo) & (pts <= hi), axis=-1)


AngularEvaluator = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class TripletField:
    """
    Three-component field phi^a(x).

    evaluator maps positions (..., 3) to values (..., 3). angular, when set,
    evaluates the field on spheres directly from (theta, phi), which keeps
    pole handling out of Cartesian coordinates.
    """
    evaluator: Callable[[np.ndarray], np.ndarray]
    unit: bool = False
    angular: Optional[AngularEvaluator] = None
    name: str = dataclass_field(default='field')

    def __call__(self, x) -> np.ndarray:
        return np.asarray(self.evaluator(np.asarray(x, dtype=float)), dtype=float)

    def on_sphere(self, theta, phi, r: float = 1.0) -> np.ndarray:
        """Field values at (theta, phi) on the sphere of radius r."""
        if self.angular is not None:
            return np.asarray(self.angular(np.asarray(theta, dtype=float),
                                           np.asarray(phi, dtype=float)), dtype=float)
        return self(spherical_to_cartesian(theta, phi, r))


def constant_field(value: Sequence[float]) -> TripletField:
    v = np.asarray(value, dtype=float)
    unit = abs(np.linalg.norm(v) - 1.0) < 1e-15

    def evaluate(x):
        return np.broadcast_to(v, np.shape(x)).copy()

    def angular(theta, phi):
        return np.broadcast_to(v, np.shape(theta) + (3,)).copy()

    return TripletField(evaluate, unit=unit, angular=angular, name=f"constant{tuple(v)}")


def linear_field(matrix) -> TripletField:
    """phi^a = M[a, i] x_i"""
    m = np.asarray(matrix, dtype=float)

    def evaluate(x):
        return x @ m.T

    return TripletField(evaluate, name='linear')


def hedgehog(n: int) -> TripletField:
    """
    Unit field (sin t cos n p, sin t sin n p, cos t) of winding n.

    Cartesian evaluation takes p = atan2(y, x), so p = 0 on the +x axis.
    """
    n = int(n)

    def angular(theta, phi):
        s = np.sin(theta)
        return np.stack([s * np.cos(n * phi), s * np.sin(n * phi), np.cos(theta)], axis=-1)

    def evaluate(x):
        rho = np.hypot(x[..., 0], x[..., 1])
        r = np.hypot(rho, x[..., 2])
        if np.any(r < ORIGIN_TOL):
            raise OriginSingularity("hedgehog field is undefined at the origin")
        phi = np.arctan2(x[..., 1], x[..., 0])
        s = rho / r
        return np.stack([s * np.cos(n * phi), s * np.sin(n * phi), x[..., 2] / r], axis=-1)

    return TripletField(evaluate, unit=True, angular=angular, name=f"hedgehog({n})")


def _unit_values(values: np.ndarray, where) -> np.ndarray:
    norms = np.asarray(np.linalg.norm(values, axis=-1))
    bad = np.atleast_1d(norms < ZERO_FIELD_TOL)
    if np.any(bad):
        first = int(np.flatnonzero(bad.ravel())[0])
        raise ZeroFieldPoint(where(first))
    return values / norms[..., None]


def normalize(field: TripletField) -> TripletField:
    """Pointwise phi / |phi|; raises ZeroFieldPoint where |phi| < 1e-12."""

    def evaluate(x):
        return _unit_values(field(x), lambda i: np.reshape(x, (-1, 3))[i])

    angular = None
    if field.angular is not None:
        def angular(theta, phi):
            where = lambda i: spherical_to_cartesian(np.ravel(theta)[i], np.ravel(phi)[i])
            return _unit_values(field.on_sphere(theta, phi), where)

    return TripletField(evaluate, unit=True, angular=angular, name=f"normalize({field.name})")


def _evaluate_stencil(field: TripletField, points: np.ndarray) -> np.ndarray:
    try:
        values = field(points)
    except (LabError, ValueError, ArithmeticError) as e:
        raise StencilOutOfDomain(f"{field.name} failed inside the stencil: {e}") from e
    if not np.all(np.isfinite(values)):
        raise StencilOutOfDomain(f"{field.name} is not finite inside the stencil")
    return values


def jacobian_batch(field: TripletField, points, h: float = DEFAULT_STEP) -> np.ndarray:
    """
    Second-order central-difference Jacobians at many points.

    Args:
        field: field to differentiate
        points: positions, shape (N, 3)
        h: stencil half-width

    Returns:
        Array (N, 3, 3) with entry [n, i, a] = d_i phi^a at points[n]
    """
    if not h > 0:
        raise StencilOutOfDomain(f"stencil step must be positive, got {h}")
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    offsets = h * np.eye(3)
    plus = _evaluate_stencil(field, pts[:, None, :] + offsets[None, :, :])
    minus = _evaluate_stencil(field, pts[:, None, :] - offsets[None, :, :])
    return (plus - minus) / (2.0 * h)


def jacobian(field: TripletField, x, h: float = DEFAULT_STEP) -> np.ndarray:
    """3x3 matrix with entry (i, a) = d_i phi^a at x."""
    return jacobian_batch(field, np.asarray(x, dtype=float)[None, :], h)[0]


def _parity(perm: Sequence[int]) -> int:
    inversions = sum(1 for i, j in itertools.combinations(range(len(perm)), 2) if perm[i] > perm[j])
    return -1 if inversions % 2 else 1


@lru_cache(maxsize=None)
def _levi_civita_cached(rank: int) -> np.ndarray:
    eps = np.zeros((rank,) * rank)
    for perm in itertools.permutations(range(rank)):
        eps[perm] = _parity(perm)
    eps.setflags(write=False)
    return eps


def levi_civita(rank: int) -> np.ndarray:
    """
    Dense Levi-Civita tensor of rank 3 or 4 with zero-based indices.

    eps[0, 1, 2] = +1 stands for eps_123 = +1; for rank 4, eps[0, 1, 2, 3] = +1
    is the eps^0123 = +1 convention used for the magnetic current.
    """
    if rank not in (3, 4):
        raise ValueError(f"only ranks 3 and 4 are supported, got {rank}")
    return _levi_civita_cached(rank)


def epsilon(*indices: int) -> int:
    """Levi-Civita symbol for 3 or 4 zero-based indices."""
    rank = len(indices)
    if rank not in (3, 4):
        raise ValueError(f"expected 3 or 4 indices, got {rank}")
    if any(i < 0 or i >= rank for i in indices):
        raise ValueError(f"indices must lie in 0..{rank - 1}, got {indices}")
    return int(levi_civita(rank)[tuple(indices)])
