"""
Monopole module.
Dirac monopole potential on the two Wu-Yang patches, its field, flux and loop
circulation, and the single-valuedness argument that leads to the Dirac
quantization condition g = hbar_c * n / (2 e).
"""
import logging
from dataclasses import dataclass, replace
from enum import Enum
from typing import Any, Dict, Iterable, List, Optional, Tuple

import numpy as np

from errors import InvalidCharge, InvalidLoop, InvalidMonopole, InvalidRadius, OriginSingularity, StringSingularity
from geometry import ORIGIN_TOL, SphereMesh, polar_cap_mesh, sphere_mesh
from reductions import pairwise_sum

logger = logging.getLogger(__name__)

# Angular distance to the string below which the potential is refused
STRING_TOL = 1e-9

# |n - round(n)| below which the Dirac index counts as an integer
QUANTIZATION_TOL = 1e-9

DEFAULT_THETAS = (np.pi / 6, np.pi / 4, np.pi / 2, 3 * np.pi / 4)


class Patch(str, Enum):
    """Gauge patch; NORTH is regular on the pole axis, SOUTH on the string."""
    NORTH = 'north'
    SOUTH = 'south'


@dataclass(frozen=True)
class MonopoleConfig:
    """Monopole of strength g probed by a charge e, in units where only hbar*c appears."""
    g: float
    e: float = 1.0
    hbar_c: float = 1.0
    string_axis: Tuple[float, float, float] = (0.0, 0.0, -1.0)
    patch: Patch = Patch.NORTH

    def __post_init__(self):
        if self.e == 0:
            raise InvalidCharge("electric charge e must be non-zero")
        if not self.hbar_c > 0:
            raise InvalidMonopole(f"hbar_c must be positive, got {self.hbar_c}")
        if abs(np.linalg.norm(self.string_axis) - 1.0) > 1e-12:
            raise InvalidMonopole(f"string_axis must be a unit vector, got {self.string_axis}")
        object.__setattr__(self, 'patch', Patch(self.patch))
        object.__setattr__(self, 'string_axis', tuple(float(c) for c in self.string_axis))

    def with_patch(self, patch: Patch) -> 'MonopoleConfig':
        return replace(self, patch=Patch(patch))

    def frame(self) -> np.ndarray:
        """
        Rows (e1, e2, u) of an orthonormal frame whose pole axis u points away
        from the string. For the default string along -z this is the identity.
        """
        u = -np.asarray(self.string_axis, dtype=float)
        helper = np.array([1.0, 0.0, 0.0]) if abs(u[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
        e1 = helper - np.dot(helper, u) * u
        e1 = e1 / np.linalg.norm(e1)
        e2 = np.cross(u, e1)
        return np.vstack([e1, e2, u])


@dataclass(frozen=True)
class Loop:
    """Circle of colatitude theta (about the pole axis) at the given radius."""
    theta: float
    radius: float = 1.0
    samples: int = 256

    def __post_init__(self):
        if not 0.0 <= self.theta <= np.pi:
            raise InvalidLoop(f"colatitude must lie in [0, pi], got {self.theta}")
        if not self.radius > 0:
            raise InvalidLoop(f"radius must be positive, got {self.radius}")
        if self.samples < 3:
            raise InvalidLoop(f"need at least 3 samples, got {self.samples}")

    def azimuths(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.samples) / self.samples

    def geometry(self, frame: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """
        Sample points and tangents dx/dphi in global coordinates.

        The loop is periodic: the sample after the last is the first.
        """
        phi = self.azimuths()
        s, c = np.sin(self.theta), np.cos(self.theta)
        local = self.radius * np.column_stack([s * np.cos(phi), s * np.sin(phi), np.full_like(phi, c)])
        tangent = self.radius * np.column_stack([-s * np.sin(phi), s * np.cos(phi), np.zeros_like(phi)])
        return local @ frame, tangent @ frame


def _as_points(x) -> np.ndarray:
    return np.asarray(x, dtype=float)


def _check_origin(r: np.ndarray):
    if np.any(r < ORIGIN_TOL):
        raise OriginSingularity("field point coincides with the monopole")


def vector_potential(cfg: MonopoleConfig, x) -> np.ndarray:
    """
    Wu-Yang potential of the active patch.

    NORTH: A = g (1 - cos t) / (r sin t) e_phi, singular along the string.
    SOUTH: A = -g (1 + cos t) / (r sin t) e_phi, singular along the pole axis.

    Args:
        cfg: monopole configuration
        x: positions (..., 3)

    Returns:
        A at x, same shape as x
    """
    pts = _as_points(x)
    frame = cfg.frame()
    local = pts @ frame.T
    xl, yl, zl = local[..., 0], local[..., 1], local[..., 2]
    rho = np.hypot(xl, yl)
    r = np.hypot(rho, zl)
    _check_origin(r)
    if cfg.patch is Patch.NORTH:
        angle = np.arctan2(rho, -zl)
        denominator = r * (r + zl)
        sign = 1.0
    else:
        angle = np.arctan2(rho, zl)
        denominator = r * (r - zl)
        sign = -1.0
    on_string = np.atleast_1d(angle < STRING_TOL)
    if np.any(on_string):
        first = int(np.flatnonzero(on_string.ravel())[0])
        raise StringSingularity(np.reshape(pts, (-1, 3))[first])
    coefficient = np.asarray(sign * cfg.g / denominator)
    azimuthal = np.stack([-yl, xl, np.zeros_like(zl)], axis=-1) @ frame
    return coefficient[..., None] * azimuthal


def b_field(cfg: MonopoleConfig, x) -> np.ndarray:
    """B = g x / |x|^3, the same on both patches."""
    pts = _as_points(x)
    r = np.linalg.norm(pts, axis=-1)
    _check_origin(r)
    return cfg.g * pts / np.asarray(r ** 3)[..., None]


def loop_circulation(cfg: MonopoleConfig, loop: Loop) -> float:
    """
    Closed line integral of A around the loop, trapezoid rule in azimuth.

    For the NORTH patch this equals 2 pi g (1 - cos theta).
    """
    points, tangents = loop.geometry(cfg.frame())
    integrand = np.einsum('na,na->n', vector_potential(cfg, points), tangents)
    return float(pairwise_sum(integrand)) * 2.0 * np.pi / loop.samples


def patch_difference(cfg: MonopoleConfig, loop: Loop) -> float:
    """Circulation on NORTH minus SOUTH; the string carries 4 pi g."""
    north = loop_circulation(cfg.with_patch(Patch.NORTH), loop)
    south = loop_circulation(cfg.with_patch(Patch.SOUTH), loop)
    return north - south


def sphere_flux(cfg: MonopoleConfig, mesh: SphereMesh, r: float) -> float:
    """Outward flux of B through the sphere of radius r; 4 pi g for any r."""
    if not r > 0:
        raise InvalidRadius(f"radius must be positive, got {r}")
    normals = mesh.unit_vectors()
    radial = np.einsum('na,na->n', b_field(cfg, r * normals), normals)
    return float(mesh.integrate(radial * r * r))


def polar_cap_flux(cfg: MonopoleConfig, theta: float, r: float = 1.0,
                   n_theta: int = 32, n_phi: int = 64) -> float:
    """Flux of B through the cap around the pole axis bounded by colatitude theta."""
    if not r > 0:
        raise InvalidRadius(f"radius must be positive, got {r}")
    # degenerate loop, the cap has no area
    if theta == 0.0:
        return 0.0
    cap = polar_cap_mesh(theta, n_theta, n_phi)
    normals = cap.unit_vectors() @ cfg.frame()
    radial = np.einsum('na,na->n', b_field(cfg, r * normals), normals)
    return float(cap.integrate(radial * r * r))


def single_valuedness_phase(cfg: MonopoleConfig, mesh: Optional[SphereMesh] = None) -> complex:
    """
    exp(-i e Phi / hbar_c) with Phi the flux through an enclosing sphere.

    Equal to 1 exactly when g sits on the Dirac lattice.
    """
    mesh = mesh or sphere_mesh(16, 32)
    flux = sphere_flux(cfg, mesh, 1.0)
    return complex(np.exp(-1j * cfg.e * flux / cfg.hbar_c))


def loop_phase(cfg: MonopoleConfig, loop: Loop) -> complex:
    """exp(-i e circulation / hbar_c) for the active patch."""
    return complex(np.exp(-1j * cfg.e * loop_circulation(cfg, loop) / cfg.hbar_c))


def quantization_index(cfg: MonopoleConfig, tol: float = QUANTIZATION_TOL) -> Tuple[float, bool]:
    """
    n = 2 e g / hbar_c and whether it is an integer.

    Returns:
        tuple: (n, is_quantized)
    """
    n = 2.0 * cfg.e * cfg.g / cfg.hbar_c
    return n, abs(n - round(n)) < tol


def quantized_topological_charge(n: float, e: float, hbar_c: float = 1.0) -> float:
    """Q = hbar_c n / (2 e^2)."""
    if e == 0:
        raise InvalidCharge("electric charge e must be non-zero")
    return hbar_c * n / (2.0 * e * e)


def dirac_lattice_strength(k: int, e: float, hbar_c: float = 1.0) -> float:
    """Magnetic strength g = k hbar_c / (2 e) of the k-th lattice point."""
    if e == 0:
        raise InvalidCharge("electric charge e must be non-zero")
    return k * hbar_c / (2.0 * e)


def circulation_table(cfg: MonopoleConfig, thetas: Iterable[float] = DEFAULT_THETAS,
                      samples: int = 256, radius: float = 1.0) -> List[Tuple[float, float]]:
    """(theta, circulation) for each colatitude on the active patch."""
    return [(float(t), loop_circulation(cfg, Loop(theta=t, radius=radius, samples=samples)))
            for t in thetas]


def monopole_report(cfg: MonopoleConfig, thetas: Iterable[float] = DEFAULT_THETAS,
                    samples: int = 256, mesh: Optional[SphereMesh] = None,
                    tol: float = QUANTIZATION_TOL) -> Dict[str, Any]:
    """
    Flux, circulations and Dirac index of one monopole.

    Returns:
        Dict with keys g, e, hbar_c, flux, circulation_table, n, is_quantized, Q
    """
    mesh = mesh or sphere_mesh(16, 32)
    flux = sphere_flux(cfg, mesh, 1.0)
    n, is_quantized = quantization_index(cfg, tol)
    table = circulation_table(cfg, thetas, samples)
    logger.info(f"Monopole g={cfg.g} e={cfg.e}: flux={flux:.12f} n={n:.12f} quantized={is_quantized}")
    return {
        'g': cfg.g,
        'e': cfg.e,
        'hbar_c': cfg.hbar_c,
        'flux': flux,
        'circulation_table': [[t, v] for t, v in table],
        'n': n,
        'is_quantized': is_quantized,
        'Q': quantized_topological_charge(n, cfg.e, cfg.hbar_c),
    }
