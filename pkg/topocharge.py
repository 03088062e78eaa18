"""
Topological charge module.
Charge density K0, surface winding number, magnetic charge M and the
topological charge Q = M / e of a unit triplet field.

For a unit field the density vanishes pointwise away from singular points, so
the surface integral is the authoritative evaluator; the volume form is only
exercised through the shell conservation check.
"""
import logging
from dataclasses import dataclass
from typing import Any, Dict, Tuple

import numpy as np

from errors import InvalidCharge, InvalidMesh, InvalidRadius, MeshTooCoarse
from geometry import (DEFAULT_STEP, FOUR_PI, SphereMesh, TripletField, jacobian_batch,
                      levi_civita)
from reductions import pairwise_sum, parallel_rows

logger = logging.getLogger(__name__)

# |W - round(W)| above this marks the mesh as too coarse
MESH_TOO_COARSE_THRESHOLD = 0.1

# |n_dirac - W| below this counts as consistent units
UNITS_CONSISTENCY_TOL = 1e-6

# Angular step of the five-point stencil used for tangential derivatives
ANGULAR_STEP = 1e-4


def _check_charge(e: float):
    if e == 0:
        raise InvalidCharge("electric charge e must be non-zero")


def charge_density_batch(field: TripletField, points, h: float = DEFAULT_STEP,
                         e: float = 1.0) -> np.ndarray:
    """
    K0 = -(1/2e) eps^ijk eps_abc d_i phi^a d_j phi^b d_k phi^c at many points.

    Args:
        field: unit triplet field
        points: positions, shape (N, 3)
        h: finite-difference step
        e: electric charge

    Returns:
        Density values, shape (N,)
    """
    _check_charge(e)
    jac = jacobian_batch(field, points, h)
    eps = levi_civita(3)
    contraction = np.einsum('ijk,abc,nia,njb,nkc->n', eps, eps, jac, jac, jac, optimize=True)
    return -contraction / (2.0 * e)


def charge_density(field: TripletField, x, h: float = DEFAULT_STEP, e: float = 1.0) -> float:
    """Charge density K0 at a single point; equals -(3/e) det(d phi)."""
    return float(charge_density_batch(field, np.asarray(x, dtype=float)[None, :], h, e)[0])


def _five_point(values_m2, values_m1, values_p1, values_p2, step: float) -> np.ndarray:
    return (values_m2 - 8.0 * values_m1 + 8.0 * values_p1 - values_p2) / (12.0 * step)


def _winding_integrand(field: TripletField, r: float, step: float):
    def integrand(rows: np.ndarray) -> np.ndarray:
        theta, phi = rows[:, 0], rows[:, 1]
        f = lambda t, p: field.on_sphere(t, p, r)
        d_theta = _five_point(f(theta - 2 * step, phi), f(theta - step, phi),
                              f(theta + step, phi), f(theta + 2 * step, phi), step)
        d_phi = _five_point(f(theta, phi - 2 * step), f(theta, phi - step),
                            f(theta, phi + step), f(theta, phi + 2 * step), step)
        triple = np.einsum('na,na->n', f(theta, phi), np.cross(d_theta, d_phi))
        # quadrature weights already carry sin(theta)
        return triple / np.sin(theta)
    return integrand


def winding_surface(field: TripletField, r: float, mesh: SphereMesh,
                    step: float = ANGULAR_STEP) -> float:
    """
    Degree of the field restricted to the sphere of radius r.

    W = (1/4 pi) * integral of phi . (d_theta phi x d_phi phi) dtheta dphi,
    the surface form of the magnetic charge with the 1/e factor stripped.

    Args:
        field: unit triplet field smooth on the sphere
        r: sphere radius
        mesh: quadrature mesh
        step: angular step of the tangential derivative stencil

    Returns:
        Winding number W (real)
    """
    if not r > 0:
        raise InvalidRadius(f"radius must be positive, got {r}")
    rows = np.column_stack([mesh.theta, mesh.phi])
    values = parallel_rows(_winding_integrand(field, r, step), rows)
    winding = float(mesh.integrate(values)) / FOUR_PI
    residual = abs(winding - round(winding))
    if residual > MESH_TOO_COARSE_THRESHOLD:
        logger.warning(f"{MeshTooCoarse.__name__}: winding {winding:.6f} of {field.name} "
                       f"is {residual:.3f} from an integer on mesh {mesh.shape}")
    return winding


def winding_solid_angle(field: TripletField, r: float, n_theta: int, n_phi: int) -> float:
    """
    Winding as the summed signed solid angle of the image triangles.

    The sphere is cut along a latitude-longitude lattice with nodes on the
    poles; every cell contributes two triangles. Exact for any lattice on which
    neighbouring images are less than pi apart.
    """
    if not r > 0:
        raise InvalidRadius(f"radius must be positive, got {r}")
    if n_theta < 2 or n_phi < 3:
        raise InvalidMesh(f"lattice {n_theta}x{n_phi} is too small")
    theta = np.linspace(0.0, np.pi, n_theta + 1)
    phi = 2.0 * np.pi * np.arange(n_phi) / n_phi
    th, ph = np.meshgrid(theta, phi, indexing='ij')
    spins = field.on_sphere(th, ph, r)
    a = spins[:-1, :]
    b = spins[1:, :]
    c = np.roll(spins[1:, :], -1, axis=1)
    d = np.roll(spins[:-1, :], -1, axis=1)

    def solid_angle(p, q, s):
        numerator = np.einsum('...a,...a->...', p, np.cross(q, s))
        denominator = (1.0 + np.einsum('...a,...a->...', p, q)
                       + np.einsum('...a,...a->...', q, s)
                       + np.einsum('...a,...a->...', s, p))
        return 2.0 * np.arctan2(numerator, denominator)

    omega = solid_angle(a, b, c) + solid_angle(a, c, d)
    return float(pairwise_sum(omega.ravel())) / FOUR_PI


def magnetic_charge(field: TripletField, e: float, r: float, mesh: SphereMesh) -> float:
    """M = W / e."""
    _check_charge(e)
    return winding_surface(field, r, mesh) / e


@dataclass(frozen=True)
class ChargeReport:
    """Winding, magnetic and topological charge of one field on one sphere."""
    winding: float
    magnetic_charge: float
    topological_charge: float
    nearest_integer: int
    winding_residual: float
    radius: float
    mesh: Tuple[int, int]
    mesh_too_coarse: bool
    n_dirac: float
    units_consistent: bool

    def to_dict(self) -> Dict[str, Any]:
        return {
            'winding': self.winding,
            'magnetic_charge': self.magnetic_charge,
            'topological_charge': self.topological_charge,
            'nearest_integer': self.nearest_integer,
            'winding_residual': self.winding_residual,
            'radius': self.radius,
            'mesh': list(self.mesh),
        }

    def diagnostics(self) -> Dict[str, Any]:
        """
        Flags that do not belong to the charge record itself.

        n_dirac is 2 e M / hbar_c, the index the Dirac condition assigns to
        M = g. It differs from the winding by a factor of two; the flag
        reports the discrepancy instead of resolving it.
        """
        return {
            'mesh_too_coarse': self.mesh_too_coarse,
            'n_winding': self.winding,
            'n_dirac': self.n_dirac,
            'units_consistent': self.units_consistent,
        }


def charge_report(field: TripletField, e: float, r: float, mesh: SphereMesh,
                  hbar_c: float = 1.0) -> ChargeReport:
    """Assemble W, M = W/e, Q = M/e and the integer diagnostics."""
    _check_charge(e)
    winding = winding_surface(field, r, mesh)
    magnetic = winding / e
    topological = magnetic / e
    nearest = int(round(winding))
    residual = abs(winding - nearest)
    n_dirac = 2.0 * e * magnetic / hbar_c
    report = ChargeReport(
        winding=winding,
        magnetic_charge=magnetic,
        topological_charge=topological,
        nearest_integer=nearest,
        winding_residual=residual,
        radius=float(r),
        mesh=tuple(mesh.shape),
        mesh_too_coarse=residual > MESH_TOO_COARSE_THRESHOLD,
        n_dirac=n_dirac,
        units_consistent=abs(n_dirac - winding) < UNITS_CONSISTENCY_TOL,
    )
    logger.info(f"Charge of {field.name} at r={r}: W={winding:.12f} M={magnetic:.12f} Q={topological:.12f}")
    return report


def shell_conservation_check(field: TripletField, r_in: float, r_out: float,
                             mesh: SphereMesh) -> float:
    """
    |W(r_out) - W(r_in)|, the charge enclosed by the shell r_in < |x| < r_out.

    Zero whenever the field has no singularity inside the shell.
    """
    if not 0 < r_in < r_out:
        raise InvalidRadius(f"need 0 < r_in < r_out, got {r_in}, {r_out}")
    return abs(winding_surface(field, r_out, mesh) - winding_surface(field, r_in, mesh))
