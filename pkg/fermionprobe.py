"""
Fermion probe module.
Squares the Dirac equation in the monopole background, keeps the extra spin
source term f = Sigma.B - i e rho1 (Sigma.E), and propagates a plane wave
through it with the first Born iterate

    Psi1(x) = psi0(x) - sum over cells G(x, x') f(x') psi0(x') dV.

Around a closed loop the ratio of Psi1 to the reference phase exp(i(P - eA).x)
is constant for the boson (f = 0) and varies for the fermion; the spread of
that ratio is the phase-constancy metric.
"""
import logging
from dataclasses import dataclass, field, replace
from typing import Any, Dict, Iterable, List, Tuple

import numpy as np
from scipy.stats import circmean

from diracalg import gamma_basis, sigma_spin
from errors import CoincidentPoints, DegenerateSample, GeometryOverlap, InvalidGrid
from geometry import Grid3
from monopole import Loop, MonopoleConfig, Patch, b_field, vector_potential
from reductions import pairwise_sum, parallel_rows

logger = logging.getLogger(__name__)

COINCIDENT_TOL = 1e-12

# |D| below this makes a sample degenerate
DEGENERATE_TOL = 1e-12

MIN_LOOP_SAMPLES = 8

# Metrics below this are numerical zero when forming the fermion/boson ratio
METRIC_FLOOR = 1e-15

# Fermion metric must exceed the boson metric by this factor to flag non-quantization
FLAG_FACTOR = 100.0

SPIN_X = (1 / np.sqrt(2), 1 / np.sqrt(2), 0.0, 0.0)


def _default_grid() -> Grid3:
    return Grid3.centered(16, 2.0)


def _default_loop() -> Loop:
    return Loop(theta=np.pi / 2, radius=4.0, samples=64)


@dataclass(frozen=True)
class ProbeConfig:
    """
    Geometry of one probe run: monopole, incident wave, source grid with its
    origin ball and string tube removed, and the evaluation loop.
    """
    monopole: MonopoleConfig
    k: float = 1.0
    grid: Grid3 = field(default_factory=_default_grid)
    loop: Loop = field(default_factory=_default_loop)
    r_cut: float = 0.5
    rho_cut: float = 0.2
    source_scale: float = 1.0
    spinor: Tuple[complex, ...] = SPIN_X
    direction: Tuple[float, float, float] = (1.0, 0.0, 0.0)

    def __post_init__(self):
        if not self.r_cut > 0 or not self.rho_cut > 0:
            raise InvalidGrid(f"cutoffs must be positive, got r_cut={self.r_cut}, rho_cut={self.rho_cut}")
        if not self.k > 0:
            raise InvalidGrid(f"wavenumber must be positive, got {self.k}")
        u = np.asarray(self.spinor, dtype=complex)
        if u.shape != (4,) or abs(np.linalg.norm(u) - 1.0) > 1e-12:
            raise InvalidGrid("incident spinor must be a normalized 4-spinor")
        d = np.asarray(self.direction, dtype=float)
        if d.shape != (3,) or abs(np.linalg.norm(d) - 1.0) > 1e-12:
            raise InvalidGrid("incident direction must be a unit 3-vector")
        object.__setattr__(self, 'spinor', tuple(complex(c) for c in u))
        object.__setattr__(self, 'direction', tuple(float(c) for c in d))

    @property
    def momentum(self) -> np.ndarray:
        return self.k * np.asarray(self.direction)

    def with_cutoffs(self, factor: float) -> 'ProbeConfig':
        return replace(self, r_cut=self.r_cut * factor, rho_cut=self.rho_cut * factor)


@dataclass(frozen=True, eq=False)
class WaveSample:
    """Wave function and reference phase at the loop sample points."""
    points: np.ndarray
    psi: np.ndarray
    reference: np.ndarray
    spinor: np.ndarray

    def ratios(self) -> np.ndarray:
        """D(x_j) = u^dagger Psi(x_j) / reference phase at x_j."""
        return (self.psi @ np.conj(self.spinor)) / self.reference


def wavenumber(energy: float, mass: float) -> float:
    """k from p^2 = E^2 - m^2."""
    p2 = energy * energy - mass * mass
    if not p2 > 0:
        raise ValueError(f"need E^2 > m^2 for a propagating wave, got E={energy}, m={mass}")
    return float(np.sqrt(p2))


def reference_phase(cfg: ProbeConfig, points) -> np.ndarray:
    """exp(i (P - e A(x)) . x)"""
    pts = np.asarray(points, dtype=float)
    shifted = cfg.momentum - cfg.monopole.e * vector_potential(cfg.monopole, pts)
    return np.exp(1j * np.einsum('...a,...a->...', shifted, pts))


def incident_wave(cfg: ProbeConfig, points) -> np.ndarray:
    """Plane-wave spinor psi0(x) = u exp(i (P - e A) . x), shape (..., 4)."""
    return reference_phase(cfg, points)[..., None] * np.asarray(cfg.spinor)


def electric_field(cfg: ProbeConfig, points) -> np.ndarray:
    """The monopole is static, so E vanishes everywhere."""
    return np.zeros_like(np.asarray(points, dtype=float))


def source_matrices(cfg: ProbeConfig, points) -> np.ndarray:
    """
    f(x) = Sigma.B(x) - i e rho1 (Sigma.E(x)) at many points, shape (..., 4, 4).
    """
    spin = sigma_spin()
    rho1 = gamma_basis().rho1
    magnetic = np.einsum('...k,kab->...ab', b_field(cfg.monopole, points), spin)
    electric = np.einsum('...k,kab->...ab', electric_field(cfg, points), spin)
    electric = -1j * cfg.monopole.e * np.einsum('ab,...bc->...ac', rho1, electric)
    return cfg.source_scale * (magnetic + electric)


def source_term(cfg: ProbeConfig, x) -> np.ndarray:
    """Hermitian 4x4 source matrix at a single point."""
    return source_matrices(cfg, np.asarray(x, dtype=float)[None, :])[0]


def greens_kernel(k: float, x, x_prime) -> complex:
    """Outgoing Helmholtz kernel -exp(i k d) / (4 pi d) with d = |x - x'|."""
    d = float(np.linalg.norm(np.asarray(x, dtype=float) - np.asarray(x_prime, dtype=float)))
    if d < COINCIDENT_TOL:
        raise CoincidentPoints(f"kernel evaluated at coincident points {tuple(x)}")
    return complex(_kernel(k, np.asarray(d)))


def _kernel(k: float, d: np.ndarray) -> np.ndarray:
    return -np.exp(1j * k * d) / (4.0 * np.pi * d)


def source_mask(cfg: ProbeConfig) -> np.ndarray:
    """Grid cells kept after removing the origin ball and the active string tube."""
    nodes = cfg.grid.nodes()
    r = np.linalg.norm(nodes, axis=1)
    axis = np.asarray(cfg.monopole.string_axis, dtype=float)
    if cfg.monopole.patch is Patch.SOUTH:
        axis = -axis
    along = nodes @ axis
    off_axis = np.linalg.norm(nodes - along[:, None] * axis, axis=1)
    in_tube = (along > 0) & (off_axis < cfg.rho_cut)
    return (r >= cfg.r_cut) & ~in_tube


def born_correction(cfg: ProbeConfig) -> WaveSample:
    """
    First Born iterate of the squared Dirac equation at the loop points.

    Raises:
        GeometryOverlap: a loop point lies inside the source grid box
    """
    points, _ = cfg.loop.geometry(cfg.monopole.frame())
    if np.any(cfg.grid.contains(points)):
        raise GeometryOverlap("evaluation loop intersects the source grid")

    sources = cfg.grid.nodes()[source_mask(cfg)]
    logger.debug(f"Born sum over {len(sources)} of {cfg.grid.size} cells at {len(points)} loop points")
    weighted = np.einsum('nab,nb->na', source_matrices(cfg, sources), incident_wave(cfg, sources))
    weighted = weighted * cfg.grid.cell_volume

    def correction(chunk: np.ndarray) -> np.ndarray:
        rows = []
        for x in chunk:
            d = np.linalg.norm(sources - x, axis=1)
            if np.any(d < COINCIDENT_TOL):
                raise CoincidentPoints(f"loop point {tuple(x)} coincides with a source cell")
            rows.append(pairwise_sum(_kernel(cfg.k, d)[:, None] * weighted))
        return np.array(rows, dtype=complex).reshape(-1, 4)

    psi0 = incident_wave(cfg, points)
    psi = psi0 - parallel_rows(correction, points)
    return WaveSample(points=points, psi=psi, reference=reference_phase(cfg, points),
                      spinor=np.asarray(cfg.spinor))


def phase_constancy_metric(sample: WaveSample) -> float:
    """
    Relative spread of D(x_j) around the loop: std(|D|)/mean(|D|) plus the RMS
    wrapped deviation of arg D about its circular mean. Zero exactly when D is
    constant.
    """
    ratios = sample.ratios()
    if ratios.shape[0] < MIN_LOOP_SAMPLES:
        raise DegenerateSample(f"need at least {MIN_LOOP_SAMPLES} loop samples, got {ratios.shape[0]}")
    magnitudes = np.abs(ratios)
    if np.any(magnitudes < DEGENERATE_TOL):
        raise DegenerateSample("wave function vanishes at a loop point")
    relative_spread = float(np.std(magnitudes) / np.mean(magnitudes))
    angles = np.angle(ratios)
    centre = circmean(angles, high=np.pi, low=-np.pi)
    deviation = np.angle(np.exp(1j * (angles - centre)))
    return relative_spread + float(np.sqrt(np.mean(deviation ** 2)))


def boson_fermion_comparison(cfg: ProbeConfig) -> Dict[str, Any]:
    """
    Phase-constancy metric without (boson) and with (fermion) the spin source
    on identical geometry.

    Returns:
        Dict with boson_metric, fermion_metric, ratio, grid, r_cut, rho_cut,
        k, g, e, flag_not_quantized and the fermion phase_ratios
    """
    boson = born_correction(replace(cfg, source_scale=0.0))
    fermion = born_correction(cfg)
    boson_metric = phase_constancy_metric(boson)
    fermion_metric = phase_constancy_metric(fermion)
    ratio = fermion_metric / max(boson_metric, METRIC_FLOOR)
    flag = fermion_metric > FLAG_FACTOR * boson_metric
    logger.info(f"Probe g={cfg.monopole.g} grid={cfg.grid.dims}: boson={boson_metric:.3e} "
                f"fermion={fermion_metric:.3e} not_quantized={flag}")
    return {
        'boson_metric': boson_metric,
        'fermion_metric': fermion_metric,
        'ratio': ratio,
        'grid': list(cfg.grid.dims),
        'r_cut': cfg.r_cut,
        'rho_cut': cfg.rho_cut,
        'k': cfg.k,
        'g': cfg.monopole.g,
        'e': cfg.monopole.e,
        'flag_not_quantized': bool(flag),
        'phase_ratios': [[float(d.real), float(d.imag)] for d in fermion.ratios()],
    }


def cutoff_sweep(cfg: ProbeConfig, factors: Iterable[float] = (0.5, 1.0, 2.0)) -> List[Dict[str, Any]]:
    """Comparison reports with both cutoffs scaled by each factor."""
    return [boson_fermion_comparison(cfg.with_cutoffs(factor)) for factor in factors]
