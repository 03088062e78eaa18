"""
Gamma-matrix algebra for the Dirac to Klein-Gordon reduction.

Works in momentum space: on plane waves d_mu -> -i p_mu, so the squared Dirac
operator (p - m)(p + m) must equal (p^2 - m^2) times the identity, and each of
the four spinor components then obeys the Klein-Gordon equation.
"""
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
from scipy.stats import unitary_group

from errors import InvalidIndex, Unsupported

logger = logging.getLogger(__name__)

METRIC = np.diag([1.0, -1.0, -1.0, -1.0])

# Tolerance for the per-component Klein-Gordon comparison
COMPONENT_TOL = 1e-12

DEFAULT_SEED = 0xD1AC


class Representation(str, Enum):
    DIRAC = 'dirac'


def pauli() -> np.ndarray:
    """The three Pauli matrices, shape (3, 2, 2)."""
    return np.array([
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ], dtype=complex)


@dataclass(frozen=True, eq=False)
class GammaBasis:
    """
    Four 4x4 gamma matrices, the metric they anticommute to, and the
    off-diagonal block matrix rho1 used by the electric source term.
    """
    gammas: np.ndarray
    metric: np.ndarray
    rho1: np.ndarray
    representation: str = Representation.DIRAC.value

    def __getitem__(self, mu: int) -> np.ndarray:
        _check_index(mu)
        return self.gammas[mu]


def _check_index(mu):
    if isinstance(mu, bool) or not isinstance(mu, (int, np.integer)) or not 0 <= mu <= 3:
        raise InvalidIndex(f"Lorentz index must be 0..3, got {mu!r}")


def gamma_basis(representation: str = Representation.DIRAC) -> GammaBasis:
    """
    Gamma matrices in the requested representation.

    Args:
        representation: only 'dirac' is available

    Returns:
        GammaBasis with gamma0 = diag(1, 1, -1, -1), gamma^k = [[0, s_k], [-s_k, 0]]
    """
    try:
        rep = Representation(str(getattr(representation, 'value', representation)).lower())
    except ValueError:
        raise Unsupported(f"unknown gamma representation: {representation!r}")
    identity = np.eye(2, dtype=complex)
    zero = np.zeros((2, 2), dtype=complex)
    gammas = [np.block([[identity, zero], [zero, -identity]])]
    for sigma in pauli():
        gammas.append(np.block([[zero, sigma], [-sigma, zero]]))
    rho1 = np.block([[zero, identity], [identity, zero]])
    return GammaBasis(gammas=np.array(gammas), metric=METRIC.copy(), rho1=rho1,
                      representation=rep.value)


def anticommutator(basis: GammaBasis, mu: int, nu: int) -> np.ndarray:
    """gamma^mu gamma^nu + gamma^nu gamma^mu"""
    a, b = basis[mu], basis[nu]
    return a @ b + b @ a


def anticommutation_residual(basis: GammaBasis) -> float:
    """Largest entry of {gamma^mu, gamma^nu} - 2 g^{mu nu} I over all 16 pairs."""
    identity = np.eye(4)
    worst = 0.0
    for mu in range(4):
        for nu in range(4):
            target = 2.0 * basis.metric[mu, nu] * identity
            worst = max(worst, float(np.max(np.abs(anticommutator(basis, mu, nu) - target))))
    return worst


def gamma5(basis: GammaBasis) -> np.ndarray:
    """i gamma0 gamma1 gamma2 gamma3"""
    g = basis.gammas
    return 1j * g[0] @ g[1] @ g[2] @ g[3]


def sigma_spin() -> np.ndarray:
    """Block-diagonal spin matrices Sigma_k = diag(s_k, s_k), shape (3, 4, 4)."""
    zero = np.zeros((2, 2), dtype=complex)
    return np.array([np.block([[s, zero], [zero, s]]) for s in pauli()])


@dataclass(frozen=True)
class FourMomentum:
    """Four-momentum (E, p1, p2, p3) and mass; off-shell values are allowed."""
    p: Sequence[float]
    m: float = 0.0

    def __post_init__(self):
        vec = np.asarray(self.p, dtype=float)
        if vec.shape != (4,) or not np.all(np.isfinite(vec)) or not np.isfinite(self.m):
            raise ValueError(f"need four finite momentum components and a finite mass, got {self.p}, {self.m}")
        object.__setattr__(self, 'p', tuple(float(c) for c in vec))

    @property
    def vector(self) -> np.ndarray:
        return np.asarray(self.p, dtype=float)

    def square(self) -> float:
        """p^2 = E^2 - |p|^2"""
        v = self.vector
        return float(v @ METRIC @ v)


def slash(basis: GammaBasis, p: Sequence[float]) -> np.ndarray:
    """g_{mu nu} gamma^mu p^nu = gamma0 E - gamma . p"""
    lowered = basis.metric @ np.asarray(p, dtype=float)
    return np.einsum('m,mab->ab', lowered, basis.gammas)


def _squared_operator(basis: GammaBasis, pm: FourMomentum) -> np.ndarray:
    ps = slash(basis, pm.vector)
    identity = np.eye(4)
    return (ps - pm.m * identity) @ (ps + pm.m * identity)


def kg_factorization_residual(basis: GammaBasis, pm: FourMomentum) -> float:
    """max |(p - m)(p + m) - (p^2 - m^2) I|"""
    target = (pm.square() - pm.m ** 2) * np.eye(4)
    return float(np.max(np.abs(_squared_operator(basis, pm) - target)))


def component_kg_check(basis: GammaBasis, pm: FourMomentum, tol: float = COMPONENT_TOL) -> List[bool]:
    """
    Apply the squared operator to each standard basis spinor and compare with
    (p^2 - m^2) times that spinor.

    Returns:
        Four booleans, one per spinor component
    """
    operator = _squared_operator(basis, pm)
    scale = pm.square() - pm.m ** 2
    results = []
    for i in range(4):
        spinor = np.zeros(4, dtype=complex)
        spinor[i] = 1.0
        results.append(bool(np.max(np.abs(operator @ spinor - scale * spinor)) < tol))
    return results


def symmetrization_check(basis: GammaBasis, p: Sequence[float]) -> float:
    """
    Residual between sum gamma^nu gamma^mu p_nu p_mu and its symmetrized form
    sum (1/2){gamma^nu, gamma^mu} p_nu p_mu.
    """
    lowered = basis.metric @ np.asarray(p, dtype=float)
    g = basis.gammas
    plain = np.einsum('n,m,nab,mbc->ac', lowered, lowered, g, g)
    sym = np.zeros((4, 4), dtype=complex)
    for nu in range(4):
        for mu in range(4):
            sym += 0.5 * anticommutator(basis, nu, mu) * lowered[nu] * lowered[mu]
    return float(np.max(np.abs(plain - sym)))


def similarity_transform(basis: GammaBasis, s: np.ndarray) -> GammaBasis:
    """Basis with gamma^mu -> S gamma^mu S^-1."""
    s_inv = np.linalg.inv(s)
    gammas = np.array([s @ g @ s_inv for g in basis.gammas])
    return GammaBasis(gammas=gammas, metric=basis.metric, rho1=s @ basis.rho1 @ s_inv,
                      representation=basis.representation)


def random_unitaries(count: int, rng: np.random.Generator) -> List[np.ndarray]:
    """Haar-random 4x4 unitaries."""
    return [unitary_group.rvs(4, random_state=rng) for _ in range(count)]


def random_momenta(count: int, rng: np.random.Generator, bound: float = 10.0) -> List[FourMomentum]:
    """Momenta and masses uniform in [-bound, bound]^5."""
    draws = rng.uniform(-bound, bound, size=(count, 5))
    return [FourMomentum(p=row[:4], m=row[4]) for row in draws]


def dirac_suite(basis: Optional[GammaBasis] = None, n_momenta: int = 10000,
                n_components: int = 1000, n_unitaries: int = 100,
                seed: int = DEFAULT_SEED, tol: float = COMPONENT_TOL) -> Dict[str, Any]:
    """
    Run the gamma-algebra checks.

    Returns:
        Dict with anticommutation_pass, factorization_max_residual, component_pass
        (four booleans), similarity_max_residual and trace_max
    """
    basis = basis or gamma_basis()
    rng = np.random.default_rng(seed)

    anticommutation_pass = anticommutation_residual(basis) == 0.0

    factorization = 0.0
    for pm in random_momenta(n_momenta, rng):
        factorization = max(factorization, kg_factorization_residual(basis, pm))

    component_pass = [True] * 4
    for pm in random_momenta(n_components, rng):
        component_pass = [a and b for a, b in zip(component_pass, component_kg_check(basis, pm, tol))]

    similarity = 0.0
    for s in random_unitaries(n_unitaries, rng):
        similarity = max(similarity, anticommutation_residual(similarity_transform(basis, s)))

    trace_max = float(max(abs(np.trace(g)) for g in basis.gammas))
    logger.info(f"Gamma suite: anticommutation={anticommutation_pass} "
                f"factorization={factorization:.3e} similarity={similarity:.3e}")
    return {
        'anticommutation_pass': bool(anticommutation_pass),
        'factorization_max_residual': factorization,
        'component_pass': component_pass,
        'similarity_max_residual': similarity,
        'trace_max': trace_max,
    }
