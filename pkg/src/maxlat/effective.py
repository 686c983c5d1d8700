"""Homogenized linear elasticity: correctors, effective tensor, macroscopic stress.

The effective energy at a macroscopic symmetric strain is the minimum average
linear spring energy over periodic displacement correctors.  Symmetric 2x2
matrices are represented in the orthonormal basis {e11, e22, (e12+e21)/sqrt2},
so the 3x3 matrix form of the effective tensor is inner-product honest and its
rank and kernel can be read off directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import ThetaAtSingularity
from .lattice import PeriodicLattice, build_twisted_kagome
from .rigidity import DEFAULT_TOL, assemble_compatibility

_SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class SymStrain:
    """Symmetric 2x2 strain with entries (xx, yy, xy)."""

    xx: float
    yy: float
    xy: float

    def matrix(self) -> np.ndarray:
        return np.array([[self.xx, self.xy], [self.xy, self.yy]])

    def coords(self) -> np.ndarray:
        """Coordinates in the orthonormal basis {e11, e22, (e12+e21)/sqrt2}."""
        return np.array([self.xx, self.yy, _SQRT2 * self.xy])

    @staticmethod
    def from_matrix(m) -> "SymStrain":
        m = np.asarray(m, dtype=float)
        return SymStrain(float(m[0, 0]), float(m[1, 1]), 0.5 * float(m[0, 1] + m[1, 0]))

    @staticmethod
    def from_coords(c) -> "SymStrain":
        return SymStrain(float(c[0]), float(c[1]), float(c[2]) / _SQRT2)

    @staticmethod
    def identity() -> "SymStrain":
        return SymStrain(1.0, 1.0, 0.0)


def strain_basis() -> tuple[SymStrain, SymStrain, SymStrain]:
    return (
        SymStrain(1.0, 0.0, 0.0),
        SymStrain(0.0, 1.0, 0.0),
        SymStrain(0.0, 0.0, 1.0 / _SQRT2),
    )


def strain_extension_vector(lat: PeriodicLattice, xi: SymStrain) -> np.ndarray:
    """Per-edge affine extensions l * b^T xi b for the strain's affine displacement."""
    bonds = lat.bond_directions()
    m = xi.matrix()
    return lat.rest_lengths() * np.einsum("ri,ij,rj->r", bonds, m, bonds)


def _corrector_system(lat: PeriodicLattice, xi: SymStrain):
    c = assemble_compatibility(lat).matrix
    k = lat.stiffnesses()
    b = strain_extension_vector(lat, xi)
    ktc = c.T * k  # C^T K
    return c, k, b, ktc @ c, -(ktc @ b)


def minimum_norm_corrector(lat: PeriodicLattice, xi: SymStrain) -> np.ndarray:
    """Minimum-norm periodic corrector minimizing the cell energy at strain xi.

    Solves the stationarity condition C^T K (b_xi + C phi) = 0 through the
    SVD pseudo-inverse, which picks the unique solution orthogonal to ker(C).
    """
    _, _, _, lhs, rhs = _corrector_system(lat, xi)
    phi = np.linalg.pinv(lhs, rcond=1e-12) @ rhs
    return phi.reshape(-1, 2)


def minimum_norm_corrector_qr(lat: PeriodicLattice, xi: SymStrain) -> np.ndarray:
    """Same minimum-norm corrector through a rank-revealing QR factorization.

    Kept as an independent route for cross-validation of the pseudo-inverse
    implementation.
    """
    _, _, _, lhs, rhs = _corrector_system(lat, xi)
    q, r, perm = scipy.linalg.qr(lhs, pivoting=True)
    diag = np.abs(np.diag(r))
    rank = int(np.sum(diag > 1e-12 * max(diag[0], 1.0)))
    rr = r[:rank]
    cr = (q.T @ rhs)[:rank]
    # minimum-norm solution of rr @ (phi[perm]) = cr
    psi = rr.T @ np.linalg.solve(rr @ rr.T, cr)
    phi = np.empty_like(psi)
    phi[perm] = psi
    return phi.reshape(-1, 2)


def effective_energy(lat: PeriodicLattice, xi: SymStrain) -> float:
    """Minimum average cell energy at macroscopic strain xi (per unit area)."""
    c, k, b, _, _ = _corrector_system(lat, xi)
    phi = minimum_norm_corrector(lat, xi).reshape(-1)
    ext = b + c @ phi
    return 0.5 * float(ext @ (k * ext)) / lat.cell_area


def self_stress_from_strain(lat: PeriodicLattice, xi: SymStrain) -> np.ndarray:
    """Optimal tensions K (b_xi + C phi*); a self-stress, linear in xi."""
    c, k, b, _, _ = _corrector_system(lat, xi)
    phi = minimum_norm_corrector(lat, xi).reshape(-1)
    return k * (b + c @ phi)


def macroscopic_stress(lat: PeriodicLattice, xi: SymStrain) -> np.ndarray:
    """Average stress (1/S) sum t*_r l_r b_r (x) b_r realized by the optimal tensions."""
    t = self_stress_from_strain(lat, xi)
    bonds = lat.bond_directions()
    w = t * lat.rest_lengths()
    sigma = np.einsum("r,ri,rj->ij", w, bonds, bonds) / lat.cell_area
    return 0.5 * (sigma + sigma.T)


@dataclass(frozen=True)
class EffectiveTensor:
    """Symmetric 3x3 matrix form of the effective Hooke law, with rank and kernel."""

    matrix: np.ndarray
    rank: int
    kernel: tuple[SymStrain, ...]
    tol: float

    def energy(self, xi: SymStrain) -> float:
        c = xi.coords()
        return 0.5 * float(c @ self.matrix @ c)

    def apply(self, xi: SymStrain) -> np.ndarray:
        """Macroscopic stress A_eff xi as a symmetric 2x2 matrix."""
        return SymStrain.from_coords(self.matrix @ xi.coords()).matrix()

    def to_dict(self) -> dict:
        return {
            "basis": "e11,e22,sym12/sqrt2",
            "matrix": [list(row) for row in self.matrix],
            "rank": self.rank,
            "kernel": [[k.xx, k.yy, k.xy] for k in self.kernel],
            "tol": self.tol,
        }


def effective_tensor(lat: PeriodicLattice, tol: float = DEFAULT_TOL) -> EffectiveTensor:
    """Assemble the effective tensor column by column from the basis strains."""
    cols = [macroscopic_stress(lat, e) for e in strain_basis()]
    m = np.column_stack([SymStrain.from_matrix(s).coords() for s in cols])
    m = 0.5 * (m + m.T)
    evals, evecs = np.linalg.eigh(m)
    cut = tol * max(np.max(np.abs(evals)), 1.0)
    kernel = tuple(
        SymStrain.from_coords(evecs[:, k]) for k in range(3) if abs(evals[k]) < cut
    )
    rank = 3 - len(kernel)
    return EffectiveTensor(m, rank, kernel, tol)


@dataclass(frozen=True)
class BlowupSample:
    theta: float
    corrector_norm: float
    c_theta: float
    scaled_norm: float


def twist_rate(theta: float) -> float:
    """Rate of isotropic compression of the twisted lattice, zero at theta = pi/3."""
    return math.sin(theta - math.pi / 3) / math.cos(math.pi / 3 - theta)


def corrector_blowup_scan(thetas) -> list[BlowupSample]:
    """Corrector norms at the identity strain across twisted lattices.

    The product norm * |twist rate| stays near the norm of the mechanism's
    periodic oscillation, so the corrector itself blows up near pi/3.
    """
    out = []
    for theta in thetas:
        if abs(theta - math.pi / 3) < 1e-12:
            raise ThetaAtSingularity("corrector at identity strain diverges at pi/3")
        lat = build_twisted_kagome(theta)
        phi = minimum_norm_corrector(lat, SymStrain.identity())
        norm = float(np.linalg.norm(phi))
        c = twist_rate(theta)
        out.append(BlowupSample(theta, norm, c, norm * abs(c)))
    return out
